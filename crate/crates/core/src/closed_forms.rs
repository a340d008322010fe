//! Closed-form profiles (sphere, catenoid) and the definite integrals for
//! the catenoid slab half-width and the unduloid/nodoid half-periods.
//!
//! All half-period integrands share the radicand
//! `W(x) = x^{4n-2} - (E + H x^{2n})^2`, which vanishes like a simple root
//! at both radii. It is factored as `(x - x1)(x2 - x) R(x)` with `R`
//! obtained by polynomial deflation, so the integrands see the endpoint
//! distances exactly.

use std::f64::consts::PI;

use crate::classify::{check_params, inner_polynomial, normalize, outer_polynomial, radius_bounds, FamilyLabel};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::quadrature::{
    gauss_kronrod, singular_quadrature_with, Abscissa, Scheme, SingularitySpec, DEFAULT_TOLERANCE,
};

pub use crate::quadrature::{singular_quadrature, QuadratureResult};

/// Height of the upper half of `S_H` above its equator at radius `x`.
pub fn sphere_profile(h: f64, x: f64) -> Result<f64> {
    check_sphere(h, x)?;
    let hx = (h * x).min(1.0);
    Ok((hx * (1.0 - hx * hx).sqrt() + hx.acos()) / (2.0 * h * h))
}

/// `dt/dx = -H x^2 / sqrt(1 - H^2 x^2)` for `x < 1/H`.
pub fn sphere_profile_derivative(h: f64, x: f64) -> Result<f64> {
    check_sphere(h, x)?;
    let hx = h * x;
    if hx >= 1.0 {
        return Err(Error::Domain(format!("dt/dx is unbounded at the equator x = {x}")));
    }
    Ok(-h * x * x / (1.0 - hx * hx).sqrt())
}

/// `d^2t/dx^2 = -H x (2 - H^2 x^2) / (1 - H^2 x^2)^{3/2}`.
pub fn sphere_profile_second_derivative(h: f64, x: f64) -> Result<f64> {
    check_sphere(h, x)?;
    let w = 1.0 - h * h * x * x;
    if w <= 0.0 {
        return Err(Error::Domain(format!("d2t/dx2 is unbounded at the equator x = {x}")));
    }
    Ok(-h * x * (2.0 - h * h * x * x) / (w * w.sqrt()))
}

/// Vertical distance from the equator of `S_H` to either pole.
pub fn sphere_half_height(h: f64) -> Result<f64> {
    check_sphere(h, 0.0)?;
    Ok(PI / (4.0 * h * h))
}

/// Smooth parametrization of the whole generating curve of `S_H`:
/// `x = cos(psi)/H`, `t = (sin(2 psi)/2 + psi)/(2H^2)` for
/// `psi` in `[-pi/2, pi/2]`, from the lower pole through the equator to the
/// upper pole. Returns `(x, t, dx/dpsi, dt/dpsi)`.
pub fn sphere_parametric(h: f64, psi: f64) -> Result<(f64, f64, f64, f64)> {
    check_sphere(h, 0.0)?;
    if !(psi.abs() <= PI / 2.0) {
        return Err(Error::Domain(format!("psi = {psi} outside [-pi/2, pi/2]")));
    }
    let (s, c) = psi.sin_cos();
    Ok((
        c / h,
        (0.5 * (2.0 * psi).sin() + psi) / (2.0 * h * h),
        -s / h,
        c * c / (h * h),
    ))
}

fn check_sphere(h: f64, x: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("sphere needs H > 0, got {h}")));
    }
    if !(x >= 0.0 && h * x <= 1.0 + 1e-15) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1/H]")));
    }
    Ok(())
}

/// Catenoid of `H^1`: `x(t) = sqrt(t^2 + E^4) / E`.
pub fn catenoid_profile_h1(e: f64, t: f64) -> Result<f64> {
    check_catenoid(e)?;
    Ok((t * t + e.powi(4)).sqrt() / e)
}

/// The same curve as a graph over the radius: `t = E sqrt(x^2 - E^2)`.
pub fn catenoid_height_h1(e: f64, x: f64) -> Result<f64> {
    check_catenoid(e)?;
    if !(x >= e) {
        return Err(Error::Domain(format!("x = {x} below the neck radius {e}")));
    }
    Ok(e * ((x - e) * (x + e)).sqrt())
}

fn check_catenoid(e: f64) -> Result<()> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::Domain(format!("catenoid needs E > 0, got {e}")));
    }
    Ok(())
}

/// Pieces of `int_{x_c}^inf E x / sqrt(x^{4n-2} - E^2) dx` with
/// `x_c = E^{1/(2n-1)}`.
struct Slab {
    n: usize,
    e: f64,
    xc: f64,
}

impl Slab {
    fn new(n: usize, e: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::InvalidParameter(format!("slab half-width needs E > 0, got {e}")));
        }
        Ok(Slab {
            n,
            e,
            xc: e.powf(1.0 / (2 * n - 1) as f64),
        })
    }

    /// Integrand with `x - x_c = d` supplied directly.
    fn near(&self, x: f64, d: f64) -> f64 {
        let m = 2 * self.n - 1;
        // x^{2n-1} - E = (x - x_c) sum_k x^k x_c^{m-1-k}
        let s: f64 = (0..m)
            .map(|k| x.powi(k as i32) * self.xc.powi((m - 1 - k) as i32))
            .sum();
        self.e * x / (d * s * (x.powi(m as i32) + self.e)).sqrt()
    }

    /// Tail integrand after `x = 1/u`.
    fn tail(&self, u: f64) -> f64 {
        let n = self.n as i32;
        self.e * u.powi(2 * n - 4) / (1.0 - self.e * self.e * u.powi(4 * n - 2)).sqrt()
    }

    fn cut(&self) -> f64 {
        2.0 * self.xc
    }

    fn near_piece(&self, scheme: Scheme, upper: f64) -> Result<QuadratureResult> {
        singular_quadrature_with(
            scheme,
            |p: Abscissa| self.near(p.x, p.from_a),
            self.xc,
            upper,
            SingularitySpec::LEFT,
            DEFAULT_TOLERANCE,
        )
    }
}

/// Half-width `t_inf` of the slab containing a catenoid (`H = 0`, `E > 0`).
/// Finite only for `n >= 2`.
pub fn catenoid_slab_halfwidth(n: usize, e: f64) -> Result<QuadratureResult> {
    catenoid_slab_halfwidth_with(Scheme::TanhSinh, n, e)
}

/// `t_inf` by one of two independent pipelines: tanh-sinh near the neck and
/// Gauss-Kronrod on the tail, or square-root substitution near the neck and
/// tanh-sinh on the tail.
pub fn catenoid_slab_halfwidth_with(scheme: Scheme, n: usize, e: f64) -> Result<QuadratureResult> {
    let slab = Slab::new(n, e)?;
    if n == 1 {
        return Err(Error::Divergent(format!(
            "for n = 1 the integrand tends to E = {e} and the slab half-width is infinite"
        )));
    }
    let near = slab.near_piece(scheme, slab.cut())?;
    let u_max = 1.0 / slab.cut();
    let tail = match scheme {
        Scheme::TanhSinh => gauss_kronrod(|u| slab.tail(u), 0.0, u_max, DEFAULT_TOLERANCE)?,
        Scheme::SqrtSubstitution => singular_quadrature_with(
            Scheme::TanhSinh,
            |p: Abscissa| slab.tail(p.x),
            0.0,
            u_max,
            SingularitySpec::REGULAR,
            DEFAULT_TOLERANCE,
        )?,
    };
    Ok(near.combine(tail))
}

/// `int_{x_c}^{cutoff} E x / sqrt(x^{4n-2} - E^2) dx`, defined for every
/// `n`; used to exhibit the divergence for `n = 1`.
pub fn catenoid_partial_integral(n: usize, e: f64, cutoff: f64) -> Result<QuadratureResult> {
    let slab = Slab::new(n, e)?;
    if !(cutoff >= slab.xc) || !cutoff.is_finite() {
        return Err(Error::Domain(format!("cutoff {cutoff} below the neck radius {}", slab.xc)));
    }
    let upper = cutoff.min(slab.cut());
    let near = slab.near_piece(Scheme::TanhSinh, upper)?;
    if cutoff <= slab.cut() {
        return Ok(near);
    }
    let far = gauss_kronrod(
        |x| slab.near(x, x - slab.xc),
        slab.cut(),
        cutoff,
        DEFAULT_TOLERANCE,
    )?;
    Ok(near.combine(far))
}

/// Factored radicand for the periodic families (normalized `H > 0`).
struct Period {
    n: usize,
    h: f64,
    e: f64,
    x1: f64,
    x2: f64,
    /// `W = (x - x1)(x2 - x) rest(x)`.
    rest: Polynomial,
}

impl Period {
    fn new(n: usize, h: f64, e: f64, expect: FamilyLabel) -> Result<Self> {
        check_params(n, h, e)?;
        let family = crate::classify::classify(n, h, e)?;
        if family != expect {
            return Err(Error::InvalidParameter(format!(
                "({n}, {h}, {e}) is a {family}, not a {expect}"
            )));
        }
        let (h, e) = normalize(h, e);
        let radii = radius_bounds(n, h, e)?;
        let (x1, x2) = (radii.x1, radii.x2);
        let outer = outer_polynomial(n, h, e);
        let inner = inner_polynomial(n, h, e);
        // x^{2n-1} - (E + H x^{2n}) = -outer and x^{2n-1} + E + H x^{2n} = -inner.
        let rest = if e > 0.0 {
            // -outer = (x - x1)(x2 - x) q; -inner > 0 on [x1, x2].
            let (q, _) = outer.deflate(x1);
            let (q, _) = q.deflate(x2);
            (&q * &inner).scale(-1.0)
        } else {
            // -outer = (x2 - x) q_a and -inner = (x - x1)(-q_b).
            let (qa, _) = outer.deflate(x2);
            let (qb, _) = inner.deflate(x1);
            (&qa * &qb).scale(-1.0)
        };
        Ok(Period { n, h, e, x1, x2, rest })
    }

    fn sqrt_w(&self, p: &Abscissa) -> f64 {
        (p.from_a * p.from_b * self.rest.eval(p.x)).sqrt()
    }

    fn a(&self, x: f64) -> f64 {
        self.e + self.h * x.powi(2 * self.n as i32)
    }

    fn raw(&self, scheme: Scheme) -> Result<QuadratureResult> {
        singular_quadrature_with(
            scheme,
            |p: Abscissa| self.a(p.x) * p.x / self.sqrt_w(&p),
            self.x1,
            self.x2,
            SingularitySpec::BOTH,
            DEFAULT_TOLERANCE,
        )
    }

    fn regularized(&self, scheme: Scheme) -> Result<QuadratureResult> {
        let nf = self.n as f64;
        let m = 2 * self.n as i32 - 1;
        let r = singular_quadrature_with(
            scheme,
            |p: Abscissa| {
                let a = self.a(p.x);
                (2.0 * (nf - 1.0) * a * a / p.x.powi(m) + p.x.powi(m)) / self.sqrt_w(&p)
            },
            self.x1,
            self.x2,
            SingularitySpec::BOTH,
            DEFAULT_TOLERANCE,
        )?;
        Ok(r.scaled(1.0 / (2.0 * nf * self.h)))
    }
}

/// Nodoid half-period `t2` (normalized `H > 0 > E`) from the regularized
/// integrand with its strictly positive numerator. The raw integrand
/// `(E + H x^{2n}) x / sqrt(W)` is integrated as well and the two values
/// must agree.
pub fn nodoid_halfperiod(n: usize, h: f64, e: f64) -> Result<QuadratureResult> {
    let period = Period::new(n, h, e, FamilyLabel::Nodoid)?;
    let reg = period.regularized(Scheme::TanhSinh)?;
    let raw = period.raw(Scheme::TanhSinh)?;
    let allowed = 1e-8 * (1.0 + reg.value.abs()) + reg.error_estimate + raw.error_estimate;
    if (raw.value - reg.value).abs() > allowed {
        return Err(Error::QuadratureMismatch {
            a: raw.value,
            b: reg.value,
        });
    }
    Ok(reg)
}

/// Raw-integrand value of the nodoid half-period.
pub fn nodoid_halfperiod_raw(n: usize, h: f64, e: f64) -> Result<QuadratureResult> {
    Period::new(n, h, e, FamilyLabel::Nodoid)?.raw(Scheme::TanhSinh)
}

/// Regularized-integrand value of the nodoid half-period, by either scheme.
pub fn nodoid_halfperiod_regularized(scheme: Scheme, n: usize, h: f64, e: f64) -> Result<QuadratureResult> {
    Period::new(n, h, e, FamilyLabel::Nodoid)?.regularized(scheme)
}

/// Unduloid half-period `int_{x1}^{x2} (E + H x^{2n}) x / sqrt(W) dx`, the
/// height gained between the minimum and the maximum radius
/// (`dt/dx = cot(sigma)`).
pub fn unduloid_halfperiod(n: usize, h: f64, e: f64) -> Result<QuadratureResult> {
    Period::new(n, h, e, FamilyLabel::Unduloid)?.raw(Scheme::TanhSinh)
}

/// Unduloid half-period by either scheme.
pub fn unduloid_halfperiod_with(scheme: Scheme, n: usize, h: f64, e: f64) -> Result<QuadratureResult> {
    Period::new(n, h, e, FamilyLabel::Unduloid)?.raw(scheme)
}
