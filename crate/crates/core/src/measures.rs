//! Perimeter and volume of rotational hypersurfaces and the bodies they
//! bound, and a numerical check of the first variation of perimeter.
//!
//! A profile `(x(u), t(u))` generates `{(x omega, t) : omega in S^{2n-1}}`.
//! Its perimeter is `sigma_{2n-1} int x^{2n-1} sqrt(x^2 x'^2 + t'^2) du`
//! and the enclosed volume `omega_{2n} int x^{2n} t' du`. Both integrands
//! are invariant under reparametrization, so profiles need not be traced
//! by arclength.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::closed_forms::sphere_parametric;
use crate::curvature::{mean_curvature_rotational, ImmersionJet, ProfileJet};
use crate::error::{Error, Result};
use crate::heisenberg::horizontal_part;
use crate::profile_ode::{ProfileState, Trajectory};
use crate::quadrature::{kronrod15, QuadratureResult};

/// Relative agreement required between the Gram-determinant density and
/// the closed-form density.
pub const DENSITY_TOLERANCE: f64 = 1e-12;
const DENSITY_CHECK_POINTS: usize = 16;
const DEFAULT_PANELS: usize = 64;
const AXIS_SUPPORT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// No claim about the ends; perimeter and volume are refused.
    Open,
    /// A declared piece of a larger hypersurface. Perimeter only.
    Truncated,
    /// Both ends closed by horizontal discs, which add nothing to
    /// `int x^{2n} dt`. Perimeter (lateral) and volume.
    Capped,
    /// Both ends on the axis. Perimeter and volume.
    AxisToAxis,
}

type JetFn = Arc<dyn Fn(f64) -> ProfileJet + Send + Sync>;

#[derive(Clone)]
enum Curve {
    /// Arclength samples with `sigma'` at each sample.
    Sampled { samples: Vec<ProfileState>, rates: Vec<f64> },
    Parametric(JetFn),
}

/// Generating curve of a rotational hypersurface over a parameter interval.
#[derive(Clone)]
pub struct RotationalProfile {
    pub n: usize,
    pub closure: Closure,
    curve: Curve,
    start: f64,
    end: f64,
    orientation: f64,
    panels: usize,
}

impl std::fmt::Debug for RotationalProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RotationalProfile")
            .field("n", &self.n)
            .field("closure", &self.closure)
            .field("start", &self.start)
            .field("end", &self.end)
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl RotationalProfile {
    /// Profile traced by a trajectory of the profile system.
    pub fn from_trajectory(traj: &Trajectory, closure: Closure) -> Result<Self> {
        if traj.samples.len() != traj.rates.len() {
            return Err(Error::InvalidParameter(
                "trajectory has no dense-output rates (deserialized?)".into(),
            ));
        }
        Ok(RotationalProfile {
            n: traj.n,
            closure,
            curve: Curve::Sampled {
                samples: traj.samples.clone(),
                rates: traj.rates.clone(),
            },
            start: traj.first().s,
            end: traj.last().s,
            orientation: 1.0,
            panels: 1,
        })
    }

    /// Profile given by its jet as a function of a parameter on `[a, b]`.
    pub fn parametric<F>(n: usize, a: f64, b: f64, closure: Closure, jet: F) -> Result<Self>
    where
        F: Fn(f64) -> ProfileJet + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("bad parameter interval [{a}, {b}]")));
        }
        Ok(RotationalProfile {
            n,
            closure,
            curve: Curve::Parametric(Arc::new(jet)),
            start: a,
            end: b,
            orientation: 1.0,
            panels: DEFAULT_PANELS,
        })
    }

    /// Vertical segment `x = r`, `0 <= t <= height`, capped at both ends.
    pub fn cylinder_band(n: usize, r: f64, height: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        Self::parametric(n, 0.0, height, Closure::Capped, move |s| ProfileJet {
            x: r,
            t: s,
            dx: 0.0,
            dt: 1.0,
            ddx: 0.0,
            ddt: 0.0,
        })
    }

    /// Horizontal segment `t = 0`, `a <= x <= b`.
    pub fn hyperplane_piece(n: usize, a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be >= 0, got {a}")));
        }
        Self::parametric(n, a, b, Closure::Truncated, |s| ProfileJet {
            x: s,
            t: 0.0,
            dx: 1.0,
            dt: 0.0,
            ddx: 0.0,
            ddt: 0.0,
        })
    }

    /// Whole generating curve of `S_H` from the lower to the upper pole.
    pub fn sphere(n: usize, h: f64) -> Result<Self> {
        sphere_parametric(h, 0.0)?;
        let h2 = h * h;
        Self::parametric(n, -PI / 2.0, PI / 2.0, Closure::AxisToAxis, move |psi| {
            let (s, c) = psi.sin_cos();
            ProfileJet {
                x: c / h,
                t: (0.5 * (2.0 * psi).sin() + psi) / (2.0 * h2),
                dx: -s / h,
                dt: c * c / h2,
                ddx: -c / h,
                ddt: -2.0 * s * c / h2,
            }
        })
    }

    /// The same curve restricted to the parameter interval `[a, b]`.
    pub fn restricted(&self, a: f64, b: f64, closure: Closure) -> Result<Self> {
        if !(self.start <= a && a <= b && b <= self.end) {
            return Err(Error::InvalidParameter(format!(
                "[{a}, {b}] is not inside [{}, {}]",
                self.start, self.end
            )));
        }
        let mut out = self.clone();
        out.start = a;
        out.end = b;
        out.closure = closure;
        Ok(out)
    }

    /// The curve traversed backwards, which flips the sign of the volume.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.orientation = -self.orientation;
        out
    }

    /// Kronrod panels per parameter interval (per sample interval for
    /// sampled profiles).
    pub fn with_resolution(&self, panels: usize) -> Self {
        let mut out = self.clone();
        out.panels = panels.max(1);
        out
    }

    pub fn resolution(&self) -> usize {
        self.panels
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    /// Jet at parameter `u` (second derivatives from `sigma'` for sampled
    /// profiles).
    pub fn jet(&self, u: f64) -> Result<ProfileJet> {
        match &self.curve {
            Curve::Parametric(f) => Ok(f(u)),
            Curve::Sampled { samples, rates } => sampled_jet(samples, rates, u),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![self.start];
        match &self.curve {
            Curve::Parametric(_) => {
                let w = (self.end - self.start) / self.panels as f64;
                for i in 1..self.panels {
                    pts.push(self.start + i as f64 * w);
                }
            }
            Curve::Sampled { samples, .. } => {
                for p in samples.iter().filter(|p| p.s > self.start && p.s < self.end) {
                    let prev = *pts.last().expect("starts non-empty");
                    let w = (p.s - prev) / self.panels as f64;
                    for i in 1..self.panels {
                        pts.push(prev + i as f64 * w);
                    }
                    pts.push(p.s);
                }
                if self.panels > 1 {
                    let prev = *pts.last().expect("starts non-empty");
                    let w = (self.end - prev) / self.panels as f64;
                    for i in 1..self.panels {
                        pts.push(prev + i as f64 * w);
                    }
                }
            }
        }
        pts.push(self.end);
        pts.dedup();
        pts
    }

    fn integrate<F: Fn(&ProfileJet, f64) -> f64>(&self, f: F) -> Result<QuadratureResult> {
        let pts = self.breakpoints();
        let mut out = QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        };
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        for w in pts.windows(2) {
            let (v, e) = kronrod15(
                &|u: f64| match self.jet(u) {
                    Ok(j) => f(&j, u),
                    Err(err) => {
                        failure.borrow_mut().get_or_insert(err);
                        0.0
                    }
                },
                w[0],
                w[1],
            );
            out.value += v;
            out.error_estimate += e;
            out.evaluations += 15;
        }
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        if !out.value.is_finite() {
            return Err(Error::NonConvergence {
                estimate: out.error_estimate,
                evaluations: out.evaluations,
            });
        }
        Ok(out)
    }

    fn sample_parameters(&self, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| self.start + (self.end - self.start) * (i as f64 + 0.5) / count as f64)
            .collect()
    }
}

fn sampled_jet(samples: &[ProfileState], rates: &[f64], s: f64) -> Result<ProfileJet> {
    let first = samples[0].s;
    let last = samples[samples.len() - 1].s;
    if !(s >= first && s <= last) {
        return Err(Error::Domain(format!("s = {s} outside [{first}, {last}]")));
    }
    let i = match samples.binary_search_by(|p| p.s.total_cmp(&s)) {
        Ok(i) => i.min(samples.len().saturating_sub(2)),
        Err(i) => i - 1,
    };
    if samples.len() == 1 {
        let p = samples[0];
        let (sin, cos) = p.sigma.sin_cos();
        return Ok(ProfileJet {
            x: p.x,
            t: p.t,
            dx: sin,
            dt: cos,
            ddx: cos * rates[0],
            ddt: -sin * rates[0],
        });
    }
    let (p, q) = (&samples[i], &samples[i + 1]);
    let h = q.s - p.s;
    let u = (s - p.s) / h;
    let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
    let h10 = u * (1.0 - u) * (1.0 - u);
    let h01 = u * u * (3.0 - 2.0 * u);
    let h11 = u * u * (u - 1.0);
    let herm = |a: f64, da: f64, b: f64, db: f64| h00 * a + h10 * h * da + h01 * b + h11 * h * db;
    let (ps, pc) = p.sigma.sin_cos();
    let (qs, qc) = q.sigma.sin_cos();
    let d00 = (6.0 * u * u - 6.0 * u) / h;
    let d10 = 3.0 * u * u - 4.0 * u + 1.0;
    let d11 = 3.0 * u * u - 2.0 * u;
    let sigma = herm(p.sigma, rates[i], q.sigma, rates[i + 1]);
    let rate = d00 * (p.sigma - q.sigma) + d10 * rates[i] + d11 * rates[i + 1];
    let (sin, cos) = sigma.sin_cos();
    Ok(ProfileJet {
        x: herm(p.x, ps, q.x, qs),
        t: herm(p.t, pc, q.t, qc),
        dx: sin,
        dt: cos,
        ddx: cos * rate,
        ddt: -sin * rate,
    })
}

/// `|S^{m}|`, the area of the unit `m`-sphere in `R^{m+1}`, for odd `m = 2n-1`:
/// `2 pi^n / (n-1)!`.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powi(n as i32) / factorial(n - 1)
}

/// Volume of the unit ball of `R^{2n}`: `pi^n / n!`.
pub fn unit_ball_volume(n: usize) -> f64 {
    PI.powi(n as i32) / factorial(n)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `|N_H| = sqrt(x^2 x'^2 + t'^2) / sqrt(x'^2 + t'^2 + x^2 x'^2)`, which is
/// `sqrt(x^2 x'^2 + t'^2) / sqrt(1 + x^2 x'^2)` under arclength.
pub fn horizontal_normal_density(x: f64, dx: f64, dt: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::AxisPoint { x });
    }
    let den = (dx * dx + dt * dt + x * x * dx * dx).sqrt();
    if !(den > 0.0) {
        return Err(Error::Domain("profile has zero velocity".into()));
    }
    Ok((x * x * dx * dx + dt * dt).sqrt() / den)
}

/// `|N_H| sqrt(det Gram)` from the frame coordinates of the tangent vectors
/// of the immersion `(s, omega) -> (x omega, t)` at `omega = e_1`.
pub fn gram_density(n: usize, jet: &ProfileJet) -> Result<f64> {
    let mut omega = vec![0.0; 2 * n];
    omega[0] = 1.0;
    let imm = ImmersionJet::rotational(jet, &omega)?;
    let m = 2 * n;
    let gram = DMatrix::from_fn(m, m, |i, j| imm.tangents[i].dot(&imm.tangents[j]));
    let det = gram.determinant();
    if !(det >= 0.0) {
        return Err(Error::DegenerateTangents);
    }
    Ok(horizontal_part(&imm.normal).norm() * det.sqrt())
}

/// `x^{2n-1} sqrt(x^2 x'^2 + t'^2)`.
pub fn closed_form_density(n: usize, jet: &ProfileJet) -> f64 {
    jet.x.powi(2 * n as i32 - 1) * (jet.x * jet.x * jet.dx * jet.dx + jet.dt * jet.dt).sqrt()
}

/// Compares the Gram-determinant density with the closed form at points
/// spread along the profile.
pub fn verify_density(profile: &RotationalProfile) -> Result<()> {
    for u in profile.sample_parameters(DENSITY_CHECK_POINTS) {
        let jet = profile.jet(u)?;
        if !(jet.x > 0.0) {
            continue;
        }
        let gram = gram_density(profile.n, &jet)?;
        let closed = closed_form_density(profile.n, &jet);
        if (gram - closed).abs() > DENSITY_TOLERANCE * closed.abs() {
            return Err(Error::DensityMismatch { gram, closed });
        }
    }
    Ok(())
}

/// Sub-Riemannian perimeter of the hypersurface generated by the profile.
pub fn perimeter(profile: &RotationalProfile) -> Result<QuadratureResult> {
    if profile.closure == Closure::Open {
        return Err(Error::OpenProfile);
    }
    if profile.start == profile.end {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    verify_density(profile)?;
    let n = profile.n;
    let r = profile.integrate(|j, _| closed_form_density(n, j))?;
    Ok(r.scaled(unit_sphere_area(n)))
}

/// Lebesgue volume of the body bounded by the hypersurface (and horizontal
/// caps), signed by the orientation of the profile.
pub fn enclosed_volume(profile: &RotationalProfile) -> Result<QuadratureResult> {
    match profile.closure {
        Closure::Open | Closure::Truncated => return Err(Error::OpenProfile),
        Closure::Capped | Closure::AxisToAxis => {}
    }
    let n = profile.n as i32;
    let r = profile.integrate(|j, _| j.x.powi(2 * n) * j.dt)?;
    Ok(r.scaled(unit_ball_volume(profile.n) * profile.orientation))
}

/// Riemannian area element of the hypersurface per unit parameter, without
/// the sphere factor: `x^{2n-1} sqrt(x'^2 + t'^2 + x^2 x'^2)`.
fn area_density(n: usize, j: &ProfileJet) -> f64 {
    j.x.powi(2 * n as i32 - 1) * (j.dx * j.dx + j.dt * j.dt + j.x * j.x * j.dx * j.dx).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    d: f64,
}

impl Dual {
    fn new(v: f64, d: f64) -> Self {
        Dual { v, d }
    }

    fn constant(v: f64) -> Self {
        Dual { v, d: 0.0 }
    }

    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        Dual::new(r, 0.5 * self.d / r)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))
    }
}

/// Profile `(R, T)` and its parameter derivative after moving every point by
/// `tau u N`, with `N` the unit normal of the rotational hypersurface.
fn perturbed(j: &ProfileJet, u: f64, du: f64, tau: f64) -> (f64, f64, f64) {
    let x = Dual::new(j.x, j.dx);
    let t = Dual::new(j.t, j.dt);
    let dx = Dual::new(j.dx, j.ddx);
    let dt = Dual::new(j.dt, j.ddt);
    let w = Dual::new(tau * u, tau * du);
    let len = (dx * dx + dt * dt + x * x * dx * dx).sqrt();
    // Euclidean displacement of N: -t'/L along omega, -x x'/L along J omega,
    // x'(1 + x^2)/L vertically.
    let radial = x - w * dt / len;
    let angular = w * x * dx / len;
    let r = (radial * radial + angular * angular).sqrt();
    let height = t + w * dx * (Dual::constant(1.0) + x * x) / len;
    (r.v, r.d, height.d)
}

/// Result of [`first_variation_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstVariation {
    /// Central difference `(P(h) - P(-h)) / 2h`.
    pub numeric: f64,
    /// `-2n int H u da`.
    pub formula: f64,
}

/// Perturbs the hypersurface along `u N` and compares the numerical
/// derivative of the perimeter with `-2n int H u da`. `u` is a function of
/// the profile parameter; its derivative is taken by central differences.
pub fn first_variation_check(
    profile: &RotationalProfile,
    u: &dyn Fn(f64) -> f64,
    h: f64,
) -> Result<FirstVariation> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if profile.closure == Closure::Open {
        return Err(Error::OpenProfile);
    }
    let n = profile.n;
    let du = |s: f64| {
        let step = 1e-6 * (1.0 + s.abs());
        (u(s + step) - u(s - step)) / (2.0 * step)
    };

    // Support check on a fine grid and at every quadrature node.
    for s in profile.sample_parameters(4096) {
        let j = profile.jet(s)?;
        if u(s) != 0.0 && j.x < AXIS_SUPPORT_TOLERANCE {
            return Err(Error::SupportTouchesAxis { x: j.x });
        }
    }

    let perimeter_at = |tau: f64| -> Result<f64> {
        let touches = Cell::new(None);
        let r = profile.integrate(|j, s| {
            let us = u(s);
            if us != 0.0 && j.x < AXIS_SUPPORT_TOLERANCE {
                touches.set(Some(j.x));
            }
            let (r, dr, dt) = perturbed(j, us, du(s), tau);
            r.powi(2 * n as i32 - 1) * (r * r * dr * dr + dt * dt).sqrt()
        })?;
        if let Some(x) = touches.get() {
            return Err(Error::SupportTouchesAxis { x });
        }
        Ok(r.value * unit_sphere_area(n))
    };
    let numeric = (perimeter_at(h)? - perimeter_at(-h)?) / (2.0 * h);

    let curvature_error = RefCell::new(None);
    let formula = profile.integrate(|j, s| {
        let us = u(s);
        if us == 0.0 {
            return 0.0;
        }
        match mean_curvature_rotational(j, n) {
            Ok(hm) => hm * us * area_density(n, j),
            Err(e) => {
                curvature_error.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    })?;
    if let Some(e) = curvature_error.into_inner() {
        return Err(e);
    }
    Ok(FirstVariation {
        numeric,
        formula: -2.0 * n as f64 * formula.value * unit_sphere_area(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_and_ball_constants() {
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_ball_volume(1) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn density_examples() {
        assert!((horizontal_normal_density(0.7, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let x: f64 = 0.7;
        let d = horizontal_normal_density(x, 1.0, 0.0).unwrap();
        assert!((d - x / (1.0 + x * x).sqrt()).abs() < 1e-15);
        assert!(horizontal_normal_density(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gram_route_matches_closed_form() {
        for n in 1..4 {
            let jet = ProfileJet {
                x: 0.8,
                t: 0.3,
                dx: 0.6,
                dt: -0.8,
                ddx: 0.1,
                ddt: 0.2,
            };
            let g = gram_density(n, &jet).unwrap();
            let c = closed_form_density(n, &jet);
            assert!((g - c).abs() <= 1e-12 * c, "n = {n}: {g} vs {c}");
        }
    }

    #[test]
    fn cylinder_band_measures() {
        let band = RotationalProfile::cylinder_band(1, 1.0, 1.0).unwrap();
        assert!((perimeter(&band).unwrap().value - 2.0 * PI).abs() < 1e-13);
        assert!((enclosed_volume(&band).unwrap().value - PI).abs() < 1e-13);
        assert!((enclosed_volume(&band.reversed()).unwrap().value + PI).abs() < 1e-13);
        let empty = RotationalProfile::cylinder_band(1, 1.0, 0.0).unwrap();
        assert_eq!(perimeter(&empty).unwrap().value, 0.0);
    }

    #[test]
    fn open_profiles_are_refused() {
        let band = RotationalProfile::cylinder_band(1, 1.0, 1.0).unwrap();
        let open = band.restricted(0.0, 0.5, Closure::Open).unwrap();
        assert!(matches!(perimeter(&open), Err(Error::OpenProfile)));
        let piece = band.restricted(0.0, 0.5, Closure::Truncated).unwrap();
        assert!(perimeter(&piece).is_ok());
        assert!(matches!(enclosed_volume(&piece), Err(Error::OpenProfile)));
    }

    #[test]
    fn hyperplane_variation_vanishes() {
        let piece = RotationalProfile::hyperplane_piece(1, 0.5, 2.0).unwrap();
        let bump = |s: f64| {
            let z = (s - 1.25) / 0.5;
            if z.abs() < 1.0 {
                (1.0 - z * z).powi(4)
            } else {
                0.0
            }
        };
        let fv = first_variation_check(&piece, &bump, 1e-4).unwrap();
        assert_eq!(fv.formula, 0.0);
        assert!(fv.numeric.abs() <= 1e-6, "{fv:?}");
    }
}
