//! Delaunay-type classification of rotational CMC profiles by `(n, H, E)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{refine_root, Polynomial};
use crate::profile_ode::ProfileState;

pub use crate::polynomial::descartes_positive_root_bound;

/// Relative tolerance on `E - E_cyl` for reporting a cylinder.
pub const CYLINDER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyLabel {
    Hyperplane,
    Catenoid,
    Sphere,
    Cylinder,
    Unduloid,
    Nodoid,
}

impl FamilyLabel {
    pub const ALL: [FamilyLabel; 6] = [
        FamilyLabel::Hyperplane,
        FamilyLabel::Catenoid,
        FamilyLabel::Sphere,
        FamilyLabel::Cylinder,
        FamilyLabel::Unduloid,
        FamilyLabel::Nodoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyLabel::Hyperplane => "Hyperplane",
            FamilyLabel::Catenoid => "Catenoid",
            FamilyLabel::Sphere => "Sphere",
            FamilyLabel::Cylinder => "Cylinder",
            FamilyLabel::Unduloid => "Unduloid",
            FamilyLabel::Nodoid => "Nodoid",
        }
    }
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralRadii {
    pub x1: f64,
    pub x2: f64,
    /// Inflection radius (unduloid, cylinder) or vertical-tangent radius
    /// (nodoid).
    pub x0: Option<f64>,
}

pub(crate) fn check_params(n: usize, h: f64, e: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !h.is_finite() || !e.is_finite() {
        return Err(Error::InvalidParameter(format!("H and E must be finite (H = {h}, E = {e})")));
    }
    Ok(())
}

/// Maps `(H, E)` to the orientation with `H >= 0`.
pub fn normalize(h: f64, e: f64) -> (f64, f64) {
    if h < 0.0 {
        (-h, -e)
    } else {
        (h, e)
    }
}

pub fn cylinder_radius(n: usize, h: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("cylinder needs H > 0, got {h}")));
    }
    let nf = n as f64;
    Ok((2.0 * nf - 1.0) / (2.0 * nf * h))
}

/// `r^{2n-1} - H r^{2n}` at `r = (2n-1)/(2nH)`.
pub fn cylinder_energy(n: usize, h: f64) -> Result<f64> {
    let r = cylinder_radius(n, h)?;
    let p = r.powi(2 * n as i32 - 1);
    Ok(p - h * p * r)
}

fn is_cylinder_energy(e: f64, e_cyl: f64) -> bool {
    (e - e_cyl).abs() <= CYLINDER_TOLERANCE * e_cyl.abs()
}

pub fn classify(n: usize, h: f64, e: f64) -> Result<FamilyLabel> {
    check_params(n, h, e)?;
    let (h, e) = normalize(h, e);
    Ok(if h == 0.0 {
        if e == 0.0 {
            FamilyLabel::Hyperplane
        } else {
            FamilyLabel::Catenoid
        }
    } else if e == 0.0 {
        FamilyLabel::Sphere
    } else if e > 0.0 {
        let e_cyl = cylinder_energy(n, h)?;
        if is_cylinder_energy(e, e_cyl) {
            FamilyLabel::Cylinder
        } else if e > e_cyl {
            return Err(Error::NoAdmissibleRadius { e, e_cyl });
        } else {
            FamilyLabel::Unduloid
        }
    } else {
        FamilyLabel::Nodoid
    })
}

/// `H y^{2n} - y^{2n-1} + E`.
pub fn outer_polynomial(n: usize, h: f64, e: f64) -> Polynomial {
    &(&Polynomial::monomial(h, 2 * n) - &Polynomial::monomial(1.0, 2 * n - 1)) + &Polynomial::constant(e)
}

/// `-H y^{2n} - y^{2n-1} - E`.
pub fn inner_polynomial(n: usize, h: f64, e: f64) -> Polynomial {
    &(&Polynomial::monomial(-h, 2 * n) - &Polynomial::monomial(1.0, 2 * n - 1)) - &Polynomial::constant(e)
}

/// `(E + H y^{2n})^3 - 2H y^{6n-2} + 2(n-1) E y^{4n-2}`, whose sign is the
/// sign of `sigma'` for `EH > 0`.
pub fn inflection_polynomial(n: usize, h: f64, e: f64) -> Polynomial {
    let base = &Polynomial::constant(e) + &Polynomial::monomial(h, 2 * n);
    let cube = &(&base * &base) * &base;
    let nf = n as f64;
    &(&cube - &Polynomial::monomial(2.0 * h, 6 * n - 2))
        + &Polynomial::monomial(2.0 * (nf - 1.0) * e, 4 * n - 2)
}

/// The radii `x1 <= x2` between which the profile oscillates (`EH != 0`).
/// `x0` is left empty; see [`structural_radii`].
pub fn radius_bounds(n: usize, h: f64, e: f64) -> Result<StructuralRadii> {
    check_params(n, h, e)?;
    if h == 0.0 || e == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "radius bounds need EH != 0 (H = {h}, E = {e})"
        )));
    }
    let (h, e) = normalize(h, e);
    if e > 0.0 {
        let e_cyl = cylinder_energy(n, h)?;
        let r = cylinder_radius(n, h)?;
        if is_cylinder_energy(e, e_cyl) {
            return Ok(StructuralRadii { x1: r, x2: r, x0: None });
        }
        if e > e_cyl {
            return Err(Error::NoAdmissibleRadius { e, e_cyl });
        }
        let q = outer_polynomial(n, h, e);
        let x1 = refine_root(&q, 0.0, r)?;
        let x2 = refine_root(&q, r, 1.0 / h)?;
        Ok(StructuralRadii { x1, x2, x0: None })
    } else {
        let x0 = vertical_tangent_radius(n, h, e);
        let x1 = refine_root(&inner_polynomial(n, h, e), 0.0, x0)?;
        let q = outer_polynomial(n, h, e);
        let mut hi = 2.0 * x0.max(1.0 / h);
        while q.eval(hi) <= 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::RootBracketFailure("outer radius bracket diverged".into()));
            }
        }
        let x2 = refine_root(&q, x0, hi)?;
        Ok(StructuralRadii { x1, x2, x0: None })
    }
}

fn vertical_tangent_radius(n: usize, h: f64, e: f64) -> f64 {
    (-e / h).powf(1.0 / (2 * n) as f64)
}

/// Unduloid inflection radius, or the nodoid vertical-tangent radius.
pub fn inflection_radius(n: usize, h: f64, e: f64) -> Result<f64> {
    let radii = radius_bounds(n, h, e)?;
    let (h, e) = normalize(h, e);
    if e < 0.0 {
        return Ok(vertical_tangent_radius(n, h, e));
    }
    if radii.x1 == radii.x2 {
        return Ok(radii.x1);
    }
    let p = inflection_polynomial(n, h, e);
    let (p1, p2) = (p.eval(radii.x1), p.eval(radii.x2));
    if !(p1 > 0.0 && p2 < 0.0) {
        return Err(Error::RootBracketFailure(format!(
            "inflection polynomial has p(x1) = {p1:e}, p(x2) = {p2:e}"
        )));
    }
    refine_root(&p, radii.x1, radii.x2)
}

/// Radii with `x0` filled in, for the families that have them.
pub fn structural_radii(n: usize, h: f64, e: f64) -> Result<Option<StructuralRadii>> {
    match classify(n, h, e)? {
        FamilyLabel::Cylinder | FamilyLabel::Unduloid | FamilyLabel::Nodoid => {
            let mut radii = radius_bounds(n, h, e)?;
            radii.x0 = Some(inflection_radius(n, h, e)?);
            Ok(Some(radii))
        }
        _ => Ok(None),
    }
}

/// A starting point `(x, 0, sigma)` on the profile with energy `E`: the
/// horizontal ray, the catenoid neck, the sphere equator, the minimum radius
/// of an unduloid, or the maximum radius of a nodoid.
pub fn canonical_initial_state(n: usize, h: f64, e: f64) -> Result<ProfileState> {
    let family = classify(n, h, e)?;
    let (hn, en) = normalize(h, e);
    let flip = if h < 0.0 { PI } else { 0.0 };
    let (x, sigma) = match family {
        FamilyLabel::Hyperplane => (1.0, FRAC_PI_2),
        FamilyLabel::Catenoid => {
            let x = en.abs().powf(1.0 / (2 * n - 1) as f64);
            (x, if en > 0.0 { 0.0 } else { PI })
        }
        FamilyLabel::Sphere => (1.0 / hn, 0.0),
        FamilyLabel::Cylinder | FamilyLabel::Unduloid => (radius_bounds(n, h, e)?.x1, 0.0),
        FamilyLabel::Nodoid => (radius_bounds(n, h, e)?.x2, 0.0),
    };
    Ok(ProfileState::new(x, 0.0, sigma + flip))
}
