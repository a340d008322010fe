//! Sub-Riemannian mean curvature of hypersurfaces in `H^n`.
//!
//! Three evaluators are provided and cross-checked in the tests:
//!
//! * [`mean_curvature_general`]: any immersion, from second-order jet data,
//!   through the second fundamental form of the Riemannian metric and an
//!   orthonormal basis of the horizontal tangent space.
//! * [`mean_curvature_graph_h1`]: graphs `t = f(x, y)` in `H^1`.
//! * [`mean_curvature_rotational`]: hypersurfaces of revolution about the
//!   `t`-axis, from their generating curve.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heisenberg::{
    frame_connection, g_operator, horizontal_part, horizontal_unit_normal_with_tolerance,
    FrameVector, Point, SINGULAR_TOLERANCE,
};

const UNIT_TOLERANCE: f64 = 1e-9;

/// Derivative data of a planar generating curve `(x(u), t(u))`, up to
/// second order. The parameter need not be arclength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileJet {
    pub x: f64,
    pub t: f64,
    pub dx: f64,
    pub dt: f64,
    pub ddx: f64,
    pub ddt: f64,
}

/// Value, gradient and Hessian of `f` for a graph `t = f(x, y)` in `H^1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphJet {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
}

impl GraphJet {
    /// Jet of the radial graph `t = g(r)`, `r = sqrt(x^2 + y^2) > 0`, from
    /// `(g, g', g'')` at `r`.
    pub fn radial(x: f64, y: f64, g: f64, dg: f64, ddg: f64) -> Self {
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        let r3 = r2 * r;
        GraphJet {
            f: g,
            fx: dg * x / r,
            fy: dg * y / r,
            fxx: ddg * x * x / r2 + dg * (1.0 / r - x * x / r3),
            fxy: ddg * x * y / r2 - dg * x * y / r3,
            fyy: ddg * y * y / r2 + dg * (1.0 / r - y * y / r3),
        }
    }
}

/// Second-order data of an immersion `phi: B -> H^n` at one point.
///
/// `tangents[j]` holds the frame coordinates of `d_j = e_j(phi)` and
/// `coefficient_derivatives[i][j]` the derivatives `e_i` of those
/// coordinates, i.e. `(e_i(x_kj), e_i(y_kj), e_i(t_j))`. The covariant
/// derivative `D_{e_i} d_j` is assembled from both in
/// [`ImmersionJet::covariant_derivative`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionJet {
    pub point: Point,
    pub tangents: Vec<FrameVector>,
    pub coefficient_derivatives: Vec<Vec<FrameVector>>,
    pub normal: FrameVector,
}

impl ImmersionJet {
    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// Graph `t = f(x, y)` in `H^1` with the downward normal
    /// `(f_x - y, f_y + x, -1) / sqrt(1 + (f_x - y)^2 + (f_y + x)^2)`.
    ///
    /// This is the orientation for which the general pipeline reproduces
    /// the sign of the graph formula in [`mean_curvature_graph_h1`].
    pub fn graph_h1(x: f64, y: f64, g: &GraphJet) -> Self {
        let p = g.fx - y;
        let q = g.fy + x;
        let d1 = FrameVector {
            a: vec![1.0],
            b: vec![0.0],
            c: p,
        };
        let d2 = FrameVector {
            a: vec![0.0],
            b: vec![1.0],
            c: q,
        };
        let deriv = |c: f64| FrameVector {
            a: vec![0.0],
            b: vec![0.0],
            c,
        };
        let len = (1.0 + p * p + q * q).sqrt();
        ImmersionJet {
            point: Point {
                x: vec![x],
                y: vec![y],
                t: g.f,
            },
            tangents: vec![d1, d2],
            coefficient_derivatives: vec![
                vec![deriv(g.fxx), deriv(g.fxy + 1.0)],
                vec![deriv(g.fxy - 1.0), deriv(g.fyy)],
            ],
            normal: FrameVector {
                a: vec![p / len],
                b: vec![q / len],
                c: -1.0 / len,
            },
        }
    }

    /// Hypersurface of revolution `phi(u, w) = (x(u) w, t(u))`, `w` on the
    /// unit sphere of `R^2n`, at the point `w = omega`.
    ///
    /// The tangent basis is `d_1 = phi_u`, `d_2` along the rotation `J omega`
    /// (`J(a, b) = (-b, a)`) and `d_j`, `j >= 3`, along an orthonormal
    /// completion of `{omega, J omega}`, all taken from a geodesic frame of
    /// the sphere at `omega`. The normal is
    /// `(-x x' J omega - t' omega, x') / sqrt(x'^2 + t'^2 + x^2 x'^2)` in frame
    /// coordinates.
    pub fn rotational(profile: &ProfileJet, omega: &[f64]) -> Result<Self> {
        if omega.len() < 2 || omega.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "rotation direction must have even length >= 2, got {}",
                omega.len()
            )));
        }
        let n = omega.len() / 2;
        let norm: f64 = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidParameter("rotation direction must be unit".into()));
        }
        let ProfileJet {
            x,
            t,
            dx,
            dt,
            ddx,
            ddt,
        } = *profile;
        if !(x > 0.0) {
            return Err(Error::AxisPoint { x });
        }

        let j_omega = complex_j(omega);
        let mut directions = vec![j_omega.clone()];
        directions.extend(sphere_completion(omega, &j_omega));

        let split = |v: &[f64], c: f64| FrameVector {
            a: v[..n].to_vec(),
            b: v[n..].to_vec(),
            c,
        };
        let scaled = |v: &[f64], s: f64| v.iter().map(|e| e * s).collect::<Vec<_>>();

        let mut tangents = vec![split(&scaled(omega, dx), dt)];
        for u in &directions {
            tangents.push(split(&scaled(u, x), x * x * dot(u, &j_omega)));
        }

        let m = 2 * n;
        let mut cd = vec![vec![FrameVector::zero(n); m]; m];
        cd[0][0] = split(&scaled(omega, ddx), ddt);
        for (jj, u) in directions.iter().enumerate() {
            let j = jj + 1;
            cd[j][0] = split(&scaled(u, dx), 0.0);
            cd[0][j] = split(&scaled(u, dx), 2.0 * x * dx * dot(u, &j_omega));
            for (ii, ui) in directions.iter().enumerate() {
                let i = ii + 1;
                let radial = if i == j { -x } else { 0.0 };
                cd[i][j] = split(&scaled(omega, radial), x * x * dot(u, &complex_j(ui)));
            }
        }

        let len = (dx * dx + dt * dt + x * x * dx * dx).sqrt();
        let horizontal: Vec<f64> = (0..m)
            .map(|k| -(x * dx * j_omega[k] + dt * omega[k]) / len)
            .collect();
        let normal = split(&horizontal, dx / len);

        let point = Point {
            x: scaled(&omega[..n], x),
            y: scaled(&omega[n..], x),
            t,
        };
        Ok(ImmersionJet {
            point,
            tangents,
            coefficient_derivatives: cd,
            normal,
        })
    }

    pub fn with_normal_flipped(mut self) -> Self {
        self.normal = -&self.normal;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        let m = 2 * n;
        if self.tangents.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.tangents.len(),
            });
        }
        if self.coefficient_derivatives.len() != m
            || self.coefficient_derivatives.iter().any(|row| row.len() != m)
        {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.coefficient_derivatives.len(),
            });
        }
        for v in self
            .tangents
            .iter()
            .chain(self.coefficient_derivatives.iter().flatten())
            .chain(std::iter::once(&self.normal))
        {
            if v.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.dim(),
                });
            }
        }
        let norm = self.normal.norm();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitNormal { norm });
        }
        Ok(())
    }

    /// Frame coordinates of `D_{e_i} d_j`.
    pub fn covariant_derivative(&self, i: usize, j: usize) -> FrameVector {
        let connection = frame_connection(&self.tangents[i], &self.tangents[j])
            .expect("jet vectors share dimension");
        &self.coefficient_derivatives[i][j] + &connection
    }

    fn gram(&self) -> DMatrix<f64> {
        let m = self.tangents.len();
        DMatrix::from_fn(m, m, |i, j| self.tangents[i].dot(&self.tangents[j]))
    }

    /// Coordinates `alpha` with `sum alpha_j d_j = v` for a tangent vector `v`.
    pub fn tangent_coordinates(&self, v: &FrameVector) -> Result<DVector<f64>> {
        let m = self.tangents.len();
        let rhs = DVector::from_fn(m, |j, _| self.tangents[j].dot(v));
        let chol = self.gram().cholesky().ok_or(Error::DegenerateTangents)?;
        Ok(chol.solve(&rhs))
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Complex structure on `R^2n = R^n x R^n`: `(a, b) -> (-b, a)`.
fn complex_j(v: &[f64]) -> Vec<f64> {
    let n = v.len() / 2;
    v[n..].iter().map(|e| -e).chain(v[..n].iter().copied()).collect()
}

/// Orthonormal completion of `{omega, J omega}` in `R^2n`, built from the
/// standard basis by Gram-Schmidt with largest-remainder pivoting.
fn sphere_completion(omega: &[f64], j_omega: &[f64]) -> Vec<Vec<f64>> {
    let m = omega.len();
    let mut basis: Vec<Vec<f64>> = vec![omega.to_vec(), j_omega.to_vec()];
    let mut candidates: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut e = vec![0.0; m];
            e[k] = 1.0;
            e
        })
        .collect();
    let mut out = Vec::new();
    while basis.len() < m {
        let (best, rest) = candidates
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let mut r = c.clone();
                for b in &basis {
                    let p = dot(&r, b);
                    r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= p * bi);
                }
                (idx, r)
            })
            .max_by(|(_, a), (_, b)| dot(a, a).total_cmp(&dot(b, b)))
            .expect("candidates remain while the basis is incomplete");
        candidates.swap_remove(best);
        let len = dot(&rest, &rest).sqrt();
        let unit: Vec<f64> = rest.iter().map(|v| v / len).collect();
        basis.push(unit.clone());
        out.push(unit);
    }
    out
}

/// `II_ij = <N, D_{e_i} d_j>`.
pub fn second_fundamental_form(jet: &ImmersionJet) -> Result<DMatrix<f64>> {
    jet.validate()?;
    let m = jet.tangents.len();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        jet.normal.dot(&jet.covariant_derivative(i, j))
    }))
}

/// Orthonormal basis `{Z_1, ..., Z_{2n-1}}` of the horizontal tangent space
/// with `Z_1 = G(nu_H)`.
pub fn horizontal_tangent_basis(nu_h: &FrameVector) -> Result<Vec<FrameVector>> {
    let n = nu_h.dim();
    let mut fixed = vec![nu_h.clone(), g_operator(nu_h)];
    let mut candidates: Vec<FrameVector> = (0..n)
        .map(|k| FrameVector::x_k(n, k))
        .chain((0..n).map(|k| FrameVector::y_k(n, k)))
        .collect();
    while fixed.len() < 2 * n {
        let (best, rest) = candidates
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let mut r = horizontal_part(c);
                for b in &fixed {
                    r = &r - &b.scale(r.dot(b));
                }
                (idx, r)
            })
            .max_by(|(_, a), (_, b)| a.norm_squared().total_cmp(&b.norm_squared()))
            .ok_or(Error::DegenerateTangents)?;
        let len = rest.norm();
        if len < 1e-8 {
            return Err(Error::DegenerateTangents);
        }
        candidates.swap_remove(best);
        fixed.push(rest.scale(1.0 / len));
    }
    Ok(fixed.split_off(1))
}

/// `H` with `2n H = |N_H|^{-1} sum_i II(Z_i, Z_i)`.
pub fn mean_curvature_general(jet: &ImmersionJet) -> Result<f64> {
    let ii = second_fundamental_form(jet)?;
    let n = jet.dim();
    let nu_h = horizontal_unit_normal_with_tolerance(&jet.normal, SINGULAR_TOLERANCE)?;
    let nh_norm = horizontal_part(&jet.normal).norm();
    let mut trace = 0.0;
    for z in horizontal_tangent_basis(&nu_h)? {
        let alpha = jet.tangent_coordinates(&z)?;
        trace += (alpha.transpose() * &ii * &alpha)[(0, 0)];
    }
    Ok(trace / (2.0 * n as f64 * nh_norm))
}

/// Mean curvature of the graph `t = f(x, y)` in `H^1` at `(x, y)`:
///
/// ```text
/// 2H = -[(f_y + x)^2 f_xx + (f_x - y)^2 f_yy - 2 (f_x - y)(f_y + x) f_xy]
///      / ((f_x - y)^2 + (f_y + x)^2)^{3/2}
/// ```
pub fn mean_curvature_graph_h1(g: &GraphJet, x: f64, y: f64) -> Result<f64> {
    let p = g.fx - y;
    let q = g.fy + x;
    let w2 = p * p + q * q;
    let w = w2.sqrt();
    if !(w > SINGULAR_TOLERANCE) {
        return Err(Error::SingularPoint { norm: w });
    }
    let num = q * q * g.fxx + p * p * g.fyy - 2.0 * p * q * g.fxy;
    Ok(-0.5 * num / (w2 * w))
}

/// Mean curvature of the hypersurface of revolution generated by a curve in
/// the half-plane `x > 0`, with respect to the rotational normal.
///
/// ```text
/// 2n H = [x^3 (x' t'' - x'' t') + (2n-1) t'^3 + 2(n-1) x^2 x'^2 t']
///        / (x (x^2 x'^2 + t'^2)^{3/2})
/// ```
pub fn mean_curvature_rotational(p: &ProfileJet, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let ProfileJet {
        x,
        dx,
        dt,
        ddx,
        ddt,
        ..
    } = *p;
    if !(x > 0.0) {
        return Err(Error::AxisPoint { x });
    }
    let w2 = x * x * dx * dx + dt * dt;
    let w = w2.sqrt();
    let speed = (dx * dx + dt * dt).sqrt();
    if !(w > SINGULAR_TOLERANCE * speed) {
        return Err(Error::SingularPoint { norm: w });
    }
    let nf = n as f64;
    let num = x.powi(3) * (dx * ddt - ddx * dt)
        + (2.0 * nf - 1.0) * dt.powi(3)
        + 2.0 * (nf - 1.0) * x * x * dx * dx * dt;
    Ok(num / (x * w2 * w) / (2.0 * nf))
}

/// A two-parameter surface patch in `H^1` that can produce its jet at any
/// parameter value.
pub trait SurfacePatch {
    fn jet(&self, u: [f64; 2]) -> Result<ImmersionJet>;
}

/// Graph patch `(x, y) -> (x, y, f(x, y))`.
pub struct GraphPatch<F>(pub F);

impl<F: Fn(f64, f64) -> GraphJet> SurfacePatch for GraphPatch<F> {
    fn jet(&self, u: [f64; 2]) -> Result<ImmersionJet> {
        Ok(ImmersionJet::graph_h1(u[0], u[1], &(self.0)(u[0], u[1])))
    }
}

/// Rotational patch `(s, theta) -> (x(s) cos theta, x(s) sin theta, t(s))` in `H^1`.
pub struct RotationalPatch<F>(pub F);

impl<F: Fn(f64) -> ProfileJet> SurfacePatch for RotationalPatch<F> {
    fn jet(&self, u: [f64; 2]) -> Result<ImmersionJet> {
        let (sin, cos) = u[1].sin_cos();
        ImmersionJet::rotational(&(self.0)(u[0]), &[cos, sin])
    }
}

/// `|D_Z Z - 2H nu_H|` for a surface in `H^1`, with `D_Z Z` from central
/// differences of `Z = G(nu_H)` along `Z` (step `1e-5` times the parameter
/// scale).
pub fn chmy_identity_residual(patch: &dyn SurfacePatch, u0: [f64; 2]) -> Result<f64> {
    let jet = patch.jet(u0)?;
    if jet.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: jet.dim(),
        });
    }
    let h_mean = mean_curvature_general(&jet)?;
    let nu = horizontal_unit_normal_with_tolerance(&jet.normal, SINGULAR_TOLERANCE)?;
    let z = g_operator(&nu);
    let alpha = jet.tangent_coordinates(&z)?;

    let scale = u0[0].abs().max(u0[1].abs()).max(1.0);
    let step = 1e-5 * scale;
    let z_at = |sign: f64| -> Result<FrameVector> {
        let u = [u0[0] + sign * step * alpha[0], u0[1] + sign * step * alpha[1]];
        let j = patch.jet(u)?;
        Ok(g_operator(&horizontal_unit_normal_with_tolerance(
            &j.normal,
            SINGULAR_TOLERANCE,
        )?))
    };
    let dz = (&z_at(1.0)? - &z_at(-1.0)?).scale(0.5 / step);
    let dzz = &dz + &frame_connection(&z, &z)?;
    Ok((&dzz - &nu.scale(2.0 * h_mean)).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cylinder(r: f64) -> ProfileJet {
        ProfileJet {
            x: r,
            t: 0.3,
            dx: 0.0,
            dt: 1.0,
            ddx: 0.0,
            ddt: 0.0,
        }
    }

    #[test]
    fn plane_at_origin() {
        let g = GraphJet {
            f: 0.0,
            fx: 0.0,
            fy: 0.0,
            fxx: 0.0,
            fxy: 0.0,
            fyy: 0.0,
        };
        // Frame fields X_1, Y_1 as tangents (constant coefficients) with N = T.
        let jet = ImmersionJet {
            point: Point::origin(1),
            tangents: vec![FrameVector::x_k(1, 0), FrameVector::y_k(1, 0)],
            coefficient_derivatives: vec![vec![FrameVector::zero(1); 2]; 2],
            normal: FrameVector::t(1),
        };
        let ii = second_fundamental_form(&jet).unwrap();
        assert_eq!(ii[(0, 1)], -1.0);
        assert_eq!(ii[(1, 0)], 1.0);
        assert_eq!(ii[(0, 0)], 0.0);
        assert_eq!(ii[(1, 1)], 0.0);
        // The plane {t = 0} is singular at the origin.
        let jet = ImmersionJet::graph_h1(0.0, 0.0, &g);
        assert!(matches!(
            mean_curvature_general(&jet),
            Err(Error::SingularPoint { .. })
        ));
        // Away from the origin the plane is regular and minimal.
        let jet = ImmersionJet::graph_h1(1.0, 2.0, &g);
        assert!(mean_curvature_general(&jet).unwrap().abs() < 1e-15);
        assert_eq!(mean_curvature_graph_h1(&g, 1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn cylinder_second_fundamental_form() {
        let jet = ImmersionJet::rotational(&cylinder(1.0), &[1.0, 0.0]).unwrap();
        let ii = second_fundamental_form(&jet).unwrap();
        assert!((ii[(1, 1)] - 3.0).abs() < 1e-14, "{ii}");
        let h = mean_curvature_general(&jet).unwrap();
        assert!((h - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rotational_sphere_directions() {
        let p = ProfileJet {
            x: 0.8,
            t: 0.1,
            dx: 0.6,
            dt: 0.8,
            ddx: 0.4,
            ddt: -0.3,
        };
        let omega = [0.5, -0.5, 0.5, 0.5, 0.1, 0.0];
        let len = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        let omega: Vec<f64> = omega.iter().map(|v| v / len).collect();
        let jet = ImmersionJet::rotational(&p, &omega).unwrap();
        let ii = second_fundamental_form(&jet).unwrap();
        // Sphere directions all carry x t' / sqrt(x'^2 + t'^2 + x^2 x'^2).
        let len = (p.dx * p.dx + p.dt * p.dt + p.x * p.x * p.dx * p.dx).sqrt();
        for i in 2..6 {
            assert!((ii[(i, i)] - p.x * p.dt / len).abs() < 1e-14, "{ii}");
            for j in 1..6 {
                if j != i {
                    assert!(ii[(i, j)].abs() < 1e-14, "{ii}");
                }
            }
        }
        let h = mean_curvature_general(&jet).unwrap();
        assert!((h - mean_curvature_rotational(&p, 3).unwrap()).abs() < 1e-13);
        for d in jet.tangents.iter() {
            assert!(d.dot(&jet.normal).abs() < 1e-14);
        }
    }

    #[test]
    fn rotational_formula_examples() {
        for n in 1..4 {
            let h = mean_curvature_rotational(&cylinder(2.0), n).unwrap();
            let nf = n as f64;
            assert!((h - (2.0 * nf - 1.0) / (4.0 * nf)).abs() < 1e-15);
        }
        let ray = ProfileJet {
            x: 1.5,
            t: 0.0,
            dx: 1.0,
            dt: 0.0,
            ddx: 0.0,
            ddt: 0.0,
        };
        assert_eq!(mean_curvature_rotational(&ray, 2).unwrap(), 0.0);
        assert!(matches!(
            mean_curvature_rotational(&ProfileJet { x: 0.0, ..ray }, 1),
            Err(Error::AxisPoint { .. })
        ));
    }

    #[test]
    fn graph_singular_point() {
        let g = GraphJet {
            f: 0.0,
            fx: 0.0,
            fy: 0.0,
            fxx: 1.0,
            fxy: 0.0,
            fyy: 1.0,
        };
        assert!(matches!(
            mean_curvature_graph_h1(&g, 0.0, 0.0),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn non_unit_normal_rejected() {
        let mut jet = ImmersionJet::rotational(&cylinder(1.0), &[1.0, 0.0]).unwrap();
        jet.normal = jet.normal.scale(2.0);
        assert!(matches!(
            second_fundamental_form(&jet),
            Err(Error::NonUnitNormal { .. })
        ));
    }

    #[test]
    fn flipping_the_normal_flips_h() {
        let p = ProfileJet {
            x: 0.7,
            t: 0.0,
            dx: -0.3,
            dt: 0.95,
            ddx: 0.2,
            ddt: 0.1,
        };
        let jet = ImmersionJet::rotational(&p, &[0.6, 0.0, 0.0, 0.8]).unwrap();
        let h = mean_curvature_general(&jet).unwrap();
        let flipped = mean_curvature_general(&jet.with_normal_flipped()).unwrap();
        assert!((h + flipped).abs() < 1e-13);
    }
}
