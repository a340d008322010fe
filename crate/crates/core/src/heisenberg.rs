//! Heisenberg group primitives.
//!
//! Points of `H^n` are stored in real coordinates `(x_1..x_n, y_1..y_n, t)`.
//! Tangent vectors are stored as [`FrameVector`]s: coefficients with respect
//! to the left-invariant frame
//!
//! ```text
//! X_k = d/dx_k + y_k d/dt,   Y_k = d/dy_k - x_k d/dt,   T = d/dt
//! ```
//!
//! which is orthonormal for the left-invariant metric `g`. Euclidean
//! components are only used at the boundary, through
//! [`FrameVector::from_euclidean`] and [`FrameVector::to_euclidean`].

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative threshold below which `|N_H|` counts as zero.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>, t: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidParameter("dimension n must be >= 1".into()));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(Point { x, y, t })
    }

    pub fn origin(n: usize) -> Self {
        Point {
            x: vec![0.0; n],
            y: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Group inverse `[-z, -t]`.
    pub fn inverse(&self) -> Self {
        Point {
            x: self.x.iter().map(|v| -v).collect(),
            y: self.y.iter().map(|v| -v).collect(),
            t: -self.t,
        }
    }

    /// Squared Euclidean radius `|z|^2` of the horizontal coordinates.
    pub fn radius_squared(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v * v).sum()
    }
}

/// `p * q = [z + z', t + t' + Im(sum z_k conj(z'_k))]` with `z_k = x_k + i y_k`.
pub fn group_product(p: &Point, q: &Point) -> Result<Point> {
    check_dim(p.dim(), q.dim())?;
    let n = p.dim();
    let mut twist = 0.0;
    for k in 0..n {
        // Im((x + iy)(x' - iy')) = y x' - x y'
        twist += p.y[k] * q.x[k] - p.x[k] * q.y[k];
    }
    Ok(Point {
        x: (0..n).map(|k| p.x[k] + q.x[k]).collect(),
        y: (0..n).map(|k| p.y[k] + q.y[k]).collect(),
        t: p.t + q.t + twist,
    })
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

/// Tangent vector `sum a_k X_k + b_k Y_k + c T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

impl FrameVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        check_dim(a.len(), b.len())?;
        if a.is_empty() {
            return Err(Error::InvalidParameter("dimension n must be >= 1".into()));
        }
        Ok(FrameVector { a, b, c })
    }

    pub fn zero(n: usize) -> Self {
        FrameVector {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: 0.0,
        }
    }

    /// The frame field `X_k` (zero-based `k`).
    pub fn x_k(n: usize, k: usize) -> Self {
        let mut v = Self::zero(n);
        v.a[k] = 1.0;
        v
    }

    pub fn y_k(n: usize, k: usize) -> Self {
        let mut v = Self::zero(n);
        v.b[k] = 1.0;
        v
    }

    pub fn t(n: usize) -> Self {
        let mut v = Self::zero(n);
        v.c = 1.0;
        v
    }

    /// The `2n + 1` frame vectors in the order `X_1..X_n, Y_1..Y_n, T`.
    pub fn basis(n: usize) -> Vec<Self> {
        (0..n)
            .map(|k| Self::x_k(n, k))
            .chain((0..n).map(|k| Self::y_k(n, k)))
            .chain(std::iter::once(Self::t(n)))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Coefficients flattened as `(a_1..a_n, b_1..b_n, c)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.dim() + 1);
        out.extend_from_slice(&self.a);
        out.extend_from_slice(&self.b);
        out.push(self.c);
        out
    }

    pub fn from_slice(n: usize, v: &[f64]) -> Result<Self> {
        check_dim(2 * n + 1, v.len())?;
        Ok(FrameVector {
            a: v[..n].to_vec(),
            b: v[n..2 * n].to_vec(),
            c: v[2 * n],
        })
    }

    /// Metric inner product; the frame is orthonormal.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        let horizontal: f64 = self
            .a
            .iter()
            .zip(&other.a)
            .chain(self.b.iter().zip(&other.b))
            .map(|(u, v)| u * v)
            .sum();
        horizontal + self.c * other.c
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        FrameVector {
            a: self.a.iter().map(|v| v * s).collect(),
            b: self.b.iter().map(|v| v * s).collect(),
            c: self.c * s,
        }
    }

    pub fn is_horizontal(&self, tol: f64) -> bool {
        self.c.abs() <= tol
    }

    /// Converts Euclidean components `(a, b, c)` of a vector based at `at`.
    pub fn from_euclidean(at: &Point, a: &[f64], b: &[f64], c: f64) -> Result<Self> {
        check_dim(at.dim(), a.len())?;
        check_dim(at.dim(), b.len())?;
        let mut tc = c;
        for k in 0..at.dim() {
            tc += -a[k] * at.y[k] + b[k] * at.x[k];
        }
        Ok(FrameVector {
            a: a.to_vec(),
            b: b.to_vec(),
            c: tc,
        })
    }

    /// Euclidean components `(a, b, c)` of this vector based at `at`.
    pub fn to_euclidean(&self, at: &Point) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        check_dim(at.dim(), self.dim())?;
        let mut c = self.c;
        for k in 0..at.dim() {
            c += self.a[k] * at.y[k] - self.b[k] * at.x[k];
        }
        Ok((self.a.clone(), self.b.clone(), c))
    }
}

impl Add for &FrameVector {
    type Output = FrameVector;
    fn add(self, rhs: &FrameVector) -> FrameVector {
        FrameVector {
            a: self.a.iter().zip(&rhs.a).map(|(u, v)| u + v).collect(),
            b: self.b.iter().zip(&rhs.b).map(|(u, v)| u + v).collect(),
            c: self.c + rhs.c,
        }
    }
}

impl Sub for &FrameVector {
    type Output = FrameVector;
    fn sub(self, rhs: &FrameVector) -> FrameVector {
        FrameVector {
            a: self.a.iter().zip(&rhs.a).map(|(u, v)| u - v).collect(),
            b: self.b.iter().zip(&rhs.b).map(|(u, v)| u - v).collect(),
            c: self.c - rhs.c,
        }
    }
}

impl Mul<f64> for &FrameVector {
    type Output = FrameVector;
    fn mul(self, s: f64) -> FrameVector {
        self.scale(s)
    }
}

impl Neg for &FrameVector {
    type Output = FrameVector;
    fn neg(self) -> FrameVector {
        self.scale(-1.0)
    }
}

/// `D_U V` for constant-coefficient `U` and `V`, expanded bilinearly over
/// the Levi-Civita table
///
/// ```text
/// D_{X_k} Y_j = -d_kj T   D_{X_k} T = Y_k   D_{Y_k} T = -X_k
/// D_{Y_k} X_j =  d_kj T   D_T X_k   = Y_k   D_T Y_k   = -X_k
/// ```
///
/// with every other pairing zero.
pub fn frame_connection(u: &FrameVector, v: &FrameVector) -> Result<FrameVector> {
    check_dim(u.dim(), v.dim())?;
    let n = u.dim();
    let mut out = FrameVector::zero(n);
    for k in 0..n {
        out.a[k] = -v.c * u.b[k] - u.c * v.b[k];
        out.b[k] = v.c * u.a[k] + u.c * v.a[k];
        out.c += u.b[k] * v.a[k] - u.a[k] * v.b[k];
    }
    Ok(out)
}

/// A vector field given by its frame coefficients as functions of the point.
pub trait FrameField {
    fn value(&self, at: &Point) -> FrameVector;

    /// Derivative of the coefficient functions in the direction `u` at `at`.
    fn coefficient_derivative(&self, at: &Point, u: &FrameVector) -> FrameVector;
}

/// A field with constant frame coefficients (e.g. a left-invariant field).
#[derive(Debug, Clone)]
pub struct ConstantField(pub FrameVector);

impl FrameField for ConstantField {
    fn value(&self, _at: &Point) -> FrameVector {
        self.0.clone()
    }

    fn coefficient_derivative(&self, _at: &Point, _u: &FrameVector) -> FrameVector {
        FrameVector::zero(self.0.dim())
    }
}

/// A field given by a closure; coefficient derivatives use central differences
/// along the Euclidean representative of the direction.
pub struct FnField<F> {
    pub f: F,
    pub step: f64,
}

impl<F: Fn(&Point) -> FrameVector> FnField<F> {
    pub fn new(f: F) -> Self {
        FnField { f, step: 1e-5 }
    }
}

impl<F: Fn(&Point) -> FrameVector> FrameField for FnField<F> {
    fn value(&self, at: &Point) -> FrameVector {
        (self.f)(at)
    }

    fn coefficient_derivative(&self, at: &Point, u: &FrameVector) -> FrameVector {
        let (ea, eb, ec) = u
            .to_euclidean(at)
            .expect("direction and point share dimension");
        let shifted = |sign: f64| Point {
            x: at.x.iter().zip(&ea).map(|(p, d)| p + sign * self.step * d).collect(),
            y: at.y.iter().zip(&eb).map(|(p, d)| p + sign * self.step * d).collect(),
            t: at.t + sign * self.step * ec,
        };
        let plus = (self.f)(&shifted(1.0));
        let minus = (self.f)(&shifted(-1.0));
        (&plus - &minus).scale(0.5 / self.step)
    }
}

/// `D_U V` at `at` by the Leibniz rule: `U(v^i) E_i + v^i D_U E_i`.
pub fn connection(u: &FrameVector, v: &dyn FrameField, at: &Point) -> Result<FrameVector> {
    check_dim(at.dim(), u.dim())?;
    let value = v.value(at);
    check_dim(at.dim(), value.dim())?;
    let derivative = v.coefficient_derivative(at, u);
    Ok(&derivative + &frame_connection(u, &value)?)
}

/// `G(U) = D_U T`: `X_k -> Y_k`, `Y_k -> -X_k`, `T -> 0`.
pub fn g_operator(u: &FrameVector) -> FrameVector {
    FrameVector {
        a: u.b.iter().map(|v| -v).collect(),
        b: u.a.clone(),
        c: 0.0,
    }
}

pub fn horizontal_part(u: &FrameVector) -> FrameVector {
    FrameVector {
        a: u.a.clone(),
        b: u.b.clone(),
        c: 0.0,
    }
}

/// `nu_H = N_H / |N_H|` with the default singular tolerance.
pub fn horizontal_unit_normal(normal: &FrameVector) -> Result<FrameVector> {
    horizontal_unit_normal_with_tolerance(normal, SINGULAR_TOLERANCE)
}

/// Fails with [`Error::SingularPoint`] when `|N_H| <= tol * |N|`.
pub fn horizontal_unit_normal_with_tolerance(normal: &FrameVector, tol: f64) -> Result<FrameVector> {
    let nh = horizontal_part(normal);
    let norm = nh.norm();
    if !(norm > tol * normal.norm()) {
        return Err(Error::SingularPoint { norm });
    }
    Ok(nh.scale(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &FrameVector, b: &FrameVector, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn product_examples() {
        let n = 1;
        let p = Point::new(vec![0.3], vec![-1.2], 0.7).unwrap();
        let id = Point::origin(n);
        assert_eq!(group_product(&id, &p).unwrap(), p);
        let inv = group_product(&p, &p.inverse()).unwrap();
        assert_eq!(inv, Point::origin(n));

        let a = Point::new(vec![1.0], vec![0.0], 0.0).unwrap();
        let b = Point::new(vec![0.0], vec![1.0], 0.0).unwrap();
        let ab = group_product(&a, &b).unwrap();
        assert_eq!(ab, Point::new(vec![1.0], vec![1.0], -1.0).unwrap());
    }

    #[test]
    fn product_dimension_mismatch() {
        let p = Point::origin(1);
        let q = Point::origin(2);
        assert!(matches!(
            group_product(&p, &q),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn connection_table_entries() {
        let n = 2;
        let at = Point::origin(n);
        let x1 = FrameVector::x_k(n, 0);
        let y1 = FrameVector::y_k(n, 0);
        let t = FrameVector::t(n);
        let d = connection(&x1, &ConstantField(y1.clone()), &at).unwrap();
        assert!(close(&d, &(-&t), 0.0));
        let d = connection(&t, &ConstantField(t.clone()), &at).unwrap();
        assert!(close(&d, &FrameVector::zero(n), 0.0));
        let d = connection(&y1, &ConstantField(t.clone()), &at).unwrap();
        assert!(close(&d, &(-&x1), 0.0));
        // Different indices do not interact.
        let y2 = FrameVector::y_k(n, 1);
        let d = connection(&x1, &ConstantField(y2), &at).unwrap();
        assert!(close(&d, &FrameVector::zero(n), 0.0));
    }

    #[test]
    fn connection_leibniz_with_variable_field() {
        // V = x_1 Y_1 at p = (2, 0, 0, ...): D_{X_1} V = X_1(x_1) Y_1 + x_1 D_{X_1} Y_1 = Y_1 - 2T
        let n = 1;
        let at = Point::new(vec![2.0], vec![0.0], 0.0).unwrap();
        let field = FnField::new(|p: &Point| FrameVector::y_k(1, 0).scale(p.x[0]));
        let d = connection(&FrameVector::x_k(n, 0), &field, &at).unwrap();
        let expected = FrameVector::new(vec![0.0], vec![1.0], -2.0).unwrap();
        assert!(close(&d, &expected, 1e-9), "{d:?}");
    }

    #[test]
    fn g_examples() {
        let n = 3;
        assert_eq!(g_operator(&FrameVector::x_k(n, 1)), FrameVector::y_k(n, 1));
        assert_eq!(g_operator(&FrameVector::y_k(n, 2)), -&FrameVector::x_k(n, 2));
        assert_eq!(g_operator(&FrameVector::t(n)), FrameVector::zero(n));
    }

    #[test]
    fn horizontal_examples() {
        let n = 1;
        let x1 = FrameVector::x_k(n, 0);
        let t = FrameVector::t(n);
        assert_eq!(horizontal_part(&t), FrameVector::zero(n));
        let v = &x1 + &t.scale(2.0);
        assert_eq!(horizontal_part(&v), x1);
        assert_eq!(horizontal_part(&horizontal_part(&v)), x1);

        assert_eq!(horizontal_unit_normal(&x1).unwrap(), x1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let nu = horizontal_unit_normal(&(&x1 + &t).scale(s)).unwrap();
        assert!(close(&nu, &x1, 1e-15));
        assert!(matches!(
            horizontal_unit_normal(&t),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn euclidean_round_trip() {
        let at = Point::new(vec![1.0, -2.0], vec![0.5, 3.0], 4.0).unwrap();
        let v = FrameVector::from_euclidean(&at, &[1.0, 0.0], &[0.0, 2.0], 0.25).unwrap();
        // c - a.y + b.x = 0.25 - 0.5 + 2 * (-2)
        assert!((v.c - (0.25 - 0.5 - 4.0)).abs() < 1e-15);
        let (a, b, c) = v.to_euclidean(&at).unwrap();
        assert_eq!(a, vec![1.0, 0.0]);
        assert_eq!(b, vec![0.0, 2.0]);
        assert!((c - 0.25).abs() < 1e-15);
    }

    #[test]
    fn left_translation_pushes_frame_to_frame() {
        // d/ds L_p(exp(s X_1)) at s = 0 equals X_1 at p.
        let p = Point::new(vec![0.4, -0.3], vec![1.1, 0.2], -0.5).unwrap();
        let h = 1e-6;
        let moved = |s: f64| {
            let q = Point::new(vec![s, 0.0], vec![0.0, 0.0], 0.0).unwrap();
            group_product(&p, &q).unwrap()
        };
        let (plus, minus) = (moved(h), moved(-h));
        let ea: Vec<f64> = (0..2).map(|k| (plus.x[k] - minus.x[k]) / (2.0 * h)).collect();
        let eb: Vec<f64> = (0..2).map(|k| (plus.y[k] - minus.y[k]) / (2.0 * h)).collect();
        let ec = (plus.t - minus.t) / (2.0 * h);
        let v = FrameVector::from_euclidean(&p, &ea, &eb, ec).unwrap();
        assert!(close(&v, &FrameVector::x_k(2, 0), 1e-8), "{v:?}");
    }
}
