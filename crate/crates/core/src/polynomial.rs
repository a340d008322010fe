//! Dense real polynomials in one variable, just enough for the radius and
//! inflection polynomials of the profile curves.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// `sum coeffs[k] y^k` (ascending order).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c y^degree`.
    pub fn monomial(c: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Synthetic division by `(y - root)`: returns `(quotient, remainder)`.
    pub fn deflate(&self, root: f64) -> (Self, f64) {
        let n = self.coeffs.len();
        if n == 1 {
            return (Self::constant(0.0), self.coeffs[0]);
        }
        let mut quotient = vec![0.0; n - 1];
        let mut carry = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            quotient[k] = carry;
            carry = self.coeffs[k] + carry * root;
        }
        (Self::new(quotient), carry)
    }

    /// Sign changes in the coefficient sequence, zeros skipped.
    pub fn sign_changes(&self) -> usize {
        count_sign_changes(&self.coeffs)
    }
}

fn count_sign_changes(coeffs: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for &c in coeffs.iter().filter(|c| **c != 0.0) {
        if last != 0.0 && c.signum() != last.signum() {
            changes += 1;
        }
        last = c;
    }
    changes
}

/// Upper bound on the number of positive real roots (Descartes' rule of
/// signs). The count does not depend on whether the coefficients are listed
/// in ascending or descending order.
pub fn descartes_positive_root_bound(coefficients: &[f64]) -> Result<usize> {
    if coefficients.iter().all(|&c| c == 0.0) {
        return Err(Error::ZeroPolynomial);
    }
    Ok(count_sign_changes(coefficients))
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Root of `p` in `[lo, hi]`, which must bracket a sign change: bisection
/// to width `1e-10` (relative to the bracket scale), then three Newton
/// steps kept inside the final bracket.
pub fn refine_root(p: &Polynomial, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let (mut flo, fhi) = (p.eval(lo), p.eval(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootBracketFailure(format!(
            "no sign change on [{lo}, {hi}]: p = {flo:e}, {fhi:e}"
        )));
    }
    let width = 1e-10 * hi.abs().max(1e-300);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let fm = p.eval(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let dp = p.derivative();
    let mut y = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = dp.eval(y);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = y - p.eval(y) / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        y = next;
    }
    Ok(y)
}
