//! Quadrature for integrands with inverse-square-root endpoint
//! singularities.
//!
//! Integrands receive an [`Abscissa`] carrying the node together with its
//! distances to both endpoints. Near an endpoint those distances are
//! computed directly from the quadrature transform instead of by
//! subtraction, so factors such as `sqrt(x - a)` stay accurate at nodes
//! that are within a few ulps of `a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn combine(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn scaled(self, s: f64) -> QuadratureResult {
        QuadratureResult {
            value: self.value * s,
            error_estimate: self.error_estimate * s.abs(),
            evaluations: self.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Regular,
    /// Integrand behaves like `(x - endpoint)^{-1/2}`.
    InverseSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularitySpec {
    pub left: Endpoint,
    pub right: Endpoint,
}

impl SingularitySpec {
    pub const REGULAR: SingularitySpec = SingularitySpec {
        left: Endpoint::Regular,
        right: Endpoint::Regular,
    };
    pub const LEFT: SingularitySpec = SingularitySpec {
        left: Endpoint::InverseSqrt,
        right: Endpoint::Regular,
    };
    pub const RIGHT: SingularitySpec = SingularitySpec {
        left: Endpoint::Regular,
        right: Endpoint::InverseSqrt,
    };
    pub const BOTH: SingularitySpec = SingularitySpec {
        left: Endpoint::InverseSqrt,
        right: Endpoint::InverseSqrt,
    };
}

/// A quadrature node `x` in `[a, b]` with `from_a = x - a`, `from_b = b - x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abscissa {
    pub x: f64,
    pub from_a: f64,
    pub from_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Double-exponential (tanh-sinh) rule with level halving.
    TanhSinh,
    /// `x = a + u^2` (mirrored at `b`) on each singular half, then adaptive
    /// Gauss-Kronrod in `u`.
    SqrtSubstitution,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-13;

/// Tanh-sinh quadrature of `f` on `[a, b]` (the default scheme).
pub fn singular_quadrature<F>(f: F, a: f64, b: f64, spec: SingularitySpec) -> Result<QuadratureResult>
where
    F: Fn(Abscissa) -> f64,
{
    singular_quadrature_with(Scheme::TanhSinh, f, a, b, spec, DEFAULT_TOLERANCE)
}

pub fn singular_quadrature_with<F>(
    scheme: Scheme,
    f: F,
    a: f64,
    b: f64,
    spec: SingularitySpec,
    tol: f64,
) -> Result<QuadratureResult>
where
    F: Fn(Abscissa) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let flipped = |p: Abscissa| {
            f(Abscissa {
                x: p.x,
                from_a: p.from_b,
                from_b: p.from_a,
            })
        };
        let mirrored = SingularitySpec {
            left: spec.right,
            right: spec.left,
        };
        return dispatch(scheme, &flipped, b, a, mirrored, tol).map(|r| r.scaled(-1.0));
    }
    dispatch(scheme, &f, a, b, spec, tol)
}

fn dispatch(
    scheme: Scheme,
    f: &dyn Fn(Abscissa) -> f64,
    a: f64,
    b: f64,
    spec: SingularitySpec,
    tol: f64,
) -> Result<QuadratureResult> {
    match scheme {
        Scheme::TanhSinh => tanh_sinh(f, a, b, tol),
        Scheme::SqrtSubstitution => sqrt_substitution(f, a, b, spec, tol),
    }
}

const TANH_SINH_MAX_LEVEL: usize = 12;
const TANH_SINH_T_MAX: f64 = 6.5;

fn tanh_sinh(f: &dyn Fn(Abscissa) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    let half = 0.5 * (b - a);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut evaluations = 0usize;
    let bad: std::cell::Cell<Option<f64>> = std::cell::Cell::new(None);

    // Weighted value at node t (without the step factor).
    let mut node = |t: f64| -> f64 {
        let u = half_pi * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // 1 - tanh|u| = 2e / (1 + e)
        let near = 2.0 * half * e / (1.0 + e);
        if near <= 0.0 {
            return 0.0;
        }
        let (from_a, from_b, x) = if u < 0.0 {
            (near, 2.0 * half - near, a + near)
        } else {
            (2.0 * half - near, near, b - near)
        };
        let sech = 2.0 * e.sqrt() / (1.0 + e);
        let w = half * half_pi * t.cosh() * sech * sech;
        evaluations += 1;
        let v = f(Abscissa { x, from_a, from_b });
        if !v.is_finite() {
            bad.set(Some(x));
        }
        w * v
    };

    let mut step = 1.0;
    let mut sum = node(0.0);
    let mut k = 1;
    while (k as f64) * step <= TANH_SINH_T_MAX {
        let t = k as f64 * step;
        sum += node(t) + node(-t);
        k += 1;
    }
    let mut estimate = sum * step;
    let mut error = f64::INFINITY;
    for _level in 1..=TANH_SINH_MAX_LEVEL {
        step *= 0.5;
        let mut k = 1;
        while (k as f64) * step <= TANH_SINH_T_MAX {
            let t = k as f64 * step;
            sum += node(t) + node(-t);
            k += 2;
        }
        if let Some(x) = bad.get() {
            return Err(Error::Domain(format!("integrand is not finite at x = {x}")));
        }
        let next = sum * step;
        error = (next - estimate).abs();
        estimate = next;
        if error <= tol * estimate.abs().max(1e-300) {
            return Ok(QuadratureResult {
                value: estimate,
                error_estimate: error,
                evaluations,
            });
        }
    }
    Err(Error::NonConvergence {
        estimate: error,
        evaluations,
    })
}

fn sqrt_substitution(
    f: &dyn Fn(Abscissa) -> f64,
    a: f64,
    b: f64,
    spec: SingularitySpec,
    tol: f64,
) -> Result<QuadratureResult> {
    let m = 0.5 * (a + b);
    let left = match spec.left {
        Endpoint::Regular => gauss_kronrod(
            |x| {
                f(Abscissa {
                    x,
                    from_a: x - a,
                    from_b: b - x,
                })
            },
            a,
            m,
            tol,
        )?,
        Endpoint::InverseSqrt => gauss_kronrod(
            |u| {
                let d = u * u;
                2.0 * u
                    * f(Abscissa {
                        x: a + d,
                        from_a: d,
                        from_b: (b - a) - d,
                    })
            },
            0.0,
            (m - a).sqrt(),
            tol,
        )?,
    };
    let right = match spec.right {
        Endpoint::Regular => gauss_kronrod(
            |x| {
                f(Abscissa {
                    x,
                    from_a: x - a,
                    from_b: b - x,
                })
            },
            m,
            b,
            tol,
        )?,
        Endpoint::InverseSqrt => gauss_kronrod(
            |u| {
                let d = u * u;
                2.0 * u
                    * f(Abscissa {
                        x: b - d,
                        from_a: (b - a) - d,
                        from_b: d,
                    })
            },
            0.0,
            (b - m).sqrt(),
            tol,
        )?,
    };
    Ok(left.combine(right))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod 15-point value and `|K15 - G7|` on `[a, b]`.
pub fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

const MAX_SUBINTERVALS: usize = 4000;

/// Globally adaptive Gauss-Kronrod (7, 15) quadrature.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = kronrod15(&f, a, b);
    intervals.push((a, b, v, e));
    let mut evaluations = 15;
    loop {
        let total: f64 = intervals.iter().map(|i| i.2).sum();
        let error: f64 = intervals.iter().map(|i| i.3).sum();
        if !total.is_finite() {
            return Err(Error::NonConvergence {
                estimate: error,
                evaluations,
            });
        }
        if error <= tol * total.abs().max(1e-300) || error <= 1e-300 {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: error,
                evaluations,
            });
        }
        if intervals.len() >= MAX_SUBINTERVALS {
            return Err(Error::NonConvergence {
                estimate: error,
                evaluations,
            });
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("interval list is never empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // Interval cannot be split further in floating point.
            return Err(Error::NonConvergence {
                estimate: error,
                evaluations,
            });
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Kronrod 15-point rule on `panels` equal subintervals.
pub fn kronrod_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> QuadratureResult {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut out = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
    };
    for i in 0..panels {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == panels { b } else { lo + width };
        let (v, e) = kronrod15(&f, lo, hi);
        out = out.combine(QuadratureResult {
            value: v,
            error_estimate: e,
            evaluations: 15,
        });
    }
    out
}
