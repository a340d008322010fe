use thiserror::Error;

use crate::profile_ode::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The horizontal projection of the normal vanishes (a point of the singular set).
    #[error("singular point: |N_H| = {norm:e} is below tolerance")]
    SingularPoint { norm: f64 },

    #[error("point lies on the rotation axis (x = {x:e})")]
    AxisPoint { x: f64 },

    #[error("profile system is singular at x = {x:e} (axis tolerance {epsilon:e})")]
    AxisSingularity { x: f64, epsilon: f64 },

    #[error("tangent vectors are degenerate")]
    DegenerateTangents,

    #[error("normal vector is not unit (|N| = {norm})")]
    NonUnitNormal { norm: f64 },

    #[error("energy drift {drift:e} exceeds tolerance {tolerance:e} at s = {s}")]
    EnergyDrift {
        drift: f64,
        tolerance: f64,
        s: f64,
        partial: Box<Trajectory>,
    },

    #[error("step size underflow at s = {s}")]
    StepSizeUnderflow { s: f64 },

    #[error("trajectory has no critical radius to reflect across")]
    NoCriticalPoint,

    #[error("no admissible radius: E = {e} exceeds the cylinder energy {e_cyl}")]
    NoAdmissibleRadius { e: f64, e_cyl: f64 },

    #[error("root bracket failure: {0}")]
    RootBracketFailure(String),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("quadrature did not converge: estimate {estimate:e} after {evaluations} evaluations")]
    NonConvergence { estimate: f64, evaluations: usize },

    #[error("quadrature mismatch: {a} vs {b}")]
    QuadratureMismatch { a: f64, b: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("profile is open; declare a closure or truncation")]
    OpenProfile,

    #[error("variation support reaches the axis (x = {x:e})")]
    SupportTouchesAxis { x: f64 },

    #[error("area density mismatch: Gram route {gram} vs closed form {closed}")]
    DensityMismatch { gram: f64, closed: f64 },
}
