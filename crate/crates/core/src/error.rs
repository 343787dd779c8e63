use thiserror::Error;

/// Failures raised by the numerical routines.
///
/// Diagnostics are carried as `f64` regardless of the scalar type so the error
/// stays independent of the generic parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid tau: imaginary part {im} is not positive")]
    InvalidTau { im: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point lies within {distance:e} of a lattice pole (clearance {clearance:e})")]
    PoleProximity { distance: f64, clearance: f64 },
    #[error("point lies within {distance:e} of a singularity (clearance {clearance:e})")]
    SingularityProximity { distance: f64, clearance: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("(r, s) lies on the half-lattice")]
    HalfLatticeInput,
    #[error("point is a half-period")]
    HalfPeriodInput,
    #[error("Z_(r,s) vanishes (|Z| = {modulus:e})")]
    DegenerateZ { modulus: f64 },
    #[error("Okamoto denominator vanishes (|D| = {modulus:e})")]
    DegenerateDenominator { modulus: f64 },
    #[error("branch jump: consecutive p values differ by {jump}")]
    BranchJump { jump: f64 },
    #[error("p(tau) approached a half-period (distance {distance:e})")]
    HalfPeriodCollision { distance: f64 },
    #[error("integration step failure: {0}")]
    StepFailure(String),
    #[error("unsupported PVI index {0:?}; only (0,0,0,0) and (1,0,0,0) are supported")]
    UnsupportedIndex([u32; 4]),
    #[error("no valid basepoint at clearance {clearance}")]
    NoValidBasepoint { clearance: f64 },
    #[error("ill-conditioned eigenbasis (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("monodromy is not unitary")]
    NotUnitary,
    #[error("sampling circle of radius {radius} meets another singularity")]
    CircleIntersectsSingularity { radius: f64 },
    #[error("finite-difference stencil of step {step:e} reaches a singularity")]
    StepTooLarge { step: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
