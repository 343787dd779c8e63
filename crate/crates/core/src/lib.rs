//! Solvability of the singular curvature equation
//!
//! ```text
//! Δu + eᵘ = 8πnδ₀ + 4π(δ_p + δ_{−p})   on  E_τ = ℂ / (ℤ + ℤτ)
//! ```
//!
//! through Weierstrass functions, the elliptic form of Painlevé VI and the
//! monodromy of the generalized Lamé equation.
//!
//! The pipeline runs
//! [`hitchin::hitchin_p`] → [`hitchin::solution_state`] → [`gle::monodromy`] →
//! [`gle::classify`] → [`synth::u_field`], and [`hitchin::omega_membership`]
//! decides whether a given `p` admits a solution.
//!
//! Everything is generic over [`scalar::Real`]; the aliases below fix `f64`.
//!
//! ```
//! use painleve_torus::{Context, MonodromyParams, Tau};
//! use painleve_torus::hitchin::hitchin_p;
//!
//! let ctx = Context::new(Tau::from_parts(0.2, 1.1).unwrap()).unwrap();
//! let (p, _) = hitchin_p(&ctx, &MonodromyParams::real(0.3, 0.2).unwrap()).unwrap();
//! assert!(ctx.dist_to_half_periods(p.z) > 0.1);
//! ```

pub mod elliptic;
pub mod error;
pub mod gle;
pub mod green;
pub mod hitchin;
pub mod mat2;
pub mod ode;
pub mod output;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use hitchin::PVIIndex;
pub use scalar::{Real, C};

pub type Complex64 = num_complex::Complex<f64>;
pub type Tau = elliptic::Tau<f64>;
pub type TorusPoint = elliptic::TorusPoint<f64>;
pub type Context = elliptic::EllipticContext<f64>;
pub type ContextFamily = elliptic::ContextFamily<f64>;
pub type MonodromyParams = hitchin::MonodromyParams<f64>;
pub type HamiltonianState = hitchin::HamiltonianState<f64>;
pub type RegionSample = hitchin::RegionSample<f64>;
pub type Witness = hitchin::Witness<f64>;
pub type SingularPair = green::SingularPair<f64>;
pub type CriticalPoint = green::CriticalPoint<f64>;
pub type GLEParams = gle::GLEParams<f64>;
pub type MonodromyRep = gle::MonodromyRep<f64>;
pub type MonodromyClass = gle::MonodromyClass<f64>;
pub type Mat2 = mat2::Mat2<f64>;
pub type EigenBasis = synth::EigenBasis<f64>;
pub type SolutionField = synth::SolutionField<f64>;
