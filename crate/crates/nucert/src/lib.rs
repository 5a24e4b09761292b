//! Exact certification of multiplicity bounds for ample divisors on surfaces.
//!
//! Given r ample effective divisors D_1..D_r on a projective surface, presented
//! either as an abstract intersection matrix or as torus-invariant divisors on a
//! smooth complete toric surface, this crate computes multiplicities m_1..m_r >= 1
//! and emits an exactly verified certificate that the section-vanishing invariant
//!
//! ```text
//! nu(L; E) = liminf_n S_n / (n h0(nL)),   S_n = sum_{k>=1} h0(nL - kE),
//! ```
//!
//! satisfies nu(L; D_i) > (r/4) m_i for L = sum_i m_i D_i.
//!
//! The pipeline: [`solver::solve_fixed_point`] finds the balancing weight vector in
//! floating point, [`solver::rationalize`] rounds it to a rational point whose
//! per-divisor bounds are then re-proved in exact integer arithmetic, and the
//! resulting [`solver::NuCertificate`] can be re-checked from scratch at any time.
//! The [`toric`] module supplies exact h0 oracles (lattice-point counts of divisor
//! polygons) so every analytic claim can be cross-examined against true section
//! counts; [`filtration`] handles the adapted-basis combinatorics that consume the
//! certified multiplicities.

pub mod config;
pub mod filtration;
pub mod intersection;
pub mod nu_bounds;
pub mod rational;
pub mod solver;
pub mod toric;

pub use intersection::{DivisorWeights, FormReport, FormViolation, IntersectionForm, PairingValues, Scalar};
pub use nu_bounds::{curve_nu, morse_lower_bound, nu_lower_bound, truncated_nu, NuBound, SectionOracle, SurfacePair};
pub use solver::{fixed_point_map, rationalize, solve_fixed_point, strict_margin, FixedPointResult, NuCertificate};
pub use toric::{curve_h0, intersection_form_of, proper_intersection_check, DivisorPolygon, ToricDivisor, ToricSurface};

use thiserror::Error;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: u64 = 100_000;
pub const DEFAULT_DENOMINATOR_CAP: u64 = 10_000;
pub const DEFAULT_B_CAP: u64 = 100;

/// Unified error type. `exit_code` groups errors the way the command line
/// reports them: 1 for invalid input, 2 for solver or search failures, 3 for
/// certification failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("intersection form rejected: {0}")]
    InvalidForm(FormReport),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("fixed point iteration did not converge: best residual {best_residual:.3e} after {iterations} iterations")]
    NonConvergence { best_residual: f64, iterations: u64 },
    #[error("no denominator up to {cap} yields strictly positive margins")]
    DenominatorCapExceeded { cap: u64 },
    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),
    #[error("epsilon precondition failed: {0}")]
    EpsilonPrecondition(String),
    #[error("no admissible b up to {cap}")]
    BCapExceeded { cap: u64 },
    #[error("json error: {0}")]
    Json(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidForm(_)
            | Error::Precondition(_)
            | Error::Json(_)
            | Error::Io(_) => 1,
            Error::NonConvergence { .. } | Error::EpsilonPrecondition(_) | Error::BCapExceeded { .. } => 2,
            Error::DenominatorCapExceeded { .. } | Error::CertificateInvalid(_) => 3,
        }
    }
}
