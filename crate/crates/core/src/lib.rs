//! Geodesic blocking laboratory.
//!
//! Enumerates geodesic segments and light rays (segments whose open interior
//! avoids both endpoints) on a handful of model geometries, builds and
//! verifies finite blocking sets, bounds blocking numbers from both sides and
//! estimates growth rates of geodesic counts.
//!
//! | module | geometry |
//! |--------|----------|
//! | [`torus`] | flat tori `R^n / Λ` with exact rational arithmetic |
//! | [`graph`] | finite graphs as quotients of their universal-cover trees |
//! | [`apartment`] | box-shaped Coxeter chambers and their reflection groups |
//! | [`revolution`] | round and Zoll metrics of revolution on the 2-sphere |
//!
//! [`blocking`] holds the geometry-agnostic definitions and [`entropy`] the
//! counting and growth-rate estimates built on top of the enumerators.
//!
//! The definitions of light and blocking are applied verbatim to geodesic
//! metric spaces that are not manifolds (graphs, apartments); there a
//! "geodesic" is a local geodesic, i.e. the projection of a geodesic of the
//! universal cover.

pub mod apartment;
pub mod artifact;
pub mod blocking;
pub mod entropy;
pub mod graph;
pub mod rational;
pub mod revolution;
pub mod torus;

use thiserror::Error;

pub use rational::{Rational, RationalError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("rays belong to different spaces (`{0}` vs `{1}`)")]
    SpaceMismatch(String, String),
    #[error("zero tolerance requested on sampled paths")]
    ZeroToleranceOnSampled,
    #[error("empty ray list")]
    EmptyRays,
    #[error("rays do not share endpoints: {0}")]
    MixedEndpoints(String),
    #[error("ray `{0}` is hit by no candidate blocker")]
    InsufficientCandidates(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate lattice basis: {0}")]
    DegenerateBasis(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("power iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("type {0} lies outside the chamber")]
    TypeOutsideChamber(String),
    #[error("inadmissible profile: {0}")]
    InadmissibleProfile(String),
    #[error("integrator tolerance breach: {0}")]
    ToleranceBreach(String),
    #[error("pole chart failure: {0}")]
    PoleChart(String),
    #[error("unresolved bracket near initial angle {angle}; rerun at a finer resolution")]
    UnresolvedBracket { angle: f64 },
    #[error("horizon {0} exceeds one closed-geodesic period 2π")]
    HorizonTooLong(f64),
    #[error("growth series needs at least 4 horizons with nonzero counts")]
    TooFewHorizons,
    #[error("all counts are zero")]
    AllZero,
    #[error("segment `{0}` never reaches the target after its last exit from the source")]
    ProjectionFailure(String),
    #[error("blocker set does not block ray `{0}`")]
    UnverifiedBlockers(String),
    #[error("inequality violated at T = {horizon}: {detail}")]
    InequalityViolated { horizon: f64, detail: String },
    #[error("operation not supported by this space: {0}")]
    Unsupported(String),
}

impl Error {
    /// Stable machine-readable identifier for error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Rational(_) => "rational",
            Error::SpaceMismatch(..) => "space-mismatch",
            Error::ZeroToleranceOnSampled => "zero-tolerance-on-sampled",
            Error::EmptyRays => "empty-rays",
            Error::MixedEndpoints(_) => "mixed-endpoints",
            Error::InsufficientCandidates(_) => "insufficient-candidates",
            Error::Invalid(_) => "invalid",
            Error::DegenerateBasis(_) => "degenerate-basis",
            Error::InvalidGraph(_) => "invalid-graph",
            Error::NonConvergence { .. } => "non-convergence",
            Error::WindowTooSmall(_) => "window-too-small",
            Error::TypeOutsideChamber(_) => "type-outside-chamber",
            Error::InadmissibleProfile(_) => "inadmissible-profile",
            Error::ToleranceBreach(_) => "tolerance-breach",
            Error::PoleChart(_) => "pole-chart",
            Error::UnresolvedBracket { .. } => "unresolved-bracket",
            Error::HorizonTooLong(_) => "horizon-too-long",
            Error::TooFewHorizons => "too-few-horizons",
            Error::AllZero => "all-zero",
            Error::ProjectionFailure(_) => "projection-failure",
            Error::UnverifiedBlockers(_) => "unverified-blockers",
            Error::InequalityViolated { .. } => "inequality-violated",
            Error::Unsupported(_) => "unsupported",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
