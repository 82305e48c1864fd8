//! Semiparametric Bayesian inference for multivariate max-stable
//! distributions whose angular measure is a Bernstein-polynomial mixture of
//! Dirichlet densities with vertex atoms.
//!
//! The numeric core is generic over [`Scalar`] / [`Real`]; constraint
//! checks, conversions and degree elevation also run in exact rational
//! arithmetic. The `f64` aliases below are what most callers want.

pub mod angular;
pub mod error;
pub mod inference;
pub mod maxstable;
pub mod metrics;
pub mod priors;
pub mod quad;
pub mod scalar;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Angular measure with `f64` weights.
pub type AngularBp = angular::AngularBp<f64>;
/// Angular measure with exact rational weights.
pub type AngularBpExact = angular::AngularBp<num_rational::BigRational>;
pub type ModelSpec = maxstable::ModelSpec<f64>;
pub type MarginSpec = maxstable::MarginSpec<f64>;
pub type PickandsBp2 = angular::PickandsBp2<f64>;
pub type PickandsBs2 = angular::PickandsBs2<f64>;
pub type AngularHist2 = angular::AngularHist2<f64>;
