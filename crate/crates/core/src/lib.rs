//! Conditional random-matrix ensembles and stability probabilities for
//! parametric ODE models.
//!
//! The crate samples parameter vectors for a registry of ODE systems, locates
//! their feasible equilibria, evaluates Jacobians there, and builds several
//! derived matrix ensembles whose stability probabilities can be compared:
//!
//! - `fcs` — Jacobians of the fully conditioned system, one per accepted
//!   parameter draw ([`sampler::sample_fcs`]);
//! - `independent` — per-cell resampling across draws, breaking cross-cell
//!   dependency while keeping every marginal ([`ensembles::permute_independent`]);
//! - `iid` — cells drawn from the pooled entry distribution
//!   ([`ensembles::permute_iid`]);
//! - `ind-normal`, `ind-pearson` — parametric fits (two or four moments) to
//!   each cell's marginal;
//! - `iid-normal` — per-cell normal fits to the `iid` ensemble;
//! - `mvn` — a maximum-likelihood multivariate normal over vectorized
//!   matrices, retaining cross-cell covariance.
//!
//! Stability of a matrix means every eigenvalue has strictly negative real
//! part; ensemble stability probabilities are Monte Carlo proportions with
//! binomial standard errors. All sampling is deterministic given a seed, and
//! deterministic under any degree of sharding across threads.

pub mod ensembles;
pub mod equilibria;
pub mod linalg;
pub mod models;
pub mod pearson;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod toyplane;

mod error;

pub use error::{Error, Result};

/// Dense square matrix of Jacobian entries.
pub type RealMatrix = nalgebra::DMatrix<f64>;

/// State vector of an ODE system, ordered as documented per model.
pub type StateVector = Vec<f64>;

/// Parameter vector, ordered as the model's `param_names`.
pub type ParameterVector = Vec<f64>;

/// Complex eigenvalue.
pub type Complex = nalgebra::Complex<f64>;
