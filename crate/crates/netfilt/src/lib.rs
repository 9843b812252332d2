//! Network filtering for target detection in sparse Gaussian networks.
//!
//! Measurements on the units of an interacting system are modeled by a
//! system of sparse conditional regressions: `Y ~ N(0, (I - B)^{-1} sigma^2)`
//! with a symmetric, zero-diagonal interaction matrix `B` whose support is a
//! sparse concentration graph. Test data may carry an additive external
//! perturbation that the network blurs across units; multiplying by
//! `I - B_hat`, with `B_hat` learned row by row via L1-penalized regression
//! on training data, removes the network background and exposes the
//! perturbed unit as the entry of largest magnitude.
//!
//! The crate provides:
//!
//! * [`graph`] - ER, preferential-attachment and geometric random topologies;
//! * [`model`] - degree-scaled and Beta-weighted precision models on a graph;
//! * [`sampling`] - exact Gaussian training/test draws and CSV data formats;
//! * [`lasso`] - coordinate-descent solver, cross-validation, and the
//!   row-wise network estimate;
//! * [`filter`] - filtering transforms, argmax detection, and conditional
//!   law diagnostics;
//! * [`theory`] - closed-form feasibility conditions, spectral bounds, and a
//!   brute-force restricted-isometry estimator;
//! * [`experiment`] - the seeded Monte Carlo harness comparing detection
//!   with the true network, the estimated network, and no network at all.
//!
//! Inner loops (row regressions, isometry subsets, Monte Carlo cells) run on
//! rayon under the default `parallel` feature and fall back to sequential
//! execution without it; outputs are identical either way.

pub mod error;
pub mod experiment;
pub mod filter;
pub mod graph;
pub mod lasso;
pub mod model;
pub mod parallel;
pub mod sampling;
pub mod seed;
pub mod theory;

pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ExperimentOutput, ResultTable};
pub use filter::{FilterMethod, FilterOutput};
pub use graph::Graph;
pub use lasso::LassoEstimate;
pub use model::PrecisionModel;
