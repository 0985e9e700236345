//! Belted and ensembled neural networks for sufficient dimension
//! reduction.
//!
//! A belted network composes a dimension reducer `f: R^p -> R^d` with an
//! ensemble regressor `h: R^d -> R^m` and fits `h(f(x))` to a family of
//! `m` transformations of the response by least squares. The narrow
//! "belt" between the two stages carries the estimated sufficient
//! predictors: a low-dimensional summary of `x` that retains all the
//! information about the conditional distribution (or conditional mean)
//! of `y`. Placing the belt directly after the input makes the reduction
//! linear; choosing the transformation family selects the estimation
//! target.
//!
//! Highlights:
//!
//! - [`belt::build_benn`] constructs seeded models for each reduction
//!   setting; [`trainer::fit`] trains them deterministically.
//! - [`ensemble`] implements the transformation families (moments, CDF
//!   indicators, sine/cosine pairs, Gaussian kernel sections, class
//!   indicators, identity).
//! - [`tuning`] maps sample size to suggested architectures.
//! - [`metrics`] provides distance correlation and subspace distances.
//! - [`datagen`] provides seeded synthetic benchmarks and CSV I/O.
//! - [`gsir`] is a reference kernel method used for speed and accuracy
//!   comparisons.
//!
//! The `benn` binary exposes the same functionality as subcommands
//! (`simulate`, `tune`, `train`, `predict`, `evaluate`, `benchmark`),
//! and the `examples/` directory contains one runnable walk-through per
//! capability.

// Validation uses `!(x > 0.0)` so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod belt;
pub mod checkpoint;
pub mod cli;
pub mod datagen;
pub mod ensemble;
pub mod error;
pub mod gsir;
pub mod metrics;
pub mod network;
pub mod rng;
pub(crate) mod stats;
pub mod trainer;
pub mod tuning;

pub use belt::{build_benn, extract_linear_basis};
pub use ensemble::{build_gauss_ensemble, EnsembleFamily, EnsembleSpec};
pub use error::{BennError, Result};
pub use network::{BeltMode, BennModel, DenseNet, StructuralParams};
pub use trainer::{fit, predict_ensemble, predict_sufficient, FitResult, TrainConfig};
