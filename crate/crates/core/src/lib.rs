//! Online sequential extreme learning machine with concept-drift adaptation.
//!
//! The crate implements a single-hidden-layer random-feature learner trained
//! by ridge-regularized least squares, updated sequentially batch by batch
//! without storing past data. On top of the sequential core sit the
//! adaptation operators for streams whose shape changes over time:
//!
//! * hidden-node growth fused with a data batch ([`sequential::ceoselm_update`]),
//! * input-dimension growth for feature-space concatenation ([`adapt::adapt_virtual`]),
//! * output-block growth with per-concept output marginalization
//!   ([`adapt::adapt_real`]), and both at once ([`adapt::adapt_hybrid`]),
//! * a rank-based check that flags non-convergent growth steps
//!   ([`adapt::underfit_check`]),
//! * a windowed-loss drift monitor with commit-or-rollback model management
//!   ([`monitor`]).
//!
//! Everything numeric is generic over the scalar type ([`Scalar`]); the
//! aliases below pin the common `f64` instantiation.

pub mod adapt;
pub mod data;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod monitor;
pub mod rng;
pub mod scalar;
pub mod sequential;

pub use matrix::{DenseMatrix, MatrixError};
pub use rng::RngStream;
pub use scalar::Scalar;

/// `f64`-backed dense matrix, the default precision throughout the tools.
pub type Mat = DenseMatrix<f64>;
/// `f32`-backed dense matrix.
pub type Mat32 = DenseMatrix<f32>;
/// `f64`-backed learner state.
pub type Model = model::ElmModel<f64>;
/// `f64`-backed labeled batch.
pub type Batch = model::LabeledBatch<f64>;
