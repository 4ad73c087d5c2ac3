//! Core-periphery detection on attributed graphs.
//!
//! Four generative models tie per-node core scores `c ∈ [0,1]^N` to a signed
//! weighted graph `Θ` and node attributes `X`:
//!
//! * GA-Affine-Bool and GA-Affine-Real: binary or real attributes with an
//!   affine (logistic or linear) dependence on `c`, see [`infer::affine`].
//! * GA-Nonlinear: attributes are Gaussian with a precision matrix built from
//!   `c`, see [`infer::nonlinear`].
//! * AO: only attributes are observed; the graph and the scores are estimated
//!   jointly by alternating a weighted graphical lasso with a linear program,
//!   see [`infer::ao`].
//!
//! [`generate`] draws synthetic instances, [`baselines`] holds graph-only
//! reference methods and [`metrics`] the evaluation scores.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod generate;
pub mod infer;
pub mod metrics;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
pub use model::{AffineParams, CoreScores, DistanceMatrix, Hyperparams};
