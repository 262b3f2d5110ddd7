//! Compliance measures of convex regularizers for low-dimensional model sets.
//!
//! The crate evaluates how well a regularizer (weighted ℓ¹, ℓ¹ by levels,
//! nuclear norm, finite atomic norms) promotes recovery of a model set
//! (k-sparse vectors, rank-r symmetric matrices, sparsity in levels), through
//! RIP-based measures (`delta_nec`, `delta_suff`) and Monte Carlo estimates of
//! descent-cone volumes. Closed forms are paired with brute-force oracles in
//! [`oracle`].

// Input guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compliance;
pub mod error;
pub mod levels;
pub mod linalg;
pub mod models;
pub mod montecarlo;
pub mod oracle;
pub mod point;
pub mod regularizers;
pub mod rng;
pub mod simplex;
pub mod svg;

pub use compliance::{ComplianceReport, LinearOperator, Method};
pub use error::{Error, Result};
pub use levels::{LevelsOptimum, LevelsWeights};
pub use linalg::{eig_sym, EigenDecomposition};
pub use models::{model_norm, project_model, secant_model, ModelSet};
pub use montecarlo::VolumeEstimate;
pub use point::{Point, SymMatrix};
pub use regularizers::{GaugeCertificate, Membership, Regularizer};
