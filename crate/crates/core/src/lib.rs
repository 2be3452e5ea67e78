//! Decision-focused training of linear cost predictors for linear programs.
//!
//! The crate provides an exact pessimistic-regret oracle, an SPO+ baseline,
//! local-search and alternating-descent trainers, exports of the bilinear
//! training problem, and a polynomial check for zero-regret predictors.

pub mod bench;
pub mod datagen;
pub mod error;
pub mod lp;
pub mod model;
pub mod problems;
pub mod qcqp;
pub mod regret;
pub mod train;
pub mod zero_regret;

pub use error::{Error, Result};
