//! Composite estimators that combine initial estimates computed at several
//! tuning levels, cancelling the leading bias term and reweighting for
//! variance.

pub mod blockwise;
pub mod cli;
pub mod combiner;
pub mod error;
pub mod kernel;
pub mod numerics;
pub mod quantile;
pub mod simulation;

pub use error::{Error, Result};
