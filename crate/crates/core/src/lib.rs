//! Lasso homotopy paths, correlated design generators, correlation factors
//! and prediction-error bounds for studying how design correlations shape
//! the optimal Lasso tuning parameter.

pub mod bounds;
pub mod cli;
pub mod correlation;
pub mod design;
pub mod error;
pub mod experiments;
pub mod lasso;
pub mod simcore;

pub use error::{Error, Result};
