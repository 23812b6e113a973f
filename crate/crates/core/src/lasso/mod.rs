//! Lasso solvers and evaluation helpers.

mod cd;
mod kkt;
mod path;

pub use cd::{coordinate_descent_solve, soft_threshold, MAX_CYCLES};
pub use kkt::{kkt_check, KktReport};
pub use path::{
    lars_lasso_path, lasso_path_matrix, optimal_lambda, prediction_error, Knot, LassoPath, Segment,
};
pub(crate) use path::Homotopy;
