//! Vectors, linear operators and Matrix Market IO.

mod linear_map;
mod matrix_market;
mod vector;

pub use linear_map::{
    LinearMap, Storage, DEFAULT_NORM_MAX_ITERS, DEFAULT_NORM_TOL, NORM_SAFETY_FACTOR,
};
pub use matrix_market::{
    format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market,
};
pub use vector::{dot, Vector};
