//! First-order solvers for convex-concave saddle-point problems
//!
//! ```text
//! min_x max_y  f1(x) + f2(x) + <Kx, y> - g1(y) - g2(y)
//! ```
//!
//! where `f1`, `g1` have cheap proximal maps, `f2`, `g2` are smooth, and `g1`
//! is strongly convex. The main solver is an inertial accelerated primal-dual
//! method ([`solvers::solve_iapd`]) whose last iterate enjoys an `O(1/k^2)`
//! decay of the reference-point gap. Its energy sequence and certified bounds
//! can be evaluated at runtime through [`diagnostics`].
//!
//! Baselines (PDA, APDA, FISTA and Tseng's accelerated forward-backward) share
//! the same observer interface, and [`bench`] reproduces the l1-regularized and
//! nonnegative least-squares experiments on seeded synthetic instances.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod prox;
pub mod solvers;
pub mod trace;

pub use error::{Error, Result};
pub use linalg::{LinearMap, Vector};
pub use problem::{ReferencePoint, SaddleProblem, StepParams};
pub use prox::{ProxFunction, SmoothFunction};
