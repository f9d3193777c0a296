//! Golden ratio primal-dual algorithms for `min f(Kx) + g(x)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense/sparse linear maps, operator-norm estimation and a
//!   small nonsymmetric eigensolver.
//! * [`prox`]: proximal operators of the component functions.
//! * [`problem`]: the saddle-point problem `min_x max_y g(x) + ⟨Kx,y⟩ − f*(y)`.
//! * [`solvers`]: GRPDA (fixed step, accelerated, relaxed) and the baselines.
//! * [`metrics`]: gap functions, certificates and ergodic averages.
//! * [`fixedpoint`]: the affine fixed-point map of one relaxed sweep and its
//!   spectral certification.
//! * [`problems`]: seeded instance generators and a Matrix Market reader.

pub mod error;
pub mod fixedpoint;
pub mod linalg;
pub mod metrics;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{DenseSquareMatrix, EigenReport, LinearMap, Operator};
pub use problem::SaddleProblem;
pub use prox::{ExtValue, ProxOracle};

/// The golden ratio `(1 + √5)/2`.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;
