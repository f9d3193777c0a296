//! Linear operators, norm estimation and dense eigenvalues.

mod eigen;
mod map;

pub use eigen::{
    dense_eigenvalues, dense_eigenvalues_capped, Complex, DenseSquareMatrix, EigenMethod, EigenReport,
    DEFAULT_DENSE_CAP,
};
pub use map::{LinearMap, NormEstimate, Operator, DEFAULT_NORM_MAX_ITER, DEFAULT_NORM_TOL};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
