use crate::error::{check_finite, Result};

/// Iterates shared by every scheme.
///
/// * GRPDA and A-GRPDA: `z`, `x`, `y` are `z_n`, `x_n`, `y_n`; `y_prev` is `y_{n−1}`.
/// * R-GRPDA: the state is `(z_n, x_n, y_{n−1})`, so `y` lags one index.
/// * GRAAL: `z` and `y_bar` hold the primal and dual anchors `x̄_n`, `ȳ_n`.
/// * FISTA: `t` is the momentum sequence and `x_prev` is `x_{n−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateState {
    pub n: usize,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub y_prev: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub t: f64,
}

impl IterateState {
    /// `z₀ = x₀`, predecessor slots equal to the start.
    pub fn new(x0: Vec<f64>, y0: Vec<f64>) -> Result<Self> {
        check_finite("initial primal point", &x0)?;
        check_finite("initial dual point", &y0)?;
        Ok(Self {
            n: 0,
            z: x0.clone(),
            x_prev: x0.clone(),
            x: x0,
            y_prev: y0.clone(),
            y_bar: y0.clone(),
            y: y0,
            t: 1.0,
        })
    }

    /// `z_{n+1} = ((ψ−1)x_n + z_n)/ψ`.
    pub fn next_z(&self, psi: f64) -> Vec<f64> {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| ((psi - 1.0) * x + z) / psi)
            .collect()
    }
}
