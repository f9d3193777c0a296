//! The saddle-point problem `min_x max_y g(x) + ⟨Kx, y⟩ − f*(y)`.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::linalg::{LinearMap, Operator};
use crate::prox::{ExtValue, ProxOracle};

/// `min f(Kx) + g(x)` in its primal-dual form, given by `K`, `g` and `f*`.
///
/// [`SaddleProblem::mirror`] exchanges the roles of primal and dual
/// (`g' = f*`, `K' = −Kᵀ`, `f'* = g`). Objective values always refer to
/// the unmirrored problem.
#[derive(Clone, Debug)]
pub struct SaddleProblem {
    k: Operator,
    g: ProxOracle,
    fstar: ProxOracle,
}

impl SaddleProblem {
    pub fn new(k: Arc<LinearMap>, g: ProxOracle, fstar: ProxOracle) -> Result<Self> {
        Self::from_operator(Operator::new(k), g, fstar)
    }

    pub fn from_operator(k: Operator, g: ProxOracle, fstar: ProxOracle) -> Result<Self> {
        g.validate()?;
        fstar.validate()?;
        if let Some(d) = g.dim() {
            check_len("g dimension", k.cols(), d)?;
        }
        if let Some(d) = fstar.dim() {
            check_len("f* dimension", k.rows(), d)?;
        }
        if matches!(g, ProxOracle::Simplex) && k.cols() == 0 || matches!(fstar, ProxOracle::Simplex) && k.rows() == 0 {
            return Err(Error::Contract("simplex over an empty index set".into()));
        }
        Ok(Self { k, g, fstar })
    }

    /// `½‖Kx − b‖² + μ‖x‖₁`.
    pub fn lasso(k: Arc<LinearMap>, b: Vec<f64>, mu: f64) -> Result<Self> {
        Self::new(k, ProxOracle::l1(mu)?, ProxOracle::LeastSquaresConjugate { b })
    }

    /// `½‖Kx − b‖²` over `x ≥ 0`.
    pub fn nnls(k: Arc<LinearMap>, b: Vec<f64>) -> Result<Self> {
        Self::new(k, ProxOracle::NonNeg, ProxOracle::LeastSquaresConjugate { b })
    }

    /// `min_{x∈Δq} max_{y∈Δp} ⟨Kx, y⟩`.
    pub fn matrix_game(k: Arc<LinearMap>) -> Result<Self> {
        Self::new(k, ProxOracle::Simplex, ProxOracle::Simplex)
    }

    /// `min g(x)` subject to `Kx = b`.
    pub fn equality_constrained(k: Arc<LinearMap>, b: Vec<f64>, g: ProxOracle) -> Result<Self> {
        Self::new(k, g, ProxOracle::EqualityConjugate { b })
    }

    pub fn k(&self) -> &Operator {
        &self.k
    }

    pub fn g(&self) -> &ProxOracle {
        &self.g
    }

    pub fn fstar(&self) -> &ProxOracle {
        &self.fstar
    }

    /// Dual dimension.
    pub fn p(&self) -> usize {
        self.k.rows()
    }

    /// Primal dimension.
    pub fn q(&self) -> usize {
        self.k.cols()
    }

    pub fn norm_bound(&self) -> f64 {
        self.k.norm_bound()
    }

    pub fn is_mirrored(&self) -> bool {
        self.k.is_mirrored()
    }

    /// `f` is `½‖·−b‖²` or the indicator of `{b}`, so `Prox_{σf*}` is affine.
    pub fn is_affine_dual(&self) -> bool {
        self.fstar.is_affine_conjugate()
    }

    /// `f` is the least-squares term `½‖·−b‖²`.
    pub fn is_least_squares(&self) -> bool {
        matches!(self.fstar, ProxOracle::LeastSquaresConjugate { .. })
    }

    pub fn b(&self) -> Option<&[f64]> {
        self.fstar.b()
    }

    /// Strong convexity modulus of `g`.
    pub fn gamma(&self) -> f64 {
        self.g.strong_convexity()
    }

    pub fn mirror(&self) -> Self {
        Self {
            k: self.k.mirrored(),
            g: self.fstar.clone(),
            fstar: self.g.clone(),
        }
    }

    /// The unmirrored orientation.
    pub fn canonical(&self) -> Self {
        if self.is_mirrored() {
            self.mirror()
        } else {
            self.clone()
        }
    }

    /// `F(x) = f(Kx) + g(x)` of the unmirrored problem.
    pub fn objective(&self, x: &[f64]) -> Result<ExtValue> {
        let c = self.canonical();
        let kx = c.k.apply(x)?;
        Ok(c.fstar.conjugate_value(&kx) + c.g.value(x))
    }

    /// Default starting point of the unmirrored problem: `(0, −b)` when `b`
    /// exists, barycenters of simplices, zeros otherwise.
    pub fn default_start(&self) -> (Vec<f64>, Vec<f64>) {
        let c = self.canonical();
        let start = |o: &ProxOracle, n: usize, b: Option<&[f64]>| -> Vec<f64> {
            match (o, b) {
                (ProxOracle::Simplex, _) => vec![1.0 / n as f64; n],
                (_, Some(b)) => b.iter().map(|v| -v).collect(),
                _ => vec![0.0; n],
            }
        };
        let x0 = start(&c.g, c.q(), None);
        let y0 = start(&c.fstar, c.p(), c.fstar.b());
        if self.is_mirrored() {
            (y0, x0)
        } else {
            (x0, y0)
        }
    }
}
