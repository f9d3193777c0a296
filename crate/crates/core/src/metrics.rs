//! Gap functions, convergence certificates and ergodic averages.

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::{dist_sq, LinearMap};
use crate::problem::SaddleProblem;
use crate::prox::{on_simplex, ExtValue};
use crate::rng::Stream;
use crate::solvers::{GrpdaConfig, IterateState};

const SANITY_SAMPLES: usize = 100;
const SANITY_SLACK: f64 = 1e-8;
const SANITY_SEED: u64 = 0x6a9;

/// Primal-dual gap `G(x, y) = P(x) + D(y)` anchored at a saddle point `(x̄, ȳ)`:
///
/// `P(x) = g(x) − g(x̄) + ⟨Kᵀȳ, x − x̄⟩`, `D(y) = f*(y) − f*(ȳ) − ⟨Kx̄, y − ȳ⟩`.
#[derive(Clone, Debug)]
pub struct GapEvaluator {
    problem: SaddleProblem,
    xbar: Vec<f64>,
    ybar: Vec<f64>,
    kt_ybar: Vec<f64>,
    k_xbar: Vec<f64>,
    g_bar: f64,
    fstar_bar: f64,
}

impl GapEvaluator {
    /// Builds the evaluator and checks `P ≥ 0`, `D ≥ 0` on random points near the reference.
    pub fn new(problem: &SaddleProblem, xbar: Vec<f64>, ybar: Vec<f64>) -> Result<Self> {
        check_len("reference primal point", problem.q(), xbar.len())?;
        check_len("reference dual point", problem.p(), ybar.len())?;
        check_finite("reference point", &xbar)?;
        check_finite("reference point", &ybar)?;
        let g_bar = problem
            .g()
            .value(&xbar)
            .finite()
            .ok_or_else(|| Error::Contract("reference primal point outside dom g".into()))?;
        let fstar_bar = problem
            .fstar()
            .value(&ybar)
            .finite()
            .ok_or_else(|| Error::Contract("reference dual point outside dom f*".into()))?;
        let ev = Self {
            kt_ybar: problem.k().apply_adjoint(&ybar)?,
            k_xbar: problem.k().apply(&xbar)?,
            problem: problem.clone(),
            xbar,
            ybar,
            g_bar,
            fstar_bar,
        };
        ev.sanity_check()?;
        Ok(ev)
    }

    fn sanity_check(&self) -> Result<()> {
        let mut rng = Stream::new(SANITY_SEED);
        let scale_x = 1.0 + self.xbar.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale_y = 1.0 + self.ybar.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..SANITY_SAMPLES {
            let mut x: Vec<f64> = self.xbar.iter().map(|v| v + scale_x * rng.normal()).collect();
            self.problem.g().project_domain(&mut x);
            let mut y: Vec<f64> = self.ybar.iter().map(|v| v + scale_y * rng.normal()).collect();
            self.problem.fstar().project_domain(&mut y);
            let p = self.primal_gap(&x);
            let d = self.dual_gap(&y);
            let bad = |v: ExtValue| v.finite().is_some_and(|f| f < -SANITY_SLACK);
            if bad(p) || bad(d) {
                return Err(Error::Contract(format!(
                    "reference is not a saddle point: P = {:e}, D = {:e} at a sampled point",
                    p.to_f64(),
                    d.to_f64()
                )));
            }
        }
        Ok(())
    }

    pub fn xbar(&self) -> &[f64] {
        &self.xbar
    }

    pub fn ybar(&self) -> &[f64] {
        &self.ybar
    }

    pub fn primal_gap(&self, x: &[f64]) -> ExtValue {
        match self.problem.g().value(x) {
            ExtValue::Finite(gx) => {
                let lin: f64 = self
                    .kt_ybar
                    .iter()
                    .zip(x)
                    .zip(&self.xbar)
                    .map(|((k, a), b)| k * (a - b))
                    .sum();
                ExtValue::Finite(gx - self.g_bar + lin)
            }
            ExtValue::PosInf => ExtValue::PosInf,
        }
    }

    pub fn dual_gap(&self, y: &[f64]) -> ExtValue {
        match self.problem.fstar().value(y) {
            ExtValue::Finite(fy) => {
                let lin: f64 = self
                    .k_xbar
                    .iter()
                    .zip(y)
                    .zip(&self.ybar)
                    .map(|((k, a), b)| k * (a - b))
                    .sum();
                ExtValue::Finite(fy - self.fstar_bar - lin)
            }
            ExtValue::PosInf => ExtValue::PosInf,
        }
    }

    /// `G(x, y)`; [`ExtValue::PosInf`] when a point leaves an indicator domain.
    pub fn gap(&self, x: &[f64], y: &[f64]) -> Result<ExtValue> {
        check_len("gap primal point", self.xbar.len(), x.len())?;
        check_len("gap dual point", self.ybar.len(), y.len())?;
        check_finite("gap argument", x)?;
        check_finite("gap argument", y)?;
        Ok(self.primal_gap(x) + self.dual_gap(y))
    }
}

/// `max_i (Kx)_i − min_j (Kᵀy)_j` for `x ∈ Δq`, `y ∈ Δp`.
pub fn matrix_game_gap(k: &LinearMap, x: &[f64], y: &[f64]) -> Result<f64> {
    if !on_simplex(x, 1e-9) || !on_simplex(y, 1e-9) {
        return Err(Error::Contract(
            "matrix game gap needs points on the unit simplices".into(),
        ));
    }
    let kx = k.matvec(x)?;
    let kty = k.adjoint_matvec(y)?;
    let hi = kx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = kty.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi - lo)
}

/// The quantities `a_n`, `b_n` of the fixed-step analysis, with
/// `2τG(x_n, y_n) + a_{n+1} ≤ a_n − b_n`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ConvergenceCertificate {
    /// `ψ/(ψ−1)‖z_{n+1} − x̄‖² + ‖y_{n−1} − ȳ‖²/β`.
    pub a_n: f64,
    /// `ψ‖z_{n+1} − x_n‖² + (1−ζ)(ψ‖x_{n+1} − x_n‖² + ‖y_n − y_{n−1}‖²/β)`.
    pub b_n: f64,
    pub tau: f64,
    pub beta: f64,
    pub psi: f64,
    pub zeta: f64,
}

/// `a_n` alone; cheap enough for every trace row.
pub fn certificate_a(evaluator: &GapEvaluator, config: &GrpdaConfig, state: &IterateState) -> f64 {
    let psi = config.psi;
    let z_next = state.next_z(psi);
    psi / (psi - 1.0) * dist_sq(&z_next, &evaluator.xbar) + dist_sq(&state.y_prev, &evaluator.ybar) / config.beta
}

/// `a_n` and `b_n` for a fixed-step GRPDA state after iteration `n`; `b_n` uses a lookahead prox for `x_{n+1}`.
pub fn certificate(
    evaluator: &GapEvaluator,
    problem: &SaddleProblem,
    config: &GrpdaConfig,
    state: &IterateState,
) -> Result<ConvergenceCertificate> {
    check_len("certificate primal point", evaluator.xbar.len(), state.x.len())?;
    check_len("certificate dual point", evaluator.ybar.len(), state.y.len())?;
    let psi = config.psi;
    let z_next = state.next_z(psi);
    let kty = problem.k().apply_adjoint(&state.y)?;
    let arg: Vec<f64> = z_next.iter().zip(&kty).map(|(z, g)| z - config.tau * g).collect();
    let x_next = problem.g().prox(config.tau, &arg)?;
    let b_n = psi * dist_sq(&z_next, &state.x)
        + (1.0 - config.zeta) * (psi * dist_sq(&x_next, &state.x) + dist_sq(&state.y, &state.y_prev) / config.beta);
    Ok(ConvergenceCertificate {
        a_n: certificate_a(evaluator, config, state),
        b_n,
        tau: config.tau,
        beta: config.beta,
        psi,
        zeta: config.zeta,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgodicMode {
    Uniform,
    /// Weights `β_nτ_n`.
    Weighted,
}

/// Running (weighted) averages `X_N`, `Y_N`.
#[derive(Clone, Debug)]
pub struct ErgodicAccumulator {
    mode: ErgodicMode,
    sum_x: Vec<f64>,
    sum_y: Vec<f64>,
    weight_sum: f64,
    count: usize,
}

impl ErgodicAccumulator {
    pub fn new(mode: ErgodicMode, q: usize, p: usize) -> Self {
        Self {
            mode,
            sum_x: vec![0.0; q],
            sum_y: vec![0.0; p],
            weight_sum: 0.0,
            count: 0,
        }
    }

    pub fn push(&mut self, x: &[f64], y: &[f64], weight: Option<f64>) -> Result<()> {
        check_len("ergodic primal", self.sum_x.len(), x.len())?;
        check_len("ergodic dual", self.sum_y.len(), y.len())?;
        let w = match (self.mode, weight) {
            (ErgodicMode::Uniform, None) => 1.0,
            (ErgodicMode::Weighted, Some(w)) if w > 0.0 && w.is_finite() => w,
            (ErgodicMode::Uniform, Some(_)) => return Err(Error::Contract("uniform averages take no weight".into())),
            (ErgodicMode::Weighted, _) => {
                return Err(Error::Contract("weighted averages need a positive weight".into()))
            }
        };
        for (s, v) in self.sum_x.iter_mut().zip(x) {
            *s += w * v;
        }
        for (s, v) in self.sum_y.iter_mut().zip(y) {
            *s += w * v;
        }
        self.weight_sum += w;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `S_N` (equals `N` in uniform mode).
    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    /// `(X_N, Y_N)`; `None` before the first push.
    pub fn read(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.count == 0 {
            return None;
        }
        let s = self.weight_sum;
        Some((
            self.sum_x.iter().map(|v| v / s).collect(),
            self.sum_y.iter().map(|v| v / s).collect(),
        ))
    }
}
