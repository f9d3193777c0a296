use super::config::{GraalConfig, PdConfig, ProxGradConfig};
use super::{ensure_finite, IterateState};
use crate::error::{Error, Result};
use crate::problem::SaddleProblem;

fn adjoint(problem: &SaddleProblem, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; problem.q()];
    problem.k().apply_adjoint_into(y, &mut out);
    out
}

fn forward(problem: &SaddleProblem, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; problem.p()];
    problem.k().apply_into(x, &mut out);
    out
}

/// `x_n = Prox_{τg}(x_{n−1} − τKᵀy_{n−1})`, then `y_n = Prox_{σf*}(y_{n−1} + σK x̂)`
/// with `x̂ = x_n + δ(x_n − x_{n−1})`.
fn extrapolated(problem: &SaddleProblem, cfg: &PdConfig, delta: f64, state: &mut IterateState) {
    let kty = adjoint(problem, &state.y);
    state.x_prev.clone_from(&state.x);
    for (x, g) in state.x.iter_mut().zip(&kty) {
        *x -= cfg.tau * g;
    }
    problem.g().prox_in_place(cfg.tau, &mut state.x);
    let xhat: Vec<f64> = state
        .x
        .iter()
        .zip(&state.x_prev)
        .map(|(x, xp)| x + delta * (x - xp))
        .collect();
    let kx = forward(problem, &xhat);
    state.y_prev.clone_from(&state.y);
    for (y, k) in state.y.iter_mut().zip(&kx) {
        *y += cfg.sigma * k;
    }
    problem.fstar().prox_in_place(cfg.sigma, &mut state.y);
    state.z.clone_from(&state.x);
    state.n += 1;
}

pub fn arrow_hurwicz_step(problem: &SaddleProblem, cfg: &PdConfig, state: &mut IterateState) -> Result<()> {
    extrapolated(problem, cfg, 0.0, state);
    ensure_finite("arrow-hurwicz", state)
}

/// PDA with extrapolation `x̄_n = 2x_n − x_{n−1}`.
pub fn pda_step(problem: &SaddleProblem, cfg: &PdConfig, state: &mut IterateState) -> Result<()> {
    extrapolated(problem, cfg, 1.0, state);
    ensure_finite("pda", state)
}

fn least_squares_b(problem: &SaddleProblem) -> Result<&[f64]> {
    if problem.is_mirrored() || !problem.is_least_squares() {
        return Err(Error::Unsupported(
            "proximal gradient schemes need f(Kx) = ½‖Kx − b‖²".into(),
        ));
    }
    Ok(problem.b().expect("least-squares conjugate carries b"))
}

/// `Prox_{αg}(w − αKᵀ(Kw − b))`.
fn forward_backward(problem: &SaddleProblem, b: &[f64], alpha: f64, w: &[f64]) -> Vec<f64> {
    let mut r = forward(problem, w);
    r.iter_mut().zip(b).for_each(|(v, bi)| *v -= bi);
    let grad = adjoint(problem, &r);
    let mut x: Vec<f64> = w.iter().zip(&grad).map(|(a, g)| a - alpha * g).collect();
    problem.g().prox_in_place(alpha, &mut x);
    x
}

/// Proximal gradient: `x_n = Prox_{αg}(x_{n−1} − αKᵀ(Kx_{n−1} − b))`.
pub fn pgm_step(problem: &SaddleProblem, cfg: &ProxGradConfig, state: &mut IterateState) -> Result<()> {
    let b = least_squares_b(problem)?;
    let x = forward_backward(problem, b, cfg.alpha, &state.x);
    state.x_prev = std::mem::replace(&mut state.x, x);
    state.z.clone_from(&state.x);
    state.n += 1;
    ensure_finite("pgm", state)
}

/// `t_{n+1} = (1 + √(1 + 4t_n²))/2`.
pub fn fista_next_t(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// FISTA with `t₀ = 1` and `x₋₁ = x₀`.
pub fn fista_step(problem: &SaddleProblem, cfg: &ProxGradConfig, state: &mut IterateState) -> Result<()> {
    let b = least_squares_b(problem)?;
    let t_next = fista_next_t(state.t);
    let c = (state.t - 1.0) / t_next;
    let w: Vec<f64> = state
        .x
        .iter()
        .zip(&state.x_prev)
        .map(|(x, xp)| x + c * (x - xp))
        .collect();
    let x = forward_backward(problem, b, cfg.alpha, &w);
    state.x_prev = std::mem::replace(&mut state.x, x);
    state.z = w;
    state.t = t_next;
    state.n += 1;
    ensure_finite("fista", state)
}

/// GRAAL in Jacobi form with shared step `τ`:
/// both anchors move first, then both proxes use the old `(x, y)`.
pub fn graal_step(problem: &SaddleProblem, cfg: &GraalConfig, state: &mut IterateState) -> Result<()> {
    let phi = cfg.phi;
    for (a, x) in state.z.iter_mut().zip(&state.x) {
        *a = ((phi - 1.0) * x + *a) / phi;
    }
    for (a, y) in state.y_bar.iter_mut().zip(&state.y) {
        *a = ((phi - 1.0) * y + *a) / phi;
    }
    let kty = adjoint(problem, &state.y);
    let kx = forward(problem, &state.x);
    let mut x: Vec<f64> = state.z.iter().zip(&kty).map(|(a, g)| a - cfg.tau * g).collect();
    problem.g().prox_in_place(cfg.tau, &mut x);
    let mut y: Vec<f64> = state.y_bar.iter().zip(&kx).map(|(a, k)| a + cfg.tau * k).collect();
    problem.fstar().prox_in_place(cfg.tau, &mut y);
    state.x_prev = std::mem::replace(&mut state.x, x);
    state.y_prev = std::mem::replace(&mut state.y, y);
    state.n += 1;
    ensure_finite("graal", state)
}
