use super::config::{AccelState, GrpdaConfig, RelaxConfig};
use super::{ensure_finite, IterateState};
use crate::error::{check_len, Result};
use crate::problem::SaddleProblem;

fn check_dims(problem: &SaddleProblem, state: &IterateState) -> Result<()> {
    check_len("primal iterate", problem.q(), state.x.len())?;
    check_len("primal anchor", problem.q(), state.z.len())?;
    check_len("dual iterate", problem.p(), state.y.len())
}

/// `z ← ((ψ−1)x + z)/ψ`, then `x ← Prox_{τg}(z − τKᵀy)`.
fn primal_half(problem: &SaddleProblem, psi: f64, tau: f64, state: &mut IterateState) {
    for (z, x) in state.z.iter_mut().zip(&state.x) {
        *z = ((psi - 1.0) * x + *z) / psi;
    }
    let mut kty = vec![0.0; problem.q()];
    problem.k().apply_adjoint_into(&state.y, &mut kty);
    std::mem::swap(&mut state.x_prev, &mut state.x);
    state.x.clear();
    state.x.extend(state.z.iter().zip(&kty).map(|(z, g)| z - tau * g));
    problem.g().prox_in_place(tau, &mut state.x);
}

/// `y ← Prox_{σf*}(y + σKx)`.
fn dual_half(problem: &SaddleProblem, sigma: f64, state: &mut IterateState) {
    let mut kx = vec![0.0; problem.p()];
    problem.k().apply_into(&state.x, &mut kx);
    state.y_prev.clone_from(&state.y);
    for (y, k) in state.y.iter_mut().zip(&kx) {
        *y += sigma * k;
    }
    problem.fstar().prox_in_place(sigma, &mut state.y);
}

/// One fixed-step GRPDA iteration (Gauss–Seidel: the dual update uses the new `x_n`).
pub fn grpda_step(problem: &SaddleProblem, config: &GrpdaConfig, state: &mut IterateState) -> Result<()> {
    check_dims(problem, state)?;
    primal_half(problem, config.psi, config.tau, state);
    dual_half(problem, config.sigma, state);
    state.n += 1;
    ensure_finite("grpda", state)
}

/// One accelerated GRPDA iteration; the primal step uses `τ_{n−1}`, the dual step `β_nτ_n`.
pub fn agrpda_step(problem: &SaddleProblem, accel: &mut AccelState, state: &mut IterateState) -> Result<()> {
    check_dims(problem, state)?;
    primal_half(problem, accel.psi, accel.tau, state);
    let s = accel.advance();
    dual_half(problem, s, state);
    state.n += 1;
    ensure_finite("agrpda", state)
}

/// One relaxed GRPDA iteration on the state `(z_{n−1}, x_{n−1}, y_{n−2})`.
pub fn rgrpda_step(problem: &SaddleProblem, config: &RelaxConfig, state: &mut IterateState) -> Result<()> {
    check_dims(problem, state)?;
    let b = problem.b().expect("relaxed GRPDA is validated for affine duals");
    let c = &config.coefficients;
    let rho = config.rho.at(state.n + 1);
    let psi = config.psi;

    let mut kx = vec![0.0; problem.p()];
    problem.k().apply_into(&state.x, &mut kx);
    let y_t: Vec<f64> = state
        .y
        .iter()
        .zip(&kx)
        .zip(b)
        .map(|((y, k), bi)| c.eta * (y + config.sigma * k) + c.varrho * bi)
        .collect();
    let z_t: Vec<f64> = state
        .x
        .iter()
        .zip(&state.z)
        .map(|(x, z)| ((psi - 1.0) * x + z) / psi)
        .collect();
    let mut kty = vec![0.0; problem.q()];
    problem.k().apply_adjoint_into(&y_t, &mut kty);
    let mut x_t: Vec<f64> = z_t.iter().zip(&kty).map(|(z, g)| z - config.tau * g).collect();
    problem.g().prox_in_place(config.tau, &mut x_t);

    state.x_prev.clone_from(&state.x);
    state.y_prev.clone_from(&state.y);
    for (v, t) in state.y.iter_mut().zip(&y_t) {
        *v += rho * (t - *v);
    }
    for (v, t) in state.z.iter_mut().zip(&z_t) {
        *v += rho * (t - *v);
    }
    for (v, t) in state.x.iter_mut().zip(&x_t) {
        *v += rho * (t - *v);
    }
    state.n += 1;
    ensure_finite("rgrpda", state)
}
