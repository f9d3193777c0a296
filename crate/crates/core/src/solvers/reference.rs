use super::config::{GrpdaConfig, RelaxConfig, RhoSchedule, DEFAULT_ZETA};
use super::run::{Scheme, Solver};
use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot};
use crate::problem::SaddleProblem;
use crate::GOLDEN_RATIO;

/// A numerically converged saddle point `(x̄, ȳ)` with `F* = F(x̄)`, in the
/// orientation of the unmirrored problem.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Reference {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// `false` when the iteration cap was hit before the stopping rule.
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReferenceOptions {
    pub max_iter: usize,
    /// Stop once `‖ξ_n − ξ_{n−1}‖ ≤ tol·(1 + ‖ξ_n‖)` holds `patience` times in a row.
    pub tol: f64,
    pub patience: usize,
    pub beta: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            max_iter: 1_000_000,
            tol: 1e-13,
            patience: 50,
            beta: 1.0,
        }
    }
}

/// Long run of the fastest applicable GRPDA variant: the relaxed scheme with
/// `ψ = 2`, `ρ ≡ 1.49` when `f` is least-squares or an equality constraint,
/// fixed-step GRPDA with `ψ = φ` otherwise.
pub fn reference_run(problem: &SaddleProblem, options: &ReferenceOptions) -> Result<Reference> {
    let problem = problem.canonical();
    let scheme = if problem.is_affine_dual() {
        Scheme::Rgrpda(RelaxConfig::from_beta(
            &problem,
            2.0,
            options.beta,
            DEFAULT_ZETA,
            RhoSchedule::Constant(1.49),
        )?)
    } else {
        Scheme::Grpda(GrpdaConfig::from_beta(
            &problem,
            GOLDEN_RATIO,
            options.beta,
            DEFAULT_ZETA,
        )?)
    };
    let (x0, y0) = problem.default_start();
    let mut solver = Solver::new(&problem, scheme, x0, y0)?;
    let mut calm = 0;
    let mut converged = false;
    let mut z_old = solver.state().z.clone();
    for _ in 0..options.max_iter {
        solver.step()?;
        let s = solver.state();
        let step = dist_sq(&s.x, &s.x_prev) + dist_sq(&s.y, &s.y_prev) + dist_sq(&s.z, &z_old);
        let size = dot(&s.x, &s.x) + dot(&s.y, &s.y) + dot(&s.z, &s.z);
        if step.sqrt() <= options.tol * (1.0 + size.sqrt()) {
            calm += 1;
            if calm >= options.patience {
                converged = true;
                break;
            }
        } else {
            calm = 0;
        }
        z_old.clone_from(&s.z);
    }
    let s = solver.state();
    let objective = problem.objective(&s.x)?;
    let objective = objective
        .finite()
        .ok_or_else(|| Error::Contract("reference run ended outside the domain of the objective".into()))?;
    Ok(Reference {
        x: s.x.clone(),
        y: s.y.clone(),
        objective,
        iterations: s.n,
        converged,
    })
}
