use std::sync::Arc;

use grpda_core::fixedpoint::{build_map, certify_firm_nonexpansive, CertifyMode, FirmReport, SPECTRAL_THRESHOLD};
use grpda_core::problems::{generate, Family, InstanceSpec};
use grpda_core::{Error as CoreError, SaddleProblem};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualKind {
    /// `f = ½‖· − b‖²`.
    LeastSquares,
    /// `f` is the indicator of `{b}`.
    Equality,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOptions {
    pub instance: InstanceSpec,
    pub dual: DualKind,
    pub psi: f64,
    pub sigma: f64,
    /// Primal step; derived from `product` when absent.
    pub tau: Option<f64>,
    /// `τσL²`; defaults to `0.99ψ`.
    pub product: Option<f64>,
    pub mode: CertifyMode,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CertifyReport {
    pub order: usize,
    pub dual: DualKind,
    pub psi: f64,
    pub tau: f64,
    pub sigma: f64,
    pub eta: f64,
    pub varrho: f64,
    pub norm_bound: f64,
    pub product: f64,
    pub threshold: f64,
    pub passed: bool,
    pub report: FirmReport,
}

pub fn certify(opts: &CertifyOptions) -> Result<CertifyReport> {
    if opts.instance.family == Family::MatrixGame {
        return Err(BenchError::Invalid(
            "certification needs a least-squares or equality-constrained instance (lasso or nnls)".into(),
        ));
    }
    let inst = generate(&opts.instance)?;
    let problem = match opts.dual {
        DualKind::LeastSquares => inst.problem.clone(),
        DualKind::Equality => SaddleProblem::equality_constrained(
            Arc::clone(&inst.k),
            inst.b().expect("lasso and nnls carry b").to_vec(),
            inst.problem.g().clone(),
        )?,
    };
    let l = problem.norm_bound();
    let tau = match (opts.tau, opts.product) {
        (Some(_), Some(_)) => return Err(BenchError::Invalid("give either τ or τσL², not both".into())),
        (Some(t), None) => t,
        (None, p) => p.unwrap_or(0.99 * opts.psi) / (opts.sigma * l * l),
    };
    let map = build_map(&problem, tau, opts.sigma, opts.psi)?;
    let report = certify_firm_nonexpansive(&map, opts.mode, opts.samples, opts.seed).map_err(|e| match e {
        CoreError::CapExceeded { order, cap } => BenchError::Invalid(format!(
            "map of order {order} exceeds the dense cap {cap}; rerun with --mode sampling"
        )),
        other => other.into(),
    })?;
    Ok(CertifyReport {
        order: map.order(),
        dual: opts.dual,
        psi: opts.psi,
        tau,
        sigma: opts.sigma,
        eta: map.eta,
        varrho: map.varrho,
        norm_bound: l,
        product: tau * opts.sigma * l * l,
        threshold: SPECTRAL_THRESHOLD,
        passed: report.passed,
        report,
    })
}
