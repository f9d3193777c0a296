use std::sync::Arc;

use grpda_core::fixedpoint::{build_map, certify_firm_nonexpansive, CertifyMode, SPECTRAL_THRESHOLD};
use grpda_core::linalg::LinearMap;
use grpda_core::rng::Stream;
use grpda_core::{ProxOracle, SaddleProblem};

use crate::certify::DualKind;
use crate::error::{BenchError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub trials: usize,
    pub max_rows: usize,
    pub max_cols: usize,
    /// `ψ` drawn uniformly from `(psi_min, psi_max]`.
    pub psi_min: f64,
    pub psi_max: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SearchFinding {
    pub trial: usize,
    pub p: usize,
    pub q: usize,
    pub dual: DualKind,
    pub psi: f64,
    pub sigma: f64,
    pub tau: f64,
    pub max_modulus: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SearchReport {
    pub trials: usize,
    pub threshold: f64,
    /// Tuples whose reflected map has spectral radius above the threshold.
    pub findings: Vec<SearchFinding>,
    pub largest: Option<SearchFinding>,
}

/// Random `(K, σ, ψ)` with `τ = 0.99ψ/(σL²)`, `g = 0` and alternating dual
/// kinds, recording where
/// `max |λ(2T − I)|` exceeds `1 + 1e-8`.
pub fn search(opts: &SearchOptions) -> Result<SearchReport> {
    if !(opts.psi_min >= 1.0 && opts.psi_max > opts.psi_min) {
        return Err(BenchError::Invalid(format!(
            "ψ range ({}, {}] must be nonempty and above 1",
            opts.psi_min, opts.psi_max
        )));
    }
    if opts.max_rows == 0 || opts.max_cols == 0 {
        return Err(BenchError::Invalid("matrix dimensions must be positive".into()));
    }
    let mut rng = Stream::new(opts.seed);
    let mut findings = Vec::new();
    let mut largest: Option<SearchFinding> = None;
    for trial in 0..opts.trials {
        let p = 1 + rng.index(opts.max_rows);
        let q = 1 + rng.index(opts.max_cols);
        let k = Arc::new(LinearMap::dense(p, q, rng.normal_vec(p * q))?);
        let b = rng.normal_vec(p);
        let dual = if trial % 2 == 0 {
            DualKind::LeastSquares
        } else {
            DualKind::Equality
        };
        let fstar = match dual {
            DualKind::LeastSquares => ProxOracle::LeastSquaresConjugate { b },
            DualKind::Equality => ProxOracle::EqualityConjugate { b },
        };
        let problem = SaddleProblem::new(k, ProxOracle::Zero, fstar)?;
        let l = problem.norm_bound();
        let sigma = 10f64.powf(rng.uniform_in(-1.0, 1.0));
        let psi = opts.psi_max - rng.uniform() * (opts.psi_max - opts.psi_min);
        let tau = 0.99 * psi / (sigma * l * l);
        let map = build_map(&problem, tau, sigma, psi)?;
        let report = certify_firm_nonexpansive(&map, CertifyMode::Spectral, 0, 0)?;
        let m = report.max_modulus.expect("spectral mode");
        let f = SearchFinding {
            trial,
            p,
            q,
            dual,
            psi,
            sigma,
            tau,
            max_modulus: m,
        };
        if largest.as_ref().map_or(true, |l| m > l.max_modulus) {
            largest = Some(f.clone());
        }
        if m > SPECTRAL_THRESHOLD {
            findings.push(f);
        }
    }
    Ok(SearchReport {
        trials: opts.trials,
        threshold: SPECTRAL_THRESHOLD,
        findings,
        largest,
    })
}
