use grpda_core::problems::{default_config, default_scheme, scheme_problem, InstanceCache, InstanceSpec};
use grpda_core::solvers::{reference_run, ReferenceOptions, Scheme, Solver};
use grpda_core::SaddleProblem;

use crate::error::{BenchError, Result};
use crate::experiment::instance;
use crate::plan::Overrides;

pub const SWEEP_HEADER: &str = "psi,median_iterations,reached,seeds";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub instance: InstanceSpec,
    /// `grpda` or `rgrpda`.
    pub scheme: String,
    pub psis: Vec<f64>,
    /// Instance seeds; each replaces `instance.seed`.
    pub seeds: Vec<u64>,
    pub budget: usize,
    pub threshold: f64,
    pub overrides: Overrides,
    pub reference: ReferenceOptions,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub psi: f64,
    /// Median of iterations to tolerance over seeds; `None` when the median
    /// run did not reach the tolerance within the budget.
    pub median: Option<f64>,
    pub per_seed: Vec<Option<usize>>,
}

impl SweepRow {
    pub fn reached(&self) -> usize {
        self.per_seed.iter().filter(|v| v.is_some()).count()
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{}",
            self.psi,
            self.median.map(|m| m.to_string()).unwrap_or_default(),
            self.reached(),
            self.per_seed.len()
        )
    }
}

/// First `n ≤ budget` with `F(x_n) − F* ≤ threshold`.
pub fn iterations_to_tolerance(
    problem: &SaddleProblem,
    scheme: &Scheme,
    f_star: f64,
    threshold: f64,
    budget: usize,
) -> Result<Option<usize>> {
    let (x0, y0) = problem.default_start();
    let mut solver = Solver::new(problem, scheme.clone(), x0, y0)?;
    for n in 1..=budget {
        solver.step()?;
        let (x, _) = solver.canonical_point();
        if problem.objective(x)?.to_f64() - f_star <= threshold {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn median(values: &[Option<usize>]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x.map_or(f64::INFINITY, |n| n as f64)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let m = v.len();
    let mid = if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    };
    mid.is_finite().then_some(mid)
}

pub fn sweep_psi(opts: &SweepOptions, cache: Option<&InstanceCache>) -> Result<Vec<SweepRow>> {
    if opts.psis.is_empty() || opts.seeds.is_empty() {
        return Err(BenchError::Invalid("need at least one ψ and one seed".into()));
    }
    if opts.budget == 0 {
        return Err(BenchError::Invalid("iteration budget must be at least 1".into()));
    }
    if !matches!(opts.scheme.as_str(), "grpda" | "rgrpda") {
        return Err(BenchError::Invalid(format!(
            "ψ sweeps run grpda or rgrpda, not `{}`",
            opts.scheme
        )));
    }
    let mut instances = Vec::new();
    for &seed in &opts.seeds {
        let spec = InstanceSpec {
            seed,
            ..opts.instance.clone()
        };
        let inst = instance(&spec, cache)?;
        let problem = scheme_problem(&opts.scheme, &inst.problem);
        let defaults = opts.overrides.apply(default_config(&spec));
        let mut schemes = Vec::new();
        for &psi in &opts.psis {
            let d = grpda_core::problems::FamilyDefaults {
                psi,
                ..defaults.clone()
            };
            let s = default_scheme(&opts.scheme, &problem, &d)
                .map_err(|e| BenchError::Invalid(format!("ψ = {psi}: {e}")))?;
            schemes.push(s);
        }
        let f_star = match cache {
            Some(c) => c.reference(&spec, &inst, &opts.reference)?,
            None => reference_run(&inst.problem, &opts.reference)?,
        }
        .objective;
        instances.push((problem, schemes, f_star));
    }
    let mut rows = Vec::new();
    for (i, &psi) in opts.psis.iter().enumerate() {
        let mut per_seed = Vec::new();
        for (problem, schemes, f_star) in &instances {
            per_seed.push(iterations_to_tolerance(
                problem,
                &schemes[i],
                *f_star,
                opts.threshold,
                opts.budget,
            )?);
        }
        rows.push(SweepRow {
            psi,
            median: median(&per_seed),
            per_seed,
        });
    }
    Ok(rows)
}
