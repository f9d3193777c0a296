use std::io::Write;
use std::path::Path;
use std::time::Instant;

use super::baselines::{arrow_hurwicz_step, fista_step, graal_step, pda_step, pgm_step};
use super::config::{AccelConfig, AccelState, GraalConfig, GrpdaConfig, PdConfig, ProxGradConfig, RelaxConfig};
use super::grpda::{agrpda_step, grpda_step, rgrpda_step};
use super::reference::Reference;
use super::IterateState;
use crate::error::{check_len, Error, Result};
use crate::metrics::{certificate_a, GapEvaluator};
use crate::problem::SaddleProblem;

pub const CSV_HEADER: &str = "iter,objective,objective_error,gap,a_n,beta_n,tau_n,wall_ns";

pub const SCHEME_NAMES: [&str; 8] = [
    "grpda",
    "agrpda",
    "rgrpda",
    "arrow-hurwicz",
    "pda",
    "pgm",
    "fista",
    "graal",
];

/// A scheme together with its parameters.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum Scheme {
    Grpda(GrpdaConfig),
    Agrpda(AccelConfig),
    Rgrpda(RelaxConfig),
    ArrowHurwicz(PdConfig),
    Pda(PdConfig),
    Pgm(ProxGradConfig),
    Fista(ProxGradConfig),
    Graal(GraalConfig),
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Grpda(_) => "grpda",
            Scheme::Agrpda(_) => "agrpda",
            Scheme::Rgrpda(_) => "rgrpda",
            Scheme::ArrowHurwicz(_) => "arrow-hurwicz",
            Scheme::Pda(_) => "pda",
            Scheme::Pgm(_) => "pgm",
            Scheme::Fista(_) => "fista",
            Scheme::Graal(_) => "graal",
        }
    }

    /// Whether the scheme carries a dual iterate.
    pub fn has_dual(&self) -> bool {
        !matches!(self, Scheme::Pgm(_) | Scheme::Fista(_))
    }

    pub fn validate(&self, problem: &SaddleProblem) -> Result<()> {
        match self {
            Scheme::Grpda(c) => c.validate(problem),
            Scheme::Agrpda(c) => AccelState::new(problem, c).map(|_| ()),
            Scheme::Rgrpda(c) => c.validate(problem),
            Scheme::ArrowHurwicz(c) => c.validate_positive(),
            Scheme::Pda(c) => c.validate_pda(problem),
            Scheme::Pgm(c) | Scheme::Fista(c) => c.validate(problem),
            Scheme::Graal(c) => c.validate(),
        }
    }
}

/// A validated scheme bound to a problem and its iterates.
#[derive(Clone, Debug)]
pub struct Solver<'a> {
    problem: &'a SaddleProblem,
    scheme: Scheme,
    accel: Option<AccelState>,
    state: IterateState,
}

impl<'a> Solver<'a> {
    /// `y0` is `y_{−1}` for the relaxed scheme.
    pub fn new(problem: &'a SaddleProblem, scheme: Scheme, x0: Vec<f64>, y0: Vec<f64>) -> Result<Self> {
        check_len("initial primal point", problem.q(), x0.len())?;
        check_len("initial dual point", problem.p(), y0.len())?;
        scheme.validate(problem)?;
        let accel = match &scheme {
            Scheme::Agrpda(c) => Some(AccelState::new(problem, c)?),
            _ => None,
        };
        Ok(Self {
            problem,
            scheme,
            accel,
            state: IterateState::new(x0, y0)?,
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let p = self.problem;
        let s = &mut self.state;
        match &self.scheme {
            Scheme::Grpda(c) => grpda_step(p, c, s),
            Scheme::Agrpda(_) => agrpda_step(p, self.accel.as_mut().expect("set in new"), s),
            Scheme::Rgrpda(c) => rgrpda_step(p, c, s),
            Scheme::ArrowHurwicz(c) => arrow_hurwicz_step(p, c, s),
            Scheme::Pda(c) => pda_step(p, c, s),
            Scheme::Pgm(c) => pgm_step(p, c, s),
            Scheme::Fista(c) => fista_step(p, c, s),
            Scheme::Graal(c) => graal_step(p, c, s),
        }
    }

    pub fn state(&self) -> &IterateState {
        &self.state
    }

    pub fn accel(&self) -> Option<&AccelState> {
        self.accel.as_ref()
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    /// The iterate in the orientation of the unmirrored problem.
    pub fn canonical_point(&self) -> (&[f64], &[f64]) {
        if self.problem.is_mirrored() {
            (&self.state.y, &self.state.x)
        } else {
            (&self.state.x, &self.state.y)
        }
    }

    /// Current `(β, τ)` as reported in traces.
    pub fn parameters(&self) -> (Option<f64>, Option<f64>) {
        match &self.scheme {
            Scheme::Grpda(c) => (Some(c.beta), Some(c.tau)),
            Scheme::Agrpda(_) => {
                let a = self.accel.as_ref().expect("set in new");
                (Some(a.beta), Some(a.tau))
            }
            Scheme::Rgrpda(c) => (Some(c.beta), Some(c.tau)),
            Scheme::ArrowHurwicz(c) | Scheme::Pda(c) => (Some(c.sigma / c.tau), Some(c.tau)),
            Scheme::Pgm(c) | Scheme::Fista(c) => (None, Some(c.alpha)),
            Scheme::Graal(c) => (Some(1.0), Some(c.tau)),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub budget: usize,
    /// Rows are kept for `n` with `(n − 1) % stride == 0`, plus the final iteration.
    pub stride: usize,
    /// Record elapsed nanoseconds; off by default so traces are reproducible.
    pub wall_time: bool,
    /// Saddle point and optimal value of the unmirrored problem.
    pub reference: Option<Reference>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    /// `F(x_n) − F*` clipped below at `1e-16`.
    pub objective_error: Option<f64>,
    /// Unclipped `F(x_n) − F*`.
    pub objective_error_raw: Option<f64>,
    pub gap: Option<f64>,
    pub a_n: Option<f64>,
    pub beta_n: Option<f64>,
    pub tau_n: Option<f64>,
    pub wall_ns: u64,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub scheme: String,
    pub rows: Vec<TraceRow>,
    pub final_state: IterateState,
    pub iterations: usize,
}

/// A failed run with everything recorded before the failure.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: Error,
    pub trace: Option<RunTrace>,
}

impl From<Error> for RunFailure {
    fn from(error: Error) -> Self {
        Self { error, trace: None }
    }
}

/// Runs `budget` iterations, recording strided rows.
pub fn run(
    problem: &SaddleProblem,
    scheme: &Scheme,
    x0: Vec<f64>,
    y0: Vec<f64>,
    options: &RunOptions,
) -> std::result::Result<RunTrace, RunFailure> {
    if options.budget == 0 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()).into());
    }
    let stride = options.stride.max(1);
    let mut solver = Solver::new(problem, scheme.clone(), x0, y0)?;
    let evaluator = match (&options.reference, scheme.has_dual()) {
        (Some(r), true) => {
            let (xb, yb) = if problem.is_mirrored() {
                (r.y.clone(), r.x.clone())
            } else {
                (r.x.clone(), r.y.clone())
            };
            Some(GapEvaluator::new(problem, xb, yb)?)
        }
        _ => None,
    };
    let f_star = options.reference.as_ref().map(|r| r.objective);
    let start = Instant::now();
    let mut rows = Vec::new();
    for n in 1..=options.budget {
        if let Err(error) = solver.step() {
            let trace = RunTrace {
                scheme: scheme.name().to_string(),
                rows,
                final_state: solver.state().clone(),
                iterations: n - 1,
            };
            return Err(RunFailure {
                error,
                trace: Some(trace),
            });
        }
        if (n - 1) % stride != 0 && n != options.budget {
            continue;
        }
        let (x, _) = solver.canonical_point();
        let objective = problem.objective(x)?.to_f64();
        let raw = f_star.map(|f| objective - f);
        let gap = match &evaluator {
            Some(ev) => Some(ev.gap(&solver.state().x, &solver.state().y)?.to_f64()),
            None => None,
        };
        let a_n = match (&evaluator, scheme) {
            (Some(ev), Scheme::Grpda(c)) => Some(certificate_a(ev, c, solver.state())),
            _ => None,
        };
        let (beta_n, tau_n) = solver.parameters();
        rows.push(TraceRow {
            iter: n,
            objective,
            objective_error: raw.map(|e| e.max(1e-16)),
            objective_error_raw: raw,
            gap,
            a_n,
            beta_n,
            tau_n,
            wall_ns: if options.wall_time {
                start.elapsed().as_nanos() as u64
            } else {
                0
            },
        });
    }
    Ok(RunTrace {
        scheme: scheme.name().to_string(),
        rows,
        final_state: solver.state().clone(),
        iterations: options.budget,
    })
}

fn field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Writes the trace as CSV with the fixed header; empty fields mean "not available".
pub fn write_csv<W: Write>(trace: &RunTrace, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{},{:e},{},{},{},{},{},{}",
            r.iter,
            r.objective,
            field(r.objective_error),
            field(r.gap),
            field(r.a_n),
            field(r.beta_n),
            field(r.tau_n),
            r.wall_ns
        )?;
    }
    Ok(())
}

impl RunTrace {
    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        write_csv(self, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Writes the CSV to `path` through a temporary file and a rename.
    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("csv.tmp");
        {
            let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            write_csv(self, &mut f)?;
            f.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}
