use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use grpda_bench::{
    certify, execute, replay, search, sweep_psi, BenchError, CellPlan, CertifyOptions, DualKind, Overrides, Plan,
    SearchOptions, SweepOptions, SWEEP_HEADER,
};
use grpda_core::fixedpoint::{CertifyMode, DEFAULT_SAMPLES};
use grpda_core::problems::{Family, GeneratorCase, InstanceCache, InstanceSpec, CACHE_ENV, DEFAULT_LASSO_MU};
use grpda_core::solvers::ReferenceOptions;

#[derive(Parser)]
#[command(name = "grpda-bench", version, about = "Golden ratio primal-dual experiments")]
struct Cli {
    /// Instance and reference cache; caching is off unless this or the
    /// environment variable is set.
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run schemes on one instance and write CSV traces plus a manifest.
    Run(RunArgs),
    /// Re-run every cell of a manifest.
    Replay(ReplayArgs),
    /// Spectral or sampled check of the fixed-point map.
    Certify(CertifyArgs),
    /// Iterations to tolerance for a list of ψ values.
    SweepPsi(SweepArgs),
    /// Random search for spectral violations at ψ beyond 2.
    Search(SearchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Lasso,
    Nnls,
    #[value(alias = "game")]
    MatrixGame,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    #[value(alias = "i")]
    Normal,
    #[value(alias = "ii")]
    Correlated,
    Uniform,
    #[value(alias = "b")]
    SparseNormal,
    #[value(alias = "a")]
    SparseUniform,
    #[value(alias = "mm")]
    MatrixMarket,
}

impl From<CaseArg> for GeneratorCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Normal => GeneratorCase::Normal,
            CaseArg::Correlated => GeneratorCase::Correlated,
            CaseArg::Uniform => GeneratorCase::Uniform,
            CaseArg::SparseNormal => GeneratorCase::SparseNormal,
            CaseArg::SparseUniform => GeneratorCase::SparseUniform,
            CaseArg::MatrixMarket => GeneratorCase::MatrixMarket,
        }
    }
}

#[derive(Args, Clone)]
struct InstanceArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Defaults to normal, sparse-uniform or uniform by family.
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    #[arg(long, default_value_t = 200)]
    p: usize,
    #[arg(long, default_value_t = 1000)]
    q: usize,
    #[arg(long, default_value_t = 10)]
    s: usize,
    #[arg(long, default_value_t = 0.5)]
    v: f64,
    #[arg(long, default_value_t = 0.5)]
    d: f64,
    #[arg(long, default_value_t = DEFAULT_LASSO_MU)]
    mu: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Scale K to unit operator norm.
    #[arg(long)]
    normalize: bool,
    /// Matrix Market file for `--case matrix-market`.
    #[arg(long)]
    path: Option<PathBuf>,
}

impl InstanceArgs {
    fn spec(&self) -> Result<InstanceSpec, BenchError> {
        let family = match self.family {
            FamilyArg::Lasso => Family::Lasso,
            FamilyArg::Nnls => Family::Nnls,
            FamilyArg::MatrixGame => Family::MatrixGame,
        };
        let case = self.case.map(GeneratorCase::from).unwrap_or(match family {
            Family::Lasso => GeneratorCase::Normal,
            Family::Nnls => GeneratorCase::SparseUniform,
            Family::MatrixGame => GeneratorCase::Uniform,
        });
        let mut spec = match (family, case) {
            (Family::Lasso, GeneratorCase::Correlated) => {
                InstanceSpec::lasso_correlated(self.p, self.q, self.s, self.v, self.seed)
            }
            (Family::Lasso, _) => InstanceSpec::lasso(self.p, self.q, self.s, self.seed),
            (Family::Nnls, GeneratorCase::MatrixMarket) => {
                let path = self
                    .path
                    .clone()
                    .ok_or_else(|| BenchError::Invalid("--case matrix-market needs --path".into()))?;
                InstanceSpec::nnls_matrix_market(path, self.seed)
            }
            (Family::Nnls, c) => InstanceSpec::nnls_random(c, self.p, self.q, self.s, self.d, self.seed),
            (Family::MatrixGame, c) => InstanceSpec::matrix_game(c, self.p, self.q, self.seed),
        };
        spec.case = case;
        spec.mu = self.mu;
        spec.normalize = self.normalize;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Clone, Default)]
struct OverrideArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    accel_psi: Option<f64>,
    #[arg(long)]
    accel_beta0: Option<f64>,
    #[arg(long)]
    accel_gamma: Option<f64>,
    #[arg(long)]
    graal_phi: Option<f64>,
}

impl From<&OverrideArgs> for Overrides {
    fn from(a: &OverrideArgs) -> Self {
        Overrides {
            beta: a.beta,
            psi: a.psi,
            zeta: a.zeta,
            rho: a.rho,
            accel_psi: a.accel_psi,
            accel_beta0: a.accel_beta0,
            accel_gamma: a.accel_gamma,
            graal_phi: a.graal_phi,
        }
    }
}

#[derive(Args, Clone)]
struct ReferenceArgs {
    /// Iteration cap of the reference run.
    #[arg(long, default_value_t = 1_000_000)]
    reference_iters: usize,
    #[arg(long, default_value_t = 1e-13)]
    reference_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    reference_beta: f64,
}

impl ReferenceArgs {
    fn options(&self) -> ReferenceOptions {
        ReferenceOptions {
            max_iter: self.reference_iters,
            tol: self.reference_tol,
            beta: self.reference_beta,
            ..ReferenceOptions::default()
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',', required = true)]
    schemes: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Compute F* and a saddle point first, enabling objective errors and gaps.
    #[arg(long)]
    reference: bool,
    #[command(flatten)]
    reference_args: ReferenceArgs,
    /// Record elapsed time in the `wall_ns` column.
    #[arg(long)]
    wall_time: bool,
    #[command(flatten)]
    overrides: OverrideArgs,
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Directory for the regenerated CSVs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 unless every CSV matches the original byte for byte.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DualArg {
    LeastSquares,
    Equality,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Spectral,
    Sampling,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value = "least-squares")]
    dual: DualArg,
    #[arg(long, default_value_t = 2.0)]
    psi: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, conflicts_with = "product")]
    tau: Option<f64>,
    /// Target `τσL²`; defaults to `0.99ψ`.
    #[arg(long)]
    product: Option<f64>,
    #[arg(long, value_enum, default_value = "spectral")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value = "grpda")]
    scheme: String,
    #[arg(long, value_delimiter = ',', required = true)]
    psis: Vec<f64>,
    /// Instance seeds; defaults to `--seed` alone.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    #[command(flatten)]
    reference_args: ReferenceArgs,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 6)]
    max_rows: usize,
    #[arg(long, default_value_t = 6)]
    max_cols: usize,
    #[arg(long, default_value_t = 2.0)]
    psi_min: f64,
    #[arg(long, default_value_t = 4.0)]
    psi_max: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn cache(dir: &Option<PathBuf>) -> Option<InstanceCache> {
    dir.as_ref().map(|d| InstanceCache::new(d.clone()))
}

fn cmd_run(args: RunArgs, cache: Option<&InstanceCache>) -> anyhow::Result<ExitCode> {
    let overrides = Overrides::from(&args.overrides);
    let plan = Plan {
        instance: args.instance.spec()?,
        cells: args
            .schemes
            .iter()
            .map(|s| CellPlan {
                scheme: s.trim().to_string(),
                overrides: overrides.clone(),
            })
            .collect(),
        budget: args.iters,
        stride: args.stride,
        wall_time: args.wall_time,
        reference: args.reference.then(|| args.reference_args.options()),
    };
    let manifest = execute(&plan, &args.out, cache)?;
    for c in &manifest.cells {
        eprintln!("{}: {} rows -> {}", c.scheme, c.rows, args.out.join(&c.csv).display());
    }
    if manifest.failed() {
        for c in manifest
            .cells
            .iter()
            .filter(|c| c.status != grpda_bench::CellStatus::Ok)
        {
            eprintln!("{} failed: {:?}", c.scheme, c.status);
        }
        return Ok(ExitCode::from(grpda_bench::EXIT_SOLVER as u8));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(args: ReplayArgs, cache: Option<&InstanceCache>) -> anyhow::Result<ExitCode> {
    let outcome = replay(&args.manifest, args.out.as_deref(), cache)?;
    for (name, same) in &outcome.files {
        let verdict = match same {
            Some(true) => "identical",
            Some(false) => "differs",
            None => "original missing",
        };
        println!("{name}: {verdict}");
    }
    if args.check && !outcome.identical() {
        return Ok(ExitCode::from(grpda_bench::EXIT_SOLVER as u8));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_certify(args: CertifyArgs) -> anyhow::Result<ExitCode> {
    let opts = CertifyOptions {
        instance: args.instance.spec()?,
        dual: match args.dual {
            DualArg::LeastSquares => DualKind::LeastSquares,
            DualArg::Equality => DualKind::Equality,
        },
        psi: args.psi,
        sigma: args.sigma,
        tau: args.tau,
        product: args.product,
        mode: match args.mode {
            ModeArg::Spectral => CertifyMode::Spectral,
            ModeArg::Sampling => CertifyMode::Sampling,
        },
        samples: args.samples,
        seed: args.sample_seed,
    };
    let r = certify(&opts)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&r)?);
    } else {
        println!(
            "order {}  psi {}  tau {:e}  sigma {:e}  tau*sigma*L^2 {:e}",
            r.order, r.psi, r.tau, r.sigma, r.product
        );
        if let Some(m) = r.report.max_modulus {
            println!("max |lambda(2T - I)| = {m:.12}  threshold {}", r.threshold);
        }
        if let Some(s) = &r.report.sampling {
            println!(
                "{} samples, {} violations, worst excess {:e}",
                s.samples, s.violations, s.worst_excess
            );
        }
        println!("{}", if r.passed { "pass" } else { "fail" });
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs, cache: Option<&InstanceCache>) -> anyhow::Result<ExitCode> {
    let instance = args.instance.spec()?;
    let seeds = if args.seeds.is_empty() {
        vec![instance.seed]
    } else {
        args.seeds.clone()
    };
    let opts = SweepOptions {
        instance,
        scheme: args.scheme.clone(),
        psis: args.psis.clone(),
        seeds,
        budget: args.iters,
        threshold: args.threshold,
        overrides: Overrides::from(&args.overrides),
        reference: args.reference_args.options(),
    };
    let rows = sweep_psi(&opts, cache)?;
    let mut text = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        text.push_str(&r.csv_line());
        text.push('\n');
    }
    match &args.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_search(args: SearchArgs) -> anyhow::Result<ExitCode> {
    let report = search(&SearchOptions {
        trials: args.trials,
        max_rows: args.max_rows,
        max_cols: args.max_cols,
        psi_min: args.psi_min,
        psi_max: args.psi_max,
        seed: args.seed,
    })?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cache = cache(&cli.cache_dir);
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, cache.as_ref()),
        Command::Replay(a) => cmd_replay(a, cache.as_ref()),
        Command::Certify(a) => cmd_certify(a),
        Command::SweepPsi(a) => cmd_sweep(a, cache.as_ref()),
        Command::Search(a) => cmd_search(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<BenchError>()
                .map_or(grpda_bench::EXIT_SOLVER, BenchError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
