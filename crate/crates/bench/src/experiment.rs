use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use grpda_core::problems::{
    default_config, default_scheme, generate, scheme_problem, GeneratedInstance, InstanceCache,
};
use grpda_core::solvers::{reference_run, run, Reference, RunOptions, Scheme, SCHEME_NAMES};
use grpda_core::{Error as CoreError, SaddleProblem};

use crate::error::{BenchError, Result};
use crate::plan::{CellRecord, CellStatus, Manifest, Plan, ReferenceSummary, MANIFEST_FILE, TOOL_NAME};

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn validate(plan: &Plan) -> Result<()> {
    if plan.budget == 0 {
        return Err(BenchError::Invalid("iteration budget must be at least 1".into()));
    }
    if plan.stride == 0 {
        return Err(BenchError::Invalid("trace stride must be at least 1".into()));
    }
    if plan.cells.is_empty() {
        return Err(BenchError::Invalid("no schemes requested".into()));
    }
    for c in &plan.cells {
        if !SCHEME_NAMES.contains(&c.scheme.as_str()) {
            return Err(BenchError::Invalid(format!(
                "unknown scheme `{}`; valid schemes: {}",
                c.scheme,
                SCHEME_NAMES.join(", ")
            )));
        }
    }
    plan.instance.validate()?;
    Ok(())
}

pub(crate) fn instance(
    plan_spec: &grpda_core::problems::InstanceSpec,
    cache: Option<&InstanceCache>,
) -> Result<GeneratedInstance> {
    Ok(match cache {
        Some(c) => c.instance(plan_spec)?,
        None => generate(plan_spec)?,
    })
}

fn reference(plan: &Plan, inst: &GeneratedInstance, cache: Option<&InstanceCache>) -> Result<Option<Reference>> {
    let Some(opts) = &plan.reference else { return Ok(None) };
    let r = match cache {
        Some(c) => c.reference(&plan.instance, inst, opts)?,
        None => reference_run(&inst.problem, opts)?,
    };
    Ok(Some(r))
}

fn csv_names(plan: &Plan) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for c in &plan.cells {
        *seen.entry(c.scheme.as_str()).or_default() += 1;
    }
    let mut idx: HashMap<&str, usize> = HashMap::new();
    plan.cells
        .iter()
        .map(|c| {
            let name = c.scheme.as_str();
            if seen[name] > 1 {
                let i = idx.entry(name).or_default();
                *i += 1;
                format!("{name}-{i}.csv")
            } else {
                format!("{name}.csv")
            }
        })
        .collect()
}

struct Cell {
    problem: SaddleProblem,
    scheme: Scheme,
}

fn run_cell(cell: &Cell, plan: &Plan, reference: Option<&Reference>) -> (String, usize, CellStatus) {
    let (x0, y0) = cell.problem.default_start();
    let opts = RunOptions {
        budget: plan.budget,
        stride: plan.stride,
        wall_time: plan.wall_time,
        reference: reference.cloned(),
    };
    match run(&cell.problem, &cell.scheme, x0, y0, &opts) {
        Ok(trace) => (trace.to_csv_string(), trace.rows.len(), CellStatus::Ok),
        Err(failure) => {
            let iteration = match &failure.error {
                CoreError::Diverged { iteration, .. } => Some(*iteration),
                _ => None,
            };
            let status = CellStatus::Failed {
                message: failure.error.to_string(),
                iteration,
            };
            match failure.trace {
                Some(t) => (t.to_csv_string(), t.rows.len(), status),
                None => (format!("{}\n", grpda_core::solvers::CSV_HEADER), 0, status),
            }
        }
    }
}

/// Runs every cell of `plan`, writing one CSV per cell and `manifest.json` into `out`.
///
/// Every scheme is configured before the first run, so invalid parameters
/// leave no artifacts. Solver failures are recorded in the manifest and keep
/// their partial trace.
pub fn execute(plan: &Plan, out: &Path, cache: Option<&InstanceCache>) -> Result<Manifest> {
    validate(plan)?;
    let inst = instance(&plan.instance, cache)?;
    let defaults = default_config(&plan.instance);
    let mut cells = Vec::with_capacity(plan.cells.len());
    for c in &plan.cells {
        let problem = scheme_problem(&c.scheme, &inst.problem);
        let scheme = default_scheme(&c.scheme, &problem, &c.overrides.apply(defaults.clone()))
            .map_err(|e| BenchError::Invalid(format!("{}: {e}", c.scheme)))?;
        cells.push(Cell { problem, scheme });
    }
    let reference = reference(plan, &inst, cache)?;
    fs::create_dir_all(out)?;
    let mut records = Vec::new();
    for ((cell, name), c) in cells.iter().zip(csv_names(plan)).zip(&plan.cells) {
        let (csv, rows, status) = run_cell(cell, plan, reference.as_ref());
        write_atomic(&out.join(&name), csv.as_bytes())?;
        records.push(CellRecord {
            scheme: c.scheme.clone(),
            mirrored: cell.problem.is_mirrored(),
            config: cell.scheme.clone(),
            csv: name,
            rows,
            status,
        });
    }
    let manifest = Manifest {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        generator_version: inst.provenance.generator_version,
        spec_hash: inst.provenance.spec_hash.clone(),
        norm_bound: inst.problem.norm_bound(),
        plan: plan.clone(),
        reference: reference.map(|r| ReferenceSummary {
            objective: r.objective,
            iterations: r.iterations,
            converged: r.converged,
        }),
        cells: records,
    };
    write_atomic(&out.join(MANIFEST_FILE), &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayOutcome {
    pub manifest: Manifest,
    /// CSV file name and whether it matches the original next to the manifest
    /// (`None` when the original is missing).
    pub files: Vec<(String, Option<bool>)>,
}

impl ReplayOutcome {
    pub fn identical(&self) -> bool {
        self.files.iter().all(|(_, same)| *same == Some(true))
    }
}

/// Re-runs every cell recorded in the manifest with its recorded configuration.
/// With `out`, the regenerated CSVs are written there.
pub fn replay(manifest_path: &Path, out: Option<&Path>, cache: Option<&InstanceCache>) -> Result<ReplayOutcome> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    let plan = &manifest.plan;
    let inst = instance(&plan.instance, cache)?;
    if inst.provenance.spec_hash != manifest.spec_hash {
        return Err(BenchError::Invalid(format!(
            "instance hash {} differs from the manifest's {}; generator version {} vs {}",
            inst.provenance.spec_hash,
            manifest.spec_hash,
            inst.provenance.generator_version,
            manifest.generator_version
        )));
    }
    let reference = reference(plan, &inst, cache)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut files = Vec::new();
    for rec in &manifest.cells {
        let problem = if rec.mirrored {
            inst.problem.canonical().mirror()
        } else {
            inst.problem.canonical()
        };
        let cell = Cell {
            problem,
            scheme: rec.config.clone(),
        };
        let (csv, _, _) = run_cell(&cell, plan, reference.as_ref());
        let same = fs::read(dir.join(&rec.csv)).ok().map(|old| old == csv.as_bytes());
        if let Some(out) = out {
            write_atomic(&out.join(&rec.csv), csv.as_bytes())?;
        }
        files.push((rec.csv.clone(), same));
    }
    if let Some(out) = out {
        write_atomic(&out.join(MANIFEST_FILE), &serde_json::to_vec_pretty(&manifest)?)?;
    }
    Ok(ReplayOutcome { manifest, files })
}
