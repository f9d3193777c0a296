//! Reproducible experiments on top of `grpda-core`: runs with CSV traces and
//! manifests, manifest replay, fixed-point certification, `ψ` sweeps and a
//! search for spectral violations beyond `ψ = 2`.

mod certify;
mod error;
mod experiment;
mod plan;
mod search;
mod sweep;

pub use certify::{certify, CertifyOptions, CertifyReport, DualKind};
pub use error::{BenchError, Result, EXIT_INVALID, EXIT_OK, EXIT_SOLVER};
pub use experiment::{execute, replay, ReplayOutcome};
pub use plan::{
    CellPlan, CellRecord, CellStatus, Manifest, Overrides, Plan, ReferenceSummary, MANIFEST_FILE, TOOL_NAME,
};
pub use search::{search, SearchFinding, SearchOptions, SearchReport};
pub use sweep::{iterations_to_tolerance, sweep_psi, SweepOptions, SweepRow, SWEEP_HEADER};
