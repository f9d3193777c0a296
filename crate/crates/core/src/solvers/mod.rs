//! GRPDA in its three forms, the baseline schemes, and trace capture.

mod baselines;
mod config;
mod grpda;
mod reference;
mod run;
mod state;

pub use baselines::{arrow_hurwicz_step, fista_next_t, fista_step, graal_step, pda_step, pgm_step};
pub use config::{
    psi0, AccelConfig, AccelState, GraalConfig, GrpdaConfig, PdConfig, ProxGradConfig, RelaxConfig, RhoSchedule,
    DEFAULT_GRAAL_PHI, DEFAULT_ZETA,
};
pub use grpda::{agrpda_step, grpda_step, rgrpda_step};
pub use reference::{reference_run, Reference, ReferenceOptions};
pub use run::{run, write_csv, RunFailure, RunOptions, RunTrace, Scheme, Solver, TraceRow, CSV_HEADER, SCHEME_NAMES};
pub use state::IterateState;

use crate::error::{Error, Result};

pub(crate) fn ensure_finite(scheme: &str, state: &IterateState) -> Result<()> {
    let ok = state.x.iter().chain(&state.y).chain(&state.z).all(|v| v.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::Diverged {
            scheme: scheme.to_string(),
            iteration: state.n,
        })
    }
}
