use grpda_core::problems::{FamilyDefaults, InstanceSpec};
use grpda_core::solvers::{ReferenceOptions, Scheme};

pub const TOOL_NAME: &str = "grpda-bench";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Per-run overrides of the family defaults.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accel_psi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accel_beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accel_gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graal_phi: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut d: FamilyDefaults) -> FamilyDefaults {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut d.beta, self.beta);
        set(&mut d.psi, self.psi);
        set(&mut d.zeta, self.zeta);
        set(&mut d.rho, self.rho);
        set(&mut d.accel_psi, self.accel_psi);
        set(&mut d.accel_beta0, self.accel_beta0);
        set(&mut d.accel_gamma, self.accel_gamma);
        set(&mut d.graal_phi, self.graal_phi);
        d
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellPlan {
    pub scheme: String,
    #[serde(default)]
    pub overrides: Overrides,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Plan {
    pub instance: InstanceSpec,
    pub cells: Vec<CellPlan>,
    pub budget: usize,
    pub stride: usize,
    #[serde(default)]
    pub wall_time: bool,
    /// Long reference run supplying `F*` and the saddle point for gaps.
    #[serde(default)]
    pub reference: Option<ReferenceOptions>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReferenceSummary {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    Failed { message: String, iteration: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellRecord {
    pub scheme: String,
    /// Run on the problem with the roles of the primal and dual sides switched.
    pub mirrored: bool,
    pub config: Scheme,
    pub csv: String,
    pub rows: usize,
    #[serde(flatten)]
    pub status: CellStatus,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub generator_version: u32,
    pub spec_hash: String,
    pub norm_bound: f64,
    pub plan: Plan,
    pub reference: Option<ReferenceSummary>,
    pub cells: Vec<CellRecord>,
}

impl Manifest {
    pub fn failed(&self) -> bool {
        self.cells.iter().any(|c| c.status != CellStatus::Ok)
    }
}
