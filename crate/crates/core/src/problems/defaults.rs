use super::generate::{Family, GeneratorCase, InstanceSpec};
use crate::error::{Error, Result};
use crate::problem::SaddleProblem;
use crate::solvers::{
    AccelConfig, GraalConfig, GrpdaConfig, PdConfig, ProxGradConfig, RelaxConfig, RhoSchedule, Scheme,
    DEFAULT_GRAAL_PHI, DEFAULT_ZETA, SCHEME_NAMES,
};

/// Per-family solver settings; every field may be overridden.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FamilyDefaults {
    /// `σ/τ` for GRPDA, R-GRPDA, PDA and Arrow–Hurwicz.
    pub beta: f64,
    pub psi: f64,
    pub zeta: f64,
    pub rho: f64,
    pub accel_psi: f64,
    pub accel_beta0: f64,
    /// Modulus used by A-GRPDA; zero when neither side is strongly convex.
    pub accel_gamma: f64,
    pub graal_phi: f64,
}

pub fn default_config(spec: &InstanceSpec) -> FamilyDefaults {
    let base = FamilyDefaults {
        beta: 1.0,
        psi: 2.0,
        zeta: DEFAULT_ZETA,
        rho: 1.49,
        accel_psi: 1.5,
        accel_beta0: 1.0,
        accel_gamma: 1.0,
        graal_phi: DEFAULT_GRAAL_PHI,
    };
    match spec.family {
        Family::Lasso => FamilyDefaults { beta: 400.0, ..base },
        Family::Nnls if spec.case != GeneratorCase::MatrixMarket && spec.p == 1000 => {
            FamilyDefaults { beta: 25.0, ..base }
        }
        Family::Nnls => base,
        Family::MatrixGame => FamilyDefaults {
            psi: 1.618,
            accel_gamma: 0.0,
            ..base
        },
    }
}

/// The orientation a scheme runs in: A-GRPDA needs the strongly convex
/// function on the primal side, so the roles are switched when only `f*`
/// is strongly convex.
pub fn scheme_problem(name: &str, problem: &SaddleProblem) -> SaddleProblem {
    let canonical = problem.canonical();
    if name == "agrpda" && canonical.gamma() == 0.0 && canonical.fstar().strong_convexity() > 0.0 {
        canonical.mirror()
    } else {
        canonical
    }
}

/// Builds scheme `name` with the defaults for `problem`, which must already be
/// in the orientation returned by [`scheme_problem`].
pub fn default_scheme(name: &str, problem: &SaddleProblem, d: &FamilyDefaults) -> Result<Scheme> {
    let scheme = match name {
        "grpda" => Scheme::Grpda(GrpdaConfig::from_beta(problem, d.psi, d.beta, d.zeta)?),
        "agrpda" => Scheme::Agrpda(AccelConfig {
            psi: d.accel_psi,
            beta0: d.accel_beta0,
            gamma: d.accel_gamma.min(problem.gamma()),
        }),
        "rgrpda" => Scheme::Rgrpda(RelaxConfig::from_beta(
            problem,
            d.psi,
            d.beta,
            d.zeta,
            RhoSchedule::Constant(d.rho),
        )?),
        "arrow-hurwicz" => Scheme::ArrowHurwicz(PdConfig::from_beta(problem, d.beta, d.zeta)?),
        "pda" => Scheme::Pda(PdConfig::from_beta(problem, d.beta, d.zeta)?),
        "pgm" => Scheme::Pgm(ProxGradConfig::from_problem(problem)?),
        "fista" => Scheme::Fista(ProxGradConfig::from_problem(problem)?),
        "graal" => Scheme::Graal(GraalConfig::from_problem(problem, d.graal_phi)?),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown scheme `{other}`; valid schemes: {}",
                SCHEME_NAMES.join(", ")
            )))
        }
    };
    scheme.validate(problem)?;
    Ok(scheme)
}
