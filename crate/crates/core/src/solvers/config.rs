use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::problem::SaddleProblem;
use crate::prox::{conjugate_prox_coefficients, ConjugateProxCoefficients};
use crate::GOLDEN_RATIO;

pub const DEFAULT_ZETA: f64 = 0.99;
/// Combination parameter and step factor used for GRAAL.
pub const DEFAULT_GRAAL_PHI: f64 = 1.618;

/// The real root of `ψ³ − ψ − 1 = 0`, by bisection on `[1.3, 1.4]`.
pub fn psi0() -> f64 {
    static PSI0: OnceLock<f64> = OnceLock::new();
    *PSI0.get_or_init(|| {
        let h = |s: f64| s * s * s - s - 1.0;
        let (mut lo, mut hi) = (1.3f64, 1.4f64);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn certified_bound(problem: &SaddleProblem) -> Result<f64> {
    let l = problem.norm_bound();
    if l > 0.0 {
        Ok(l)
    } else {
        Err(Error::InvalidConfig(
            "K = 0: default step sizes need a nonzero norm bound; set τ and σ explicitly".into(),
        ))
    }
}

/// Fixed-step GRPDA parameters.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrpdaConfig {
    pub psi: f64,
    pub tau: f64,
    pub sigma: f64,
    /// `σ/τ`.
    pub beta: f64,
    /// Safety factor with `τσL² = ζ²ψ`.
    pub zeta: f64,
}

impl GrpdaConfig {
    /// `τ = ζ√(ψ/β)/L`, `σ = βτ`.
    pub fn from_beta(problem: &SaddleProblem, psi: f64, beta: f64, zeta: f64) -> Result<Self> {
        positive("β", beta)?;
        let l = certified_bound(problem)?;
        let tau = zeta * (psi / beta).sqrt() / l;
        let c = Self {
            psi,
            tau,
            sigma: beta * tau,
            beta,
            zeta,
        };
        c.validate(problem)?;
        Ok(c)
    }

    /// Explicit steps; `ζ` is derived from the certified bound.
    pub fn with_steps(problem: &SaddleProblem, psi: f64, tau: f64, sigma: f64) -> Result<Self> {
        positive("τ", tau)?;
        positive("σ", sigma)?;
        let zeta = (tau * sigma / psi).sqrt() * problem.norm_bound();
        let c = Self {
            psi,
            tau,
            sigma,
            beta: sigma / tau,
            zeta,
        };
        c.validate(problem)?;
        Ok(c)
    }

    /// Largest admissible `ψ`: `2` when `f` is least-squares or an equality constraint, else `φ`.
    pub fn psi_max(problem: &SaddleProblem) -> f64 {
        if problem.is_affine_dual() {
            2.0
        } else {
            GOLDEN_RATIO
        }
    }

    pub fn validate(&self, problem: &SaddleProblem) -> Result<()> {
        let hi = Self::psi_max(problem);
        if !(self.psi > 1.0 && self.psi <= hi) {
            return Err(Error::InvalidConfig(format!("ψ = {} outside (1, {hi}]", self.psi)));
        }
        positive("τ", self.tau)?;
        positive("σ", self.sigma)?;
        positive("β", self.beta)?;
        if (self.beta - self.sigma / self.tau).abs() > 1e-12 * self.beta {
            return Err(Error::InvalidConfig(format!(
                "β = {} does not equal σ/τ = {}",
                self.beta,
                self.sigma / self.tau
            )));
        }
        if !(self.zeta >= 0.0 && self.zeta < 1.0) {
            return Err(Error::InvalidConfig(format!("ζ = {} outside [0, 1)", self.zeta)));
        }
        let l = problem.norm_bound();
        let product = self.tau * self.sigma * l * l;
        if product >= self.psi {
            return Err(Error::InvalidConfig(format!(
                "step sizes violate τσL² < ψ: τσL² = {product} with L ≤ {l}, ψ = {}",
                self.psi
            )));
        }
        Ok(())
    }
}

/// Inputs of accelerated GRPDA.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccelConfig {
    pub psi: f64,
    pub beta0: f64,
    /// Strong convexity modulus of `g` assumed by the step rule.
    pub gamma: f64,
}

/// Parameter recurrences of accelerated GRPDA.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AccelState {
    pub psi: f64,
    pub psi0: f64,
    pub gamma: f64,
    /// `(1 + ψ)/ψ²`.
    pub phi_r: f64,
    pub l: f64,
    pub tau0: f64,
    pub beta0: f64,
    /// `β_n`.
    pub beta: f64,
    /// `τ_n`.
    pub tau: f64,
    /// `ω_n` (zero before the first step).
    pub omega: f64,
    /// `τ_n/τ_{n−1}` (one before the first step).
    pub delta: f64,
}

impl AccelState {
    pub fn new(problem: &SaddleProblem, config: &AccelConfig) -> Result<Self> {
        let p0 = psi0();
        if !(config.psi > p0 && config.psi < GOLDEN_RATIO) {
            return Err(Error::InvalidConfig(format!(
                "ψ = {} outside ({p0}, {GOLDEN_RATIO})",
                config.psi
            )));
        }
        positive("β₀", config.beta0)?;
        if !(config.gamma >= 0.0 && config.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "γ = {} must be nonnegative",
                config.gamma
            )));
        }
        if config.gamma > problem.gamma() {
            return Err(Error::InvalidConfig(format!(
                "γ = {} exceeds the strong convexity modulus {} of g",
                config.gamma,
                problem.gamma()
            )));
        }
        let l = certified_bound(problem)?;
        let tau0 = (config.psi / config.beta0).sqrt() / l;
        Ok(Self {
            psi: config.psi,
            psi0: p0,
            gamma: config.gamma,
            phi_r: (1.0 + config.psi) / (config.psi * config.psi),
            l,
            tau0,
            beta0: config.beta0,
            beta: config.beta0,
            tau: tau0,
            omega: 0.0,
            delta: 1.0,
        })
    }

    /// Lower bound `(ψ−φᵣ)/(ψ+φᵣγ√φᵣτ₀)` on every `ω_n`.
    pub fn omega_low(&self) -> f64 {
        (self.psi - self.phi_r) / (self.psi + self.phi_r * self.gamma * self.phi_r.sqrt() * self.tau0)
    }

    /// Advance `ω`, `β`, `τ` given `τ_{n−1} = self.tau`; returns the dual step `β_nτ_n`.
    pub(crate) fn advance(&mut self) -> f64 {
        let tau_prev = self.tau;
        self.omega = (self.psi - self.phi_r) / (self.psi + self.phi_r * self.gamma * tau_prev);
        self.beta *= 1.0 + self.omega * self.gamma * tau_prev;
        self.tau = (self.phi_r * tau_prev).min(self.psi / (tau_prev * self.beta * self.l * self.l));
        self.delta = self.tau / tau_prev;
        self.beta * self.tau
    }
}

/// Relaxation parameters `ρ_n`, each in `(0, 3/2)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoSchedule {
    Constant(f64),
    /// `ρ_1, ρ_2, …`; the last entry repeats.
    Sequence(Vec<f64>),
}

impl RhoSchedule {
    /// `ρ_n` for `n ≥ 1`.
    pub fn at(&self, n: usize) -> f64 {
        match self {
            RhoSchedule::Constant(r) => *r,
            RhoSchedule::Sequence(v) => v[(n.max(1) - 1).min(v.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let vals: &[f64] = match self {
            RhoSchedule::Constant(r) => std::slice::from_ref(r),
            RhoSchedule::Sequence(v) if v.is_empty() => return Err(Error::InvalidConfig("empty ρ sequence".into())),
            RhoSchedule::Sequence(v) => v,
        };
        match vals.iter().find(|r| !(**r > 0.0 && **r < 1.5)) {
            Some(r) => Err(Error::InvalidConfig(format!("ρ = {r} outside (0, 3/2)"))),
            None => Ok(()),
        }
    }
}

/// Relaxed GRPDA parameters.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RelaxConfig {
    pub psi: f64,
    pub tau: f64,
    pub sigma: f64,
    pub beta: f64,
    pub rho: RhoSchedule,
    pub coefficients: ConjugateProxCoefficients,
}

impl RelaxConfig {
    pub fn from_beta(problem: &SaddleProblem, psi: f64, beta: f64, zeta: f64, rho: RhoSchedule) -> Result<Self> {
        positive("β", beta)?;
        let l = certified_bound(problem)?;
        let tau = zeta * (psi / beta).sqrt() / l;
        Self::with_steps(problem, psi, tau, beta * tau, rho)
    }

    pub fn with_steps(problem: &SaddleProblem, psi: f64, tau: f64, sigma: f64, rho: RhoSchedule) -> Result<Self> {
        if !problem.is_affine_dual() {
            return Err(Error::Unsupported(
                "relaxed GRPDA needs f = ½‖·−b‖² or the indicator of {b}".into(),
            ));
        }
        positive("τ", tau)?;
        positive("σ", sigma)?;
        let c = Self {
            psi,
            tau,
            sigma,
            beta: sigma / tau,
            rho,
            coefficients: conjugate_prox_coefficients(problem.fstar(), sigma)?,
        };
        c.validate(problem)?;
        Ok(c)
    }

    pub fn validate(&self, problem: &SaddleProblem) -> Result<()> {
        if !problem.is_affine_dual() {
            return Err(Error::Unsupported(
                "relaxed GRPDA needs f = ½‖·−b‖² or the indicator of {b}".into(),
            ));
        }
        if !(self.psi > 1.0 && self.psi <= 2.0) {
            return Err(Error::InvalidConfig(format!("ψ = {} outside (1, 2]", self.psi)));
        }
        positive("τ", self.tau)?;
        positive("σ", self.sigma)?;
        self.rho.validate()?;
        let l = problem.norm_bound();
        if self.tau * self.sigma * l * l >= self.psi {
            return Err(Error::InvalidConfig(format!(
                "step sizes violate τσL² < ψ: τσL² = {}",
                self.tau * self.sigma * l * l
            )));
        }
        let want = conjugate_prox_coefficients(problem.fstar(), self.sigma)?;
        if want != self.coefficients {
            return Err(Error::InvalidConfig("(η, ϱ) do not match σ and the kind of f".into()));
        }
        Ok(())
    }
}

/// Arrow–Hurwicz and PDA step sizes.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PdConfig {
    pub tau: f64,
    pub sigma: f64,
}

impl PdConfig {
    /// `τ = ζ/(√β L)`, `σ = βτ`, so `τσL² = ζ² < 1`.
    pub fn from_beta(problem: &SaddleProblem, beta: f64, zeta: f64) -> Result<Self> {
        positive("β", beta)?;
        let l = certified_bound(problem)?;
        let tau = zeta / (beta.sqrt() * l);
        Ok(Self { tau, sigma: beta * tau })
    }

    /// PDA with unit extrapolation requires `τσL² < 1`.
    pub fn validate_pda(&self, problem: &SaddleProblem) -> Result<()> {
        self.validate_positive()?;
        let l = problem.norm_bound();
        if self.tau * self.sigma * l * l >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "PDA needs τσL² < 1, got {}",
                self.tau * self.sigma * l * l
            )));
        }
        Ok(())
    }

    pub fn validate_positive(&self) -> Result<()> {
        positive("τ", self.tau)?;
        positive("σ", self.sigma)
    }
}

/// Step `α` for PGM and FISTA.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProxGradConfig {
    pub alpha: f64,
}

impl ProxGradConfig {
    /// `α = 1/L²`.
    pub fn from_problem(problem: &SaddleProblem) -> Result<Self> {
        let l = certified_bound(problem)?;
        Ok(Self { alpha: 1.0 / (l * l) })
    }

    pub fn validate(&self, problem: &SaddleProblem) -> Result<()> {
        positive("α", self.alpha)?;
        if problem.is_mirrored() || !problem.is_least_squares() {
            return Err(Error::Unsupported(
                "proximal gradient schemes need f(Kx) = ½‖Kx − b‖²".into(),
            ));
        }
        Ok(())
    }
}

/// GRAAL shared step and combination parameter.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraalConfig {
    pub tau: f64,
    pub phi: f64,
}

impl GraalConfig {
    /// `τ = φ/(2L)`.
    pub fn from_problem(problem: &SaddleProblem, phi: f64) -> Result<Self> {
        let l = certified_bound(problem)?;
        let c = Self {
            tau: phi / (2.0 * l),
            phi,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("τ", self.tau)?;
        if !(self.phi > 1.0 && self.phi <= GOLDEN_RATIO) {
            return Err(Error::InvalidConfig(format!(
                "φ = {} outside (1, {GOLDEN_RATIO}]",
                self.phi
            )));
        }
        Ok(())
    }
}
