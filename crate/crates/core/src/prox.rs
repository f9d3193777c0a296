//! Proximal operators of the component functions `g` and `f*`.

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::dot;

/// Feasibility slack used when evaluating indicator functions.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// An extended-real function value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtValue {
    Finite(f64),
    PosInf,
}

impl ExtValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtValue::Finite(v) => Some(v),
            ExtValue::PosInf => None,
        }
    }

    /// Plain float, `+∞` for [`ExtValue::PosInf`]; for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl std::ops::Add for ExtValue {
    type Output = ExtValue;

    fn add(self, rhs: ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::PosInf,
        }
    }
}

/// A closed proper convex function with an inexpensive proximal map.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProxOracle {
    /// `μ‖·‖₁`.
    L1 {
        mu: f64,
    },
    /// Indicator of the nonnegative orthant.
    NonNeg,
    /// Indicator of the unit simplex.
    Simplex,
    /// Conjugate of `½‖· − b‖²`, i.e. `½‖y‖² + ⟨b, y⟩`.
    LeastSquaresConjugate {
        b: Vec<f64>,
    },
    /// Conjugate of the indicator of `{b}`, i.e. `⟨b, y⟩`.
    EqualityConjugate {
        b: Vec<f64>,
    },
    Zero,
}

/// `Prox_{σf*}(u) = ηu + ϱb` for the two affine conjugate kinds.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConjugateProxCoefficients {
    pub eta: f64,
    pub varrho: f64,
    pub sigma: f64,
}

impl ProxOracle {
    pub fn l1(mu: f64) -> Result<Self> {
        let o = ProxOracle::L1 { mu };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProxOracle::L1 { mu } if !(*mu > 0.0 && mu.is_finite()) => Err(Error::InvalidConfig(format!(
                "l1 weight must be positive and finite, got {mu}"
            ))),
            ProxOracle::LeastSquaresConjugate { b } | ProxOracle::EqualityConjugate { b } => {
                check_finite("conjugate data b", b)
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProxOracle::L1 { .. } => "l1",
            ProxOracle::NonNeg => "indicator-nonneg",
            ProxOracle::Simplex => "indicator-simplex",
            ProxOracle::LeastSquaresConjugate { .. } => "least-squares-conjugate",
            ProxOracle::EqualityConjugate { .. } => "equality-conjugate",
            ProxOracle::Zero => "zero",
        }
    }

    /// Fixed dimension for the kinds that carry data.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ProxOracle::LeastSquaresConjugate { b } | ProxOracle::EqualityConjugate { b } => Some(b.len()),
            _ => None,
        }
    }

    pub fn b(&self) -> Option<&[f64]> {
        match self {
            ProxOracle::LeastSquaresConjugate { b } | ProxOracle::EqualityConjugate { b } => Some(b),
            _ => None,
        }
    }

    /// True for the two conjugate kinds whose prox is affine.
    pub fn is_affine_conjugate(&self) -> bool {
        matches!(
            self,
            ProxOracle::LeastSquaresConjugate { .. } | ProxOracle::EqualityConjugate { .. }
        )
    }

    /// Strong convexity modulus (`1` for the least-squares conjugate, else `0`).
    pub fn strong_convexity(&self) -> f64 {
        match self {
            ProxOracle::LeastSquaresConjugate { .. } => 1.0,
            _ => 0.0,
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) => check_len("prox argument", d, n),
            None => Ok(()),
        }
    }

    /// `Prox_{step·h}(v)`.
    pub fn prox(&self, step: f64, v: &[f64]) -> Result<Vec<f64>> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Contract(format!("prox step must be positive, got {step}")));
        }
        self.check_dim(v.len())?;
        check_finite("prox argument", v)?;
        let mut out = v.to_vec();
        self.prox_in_place(step, &mut out);
        Ok(out)
    }

    /// Unchecked kernel used inside solver loops.
    pub(crate) fn prox_in_place(&self, step: f64, v: &mut [f64]) {
        match self {
            ProxOracle::L1 { mu } => {
                let t = step * mu;
                for x in v.iter_mut() {
                    *x = x.signum() * (x.abs() - t).max(0.0);
                }
            }
            ProxOracle::NonNeg => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            ProxOracle::Simplex => project_simplex_in_place(v),
            ProxOracle::LeastSquaresConjugate { b } => {
                let d = 1.0 + step;
                for (x, bi) in v.iter_mut().zip(b) {
                    *x = (*x - step * bi) / d;
                }
            }
            ProxOracle::EqualityConjugate { b } => {
                for (x, bi) in v.iter_mut().zip(b) {
                    *x -= step * bi;
                }
            }
            ProxOracle::Zero => {}
        }
    }

    /// `h(x)`, with `+∞` outside the domain of indicator kinds.
    pub fn value(&self, x: &[f64]) -> ExtValue {
        match self {
            ProxOracle::L1 { mu } => ExtValue::Finite(mu * x.iter().map(|v| v.abs()).sum::<f64>()),
            ProxOracle::NonNeg => indicator(x.iter().all(|&v| v >= -FEASIBILITY_TOL)),
            ProxOracle::Simplex => indicator(on_simplex(x, FEASIBILITY_TOL)),
            ProxOracle::LeastSquaresConjugate { b } => ExtValue::Finite(0.5 * dot(x, x) + dot(b, x)),
            ProxOracle::EqualityConjugate { b } => ExtValue::Finite(dot(b, x)),
            ProxOracle::Zero => ExtValue::Finite(0.0),
        }
    }

    /// `h*(u)`, the convex conjugate of this function.
    pub fn conjugate_value(&self, u: &[f64]) -> ExtValue {
        match self {
            ProxOracle::L1 { mu } => indicator(u.iter().all(|v| v.abs() <= mu + FEASIBILITY_TOL)),
            ProxOracle::NonNeg => indicator(u.iter().all(|&v| v <= FEASIBILITY_TOL)),
            ProxOracle::Simplex => ExtValue::Finite(u.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            ProxOracle::LeastSquaresConjugate { b } => {
                ExtValue::Finite(0.5 * u.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum::<f64>())
            }
            ProxOracle::EqualityConjugate { b } => {
                let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                indicator(u.iter().zip(b).all(|(a, c)| (a - c).abs() <= FEASIBILITY_TOL * scale))
            }
            ProxOracle::Zero => indicator(u.iter().all(|v| v.abs() <= FEASIBILITY_TOL)),
        }
    }

    /// Projection onto the closure of the domain (identity for full-domain kinds).
    pub fn project_domain(&self, v: &mut [f64]) {
        match self {
            ProxOracle::NonNeg => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            ProxOracle::Simplex => project_simplex_in_place(v),
            _ => {}
        }
    }

    /// `Prox_{step·h*}(u)`, the prox of the conjugate.
    ///
    /// For the two affine conjugate kinds `h = f*`, and this is `Prox_{step·f}`.
    pub fn conjugate_prox(&self, step: f64, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u.len())?;
        match self {
            ProxOracle::LeastSquaresConjugate { b } => Ok(u
                .iter()
                .zip(b)
                .map(|(w, bi)| (bi + w / step) / (1.0 + 1.0 / step))
                .collect()),
            ProxOracle::EqualityConjugate { b } => Ok(b.clone()),
            ProxOracle::L1 { mu } => Ok(u.iter().map(|w| w.clamp(-mu, *mu)).collect()),
            ProxOracle::NonNeg => Ok(u.iter().map(|w| w.min(0.0)).collect()),
            ProxOracle::Zero => Ok(vec![0.0; u.len()]),
            ProxOracle::Simplex => {
                // h* = max, whose prox is u − step·P_Δ(u/step)
                let mut w: Vec<f64> = u.iter().map(|v| v / step).collect();
                project_simplex_in_place(&mut w);
                Ok(u.iter().zip(&w).map(|(a, p)| a - step * p).collect())
            }
        }
    }
}

fn indicator(feasible: bool) -> ExtValue {
    if feasible {
        ExtValue::Finite(0.0)
    } else {
        ExtValue::PosInf
    }
}

/// Whether `x` lies on the unit simplex up to `tol`.
pub fn on_simplex(x: &[f64], tol: f64) -> bool {
    !x.is_empty() && x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
}

/// Euclidean projection onto the unit simplex by sorting.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    project_simplex_in_place(&mut out);
    out
}

fn project_simplex_in_place(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// `(η, ϱ)` with `Prox_{σf*}(u) = ηu + ϱb` for the affine conjugate kinds.
pub fn conjugate_prox_coefficients(oracle: &ProxOracle, sigma: f64) -> Result<ConjugateProxCoefficients> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Contract(format!("σ must be positive, got {sigma}")));
    }
    match oracle {
        ProxOracle::EqualityConjugate { .. } => Ok(ConjugateProxCoefficients {
            eta: 1.0,
            varrho: -sigma,
            sigma,
        }),
        ProxOracle::LeastSquaresConjugate { .. } => Ok(ConjugateProxCoefficients {
            eta: 1.0 / (1.0 + sigma),
            varrho: -sigma / (1.0 + sigma),
            sigma,
        }),
        other => Err(Error::Unsupported(format!(
            "no affine conjugate prox for kind {}",
            other.name()
        ))),
    }
}

/// `Prox_{σh}(u) = u − σ·Prox_{h*/σ}(u/σ)`.
pub fn moreau_prox(oracle: &ProxOracle, sigma: f64, u: &[f64]) -> Result<Vec<f64>> {
    let scaled: Vec<f64> = u.iter().map(|v| v / sigma).collect();
    let p = oracle.conjugate_prox(1.0 / sigma, &scaled)?;
    Ok(u.iter().zip(&p).map(|(a, b)| a - sigma * b).collect())
}

/// Whether `p` satisfies `⟨p − v, y − p⟩ ≥ step·(h(p) − h(y)) − 1e-9` for every candidate `y`.
pub fn satisfies_prox_inequality(
    oracle: &ProxOracle,
    step: f64,
    v: &[f64],
    p: &[f64],
    candidates: &[Vec<f64>],
) -> Result<bool> {
    check_len("prox inequality point", v.len(), p.len())?;
    let Some(hp) = oracle.value(p).finite() else {
        return Ok(false);
    };
    for y in candidates {
        check_len("prox inequality candidate", v.len(), y.len())?;
        check_finite("prox inequality candidate", y)?;
        let Some(hy) = oracle.value(y).finite() else {
            continue;
        };
        let lhs: f64 = p.iter().zip(v).zip(y).map(|((pi, vi), yi)| (pi - vi) * (yi - pi)).sum();
        if lhs < step * (hp - hy) - 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks the variational characterization of `Prox_{step·h}(v)` against the candidates.
pub fn check_prox_variational(oracle: &ProxOracle, step: f64, v: &[f64], candidates: &[Vec<f64>]) -> Result<bool> {
    let p = oracle.prox(step, v)?;
    satisfies_prox_inequality(oracle, step, v, &p, candidates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold() {
        let p = ProxOracle::L1 { mu: 1.0 }.prox(1.0, &[2.0, -0.5, 0.0]).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn nonneg_projection() {
        assert_eq!(ProxOracle::NonNeg.prox(3.0, &[-3.0, 4.0]).unwrap(), vec![0.0, 4.0]);
    }

    #[test]
    fn simplex_symmetric() {
        assert_eq!(ProxOracle::Simplex.prox(1.0, &[2.0, 2.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn simplex_matches_enumeration() {
        let v = [1.5, 0.5, -0.2];
        let p = project_simplex(&v);
        let want = grpda_oracles::simplex_projection(&v);
        for (a, b) in p.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coefficients() {
        let ls = ProxOracle::LeastSquaresConjugate { b: vec![0.0] };
        let c = conjugate_prox_coefficients(&ls, 1.0).unwrap();
        assert_eq!((c.eta, c.varrho.abs()), (0.5, 0.5));
        let eq = ProxOracle::EqualityConjugate { b: vec![0.0] };
        let c = conjugate_prox_coefficients(&eq, 2.0).unwrap();
        assert_eq!((c.eta, c.varrho), (1.0, -2.0));
        assert!(matches!(
            conjugate_prox_coefficients(&ProxOracle::NonNeg, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn affine_form_matches_prox() {
        let b = vec![1.0, -2.0, 0.5];
        let u = [0.3, 4.0, -1.0];
        for o in [
            ProxOracle::LeastSquaresConjugate { b: b.clone() },
            ProxOracle::EqualityConjugate { b: b.clone() },
        ] {
            for sigma in [0.1, 1.0, 7.0] {
                let c = conjugate_prox_coefficients(&o, sigma).unwrap();
                let p = o.prox(sigma, &u).unwrap();
                for i in 0..3 {
                    assert!((p[i] - (c.eta * u[i] + c.varrho * b[i])).abs() < 1e-14);
                }
                let m = moreau_prox(&o, sigma, &u).unwrap();
                for i in 0..3 {
                    assert!((p[i] - m[i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn variational_check() {
        let o = ProxOracle::L1 { mu: 0.7 };
        let v = [1.0, -0.2, 3.0];
        let cands = vec![vec![0.0; 3], vec![1.0, 1.0, 1.0], vec![-2.0, 0.5, 2.0]];
        assert!(check_prox_variational(&o, 1.3, &v, &cands).unwrap());
        let p: Vec<f64> = o.prox(1.3, &v).unwrap().iter().map(|x| x + 0.1).collect();
        assert!(!satisfies_prox_inequality(&o, 1.3, &v, &p, &cands).unwrap());
        assert!(check_prox_variational(&ProxOracle::Zero, 1.0, &v, &cands).unwrap());
    }

    #[test]
    fn dimension_checked() {
        let o = ProxOracle::LeastSquaresConjugate { b: vec![1.0, 2.0] };
        assert!(matches!(o.prox(1.0, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn indicator_values() {
        assert_eq!(ProxOracle::NonNeg.value(&[-1.0]), ExtValue::PosInf);
        assert_eq!(ProxOracle::Simplex.value(&[0.25, 0.75]), ExtValue::Finite(0.0));
        assert_eq!(ExtValue::Finite(1.0) + ExtValue::PosInf, ExtValue::PosInf);
    }

    #[test]
    fn rejects_nonpositive_mu() {
        assert!(ProxOracle::l1(0.0).is_err());
        assert!(ProxOracle::l1(0.5).is_ok());
    }
}
