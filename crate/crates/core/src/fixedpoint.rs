//! One relaxed-GRPDA sweep as the fixed-point map `𝔾 = 𝕊∘𝕋` on `ξ = (z; x; y)`.
//!
//! `𝕋(ξ) = Tξ + ϑ₁` with
//!
//! ```text
//! T = [ I/ψ   (1−1/ψ)I            0    ]
//!     [ I/ψ   (1−1/ψ)I − ητσKᵀK   −ητKᵀ ]
//!     [ 0     ησK                 ηI   ]
//! ```
//!
//! `ϑ₁ = (0; −ϱτKᵀb; 0)`, and `𝕊` applies `Prox_{τg}` to the middle block
//! before adding `ϑ₂ = (0; 0; ϱb)`.

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::{dense_eigenvalues_capped, dist_sq, DenseSquareMatrix, EigenReport, Operator, DEFAULT_DENSE_CAP};
use crate::problem::SaddleProblem;
use crate::prox::{conjugate_prox_coefficients, ProxOracle};
use crate::rng::Stream;

/// Threshold on `max |λ(2T − I)|` for the spectral certificate.
pub const SPECTRAL_THRESHOLD: f64 = 1.0 + 1e-8;
pub const FIRM_SAMPLING_TOL: f64 = 1e-10;
pub const AVERAGED_SAMPLING_TOL: f64 = 1e-10;
pub const DEFAULT_SAMPLES: usize = 10_000;

/// The affine maps `𝕋`, `𝕊` for given `(τ, σ, ψ)`; applied matrix-free,
/// with the dense `T` formed on request.
#[derive(Clone, Debug)]
pub struct AffineFixedPointMap {
    k: Operator,
    g: ProxOracle,
    b: Vec<f64>,
    pub tau: f64,
    pub sigma: f64,
    pub psi: f64,
    pub eta: f64,
    pub varrho: f64,
}

/// Requires `f` to be least-squares or an equality constraint. `ψ` is only
/// required to exceed 1 so that maps beyond the proven range can be probed.
pub fn build_map(problem: &SaddleProblem, tau: f64, sigma: f64, psi: f64) -> Result<AffineFixedPointMap> {
    if !problem.is_affine_dual() {
        return Err(Error::Unsupported(
            "the fixed-point map needs f = ½‖·−b‖² or the indicator of {b}".into(),
        ));
    }
    if !(tau > 0.0 && sigma > 0.0 && tau.is_finite() && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("τ = {tau}, σ = {sigma} must be positive")));
    }
    if !(psi > 1.0 && psi.is_finite()) {
        return Err(Error::InvalidConfig(format!("ψ = {psi} must exceed 1")));
    }
    let c = conjugate_prox_coefficients(problem.fstar(), sigma)?;
    Ok(AffineFixedPointMap {
        k: problem.k().clone(),
        g: problem.g().clone(),
        b: problem.b().expect("affine dual carries b").to_vec(),
        tau,
        sigma,
        psi,
        eta: c.eta,
        varrho: c.varrho,
    })
}

impl AffineFixedPointMap {
    pub fn q(&self) -> usize {
        self.k.cols()
    }

    pub fn p(&self) -> usize {
        self.k.rows()
    }

    /// `2q + p`.
    pub fn order(&self) -> usize {
        2 * self.q() + self.p()
    }

    pub fn split<'v>(&self, xi: &'v [f64]) -> (&'v [f64], &'v [f64], &'v [f64]) {
        let q = self.q();
        (&xi[..q], &xi[q..2 * q], &xi[2 * q..])
    }

    fn check(&self, xi: &[f64]) -> Result<()> {
        check_len("fixed-point state", self.order(), xi.len())?;
        check_finite("fixed-point state", xi)
    }

    /// `Tξ` without the offset.
    pub fn apply_linear(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check(xi)?;
        Ok(self.linear(xi, 0.0))
    }

    /// `𝕋(ξ) = Tξ + ϑ₁`.
    pub fn apply_t(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check(xi)?;
        Ok(self.linear(xi, 1.0))
    }

    /// `𝕊(ξ) = Sξ + ϑ₂`.
    pub fn apply_s(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check(xi)?;
        Ok(self.prox_stage(xi.to_vec()))
    }

    /// `𝔾(ξ) = 𝕊(𝕋(ξ))`.
    pub fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check(xi)?;
        Ok(self.prox_stage(self.linear(xi, 1.0)))
    }

    /// `w = η(y + σKx) + offset·ϱb` gives the dual block; the middle block is `z' − τKᵀw`.
    fn linear(&self, xi: &[f64], offset: f64) -> Vec<f64> {
        let (z, x, y) = self.split(xi);
        let psi = self.psi;
        let mut kx = vec![0.0; self.p()];
        self.k.apply_into(x, &mut kx);
        let y_new: Vec<f64> = y
            .iter()
            .zip(&kx)
            .map(|(yi, k)| self.eta * (yi + self.sigma * k))
            .collect();
        let w: Vec<f64> = y_new
            .iter()
            .zip(&self.b)
            .map(|(v, bi)| v + offset * self.varrho * bi)
            .collect();
        let z_new: Vec<f64> = z
            .iter()
            .zip(x)
            .map(|(zi, xi)| zi / psi + (1.0 - 1.0 / psi) * xi)
            .collect();
        let mut ktw = vec![0.0; self.q()];
        self.k.apply_adjoint_into(&w, &mut ktw);
        let x_new: Vec<f64> = z_new.iter().zip(&ktw).map(|(a, g)| a - self.tau * g).collect();
        let mut out = z_new;
        out.extend(x_new);
        out.extend(y_new);
        out
    }

    fn prox_stage(&self, mut xi: Vec<f64>) -> Vec<f64> {
        let q = self.q();
        self.g.prox_in_place(self.tau, &mut xi[q..2 * q]);
        for (v, bi) in xi[2 * q..].iter_mut().zip(&self.b) {
            *v += self.varrho * bi;
        }
        xi
    }

    /// `ϑ₁ = (0; −ϱτKᵀb; 0)`.
    pub fn theta1(&self) -> Vec<f64> {
        let mut ktb = vec![0.0; self.q()];
        self.k.apply_adjoint_into(&self.b, &mut ktb);
        let mut out = vec![0.0; self.q()];
        out.extend(ktb.iter().map(|v| -self.varrho * self.tau * v));
        out.extend(std::iter::repeat(0.0).take(self.p()));
        out
    }

    /// `ϑ₂ = (0; 0; ϱb)`.
    pub fn theta2(&self) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.q()];
        out.extend(self.b.iter().map(|v| self.varrho * v));
        out
    }

    /// The dense matrix `T`, built block by block.
    pub fn dense_t(&self, cap: usize) -> Result<DenseSquareMatrix> {
        let (q, p, n) = (self.q(), self.p(), self.order());
        if n > cap {
            return Err(Error::CapExceeded { order: n, cap });
        }
        let kd = self.dense_k();
        let (psi, eta, tau, sigma) = (self.psi, self.eta, self.tau, self.sigma);
        let mut t = DenseSquareMatrix::zeros(n);
        for i in 0..q {
            t.set(i, i, 1.0 / psi);
            t.set(i, q + i, 1.0 - 1.0 / psi);
            t.set(q + i, i, 1.0 / psi);
            t.set(q + i, q + i, 1.0 - 1.0 / psi);
        }
        for i in 0..q {
            for j in 0..q {
                let ktk: f64 = (0..p).map(|r| kd[r * q + i] * kd[r * q + j]).sum();
                let v = t.get(q + i, q + j) - eta * tau * sigma * ktk;
                t.set(q + i, q + j, v);
            }
            for r in 0..p {
                t.set(q + i, 2 * q + r, -eta * tau * kd[r * q + i]);
            }
        }
        for r in 0..p {
            for j in 0..q {
                t.set(2 * q + r, q + j, eta * sigma * kd[r * q + j]);
            }
            t.set(2 * q + r, 2 * q + r, eta);
        }
        Ok(t)
    }

    /// Row-major `p × q` copy of the operator.
    fn dense_k(&self) -> Vec<f64> {
        let (p, q) = (self.p(), self.q());
        let mut out = vec![0.0; p * q];
        let mut e = vec![0.0; q];
        let mut col = vec![0.0; p];
        for j in 0..q {
            e[j] = 1.0;
            self.k.apply_into(&e, &mut col);
            for r in 0..p {
                out[r * q + j] = col[r];
            }
            e[j] = 0.0;
        }
        out
    }

    /// `2T − I`.
    pub fn reflected(&self, cap: usize) -> Result<DenseSquareMatrix> {
        Ok(self.dense_t(cap)?.affine(2.0, -1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertifyMode {
    Spectral,
    Sampling,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SamplingReport {
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs − rhs` seen (negative when every sample holds with room).
    pub worst_excess: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FirmReport {
    pub mode: CertifyMode,
    pub order: usize,
    pub eigen: Option<EigenReport>,
    pub max_modulus: Option<f64>,
    pub sampling: Option<SamplingReport>,
    pub passed: bool,
}

fn random_state(rng: &mut Stream, n: usize) -> Vec<f64> {
    rng.normal_vec(n)
}

/// Spectral mode: `max |λ(2T − I)| ≤ 1 + 1e-8`. Sampling mode:
/// `‖Tu − Tv‖² ≤ ⟨u − v, Tu − Tv⟩ + 1e-10` on random pairs.
pub fn certify_firm_nonexpansive(
    map: &AffineFixedPointMap,
    mode: CertifyMode,
    samples: usize,
    seed: u64,
) -> Result<FirmReport> {
    let n = map.order();
    match mode {
        CertifyMode::Spectral => {
            let eig = dense_eigenvalues_capped(&map.reflected(DEFAULT_DENSE_CAP)?, DEFAULT_DENSE_CAP)?;
            let m = eig.max_modulus;
            Ok(FirmReport {
                mode,
                order: n,
                eigen: Some(eig),
                max_modulus: Some(m),
                sampling: None,
                passed: m <= SPECTRAL_THRESHOLD,
            })
        }
        CertifyMode::Sampling => {
            let mut rng = Stream::new(seed);
            let mut violations = 0;
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..samples {
                let u = random_state(&mut rng, n);
                let v = random_state(&mut rng, n);
                let tu = map.apply_t(&u)?;
                let tv = map.apply_t(&v)?;
                let dt: Vec<f64> = tu.iter().zip(&tv).map(|(a, b)| a - b).collect();
                let lhs: f64 = dt.iter().map(|d| d * d).sum();
                let rhs: f64 = u.iter().zip(&v).zip(&dt).map(|((a, b), d)| (a - b) * d).sum();
                let excess = lhs - rhs;
                worst = worst.max(excess);
                if excess > FIRM_SAMPLING_TOL {
                    violations += 1;
                }
            }
            Ok(FirmReport {
                mode,
                order: n,
                eigen: None,
                max_modulus: None,
                sampling: Some(SamplingReport {
                    samples,
                    violations,
                    worst_excess: worst,
                    tolerance: FIRM_SAMPLING_TOL,
                }),
                passed: violations == 0,
            })
        }
    }
}

/// Samples `‖𝔾u − 𝔾v‖² ≤ ‖u − v‖² − ½‖(I − 𝔾)u − (I − 𝔾)v‖² + 1e-10`,
/// the 2/3-averaged inequality.
pub fn averagedness_check(map: &AffineFixedPointMap, samples: usize, seed: u64) -> Result<SamplingReport> {
    let n = map.order();
    let mut rng = Stream::new(seed);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let u = random_state(&mut rng, n);
        let v = random_state(&mut rng, n);
        let excess = averaged_excess(map, &u, &v)?;
        worst = worst.max(excess);
        if excess > AVERAGED_SAMPLING_TOL {
            violations += 1;
        }
    }
    Ok(SamplingReport {
        samples,
        violations,
        worst_excess: worst,
        tolerance: AVERAGED_SAMPLING_TOL,
    })
}

/// `‖𝔾u − 𝔾v‖² − ‖u − v‖² + ½‖(I − 𝔾)u − (I − 𝔾)v‖²` for one pair.
pub fn averaged_excess(map: &AffineFixedPointMap, u: &[f64], v: &[f64]) -> Result<f64> {
    let gu = map.apply(u)?;
    let gv = map.apply(v)?;
    let resid: f64 = u
        .iter()
        .zip(&gu)
        .zip(v.iter().zip(&gv))
        .map(|((a, ga), (b, gb))| {
            let d = (a - ga) - (b - gb);
            d * d
        })
        .sum();
    Ok(dist_sq(&gu, &gv) - dist_sq(u, v) + 0.5 * resid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearMap;
    use std::sync::Arc;

    fn eq_problem(k: LinearMap, b: Vec<f64>) -> SaddleProblem {
        SaddleProblem::equality_constrained(Arc::new(k), b, ProxOracle::Zero).unwrap()
    }

    #[test]
    fn theta1_equality_sign() {
        let k = LinearMap::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let m = build_map(&eq_problem(k, vec![3.0]), 0.5, 2.0, 1.5).unwrap();
        // ϱ = −σ ⇒ ϑ₁ = (0; στKᵀb; 0)
        assert_eq!(m.theta1(), vec![0.0, 0.0, 3.0, 6.0, 0.0]);
        assert_eq!(m.theta2(), vec![0.0, 0.0, 0.0, 0.0, -6.0]);
    }

    #[test]
    fn dense_matches_matrix_free() {
        let k = LinearMap::from_rows(&[vec![1.0, -2.0, 0.5], vec![0.3, 0.0, 1.0]]).unwrap();
        let p = SaddleProblem::lasso(Arc::new(k), vec![1.0, -1.0], 0.2).unwrap();
        let m = build_map(&p, 0.3, 0.7, 1.8).unwrap();
        let t = m.dense_t(600).unwrap();
        let xi: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let a = t.matvec(&xi).unwrap();
        let b = m.apply_linear(&xi).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_operator_spectrum() {
        let p = eq_problem(LinearMap::zeros(2, 3), vec![1.0, 1.0]);
        let m = build_map(&p, 1.0, 1.0, 2.0).unwrap();
        let r = certify_firm_nonexpansive(&m, CertifyMode::Spectral, 0, 0).unwrap();
        assert!(r.passed);
        for l in &r.eigen.unwrap().eigenvalues {
            assert!(l.im.abs() < 1e-12 && (l.re.abs() - 1.0).abs() < 1e-12);
        }
        assert_eq!(r.max_modulus, Some(1.0));
    }

    #[test]
    fn rejects_general_dual() {
        let k = Arc::new(LinearMap::identity(2));
        let p = SaddleProblem::matrix_game(k).unwrap();
        assert!(matches!(build_map(&p, 1.0, 1.0, 1.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn identical_points_have_zero_excess() {
        let k = LinearMap::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let m = build_map(&eq_problem(k, vec![3.0]), 0.1, 0.1, 2.0).unwrap();
        let u = vec![0.3, -1.0, 2.0, 0.5, 1.0];
        assert_eq!(averaged_excess(&m, &u, &u).unwrap(), 0.0);
    }
}
