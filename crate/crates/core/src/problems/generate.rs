use std::path::PathBuf;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::mtx::read_matrix_market;
use crate::error::{Error, Result};
use crate::linalg::{LinearMap, DEFAULT_NORM_MAX_ITER, DEFAULT_NORM_TOL};
use crate::problem::SaddleProblem;
use crate::rng::{Stream, GENERATOR_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Lasso,
    Nnls,
    MatrixGame,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Lasso => "lasso",
            Family::Nnls => "nnls",
            Family::MatrixGame => "matrix-game",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorCase {
    /// i.i.d. standard normal entries.
    Normal,
    /// Column recurrence `K₁ = A₁/√(1−v²)`, `K_j = vK_{j−1} + A_j`.
    Correlated,
    /// i.i.d. uniform entries on `[−1, 1]`.
    Uniform,
    /// Each entry nonzero with probability `d`, value standard normal.
    SparseNormal,
    /// Each entry nonzero with probability `d`, value uniform on `[0, 1]`.
    SparseUniform,
    /// Matrix read from `path`; `b` standard normal.
    MatrixMarket,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InstanceSpec {
    pub family: Family,
    pub case: GeneratorCase,
    pub p: usize,
    pub q: usize,
    /// Nonzeros in the planted solution.
    pub s: usize,
    /// Column correlation for [`GeneratorCase::Correlated`].
    pub v: f64,
    /// Density for the sparse cases.
    pub d: f64,
    /// LASSO weight.
    pub mu: f64,
    pub seed: u64,
    /// Scale `K` to unit norm estimate before forming `b`.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

pub const DEFAULT_LASSO_MU: f64 = 0.1;
const NOISE_STD: f64 = 0.1;

impl InstanceSpec {
    pub fn lasso(p: usize, q: usize, s: usize, seed: u64) -> Self {
        Self {
            family: Family::Lasso,
            case: GeneratorCase::Normal,
            p,
            q,
            s,
            v: 0.0,
            d: 1.0,
            mu: DEFAULT_LASSO_MU,
            seed,
            normalize: false,
            path: None,
        }
    }

    pub fn lasso_correlated(p: usize, q: usize, s: usize, v: f64, seed: u64) -> Self {
        Self {
            case: GeneratorCase::Correlated,
            v,
            ..Self::lasso(p, q, s, seed)
        }
    }

    pub fn nnls_random(case: GeneratorCase, p: usize, q: usize, s: usize, d: f64, seed: u64) -> Self {
        Self {
            family: Family::Nnls,
            case,
            d,
            ..Self::lasso(p, q, s, seed)
        }
    }

    pub fn nnls_matrix_market(path: PathBuf, seed: u64) -> Self {
        Self {
            family: Family::Nnls,
            case: GeneratorCase::MatrixMarket,
            p: 0,
            q: 0,
            s: 0,
            path: Some(path),
            ..Self::lasso(0, 0, 0, seed)
        }
    }

    pub fn matrix_game(case: GeneratorCase, p: usize, q: usize, seed: u64) -> Self {
        Self {
            family: Family::MatrixGame,
            case,
            s: 0,
            ..Self::lasso(p, q, 0, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Contract(m));
        use GeneratorCase::*;
        let allowed: &[GeneratorCase] = match self.family {
            Family::Lasso => &[Normal, Correlated],
            Family::Nnls => &[SparseNormal, SparseUniform, MatrixMarket],
            Family::MatrixGame => &[Uniform, Normal],
        };
        if !allowed.contains(&self.case) {
            return bad(format!(
                "case {:?} is not available for family {}",
                self.case,
                self.family.name()
            ));
        }
        if self.case == MatrixMarket {
            if self.path.is_none() {
                return bad("Matrix Market instances need a file path".into());
            }
            return Ok(());
        }
        if self.p == 0 || self.q == 0 {
            return bad(format!("dimensions must be positive, got {}×{}", self.p, self.q));
        }
        if self.s > self.q {
            return bad(format!("sparsity s = {} exceeds q = {}", self.s, self.q));
        }
        if self.case == Correlated && !(self.v > 0.0 && self.v < 1.0) {
            return bad(format!("correlation v = {} outside (0, 1)", self.v));
        }
        if matches!(self.case, SparseNormal | SparseUniform) && !(self.d > 0.0 && self.d < 1.0) {
            return bad(format!("density d = {} outside (0, 1)", self.d));
        }
        if self.family == Family::Lasso && !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("μ = {} must be positive", self.mu));
        }
        Ok(())
    }

    /// Hex digest of the spec and the generator version.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(GENERATOR_VERSION.to_le_bytes());
        h.update(serde_json::to_vec(self).expect("spec serializes"));
        h.finalize().iter().take(16).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub spec: InstanceSpec,
    pub seed: u64,
    pub generator_version: u32,
    pub spec_hash: String,
}

#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub problem: SaddleProblem,
    pub k: Arc<LinearMap>,
    /// Planted solution, when the recipe constructs one.
    pub x_star: Option<Vec<f64>>,
    pub noise: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl GeneratedInstance {
    pub fn spec(&self) -> &InstanceSpec {
        &self.provenance.spec
    }

    pub fn b(&self) -> Option<&[f64]> {
        self.problem.b()
    }

    /// Canonical byte encoding of `K`, `b` and `x*`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"GRPDAINS");
        out.extend_from_slice(&GENERATOR_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.k.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(self.k.cols() as u64).to_le_bytes());
        let trip = self.k.triplets();
        out.extend_from_slice(&(trip.len() as u64).to_le_bytes());
        for (i, j, v) in trip {
            out.extend_from_slice(&(i as u64).to_le_bytes());
            out.extend_from_slice(&(j as u64).to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.b(), self.x_star.as_deref()] {
            let v = v.unwrap_or(&[]);
            out.extend_from_slice(&(v.len() as u64).to_le_bytes());
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }
}

fn dense(p: usize, q: usize, mut entry: impl FnMut() -> f64) -> Result<LinearMap> {
    let data: Vec<f64> = (0..p * q).map(|_| entry()).collect();
    LinearMap::dense(p, q, data)
}

fn planted(rng: &mut Stream, q: usize, s: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut x = vec![0.0; q];
    for i in rng.choose(q, s) {
        x[i] = rng.uniform_in(lo, hi);
    }
    x
}

/// Builds the instance described by `spec`; deterministic in `(spec, generator version)`.
pub fn generate(spec: &InstanceSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let mut rng = Stream::new(spec.seed);
    let (p, q) = (spec.p, spec.q);
    let mut k = match spec.case {
        GeneratorCase::Normal => dense(p, q, || rng.normal())?,
        GeneratorCase::Uniform => dense(p, q, || rng.uniform_in(-1.0, 1.0))?,
        GeneratorCase::Correlated => {
            let a: Vec<f64> = (0..p * q).map(|_| rng.normal()).collect();
            let mut data = vec![0.0; p * q];
            let first = 1.0 / (1.0 - spec.v * spec.v).sqrt();
            for i in 0..p {
                data[i * q] = a[i * q] * first;
                for j in 1..q {
                    data[i * q + j] = spec.v * data[i * q + j - 1] + a[i * q + j];
                }
            }
            LinearMap::dense(p, q, data)?
        }
        GeneratorCase::SparseNormal | GeneratorCase::SparseUniform => {
            let mut trip = Vec::new();
            for i in 0..p {
                for j in 0..q {
                    if rng.uniform() < spec.d {
                        let v = if spec.case == GeneratorCase::SparseNormal {
                            rng.normal()
                        } else {
                            rng.uniform()
                        };
                        trip.push((i, j, v));
                    }
                }
            }
            LinearMap::from_triplets(p, q, &trip)?
        }
        GeneratorCase::MatrixMarket => read_matrix_market(spec.path.as_ref().expect("validated"))?,
    };
    if spec.normalize {
        let l = k
            .estimate_norm(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER, spec.seed)?
            .estimate;
        if l > 0.0 {
            k = k.scaled(1.0 / l);
        }
    }
    let k = Arc::new(k);
    let (p, q) = (k.rows(), k.cols());
    let (problem, x_star, noise) = match (spec.family, spec.case) {
        (Family::Lasso, _) => {
            let x = planted(&mut rng, q, spec.s, -10.0, 10.0);
            let nu: Vec<f64> = (0..p).map(|_| NOISE_STD * rng.normal()).collect();
            let b: Vec<f64> = k.matvec(&x)?.iter().zip(&nu).map(|(a, e)| a + e).collect();
            (SaddleProblem::lasso(Arc::clone(&k), b, spec.mu)?, Some(x), Some(nu))
        }
        (Family::Nnls, GeneratorCase::MatrixMarket) => {
            let b = rng.normal_vec(p);
            (SaddleProblem::nnls(Arc::clone(&k), b)?, None, None)
        }
        (Family::Nnls, _) => {
            let x = planted(&mut rng, q, spec.s, 0.0, 100.0);
            let b = k.matvec(&x)?;
            (SaddleProblem::nnls(Arc::clone(&k), b)?, Some(x), None)
        }
        (Family::MatrixGame, _) => (SaddleProblem::matrix_game(Arc::clone(&k))?, None, None),
    };
    Ok(GeneratedInstance {
        problem,
        k,
        x_star,
        noise,
        provenance: Provenance {
            spec: spec.clone(),
            seed: spec.seed,
            generator_version: GENERATOR_VERSION,
            spec_hash: spec.hash(),
        },
    })
}
