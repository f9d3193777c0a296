use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{check_finite, check_len, Error, Result};
use crate::rng::Stream;

pub const DEFAULT_NORM_TOL: f64 = 1e-6;
pub const DEFAULT_NORM_MAX_ITER: usize = 500;

const UNSET: u64 = u64::MAX;

#[derive(Clone, Debug)]
enum Storage {
    /// Row-major `rows × cols`.
    Dense(Vec<f64>),
    Sparse(Csr),
}

#[derive(Clone, Debug)]
struct Csr {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// A real `p × q` matrix, dense or compressed-row, with a cached
/// certified upper bound on its spectral norm.
#[derive(Debug)]
pub struct LinearMap {
    rows: usize,
    cols: usize,
    storage: Storage,
    norm_bound: AtomicU64,
}

impl Clone for LinearMap {
    fn clone(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            storage: self.storage.clone(),
            norm_bound: AtomicU64::new(self.norm_bound.load(Ordering::Relaxed)),
        }
    }
}

/// Outcome of power iteration on `KᵀK`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormEstimate {
    /// Estimate of `‖K‖`, inflated by `1 + tol` when not converged.
    pub estimate: f64,
    /// `estimate / (1 − tol)`; what step-size gates compare against.
    pub bound: f64,
    pub iterations: usize,
    /// `false` flags low confidence (iteration budget exhausted).
    pub converged: bool,
}

impl LinearMap {
    pub fn dense(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("dense matrix storage", rows * cols, data.len())?;
        check_finite("dense matrix entries", &data)?;
        Ok(Self::from_storage(rows, cols, Storage::Dense(data)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        let q = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(p * q);
        for r in rows {
            check_len("matrix row", q, r.len())?;
            data.extend_from_slice(r);
        }
        Self::dense(p, q, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n]).expect("finite")
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_storage(rows, cols, Storage::Dense(vec![0.0; rows * cols]))
    }

    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self::dense(n, n, data)
    }

    /// Sparse map from 0-based `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(Error::Contract(format!(
                    "triplet index ({i}, {j}) out of range for {rows}×{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("sparse matrix entries"));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        // stable sort keeps duplicate summation order equal to input order
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self::from_storage(
            rows,
            cols,
            Storage::Sparse(Csr {
                indptr,
                indices,
                values,
            }),
        ))
    }

    fn from_storage(rows: usize, cols: usize, storage: Storage) -> Self {
        Self {
            rows,
            cols,
            storage,
            norm_bound: AtomicU64::new(UNSET),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Stored entries (all entries for dense storage).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Sparse(c) => c.values.len(),
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse(c) => {
                let mut out = vec![0.0; self.rows * self.cols];
                for i in 0..self.rows {
                    for k in c.indptr[i]..c.indptr[i + 1] {
                        out[i * self.cols + c.indices[k]] += c.values[k];
                    }
                }
                out
            }
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let d = self.to_dense();
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        d.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// The entries as 0-based triplets in row-major order (zeros skipped for dense storage).
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            Storage::Dense(d) => d
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(k, &v)| (k / self.cols, k % self.cols, v))
                .collect(),
            Storage::Sparse(c) => (0..self.rows)
                .flat_map(|i| (c.indptr[i]..c.indptr[i + 1]).map(move |k| (i, c.indices[k], c.values[k])))
                .collect(),
        }
    }

    /// `factor · K` with the same storage kind; the cached bound is scaled too.
    pub fn scaled(&self, factor: f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(d) => Storage::Dense(d.iter().map(|v| v * factor).collect()),
            Storage::Sparse(c) => Storage::Sparse(Csr {
                indptr: c.indptr.clone(),
                indices: c.indices.clone(),
                values: c.values.iter().map(|v| v * factor).collect(),
            }),
        };
        let out = Self::from_storage(self.rows, self.cols, storage);
        if let Some(b) = self.cached_norm_bound() {
            out.store_bound(b * factor.abs());
        }
        out
    }

    /// Submatrix keeping only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Result<Self> {
        let d = self.to_dense();
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &i in keep {
            if i >= self.rows {
                return Err(Error::Contract(format!("row {i} out of range")));
            }
            data.extend_from_slice(&d[i * self.cols..(i + 1) * self.cols]);
        }
        Self::dense(keep.len(), self.cols, data)
    }

    /// `y = Kx`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("matvec input", self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `x = Kᵀy`.
    pub fn adjoint_matvec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("adjoint matvec input", self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        self.adjoint_matvec_into(y, &mut out);
        Ok(out)
    }

    /// Unchecked kernel; callers guarantee `x.len() == cols`, `out.len() == rows`.
    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.storage {
            Storage::Dense(d) => {
                if self.cols == 0 {
                    out.iter_mut().for_each(|v| *v = 0.0);
                    return;
                }
                for (o, row) in out.iter_mut().zip(d.chunks_exact(self.cols)) {
                    *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            Storage::Sparse(c) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for k in c.indptr[i]..c.indptr[i + 1] {
                        s += c.values[k] * x[c.indices[k]];
                    }
                    *o = s;
                }
            }
        }
    }

    pub(crate) fn adjoint_matvec_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match &self.storage {
            Storage::Dense(d) => {
                if self.cols == 0 {
                    return;
                }
                for (&yi, row) in y.iter().zip(d.chunks_exact(self.cols)) {
                    if yi == 0.0 {
                        continue;
                    }
                    for (o, a) in out.iter_mut().zip(row) {
                        *o += a * yi;
                    }
                }
            }
            Storage::Sparse(c) => {
                for (i, &yi) in y.iter().enumerate() {
                    for k in c.indptr[i]..c.indptr[i + 1] {
                        out[c.indices[k]] += c.values[k] * yi;
                    }
                }
            }
        }
    }

    /// Power iteration on `KᵀK` from a seeded random unit vector.
    ///
    /// Each step yields the lower bound `‖KᵀKv‖/‖Kv‖ ≤ ‖K‖`; iteration stops
    /// once the relative increase drops below `tol²`. The cached bound is set
    /// to `estimate / (1 − tol)`, and never below [`Self::crude_norm_bound`]
    /// when the budget runs out.
    pub fn estimate_norm(&self, tol: f64, max_iter: usize, seed: u64) -> Result<NormEstimate> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "norm tolerance must lie in (0,1), got {tol}"
            )));
        }
        let zero = NormEstimate {
            estimate: 0.0,
            bound: 0.0,
            iterations: 0,
            converged: true,
        };
        if self.rows == 0 || self.cols == 0 || self.nnz() == 0 {
            self.store_bound(0.0);
            return Ok(zero);
        }
        let mut stream = Stream::new(seed);
        let mut v = stream.normal_vec(self.cols);
        let nv = super::norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let mut w = vec![0.0; self.rows];
        let mut u = vec![0.0; self.cols];
        let mut best = 0.0f64;
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=max_iter.max(1) {
            iterations = it;
            self.matvec_into(&v, &mut w);
            let nw = super::norm(&w);
            if nw == 0.0 {
                // start vector in the null space; restart from a fresh draw
                v = stream.normal_vec(self.cols);
                let nv = super::norm(&v);
                v.iter_mut().for_each(|x| *x /= nv);
                continue;
            }
            self.adjoint_matvec_into(&w, &mut u);
            let nu = super::norm(&u);
            let est = (nu / nw).max(nw);
            let prev = best;
            best = best.max(est);
            if nu == 0.0 {
                converged = true;
                break;
            }
            v.iter_mut().zip(&u).for_each(|(a, b)| *a = b / nu);
            if it > 1 && (best - prev) <= tol * tol * best {
                converged = true;
                break;
            }
        }
        if best == 0.0 {
            self.store_bound(0.0);
            return Ok(NormEstimate { iterations, ..zero });
        }
        let estimate = if converged { best } else { best * (1.0 + tol) };
        let mut bound = estimate / (1.0 - tol);
        if !converged {
            bound = bound.max(self.crude_norm_bound());
        }
        self.store_bound(bound);
        Ok(NormEstimate {
            estimate,
            bound,
            iterations,
            converged,
        })
    }

    /// `min(‖K‖_F, √(‖K‖₁‖K‖_∞))`, an upper bound on `‖K‖` needing no iteration.
    pub fn crude_norm_bound(&self) -> f64 {
        let mut col = vec![0.0; self.cols];
        let mut row = vec![0.0; self.rows];
        let mut fro = 0.0;
        for (i, j, v) in self.triplets() {
            col[j] += v.abs();
            row[i] += v.abs();
            fro += v * v;
        }
        let one = col.iter().copied().fold(0.0, f64::max);
        let inf = row.iter().copied().fold(0.0, f64::max);
        fro.sqrt().min((one * inf).sqrt())
    }

    /// Cached certified bound, computing it with default settings on first use.
    pub fn norm_bound(&self) -> f64 {
        match self.cached_norm_bound() {
            Some(b) => b,
            None => {
                self.estimate_norm(DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER, 0)
                    .expect("default tolerance is valid")
                    .bound
            }
        }
    }

    pub fn cached_norm_bound(&self) -> Option<f64> {
        match self.norm_bound.load(Ordering::Relaxed) {
            UNSET => None,
            bits => Some(f64::from_bits(bits)),
        }
    }

    fn store_bound(&self, bound: f64) {
        self.norm_bound.store(bound.to_bits(), Ordering::Relaxed);
    }
}

/// `±K` or `±Kᵀ` over a shared [`LinearMap`].
///
/// The mirrored operator `−Kᵀ` is how the roles of primal and dual are
/// exchanged without copying the matrix.
#[derive(Clone, Debug)]
pub struct Operator {
    map: Arc<LinearMap>,
    transposed: bool,
    negated: bool,
}

impl Operator {
    pub fn new(map: Arc<LinearMap>) -> Self {
        Self {
            map,
            transposed: false,
            negated: false,
        }
    }

    /// `−Kᵀ` relative to `self`.
    pub fn mirrored(&self) -> Self {
        Self {
            map: Arc::clone(&self.map),
            transposed: !self.transposed,
            negated: !self.negated,
        }
    }

    pub fn map(&self) -> &Arc<LinearMap> {
        &self.map
    }

    pub fn is_mirrored(&self) -> bool {
        self.transposed
    }

    pub fn rows(&self) -> usize {
        if self.transposed {
            self.map.cols()
        } else {
            self.map.rows()
        }
    }

    pub fn cols(&self) -> usize {
        if self.transposed {
            self.map.rows()
        } else {
            self.map.cols()
        }
    }

    pub fn norm_bound(&self) -> f64 {
        self.map.norm_bound()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("operator input", self.cols(), x.len())?;
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("operator adjoint input", self.rows(), y.len())?;
        let mut out = vec![0.0; self.cols()];
        self.apply_adjoint_into(y, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        if self.transposed {
            self.map.adjoint_matvec_into(x, out);
        } else {
            self.map.matvec_into(x, out);
        }
        if self.negated {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    }

    pub(crate) fn apply_adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        if self.transposed {
            self.map.matvec_into(y, out);
        } else {
            self.map.adjoint_matvec_into(y, out);
        }
        if self.negated {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    }
}
