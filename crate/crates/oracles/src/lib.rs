//! Brute-force reference computations.
//!
//! Everything here is deliberately slow and independent of `grpda-core`:
//! tests compare the production code paths against these enumerations.

/// Cyclic Jacobi eigenvalue iteration for a symmetric matrix.
///
/// Returns the eigenvalues sorted ascending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[i][j] * m[i][j];
                }
            }
        }
        let scale: f64 = m.iter().flatten().map(|v| v * v).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

/// Largest singular value of a dense row-major matrix via Jacobi on KᵀK.
pub fn spectral_norm(k: &[Vec<f64>]) -> f64 {
    let p = k.len();
    let q = if p == 0 { 0 } else { k[0].len() };
    let mut ktk = vec![vec![0.0; q]; q];
    for i in 0..q {
        for j in 0..q {
            ktk[i][j] = (0..p).map(|r| k[r][i] * k[r][j]).sum();
        }
    }
    jacobi_eigenvalues(&ktk).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Gaussian elimination with partial pivoting. `None` when singular.
pub fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

/// Euclidean projection onto the unit simplex by enumerating every support.
///
/// For each nonempty index set the equality-constrained minimizer on that
/// face is formed; among the feasible ones the closest to `v` is returned.
pub fn simplex_projection(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert!(n > 0 && n <= 20, "enumeration is exponential in dimension");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sum: f64 = support.iter().map(|&i| v[i]).sum();
        let shift = (sum - 1.0) / support.len() as f64;
        let mut x = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            x[i] = v[i] - shift;
            if x[i] < 0.0 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let d: f64 = x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.expect("some vertex is always feasible").1
}

/// LASSO minimizer `½‖Kx−b‖² + μ‖x‖₁` by enumerating supports and sign patterns.
///
/// Intended for tiny problems (q ≤ 8). Returns the candidate with the lowest
/// objective among those satisfying the full KKT system.
pub fn lasso_enumerate(k: &[Vec<f64>], b: &[f64], mu: f64) -> Vec<f64> {
    let p = k.len();
    let q = k[0].len();
    assert!(q <= 8);
    let objective = |x: &[f64]| -> f64 {
        let mut r = 0.0;
        for i in 0..p {
            let kx: f64 = (0..q).map(|j| k[i][j] * x[j]).sum();
            r += (kx - b[i]).powi(2);
        }
        0.5 * r + mu * x.iter().map(|v| v.abs()).sum::<f64>()
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut patterns = 1usize;
    for _ in 0..q {
        patterns *= 3;
    }
    for code in 0..patterns {
        let mut signs = vec![0i32; q];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = (c % 3) as i32 - 1;
            c /= 3;
        }
        let support: Vec<usize> = (0..q).filter(|&j| signs[j] != 0).collect();
        let mut x = vec![0.0; q];
        if !support.is_empty() {
            let m = support.len();
            let mut a = vec![vec![0.0; m]; m];
            let mut rhs = vec![0.0; m];
            for (ri, &jr) in support.iter().enumerate() {
                for (ci, &jc) in support.iter().enumerate() {
                    a[ri][ci] = (0..p).map(|i| k[i][jr] * k[i][jc]).sum();
                }
                rhs[ri] = (0..p).map(|i| k[i][jr] * b[i]).sum::<f64>() - mu * signs[jr] as f64;
            }
            let Some(xs) = solve_dense(&a, &rhs) else { continue };
            let mut ok = true;
            for (ri, &j) in support.iter().enumerate() {
                if xs[ri] * signs[j] as f64 <= 0.0 {
                    ok = false;
                }
                x[j] = xs[ri];
            }
            if !ok {
                continue;
            }
        }
        // off-support subgradient condition |Kⱼᵀ(b − Kx)| ≤ μ
        let resid: Vec<f64> = (0..p)
            .map(|i| b[i] - (0..q).map(|j| k[i][j] * x[j]).sum::<f64>())
            .collect();
        let ok = (0..q).filter(|&j| signs[j] == 0).all(|j| {
            let c: f64 = (0..p).map(|i| k[i][j] * resid[i]).sum();
            c.abs() <= mu * (1.0 + 1e-9)
        });
        if !ok {
            continue;
        }
        let f = objective(&x);
        if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    best.expect("LASSO always has a KKT point").1
}

/// Matrix-game gap `max_{ŷ∈Δp} ŷᵀKx − min_{x̂∈Δq} yᵀKx̂` by enumerating all vertex pairs.
pub fn matrix_game_gap_vertices(k: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    let p = k.len();
    let q = k[0].len();
    let bilinear = |xx: &[f64], yy: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..q {
                s += yy[i] * k[i][j] * xx[j];
            }
        }
        s
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..p {
        let mut ei = vec![0.0; p];
        ei[i] = 1.0;
        for j in 0..q {
            let mut ej = vec![0.0; q];
            ej[j] = 1.0;
            best = best.max(bilinear(x, &ei) - bilinear(&ej, y));
        }
    }
    best
}
