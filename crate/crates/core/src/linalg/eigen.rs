use crate::error::{check_finite, check_len, Error, Result};

/// Largest order accepted by the dense eigenvalue path.
pub const DEFAULT_DENSE_CAP: usize = 600;

const EPS: f64 = f64::EPSILON;
const MAX_ITS_PER_EIGENVALUE: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Square matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseSquareMatrix {
    order: usize,
    data: Vec<f64>,
}

impl DenseSquareMatrix {
    pub fn new(order: usize, data: Vec<f64>) -> Result<Self> {
        check_len("square matrix storage", order * order, data.len())?;
        Ok(Self { order, data })
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            check_len("square matrix row", n, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self { order: n, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.order + j] = v;
    }

    /// `a·M + b·I`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        let mut out = Self {
            order: self.order,
            data: self.data.iter().map(|v| a * v).collect(),
        };
        for i in 0..self.order {
            out.data[i * self.order + i] += b;
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("square matrix input", self.order, x.len())?;
        if self.order == 0 {
            return Ok(Vec::new());
        }
        Ok(self
            .data
            .chunks_exact(self.order)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn transpose(&self) -> Self {
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_len("matrix product order", self.order, other.order)?;
        let n = self.order;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenMethod {
    DenseQr,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EigenReport {
    /// Sorted by modulus, then real part, then imaginary part.
    pub eigenvalues: Vec<Complex>,
    pub max_modulus: f64,
    pub method: EigenMethod,
}

pub fn dense_eigenvalues(m: &DenseSquareMatrix) -> Result<EigenReport> {
    dense_eigenvalues_capped(m, DEFAULT_DENSE_CAP)
}

/// All eigenvalues via balancing, Hessenberg reduction and shifted QR.
pub fn dense_eigenvalues_capped(m: &DenseSquareMatrix, cap: usize) -> Result<EigenReport> {
    let n = m.order;
    if n > cap {
        return Err(Error::CapExceeded { order: n, cap });
    }
    check_finite("eigenvalue input", &m.data)?;
    let mut a: Vec<Vec<f64>> = m.data.chunks(n.max(1)).take(n).map(<[f64]>::to_vec).collect();
    balance(&mut a);
    hessenberg(&mut a);
    let mut eig = hqr(&mut a)?;
    eig.sort_by(|p, q| {
        p.modulus()
            .total_cmp(&q.modulus())
            .then(p.re.total_cmp(&q.re))
            .then(p.im.total_cmp(&q.im))
    });
    let max_modulus = eig.last().map_or(0.0, Complex::modulus);
    Ok(EigenReport {
        eigenvalues: eig,
        max_modulus,
        method: EigenMethod::DenseQr,
    })
}

/// Diagonal similarity by powers of two so row and column norms are comparable.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

/// Reduction to upper Hessenberg form by stabilized elementary similarities.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for m in 1..n.saturating_sub(1) {
        let mut x = 0.0f64;
        let mut piv = m;
        for j in m..n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                piv = j;
            }
        }
        if piv != m {
            a.swap(piv, m);
            for row in a.iter_mut() {
                row.swap(piv, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..n {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut() {
                        row[m] += y * row[i];
                    }
                }
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        for v in row.iter_mut().take(i.saturating_sub(1)) {
            *v = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
#[allow(unused_assignments)]
fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex>> {
    let n = a.len() as isize;
    let mut wr = vec![Complex::new(0.0, 0.0); n as usize];
    macro_rules! at {
        ($i:expr, $j:expr) => {
            a[($i) as usize][($j) as usize]
        };
    }
    let mut anorm = 0.0;
    for i in 0..n {
        for j in (i - 1).max(0)..n {
            anorm += at!(i, j).abs();
        }
    }
    let mut nn = n - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r, mut s, mut w, mut x, mut y, mut z) = (0.0f64, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    while nn >= 0 {
        let mut its = 0;
        let mut l;
        loop {
            l = nn;
            while l > 0 {
                s = at!(l - 1, l - 1).abs() + at!(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at!(l, l - 1).abs() <= EPS * s {
                    at!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            x = at!(nn, nn);
            if l == nn {
                wr[nn as usize] = Complex::new(x + t, 0.0);
                nn -= 1;
            } else {
                y = at!(nn - 1, nn - 1);
                w = at!(nn, nn - 1) * at!(nn - 1, nn);
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[(nn - 1) as usize] = Complex::new(x + z, 0.0);
                        wr[nn as usize] = Complex::new(if z != 0.0 { x - w / z } else { x + z }, 0.0);
                    } else {
                        wr[nn as usize] = Complex::new(x + p, -z);
                        wr[(nn - 1) as usize] = Complex::new(x + p, z);
                    }
                    nn -= 2;
                } else {
                    if its == MAX_ITS_PER_EIGENVALUE {
                        return Err(Error::NoConvergence(its));
                    }
                    if its > 0 && its % 10 == 0 {
                        // exceptional shift
                        t += x;
                        for i in 0..=nn {
                            at!(i, i) -= x;
                        }
                        s = at!(nn, nn - 1).abs() + at!(nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    while m >= l {
                        z = at!(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / at!(m + 1, m) + at!(m, m + 1);
                        q = at!(m + 1, m + 1) - z - r - s;
                        r = at!(m + 2, m + 1);
                        s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = at!(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (at!(m - 1, m - 1).abs() + z.abs() + at!(m + 1, m + 1).abs());
                        if u <= EPS * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m..(nn - 1) {
                        at!(i + 2, i) = 0.0;
                        if i != m {
                            at!(i + 2, i - 1) = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = at!(k, k - 1);
                            q = at!(k + 1, k - 1);
                            r = 0.0;
                            if k + 1 != nn {
                                r = at!(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    at!(k, k - 1) = -at!(k, k - 1);
                                }
                            } else {
                                at!(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                p = at!(k, j) + q * at!(k + 1, j);
                                if k + 1 != nn {
                                    p += r * at!(k + 2, j);
                                    at!(k + 2, j) -= p * z;
                                }
                                at!(k + 1, j) -= p * y;
                                at!(k, j) -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                p = x * at!(i, k) + y * at!(i, k + 1);
                                if k + 1 != nn {
                                    p += z * at!(i, k + 2);
                                    at!(i, k + 2) -= p * r;
                                }
                                at!(i, k + 1) -= p * q;
                                at!(i, k) -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if l + 1 >= nn {
                break;
            }
        }
    }
    Ok(wr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eig(rows: &[Vec<f64>]) -> Vec<Complex> {
        dense_eigenvalues(&DenseSquareMatrix::from_rows(rows).unwrap())
            .unwrap()
            .eigenvalues
    }

    #[test]
    fn diagonal() {
        let e = eig(&[vec![2.0, 0.0], vec![0.0, -1.0]]);
        assert_eq!(e, vec![Complex::new(-1.0, 0.0), Complex::new(2.0, 0.0)]);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let e = eig(&[vec![0.0, 1.0], vec![-1.0, 0.0]]);
        assert_eq!(e.len(), 2);
        for v in &e {
            assert!(v.re.abs() < 1e-15);
            assert!((v.im.abs() - 1.0).abs() < 1e-15);
        }
        assert!(e[0].im < 0.0 && e[1].im > 0.0);
    }

    #[test]
    fn empty_and_scalar() {
        assert!(eig(&[]).is_empty());
        assert_eq!(eig(&[vec![-3.5]]), vec![Complex::new(-3.5, 0.0)]);
    }

    #[test]
    fn companion_matrix_roots() {
        // (λ−1)(λ−2)(λ−3)(λ−4) = λ⁴ − 10λ³ + 35λ² − 50λ + 24
        let e = eig(&[
            vec![10.0, -35.0, 50.0, -24.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ]);
        for (v, want) in e.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((v.re - want).abs() < 1e-10 && v.im.abs() < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let m = DenseSquareMatrix::identity(5);
        assert!(matches!(
            dense_eigenvalues_capped(&m, 4),
            Err(Error::CapExceeded { order: 5, cap: 4 })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let m = DenseSquareMatrix::new(1, vec![f64::INFINITY]).unwrap();
        assert!(dense_eigenvalues(&m).is_err());
    }

    #[test]
    fn affine_shift() {
        let m = DenseSquareMatrix::identity(2).affine(2.0, -1.0);
        assert_eq!(m, DenseSquareMatrix::identity(2));
    }
}
