//! Small dense linear algebra.
//!
//! Everything here is sized for kernel matrices of order ≤ a few hundred and
//! unitaries of order ≤ 4096. The symmetric eigensolver is cyclic Jacobi;
//! Hermitian matrices are diagonalized through the real symmetric matrix of
//! doubled order `[[A, -B], [B, A]]` for `H = A + iB`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::dim(rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::dim(self.cols, rhs.rows));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let r = rhs.row(k);
                let o = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (oj, rj) in o.iter_mut().zip(r) {
                    *oj += a * rj;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dim(self.cols, v.len()));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `selfᵀ v`.
    pub fn tmatvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::dim(self.rows, v.len()));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    /// `selfᵀ self / scale`, symmetric by construction.
    pub fn gram(&self, scale: f64) -> SymMatrix {
        let n = self.cols;
        let mut g = SymMatrix::zeros(n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    g.data[tri(i, j)] += ri * row[j];
                }
            }
        }
        for x in &mut g.data {
            *x /= scale;
        }
        g
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::dim(self.rows * self.cols, rhs.rows * rhs.cols));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        })
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

/// Real symmetric matrix stored as its packed lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> SymMatrix {
        SymMatrix {
            order,
            data: vec![0.0; order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> SymMatrix {
        let mut m = SymMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the lower triangle only.
    pub fn from_lower(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                m.data[tri(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Takes the lower triangle of a square dense matrix.
    pub fn from_dense_lower(m: &Matrix) -> Result<SymMatrix> {
        if m.rows() != m.cols() {
            return Err(Error::dim(m.rows(), m.cols()));
        }
        Ok(SymMatrix::from_lower(m.rows(), |i, j| m[(i, j)]))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[tri(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[tri(i, j)] = v;
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.order {
            for j in 0..self.order {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.order {
            return Err(Error::dim(self.order, v.len()));
        }
        Ok((0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }
}

/// Eigendecomposition `m = V diag(values) Vᵀ`, eigenvalues ascending,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
pub fn sym_eig(m: &SymMatrix) -> SymEigen {
    let n = m.order();
    let mut a = m.to_dense().data;
    let mut v = Matrix::identity(n).data;

    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>();
    if n > 1 && scale > 0.0 {
        for sweep in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p * n + q] * a[p * n + q];
                }
            }
            if off <= 1e-32 * scale {
                break;
            }
            // Skip tiny elements only after the first few sweeps.
            let threshold = if sweep < 3 {
                0.2 * off.sqrt() / (n * n) as f64
            } else {
                0.0
            };
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= threshold || apq == 0.0 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    SymEigen { values, vectors }
}

/// Pivots below this fraction of the largest diagonal entry count as
/// breakdown, which caps the accepted condition number near `1e11`.
pub const PIVOT_RTOL: f64 = 1e-11;

/// Lower Cholesky factor of `m + ridge·I`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &SymMatrix, ridge: f64) -> Result<Cholesky> {
        if ridge < 0.0 || !ridge.is_finite() {
            return Err(Error::InvalidArgument(format!("ridge {ridge} must be ≥ 0")));
        }
        let n = m.order();
        let max_diag = (0..n).map(|i| m.get(i, i).abs()).fold(0.0, f64::max) + ridge;
        let tol = PIVOT_RTOL * max_diag;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = m.get(i, j) + if i == j { ridge } else { 0.0 };
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= tol || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::dim(n, rhs.len()));
        }
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Ok(y)
    }
}

/// Solves `(m + ridge·I) x = rhs` by Cholesky.
pub fn spd_solve(m: &SymMatrix, rhs: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if rhs.len() != m.order() {
        return Err(Error::dim(m.order(), rhs.len()));
    }
    Cholesky::factor(m, ridge)?.solve(rhs)
}

/// Ridges tried after the requested one fails.
pub const RIDGE_LADDER: [f64; 3] = [1e-12, 1e-10, 1e-8];

/// Factors `m + ridge·I`, climbing [`RIDGE_LADDER`] on failure.
/// Returns the factor and the ridge that succeeded.
pub fn factor_with_ladder(m: &SymMatrix, ridge: f64) -> Result<(Cholesky, f64)> {
    let mut err = match Cholesky::factor(m, ridge) {
        Ok(c) => return Ok((c, ridge)),
        Err(e) => e,
    };
    for &r in RIDGE_LADDER.iter().filter(|&&r| r > ridge) {
        match Cholesky::factor(m, r) {
            Ok(c) => {
                log::warn!("Cholesky failed ({err}); succeeded with ridge {r:e}");
                return Ok((c, r));
            }
            Err(e) => err = e,
        }
    }
    log::warn!("Cholesky failed on every ridge: {err}");
    let eig = sym_eig(m);
    let condition = if eig.min() > 0.0 {
        eig.max() / eig.min()
    } else {
        f64::INFINITY
    };
    Err(Error::SingularKernel { condition })
}

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> CMatrix {
        CMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<CMatrix> {
        if data.len() != dim * dim {
            return Err(Error::dim(dim * dim, data.len()));
        }
        Ok(CMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::dim(self.dim, rhs.dim));
        }
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::dim(self.dim, v.len()));
        }
        let n = self.dim;
        Ok((0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().matmul(self).expect("square");
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let target = if i == j { 1.0 } else { 0.0 };
                s += (p[(i, j)] - target).norm_sqr();
            }
        }
        s.sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Complex Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermMatrix(CMatrix);

impl HermMatrix {
    /// Accepts `m` if it is Hermitian to within `1e-12` (relative to its
    /// largest entry); the stored matrix is the exact Hermitian part.
    pub fn new(m: CMatrix) -> Result<HermMatrix> {
        let n = m.dim();
        let max = m.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut h = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (m[(i, j)], m[(j, i)].conj());
                if (a - b).norm() > 1e-12 * max.max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not Hermitian at ({i},{j})"
                    )));
                }
                h[(i, j)] = (a + b) * 0.5;
            }
        }
        Ok(HermMatrix(h))
    }

    /// Real symmetric matrix promoted to Hermitian.
    pub fn from_real(m: &SymMatrix) -> HermMatrix {
        let n = m.order();
        let mut h = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = Complex64::new(m.get(i, j), 0.0);
            }
        }
        HermMatrix(h)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Real eigenvalues (each once, ascending) via the doubled real form.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let e = sym_eig(&self.doubled());
        e.values.iter().step_by(2).copied().collect()
    }

    fn doubled(&self) -> SymMatrix {
        let n = self.dim();
        SymMatrix::from_lower(2 * n, |i, j| {
            let (bi, ri) = (i / n, i % n);
            let (bj, rj) = (j / n, j % n);
            let z = self.0[(ri, rj)];
            match (bi, bj) {
                (0, 0) | (1, 1) => z.re,
                (1, 0) => z.im,
                _ => -z.im,
            }
        })
    }
}

/// `exp(−i·scale·h)` by eigendecomposition.
pub fn herm_expm(h: &HermMatrix, scale: f64) -> CMatrix {
    let n = h.dim();
    let eig = sym_eig(&h.doubled());
    // Each complex eigenvector appears twice (as w and i·w) among the 2n real
    // eigenvectors, so the sum of projectors counts every eigenspace twice.
    let mut u = CMatrix::zeros(n);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let w: Vec<Complex64> = (0..n)
            .map(|r| Complex64::new(eig.vectors[(r, k)], eig.vectors[(r + n, k)]))
            .collect();
        let phase = Complex64::from_polar(0.5, -scale * lambda);
        for i in 0..n {
            let wi = phase * w[i];
            for j in 0..n {
                u.data[i * n + j] += wi * w[j].conj();
            }
        }
    }
    u
}

/// `exp(−i·scale·h)` for a real symmetric `h`, without doubling.
pub fn real_sym_expm(h: &SymMatrix, scale: f64) -> CMatrix {
    let n = h.order();
    let eig = sym_eig(h);
    let mut u = CMatrix::zeros(n);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -scale * lambda);
        for i in 0..n {
            let vi = phase * eig.vectors[(i, k)];
            for j in 0..n {
                u.data[i * n + j] += vi * eig.vectors[(j, k)];
            }
        }
    }
    u
}

/// Orthonormalizes the columns of `m` by modified Gram–Schmidt. The implied
/// `R` factor has a positive real diagonal, so a Ginibre input yields a
/// Haar-distributed unitary.
pub fn orthonormalize_columns(m: &CMatrix) -> Result<CMatrix> {
    let n = m.dim();
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| m[(i, j)]).collect())
        .collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let qk = &done[k];
            let proj: Complex64 = qk.iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in rest[0].iter_mut().zip(qk) {
                *x -= proj * q;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidArgument("rank-deficient matrix".into()));
        }
        for x in &mut cols[j] {
            *x /= norm;
        }
    }
    let mut out = CMatrix::zeros(n);
    for (j, c) in cols.iter().enumerate() {
        for (i, &z) in c.iter().enumerate() {
            out[(i, j)] = z;
        }
    }
    Ok(out)
}

/// Largest singular value of `m` by power iteration on `mᵀm`.
pub fn spectral_norm(m: &Matrix, max_iter: usize, tol: f64) -> f64 {
    if m.cols() == 0 || m.rows() == 0 {
        return 0.0;
    }
    // Start from the heaviest row: a uniform start can be orthogonal to the
    // top singular vector.
    let top = (0..m.rows())
        .max_by(|&a, &b| norm2(m.row(a)).total_cmp(&norm2(m.row(b))))
        .expect("nonempty");
    let n0 = norm2(m.row(top));
    if n0 == 0.0 {
        return 0.0;
    }
    let mut v: Vec<f64> = m.row(top).iter().map(|x| x / n0).collect();
    let mut sigma2 = 0.0;
    for _ in 0..max_iter {
        let w = m.tmatvec(&m.matvec(&v).expect("shape")).expect("shape");
        let nw = norm2(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let converged = (nw - sigma2).abs() <= tol * nw;
        sigma2 = nw;
        v = w.iter().map(|x| x / nw).collect();
        if converged {
            break;
        }
    }
    sigma2.sqrt()
}
