//! Dense linear algebra for small matrices.
//!
//! Two types live here: [`Matrix`], a plain row-major rectangular matrix, and
//! [`SymmetricMatrix`], which carries the exact-symmetry invariant every
//! matrix-inequality block relies on. Dimensions in this crate stay well below
//! a hundred, so everything is dense and allocation-light.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows; all rows must share one length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data: data.to_vec() }
    }

    pub fn column(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "vector length differs from column count");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "shapes differ");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

/// Dense symmetric matrix. Entry `(i, j)` equals entry `(j, i)` bit for bit.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut s = Self::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            s.data[i * n + i] = v;
        }
        s
    }

    /// Builds from the lower triangle: `f(i, j)` is only called for `j <= i`.
    pub fn from_lower_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                s.data[i * n + j] = v;
                s.data[j * n + i] = v;
            }
        }
        s
    }

    /// Accepts a square matrix that is already exactly symmetric with finite entries.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::Dimension(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        if !m.is_finite() {
            return Err(Error::InvalidInput("non-finite entry".into()));
        }
        let n = m.rows();
        for i in 0..n {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) breaks symmetry")));
                }
            }
        }
        Ok(Self { n, data: m.as_slice().to_vec() })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_matrix(&Matrix::from_rows(rows)?)
    }

    /// Symmetric part `(M + Mᵀ)/2` of a square matrix.
    pub fn symmetric_part(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols(), "matrix must be square");
        Self::from_lower_fn(m.rows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)` together.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, a| m.max(a.abs()))
    }

    pub fn add(&self, other: &SymmetricMatrix) -> SymmetricMatrix {
        assert_eq!(self.n, other.n, "dimensions differ");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        SymmetricMatrix { n: self.n, data }
    }

    pub fn scale(&self, s: f64) -> SymmetricMatrix {
        SymmetricMatrix { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// `self += s * other`, keeping symmetry.
    pub fn add_scaled(&mut self, s: f64, other: &SymmetricMatrix) {
        assert_eq!(self.n, other.n, "dimensions differ");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += v;
        }
    }

    /// Copies `block` into the square region starting at `(offset, offset)`.
    pub fn set_block(&mut self, offset: usize, block: &SymmetricMatrix) {
        assert!(offset + block.n <= self.n, "block exceeds matrix");
        for i in 0..block.n {
            for j in 0..block.n {
                self.data[(offset + i) * self.n + offset + j] = block.get(i, j);
            }
        }
    }
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|i| &self.data[i * self.n..(i + 1) * self.n]))
            .finish()
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of `s` in ascending order, by cyclic Jacobi rotations.
pub fn sym_eigenvalues(s: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = s.dim();
    let mut a = s.as_slice().to_vec();
    if n <= 1 {
        return Ok(a);
    }
    let scale = s.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let off = |a: &[f64]| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
        sum
    };
    let target = (f64::EPSILON * scale).powi(2);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off(&a) <= target {
            let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "Jacobi eigenvalue iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps"
    )))
}

pub fn max_eigenvalue(s: &SymmetricMatrix) -> Result<f64> {
    Ok(sym_eigenvalues(s)?.last().copied().unwrap_or(f64::NEG_INFINITY))
}

pub fn min_eigenvalue(s: &SymmetricMatrix) -> Result<f64> {
    Ok(sym_eigenvalues(s)?.first().copied().unwrap_or(f64::INFINITY))
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = S`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// `det(S)` as the product of squared pivots.
    pub fn determinant(&self) -> f64 {
        (0..self.dim()).map(|i| self.l[(i, i)] * self.l[(i, i)]).product()
    }

    pub fn log_determinant(&self) -> f64 {
        (0..self.dim()).map(|i| 2.0 * self.l[(i, i)].ln()).sum()
    }

    /// Solves `L y = b` in place.
    pub fn forward_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.l.row(i);
            let mut v = b[i];
            for k in 0..i {
                v -= row[k] * b[k];
            }
            b[i] = v / row[i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn backward_in_place(&self, y: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in (i + 1)..n {
                v -= self.l[(k, i)] * y[k];
            }
            y[i] = v / self.l[(i, i)];
        }
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward_in_place(&mut x);
        self.backward_in_place(&mut x);
        x
    }

    pub fn solve(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.dim(), "right-hand side has wrong row count");
        let mut out = Matrix::zeros(b.rows(), b.cols());
        let mut col = vec![0.0; b.rows()];
        for j in 0..b.cols() {
            for i in 0..b.rows() {
                col[i] = b[(i, j)];
            }
            self.forward_in_place(&mut col);
            self.backward_in_place(&mut col);
            for i in 0..b.rows() {
                out[(i, j)] = col[i];
            }
        }
        out
    }
}

/// Cholesky factorization. A pivot `<= 0` yields [`Error::NotPositiveDefinite`].
pub fn cholesky(s: &SymmetricMatrix) -> Result<Cholesky> {
    cholesky_slice(s.dim(), s.as_slice())
}

pub(crate) fn cholesky_slice(n: usize, a: &[f64]) -> Result<Cholesky> {
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok(Cholesky { l })
}

/// Determinant. SPD inputs use the Cholesky pivots; anything else falls back to
/// Gaussian elimination with partial pivoting.
pub fn determinant(s: &SymmetricMatrix) -> f64 {
    if let Ok(c) = cholesky(s) {
        return c.determinant();
    }
    let n = s.dim();
    let mut a = s.as_slice().to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for i in (col + 1)..n {
            let f = a[i * n + col] / p;
            for k in col..n {
                a[i * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Solves `S X = B` for SPD `S`.
pub fn solve_spd(s: &SymmetricMatrix, b: &Matrix) -> Result<Matrix> {
    if b.rows() != s.dim() {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, matrix is {}x{}",
            b.rows(),
            s.dim(),
            s.dim()
        )));
    }
    Ok(cholesky(s)?.solve(b))
}

/// Block-diagonal concatenation.
pub fn block_diag(blocks: &[SymmetricMatrix]) -> SymmetricMatrix {
    let n = blocks.iter().map(SymmetricMatrix::dim).sum();
    let mut out = SymmetricMatrix::zeros(n);
    let mut offset = 0;
    for b in blocks {
        out.set_block(offset, b);
        offset += b.dim();
    }
    out
}
