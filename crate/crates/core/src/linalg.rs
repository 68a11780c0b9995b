//! Dense complex matrices and vectors, sized for per-node antenna counts.
//!
//! Everything here operates on small square or skinny matrices (dimensions
//! rarely above 8), so the implementations favor clarity over blocking or
//! vectorization. The two nontrivial routines are [`hermitian_inverse`],
//! a Cholesky-based inverse for Hermitian positive definite matrices, and
//! [`rank_one_update_inverse`], the Sherman-Morrison update that lets the
//! greedy selection loop score candidates without refactorizing.

use num_complex::Complex64;
use thiserror::Error;

/// Smallest Cholesky pivot accepted before a matrix is declared singular
/// or indefinite.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Smallest `|1 + y^H A^-1 x|` accepted before a rank-one update is
/// declared singular.
pub const UPDATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular or indefinite: pivot {index} is {pivot:.3e}")]
    SingularOrIndefinite { index: usize, pivot: f64 },
    #[error("rank-one update is singular: |1 + y^H A^-1 x| = {magnitude:.3e}")]
    UpdateSingular { magnitude: f64 },
}

/// Column vector of complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            entries: vec![Complex64::ZERO; len],
        }
    }

    pub fn from_entries(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.entries[i]
    }

    pub fn set(&mut self, i: usize, value: Complex64) {
        self.entries[i] = value;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Inner product `self^H other`.
    pub fn conj_dot(&self, other: &Self) -> Complex64 {
        assert_eq!(self.len(), other.len(), "inner product length mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

/// Row-major dense complex matrix.
///
/// Zero-dimension shapes are legal operands everywhere: a product whose
/// inner dimension is 0 yields the all-zero matrix of the induced shape,
/// which lets an empty selection reuse the same formulas as a populated
/// one.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Complex64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.entries[r * self.cols + c] = value;
    }

    pub fn row_vector(&self, r: usize) -> ComplexVector {
        ComplexVector::from_entries(self.entries[r * self.cols..(r + 1) * self.cols].to_vec())
    }

    pub fn col_vector(&self, c: usize) -> ComplexVector {
        ComplexVector::from_entries((0..self.rows).map(|r| self.get(r, c)).collect())
    }

    pub fn set_row(&mut self, r: usize, v: &ComplexVector) {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        for c in 0..self.cols {
            self.set(r, c, v.get(c));
        }
    }

    pub fn set_col(&mut self, c: usize, v: &ComplexVector) {
        assert_eq!(v.len(), self.rows, "column length mismatch");
        for r in 0..self.rows {
            self.set(r, c, v.get(r));
        }
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Matrix-vector product `self * v`.
    pub fn matvec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = ComplexVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = Complex64::ZERO;
            for k in 0..self.cols {
                acc += self.get(i, k) * v.get(k);
            }
            out.set(i, acc);
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// Scales column `j` by `w[j]`, the action of a real diagonal on the right.
    pub fn scale_cols(&self, w: &[f64]) -> Self {
        assert_eq!(w.len(), self.cols, "diagonal length mismatch");
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * w[c])
    }

    /// Scales row `i` by `w[i]`, the action of a real diagonal on the left.
    pub fn scale_rows(&self, w: &[f64]) -> Self {
        assert_eq!(w.len(), self.rows, "diagonal length mismatch");
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * w[r])
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.entries[r * self.cols + c]
    }
}

/// Rank-one product `scale * x y^H`.
pub fn outer(x: &ComplexVector, y: &ComplexVector, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(x.len(), y.len(), |r, c| x.get(r) * y.get(c).conj() * scale)
}

/// Sum of the diagonal.
pub fn trace(a: &ComplexMatrix) -> Complex64 {
    assert!(a.is_square(), "trace requires a square matrix");
    (0..a.rows()).map(|i| a.get(i, i)).sum()
}

/// Real part of the trace. The matrices traced by the selection formulas
/// are Hermitian, so the imaginary part carries only rounding noise; use
/// [`trace`] to inspect it.
pub fn trace_real(a: &ComplexMatrix) -> f64 {
    trace(a).re
}

/// Real part of `tr(A B)` computed without forming the product.
pub fn trace_of_product_real(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.cols(), b.rows(), "trace product inner dimension mismatch");
    assert_eq!(a.rows(), b.cols(), "trace product outer dimension mismatch");
    let mut acc = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = a.get(i, j);
            let y = b.get(j, i);
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// Inverse of a Hermitian positive definite matrix via Cholesky
/// factorization `A = L L^H`.
///
/// Only the lower triangle of `A` is read. Returns
/// [`LinalgError::SingularOrIndefinite`] when a pivot falls to
/// [`PIVOT_TOLERANCE`] or below.
pub fn hermitian_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    assert!(a.is_square(), "hermitian_inverse requires a square matrix");
    let n = a.rows();
    let mut l = vec![Complex64::ZERO; n * n];
    for j in 0..n {
        let mut pivot = a.get(j, j).re;
        for k in 0..j {
            pivot -= l[j * n + k].norm_sqr();
        }
        if pivot <= PIVOT_TOLERANCE {
            return Err(LinalgError::SingularOrIndefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }

    // Invert the triangular factor by forward substitution.
    let mut linv = vec![Complex64::ZERO; n * n];
    for j in 0..n {
        linv[j * n + j] = Complex64::new(1.0 / l[j * n + j].re, 0.0);
        for i in (j + 1)..n {
            let mut s = Complex64::ZERO;
            for k in j..i {
                s += l[i * n + k] * linv[k * n + j];
            }
            linv[i * n + j] = -s / l[i * n + i].re;
        }
    }

    // A^-1 = L^-H L^-1; entry (i, j) sums over k >= max(i, j).
    let mut inv = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::ZERO;
            for k in i.max(j)..n {
                s += linv[k * n + i].conj() * linv[k * n + j];
            }
            inv.set(i, j, s);
        }
    }
    Ok(inv)
}

/// Sherman-Morrison update: given `A^-1`, returns `(A + x y^H)^-1` as
///
/// `A^-1 - (A^-1 x)(y^H A^-1) / (1 + y^H A^-1 x)`
///
/// in O(n^2) without touching the factorization of `A`. Returns
/// [`LinalgError::UpdateSingular`] when the denominator magnitude falls to
/// [`UPDATE_TOLERANCE`] or below.
pub fn rank_one_update_inverse(
    ainv: &ComplexMatrix,
    x: &ComplexVector,
    y: &ComplexVector,
) -> Result<ComplexMatrix, LinalgError> {
    assert!(ainv.is_square(), "rank_one_update_inverse requires a square matrix");
    let n = ainv.rows();
    assert_eq!(x.len(), n, "update vector x has wrong length");
    assert_eq!(y.len(), n, "update vector y has wrong length");

    let ax = ainv.matvec(x);
    // y^H A^-1 as a row.
    let mut ya = ComplexVector::zeros(n);
    for j in 0..n {
        let mut acc = Complex64::ZERO;
        for i in 0..n {
            acc += y.get(i).conj() * ainv.get(i, j);
        }
        ya.set(j, acc);
    }

    let denom = Complex64::ONE + y.conj_dot(&ax);
    if denom.norm() <= UPDATE_TOLERANCE {
        return Err(LinalgError::UpdateSingular {
            magnitude: denom.norm(),
        });
    }

    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let num = ax.get(i) / denom;
        for j in 0..n {
            out.set(i, j, ainv.get(i, j) - num * ya.get(j));
        }
    }
    Ok(out)
}
