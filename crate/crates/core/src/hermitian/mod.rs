//! Dense complex Hermitian matrices.
//!
//! Everything the correlation code needs from linear algebra lives here:
//! a validated Hermitian container, a cyclic Jacobi eigensolver, the
//! eigenvalue-product determinant, definiteness classification, unit-diagonal
//! normalization and the Hadamard bound `det(A) <= prod A_ii` as a checkable
//! predicate. A permutation-sum determinant is provided separately in
//! [`oracle`] as an independent reference.

mod dense;
mod eigen;
pub mod oracle;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dense::DenseMatrix;
pub use eigen::EigenDecomposition;

/// Relative tolerance within which near-Hermitian input is accepted (and
/// symmetrized) by the constructors.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Relative tolerance used by [`HermitianMatrix::lemma_check`] to call the
/// Hadamard bound an equality.
pub const LEMMA_EQUALITY_TOLERANCE: f64 = 1e-10;

/// Square complex matrix with `A[i][j] == conj(A[j][i])` and a real diagonal.
///
/// Constructors reject non-finite entries and anything further than
/// [`HERMITIAN_TOLERANCE`] (relative to the largest entry) from Hermitian;
/// accepted input is replaced by `(A + A†)/2`, so the stored matrix is
/// exactly Hermitian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Definiteness class of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Definiteness {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessVerdict {
    pub kind: Definiteness,
    pub min_eigenvalue: f64,
}

impl DefinitenessVerdict {
    pub fn is_psd(&self) -> bool {
        self.kind != Definiteness::Indefinite
    }
}

/// Outcome of checking `det(A) <= A_11 A_22 ... A_kk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub is_equality: bool,
}

impl HermitianMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != dim * dim {
            return Err(Error::ShapeMismatch {
                dim,
                expected: dim * dim,
                got: data.len(),
            });
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / dim,
                    col: idx % dim,
                });
            }
        }
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tolerance = HERMITIAN_TOLERANCE * scale;
        let mut sym = data.clone();
        for i in 0..dim {
            for j in i..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                let deviation = (a - b.conj()).norm();
                if deviation > tolerance {
                    return Err(Error::NotHermitian {
                        row: i,
                        col: j,
                        deviation,
                        tolerance,
                    });
                }
                if i == j {
                    sym[i * dim + i] = Complex64::new(a.re, 0.0);
                } else {
                    let avg = (a + b.conj()) * 0.5;
                    sym[i * dim + j] = avg;
                    sym[j * dim + i] = avg.conj();
                }
            }
        }
        Ok(Self { dim, data: sym })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(dim, data)
    }

    /// Builds a matrix from separate real and imaginary row arrays.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let dim = re.len();
        if im.len() != dim {
            return Err(Error::ShapeMismatch {
                dim,
                expected: dim,
                got: im.len(),
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (row_re, row_im) in re.iter().zip(im) {
            if row_re.len() != dim || row_im.len() != dim {
                return Err(Error::ShapeMismatch {
                    dim,
                    expected: dim,
                    got: row_re.len().min(row_im.len()),
                });
            }
            data.extend(row_re.iter().zip(row_im).map(|(&r, &i)| Complex64::new(r, i)));
        }
        Self::new(dim, data)
    }

    /// Real symmetric matrix from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let zeros: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        Self::from_parts(rows, &zeros)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim]).expect("identity is Hermitian")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        Self::from_fn(dim, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `B† B` for an arbitrary complex `B`; positive semidefinite by construction.
    pub fn gram(b: &DenseMatrix) -> Result<Self> {
        let n = b.cols();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..b.rows() {
                    acc += b[(r, i)].conj() * b[(r, j)];
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc.conj();
            }
            data[i * n + i].im = 0.0;
        }
        Self::new(n, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == Complex64::new(0.0, 0.0)))
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange { index, dim: self.dim });
        }
        let n = indices.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in indices {
            for &j in indices {
                data.push(self.get(i, j));
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_vec(self.dim, self.dim, self.data.clone())
    }

    /// `U A U†` for a square `U` of matching size.
    pub fn unitary_conjugate(&self, u: &DenseMatrix) -> Result<Self> {
        if u.rows() != self.dim || u.cols() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "conjugating matrix is {}x{}, expected {}x{}",
                u.rows(),
                u.cols(),
                self.dim,
                self.dim
            )));
        }
        let product = u.matmul(&self.to_dense()).matmul(&u.adjoint());
        Self::new(self.dim, product.as_slice().to_vec())
    }

    /// `sum_ij conj(l_i) l_j A_ij`, real for Hermitian `A`.
    pub fn quadratic_form(&self, lambda: &[Complex64]) -> f64 {
        assert_eq!(lambda.len(), self.dim, "coefficient vector length");
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, li) in lambda.iter().enumerate() {
            for (j, lj) in lambda.iter().enumerate() {
                acc += li.conj() * lj * self.get(i, j);
            }
        }
        acc.re
    }

    /// Eigenvalue threshold used by [`Self::definiteness`]: `1e-10 * max(1, max|A_ij|)`.
    pub fn psd_tolerance(&self) -> f64 {
        1e-10 * self.max_abs().max(1.0)
    }

    pub fn eigen(&self) -> Result<EigenDecomposition> {
        eigen::jacobi(self)
    }

    /// Determinant as the product of eigenvalues.
    pub fn determinant(&self) -> Result<f64> {
        if self.dim == 1 {
            return Ok(self.data[0].re);
        }
        Ok(self.eigen()?.eigenvalues().iter().product())
    }

    pub fn definiteness(&self) -> Result<DefinitenessVerdict> {
        let min_eigenvalue = self.eigen()?.eigenvalues()[0];
        let tol = self.psd_tolerance();
        let kind = if min_eigenvalue > tol {
            Definiteness::PositiveDefinite
        } else if min_eigenvalue >= -tol {
            Definiteness::PositiveSemidefinite
        } else {
            Definiteness::Indefinite
        };
        Ok(DefinitenessVerdict { kind, min_eigenvalue })
    }

    /// `a_ij = A_ij / sqrt(A_ii A_jj)`; the result has an exactly unit diagonal.
    pub fn unit_diagonal_normalize(&self) -> Result<Self> {
        let diag = self.diagonal();
        if let Some(i) = diag.iter().position(|&d| d <= 0.0) {
            return Err(Error::ZeroDiagonal(i));
        }
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    data.push(Complex64::new(1.0, 0.0));
                } else {
                    data.push(self.get(i, j) / (diag[i] * diag[j]).sqrt());
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    /// Checks `det(A) <= prod A_ii` for a positive semidefinite matrix with a
    /// strictly positive diagonal.
    pub fn lemma_check(&self) -> Result<LemmaCheck> {
        let verdict = self.definiteness()?;
        if !verdict.is_psd() {
            return Err(Error::NotPsd {
                min_eigenvalue: verdict.min_eigenvalue,
            });
        }
        let diag = self.diagonal();
        if let Some(i) = diag.iter().position(|&d| d <= 0.0) {
            return Err(Error::ZeroDiagonal(i));
        }
        let lhs = self.determinant()?;
        let rhs: f64 = diag.iter().product();
        let eq_tol = LEMMA_EQUALITY_TOLERANCE * rhs;
        Ok(LemmaCheck {
            holds: lhs <= rhs + eq_tol,
            lhs,
            rhs,
            is_equality: (lhs - rhs).abs() <= eq_tol,
        })
    }
}

/// On-disk matrix interchange: `{"dim": k, "re": [[...]], "im": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl TryFrom<MatrixFile> for HermitianMatrix {
    type Error = Error;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.re.len() != file.dim {
            return Err(Error::ShapeMismatch {
                dim: file.dim,
                expected: file.dim,
                got: file.re.len(),
            });
        }
        Self::from_parts(&file.re, &file.im)
    }
}

impl From<HermitianMatrix> for MatrixFile {
    fn from(m: HermitianMatrix) -> Self {
        let n = m.dim;
        let row =
            |f: fn(&Complex64) -> f64, i: usize| -> Vec<f64> { m.data[i * n..(i + 1) * n].iter().map(f).collect() };
        MatrixFile {
            dim: n,
            re: (0..n).map(|i| row(|z| z.re, i)).collect(),
            im: (0..n).map(|i| row(|z| z.im, i)).collect(),
        }
    }
}
