use num_complex::Complex64;

use super::{DenseMatrix, HermitianMatrix};
use crate::error::{Error, Result};

/// Convergence threshold on the off-diagonal Frobenius norm, relative to the
/// full Frobenius norm.
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-14;

/// Components below this modulus do not count as the "first nonzero" entry
/// when fixing eigenvector phases.
const PHASE_PIVOT_THRESHOLD: f64 = 1e-12;

/// `A = U diag(eigenvalues) U†` with eigenvalues ascending and the columns of
/// `U` orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors as columns.
    pub fn eigenvectors(&self) -> &DenseMatrix {
        &self.eigenvectors
    }

    pub fn into_parts(self) -> (Vec<f64>, DenseMatrix) {
        (self.eigenvalues, self.eigenvectors)
    }

    /// `U D U†`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        DenseMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| u[(i, k)] * self.eigenvalues[k] * u[(j, k)].conj()).sum()
        })
    }

    /// `max |(U U† - I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let u = &self.eigenvectors;
        let n = u.rows();
        u.matmul(&u.adjoint()).max_abs_diff(&DenseMatrix::identity(n))
    }
}

fn frobenius_sq(m: &[Complex64], n: usize, off_only: bool) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if off_only && i == j {
                continue;
            }
            acc += m[i * n + j].norm_sqr();
        }
    }
    acc
}

/// Cyclic Jacobi diagonalization.
///
/// Each rotation is `G = diag(1, conj(e)) R`, where `e` is the phase of the
/// pivot `a_pq` and `R` the real Jacobi rotation for the resulting real
/// symmetric 2x2 block. Rows p and q are updated in place and mirrored into
/// columns p and q, so the working matrix stays exactly Hermitian.
/// Eigenvectors accumulate as rows of a transposed buffer.
pub(super) fn jacobi(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.as_slice().to_vec();
    let mut vt = DenseMatrix::identity(n).as_slice().to_vec();

    let target = OFF_DIAGONAL_TOLERANCE * frobenius_sq(&m, n, false).sqrt();
    // Pivots below this cannot keep the off-diagonal norm above `target`.
    let skip_below = target / n as f64;
    let max_sweeps = 100 * n * n;
    let mut converged = false;
    for _ in 0..max_sweeps {
        if frobenius_sq(&m, n, true).sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut vt, n, p, q, skip_below);
            }
        }
    }
    if !converged && frobenius_sq(&m, n, true).sqrt() > target {
        return Err(Error::IterationLimitExceeded { sweeps: max_sweeps });
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    let v = DenseMatrix::from_fn(n, n, |i, j| vt[j * n + i]);
    Ok(canonicalize(eigenvalues, v))
}

fn two_rows(buf: &mut [Complex64], n: usize, p: usize, q: usize) -> (&mut [Complex64], &mut [Complex64]) {
    debug_assert!(p < q);
    let (head, tail) = buf.split_at_mut(q * n);
    (&mut head[p * n..(p + 1) * n], &mut tail[..n])
}

fn rotate(m: &mut [Complex64], vt: &mut [Complex64], n: usize, p: usize, q: usize, skip_below: f64) {
    let apq = m[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 || mag < skip_below {
        return;
    }
    let phase = apq / mag;
    let alpha = m[p * n + p].re;
    let beta = m[q * n + q].re;

    let zeta = (beta - alpha) / (2.0 * mag);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + zeta.hypot(1.0))
    } else {
        -1.0 / (-zeta + zeta.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    // Row form of M <- G† M G: row_p' = c row_p - s e row_q, row_q' = s row_p + c e row_q.
    let se = phase * s;
    let ce = phase * c;
    {
        let (row_p, row_q) = two_rows(m, n, p, q);
        for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
            let (apr, aqr) = (*x, *y);
            *x = apr * c - aqr * se;
            *y = apr * s + aqr * ce;
        }
        row_p[p] = Complex64::new(alpha - t * mag, 0.0);
        row_q[q] = Complex64::new(beta + t * mag, 0.0);
        row_p[q] = Complex64::new(0.0, 0.0);
        row_q[p] = Complex64::new(0.0, 0.0);
    }
    for r in 0..n {
        if r != p && r != q {
            m[r * n + p] = m[p * n + r].conj();
            m[r * n + q] = m[q * n + r].conj();
        }
    }
    m[q * n + p] = Complex64::new(0.0, 0.0);

    // Columns of V <- V G, stored as rows of V^T.
    let (sec, cec) = (se.conj(), ce.conj());
    let (vp, vq) = two_rows(vt, n, p, q);
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a * c - b * sec;
        *y = a * s + b * cec;
    }
}

/// Sorts ascending, fixes each eigenvector's first significant component to
/// be positive real, and orders degenerate clusters by that component's row.
fn canonicalize(eigenvalues: Vec<f64>, v: DenseMatrix) -> EigenDecomposition {
    let n = eigenvalues.len();
    let pivot_row = |col: usize| -> usize {
        (0..n)
            .find(|&r| v[(r, col)].norm() > PHASE_PIVOT_THRESHOLD)
            .unwrap_or(0)
    };
    let pivots: Vec<usize> = (0..n).map(pivot_row).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));

    let scale = eigenvalues.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let degenerate_tol = 1e-12 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[order[end]] - eigenvalues[order[end - 1]] <= degenerate_tol {
            end += 1;
        }
        order[start..end].sort_by_key(|&col| pivots[col]);
        start = end;
    }

    let sorted_values: Vec<f64> = order.iter().map(|&k| eigenvalues[k]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        let pivot = v[(pivots[old_col], old_col)];
        let unphase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for r in 0..n {
            vectors[(r, new_col)] = v[(r, old_col)] * unphase;
        }
        let p = pivots[old_col];
        vectors[(p, new_col)] = Complex64::new(vectors[(p, new_col)].norm(), 0.0);
    }
    EigenDecomposition {
        eigenvalues: sorted_values,
        eigenvectors: vectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::oracle::leibniz_determinant;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_fixed_point() {
        let e = HermitianMatrix::identity(3).eigen().unwrap();
        assert_eq!(e.eigenvalues(), &[1.0, 1.0, 1.0]);
        assert_eq!(e.eigenvectors(), &DenseMatrix::identity(3));
    }

    #[test]
    fn diagonal_input() {
        let e = HermitianMatrix::from_diagonal(&[5.0, 2.0]).unwrap().eigen().unwrap();
        assert_eq!(e.eigenvalues(), &[2.0, 5.0]);
        assert_eq!(e.eigenvectors()[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn ar_structure_product_matches_leibniz() {
        let m = HermitianMatrix::from_real_rows(&[vec![1.0, 0.5, 0.25], vec![0.5, 1.0, 0.5], vec![0.25, 0.5, 1.0]])
            .unwrap();
        let oracle = leibniz_determinant(&m).unwrap();
        assert!((oracle.re - 0.5625).abs() <= 1e-15);
        let product: f64 = m.eigen().unwrap().eigenvalues().iter().product();
        assert!((product - oracle.re).abs() <= 1e-12);
    }

    #[test]
    fn complex_2x2_known_spectrum() {
        // [[2, 1+i], [1-i, 3]]: trace 5, det 4, eigenvalues 1 and 4.
        let m = HermitianMatrix::new(2, vec![c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]).unwrap();
        let e = m.eigen().unwrap();
        assert!((e.eigenvalues()[0] - 1.0).abs() <= 1e-14);
        assert!((e.eigenvalues()[1] - 4.0).abs() <= 1e-14);
        assert!(e.reconstruct().max_abs_diff(&m.to_dense()) <= 1e-14);
        assert!(e.unitarity_residual() <= 1e-14);
    }

    #[test]
    fn first_significant_component_is_positive_real() {
        let m = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(1.0, 0.0)]).unwrap();
        let e = m.eigen().unwrap();
        for col in 0..2 {
            let z = e.eigenvectors()[(0, col)];
            assert!(z.re > 0.0 && z.im == 0.0);
        }
    }

    #[test]
    fn decomposition_is_deterministic() {
        let m = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(0.5, 0.0)]).unwrap();
        assert_eq!(m.eigen().unwrap(), m.eigen().unwrap());
    }
}
