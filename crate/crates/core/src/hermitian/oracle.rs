//! Permutation-sum determinant, kept independent of the eigensolver so it
//! can serve as a reference in tests.

use num_complex::Complex64;

use super::HermitianMatrix;
use crate::error::{Error, Result};

pub const LEIBNIZ_MAX_DIM: usize = 8;

/// `sum_sigma sign(sigma) prod_i A[i][sigma(i)]` over all `k!` permutations,
/// generated with Heap's algorithm (each step is one transposition, so the
/// sign simply alternates).
pub fn leibniz_determinant(a: &HermitianMatrix) -> Result<Complex64> {
    let k = a.dim();
    if k > LEIBNIZ_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: k,
            max: LEIBNIZ_MAX_DIM,
        });
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut counters = vec![0usize; k];
    let mut sign = 1.0;
    let term = |perm: &[usize]| -> Complex64 { perm.iter().enumerate().map(|(row, &col)| a.get(row, col)).product() };

    let mut total = term(&perm);
    let mut i = 0;
    while i < k {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            total += term(&perm) * sign;
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}
