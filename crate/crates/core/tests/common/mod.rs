#![allow(dead_code)]

use fermicorr_core::{Complex64, DenseMatrix, HermitianMatrix, KernelBundle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_dense(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// `B† B` with a square random `B`.
pub fn random_psd(rng: &mut impl Rng, k: usize) -> HermitianMatrix {
    HermitianMatrix::gram(&random_dense(rng, k, k)).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, k: usize) -> HermitianMatrix {
    let x = random_dense(rng, k, k);
    HermitianMatrix::from_fn(k, |i, j| (x[(i, j)] + x[(j, i)].conj()) * 0.5).unwrap()
}

pub fn random_unitary(rng: &mut impl Rng, k: usize) -> DenseMatrix {
    random_hermitian(rng, k).eigen().unwrap().eigenvectors().clone()
}

pub fn random_positive_diagonal(rng: &mut impl Rng, k: usize) -> HermitianMatrix {
    let d: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..3.0)).collect();
    HermitianMatrix::from_diagonal(&d).unwrap()
}

/// Block-diagonal PSD matrix with random PSD blocks of the given sizes,
/// laid out in the order given by `order` (block of each position).
pub fn block_diagonal_psd(rng: &mut impl Rng, blocks: &[Vec<usize>]) -> HermitianMatrix {
    let k: usize = blocks.iter().map(Vec::len).sum();
    let mut data = vec![Complex64::new(0.0, 0.0); k * k];
    for block in blocks {
        let sub = random_psd(rng, block.len());
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                data[i * k + j] = sub.get(a, b);
            }
        }
    }
    HermitianMatrix::new(k, data).unwrap()
}

pub fn bundle(m: HermitianMatrix) -> KernelBundle {
    KernelBundle::from_cross_correlations(m).unwrap()
}

/// `|a - b| <= tol * scale` with a readable failure message.
pub fn assert_close(a: f64, b: f64, tol: f64, scale: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol * scale,
        "{what}: {a} vs {b} (|diff| = {:e}, allowed {:e})",
        (a - b).abs(),
        tol * scale
    );
}
