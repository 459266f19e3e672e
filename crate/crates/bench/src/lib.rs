//! Seeded fixtures shared by the benchmarks.

use fermicorr_core::{
    build_sampling_kernel, Complex64, DenseMatrix, DetectorConfig, GridSpec, HermitianMatrix, KernelBundle,
    SamplingKernel, SpectralModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `B† B` for a seeded `k x k` complex `B` with entries uniform in the unit square.
pub fn random_psd(k: usize, seed: u64) -> HermitianMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DenseMatrix::from_fn(k, k, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    HermitianMatrix::gram(&b).expect("square gram matrix")
}

pub fn random_bundle(k: usize, seed: u64) -> KernelBundle {
    KernelBundle::from_cross_correlations(random_psd(k, seed)).expect("gram matrix is PSD")
}

/// Gaussian beam on an `n_bins` grid with `dt = T_c / 8` and single-bin
/// probability 0.05.
pub fn antibunching_kernel(n_bins: usize) -> SamplingKernel {
    let tc = 2.0e-14;
    let dt = tc / 8.0;
    let model = SpectralModel {
        intensity: 0.05 / dt,
        ..SpectralModel::gaussian(tc).expect("valid model")
    };
    let det = DetectorConfig::new(1.0, 1.0, dt).expect("valid detector");
    let grid = GridSpec::new(n_bins, 0.0, dt).expect("valid grid");
    build_sampling_kernel(&model, &det, &grid).expect("kernel within the unit interval")
}
