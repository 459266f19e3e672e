//! Detection events on a time grid as a determinantal point process.
//!
//! With `K_ij = Gamma(t_i, t_j) eta S dt`, the probability that all bins of a
//! set `S` register a detection is `det(K_S)`, which is exactly the joint
//! detection probability `G^(|S|) (eta S dt)^|S|` of short intervals. The
//! sampler draws whole configurations from this process with the spectral
//! algorithm: keep eigenvector `n` with probability `lambda_n`, then draw
//! bins one at a time from the projection kernel spanned by the kept
//! vectors, deflating it after each draw.
//!
//! Randomness is a ChaCha8 stream per sample: sample `i` of a run seeded with
//! `s` uses seed `s`, stream `i`, so parallel and sequential runs agree.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DetectorConfig, SpacetimePoint, SpectralModel};
use crate::hermitian::{DenseMatrix, HermitianMatrix};

pub const MAX_GRID_BINS: usize = 512;

/// Enumeration limit for [`exact_subset_probabilities`].
pub const MAX_EXACT_BINS: usize = 12;

/// Eigenvalues this far outside `[0, 1]` are snapped back onto it.
pub const SPECTRUM_SNAP_TOLERANCE: f64 = 1e-10;

/// Largest single-bin detection probability accepted by
/// [`build_sampling_kernel`].
pub const MAX_BIN_PROBABILITY: f64 = 0.5;

/// Eigenvalues above this count toward the kernel rank.
const RANK_THRESHOLD: f64 = 1e-12;

/// Residual norm below which projection deflation is considered degenerate.
const DEFLATION_THRESHOLD: f64 = 1e-10;

/// Uniform time grid at a fixed detector position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_bins: usize,
    pub t_start: f64,
    pub bin_width: f64,
    pub point: SpacetimePoint,
}

impl GridSpec {
    pub fn new(n_bins: usize, t_start: f64, bin_width: f64) -> Result<Self> {
        let grid = Self {
            n_bins,
            t_start,
            bin_width,
            point: SpacetimePoint::at_time(0.0),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_bins == 0 || self.n_bins > MAX_GRID_BINS {
            return Err(Error::InvalidGrid(format!(
                "bin count must lie in 1..={MAX_GRID_BINS}, got {}",
                self.n_bins
            )));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "bin width must be positive, got {}",
                self.bin_width
            )));
        }
        if !self.t_start.is_finite() || !self.point.is_finite() {
            return Err(Error::InvalidGrid("grid origin must be finite".into()));
        }
        Ok(())
    }

    /// Start of each bin.
    pub fn points(&self) -> Vec<SpacetimePoint> {
        (0..self.n_bins)
            .map(|i| SpacetimePoint {
                r: self.point.r,
                t: self.t_start + i as f64 * self.bin_width,
            })
            .collect()
    }
}

/// A Hermitian kernel with spectrum in `[0, 1]` and its cached
/// eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingKernel {
    kernel: HermitianMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: DenseMatrix,
}

impl SamplingKernel {
    /// Fails with [`Error::SpectrumOutOfRange`] unless every eigenvalue lies in
    /// `[-1e-10, 1 + 1e-10]`; values in the margins are snapped to 0 or 1.
    pub fn new(kernel: HermitianMatrix) -> Result<Self> {
        let (mut eigenvalues, eigenvectors) = kernel.eigen()?.into_parts();
        for lambda in &mut eigenvalues {
            if *lambda < -SPECTRUM_SNAP_TOLERANCE || *lambda > 1.0 + SPECTRUM_SNAP_TOLERANCE {
                return Err(Error::SpectrumOutOfRange { eigenvalue: *lambda });
            }
            *lambda = lambda.clamp(0.0, 1.0);
        }
        Ok(Self {
            kernel,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn kernel(&self) -> &HermitianMatrix {
        &self.kernel
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_bins(&self) -> usize {
        self.kernel.dim()
    }

    /// Expected number of occupied bins, `tr K`.
    pub fn expected_count(&self) -> f64 {
        self.kernel.trace()
    }

    /// Upper bound on the number of occupied bins in any sample.
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > RANK_THRESHOLD).count()
    }
}

/// `K_ij = eta S dt G1 gamma(t_i, t_j)` on the grid, with `dt` the grid's
/// bin width (the detector's own `bin_width` is not used here).
pub fn build_sampling_kernel(model: &SpectralModel, det: &DetectorConfig, grid: &GridSpec) -> Result<SamplingKernel> {
    model.validate()?;
    grid.validate()?;
    let p = det.eta * det.area * grid.bin_width * model.intensity;
    if p > MAX_BIN_PROBABILITY {
        return Err(Error::BinProbabilityTooLarge(p));
    }
    let points = grid.points();
    let kernel = HermitianMatrix::from_fn(grid.n_bins, |i, j| {
        if i == j {
            Complex64::new(p, 0.0)
        } else {
            crate::field::degree_of_coherence(model, &points[i], &points[j]) * p
        }
    })?;
    SamplingKernel::new(kernel)
}

/// One realization: the occupied bins, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionSample {
    pub occupied_bins: Vec<usize>,
    pub seed: u64,
    pub stream: u64,
}

/// Draws one configuration from stream 0 of `seed`.
pub fn sample(kernel: &SamplingKernel, seed: u64) -> Result<DetectionSample> {
    sample_stream(kernel, seed, 0)
}

/// Draws one configuration from the given stream of `seed`.
pub fn sample_stream(kernel: &SamplingKernel, seed: u64, stream: u64) -> Result<DetectionSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    Ok(DetectionSample {
        occupied_bins: draw(kernel, &mut rng)?,
        seed,
        stream,
    })
}

/// `n_samples` draws, sample `i` on stream `i`.
pub fn sample_many(kernel: &SamplingKernel, n_samples: u64, seed: u64) -> Result<Vec<DetectionSample>> {
    (0..n_samples)
        .into_par_iter()
        .map(|i| sample_stream(kernel, seed, i))
        .collect()
}

fn draw<R: Rng>(kernel: &SamplingKernel, rng: &mut R) -> Result<Vec<usize>> {
    let n = kernel.n_bins();
    let mut basis: Vec<Vec<Complex64>> = kernel
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &lambda)| rng.random::<f64>() < lambda)
        .map(|(col, _)| kernel.eigenvectors.column(col))
        .collect();

    let mut occupied = Vec::with_capacity(basis.len());
    while !basis.is_empty() {
        let weights: Vec<f64> = (0..n).map(|i| basis.iter().map(|v| v[i].norm_sqr()).sum()).collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut chosen = n - 1;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                chosen = i;
                break;
            }
            u -= w;
        }
        while weights[chosen] == 0.0 && chosen > 0 {
            chosen -= 1;
        }
        occupied.push(chosen);

        // Drop the vector with the largest weight on the chosen bin and use it
        // to clear that bin from the others.
        let pivot_idx = (0..basis.len())
            .max_by(|&a, &b| basis[a][chosen].norm().total_cmp(&basis[b][chosen].norm()))
            .expect("basis is non-empty");
        let pivot = basis.swap_remove(pivot_idx);
        for v in &mut basis {
            let factor = v[chosen] / pivot[chosen];
            for (x, p) in v.iter_mut().zip(&pivot) {
                *x -= factor * p;
            }
            v[chosen] = Complex64::new(0.0, 0.0);
        }
        orthonormalize(&mut basis)?;
    }
    occupied.sort_unstable();
    Ok(occupied)
}

/// Modified Gram-Schmidt in place.
fn orthonormalize(basis: &mut [Vec<Complex64>]) -> Result<()> {
    for a in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(a);
        let v = &mut rest[0];
        for u in done.iter() {
            let overlap: Complex64 = u.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
            for (y, x) in v.iter_mut().zip(u) {
                *y -= overlap * x;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < DEFLATION_THRESHOLD {
            return Err(Error::DeflationBreakdown(norm));
        }
        for y in v.iter_mut() {
            *y /= norm;
        }
    }
    Ok(())
}

/// Exact distribution over configurations, indexed by bitmask (bit `i` set
/// when bin `i` is occupied).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetProbabilities {
    n_bins: usize,
    probs: Vec<f64>,
}

fn mask_of(bins: &[usize]) -> usize {
    bins.iter().fold(0, |m, &b| m | (1 << b))
}

impl SubsetProbabilities {
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Probability of exactly this configuration.
    pub fn probability(&self, bins: &[usize]) -> f64 {
        self.probs[mask_of(bins)]
    }

    pub fn by_mask(&self) -> &[f64] {
        &self.probs
    }

    /// Probability that all of `bins` are occupied.
    pub fn inclusion_probability(&self, bins: &[usize]) -> f64 {
        let s = mask_of(bins);
        self.probs
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask & s == s)
            .map(|(_, p)| p)
            .sum()
    }

    /// `(configuration, probability)` pairs in mask order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(mask, &p)| ((0..self.n_bins).filter(|b| mask & (1 << b) != 0).collect(), p))
    }
}

/// `P(exactly T) = |det(K - I_{complement of T})|` for every `T`.
pub fn exact_subset_probabilities(kernel: &SamplingKernel) -> Result<SubsetProbabilities> {
    let n = kernel.n_bins();
    if n > MAX_EXACT_BINS {
        return Err(Error::DimensionTooLarge {
            dim: n,
            max: MAX_EXACT_BINS,
        });
    }
    let probs = (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let shifted = HermitianMatrix::from_fn(n, |i, j| {
                let k = kernel.kernel.get(i, j);
                if i == j && mask & (1 << i) == 0 {
                    k - 1.0
                } else {
                    k
                }
            })?;
            Ok(shifted.determinant()?.abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SubsetProbabilities { n_bins: n, probs })
}

/// Coincidence counts by bin lag, with the normalized estimate
/// `g2(l) = pairs(l) / (N p^2 (n - l))`, `p = singles / (N n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub n_bins: usize,
    /// Lags `1..n_bins`; lag 0 is impossible (a bin fires at most once).
    pub lag_bins: Vec<usize>,
    pub pair_counts: Vec<u64>,
    pub singles_count: u64,
    pub n_samples: u64,
    pub g2: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl CoincidenceHistogram {
    /// Detections per bin per sample.
    pub fn singles_rate(&self) -> f64 {
        if self.n_samples == 0 {
            0.0
        } else {
            self.singles_count as f64 / (self.n_samples as f64 * self.n_bins as f64)
        }
    }

    fn from_counts(n_bins: usize, n_samples: u64, counts: Counts) -> Self {
        let lag_bins: Vec<usize> = (1..n_bins).collect();
        let mut hist = Self {
            n_bins,
            lag_bins,
            pair_counts: counts.pairs,
            singles_count: counts.singles,
            n_samples,
            g2: Vec::new(),
            stderr: Vec::new(),
        };
        let p = hist.singles_rate();
        for (&lag, &count) in hist.lag_bins.iter().zip(&hist.pair_counts) {
            let expected_uncorrelated = n_samples as f64 * p * p * (n_bins - lag) as f64;
            if expected_uncorrelated == 0.0 {
                hist.g2.push(0.0);
                hist.stderr.push(0.0);
                continue;
            }
            let g2 = count as f64 / expected_uncorrelated;
            // Pair counts are treated as Poisson; the singles normalization
            // enters squared.
            let stderr = if count > 0 {
                g2 * (1.0 / count as f64 + 4.0 / hist.singles_count as f64).sqrt()
            } else {
                1.0 / expected_uncorrelated
            };
            hist.g2.push(g2);
            hist.stderr.push(stderr);
        }
        hist
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Counts {
    singles: u64,
    pairs: Vec<u64>,
}

impl Counts {
    fn new(n_bins: usize) -> Self {
        Self {
            singles: 0,
            pairs: vec![0; n_bins.saturating_sub(1)],
        }
    }

    fn add(mut self, bins: &[usize]) -> Self {
        self.singles += bins.len() as u64;
        for (a, &i) in bins.iter().enumerate() {
            for &j in &bins[a + 1..] {
                self.pairs[j.abs_diff(i) - 1] += 1;
            }
        }
        self
    }

    fn merge(mut self, other: Counts) -> Self {
        self.singles += other.singles;
        for (a, b) in self.pairs.iter_mut().zip(other.pairs) {
            *a += b;
        }
        self
    }
}

/// Histogram over pre-drawn samples.
pub fn histogram_from_samples(n_bins: usize, samples: &[DetectionSample]) -> CoincidenceHistogram {
    let counts = samples
        .iter()
        .fold(Counts::new(n_bins), |acc, s| acc.add(&s.occupied_bins));
    CoincidenceHistogram::from_counts(n_bins, samples.len() as u64, counts)
}

/// Draws `n_samples` configurations (sample `i` on stream `i` of `seed`) and
/// histograms their coincidences.
pub fn estimate_g2(kernel: &SamplingKernel, n_samples: u64, seed: u64) -> Result<CoincidenceHistogram> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let n = kernel.n_bins();
    let counts = (0..n_samples)
        .into_par_iter()
        .try_fold(
            || Counts::new(n),
            |acc, i| Ok(acc.add(&sample_stream(kernel, seed, i)?.occupied_bins)),
        )
        .try_reduce(|| Counts::new(n), |a, b| Ok(a.merge(b)))?;
    Ok(CoincidenceHistogram::from_counts(n, n_samples, counts))
}
