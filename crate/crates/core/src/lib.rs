//! Correlation functions of spin-polarized chaotic electron fields.
//!
//! The k-electron correlation function of a chaotic field is the determinant
//! of the k x k matrix of two-point cross-correlations. This crate builds
//! those kernels for a Gaussian-spectrum beam ([`field`]), evaluates the
//! correlation functions and detection probabilities ([`correlations`]),
//! checks the determinant inequalities that bound higher-order correlations
//! by products of lower-order ones ([`inequalities`]) and samples detection
//! records from the determinantal point process the kernel defines
//! ([`dpp`]). Linear algebra lives in [`hermitian`].
//!
//! Indices are 0-based throughout the API.

pub mod correlations;
pub mod dpp;
pub mod error;
pub mod field;
pub mod hermitian;
pub mod inequalities;

pub use num_complex::Complex64;

pub use correlations::{correlation, detection_probability, pairwise_g2, CorrelationValue};
pub use dpp::{
    build_sampling_kernel, estimate_g2, exact_subset_probabilities, sample, CoincidenceHistogram, DetectionSample,
    GridSpec, SamplingKernel, SubsetProbabilities,
};
pub use error::{Error, Result};
pub use field::{
    antibunching_curve, build_kernel, coherence_time_from_bandwidth, degree_of_coherence, DetectorConfig, KernelBundle,
    LineShape, SpacetimePoint, SpectralModel,
};
pub use hermitian::{
    oracle::leibniz_determinant, Definiteness, DefinitenessVerdict, DenseMatrix, EigenDecomposition, HermitianMatrix,
    LemmaCheck,
};
pub use inequalities::{
    check_partition_bound, check_product_bound, fischer_cross_check, sweep_partitions, FischerCrossCheck,
    InequalityReport, PartitionSpec,
};
