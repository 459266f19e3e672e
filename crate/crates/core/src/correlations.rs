//! k-electron correlation functions of the chaotic state.
//!
//! `G^(k)` over a set of detection events is the determinant of the
//! cross-correlation kernel restricted to those events; dividing by the
//! product of one-point values gives the determinant of the unit-diagonal
//! coherence matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DetectorConfig, KernelBundle};

/// Slack allowed when the short-interval probability slightly exceeds one.
const PROBABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationValue {
    pub order: usize,
    /// `det(Gamma_S)`, as computed (may be a round-off negative).
    pub value: f64,
    /// `det(gamma_S)` clamped to `[0, 1]` for reporting.
    pub normalized: f64,
    /// `det(gamma_S)` as computed.
    pub normalized_raw: f64,
    /// `prod_{i in S} G1_i`.
    pub singles_product: f64,
}

pub(crate) fn validate_indices(indices: &[usize], dim: usize) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::InvalidIndices("index set is empty".into()));
    }
    let mut seen = vec![false; dim];
    for &index in indices {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(Error::InvalidIndices(format!("index {index} repeated")));
        }
    }
    Ok(())
}

/// `G^(k)` over `indices` (0-based, distinct).
pub fn correlation(bundle: &KernelBundle, indices: &[usize]) -> Result<CorrelationValue> {
    validate_indices(indices, bundle.dim())?;
    let value = bundle.big_gamma.principal_submatrix(indices)?.determinant()?;
    let normalized_raw = bundle.gamma.principal_submatrix(indices)?.determinant()?;
    let singles_product = indices.iter().map(|&i| bundle.singles[i]).product();
    Ok(CorrelationValue {
        order: indices.len(),
        value,
        normalized: normalized_raw.clamp(0.0, 1.0),
        normalized_raw,
        singles_product,
    })
}

/// Joint detection probability `G^(k) (eta S dt)^k`.
pub fn detection_probability(corr: &CorrelationValue, det: &DetectorConfig) -> Result<f64> {
    let order = i32::try_from(corr.order).map_err(|_| Error::InvalidArgument("order too large".into()))?;
    let p = corr.value.max(0.0) * det.acceptance().powi(order);
    if p > 1.0 + PROBABILITY_SLACK {
        return Err(Error::ProbabilityOverflow(p));
    }
    Ok(p.min(1.0))
}

/// `G^(2)` for events `i != j`, evaluated as a 2x2 determinant and checked
/// against `G1_i G1_j (1 - |gamma_ij|^2)`.
pub fn pairwise_g2(bundle: &KernelBundle, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidIndices(format!(
            "pair needs distinct indices, got {i} twice"
        )));
    }
    let det = correlation(bundle, &[i, j])?.value;
    let scale = bundle.singles[i] * bundle.singles[j];
    let closed = scale * (1.0 - bundle.gamma.get(i, j).norm_sqr());
    debug_assert!(
        (det - closed).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE),
        "2x2 determinant {det} disagrees with closed form {closed}"
    );
    Ok(det)
}

/// The closed form `G1_i G1_j (1 - |gamma_ij|^2)`.
pub fn pairwise_g2_closed_form(bundle: &KernelBundle, i: usize, j: usize) -> Result<f64> {
    validate_indices(&[i, j], bundle.dim())?;
    Ok(bundle.singles[i] * bundle.singles[j] * (1.0 - bundle.gamma.get(i, j).norm_sqr()))
}
