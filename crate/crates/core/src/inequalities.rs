//! Determinant inequalities between correlation functions of different
//! orders.
//!
//! For a positive semidefinite kernel and any partition of the detection
//! events into blocks `B_1 | ... | B_m`,
//!
//! ```text
//! G(B_1 u ... u B_m) <= G(B_1) G(B_2) ... G(B_m)
//! ```
//!
//! with equality iff every cross-block coherence vanishes. Splitting into
//! singletons gives the product bound `G^(k) <= G1_1 ... G1_k`. A partition
//! with more than two blocks is checked as a chain of two-block steps,
//! `(B_1 | rest)`, then `(B_2 | rest')`, and so on; the multi-block equality
//! condition (all cross-block coherences vanish) follows from applying the
//! two-block condition at each step.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::validate_indices;
use crate::error::{Error, Result};
use crate::field::KernelBundle;
use crate::hermitian::{DenseMatrix, HermitianMatrix};

/// Inequality slack is judged against `1e-10 * rhs`.
pub const INEQUALITY_TOLERANCE: f64 = 1e-10;

/// Absolute floor on the slack tolerance, as a fraction of the product of the
/// one-point values. Determinants of nearly singular blocks are pure
/// round-off at roughly this scale.
pub const DETERMINANT_FLOOR: f64 = 1e-12;

/// Cross-block `|gamma|` at or below this counts as vanishing.
pub const EQUALITY_DIAGNOSIS_TOLERANCE: f64 = 1e-9;

/// Largest point count accepted by [`sweep_partitions`].
pub const MAX_SWEEP_POINTS: usize = 10;

/// An ordered partition of `{0, .., k-1}` into non-empty disjoint blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionSpec {
    k: usize,
    blocks: Vec<Vec<usize>>,
}

impl PartitionSpec {
    pub fn new(k: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        let mut seen = vec![false; k];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= k {
                    return Err(Error::InvalidPartition(format!("index {} outside 1..={k}", i + 1)));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidPartition(format!("index {} repeated", i + 1)));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {} not covered", missing + 1)));
        }
        Ok(Self { k, blocks })
    }

    /// `{0} | {1} | ... | {k-1}`.
    pub fn singletons(k: usize) -> Self {
        Self {
            k,
            blocks: (0..k).map(|i| vec![i]).collect(),
        }
    }

    /// `{0..l} | {l..k}`.
    pub fn two_block(k: usize, l: usize) -> Result<Self> {
        if l == 0 || l >= k {
            return Err(Error::InvalidPartition(format!("split point {l} must lie in 1..{k}")));
        }
        Ok(Self {
            k,
            blocks: vec![(0..l).collect(), (l..k).collect()],
        })
    }

    /// Parses `"1,2|3,5,7|4|6"` (1-based) over `{1..k}`.
    pub fn parse_one_based(text: &str, k: usize) -> Result<Self> {
        let mut blocks = Vec::new();
        for block in text.split('|') {
            let mut indices = Vec::new();
            for item in block.split(',') {
                let item = item.trim();
                let index: usize = item
                    .parse()
                    .map_err(|_| Error::InvalidPartition(format!("bad index {item:?}")))?;
                if index == 0 {
                    return Err(Error::InvalidPartition("indices are 1-based".into()));
                }
                indices.push(index - 1);
            }
            blocks.push(indices);
        }
        Self::new(k, blocks)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &PartitionSpec) -> bool {
        self.k == coarser.k
            && self
                .blocks
                .iter()
                .all(|b| coarser.blocks.iter().any(|c| b.iter().all(|i| c.contains(i))))
    }
}

impl FromStr for PartitionSpec {
    type Err = Error;

    /// 1-based; `k` is taken to be the largest index mentioned.
    fn from_str(s: &str) -> Result<Self> {
        let k = s
            .split(['|', ','])
            .filter_map(|t| t.trim().parse::<usize>().ok())
            .max()
            .unwrap_or(0);
        Self::parse_one_based(s, k)
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        f.write_str(&text.join("|"))
    }
}

/// Verdict for one inequality instance. `partition` is 0-based in memory and
/// 1-based in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    #[serde(with = "one_based")]
    pub partition: Vec<Vec<usize>>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub is_equality: bool,
    pub equality_diagnosis: f64,
    pub tolerance: f64,
}

mod one_based {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(blocks: &[Vec<usize>], s: S) -> Result<S::Ok, S::Error> {
        let shifted: Vec<Vec<usize>> = blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect();
        shifted.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<usize>>, D::Error> {
        let blocks = Vec::<Vec<usize>>::deserialize(d)?;
        blocks
            .into_iter()
            .map(|b| {
                b.into_iter()
                    .map(|i| {
                        i.checked_sub(1)
                            .ok_or_else(|| serde::de::Error::custom("indices are 1-based"))
                    })
                    .collect()
            })
            .collect()
    }
}

fn block_correlation(bundle: &KernelBundle, indices: &[usize]) -> Result<f64> {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    bundle.big_gamma.principal_submatrix(&sorted)?.determinant()
}

fn cross_block_coherence(bundle: &KernelBundle, blocks: &[Vec<usize>]) -> f64 {
    let mut worst = 0.0_f64;
    for (a, block_a) in blocks.iter().enumerate() {
        for block_b in &blocks[a + 1..] {
            for &i in block_a {
                for &j in block_b {
                    worst = worst.max(bundle.gamma.get(i, j).norm());
                }
            }
        }
    }
    worst
}

/// Evaluates `G(union) <= prod G(block)` over blocks whose union is any
/// subset of the bundle's events.
fn evaluate(bundle: &KernelBundle, blocks: &[Vec<usize>]) -> Result<InequalityReport> {
    let all: Vec<usize> = blocks.iter().flatten().copied().collect();
    validate_indices(&all, bundle.dim())?;
    if let Some(i) = all.iter().find(|&&i| bundle.singles[i] <= 0.0) {
        return Err(Error::ZeroDiagonal(*i));
    }
    let floor = DETERMINANT_FLOOR * all.iter().map(|&i| bundle.singles[i]).product::<f64>();

    let lhs = block_correlation(bundle, &all)?;
    let block_values = blocks
        .iter()
        .map(|b| block_correlation(bundle, b))
        .collect::<Result<Vec<f64>>>()?;

    // Chain lhs = c_0 <= c_1 <= ... <= c_{m-1} = rhs, where c_j multiplies the
    // first j blocks' correlations by the correlation of the remainder.
    let mut holds = true;
    let mut tolerance = floor;
    let mut previous = lhs;
    let mut prefix = 1.0;
    for j in 0..blocks.len().saturating_sub(1) {
        prefix *= block_values[j];
        let rest: Vec<usize> = blocks[j + 1..].iter().flatten().copied().collect();
        let rest_value = if j + 2 == blocks.len() {
            block_values[j + 1]
        } else {
            block_correlation(bundle, &rest)?
        };
        let current = prefix * rest_value;
        let step_tol = INEQUALITY_TOLERANCE * current.max(0.0) + floor;
        holds &= current - previous >= -step_tol;
        tolerance = tolerance.max(step_tol);
        previous = current;
    }
    let rhs: f64 = block_values.iter().product();
    let tolerance = tolerance.max(INEQUALITY_TOLERANCE * rhs.max(0.0) + floor);
    let slack = rhs - lhs;
    holds &= slack >= -tolerance;

    Ok(InequalityReport {
        partition: blocks.to_vec(),
        lhs,
        rhs,
        slack,
        holds,
        is_equality: slack.abs() <= tolerance,
        equality_diagnosis: cross_block_coherence(bundle, blocks),
        tolerance,
    })
}

/// `G^(k)` over `indices` against the product of one-point values.
pub fn check_product_bound(bundle: &KernelBundle, indices: &[usize]) -> Result<InequalityReport> {
    let blocks: Vec<Vec<usize>> = indices.iter().map(|&i| vec![i]).collect();
    evaluate(bundle, &blocks)
}

/// `G^(k)` over all events against the product of per-block correlations.
pub fn check_partition_bound(bundle: &KernelBundle, partition: &PartitionSpec) -> Result<InequalityReport> {
    if partition.k() != bundle.dim() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} points, kernel has {}",
            partition.k(),
            bundle.dim()
        )));
    }
    evaluate(bundle, partition.blocks())
}

/// Determinants from the block-unitary construction: `U` diagonalizes the two
/// diagonal blocks of `Gamma`, `D = U Gamma U†` and `D'` keeps only the
/// diagonal blocks of `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FischerCrossCheck {
    pub det_d: f64,
    pub det_dprime: f64,
    /// Largest modulus in the off-diagonal block of `D`.
    pub block_residual: f64,
}

/// Splits `big_gamma` after the first `l` rows and columns.
pub fn fischer_cross_check(big_gamma: &HermitianMatrix, l: usize) -> Result<FischerCrossCheck> {
    let k = big_gamma.dim();
    if l == 0 || l >= k {
        return Err(Error::InvalidArgument(format!("split point {l} must lie in 1..{k}")));
    }
    let verdict = big_gamma.definiteness()?;
    if !verdict.is_psd() {
        return Err(Error::NotPsd {
            min_eigenvalue: verdict.min_eigenvalue,
        });
    }
    let head: Vec<usize> = (0..l).collect();
    let tail: Vec<usize> = (l..k).collect();
    let (_, v_head) = big_gamma.principal_submatrix(&head)?.eigen()?.into_parts();
    let (_, v_tail) = big_gamma.principal_submatrix(&tail)?.eigen()?.into_parts();
    let u: DenseMatrix = DenseMatrix::block_diagonal(&v_head.adjoint(), &v_tail.adjoint());

    let d = big_gamma.unitary_conjugate(&u)?;
    let det_d = d.determinant()?;
    let d_prime = HermitianMatrix::from_fn(k, |i, j| {
        if (i < l) == (j < l) {
            d.get(i, j)
        } else {
            num_complex::Complex64::new(0.0, 0.0)
        }
    })?;
    let det_dprime = d_prime.determinant()?;
    let block_residual = (0..l)
        .flat_map(|i| (l..k).map(move |j| (i, j)))
        .map(|(i, j)| d.get(i, j).norm())
        .fold(0.0, f64::max);
    Ok(FischerCrossCheck {
        det_d,
        det_dprime,
        block_residual,
    })
}

/// Runs [`fischer_cross_check`] for an arbitrary two-block partition by
/// reordering the kernel so the first block comes first.
pub fn cross_check_partition(bundle: &KernelBundle, partition: &PartitionSpec) -> Result<FischerCrossCheck> {
    let [first, second] = partition.blocks() else {
        return Err(Error::InvalidPartition("cross-check needs exactly two blocks".into()));
    };
    if partition.k() != bundle.dim() {
        return Err(Error::InvalidPartition("partition does not match kernel".into()));
    }
    let order: Vec<usize> = first.iter().chain(second).copied().collect();
    fischer_cross_check(&bundle.big_gamma.principal_submatrix(&order)?, first.len())
}

/// Set partitions of `{0..k-1}` in restricted-growth-string order.
///
/// The restricted growth string `a` assigns element `i` to block `a[i]`, with
/// `a[0] = 0` and `a[i] <= 1 + max(a[..i])`; strings are visited in
/// lexicographic order, starting from the single-block partition.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    rgs: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    pub fn new(k: usize) -> Self {
        Self {
            rgs: vec![0; k],
            done: k == 0,
        }
    }

    fn advance(&mut self) {
        let k = self.rgs.len();
        let mut prefix_max = vec![0; k];
        for i in 1..k {
            prefix_max[i] = prefix_max[i - 1].max(self.rgs[i - 1]);
        }
        for i in (1..k).rev() {
            if self.rgs[i] <= prefix_max[i] {
                self.rgs[i] += 1;
                self.rgs[i + 1..].fill(0);
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for SetPartitions {
    type Item = PartitionSpec;

    fn next(&mut self) -> Option<PartitionSpec> {
        if self.done {
            return None;
        }
        let n_blocks = self.rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); n_blocks];
        for (i, &b) in self.rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        let item = PartitionSpec {
            k: self.rgs.len(),
            blocks,
        };
        self.advance();
        Some(item)
    }
}

/// Bell number `B(k)`, the number of set partitions of `k` elements.
pub fn bell_number(k: usize) -> u64 {
    // Bell triangle.
    let mut row = vec![1u64];
    for _ in 0..k {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("non-empty row"));
        for &x in &row {
            let prev = *next.last().expect("non-empty row");
            next.push(prev + x);
        }
        row = next;
    }
    row[0]
}

/// One report per set partition of the bundle's events, in
/// restricted-growth-string order.
pub fn sweep_partitions(bundle: &KernelBundle, max_k: usize) -> Result<Vec<InequalityReport>> {
    let k = bundle.dim();
    let limit = max_k.min(MAX_SWEEP_POINTS);
    if k > limit {
        return Err(Error::TooManyPartitions { k, max: limit });
    }
    let partitions: Vec<PartitionSpec> = SetPartitions::new(k).collect();
    partitions.par_iter().map(|p| evaluate(bundle, p.blocks())).collect()
}
