//! Sub-network decomposition of an unsaturated network.
//!
//! A link with an empty buffer quits channel competition until its next
//! arrival, so over time the network hops between the `2^n` saturated
//! sub-networks induced by the subsets of currently backlogged ("on") links.
//! Holding the appearance probability of sub-network `j` as `q_j`, the
//! long-run throughput of link `i` is the mixture `sum_j th_i^j * q_j` of
//! the saturated per-sub-network throughputs. This module materializes the
//! dense `2^n x n` matrix of those `th_i^j` values and evaluates mixtures
//! over it.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ContentionGraph, SubnetworkMask};
use crate::numeric::{kahan_sum, KahanSum};
use crate::product_form::{saturated_throughputs, ThroughputVector};

#[derive(Debug, Error, PartialEq)]
pub enum MixtureError {
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("appearance probability {value} of sub-network {index} outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("appearance probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("offered load {value} of link {link} outside [0, 1)")]
    LoadOutOfRange { link: usize, value: f64 },
    #[error("{n} links exceed the {cap}-link cap for the dense sub-network matrix")]
    SizeCapExceeded { n: usize, cap: usize },
}

/// Dense matrix of saturated throughputs, one row per sub-network.
///
/// Row `j` holds the per-link saturated throughputs of the sub-network whose
/// on-links are exactly the set bits of `j`; the row index is the unsigned
/// value of the mask, so lookup is O(1). Row 0 is all zeros and the last row
/// is the fully saturated network.
#[derive(Clone, Debug, PartialEq)]
pub struct SubnetworkThroughputMatrix {
    n_links: usize,
    values: Vec<f64>, // row-major, 2^n rows of n entries
}

impl SubnetworkThroughputMatrix {
    /// Computes all `2^n` rows. Rows are independent, so they are filled in
    /// parallel; the result does not depend on scheduling.
    pub fn build(g: &ContentionGraph) -> Self {
        let n = g.n();
        let rows = 1usize << n;
        let mut values = vec![0.0; rows * n];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let th = saturated_throughputs(g, SubnetworkMask::from_bits(j as u32));
            row.copy_from_slice(th.as_slice());
        });
        Self { n_links: n, values }
    }

    /// [`build`](Self::build) behind an explicit link-count cap.
    ///
    /// The matrix holds `2^n * n` floats, so callers processing untrusted
    /// topologies can refuse sizes beyond what they are willing to allocate.
    pub fn build_capped(g: &ContentionGraph, max_links: usize) -> Result<Self, MixtureError> {
        if g.n() > max_links {
            return Err(MixtureError::SizeCapExceeded {
                n: g.n(),
                cap: max_links,
            });
        }
        Ok(Self::build(g))
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn n_subnetworks(&self) -> usize {
        1 << self.n_links
    }

    pub fn row(&self, subnetwork: SubnetworkMask) -> &[f64] {
        let j = subnetwork.index();
        &self.values[j * self.n_links..(j + 1) * self.n_links]
    }

    pub fn throughput(&self, subnetwork: SubnetworkMask, link: usize) -> f64 {
        self.row(subnetwork)[link]
    }

    /// Row of the all-on sub-network: the fully saturated throughputs.
    pub fn saturated_row(&self) -> &[f64] {
        self.row(SubnetworkMask::all(self.n_links))
    }

    pub fn rows(&self) -> impl Iterator<Item = (SubnetworkMask, &[f64])> {
        self.values
            .chunks(self.n_links)
            .enumerate()
            .map(|(j, row)| (SubnetworkMask::from_bits(j as u32), row))
    }

    /// Aggregate saturated throughput of each sub-network; these are the
    /// objective coefficients of the offered-load optimization.
    pub fn aggregate_per_subnetwork(&self) -> Vec<f64> {
        self.values
            .chunks(self.n_links)
            .map(|row| kahan_sum(row.iter().copied()))
            .collect()
    }

    /// Writes the matrix as CSV: the sub-network index followed by the `n`
    /// per-link throughputs, one row per sub-network.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "subnetwork")?;
        for i in 1..=self.n_links {
            write!(w, ",th_{i}")?;
        }
        writeln!(w)?;
        for (mask, row) in self.rows() {
            write!(w, "{}", mask.index())?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Appearance probabilities of the `2^n` sub-networks: a point on the
/// probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QVector {
    q: Vec<f64>,
}

impl QVector {
    const SUM_TOLERANCE: f64 = 1e-9;

    /// Validates that every entry lies in [0, 1] and the entries sum to 1
    /// within 1e-9. Entries within 1e-12 outside [0, 1] (solver round-off)
    /// are clamped.
    pub fn new(q: Vec<f64>) -> Result<Self, MixtureError> {
        let mut q = q;
        for (j, v) in q.iter_mut().enumerate() {
            if !v.is_finite() || *v < -1e-12 || *v > 1.0 + 1e-12 {
                return Err(MixtureError::ProbabilityOutOfRange {
                    index: j,
                    value: *v,
                });
            }
            *v = v.clamp(0.0, 1.0);
        }
        let sum = kahan_sum(q.iter().copied());
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(MixtureError::NotNormalized { sum });
        }
        Ok(Self { q })
    }

    /// The degenerate mixture sitting entirely on one sub-network.
    pub fn indicator(n_subnetworks: usize, subnetwork: SubnetworkMask) -> Self {
        let mut q = vec![0.0; n_subnetworks];
        q[subnetwork.index()] = 1.0;
        Self { q }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// Sub-networks with probability above `threshold`, with their weights.
    pub fn support(&self, threshold: f64) -> Vec<(SubnetworkMask, f64)> {
        self.q
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > threshold)
            .map(|(j, &v)| (SubnetworkMask::from_bits(j as u32), v))
            .collect()
    }
}

/// Offered load per link: the rate of traffic pumped into each link's
/// transmit buffer, as a fraction of airtime. Valid entries lie in [0, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OfferedLoadVector(Vec<f64>);

impl OfferedLoadVector {
    pub fn new(f: Vec<f64>) -> Result<Self, MixtureError> {
        for (link, &v) in f.iter().enumerate() {
            if !v.is_finite() || !(0.0..1.0).contains(&v) {
                return Err(MixtureError::LoadOutOfRange { link, value: v });
            }
        }
        Ok(Self(f))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn aggregate(&self) -> f64 {
        kahan_sum(self.0.iter().copied())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Mixes the per-sub-network throughputs under appearance probabilities `q`:
/// `th_i = sum_j th_i^j * q_j`.
pub fn combine_throughputs(
    matrix: &SubnetworkThroughputMatrix,
    q: &QVector,
) -> Result<ThroughputVector, MixtureError> {
    if q.len() != matrix.n_subnetworks() {
        return Err(MixtureError::DimensionMismatch {
            expected: matrix.n_subnetworks(),
            got: q.len(),
        });
    }
    let n = matrix.n_links();
    let mut th = vec![KahanSum::new(); n];
    for (row, &weight) in matrix.values.chunks(n).zip(q.as_slice()) {
        if weight == 0.0 {
            continue;
        }
        for (acc, &v) in th.iter_mut().zip(row) {
            acc.add(v * weight);
        }
    }
    Ok(ThroughputVector::new(
        th.into_iter().map(|acc| acc.value()).collect(),
    ))
}

/// Turns an achieved throughput vector into the offered load that sustains
/// it: the identity map, with a range check that every component is a valid
/// airtime fraction in [0, 1).
pub fn offered_load_from_throughput(
    th: &ThroughputVector,
) -> Result<OfferedLoadVector, MixtureError> {
    OfferedLoadVector::new(th.as_slice().to_vec())
}
