//! Stationary analysis of a saturated (sub-)network.
//!
//! With every competing link backlogged and exponential backoff/transmission
//! times, the transmission state evolves as a time-reversible Markov chain
//! over the independent sets of the contention graph. Its stationary law has
//! a product form: state `s` carries weight `prod_{i in s} rho_i`, normalized
//! by the partition function `Z` (the sum of the weights over all feasible
//! states). A link's normalized throughput is then the total probability of
//! the states in which it transmits.

use std::collections::HashMap;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::graph::{enumerate_independent_sets, ContentionGraph, StateMask, SubnetworkMask};
use crate::numeric::{kahan_sum, log_sum_exp, KahanSum};

/// Per-link normalized throughputs: the long-run fraction of airtime each
/// link spends transmitting. Entries for links outside the analyzed
/// sub-network are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThroughputVector(Vec<f64>);

impl ThroughputVector {
    pub fn new(th: Vec<f64>) -> Self {
        Self(th)
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

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Sum over links, the quantity the offered-load optimization maximizes.
    pub fn aggregate(&self) -> f64 {
        kahan_sum(self.0.iter().copied())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for ThroughputVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for ThroughputVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl<'a> IntoIterator for &'a ThroughputVector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Stationary distribution of a saturated sub-network over its feasible
/// states, together with the log of the partition function.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryDistribution {
    states: Vec<StateMask>,
    probs: Vec<f64>,
    log_partition: f64,
}

impl StationaryDistribution {
    /// Feasible states in ascending mask order; the first is always the
    /// all-idle state.
    pub fn states(&self) -> &[StateMask] {
        &self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Natural log of the partition function `Z`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// The partition function itself. Fits comfortably in `f64` for every
    /// supported network size at realistic access intensities.
    pub fn partition(&self) -> f64 {
        self.log_partition.exp()
    }

    /// Probability of one state, or `None` if the state is not feasible here.
    pub fn prob_of(&self, state: StateMask) -> Option<f64> {
        self.states
            .binary_search(&state)
            .ok()
            .map(|idx| self.probs[idx])
    }
}

/// Threshold beyond which state weights are accumulated in log space.
/// `prod rho_i` over at most 16 links at rho <= 100 stays far below f64
/// overflow, so the direct path is safe there and cheaper.
const DIRECT_WEIGHT_LINKS: usize = 16;
const DIRECT_WEIGHT_MAX_RHO: f64 = 100.0;

/// Computes the product-form stationary distribution of the saturated
/// sub-network consisting of the links in `active`.
///
/// State `s` gets probability `prod_{i in s} rho_i / Z` where `Z` sums the
/// same product over every feasible state of the sub-network; the empty
/// product is 1, so the all-idle state always carries `1/Z`.
pub fn stationary_distribution(
    g: &ContentionGraph,
    active: SubnetworkMask,
) -> StationaryDistribution {
    let states = enumerate_independent_sets(g, active);
    let active_links = (active.bits() & g.full_mask().bits()).count_ones() as usize;
    let max_rho = active
        .iter_links()
        .filter(|&i| i < g.n())
        .map(|i| g.rho_of(i))
        .fold(0.0_f64, f64::max);

    let use_log_space = active_links > DIRECT_WEIGHT_LINKS || max_rho > DIRECT_WEIGHT_MAX_RHO;
    let (probs, log_partition) = if use_log_space {
        let log_rho: Vec<f64> = g.rho().iter().map(|r| r.ln()).collect();
        let log_weights: Vec<f64> = states
            .iter()
            .map(|s| kahan_sum(s.iter_links().map(|i| log_rho[i])))
            .collect();
        let log_z = log_sum_exp(&log_weights);
        let probs = log_weights.iter().map(|lw| (lw - log_z).exp()).collect();
        (probs, log_z)
    } else {
        let weights: Vec<f64> = states
            .iter()
            .map(|s| s.iter_links().map(|i| g.rho_of(i)).product())
            .collect();
        let z = kahan_sum(weights.iter().copied());
        let probs = weights.iter().map(|w| w / z).collect();
        (probs, z.ln())
    };

    StationaryDistribution {
        states,
        probs,
        log_partition,
    }
}

/// Per-link saturated throughputs of the sub-network `active`: for an on
/// link, the stationary probability mass of the states in which it
/// transmits; zero for every off link.
pub fn saturated_throughputs(g: &ContentionGraph, active: SubnetworkMask) -> ThroughputVector {
    let dist = stationary_distribution(g, active);
    let mut th = vec![KahanSum::new(); g.n()];
    for (state, &p) in dist.states.iter().zip(&dist.probs) {
        for i in state.iter_links() {
            th[i].add(p);
        }
    }
    ThroughputVector(th.into_iter().map(|acc| acc.value()).collect())
}

/// Memoized view of [`saturated_throughputs`] for one graph, keyed by the
/// sub-network mask. Useful when the same induced sub-networks are queried
/// repeatedly (interactive exploration, incremental sweeps); the dense
/// [`crate::mixture::SubnetworkThroughputMatrix`] plays this role for the
/// full decomposition. Not synchronized: share per worker, not across.
pub struct ThroughputCache<'g> {
    graph: &'g ContentionGraph,
    memo: HashMap<u32, ThroughputVector>,
}

impl<'g> ThroughputCache<'g> {
    pub fn new(graph: &'g ContentionGraph) -> Self {
        Self {
            graph,
            memo: HashMap::new(),
        }
    }

    pub fn get(&mut self, active: SubnetworkMask) -> &ThroughputVector {
        self.memo
            .entry(active.bits())
            .or_insert_with(|| saturated_throughputs(self.graph, active))
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}
