//! Contention graphs: the carrier-sensing relation between links.
//!
//! A vertex is a link (one transmitter-receiver pair); an edge joins two
//! links whose transmitters sense each other, so they never transmit
//! simultaneously. The feasible transmission states of such a network are
//! exactly the independent sets of the graph, which this module enumerates.
//!
//! Link indices are 0-based everywhere in the API. The line-oriented topology
//! file format uses 1-based labels and is translated at the parse boundary.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on the number of links. The sub-network decomposition walks all
/// `2^n` link subsets, so anything beyond this is out of reach for the exact
/// pipeline regardless of representation.
pub const MAX_LINKS: usize = 24;

/// Set of links currently transmitting. Valid states are independent sets of
/// the contention graph: no two set bits may be joined by an edge.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateMask(u32);

/// Set of links participating in channel competition (the "on" links of a
/// saturated sub-network). Any subset of the links is legal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubnetworkMask(u32);

macro_rules! mask_impl {
    ($name:ident) => {
        impl $name {
            pub const EMPTY: Self = Self(0);

            /// Builds a mask from raw bits; bit `i` stands for link `i`.
            pub const fn from_bits(bits: u32) -> Self {
                Self(bits)
            }

            /// Mask with the lowest `n` bits set.
            pub const fn all(n: usize) -> Self {
                debug_assert!(n <= 32);
                if n >= 32 {
                    Self(u32::MAX)
                } else {
                    Self((1u32 << n) - 1)
                }
            }

            pub const fn bits(self) -> u32 {
                self.0
            }

            pub const fn contains(self, link: usize) -> bool {
                link < 32 && self.0 & (1 << link) != 0
            }

            pub const fn with(self, link: usize) -> Self {
                Self(self.0 | (1 << link))
            }

            pub const fn without(self, link: usize) -> Self {
                Self(self.0 & !(1 << link))
            }

            pub const fn count(self) -> usize {
                self.0.count_ones() as usize
            }

            pub const fn is_empty(self) -> bool {
                self.0 == 0
            }

            /// Iterates the set link indices in ascending order.
            pub fn iter_links(self) -> impl Iterator<Item = usize> {
                let mut bits = self.0;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        None
                    } else {
                        let i = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        Some(i)
                    }
                })
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "(0b{:b})"), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "0b{:b}", self.0)
            }
        }
    };
}

mask_impl!(StateMask);
mask_impl!(SubnetworkMask);

impl StateMask {
    /// True when every transmitting link is also an "on" link.
    pub const fn is_subset_of(self, active: SubnetworkMask) -> bool {
        self.0 & !active.bits() == 0
    }
}

impl SubnetworkMask {
    /// Row index of this sub-network in the dense throughput matrix.
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

/// Errors from constructing or generating a contention graph.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("link count {0} outside supported range 1..={MAX_LINKS}")]
    LinkCountOutOfRange(usize),
    #[error("edge endpoint {index} out of range for {n} links")]
    EdgeIndexOutOfRange { index: usize, n: usize },
    #[error("self-loop on link {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("expected {expected} access intensities, got {got}")]
    RhoLength { expected: usize, got: usize },
    #[error("access intensity of link {index} must be positive and finite, got {value}")]
    InvalidRho { index: usize, value: f64 },
    #[error(
        "could not hit mean degree {target} +/- {window} in {attempts} attempts \
         (realized degrees ranged over {min:.3}..{max:.3})"
    )]
    DegreeWindowExhausted {
        target: f64,
        window: f64,
        attempts: usize,
        min: f64,
        max: f64,
    },
    #[error("target mean degree {target} out of range for {n} links")]
    MeanDegreeOutOfRange { target: f64, n: usize },
}

/// Errors from parsing the line-oriented topology format.
#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("missing `links N` header line")]
    MissingHeader,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An immutable contention graph: `n` links, a symmetric carrier-sensing
/// relation stored as unordered index pairs, and a per-link access intensity
/// `rho_i > 0` (mean transmission time over mean backoff countdown time).
#[derive(Clone, PartialEq)]
pub struct ContentionGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<u32>,
    rho: Vec<f64>,
}

impl fmt::Debug for ContentionGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContentionGraph")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .field("rho", &self.rho)
            .finish()
    }
}

impl ContentionGraph {
    /// Builds a graph from unordered edge pairs and per-link access
    /// intensities. Edges may be given in either orientation but each pair at
    /// most once.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        rho: Vec<f64>,
    ) -> Result<Self, GraphError> {
        if n == 0 || n > MAX_LINKS {
            return Err(GraphError::LinkCountOutOfRange(n));
        }
        if rho.len() != n {
            return Err(GraphError::RhoLength {
                expected: n,
                got: rho.len(),
            });
        }
        for (i, &r) in rho.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(GraphError::InvalidRho { index: i, value: r });
            }
        }

        let mut canonical: Vec<(usize, usize)> = Vec::new();
        let mut seen = HashSet::new();
        let mut neighbors = vec![0u32; n];
        for (a, b) in edges {
            if a >= n {
                return Err(GraphError::EdgeIndexOutOfRange { index: a, n });
            }
            if b >= n {
                return Err(GraphError::EdgeIndexOutOfRange { index: b, n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let pair = (a.min(b), a.max(b));
            if !seen.insert(pair) {
                return Err(GraphError::DuplicateEdge(pair.0, pair.1));
            }
            canonical.push(pair);
            neighbors[a] |= 1 << b;
            neighbors[b] |= 1 << a;
        }
        canonical.sort_unstable();

        Ok(Self {
            n,
            edges: canonical,
            neighbors,
            rho,
        })
    }

    /// Convenience constructor with the same access intensity on every link.
    pub fn uniform(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        rho: f64,
    ) -> Result<Self, GraphError> {
        Self::new(n, edges, vec![rho; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Canonical edge list: pairs `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn rho_of(&self, link: usize) -> f64 {
        self.rho[link]
    }

    /// Bit mask of the links that can sense `link`.
    pub fn neighbor_mask(&self, link: usize) -> u32 {
        self.neighbors[link]
    }

    /// Sub-network mask with every link on.
    pub fn full_mask(&self) -> SubnetworkMask {
        SubnetworkMask::all(self.n)
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    /// Saturation ceiling `rho_i / (1 + rho_i)`: the throughput link `i`
    /// obtains when it never has to share the channel. No feasible target can
    /// exceed it.
    pub fn saturation_ceiling(&self, link: usize) -> f64 {
        let r = self.rho[link];
        r / (1.0 + r)
    }

    /// True when no two transmitting links in `state` sense each other.
    pub fn is_independent(&self, state: StateMask) -> bool {
        state
            .iter_links()
            .all(|i| self.neighbors[i] & state.bits() == 0)
    }

    /// Returns the graph induced by the links in `active` together with the
    /// mapping from new (compacted) indices back to the original ones.
    /// `active` must contain at least one link of the graph.
    pub fn induced_subgraph(&self, active: SubnetworkMask) -> (ContentionGraph, Vec<usize>) {
        let keep: Vec<usize> = active.iter_links().filter(|&i| i < self.n).collect();
        assert!(!keep.is_empty(), "induced subgraph of an empty link set");
        let mut new_index = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| active.contains(a) && active.contains(b))
            .map(|&(a, b)| (new_index[a], new_index[b]));
        let rho = keep.iter().map(|&i| self.rho[i]).collect();
        let g = ContentionGraph::new(keep.len(), edges, rho)
            .expect("induced subgraph of a valid graph is valid");
        (g, keep)
    }

    /// Same topology with every access intensity multiplied by `factor`.
    pub fn scale_rho(&self, factor: f64) -> Result<Self, GraphError> {
        let rho = self.rho.iter().map(|r| r * factor).collect();
        Self::new(self.n, self.edges.iter().copied(), rho)
    }

    /// Same topology with a single access intensity on every link.
    pub fn with_uniform_rho(&self, rho: f64) -> Result<Self, GraphError> {
        Self::new(self.n, self.edges.iter().copied(), vec![rho; self.n])
    }
}

/// Enumerates every feasible transmission state of the links in `active`:
/// all independent sets of the graph restricted to `active`, including the
/// empty state, in ascending order as unsigned integers.
///
/// Works by branching on link indices from the highest bit down, trying
/// "off" before "on" and pruning the "on" branch when a neighbor is already
/// transmitting, so the output comes out sorted without a final sort and
/// sparse graphs never touch most of the `2^n` subsets.
pub fn enumerate_independent_sets(g: &ContentionGraph, active: SubnetworkMask) -> Vec<StateMask> {
    let active = SubnetworkMask::from_bits(active.bits() & g.full_mask().bits());
    let mut out = Vec::new();
    descend(g, active, g.n, 0, &mut out);
    out
}

fn descend(
    g: &ContentionGraph,
    active: SubnetworkMask,
    bit: usize,
    current: u32,
    out: &mut Vec<StateMask>,
) {
    if bit == 0 {
        out.push(StateMask::from_bits(current));
        return;
    }
    let link = bit - 1;
    descend(g, active, link, current, out);
    if active.contains(link) && g.neighbors[link] & current == 0 {
        descend(g, active, link, current | (1 << link), out);
    }
}

/// Samples a contention graph with `n` links where each pair senses each
/// other independently with probability `target_mean_degree / (n - 1)`,
/// re-drawing until the realized mean degree `2|E|/n` lands within
/// `target_mean_degree +/- 0.3`. Deterministic for a fixed seed. Every link
/// gets [`crate::DEFAULT_ACCESS_INTENSITY`]; adjust with
/// [`ContentionGraph::with_uniform_rho`] or [`ContentionGraph::scale_rho`].
pub fn random_graph(
    n: usize,
    target_mean_degree: f64,
    rng_seed: u64,
) -> Result<ContentionGraph, GraphError> {
    const WINDOW: f64 = 0.3;
    const MAX_ATTEMPTS: usize = 10_000;

    if n == 0 || n > MAX_LINKS {
        return Err(GraphError::LinkCountOutOfRange(n));
    }
    if !(0.0..=(n as f64 - 1.0).max(0.0)).contains(&target_mean_degree) {
        return Err(GraphError::MeanDegreeOutOfRange {
            target: target_mean_degree,
            n,
        });
    }

    let p = if n > 1 {
        target_mean_degree / (n as f64 - 1.0)
    } else {
        0.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut realized_min = f64::INFINITY;
    let mut realized_max = f64::NEG_INFINITY;

    for _ in 0..MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if p == 1.0 || (p > 0.0 && rng.random::<f64>() < p) {
                    edges.push((a, b));
                }
            }
        }
        let realized = 2.0 * edges.len() as f64 / n as f64;
        realized_min = realized_min.min(realized);
        realized_max = realized_max.max(realized);
        if (realized - target_mean_degree).abs() <= WINDOW {
            return ContentionGraph::new(n, edges, vec![crate::DEFAULT_ACCESS_INTENSITY; n]);
        }
    }

    Err(GraphError::DegreeWindowExhausted {
        target: target_mean_degree,
        window: WINDOW,
        attempts: MAX_ATTEMPTS,
        min: realized_min,
        max: realized_max,
    })
}

/// Parses the line-oriented topology format:
///
/// ```text
/// # comment
/// links 4
/// rho * 5.3548      # default access intensity for all links
/// rho 2 4.0         # per-link override, 1-based label
/// edge 1 3
/// edge 1 4
/// ```
///
/// The `links` header must come first. `rho` lines are optional; links
/// without an explicit value fall back to the `rho *` default, or to
/// [`crate::DEFAULT_ACCESS_INTENSITY`] when no `rho *` line is present.
/// Edge labels are 1-based and each unordered pair may appear once.
pub fn parse_topology(text: &str) -> Result<ContentionGraph, TopologyError> {
    let syntax = |line: usize, reason: String| TopologyError::Syntax { line, reason };

    let mut n: Option<usize> = None;
    let mut global_rho: Option<f64> = None;
    let mut link_rho: Vec<Option<f64>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();

        match keyword {
            "links" => {
                if n.is_some() {
                    return Err(syntax(line_no, "duplicate `links` header".into()));
                }
                let [count] = rest[..] else {
                    return Err(syntax(line_no, "expected `links N`".into()));
                };
                let count: usize = count
                    .parse()
                    .map_err(|_| syntax(line_no, format!("invalid link count `{count}`")))?;
                if count == 0 || count > MAX_LINKS {
                    return Err(GraphError::LinkCountOutOfRange(count).into());
                }
                link_rho = vec![None; count];
                n = Some(count);
            }
            "rho" => {
                let n = n.ok_or(TopologyError::MissingHeader)?;
                let [which, value] = rest[..] else {
                    return Err(syntax(
                        line_no,
                        "expected `rho I VALUE` or `rho * VALUE`".into(),
                    ));
                };
                let value: f64 = value
                    .parse()
                    .map_err(|_| syntax(line_no, format!("invalid access intensity `{value}`")))?;
                if !(value.is_finite() && value > 0.0) {
                    return Err(syntax(
                        line_no,
                        format!("access intensity must be positive and finite, got {value}"),
                    ));
                }
                if which == "*" {
                    if global_rho.replace(value).is_some() {
                        return Err(syntax(line_no, "duplicate `rho *` line".into()));
                    }
                } else {
                    let label: usize = which
                        .parse()
                        .map_err(|_| syntax(line_no, format!("invalid link label `{which}`")))?;
                    if label == 0 || label > n {
                        return Err(syntax(
                            line_no,
                            format!("link label {label} out of range 1..={n}"),
                        ));
                    }
                    if link_rho[label - 1].replace(value).is_some() {
                        return Err(syntax(line_no, format!("duplicate `rho {label}` line")));
                    }
                }
            }
            "edge" => {
                let n = n.ok_or(TopologyError::MissingHeader)?;
                let [a, b] = rest[..] else {
                    return Err(syntax(line_no, "expected `edge I J`".into()));
                };
                let parse_label = |tok: &str| -> Result<usize, TopologyError> {
                    let label: usize = tok
                        .parse()
                        .map_err(|_| syntax(line_no, format!("invalid link label `{tok}`")))?;
                    if label == 0 || label > n {
                        return Err(syntax(
                            line_no,
                            format!("link label {label} out of range 1..={n}"),
                        ));
                    }
                    Ok(label)
                };
                let a = parse_label(a)?;
                let b = parse_label(b)?;
                if a == b {
                    return Err(GraphError::SelfLoop(a).into());
                }
                edges.push((a - 1, b - 1));
            }
            other => {
                return Err(syntax(line_no, format!("unknown directive `{other}`")));
            }
        }
    }

    let n = n.ok_or(TopologyError::MissingHeader)?;
    let default = global_rho.unwrap_or(crate::DEFAULT_ACCESS_INTENSITY);
    let rho = link_rho.into_iter().map(|r| r.unwrap_or(default)).collect();
    Ok(ContentionGraph::new(n, edges, rho)?)
}
