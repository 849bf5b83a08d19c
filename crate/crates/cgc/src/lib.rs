//! Throughput analysis and offered-load optimization for idealized CSMA
//! wireless networks.
//!
//! Links in a CSMA network are vertices of a *contention graph*; an edge joins
//! two links whose transmitters can carrier-sense each other, so neighbors
//! never transmit at the same time. For a saturated network the long-run
//! fraction of airtime each link wins has a product-form expression over the
//! independent sets of that graph ([`product_form`]). A network with finite
//! offered load is modeled as a probability mixture over the `2^n` saturated
//! sub-networks obtained by switching subsets of links "on" ([`mixture`]),
//! and the mixture weights that maximize aggregate throughput subject to
//! per-link minimum-rate constraints are found by a linear program ([`lp`]).
//! An event-driven simulator ([`sim`]) provides the empirical ground truth,
//! and [`experiments`] wires the whole pipeline into reproducible sweeps.
//!
//! The narrative guide under `book/` walks through each concept with runnable
//! examples; those snippets are compiled and executed by `cargo test --doc`.
//!
//! # Quick start
//!
//! ```
//! use cgc::graph::ContentionGraph;
//! use cgc::lp::{optimal_offered_load, RequirementVector};
//!
//! // Four links in a ring: 0-1 and 2-3 are mutually out of sensing range.
//! let g = ContentionGraph::uniform(4, [(0, 2), (0, 3), (1, 2), (1, 3)], 5.3548).unwrap();
//! let r = RequirementVector::new(vec![0.1994, 0.3779, 0.4263, 0.4271]).unwrap();
//! let sol = optimal_offered_load(&g, &r).unwrap();
//! assert!((sol.objective.unwrap() - 1.7064).abs() < 1e-3);
//! ```

pub mod experiments;
pub mod graph;
pub mod lp;
pub mod mixture;
mod numeric;
pub mod product_form;
pub mod sim;
pub mod simplex;

#[cfg(doctest)]
mod book;

pub use graph::{ContentionGraph, StateMask, SubnetworkMask, MAX_LINKS};
pub use mixture::{OfferedLoadVector, QVector, SubnetworkThroughputMatrix};
pub use product_form::ThroughputVector;

/// Default link access intensity (mean transmission time over mean backoff
/// countdown time) used when a topology file or generator does not specify
/// one. This is the value commonly measured for 802.11 basic-mode links.
pub const DEFAULT_ACCESS_INTENSITY: f64 = 5.3548;
