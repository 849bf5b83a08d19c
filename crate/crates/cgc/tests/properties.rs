//! Structural invariants checked over randomized inputs: distribution
//! normalization, the zero pattern and linearity of the mixture machinery,
//! the optimizer's support bound, simulator determinism, and the
//! mutual-exclusion audit.

mod common;

use cgc::graph::ContentionGraph;
use cgc::lp::{solve_lp, LpStatus, RequirementVector};
use cgc::mixture::{combine_throughputs, QVector, SubnetworkThroughputMatrix};
use cgc::product_form::stationary_distribution;
use cgc::sim::{audit_mutual_exclusion, simulate, SimConfig};
use cgc::{OfferedLoadVector, SubnetworkMask};
use proptest::prelude::*;

/// A graph on 2..=6 links: any edge subset, one shared access intensity.
fn small_graph() -> impl Strategy<Value = ContentionGraph> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let max_edges = n * (n - 1) / 2;
            (
                Just(n),
                0u64..(1 << max_edges),
                // Spans weak to aggressive contention.
                0.5f64..8.0,
            )
        })
        .prop_map(|(n, edge_bits, rho)| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if edge_bits >> k & 1 == 1 {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            ContentionGraph::uniform(n, edges, rho).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    /// The stationary distribution is a probability distribution, tightly.
    #[test]
    fn stationary_distribution_normalizes(g in small_graph()) {
        let masks = [g.full_mask(), SubnetworkMask::from_bits(0b11), SubnetworkMask::EMPTY];
        for active in masks {
            let dist = stationary_distribution(&g, active);
            let total: f64 = dist.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "sums to {total}");
            prop_assert!(dist.probs().iter().all(|&p| p >= 0.0));
        }
    }

    /// Row J of the matrix is nonzero exactly on the links in J.
    #[test]
    fn matrix_zero_pattern_follows_the_mask(g in small_graph()) {
        let matrix = SubnetworkThroughputMatrix::build(&g);
        for (mask, row) in matrix.rows() {
            for (i, &th) in row.iter().enumerate() {
                if mask.contains(i) {
                    prop_assert!(th > 0.0, "link {i} on in {mask} but throughput 0");
                } else {
                    prop_assert_eq!(th, 0.0, "link {} off in {} but throughput {}", i, mask, th);
                }
            }
        }
    }

    /// Combining mixtures is linear: blending weights blends throughputs.
    #[test]
    fn mixture_combination_is_linear(
        g in small_graph(),
        seed_a in 0u64..1000,
        seed_b in 0u64..1000,
        alpha in 0.0f64..1.0,
    ) {
        use rand::{Rng, SeedableRng};
        let matrix = SubnetworkThroughputMatrix::build(&g);
        let n_sub = matrix.n_subnetworks();

        let random_q = |seed: u64| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..n_sub).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().sum();
            QVector::new(raw.into_iter().map(|w| w / total).collect()).unwrap()
        };
        let qa = random_q(seed_a);
        let qb = random_q(seed_b);

        let blended = QVector::new(
            qa.as_slice()
                .iter()
                .zip(qb.as_slice())
                .map(|(&a, &b)| alpha * a + (1.0 - alpha) * b)
                .collect(),
        )
        .unwrap();

        let th_a = combine_throughputs(&matrix, &qa).unwrap();
        let th_b = combine_throughputs(&matrix, &qb).unwrap();
        let th_blend = combine_throughputs(&matrix, &blended).unwrap();

        for i in 0..g.n() {
            let expected = alpha * th_a[i] + (1.0 - alpha) * th_b[i];
            prop_assert!(
                (th_blend[i] - expected).abs() < 1e-12,
                "link {i}: {} vs {expected}", th_blend[i]
            );
        }
    }

    /// Any feasible instance solves with at most n + 1 sub-networks in play.
    #[test]
    fn optimal_support_stays_within_bound(
        g in small_graph(),
        scale in proptest::collection::vec(0.0f64..1.0, 6),
    ) {
        let matrix = SubnetworkThroughputMatrix::build(&g);
        let r: Vec<f64> = matrix
            .saturated_row()
            .iter()
            .enumerate()
            .map(|(i, &th)| th * scale[i % scale.len()])
            .collect();
        let solution = solve_lp(&matrix, &RequirementVector::new(r).unwrap()).unwrap();
        prop_assert_eq!(solution.status, LpStatus::Optimal);
        prop_assert!(
            solution.nonzero_count <= g.n() + 1,
            "support {} on {} links", solution.nonzero_count, g.n()
        );
        // And the support list agrees with the count.
        prop_assert_eq!(solution.support.unwrap().len(), solution.nonzero_count);
    }
}

proptest! {
    // Simulation properties get fewer, smaller cases: each one runs a
    // packet-level simulation.
    #![proptest_config(ProptestConfig {
        cases: 12,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    /// Same seed, same everything; traces never violate carrier sensing.
    #[test]
    fn simulation_is_deterministic_and_exclusive(
        g in small_graph(),
        seed in 0u64..1 << 48,
        saturated in proptest::bool::ANY,
    ) {
        let cfg_base = if saturated {
            SimConfig::saturated()
        } else {
            let f: Vec<f64> = (0..g.n()).map(|i| if i % 2 == 0 { 0.25 } else { 0.05 }).collect();
            SimConfig::for_load(OfferedLoadVector::new(f).unwrap())
        };
        let cfg = cfg_base.with_duration(2_000.0).with_seed(seed).with_trace(true);

        let a = simulate(&g, &cfg).unwrap();
        let b = simulate(&g, &cfg).unwrap();
        prop_assert_eq!(&a, &b);

        let trace = a.trace.as_deref().unwrap();
        prop_assert!(audit_mutual_exclusion(&g, trace).is_ok());
    }
}

/// The audit itself must catch a fabricated violation, or the property
/// above proves nothing.
#[test]
fn audit_detects_fabricated_overlap() {
    use cgc::sim::{TraceEvent, TraceKind};
    let pair = ContentionGraph::uniform(2, [(0, 1)], 5.3548).unwrap();
    let trace = vec![
        TraceEvent {
            time: 0.0,
            link: 0,
            kind: TraceKind::TxStart,
        },
        TraceEvent {
            time: 0.5,
            link: 1,
            kind: TraceKind::TxStart,
        },
        TraceEvent {
            time: 1.0,
            link: 0,
            kind: TraceKind::TxEnd,
        },
        TraceEvent {
            time: 1.5,
            link: 1,
            kind: TraceKind::TxEnd,
        },
    ];
    let violation = audit_mutual_exclusion(&pair, &trace).unwrap_err();
    assert_eq!(violation.link, 1);
    assert_eq!(violation.neighbor, 0);
    assert_eq!(violation.time, 0.5);
}

/// Determinism across the full standing corpus with a fixed seed set: the
/// exact throughput vectors must match between two fresh runs.
#[test]
fn standing_corpus_simulations_repeat_exactly() {
    for (idx, g) in common::standing_corpus(4).into_iter().enumerate() {
        let cfg = SimConfig::saturated()
            .with_duration(1_000.0)
            .with_seed(idx as u64);
        let a = simulate(&g, &cfg).unwrap();
        let b = simulate(&g, &cfg).unwrap();
        assert_eq!(a, b, "corpus graph {idx} diverged");
    }
}
