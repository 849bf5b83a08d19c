//! Shared fixtures and independent oracles for the integration tests.
//!
//! Nothing here reuses the solver or analysis code paths under test: the LP
//! oracle enumerates polytope vertices with its own Gaussian elimination, and
//! the graph corpus is built by exhaustive isomorphism reduction.

#![allow(dead_code)]

use cgc::graph::{random_graph, ContentionGraph};
use cgc::DEFAULT_ACCESS_INTENSITY;

// ---------------------------------------------------------------------------
// Graph corpora
// ---------------------------------------------------------------------------

/// All unordered vertex pairs of `{0..n}`, lexicographic.
fn vertex_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn recurse(remaining: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining.is_empty() {
            out.push(current.clone());
            return;
        }
        for k in 0..remaining.len() {
            let v = remaining.remove(k);
            current.push(v);
            recurse(remaining, current, out);
            current.pop();
            remaining.insert(k, v);
        }
    }
    let mut out = Vec::new();
    recurse(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Every graph on `n` labeled vertices, reduced to one representative per
/// isomorphism class by taking the lexicographically smallest edge bitmask
/// over all vertex relabelings. For n = 1..=4 this yields 1, 2, 4, 11 graphs.
pub fn nonisomorphic_graphs(n: usize, rho: f64) -> Vec<ContentionGraph> {
    let pairs = vertex_pairs(n);
    let pair_index: std::collections::HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let perms = permutations(n);

    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for edge_bits in 0u64..(1 << pairs.len()) {
        let canonical = perms
            .iter()
            .map(|perm| {
                let mut relabeled = 0u64;
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    if edge_bits >> k & 1 == 1 {
                        let (pa, pb) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                        relabeled |= 1 << pair_index[&(pa, pb)];
                    }
                }
                relabeled
            })
            .min()
            .unwrap();
        if seen.insert(canonical) {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| canonical >> k & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            out.push(ContentionGraph::uniform(n, edges, rho).unwrap());
        }
    }
    out
}

/// The standing corpus: every non-isomorphic graph with up to `max_n` links
/// at the default access intensity.
pub fn standing_corpus(max_n: usize) -> Vec<ContentionGraph> {
    (1..=max_n)
        .flat_map(|n| nonisomorphic_graphs(n, DEFAULT_ACCESS_INTENSITY))
        .collect()
}

/// Ten random 6-link graphs spanning sparse to fairly dense contention.
pub fn random_six_link_corpus() -> Vec<ContentionGraph> {
    let degrees = [1.5, 2.0, 2.5, 3.0, 3.5];
    (0..10)
        .map(|k| random_graph(6, degrees[k % degrees.len()], 0xC0FFEE ^ k as u64).unwrap())
        .collect()
}

// ---------------------------------------------------------------------------
// Brute-force LP oracle
// ---------------------------------------------------------------------------

/// Outcome of the brute-force oracle: the best vertex, or `None` when no
/// vertex of the polytope is feasible (which, the region being a bounded
/// polytope, means the LP is infeasible).
pub struct OracleSolution {
    pub objective: f64,
    pub q: Vec<f64>,
}

const ORACLE_TOL: f64 = 1e-9;

/// Solves
///
/// ```text
/// maximize    sum_j (sum_i th[j][i]) q_j
/// subject to  sum_j th[j][i] q_j >= r[i]   for every link i
///             sum_j q_j = 1,   0 <= q_j <= 1
/// ```
///
/// by enumerating every basis of the standard-form system and keeping the
/// best feasible vertex. Exponential in everything — reserve for tiny n.
pub fn oracle_lp(th: &[Vec<f64>], r: &[f64]) -> Option<OracleSolution> {
    let n_cols = th.len(); // structural variables q_j
    let n_links = r.len();
    let m = n_links + 1; // requirement rows + normalization
    let n_vars = n_cols + n_links; // q's, then one surplus per requirement

    // Row-major constraint matrix and right-hand side.
    let mut a = vec![vec![0.0; n_vars]; m];
    let mut b = vec![0.0; m];
    for i in 0..n_links {
        for (j, row) in th.iter().enumerate() {
            a[i][j] = row[i];
        }
        a[i][n_cols + i] = -1.0; // surplus turns >= into =
        b[i] = r[i];
    }
    a[n_links][..n_cols].fill(1.0);
    b[n_links] = 1.0;

    let objective_of = |q: &[f64]| -> f64 {
        q.iter()
            .enumerate()
            .map(|(j, &w)| w * th[j].iter().sum::<f64>())
            .sum()
    };

    let mut best: Option<OracleSolution> = None;
    let basis_sets = subsets_of_size(n_vars, m);
    for basis in &basis_sets {
        let in_basis: Vec<bool> = {
            let mut flags = vec![false; n_vars];
            for &v in basis {
                flags[v] = true;
            }
            flags
        };
        let nonbasic_q: Vec<usize> = (0..n_cols).filter(|&j| !in_basis[j]).collect();

        // Nonbasic surpluses sit at 0; nonbasic q's sit at 0 or 1, but the
        // normalization row rules out two or more at the upper bound.
        let mut upper_choices: Vec<Option<usize>> = vec![None];
        upper_choices.extend(nonbasic_q.iter().copied().map(Some));

        for upper in upper_choices {
            let mut rhs = b.clone();
            if let Some(j_up) = upper {
                for i in 0..m {
                    rhs[i] -= a[i][j_up];
                }
            }
            let cols: Vec<Vec<f64>> = basis
                .iter()
                .map(|&v| (0..m).map(|i| a[i][v]).collect())
                .collect();
            let Some(x_b) = solve_square(&cols, &rhs) else {
                continue; // singular basis; the vertex has another representation
            };

            // Bounds check: q in [0,1], surplus >= 0.
            let feasible = basis.iter().zip(&x_b).all(|(&v, &x)| {
                if v < n_cols {
                    (-ORACLE_TOL..=1.0 + ORACLE_TOL).contains(&x)
                } else {
                    x >= -ORACLE_TOL
                }
            });
            if !feasible {
                continue;
            }

            let mut q = vec![0.0; n_cols];
            if let Some(j_up) = upper {
                q[j_up] = 1.0;
            }
            for (&v, &x) in basis.iter().zip(&x_b) {
                if v < n_cols {
                    q[v] = x.clamp(0.0, 1.0);
                }
            }
            let objective = objective_of(&q);
            if best.as_ref().is_none_or(|cur| objective > cur.objective) {
                best = Some(OracleSolution { objective, q });
            }
        }
    }
    best
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn recurse(
        start: usize,
        n: usize,
        k: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for v in start..n {
            if n - v < k - current.len() {
                break;
            }
            current.push(v);
            recurse(v + 1, n, k, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    recurse(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Solves the square system whose columns are `cols` for `rhs` by Gaussian
/// elimination with partial pivoting; `None` when (numerically) singular.
// Elimination reads one row while updating another, so index loops it is.
#[allow(clippy::needless_range_loop)]
fn solve_square(cols: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = rhs.len();
    debug_assert!(cols.len() == m && cols.iter().all(|c| c.len() == m));

    // Augmented row-major copy.
    let mut mat = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            mat[i][j] = cols[j][i];
        }
        mat[i][m] = rhs[i];
    }

    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&p, &q| mat[p][col].abs().total_cmp(&mat[q][col].abs()))
            .unwrap();
        if mat[pivot_row][col].abs() < 1e-11 {
            return None;
        }
        mat.swap(col, pivot_row);
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = mat[row][col] / mat[col][col];
            if factor != 0.0 {
                for k in col..=m {
                    let delta = factor * mat[col][k];
                    mat[row][k] -= delta;
                }
            }
        }
    }
    Some((0..m).map(|i| mat[i][m] / mat[i][i]).collect())
}
