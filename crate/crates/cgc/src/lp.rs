//! Offered-load optimization.
//!
//! Given a contention graph and a per-link minimum required throughput
//! `r_i`, this module finds the appearance-probability vector `q*` over the
//! `2^n` saturated sub-networks that maximizes the aggregate throughput
//!
//! ```text
//! maximize   sum_i sum_j th_i^j q_j
//! subject to sum_j th_i^j q_j >= r_i   for every link i
//!            sum_j q_j = 1,   0 <= q_j <= 1
//! ```
//!
//! and reads off the optimal throughput vector `th* = combine(m, q*)`. The
//! offered load that realizes it is simply `f* = th*`: pumping each link at
//! exactly its optimal long-run throughput reproduces the optimal mixture of
//! sub-networks.
//!
//! Solutions come from a vertex of the feasible polytope (a basic feasible
//! point of the simplex method), which guarantees that at most `n + 1`
//! entries of `q*` are nonzero — the number of constraint rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ContentionGraph, SubnetworkMask, MAX_LINKS};
use crate::mixture::{
    combine_throughputs, offered_load_from_throughput, MixtureError, OfferedLoadVector, QVector,
    SubnetworkThroughputMatrix,
};
use crate::product_form::ThroughputVector;
use crate::simplex::{self, Constraint, Outcome, Program, Relation, SolveError};

/// Entries of `q*` at or below this threshold count as zero when reporting
/// the support of a solution.
pub const SUPPORT_TOLERANCE: f64 = 1e-9;

/// Feasibility slack allowed on the constraint rows of a reported optimum.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("requirement {value} for link {link} is outside [0, 1)")]
    RequirementOutOfRange { link: usize, value: f64 },
    #[error("expected {expected} requirements, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Mixture(#[from] MixtureError),
    #[error("solver failed: {0}")]
    Solver(#[from] SolveError),
}

/// Per-link minimum required throughputs, each in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RequirementVector(Vec<f64>);

impl RequirementVector {
    pub fn new(r: Vec<f64>) -> Result<Self, LpError> {
        for (link, &value) in r.iter().enumerate() {
            if !value.is_finite() || !(0.0..1.0).contains(&value) {
                return Err(LpError::RequirementOutOfRange { link, value });
            }
        }
        Ok(Self(r))
    }

    /// No minimum at any link; always feasible.
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
        crate::numeric::kahan_sum(self.0.iter().copied())
    }
}

impl TryFrom<Vec<f64>> for RequirementVector {
    type Error = LpError;
    fn try_from(r: Vec<f64>) -> Result<Self, LpError> {
        Self::new(r)
    }
}

impl From<RequirementVector> for Vec<f64> {
    fn from(r: RequirementVector) -> Vec<f64> {
        r.0
    }
}

/// One link whose requirement exceeds its saturation ceiling `rho/(1+rho)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeilingViolation {
    pub link: usize,
    pub required: f64,
    pub ceiling: f64,
}

/// Outcome of the quick necessary-condition screen: no link can ever exceed
/// its isolated saturation throughput `rho_i/(1+rho_i)`, so a requirement
/// above that ceiling is certainly infeasible. Passing the screen does not
/// guarantee feasibility — contention between links can make a ceiling-
/// respecting vector unattainable; the optimization itself settles that.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub ceilings: Vec<f64>,
    pub violations: Vec<CeilingViolation>,
}

impl FeasibilityReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_feasibility(
    g: &ContentionGraph,
    r: &RequirementVector,
) -> Result<FeasibilityReport, LpError> {
    if r.len() != g.n() {
        return Err(LpError::DimensionMismatch {
            expected: g.n(),
            got: r.len(),
        });
    }
    let ceilings: Vec<f64> = (0..g.n()).map(|i| g.saturation_ceiling(i)).collect();
    let violations = r
        .as_slice()
        .iter()
        .zip(&ceilings)
        .enumerate()
        .filter(|&(_, (&required, &ceiling))| required > ceiling)
        .map(|(link, (&required, &ceiling))| CeilingViolation {
            link,
            required,
            ceiling,
        })
        .collect();
    Ok(FeasibilityReport {
        ceilings,
        violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    SizeCapExceeded,
}

/// Result of the offered-load optimization.
///
/// When `status` is [`LpStatus::Optimal`] the solution fields are populated;
/// when it is [`LpStatus::Infeasible`] only `infeasible_links` is, carrying
/// the links whose minimum-rate rows remained violated at the point of least
/// total violation. The dense `q_star` (length `2^n`) is kept in memory but
/// callers typically serialize only the sparse `support`; drop `q_star`
/// before writing if the full vector is not wanted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub th_star: Option<ThroughputVector>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_star: Option<OfferedLoadVector>,
    /// Sparse view of `q*`: `(mask, q)` for every entry above
    /// [`SUPPORT_TOLERANCE`], in ascending mask order.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub support: Option<Vec<(SubnetworkMask, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q_star: Option<QVector>,
    /// Number of entries of `q*` above [`SUPPORT_TOLERANCE`]; at most `n+1`.
    #[serde(default)]
    pub nonzero_count: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub infeasible_links: Option<Vec<usize>>,
}

impl LpSolution {
    fn infeasible(links: Vec<usize>) -> Self {
        Self {
            status: LpStatus::Infeasible,
            objective: None,
            th_star: None,
            f_star: None,
            support: None,
            q_star: None,
            nonzero_count: 0,
            infeasible_links: Some(links),
        }
    }

    fn size_cap_exceeded() -> Self {
        Self {
            status: LpStatus::SizeCapExceeded,
            objective: None,
            th_star: None,
            f_star: None,
            support: None,
            q_star: None,
            nonzero_count: 0,
            infeasible_links: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Formulates the linear program: one variable per sub-network, `n` minimum-
/// rate rows, and the probability-simplex row. Row `i < n` is link `i`'s
/// constraint; row `n` is the normalization.
pub fn build_lp(
    matrix: &SubnetworkThroughputMatrix,
    r: &RequirementVector,
) -> Result<Program, LpError> {
    let n = matrix.n_links();
    if r.len() != n {
        return Err(LpError::DimensionMismatch {
            expected: n,
            got: r.len(),
        });
    }
    let n_vars = matrix.n_subnetworks();
    let maximize = matrix.aggregate_per_subnetwork();
    let mut constraints = Vec::with_capacity(n + 1);
    for (i, &r_i) in r.as_slice().iter().enumerate() {
        let coefficients = matrix.rows().map(|(_, row)| row[i]).collect();
        constraints.push(Constraint::new(coefficients, Relation::GreaterEq, r_i));
    }
    constraints.push(Constraint::new(vec![1.0; n_vars], Relation::Equal, 1.0));
    Ok(Program {
        maximize,
        bounds: vec![(0.0, 1.0); n_vars],
        constraints,
    })
}

/// Builds and solves the program for `matrix` and `r`, and assembles the
/// full solution (throughputs, offered load, support).
pub fn solve_lp(
    matrix: &SubnetworkThroughputMatrix,
    r: &RequirementVector,
) -> Result<LpSolution, LpError> {
    let program = build_lp(matrix, r)?;
    match simplex::solve(&program)? {
        Outcome::Infeasible(report) => {
            // Rows 0..n are the per-link minimum-rate constraints; the
            // simplex row (index n) cannot be violated on its own.
            let links = report
                .violated_rows
                .into_iter()
                .filter(|&row| row < matrix.n_links())
                .collect();
            Ok(LpSolution::infeasible(links))
        }
        Outcome::Optimal(solution) => {
            let q_star = QVector::new(normalized(solution.x))?;
            let th_star = combine_throughputs(matrix, &q_star)?;
            let f_star = offered_load_from_throughput(&th_star)?;
            let support = q_star.support(SUPPORT_TOLERANCE);
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: Some(th_star.aggregate()),
                th_star: Some(th_star),
                f_star: Some(f_star),
                nonzero_count: support.len(),
                support: Some(support),
                q_star: Some(q_star),
                infeasible_links: None,
            })
        }
    }
}

/// Cleans solver round-off from a probability vector: clamps into [0, 1] and
/// rescales so the entries sum to exactly 1.
fn normalized(mut q: Vec<f64>) -> Vec<f64> {
    for v in q.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let total = crate::numeric::kahan_sum(q.iter().copied());
    if total > 0.0 {
        for v in q.iter_mut() {
            *v /= total;
        }
    }
    q
}

/// End-to-end optimization: sub-network matrix, linear program, and readout
/// of the optimal offered load `f* = th*`.
pub fn optimal_offered_load(
    g: &ContentionGraph,
    r: &RequirementVector,
) -> Result<LpSolution, LpError> {
    optimal_offered_load_capped(g, r, MAX_LINKS)
}

/// [`optimal_offered_load`] behind an explicit link-count cap; exceeding it
/// yields a solution with status [`LpStatus::SizeCapExceeded`] rather than
/// allocating the `2^n`-column program.
pub fn optimal_offered_load_capped(
    g: &ContentionGraph,
    r: &RequirementVector,
    max_links: usize,
) -> Result<LpSolution, LpError> {
    if r.len() != g.n() {
        return Err(LpError::DimensionMismatch {
            expected: g.n(),
            got: r.len(),
        });
    }
    let matrix = match SubnetworkThroughputMatrix::build_capped(g, max_links) {
        Ok(m) => m,
        Err(MixtureError::SizeCapExceeded { .. }) => return Ok(LpSolution::size_cap_exceeded()),
        Err(other) => return Err(other.into()),
    };
    solve_lp(&matrix, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StateMask;
    use crate::DEFAULT_ACCESS_INTENSITY as RHO;

    fn four_ring() -> ContentionGraph {
        ContentionGraph::uniform(4, [(0, 2), (0, 3), (1, 2), (1, 3)], RHO).unwrap()
    }

    fn ring_requirements() -> RequirementVector {
        RequirementVector::new(vec![0.1994, 0.3779, 0.4263, 0.4271]).unwrap()
    }

    #[test]
    fn requirement_vector_validation() {
        assert!(RequirementVector::new(vec![0.0, 0.5, 0.999]).is_ok());
        assert!(matches!(
            RequirementVector::new(vec![0.2, 1.0]),
            Err(LpError::RequirementOutOfRange { link: 1, .. })
        ));
        assert!(matches!(
            RequirementVector::new(vec![-0.1]),
            Err(LpError::RequirementOutOfRange { link: 0, .. })
        ));
        assert!(matches!(
            RequirementVector::new(vec![f64::NAN]),
            Err(LpError::RequirementOutOfRange { .. })
        ));
    }

    #[test]
    fn ceiling_screen_flags_only_true_violations() {
        let g = ContentionGraph::uniform(1, [], RHO).unwrap();
        let report = check_feasibility(&g, &RequirementVector::new(vec![0.9]).unwrap()).unwrap();
        assert!(!report.passes());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].link, 0);
        assert!((report.violations[0].ceiling - 0.84264).abs() < 1e-5);

        let report = check_feasibility(&g, &RequirementVector::zeros(1)).unwrap();
        assert!(report.passes());

        let report = check_feasibility(&four_ring(), &ring_requirements()).unwrap();
        assert!(report.passes(), "0.4271 is well below the 0.84264 ceiling");
    }

    #[test]
    fn single_link_program_shape() {
        let g = ContentionGraph::uniform(1, [], RHO).unwrap();
        let m = SubnetworkThroughputMatrix::build(&g);
        let lp = build_lp(&m, &RequirementVector::new(vec![0.5]).unwrap()).unwrap();
        assert_eq!(lp.maximize.len(), 2);
        assert!(lp.maximize[0].abs() < 1e-15);
        assert!((lp.maximize[1] - 0.84264).abs() < 1e-5);
        assert_eq!(lp.constraints.len(), 2);
        assert_eq!(lp.constraints[0].relation, Relation::GreaterEq);
        assert_eq!(lp.constraints[1].relation, Relation::Equal);
        assert_eq!(lp.bounds, vec![(0.0, 1.0); 2]);
    }

    #[test]
    fn ring_program_shape() {
        let m = SubnetworkThroughputMatrix::build(&four_ring());
        let lp = build_lp(&m, &ring_requirements()).unwrap();
        assert_eq!(lp.maximize.len(), 16);
        assert_eq!(lp.constraints.len(), 5);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = SubnetworkThroughputMatrix::build(&four_ring());
        let err = build_lp(&m, &RequirementVector::zeros(3)).unwrap_err();
        assert_eq!(
            err,
            LpError::DimensionMismatch {
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn single_link_forced_saturation() {
        // Requiring 0.5 of a 0.84264-capable link forces weight onto the
        // on sub-network; the optimum saturates the link outright.
        let g = ContentionGraph::uniform(1, [], RHO).unwrap();
        let sol = optimal_offered_load(&g, &RequirementVector::new(vec![0.5]).unwrap()).unwrap();
        assert!(sol.is_optimal());
        let sat = RHO / (1.0 + RHO);
        assert!((sol.objective.unwrap() - sat).abs() < 1e-9);
        let q = sol.q_star.as_ref().unwrap();
        assert!((q.as_slice()[1] - 1.0).abs() < 1e-9);
        assert!((sol.f_star.as_ref().unwrap().as_slice()[0] - sat).abs() < 1e-9);
    }

    #[test]
    fn single_link_unattainable_requirement() {
        let g = ContentionGraph::uniform(1, [], RHO).unwrap();
        let sol = optimal_offered_load(&g, &RequirementVector::new(vec![0.9]).unwrap()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert_eq!(sol.infeasible_links, Some(vec![0]));
        assert!(sol.objective.is_none());
    }

    #[test]
    fn ring_fixture_objective_and_loads() {
        let sol = optimal_offered_load(&four_ring(), &ring_requirements()).unwrap();
        assert!(sol.is_optimal());
        let objective = sol.objective.unwrap();
        assert!(
            (objective - 1.7064).abs() < 1e-3,
            "objective {objective} should be 1.7064 +- 1e-3"
        );
        let f = sol.f_star.as_ref().unwrap().as_slice();
        let expected = [0.4261, 0.4261, 0.4271, 0.4271];
        for (i, (&got, want)) in f.iter().zip(expected).enumerate() {
            assert!(
                (got - want).abs() < 5e-4,
                "link {i}: f* = {got}, expected about {want}"
            );
        }
        assert!(sol.nonzero_count <= 5);
    }

    #[test]
    fn optimal_solutions_satisfy_all_constraints() {
        let r = ring_requirements();
        let m = SubnetworkThroughputMatrix::build(&four_ring());
        let sol = solve_lp(&m, &r).unwrap();
        let th = sol.th_star.as_ref().unwrap();
        for (i, &r_i) in r.as_slice().iter().enumerate() {
            assert!(
                th[i] - r_i >= -CONSTRAINT_TOLERANCE,
                "link {i}: th* {} below requirement {r_i}",
                th[i]
            );
        }
        let q_sum: f64 = sol.q_star.as_ref().unwrap().as_slice().iter().sum();
        assert!((q_sum - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn edgeless_pair_saturates_both_links() {
        let g = ContentionGraph::uniform(2, [], RHO).unwrap();
        let sol = optimal_offered_load(&g, &RequirementVector::zeros(2)).unwrap();
        let sat = RHO / (1.0 + RHO);
        assert!((sol.objective.unwrap() - 2.0 * sat).abs() < 1e-9);
        let f = sol.f_star.as_ref().unwrap().as_slice();
        assert!((f[0] - sat).abs() < 1e-9 && (f[1] - sat).abs() < 1e-9);
    }

    #[test]
    fn requirements_equal_to_saturation_are_feasible() {
        // r = saturated throughputs exactly: the all-on indicator is a
        // feasible point, so the optimum must do at least as well.
        let g = four_ring();
        let m = SubnetworkThroughputMatrix::build(&g);
        let sat = m.saturated_row().to_vec();
        let agg_sat: f64 = sat.iter().sum();
        let sol = solve_lp(&m, &RequirementVector::new(sat).unwrap()).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.objective.unwrap() >= agg_sat - 1e-9);
    }

    #[test]
    fn objective_dominates_hand_built_feasible_mixtures() {
        let g = four_ring();
        let m = SubnetworkThroughputMatrix::build(&g);
        let r = ring_requirements();
        let sol = solve_lp(&m, &r).unwrap();
        let objective = sol.objective.unwrap();

        // The all-on indicator is infeasible here (0.4266 < 0.4271 on links
        // 3,4), so mix in the {3,4}-pair row just enough; any feasible q we
        // can construct must score no better than the optimum.
        let pair = SubnetworkMask::from_bits(0b1100);
        for blend in [0.0013, 0.002, 0.01, 0.1] {
            let mut q = vec![0.0; m.n_subnetworks()];
            q[m.n_subnetworks() - 1] = 1.0 - blend;
            q[pair.index()] = blend;
            let q = QVector::new(q).unwrap();
            let th = combine_throughputs(&m, &q).unwrap();
            let feasible = th
                .as_slice()
                .iter()
                .zip(r.as_slice())
                .all(|(&t, &req)| t >= req - 1e-12);
            if feasible {
                assert!(th.aggregate() <= objective + 1e-9);
            }
        }
    }

    #[test]
    fn support_bound_holds_across_requirement_sweeps() {
        let g = four_ring();
        let m = SubnetworkThroughputMatrix::build(&g);
        for offset in [0.0, 0.05, 0.1, 0.2, 0.3] {
            let r: Vec<f64> = m
                .saturated_row()
                .iter()
                .map(|&s| (s - offset).max(0.0))
                .collect();
            let sol = solve_lp(&m, &RequirementVector::new(r).unwrap()).unwrap();
            assert!(sol.is_optimal());
            assert!(
                sol.nonzero_count <= g.n() + 1,
                "support {} exceeds n+1 at offset {offset}",
                sol.nonzero_count
            );
        }
    }

    #[test]
    fn uniform_intensity_scaling_weakly_improves_the_unconstrained_optimum() {
        let g = four_ring();
        let r = RequirementVector::zeros(4);
        let mut last = f64::NEG_INFINITY;
        for scale in [1.0, 2.0, 3.0] {
            let scaled = g.scale_rho(scale).unwrap();
            let sol = optimal_offered_load(&scaled, &r).unwrap();
            let objective = sol.objective.unwrap();
            assert!(
                objective >= last - 1e-9,
                "objective fell from {last} to {objective} at scale {scale}"
            );
            last = objective;
        }
    }

    #[test]
    fn size_cap_reported_not_erred() {
        let g = four_ring();
        let sol = optimal_offered_load_capped(&g, &RequirementVector::zeros(4), 3).unwrap();
        assert_eq!(sol.status, LpStatus::SizeCapExceeded);
        assert!(sol.objective.is_none());
    }

    #[test]
    fn solution_json_round_trip_keeps_support_pairs() {
        let sol = optimal_offered_load(&four_ring(), &ring_requirements()).unwrap();
        let json = serde_json::to_string(&sol).unwrap();
        assert!(json.contains("\"status\":\"optimal\""));
        let back: LpSolution = serde_json::from_str(&json).unwrap();
        assert_eq!(back.status, LpStatus::Optimal);
        assert_eq!(back.support, sol.support);
        assert_eq!(back.nonzero_count, sol.nonzero_count);

        let infeasible = LpSolution::infeasible(vec![2]);
        let json = serde_json::to_string(&infeasible).unwrap();
        assert!(json.contains("\"infeasible\""));
        assert!(!json.contains("objective"));
        let back: LpSolution = serde_json::from_str(&json).unwrap();
        assert_eq!(back.infeasible_links, Some(vec![2]));
    }

    #[test]
    fn deterministic_resolves() {
        let g = four_ring();
        let r = ring_requirements();
        let a = optimal_offered_load(&g, &r).unwrap();
        let b = optimal_offered_load(&g, &r).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chain_with_binding_middle_requirement() {
        // 3-link chain 1-2-3: saturating the outer links starves the middle
        // one (0.11708 saturated), so demanding 0.3 there forces a mixture
        // that spends weight on sub-networks where link 2 runs alone or
        // against a single neighbor.
        let g = ContentionGraph::uniform(3, [(0, 1), (1, 2)], RHO).unwrap();
        let r = RequirementVector::new(vec![0.0, 0.3, 0.0]).unwrap();
        let sol = optimal_offered_load(&g, &r).unwrap();
        assert!(sol.is_optimal());
        let th = sol.th_star.as_ref().unwrap();
        assert!(th[1] >= 0.3 - CONSTRAINT_TOLERANCE);
        // The optimum must beat the saturated aggregate minus nothing: it
        // cannot exceed 2*0.84264 and must beat the best single row that
        // meets the constraint, e.g. {2} alone scores only 0.84264.
        let objective = sol.objective.unwrap();
        assert!(objective >= 0.84264 - 1e-9);
        assert!(objective <= 2.0 * 0.84264 + 1e-9);
        // The all-on row violates the middle constraint, so some weight must
        // sit elsewhere.
        let q = sol.q_star.as_ref().unwrap().as_slice();
        assert!(q[StateMask::all(3).bits() as usize] < 1.0 - 1e-6);
    }
}
