//! Dense two-phase revised simplex for linear programs with bounded
//! variables.
//!
//! Solves `maximize c.x` subject to general `>=`/`<=`/`=` rows and per
//! variable bounds `l_j <= x_j <= u_j` (upper bounds may be infinite, lower
//! bounds must be finite). The solver keeps an explicit basis inverse, which
//! is cheap at the row counts this crate produces (one row per link plus the
//! probability-simplex row), while the column count may run into the tens of
//! thousands.
//!
//! Pivoting is deterministic: largest reduced cost with lowest-index
//! tie-breaks, falling back to Bland's rule after a run of degenerate steps
//! so cycling cannot occur. The returned solution is a basic feasible point,
//! i.e. a vertex of the feasible polytope.

// Tableau updates index several arrays by the same row/column counters, as
// in the textbook statement of the method; iterator forms hide that.
#![allow(clippy::needless_range_loop)]

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    GreaterEq,
    LessEq,
    Equal,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coefficients,
            relation,
            rhs,
        }
    }
}

/// A linear program in `maximize` form with boxed variables.
#[derive(Clone, Debug)]
pub struct Program {
    /// Objective coefficients, one per structural variable.
    pub maximize: Vec<f64>,
    /// Inclusive (lower, upper) bounds per structural variable.
    pub bounds: Vec<(f64, f64)>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Phase-1 certificate: the rows whose artificial variables could not be
/// driven to zero, i.e. the constraints that remain violated at the point
/// minimizing total violation.
#[derive(Clone, Debug, PartialEq)]
pub struct InfeasibilityReport {
    pub violated_rows: Vec<usize>,
    pub row_violations: Vec<f64>,
    pub total_violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Optimal(Solution),
    Infeasible(InfeasibilityReport),
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("objective is unbounded above")]
    Unbounded,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

const REDUCED_COST_TOL: f64 = 1e-9;
const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const DEGENERATE_STEP: f64 = 1e-12;
const BLAND_TRIGGER: usize = 25;
const REFACTOR_EVERY: usize = 100;
const MAX_ITERATIONS: usize = 50_000;

pub fn solve(program: &Program) -> Result<Outcome, SolveError> {
    let mut state = Tableau::new(program)?;

    // Phase 1: minimize total artificial mass.
    state.install_phase1_objective();
    state.iterate()?;
    let violation = state.total_artificial_value();
    if violation > FEASIBILITY_TOL {
        return Ok(Outcome::Infeasible(state.infeasibility_report()));
    }

    // Phase 2: original objective with artificials pinned at zero.
    state.install_phase2_objective();
    state.iterate()?;
    Ok(Outcome::Optimal(state.extract_solution()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau<'p> {
    program: &'p Program,
    n_structural: usize,
    n_rows: usize,
    /// Bounds for every variable: structural, then one slack and one
    /// artificial per row.
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Diagonal coefficient of each row's slack (+1 `<=`, -1 `>=`, 0-width
    /// bounds for `=`) and artificial (sign of the initial residual).
    slack_coeff: Vec<f64>,
    art_coeff: Vec<f64>,
    objective: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    basic_values: Vec<f64>,
    binv: Vec<Vec<f64>>,
    iterations: usize,
    pivots_since_refactor: usize,
    degenerate_streak: usize,
}

impl<'p> Tableau<'p> {
    fn new(program: &'p Program) -> Result<Self, SolveError> {
        let n = program.maximize.len();
        if program.bounds.len() != n {
            return Err(SolveError::Malformed(format!(
                "{} objective coefficients but {} bounds",
                n,
                program.bounds.len()
            )));
        }
        for (j, &(l, u)) in program.bounds.iter().enumerate() {
            if !l.is_finite() {
                return Err(SolveError::Malformed(format!(
                    "variable {j} needs a finite lower bound"
                )));
            }
            if u < l {
                return Err(SolveError::Malformed(format!(
                    "variable {j} has empty bound range [{l}, {u}]"
                )));
            }
        }
        let m = program.constraints.len();
        for (i, row) in program.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(SolveError::Malformed(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
            if !row.rhs.is_finite() {
                return Err(SolveError::Malformed(format!("row {i} rhs is not finite")));
            }
        }

        let total = n + 2 * m;
        let mut lower = vec![0.0; total];
        let mut upper = vec![0.0; total];
        for (j, &(l, u)) in program.bounds.iter().enumerate() {
            lower[j] = l;
            upper[j] = u;
        }

        // Residual of each row at the all-at-lower-bound starting point.
        let mut residual = vec![0.0; m];
        for (i, row) in program.constraints.iter().enumerate() {
            let mut acc = row.rhs;
            for (j, &a) in row.coefficients.iter().enumerate() {
                acc -= a * lower[j];
            }
            residual[i] = acc;
        }

        let mut slack_coeff = vec![0.0; m];
        let mut art_coeff = vec![1.0; m];
        let mut state = vec![VarState::AtLower; total];
        let mut basis = Vec::with_capacity(m);
        let mut basic_values = Vec::with_capacity(m);
        let mut binv = vec![vec![0.0; m]; m];

        for i in 0..m {
            let slack = n + i;
            let art = n + m + i;
            match program.constraints[i].relation {
                Relation::LessEq => {
                    slack_coeff[i] = 1.0;
                    upper[slack] = f64::INFINITY;
                }
                Relation::GreaterEq => {
                    slack_coeff[i] = -1.0;
                    upper[slack] = f64::INFINITY;
                }
                Relation::Equal => {
                    slack_coeff[i] = 1.0;
                    upper[slack] = 0.0; // pinned: no slack at all
                }
            }
            upper[art] = f64::INFINITY;

            let slack_can_start = match program.constraints[i].relation {
                Relation::LessEq => residual[i] >= 0.0,
                Relation::GreaterEq => residual[i] <= 0.0,
                Relation::Equal => false,
            };
            let (var, coeff) = if slack_can_start {
                (slack, slack_coeff[i])
            } else {
                art_coeff[i] = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
                (art, art_coeff[i])
            };
            state[var] = VarState::Basic(i);
            basis.push(var);
            basic_values.push(residual[i].abs());
            binv[i][i] = coeff; // the start basis is diagonal +/-1
        }

        Ok(Self {
            program,
            n_structural: n,
            n_rows: m,
            lower,
            upper,
            slack_coeff,
            art_coeff,
            objective: vec![0.0; total],
            state,
            basis,
            basic_values,
            binv,
            iterations: 0,
            pivots_since_refactor: 0,
            degenerate_streak: 0,
        })
    }

    fn is_artificial(&self, var: usize) -> bool {
        var >= self.n_structural + self.n_rows
    }

    fn column_entry(&self, row: usize, var: usize) -> f64 {
        let n = self.n_structural;
        let m = self.n_rows;
        if var < n {
            self.program.constraints[row].coefficients[var]
        } else if var < n + m {
            if row == var - n {
                self.slack_coeff[row]
            } else {
                0.0
            }
        } else if row == var - n - m {
            self.art_coeff[row]
        } else {
            0.0
        }
    }

    fn nonbasic_value(&self, var: usize) -> f64 {
        match self.state[var] {
            VarState::AtLower => self.lower[var],
            VarState::AtUpper => self.upper[var],
            VarState::Basic(row) => self.basic_values[row],
        }
    }

    fn install_phase1_objective(&mut self) {
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        let base = self.n_structural + self.n_rows;
        for i in 0..self.n_rows {
            self.objective[base + i] = -1.0;
        }
    }

    fn install_phase2_objective(&mut self) {
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        self.objective[..self.n_structural].copy_from_slice(&self.program.maximize);
        // Artificials are done: pin them to zero so they can never re-enter
        // or drift. Any still in the basis sit at value zero.
        let base = self.n_structural + self.n_rows;
        for i in 0..self.n_rows {
            self.upper[base + i] = 0.0;
        }
        self.refactorize()
            .expect("basis was nonsingular at end of phase 1");
        self.degenerate_streak = 0;
    }

    fn total_artificial_value(&self) -> f64 {
        let base = self.n_structural + self.n_rows;
        (0..self.n_rows)
            .map(|i| self.nonbasic_value(base + i))
            .sum()
    }

    fn infeasibility_report(&self) -> InfeasibilityReport {
        let base = self.n_structural + self.n_rows;
        let mut violated_rows = Vec::new();
        let mut row_violations = Vec::new();
        let mut total = 0.0;
        for i in 0..self.n_rows {
            let v = self.nonbasic_value(base + i);
            total += v;
            if v > FEASIBILITY_TOL {
                violated_rows.push(i);
                row_violations.push(v);
            }
        }
        InfeasibilityReport {
            violated_rows,
            row_violations,
            total_violation: total,
        }
    }

    /// Simplex multipliers `y = c_B * Binv`.
    fn multipliers(&self) -> Vec<f64> {
        let m = self.n_rows;
        let mut y = vec![0.0; m];
        for (r, &var) in self.basis.iter().enumerate() {
            let c = self.objective[var];
            if c != 0.0 {
                for k in 0..m {
                    y[k] += c * self.binv[r][k];
                }
            }
        }
        y
    }

    /// Reduced costs of all variables. Structural columns dominate the cost,
    /// so they are accumulated row-major.
    fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n_structural;
        let m = self.n_rows;
        let mut d = self.objective.clone();
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            let row = &self.program.constraints[i].coefficients;
            for (dj, &a) in d[..n].iter_mut().zip(row) {
                *dj -= yi * a;
            }
        }
        for i in 0..m {
            d[n + i] -= y[i] * self.slack_coeff[i];
            d[n + m + i] -= y[i] * self.art_coeff[i];
        }
        d
    }

    fn entering_direction(&self, var: usize, d: f64) -> Option<f64> {
        match self.state[var] {
            VarState::Basic(_) => None,
            VarState::AtLower if d > REDUCED_COST_TOL => Some(1.0),
            VarState::AtUpper if d < -REDUCED_COST_TOL => Some(-1.0),
            _ => None,
        }
    }

    fn choose_entering(&self, reduced: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for var in 0..reduced.len() {
            if self.is_artificial(var) {
                continue; // never re-enters; starts basic or stays at zero
            }
            if self.lower[var] == self.upper[var] {
                continue; // fixed variable, nothing to move
            }
            let Some(dir) = self.entering_direction(var, reduced[var]) else {
                continue;
            };
            if bland {
                return Some((var, dir));
            }
            let score = reduced[var].abs();
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((var, dir, score));
            }
        }
        best.map(|(var, dir, _)| (var, dir))
    }

    /// `w = Binv * A_enter`.
    fn ftran(&self, var: usize) -> Vec<f64> {
        let m = self.n_rows;
        let mut col = vec![0.0; m];
        for (i, c) in col.iter_mut().enumerate() {
            *c = self.column_entry(i, var);
        }
        let mut w = vec![0.0; m];
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[i][k] * col[k];
            }
            w[i] = acc;
        }
        w
    }

    fn iterate(&mut self) -> Result<(), SolveError> {
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(SolveError::Numerical(format!(
                    "no convergence after {MAX_ITERATIONS} iterations"
                )));
            }
            let y = self.multipliers();
            let reduced = self.reduced_costs(&y);
            let bland = self.degenerate_streak >= BLAND_TRIGGER;
            let Some((entering, dir)) = self.choose_entering(&reduced, bland) else {
                return Ok(()); // optimal for the current objective
            };
            self.iterations += 1;

            let w = self.ftran(entering);

            // Ratio test over the basic variables plus the entering
            // variable's own opposite bound.
            let mut step = self.upper[entering] - self.lower[entering]; // may be inf
            let mut leaving: Option<(usize, bool)> = None; // (row, hits_upper)
            for r in 0..self.n_rows {
                let delta = dir * w[r]; // basic value moves by -delta * t
                let var = self.basis[r];
                let (limit, hits_upper) = if delta > PIVOT_TOL {
                    (
                        (self.basic_values[r] - self.lower[var]).max(0.0) / delta,
                        false,
                    )
                } else if delta < -PIVOT_TOL {
                    let u = self.upper[var];
                    if !u.is_finite() {
                        continue;
                    }
                    ((u - self.basic_values[r]).max(0.0) / -delta, true)
                } else {
                    continue;
                };
                let replace = match leaving {
                    None => limit < step,
                    // Tie: prefer the smallest leaving variable index, which
                    // is what Bland's rule needs to preclude cycling.
                    Some((prev_row, _)) => {
                        limit < step - 1e-15
                            || (limit <= step + 1e-15 && var < self.basis[prev_row])
                    }
                };
                if replace {
                    step = limit.min(step);
                    leaving = Some((r, hits_upper));
                }
            }

            if !step.is_finite() {
                return Err(SolveError::Unbounded);
            }
            self.degenerate_streak = if step < DEGENERATE_STEP {
                self.degenerate_streak + 1
            } else {
                0
            };

            match leaving {
                None => {
                    // Bound flip: the entering variable crosses to its other
                    // bound; the basis is unchanged.
                    for r in 0..self.n_rows {
                        self.basic_values[r] -= dir * step * w[r];
                    }
                    self.state[entering] = match self.state[entering] {
                        VarState::AtLower => VarState::AtUpper,
                        VarState::AtUpper => VarState::AtLower,
                        VarState::Basic(_) => unreachable!("entering variable was basic"),
                    };
                }
                Some((row, hits_upper)) => {
                    let pivot = w[row];
                    if pivot.abs() < PIVOT_TOL {
                        return Err(SolveError::Numerical(format!(
                            "pivot magnitude {:.3e} below tolerance at iteration {}",
                            pivot.abs(),
                            self.iterations
                        )));
                    }
                    let entering_value = match self.state[entering] {
                        VarState::AtLower => self.lower[entering] + step,
                        VarState::AtUpper => self.upper[entering] - step,
                        VarState::Basic(_) => unreachable!(),
                    };
                    for r in 0..self.n_rows {
                        if r != row {
                            self.basic_values[r] -= dir * step * w[r];
                        }
                    }
                    let departing = self.basis[row];
                    self.state[departing] = if hits_upper {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.basis[row] = entering;
                    self.state[entering] = VarState::Basic(row);
                    self.basic_values[row] = entering_value;

                    // Eta update of the explicit inverse.
                    let m = self.n_rows;
                    for i in 0..m {
                        if i == row {
                            continue;
                        }
                        let factor = w[i] / pivot;
                        if factor != 0.0 {
                            for k in 0..m {
                                self.binv[i][k] -= factor * self.binv[row][k];
                            }
                        }
                    }
                    for k in 0..m {
                        self.binv[row][k] /= pivot;
                    }

                    self.pivots_since_refactor += 1;
                    if self.pivots_since_refactor >= REFACTOR_EVERY {
                        self.refactorize()?;
                    }
                }
            }
        }
    }

    /// Rebuilds the basis inverse from scratch and recomputes the basic
    /// values from the bound-resting nonbasic variables.
    fn refactorize(&mut self) -> Result<(), SolveError> {
        let m = self.n_rows;
        let mut b = vec![vec![0.0; m]; m];
        for (r, &var) in self.basis.iter().enumerate() {
            for (i, row) in b.iter_mut().enumerate() {
                row[r] = self.column_entry(i, var);
            }
        }
        let inv = invert(&b)
            .ok_or_else(|| SolveError::Numerical("basis matrix is numerically singular".into()))?;
        self.binv = inv;

        // b_adj = b - sum over nonbasic variables resting at nonzero bounds.
        let mut rhs = vec![0.0; m];
        for (i, row) in self.program.constraints.iter().enumerate() {
            rhs[i] = row.rhs;
        }
        for var in 0..self.state.len() {
            if matches!(self.state[var], VarState::Basic(_)) {
                continue;
            }
            let v = self.nonbasic_value(var);
            if v == 0.0 {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r -= self.column_entry(i, var) * v;
            }
        }
        for r in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                acc += self.binv[r][k] * rhs[k];
            }
            self.basic_values[r] = acc;
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn extract_solution(&mut self) -> Solution {
        // A final refactorization sharpens the basic values before readout.
        let _ = self.refactorize();
        let mut x = vec![0.0; self.n_structural];
        for (j, xj) in x.iter_mut().enumerate() {
            let raw = self.nonbasic_value(j);
            *xj = raw.clamp(self.lower[j], self.upper[j].min(f64::INFINITY));
        }
        let objective: f64 = x
            .iter()
            .zip(&self.program.maximize)
            .map(|(xj, cj)| xj * cj)
            .sum();
        Solution {
            x,
            objective,
            iterations: self.iterations,
        }
    }
}

/// Gauss-Jordan inversion with partial pivoting; `None` when singular.
fn invert(matrix: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let m = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut inv = vec![vec![0.0; m]; m];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..m {
        let pivot_row =
            (col..m).max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))?;
        if a[pivot_row][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col];
        for k in 0..m {
            a[col][k] /= pivot;
            inv[col][k] /= pivot;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let factor = a[r][col];
            if factor != 0.0 {
                for k in 0..m {
                    a[r][k] -= factor * a[col][k];
                    inv[r][k] -= factor * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}
