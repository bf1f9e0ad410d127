//! Dense linear-programming and linear-algebra kernel.
//!
//! Everything in this crate that needs optimization goes through the two
//! entry points here: [`solve_lp`] (two-phase primal simplex) and
//! [`solve_feasibility`] (phase one only). The kernel is deliberately dense
//! and dependency-free: the equilibrium systems it serves are tiny (tens of
//! variables) and the priority is deterministic, reproducible pivoting, not
//! throughput.

use serde::Serialize;
use thiserror::Error;

/// Shared tolerances for the LP kernel, threaded from the CLI.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NumericsConfig {
    /// Absolute residual accepted on constraints (phase-one optimum, final
    /// solution check).
    pub feas_tol: f64,
    /// Magnitude below which a tableau entry is treated as zero when
    /// selecting pivots.
    pub pivot_tol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            feas_tol: 1e-7,
            pivot_tol: 1e-9,
        }
    }
}

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// Status of a linear program after solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`]. `solution` and `objective_value` are populated
/// exactly when `status == Optimal`.
#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// A linear program in the form
///
/// ```text
/// maximize  c . v
/// subject to A_eq v  = b_eq
///            A_le v <= b_le
///            lower <= v <= upper   (lower defaults to 0, upper optional)
/// ```
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    a_eq: Vec<Vec<f64>>,
    b_eq: Vec<f64>,
    a_le: Vec<Vec<f64>>,
    b_le: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<Option<f64>>,
}

impl LinearProgram {
    /// New program over `num_vars` variables with zero objective and the
    /// default bounds `0 <= v`.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![0.0; num_vars],
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            a_le: Vec::new(),
            b_le: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Sets the maximization objective.
    pub fn maximize(&mut self, coefficients: Vec<f64>) -> &mut Self {
        self.objective = coefficients;
        self
    }

    /// Adds the equality `coefficients . v = rhs`.
    pub fn add_eq(&mut self, coefficients: Vec<f64>, rhs: f64) -> &mut Self {
        self.a_eq.push(coefficients);
        self.b_eq.push(rhs);
        self
    }

    /// Adds the inequality `coefficients . v <= rhs`.
    pub fn add_le(&mut self, coefficients: Vec<f64>, rhs: f64) -> &mut Self {
        self.a_le.push(coefficients);
        self.b_le.push(rhs);
        self
    }

    pub fn set_lower(&mut self, var: usize, bound: f64) -> &mut Self {
        self.lower[var] = bound;
        self
    }

    pub fn set_upper(&mut self, var: usize, bound: f64) -> &mut Self {
        self.upper[var] = Some(bound);
        self
    }

    fn validate(&self) -> Result<(), NumericsError> {
        let n = self.num_vars;
        let check_len = |len: usize, what: &str| {
            if len != n {
                Err(NumericsError::DimensionMismatch(format!(
                    "{what} has length {len}, expected {n}"
                )))
            } else {
                Ok(())
            }
        };
        check_len(self.objective.len(), "objective")?;
        check_len(self.lower.len(), "lower bounds")?;
        check_len(self.upper.len(), "upper bounds")?;
        for row in self.a_eq.iter().chain(self.a_le.iter()) {
            check_len(row.len(), "constraint row")?;
        }
        let all_finite = self
            .objective
            .iter()
            .chain(self.b_eq.iter())
            .chain(self.b_le.iter())
            .chain(self.lower.iter())
            .chain(self.a_eq.iter().flatten())
            .chain(self.a_le.iter().flatten())
            .all(|v| v.is_finite())
            && self.upper.iter().flatten().all(|v| v.is_finite());
        if !all_finite {
            return Err(NumericsError::DimensionMismatch(
                "non-finite entry in linear program".into(),
            ));
        }
        Ok(())
    }

    /// Residual of the worst-violated constraint at `v` (0 when feasible).
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, &b) in self.a_eq.iter().zip(&self.b_eq) {
            worst = worst.max((dot(row, v) - b).abs());
        }
        for (row, &b) in self.a_le.iter().zip(&self.b_le) {
            worst = worst.max(dot(row, v) - b);
        }
        for i in 0..self.num_vars {
            worst = worst.max(self.lower[i] - v[i]);
            if let Some(u) = self.upper[i] {
                worst = worst.max(v[i] - u);
            }
        }
        worst.max(0.0)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `lp` with a two-phase dense primal simplex.
///
/// Pivoting is Dantzig's rule until `2 * (rows + columns)` degenerate pivots
/// have accumulated, after which Bland's rule takes over so degenerate
/// equilibrium systems cannot cycle. Identical inputs always produce
/// bit-identical outputs.
pub fn solve_lp(lp: &LinearProgram, cfg: &NumericsConfig) -> Result<LpOutcome, NumericsError> {
    lp.validate()?;
    let mut tab = Tableau::assemble(lp, cfg);
    if !tab.phase_one()? {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            solution: None,
            objective_value: None,
        });
    }
    match tab.phase_two(lp)? {
        RunStatus::Unbounded => Ok(LpOutcome {
            status: LpStatus::Unbounded,
            solution: None,
            objective_value: None,
        }),
        RunStatus::Optimal => {
            let v = tab.extract(lp, cfg)?;
            let objective_value = dot(&lp.objective, &v);
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                solution: Some(v),
                objective_value: Some(objective_value),
            })
        }
    }
}

/// Phase-one feasibility: returns any point satisfying the constraints of
/// `lp` (its objective is ignored), or `None` when the region is empty.
pub fn solve_feasibility(
    lp: &LinearProgram,
    cfg: &NumericsConfig,
) -> Result<Option<Vec<f64>>, NumericsError> {
    lp.validate()?;
    let mut tab = Tableau::assemble(lp, cfg);
    if !tab.phase_one()? {
        return Ok(None);
    }
    Ok(Some(tab.extract(lp, cfg)?))
}

enum RunStatus {
    Optimal,
    Unbounded,
}

/// Dense simplex tableau over the standard-form rewrite of a
/// [`LinearProgram`]: variables shifted to zero lower bounds, upper bounds
/// and inequalities given slacks, artificials appended where no slack can
/// seed the basis.
struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    n_struct: usize,
    n_total: usize,
    art_start: usize,
    degenerate_pivots: usize,
    bland_threshold: usize,
    pivot_tol: f64,
    feas_tol: f64,
}

impl Tableau {
    fn assemble(lp: &LinearProgram, cfg: &NumericsConfig) -> Tableau {
        let n = lp.num_vars;
        // Shift v = w + lower so every structural variable has lower bound 0.
        let shift = &lp.lower;
        let mut raw_rows: Vec<(Vec<f64>, f64, bool)> = Vec::new(); // (coeffs, rhs, has_slack)
        for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
            raw_rows.push((row.clone(), b - dot(row, shift), false));
        }
        for (row, &b) in lp.a_le.iter().zip(&lp.b_le) {
            raw_rows.push((row.clone(), b - dot(row, shift), true));
        }
        for i in 0..n {
            if let Some(u) = lp.upper[i] {
                let mut row = vec![0.0; n];
                row[i] = 1.0;
                raw_rows.push((row, u - shift[i], true));
            }
        }

        let m = raw_rows.len();
        let n_slack = raw_rows.iter().filter(|r| r.2).count();
        let n_struct = n + n_slack;

        // First pass fixes the layout; artificials are appended afterwards so
        // every row has a known basic column.
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut basis_plan: Vec<Option<usize>> = Vec::with_capacity(m);
        let mut slack_idx = n;
        for (coeffs, rhs, has_slack) in &raw_rows {
            let mut row = vec![0.0; n_struct + 1];
            row[..n].copy_from_slice(coeffs);
            let mut slack_col = None;
            if *has_slack {
                row[slack_idx] = 1.0;
                slack_col = Some(slack_idx);
                slack_idx += 1;
            }
            row[n_struct] = *rhs;
            if *rhs < 0.0 {
                for entry in row.iter_mut() {
                    *entry = -*entry;
                }
                // A flipped slack has coefficient -1 and cannot seed the basis.
                slack_col = None;
            }
            basis_plan.push(slack_col);
            rows.push(row);
        }

        let n_art = basis_plan.iter().filter(|b| b.is_none()).count();
        let n_total = n_struct + n_art;
        let mut basis = Vec::with_capacity(m);
        let mut art_col = n_struct;
        for (row, plan) in rows.iter_mut().zip(&basis_plan) {
            let rhs = row.pop().expect("row has rhs");
            row.resize(n_total, 0.0);
            row.push(rhs);
            match plan {
                Some(col) => basis.push(*col),
                None => {
                    row[art_col] = 1.0;
                    basis.push(art_col);
                    art_col += 1;
                }
            }
        }

        Tableau {
            rows,
            cost: vec![0.0; n_total + 1],
            basis,
            n_struct,
            n_total,
            art_start: n_struct,
            degenerate_pivots: 0,
            bland_threshold: 2 * (m + n_total),
            pivot_tol: cfg.pivot_tol,
            feas_tol: cfg.feas_tol,
        }
    }

    /// Installs a maximization objective (over tableau columns) as the cost
    /// row and restores the canonical form for the current basis.
    fn set_objective(&mut self, col_obj: &[f64]) {
        for j in 0..self.n_total {
            self.cost[j] = -col_obj[j];
        }
        self.cost[self.n_total] = 0.0;
        for (i, &b) in self.basis.iter().enumerate() {
            let factor = self.cost[b];
            if factor != 0.0 {
                let row = &self.rows[i];
                for j in 0..=self.n_total {
                    self.cost[j] -= factor * row[j];
                }
            }
        }
    }

    /// Minimizes the sum of artificial variables. Returns whether the
    /// program is feasible.
    fn phase_one(&mut self) -> Result<bool, NumericsError> {
        if self.art_start == self.n_total {
            // Every row was seeded by a slack; the all-slack basis is feasible.
            return Ok(true);
        }
        let mut obj = vec![0.0; self.n_total];
        for j in self.art_start..self.n_total {
            obj[j] = -1.0;
        }
        self.set_objective(&obj);
        match self.run()? {
            RunStatus::Unbounded => Err(NumericsError::NumericalFailure(
                "phase one reported unbounded".into(),
            )),
            RunStatus::Optimal => {
                let infeasibility = -self.cost[self.n_total];
                if infeasibility > self.feas_tol {
                    return Ok(false);
                }
                self.evict_artificials();
                Ok(true)
            }
        }
    }

    /// Pivots basic artificials (all at value ~0 after a feasible phase one)
    /// onto structural columns where possible. Rows that admit no pivot are
    /// redundant and stay inert: artificials are never allowed to re-enter.
    fn evict_artificials(&mut self) {
        for i in 0..self.rows.len() {
            if self.basis[i] < self.art_start {
                continue;
            }
            let col = (0..self.n_struct)
                .find(|&j| self.rows[i][j].abs() > self.pivot_tol);
            if let Some(j) = col {
                self.pivot(i, j);
            }
        }
    }

    fn phase_two(&mut self, lp: &LinearProgram) -> Result<RunStatus, NumericsError> {
        // The objective over shifted variables w differs from c.v by a
        // constant, so maximizing c.w is equivalent; the reported value is
        // recomputed from the extracted point anyway.
        let mut obj = vec![0.0; self.n_total];
        obj[..lp.num_vars].copy_from_slice(&lp.objective);
        self.set_objective(&obj);
        self.run()
    }

    fn run(&mut self) -> Result<RunStatus, NumericsError> {
        let m = self.rows.len();
        let max_iterations = 10_000 + 1_000 * (m + self.n_total);
        for _ in 0..max_iterations {
            let Some(col) = self.entering() else {
                return Ok(RunStatus::Optimal);
            };
            let Some(row) = self.leaving(col) else {
                return Ok(RunStatus::Unbounded);
            };
            let rhs = self.rows[row][self.n_total];
            if rhs.abs() <= self.feas_tol {
                self.degenerate_pivots += 1;
            }
            self.pivot(row, col);
        }
        Err(NumericsError::NumericalFailure(
            "simplex iteration limit exceeded".into(),
        ))
    }

    fn entering(&self) -> Option<usize> {
        // Artificials start in the basis and may only ever leave; once out
        // they are discarded, in both phases.
        let limit = self.art_start;
        if self.degenerate_pivots >= self.bland_threshold {
            // Bland's rule: lowest eligible index.
            (0..limit).find(|&j| self.cost[j] < -self.pivot_tol)
        } else {
            // Dantzig's rule, ties broken by lowest index.
            let mut best: Option<(usize, f64)> = None;
            for j in 0..limit {
                let c = self.cost[j];
                if c < -self.pivot_tol && best.map_or(true, |(_, bc)| c < bc) {
                    best = Some((j, c));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows.len() {
            let a = self.rows[i][col];
            if a <= self.pivot_tol {
                continue;
            }
            let ratio = self.rows[i][self.n_total] / a;
            let better = match best {
                None => true,
                Some((bi, br)) => {
                    // Smallest ratio; ties broken on smallest basic variable
                    // index, which is what Bland's rule needs.
                    ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                }
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pivot = self.rows[r][c];
        let inv = 1.0 / pivot;
        for entry in self.rows[r].iter_mut() {
            *entry *= inv;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor != 0.0 {
                for (entry, &p) in row.iter_mut().zip(&pivot_row) {
                    *entry -= factor * p;
                }
                row[c] = 0.0;
            }
        }
        let factor = self.cost[c];
        if factor != 0.0 {
            for (entry, &p) in self.cost.iter_mut().zip(&pivot_row) {
                *entry -= factor * p;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reads the structural solution out of the basis and maps it back to
    /// the original variable space.
    fn extract(&self, lp: &LinearProgram, cfg: &NumericsConfig) -> Result<Vec<f64>, NumericsError> {
        let mut w = vec![0.0; self.n_total];
        for (i, &b) in self.basis.iter().enumerate() {
            w[b] = self.rows[i][self.n_total];
        }
        let mut v: Vec<f64> = (0..lp.num_vars)
            .map(|i| w[i].max(0.0) + lp.lower[i])
            .collect();
        for i in 0..lp.num_vars {
            if let Some(u) = lp.upper[i] {
                if v[i] > u {
                    v[i] = u;
                }
            }
        }
        let violation = lp.max_violation(&v);
        if violation > cfg.feas_tol {
            return Err(NumericsError::NumericalFailure(format!(
                "solution residual {violation:.3e} exceeds feasibility tolerance"
            )));
        }
        Ok(v)
    }
}

/// Computes the numerical rank of `matrix` by Gaussian elimination with
/// partial pivoting. A pivot counts when its magnitude exceeds
/// `tol * (1 + max |entry|)`.
pub fn matrix_rank(matrix: &[Vec<f64>], tol: f64) -> usize {
    let m = matrix.len();
    if m == 0 {
        return 0;
    }
    let n = matrix[0].len();
    let max_abs = matrix
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let threshold = tol * (1.0 + max_abs);
    let mut work: Vec<Vec<f64>> = matrix.to_vec();
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let (best_row, best_val) = (rank..m)
            .map(|r| (r, work[r][col].abs()))
            .fold((rank, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val <= threshold {
            continue;
        }
        work.swap(rank, best_row);
        let pivot = work[rank][col];
        for r in rank + 1..m {
            let factor = work[r][col] / pivot;
            if factor != 0.0 {
                for c in col..n {
                    work[r][c] -= factor * work[rank][c];
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NumericsConfig {
        NumericsConfig::default()
    }

    #[test]
    fn simple_bounded_maximum() {
        // max v1 + v2 s.t. v1 + v2 <= 1, v >= 0.
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, 1.0]).add_le(vec![1.0, 1.0], 1.0);
        let out = solve_lp(&lp, &cfg()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_bounds() {
        // v1 <= -1 conflicts with v1 >= 0.
        let mut lp = LinearProgram::new(1);
        lp.add_le(vec![1.0], -1.0);
        let out = solve_lp(&lp, &cfg()).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(1);
        lp.maximize(vec![1.0]);
        let out = solve_lp(&lp, &cfg()).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_pins_unique_point() {
        // {v1 = 0.5, v1 + v2 = 1, v >= 0} has the unique witness (0.5, 0.5).
        let mut lp = LinearProgram::new(2);
        lp.add_eq(vec![1.0, 0.0], 0.5).add_eq(vec![1.0, 1.0], 1.0);
        let w = solve_feasibility(&lp, &cfg()).unwrap().unwrap();
        assert!((w[0] - 0.5).abs() < 1e-9);
        assert!((w[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn feasibility_detects_conflict() {
        let mut lp = LinearProgram::new(1);
        lp.add_eq(vec![1.0], 2.0).add_le(vec![1.0], 1.0);
        assert!(solve_feasibility(&lp, &cfg()).unwrap().is_none());
    }

    #[test]
    fn empty_constraints_give_origin() {
        let lp = LinearProgram::new(1);
        let w = solve_feasibility(&lp, &cfg()).unwrap().unwrap();
        assert_eq!(w, vec![0.0]);
    }

    #[test]
    fn upper_bounds_and_negative_lowers() {
        // max v1 - v2 with -1 <= v1 <= 2, 0 <= v2 <= 1: optimum 2 at (2, 0).
        let mut lp = LinearProgram::new(2);
        lp.maximize(vec![1.0, -1.0]);
        lp.set_lower(0, -1.0).set_upper(0, 2.0).set_upper(1, 1.0);
        let out = solve_lp(&lp, &cfg()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        let v = out.solution.unwrap();
        assert!((v[0] - 2.0).abs() < 1e-9);
        assert!(v[1].abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_rows_are_handled() {
        // -v1 <= -2 means v1 >= 2; minimize nothing, check feasibility point.
        let mut lp = LinearProgram::new(1);
        lp.add_le(vec![-1.0], -2.0);
        let w = solve_feasibility(&lp, &cfg()).unwrap().unwrap();
        assert!(w[0] >= 2.0 - 1e-9);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // Many redundant rows through the same vertex.
        let mut lp = LinearProgram::new(3);
        lp.maximize(vec![1.0, 1.0, 1.0]);
        for _ in 0..6 {
            lp.add_le(vec![1.0, 1.0, 1.0], 1.0);
            lp.add_le(vec![1.0, 1.0, 0.0], 1.0);
        }
        lp.add_eq(vec![0.0, 0.0, 1.0], 0.0);
        let out = solve_lp(&lp, &cfg()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective_value.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn solver_is_deterministic() {
        let mut lp = LinearProgram::new(4);
        lp.maximize(vec![3.0, 1.0, 4.0, 1.5]);
        lp.add_le(vec![1.0, 2.0, 1.0, 0.5], 4.0);
        lp.add_le(vec![2.0, 0.5, 1.0, 1.0], 3.0);
        lp.add_eq(vec![1.0, 1.0, 1.0, 1.0], 2.5);
        let a = solve_lp(&lp, &cfg()).unwrap();
        let b = solve_lp(&lp, &cfg()).unwrap();
        assert_eq!(a.solution.unwrap(), b.solution.unwrap());
        assert_eq!(a.objective_value.unwrap().to_bits(), b.objective_value.unwrap().to_bits());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut lp = LinearProgram::new(2);
        lp.add_eq(vec![1.0], 1.0);
        assert!(matches!(
            solve_lp(&lp, &cfg()),
            Err(NumericsError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rank_basics() {
        let identity = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_eq!(matrix_rank(&identity, 1e-9), 3);
        let zero = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(matrix_rank(&zero, 1e-9), 0);
        let proportional = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(matrix_rank(&proportional, 1e-9), 1);
    }

    #[test]
    fn rank_invariances() {
        let m = vec![
            vec![1.0, 2.0, 3.0],
            vec![4.0, 5.0, 6.0],
            vec![7.0, 8.0, 9.0],
        ];
        let rank = matrix_rank(&m, 1e-9);
        assert_eq!(rank, 2);
        let permuted = vec![m[2].clone(), m[0].clone(), m[1].clone()];
        assert_eq!(matrix_rank(&permuted, 1e-9), rank);
        let mut scaled = m.clone();
        for v in scaled[1].iter_mut() {
            *v *= 10.0;
        }
        assert_eq!(matrix_rank(&scaled, 1e-9), rank);
        assert_eq!(matrix_rank(&[], 1e-9), 0);
    }
}
