//! BSSE and HBNE solvers, plus an equilibrium verifier that is independent
//! of how a candidate pair was produced.
//!
//! Both solvers exploit the same structural fact: attacker utility is linear
//! in the attack allocation, so every best-response set is a face of the
//! attacker simplex and has pure vertices. The BSSE solver enumerates pure
//! assignments of types to targets (strong-Stackelberg tie-breaking favors
//! the defender, so a pure vertex is always among the optima); the HBNE
//! solver enumerates support combinations and solves linear feasibility
//! systems.

use serde::Serialize;
use serde_json::json;
use std::time::Instant;
use thiserror::Error;

use crate::model::{
    AttackerPolicy, DefenderStrategy, GameInstance, TypeDistribution, DEFAULT_TIE_TOL,
};
use crate::numerics::{
    solve_feasibility, solve_lp, LinearProgram, NumericsConfig, NumericsError,
};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("LP budget exceeded after {lp_calls} calls while {context}")]
    BudgetExceeded { lp_calls: usize, context: String },
    /// An equilibrium that must exist was not found. This contradicts the
    /// existence guarantee for valid instances and is always a bug or a
    /// numerical breakdown, never a legitimate outcome.
    #[error("no equilibrium found while {context}; this should be impossible on a valid instance. Instance: {instance_json}")]
    NotFound {
        context: String,
        instance_json: String,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Options shared by the solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Verification tolerance on equilibrium regrets.
    pub epsilon: f64,
    /// Hard cap on LP solves per call.
    pub max_lp_calls: usize,
    /// Relative tie tolerance for best-response sets.
    pub tie_tol: f64,
    pub numerics: NumericsConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            epsilon: 1e-6,
            max_lp_calls: 1_000_000,
            tie_tol: DEFAULT_TIE_TOL,
            numerics: NumericsConfig::default(),
        }
    }
}

/// Counters reported by the solvers.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SolverDiagnostics {
    /// Linear programs solved (including feasibility probes).
    pub lp_calls: usize,
    /// Assignment subtrees abandoned by the optimistic bound.
    pub nodes_pruned: usize,
    /// Support combinations examined by the HBNE solver.
    pub supports_examined: usize,
    pub wall_time_s: f64,
}

/// An equilibrium candidate together with everything needed to audit it.
#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub defender_strategy: DefenderStrategy,
    pub attacker_policy: AttackerPolicy,
    pub defender_expected_utility: f64,
    /// Per-type optimal attack value `R_a * max_k a_k(theta, x)`.
    pub attacker_values: Vec<f64>,
    pub defender_support: Vec<usize>,
    pub attacker_supports: Vec<Vec<usize>>,
    pub diagnostics: SolverDiagnostics,
}

impl EquilibriumResult {
    fn assemble(
        inst: &GameInstance,
        x: DefenderStrategy,
        y: AttackerPolicy,
        diagnostics: SolverDiagnostics,
    ) -> Self {
        let eu = inst.expected_defender_utility(&x, &y, inst.distribution());
        let attacker_values = (0..inst.num_types())
            .map(|j| {
                let best = inst
                    .attack_values(&x, j)
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max);
                inst.attacker_budget() * best
            })
            .collect();
        EquilibriumResult {
            defender_support: x.support(),
            attacker_supports: y.supports(),
            defender_strategy: x,
            attacker_policy: y,
            defender_expected_utility: eu,
            attacker_values,
            diagnostics,
        }
    }

    /// JSON emitted by the CLI under `--json`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "x": self.defender_strategy.allocation(),
            "y": self.attacker_policy.rows(),
            "eu_d": self.defender_expected_utility,
            "attacker_values": self.attacker_values,
            "supports": {
                "defender": self.defender_support,
                "attacker": self.attacker_supports,
            },
            "diagnostics": self.diagnostics,
        })
    }
}

/// Regret report for a candidate pair against the argmax conditions. Both
/// optimizations are linear over simplices so the regrets are exact
/// (best value minus achieved value).
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub is_attacker_best_response: Vec<bool>,
    pub attacker_regret: Vec<f64>,
    pub defender_regret: f64,
    pub is_defender_best_response: bool,
    pub epsilon: f64,
}

impl VerificationReport {
    /// All per-type and defender regrets within tolerance.
    pub fn all_pass(&self) -> bool {
        self.is_defender_best_response && self.is_attacker_best_response.iter().all(|&b| b)
    }

    pub fn max_regret(&self) -> f64 {
        self.attacker_regret
            .iter()
            .cloned()
            .fold(self.defender_regret, f64::max)
    }
}

/// Checks a strategy pair against the equilibrium conditions directly:
/// `attacker_regret(theta) = R_a * max_k a_k(theta, x) - U_a(x, y(theta), theta)`
/// and `defender_regret = R_d * max_k d_k + c0 - EU_d(x, y)`.
pub fn verify_equilibrium(
    inst: &GameInstance,
    x: &DefenderStrategy,
    y: &AttackerPolicy,
    dist: &TypeDistribution,
    epsilon: f64,
) -> VerificationReport {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let r_a = inst.attacker_budget();
    let mut attacker_regret = Vec::with_capacity(inst.num_types());
    for j in 0..inst.num_types() {
        let values = inst.attack_values(x, j);
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let achieved = inst.attacker_utility(x, y.row(j), j);
        attacker_regret.push(r_a * best - achieved);
    }
    let (d, c0) = inst.defender_coefficients(y, dist);
    let best_d = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let achieved = inst.expected_defender_utility(x, y, dist);
    let defender_regret = inst.defender_budget() * best_d + c0 - achieved;
    VerificationReport {
        is_attacker_best_response: attacker_regret.iter().map(|&r| r <= epsilon).collect(),
        attacker_regret,
        defender_regret,
        is_defender_best_response: defender_regret <= epsilon,
        epsilon,
    }
}

struct LpBudget<'a> {
    calls: usize,
    max: usize,
    context: &'a str,
}

impl<'a> LpBudget<'a> {
    fn charge(&mut self) -> Result<(), SolverError> {
        self.calls += 1;
        if self.calls > self.max {
            Err(SolverError::BudgetExceeded {
                lp_calls: self.calls,
                context: self.context.to_string(),
            })
        } else {
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// BSSE: assignment enumeration
// ---------------------------------------------------------------------------

/// Computes a Bayesian strong Stackelberg equilibrium: the defender commits
/// to `x`, each attacker type best-responds, ties break in the defender's
/// favor.
///
/// Enumerates assignments of types to pure attack targets depth-first,
/// bounding each subtree by the optimistic per-type contribution
/// `P(theta) R_a R_d U_d^c(t)`. Each surviving assignment costs one LP over
/// the defender simplex with the best-response inequalities as constraints.
pub fn solve_bsse(
    inst: &GameInstance,
    opts: &SolveOptions,
) -> Result<EquilibriumResult, SolverError> {
    let start = Instant::now();
    let k = inst.num_targets();
    let n = inst.num_types();
    let r_a = inst.attacker_budget();
    let r_d = inst.defender_budget();
    let p = inst.distribution().probabilities();

    // Optimistic contribution of assigning type j to target t.
    let bound = |j: usize, t: usize| p[j] * r_a * r_d * inst.defender_covered(t);
    // Exact constant part of the objective for the same assignment.
    let constant = |j: usize, t: usize| p[j] * r_a * r_d * inst.defender_uncovered(t);

    // Per-type target order: descending optimistic contribution so pruning
    // bites early. P(theta) R_a R_d is constant within a type, but the order
    // is computed per type anyway to keep the rule local.
    let orders: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            let mut idx: Vec<usize> = (0..k).collect();
            idx.sort_by(|&a, &b| {
                bound(j, b)
                    .partial_cmp(&bound(j, a))
                    .expect("finite payoffs")
                    .then(a.cmp(&b))
            });
            idx
        })
        .collect();

    // suffix_best[j] = sum over types >= j of their best optimistic bound.
    let mut suffix_best = vec![0.0; n + 1];
    for j in (0..n).rev() {
        let best = (0..k).map(|t| bound(j, t)).fold(f64::NEG_INFINITY, f64::max);
        suffix_best[j] = suffix_best[j + 1] + best;
    }

    let mut budget = LpBudget {
        calls: 0,
        max: opts.max_lp_calls,
        context: "enumerating BSSE assignments",
    };
    let mut pruned = 0usize;
    let mut incumbent: Option<(f64, Vec<usize>, DefenderStrategy)> = None;
    let mut assignment = vec![0usize; n];

    // Iterative DFS over types; `stack[j]` is the position in `orders[j]`.
    fn dfs(
        inst: &GameInstance,
        opts: &SolveOptions,
        orders: &[Vec<usize>],
        suffix_best: &[f64],
        bound: &dyn Fn(usize, usize) -> f64,
        constant: &dyn Fn(usize, usize) -> f64,
        depth: usize,
        prefix_bound: f64,
        assignment: &mut Vec<usize>,
        incumbent: &mut Option<(f64, Vec<usize>, DefenderStrategy)>,
        budget: &mut LpBudget,
        pruned: &mut usize,
    ) -> Result<(), SolverError> {
        let n = inst.num_types();
        if depth == n {
            budget.charge()?;
            if let Some((value, x)) = solve_assignment_lp(inst, assignment, constant, opts)? {
                let improves = incumbent.as_ref().map_or(true, |(best, _, _)| value > *best);
                if improves {
                    *incumbent = Some((value, assignment.clone(), x));
                }
            }
            return Ok(());
        }
        for &target in &orders[depth] {
            let optimistic = prefix_bound + bound(depth, target) + suffix_best[depth + 1];
            if let Some((best, _, _)) = incumbent {
                if optimistic <= *best {
                    *pruned += 1;
                    continue;
                }
            }
            assignment[depth] = target;
            dfs(
                inst,
                opts,
                orders,
                suffix_best,
                bound,
                constant,
                depth + 1,
                prefix_bound + bound(depth, target),
                assignment,
                incumbent,
                budget,
                pruned,
            )?;
        }
        Ok(())
    }

    dfs(
        inst,
        opts,
        &orders,
        &suffix_best,
        &bound,
        &constant,
        0,
        0.0,
        &mut assignment,
        &mut incumbent,
        &mut budget,
        &mut pruned,
    )?;

    let Some((_, targets, x)) = incumbent else {
        // Some assignment is always feasible (every x induces one), so this
        // is a numerical breakdown, not a property of the instance.
        return Err(SolverError::NotFound {
            context: "solving BSSE (no feasible assignment LP)".into(),
            instance_json: inst.to_file().to_json(),
        });
    };
    let y = AttackerPolicy::pure(&targets, k, r_a);
    let diagnostics = SolverDiagnostics {
        lp_calls: budget.calls,
        nodes_pruned: pruned,
        supports_examined: 0,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let result = EquilibriumResult::assemble(inst, x, y, diagnostics);

    // Post-condition: the attacker rows must be best responses.
    let report = verify_equilibrium(
        inst,
        &result.defender_strategy,
        &result.attacker_policy,
        inst.distribution(),
        opts.epsilon.max(1e-7),
    );
    for (j, &regret) in report.attacker_regret.iter().enumerate() {
        if regret > 1e-7 * (1.0 + result.attacker_values[j].abs()) {
            return Err(SolverError::Numerics(NumericsError::NumericalFailure(
                format!("BSSE attacker row {j} has best-response regret {regret:.3e}"),
            )));
        }
    }
    Ok(result)
}

/// LP for one assignment: maximize the defender's expectation given that
/// type `j` attacks `assignment[j]`, subject to each assigned target being
/// an attacker best response.
fn solve_assignment_lp(
    inst: &GameInstance,
    assignment: &[usize],
    constant: &dyn Fn(usize, usize) -> f64,
    opts: &SolveOptions,
) -> Result<Option<(f64, DefenderStrategy)>, SolverError> {
    let k = inst.num_targets();
    let r_d = inst.defender_budget();
    let r_a = inst.attacker_budget();
    let p = inst.distribution().probabilities();

    let mut lp = LinearProgram::new(k);
    let mut objective = vec![0.0; k];
    for (j, &t) in assignment.iter().enumerate() {
        objective[t] += p[j] * r_a * inst.delta_defender(t);
    }
    lp.maximize(objective);
    lp.add_eq(vec![1.0; k], r_d);
    for (j, &t) in assignment.iter().enumerate() {
        for other in 0..k {
            if other == t {
                continue;
            }
            // a_t >= a_other, rewritten over x.
            let mut row = vec![0.0; k];
            row[t] += inst.delta_attacker(j, t);
            row[other] -= inst.delta_attacker(j, other);
            let rhs = r_d * (inst.attacker_uncovered(j, t) - inst.attacker_uncovered(j, other));
            lp.add_le(row, rhs);
        }
    }
    let out = solve_lp(&lp, &opts.numerics)?;
    if !out.is_optimal() {
        return Ok(None);
    }
    let x = DefenderStrategy::from_lp_solution(&out.solution.unwrap(), r_d);
    let total = out.objective_value.unwrap()
        + assignment
            .iter()
            .enumerate()
            .map(|(j, &t)| constant(j, t))
            .sum::<f64>();
    Ok(Some((total, x)))
}

// ---------------------------------------------------------------------------
// HBNE: support enumeration
// ---------------------------------------------------------------------------

/// Computes a hyper Bayesian Nash equilibrium by support enumeration.
///
/// Candidate supports are scanned in increasing total cardinality
/// `|S_d| + sum |S_a(theta)|` (lexicographic within a cardinality class,
/// defender support outermost), so the returned equilibrium is a canonical
/// representative. Per-type supports are pre-filtered to tie sets realizable
/// by some defender strategy. A combination is accepted once its linear
/// feasibility system solves and the witness passes verification.
pub fn solve_hbne(
    inst: &GameInstance,
    opts: &SolveOptions,
) -> Result<EquilibriumResult, SolverError> {
    let start = Instant::now();
    let k = inst.num_targets();
    let n = inst.num_types();

    let mut budget = LpBudget {
        calls: 0,
        max: opts.max_lp_calls,
        context: "enumerating HBNE supports",
    };

    let all_subsets = subsets_by_cardinality(k);

    // Realizable tie sets per type: S is kept when some x in the defender
    // simplex makes the attack values equal on S and no larger outside.
    let mut realizable: Vec<Vec<Vec<&Subset>>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut by_card: Vec<Vec<&Subset>> = vec![Vec::new(); k + 1];
        for card in 1..=k {
            for subset in &all_subsets[card] {
                budget.charge()?;
                let mut lp = LinearProgram::new(k);
                lp.add_eq(vec![1.0; k], inst.defender_budget());
                add_attacker_tie_rows(&mut lp, inst, j, subset, 0);
                if solve_feasibility(&lp, &opts.numerics)?.is_some() {
                    by_card[card].push(subset);
                }
            }
        }
        realizable.push(by_card);
    }

    let mut supports_examined = 0usize;

    // Ascending total cardinality; within it, compositions in lexicographic
    // order (defender axis most significant), then subsets nested
    // lexicographically.
    let max_total = k * (n + 1);
    for total in (n + 1)..=max_total {
        let mut cards = vec![0usize; n + 1];
        let found = compositions(total, k, &mut cards, 0, &mut |cards| {
            let def_card = cards[0];
            for s_d in &all_subsets[def_card] {
                if let Some(result) = try_support_class(
                    inst,
                    opts,
                    s_d,
                    &cards[1..],
                    &realizable,
                    &mut budget,
                    &mut supports_examined,
                )? {
                    return Ok(Some(result));
                }
            }
            Ok(None)
        })?;
        if let Some((x, y)) = found {
            let diagnostics = SolverDiagnostics {
                lp_calls: budget.calls,
                nodes_pruned: 0,
                supports_examined,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            let result = EquilibriumResult::assemble(inst, x, y, diagnostics);
            return Ok(result);
        }
    }

    Err(SolverError::NotFound {
        context: format!(
            "solving HBNE (exhausted {supports_examined} support combinations)"
        ),
        instance_json: inst.to_file().to_json(),
    })
}

type Witness = (DefenderStrategy, AttackerPolicy);

/// Nested scan over per-type subsets of the prescribed cardinalities for a
/// fixed defender support.
fn try_support_class(
    inst: &GameInstance,
    opts: &SolveOptions,
    s_d: &Subset,
    attacker_cards: &[usize],
    realizable: &[Vec<Vec<&Subset>>],
    budget: &mut LpBudget,
    supports_examined: &mut usize,
) -> Result<Option<Witness>, SolverError> {
    let n = attacker_cards.len();
    let mut chosen: Vec<&Subset> = Vec::with_capacity(n);
    scan_types(
        inst,
        opts,
        s_d,
        attacker_cards,
        realizable,
        0,
        0u64,
        &mut chosen,
        budget,
        supports_examined,
    )
}

#[allow(clippy::too_many_arguments)]
fn scan_types<'a>(
    inst: &GameInstance,
    opts: &SolveOptions,
    s_d: &Subset,
    attacker_cards: &[usize],
    realizable: &'a [Vec<Vec<&'a Subset>>],
    depth: usize,
    union_mask: u64,
    chosen: &mut Vec<&'a Subset>,
    budget: &mut LpBudget,
    supports_examined: &mut usize,
) -> Result<Option<Witness>, SolverError> {
    let p = inst.distribution().probabilities();
    if depth == attacker_cards.len() {
        // Necessary condition: every defender-support target must be able to
        // carry attack mass from some positive-probability type, otherwise
        // the tie system on d is unsatisfiable.
        if s_d.mask & !union_mask != 0 {
            return Ok(None);
        }
        *supports_examined += 1;
        budget.charge()?;
        return solve_support_system(inst, opts, s_d, chosen, budget);
    }
    for subset in &realizable[depth][attacker_cards[depth]] {
        chosen.push(subset);
        let contribution = if p[depth] > 0.0 { subset.mask } else { 0 };
        let found = scan_types(
            inst,
            opts,
            s_d,
            attacker_cards,
            realizable,
            depth + 1,
            union_mask | contribution,
            chosen,
            budget,
            supports_examined,
        )?;
        chosen.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Feasibility system for one support combination. The constraints
/// separate: the defender strategy only appears in its simplex, its support
/// restriction, and the attacker tie/top conditions, while the attacker
/// policy only appears in its simplices, supports, and the defender
/// coefficient conditions. The two subsystems are therefore solved
/// independently, which also makes the canonical witness `x` depend only on
/// the support class and the payoffs, not on the type distribution.
fn solve_support_system(
    inst: &GameInstance,
    opts: &SolveOptions,
    s_d: &Subset,
    attacker_supports: &[&Subset],
    budget: &mut LpBudget,
) -> Result<Option<Witness>, SolverError> {
    let k = inst.num_targets();
    let n = inst.num_types();
    let r_d = inst.defender_budget();
    let r_a = inst.attacker_budget();
    let p = inst.distribution().probabilities();

    // Defender subsystem: x in the simplex, supported in S_d, making every
    // guessed attacker support a tie-top set.
    let mut x_lp = LinearProgram::new(k);
    x_lp.add_eq(vec![1.0; k], r_d);
    for t in 0..k {
        if !s_d.contains(t) {
            let mut row = vec![0.0; k];
            row[t] = 1.0;
            x_lp.add_eq(row, 0.0);
        }
    }
    for (j, s_a) in attacker_supports.iter().enumerate() {
        add_attacker_tie_rows(&mut x_lp, inst, j, s_a, 0);
    }
    let Some(x_witness) = solve_feasibility(&x_lp, &opts.numerics)? else {
        return Ok(None);
    };

    // Attacker subsystem: rows in their simplices and supports, with the
    // defender coefficients d_t = DeltaU_d(t) sum_j P_j y_jt equal across
    // the defender support and dominant outside.
    budget.charge()?;
    let y_var = |j: usize, t: usize| j * k + t;
    let mut y_lp = LinearProgram::new(n * k);
    for (j, s_a) in attacker_supports.iter().enumerate() {
        let mut row = vec![0.0; n * k];
        for t in 0..k {
            row[y_var(j, t)] = 1.0;
        }
        y_lp.add_eq(row, r_a);
        for t in 0..k {
            if !s_a.contains(t) {
                let mut row = vec![0.0; n * k];
                row[y_var(j, t)] = 1.0;
                y_lp.add_eq(row, 0.0);
            }
        }
    }
    let anchor = s_d.members[0];
    let d_row = |t: usize| {
        let mut row = vec![0.0; n * k];
        for j in 0..n {
            row[y_var(j, t)] += p[j] * inst.delta_defender(t);
            row[y_var(j, anchor)] -= p[j] * inst.delta_defender(anchor);
        }
        row
    };
    for &t in &s_d.members[1..] {
        y_lp.add_eq(d_row(t), 0.0);
    }
    for t in 0..k {
        if !s_d.contains(t) {
            y_lp.add_le(d_row(t), 0.0);
        }
    }
    let Some(y_witness) = solve_feasibility(&y_lp, &opts.numerics)? else {
        return Ok(None);
    };

    let x = DefenderStrategy::from_lp_solution(&x_witness, r_d);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|j| y_witness[j * k..(j + 1) * k].to_vec())
        .collect();
    let y = AttackerPolicy::from_lp_rows(&rows, r_a);
    let report = verify_equilibrium(inst, &x, &y, inst.distribution(), opts.epsilon);
    if report.all_pass() {
        Ok(Some((x, y)))
    } else {
        Ok(None)
    }
}

/// Appends the constraints making `subset` a tie set of type `j`'s attack
/// values (over defender variables starting at `x_offset`): equal within the
/// subset, no larger outside.
fn add_attacker_tie_rows(
    lp: &mut LinearProgram,
    inst: &GameInstance,
    j: usize,
    subset: &Subset,
    x_offset: usize,
) {
    let k = inst.num_targets();
    let r_d = inst.defender_budget();
    let num_vars = lp.num_vars();
    let anchor = subset.members[0];
    let pair_row = |t: usize| {
        // a_t - a_anchor as a linear form in x.
        let mut row = vec![0.0; num_vars];
        row[x_offset + anchor] += inst.delta_attacker(j, anchor);
        row[x_offset + t] -= inst.delta_attacker(j, t);
        let rhs = r_d * (inst.attacker_uncovered(j, anchor) - inst.attacker_uncovered(j, t));
        (row, rhs)
    };
    for &t in &subset.members[1..] {
        let (row, rhs) = pair_row(t);
        lp.add_eq(row, rhs);
    }
    for t in 0..k {
        if !subset.contains(t) {
            let (row, rhs) = pair_row(t);
            lp.add_le(row, rhs);
        }
    }
}

/// A subset of targets with a bitmask for cheap membership tests.
struct Subset {
    members: Vec<usize>,
    mask: u64,
}

impl Subset {
    fn contains(&self, t: usize) -> bool {
        self.mask & (1 << t) != 0
    }
}

/// All nonempty subsets of `{0..k}`, grouped by cardinality; each group is
/// sorted lexicographically on the member list.
fn subsets_by_cardinality(k: usize) -> Vec<Vec<Subset>> {
    assert!(k <= 63, "target count out of range");
    let mut groups: Vec<Vec<Subset>> = (0..=k).map(|_| Vec::new()).collect();
    for mask in 1u64..(1u64 << k) {
        let members: Vec<usize> = (0..k).filter(|&t| mask & (1 << t) != 0).collect();
        groups[members.len()].push(Subset { members, mask });
    }
    for group in groups.iter_mut() {
        group.sort_by(|a, b| a.members.cmp(&b.members));
    }
    groups
}

/// Enumerates compositions of `total` into `cards.len()` parts in `1..=k`,
/// lexicographically with the first axis most significant, invoking `visit`
/// for each one until it yields a result.
fn compositions<T>(
    total: usize,
    k: usize,
    cards: &mut Vec<usize>,
    depth: usize,
    visit: &mut dyn FnMut(&[usize]) -> Result<Option<T>, SolverError>,
) -> Result<Option<T>, SolverError> {
    let axes = cards.len();
    let remaining_axes = axes - depth;
    if depth == axes {
        return visit(cards);
    }
    let used: usize = cards[..depth].iter().sum();
    let remaining = total - used;
    let lo = remaining.saturating_sub(k * (remaining_axes - 1)).max(1);
    let hi = remaining.saturating_sub(remaining_axes - 1).min(k);
    for c in lo..=hi {
        cards[depth] = c;
        if let Some(found) = compositions(total, k, cards, depth + 1, visit)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}
