//! Stability test linking the two equilibrium notions: when the linear
//! system SOL(y) built from a BSSE attacker policy has a solution with a
//! strictly positive multiplier, the BSSE defender strategy is also stable
//! in the hypergame sense. Includes the uniform-distribution shortcut, the
//! Bernoulli rank condition, and the per-instance classification used by the
//! batch experiments.

use serde_json::json;
use thiserror::Error;

use crate::equilibria::{
    solve_bsse, verify_equilibrium, EquilibriumResult, SolveOptions, SolverError,
};
use crate::model::{chi, AttackerPolicy, GameInstance};
use crate::numerics::{matrix_rank, solve_lp, LinearProgram, LpStatus, NumericsError};
use crate::robustness::{check_robust, RobustnessError};

/// Cap on the multiplier variable in the SOL feasibility LP. Block sums pin
/// the witness, so feasible multipliers are bounded and the cap is purely
/// diagnostic.
pub const LAMBDA_CAP: f64 = 1e6;

/// Threshold operationalizing the strict positivity of the multiplier.
pub const LAMBDA_MIN: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("distribution is not uniform: {0}")]
    NotUniform(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Robustness(#[from] RobustnessError),
}

/// The linear system behind the stability test, built from an instance and
/// an attacker policy `y`:
///
/// * `a1` — horizontal blocks `P(theta_j) diag(DeltaU_a(theta_j, t_k) / DeltaU_d(t_k))`;
/// * `b` — horizontal blocks `P(theta_j) I_K`;
/// * `a2_diag` — diagonal of `diag(1 - chi(y))` over the flattened policy;
/// * `rhs_base` — `B . vec(y)`.
#[derive(Debug, Clone)]
pub struct SolSystem {
    pub a1: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub a2_diag: Vec<f64>,
    pub rhs_base: Vec<f64>,
}

/// Builds the SOL system matrices exactly as defined. Valid instances have
/// `DeltaU_d > 0`, so the ratios are always finite.
pub fn build_sol_system(inst: &GameInstance, y: &AttackerPolicy) -> SolSystem {
    let k = inst.num_targets();
    let n = inst.num_types();
    let p = inst.distribution().probabilities();
    let mut a1 = vec![vec![0.0; n * k]; k];
    let mut b = vec![vec![0.0; n * k]; k];
    for j in 0..n {
        for t in 0..k {
            a1[t][j * k + t] = p[j] * inst.delta_attacker(j, t) / inst.delta_defender(t);
            b[t][j * k + t] = p[j];
        }
    }
    let flat = y.flatten();
    let a2_diag: Vec<f64> = chi(&flat).iter().map(|&c| 1.0 - c).collect();
    let rhs_base: Vec<f64> = b
        .iter()
        .map(|row| crate::numerics::dot(row, &flat))
        .collect();
    SolSystem {
        a1,
        b,
        a2_diag,
        rhs_base,
    }
}

/// Which test produced a stability verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMethod {
    General,
    Uniform,
    BernoulliRank,
    OnePoint,
}

/// Verdict of one stability test. LP-based tests fill the witness fields;
/// the Bernoulli rank test fills the rank fields; `classify_stability` adds
/// the equilibrium cross-checks.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub method: StabilityMethod,
    pub sol_nonempty: Option<bool>,
    pub witness_y_prime: Option<AttackerPolicy>,
    pub witness_lambda: Option<f64>,
    pub sufficient_condition_holds: Option<bool>,
    pub matrix_rank: Option<usize>,
    pub rank_threshold: Option<usize>,
    pub hbne_pair_verified: Option<bool>,
    pub hbne_strategy_verified: Option<bool>,
}

impl StabilityReport {
    fn empty(method: StabilityMethod) -> Self {
        StabilityReport {
            method,
            sol_nonempty: None,
            witness_y_prime: None,
            witness_lambda: None,
            sufficient_condition_holds: None,
            matrix_rank: None,
            rank_threshold: None,
            hbne_pair_verified: None,
            hbne_strategy_verified: None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "method": self.method,
            "sol_nonempty": self.sol_nonempty,
            "witness_lambda": self.witness_lambda,
            "witness_y_prime": self.witness_y_prime.as_ref().map(|w| w.rows().to_vec()),
            "sufficient_condition_holds": self.sufficient_condition_holds,
            "rank": self.matrix_rank,
            "rank_threshold": self.rank_threshold,
            "hbne_pair_verified": self.hbne_pair_verified,
            "hbne_strategy_verified": self.hbne_strategy_verified,
        })
    }
}

/// Decides whether SOL(y) is nonempty by maximizing the multiplier over
/// the system
///
/// ```text
/// A1 y' = lambda B y,   A2 y' = 0,   y' in (Omega_a)^n,   0 <= lambda <= cap
/// ```
///
/// and comparing the optimum against [`LAMBDA_MIN`] (strict inequalities are
/// not LP-expressible; the threshold matches the solver tolerance).
pub fn check_sol(
    inst: &GameInstance,
    y: &AttackerPolicy,
    opts: &SolveOptions,
) -> Result<StabilityReport, StabilityError> {
    let system = build_sol_system(inst, y);
    let method = if is_one_point(inst) {
        StabilityMethod::OnePoint
    } else {
        StabilityMethod::General
    };
    solve_sol_lp(inst, &system, method, opts)
}

/// Uniform-distribution specialization: the probability factors cancel, so
/// the test runs on the bare ratio blocks. Errors unless the distribution is
/// uniform to 1e-9.
pub fn check_sol_uniform(
    inst: &GameInstance,
    y: &AttackerPolicy,
    opts: &SolveOptions,
) -> Result<StabilityReport, StabilityError> {
    if !inst.distribution().is_uniform(1e-9) {
        return Err(StabilityError::NotUniform(format!(
            "{:?}",
            inst.distribution().probabilities()
        )));
    }
    let k = inst.num_targets();
    let n = inst.num_types();
    let mut a1 = vec![vec![0.0; n * k]; k];
    let mut b = vec![vec![0.0; n * k]; k];
    for j in 0..n {
        for t in 0..k {
            a1[t][j * k + t] = inst.delta_attacker(j, t) / inst.delta_defender(t);
            b[t][j * k + t] = 1.0;
        }
    }
    let flat = y.flatten();
    let a2_diag: Vec<f64> = chi(&flat).iter().map(|&c| 1.0 - c).collect();
    let rhs_base: Vec<f64> = b
        .iter()
        .map(|row| crate::numerics::dot(row, &flat))
        .collect();
    let system = SolSystem {
        a1,
        b,
        a2_diag,
        rhs_base,
    };
    solve_sol_lp(inst, &system, StabilityMethod::Uniform, opts)
}

fn solve_sol_lp(
    inst: &GameInstance,
    system: &SolSystem,
    method: StabilityMethod,
    opts: &SolveOptions,
) -> Result<StabilityReport, StabilityError> {
    let k = inst.num_targets();
    let n = inst.num_types();
    let r_a = inst.attacker_budget();
    let num_vars = n * k + 1;
    let lambda = n * k;

    let mut lp = LinearProgram::new(num_vars);
    let mut objective = vec![0.0; num_vars];
    objective[lambda] = 1.0;
    lp.maximize(objective);
    lp.set_upper(lambda, LAMBDA_CAP);
    for t in 0..k {
        let mut row = vec![0.0; num_vars];
        row[..n * k].copy_from_slice(&system.a1[t]);
        row[lambda] = -system.rhs_base[t];
        lp.add_eq(row, 0.0);
    }
    for (idx, &d) in system.a2_diag.iter().enumerate() {
        if d != 0.0 {
            let mut row = vec![0.0; num_vars];
            row[idx] = 1.0;
            lp.add_eq(row, 0.0);
        }
    }
    for j in 0..n {
        let mut row = vec![0.0; num_vars];
        for t in 0..k {
            row[j * k + t] = 1.0;
        }
        lp.add_eq(row, r_a);
    }

    let out = solve_lp(&lp, &opts.numerics)?;
    let mut report = StabilityReport::empty(method);
    match out.status {
        LpStatus::Infeasible => {
            report.sol_nonempty = Some(false);
        }
        LpStatus::Unbounded => {
            return Err(StabilityError::Numerics(NumericsError::NumericalFailure(
                "SOL multiplier LP reported unbounded despite cap".into(),
            )));
        }
        LpStatus::Optimal => {
            let solution = out.solution.expect("optimal LP has solution");
            let best_lambda = solution[lambda];
            if best_lambda > LAMBDA_MIN {
                let rows: Vec<Vec<f64>> =
                    (0..n).map(|j| solution[j * k..(j + 1) * k].to_vec()).collect();
                report.sol_nonempty = Some(true);
                report.witness_y_prime = Some(AttackerPolicy::from_lp_rows(&rows, r_a));
                report.witness_lambda = Some(best_lambda);
            } else {
                report.sol_nonempty = Some(false);
            }
        }
    }
    Ok(report)
}

/// Worst residual of a SOL witness against the system it came from; used to
/// audit reports.
pub fn sol_residual(system: &SolSystem, witness: &AttackerPolicy, lambda: f64) -> f64 {
    let flat = witness.flatten();
    let mut worst: f64 = 0.0;
    for (row, &rhs) in system.a1.iter().zip(&system.rhs_base) {
        worst = worst.max((crate::numerics::dot(row, &flat) - lambda * rhs).abs());
    }
    for (&d, &v) in system.a2_diag.iter().zip(&flat) {
        if d != 0.0 {
            worst = worst.max(v.abs());
        }
    }
    worst
}

/// Bernoulli (two-type, unit-budget) rank condition: stacks the masked
/// ratio blocks over the support complement and reports whether
/// `rank A < 2K - 1`, which is sufficient for the BSSE to be stable in the
/// hypergame sense.
///
/// `single_factor` drops the outer probability factor from the first block
/// row (the printed definition carries the factor twice; positive scaling
/// of columns cannot change the rank, so both variants must agree, and the
/// tests assert they do).
pub fn check_bernoulli_rank(
    inst: &GameInstance,
    y: &AttackerPolicy,
    single_factor: bool,
) -> Result<StabilityReport, StabilityError> {
    let k = inst.num_targets();
    if inst.num_types() != 2 {
        return Err(StabilityError::PreconditionViolated(format!(
            "Bernoulli test needs exactly 2 types, got {}",
            inst.num_types()
        )));
    }
    for (name, budget) in [
        ("R_d", inst.defender_budget()),
        ("R_a", inst.attacker_budget()),
    ] {
        if (budget - 1.0).abs() > 1e-9 {
            return Err(StabilityError::PreconditionViolated(format!(
                "Bernoulli test needs {name} = 1, got {budget}"
            )));
        }
    }
    let p = inst.distribution().probabilities();
    if p.iter().any(|&v| v < 1e-9 || v > 1.0 - 1e-9) {
        return Err(StabilityError::PreconditionViolated(format!(
            "Bernoulli test needs a non-degenerate distribution, got {p:?}"
        )));
    }

    let flat = y.flatten();
    let indicator = chi(&flat);
    let mut matrix: Vec<Vec<f64>> = Vec::with_capacity(3 * k);
    for t in 0..k {
        let mut row = vec![0.0; 2 * k];
        for j in 0..2 {
            let outer = if single_factor { 1.0 } else { p[j] };
            row[j * k + t] = outer
                * p[j]
                * indicator[j * k + t]
                * inst.delta_attacker(j, t)
                / inst.delta_defender(t);
        }
        matrix.push(row);
    }
    for idx in 0..2 * k {
        let mut row = vec![0.0; 2 * k];
        row[idx] = 1.0 - indicator[idx];
        matrix.push(row);
    }

    let rank = matrix_rank(&matrix, 1e-9);
    let threshold = 2 * k - 1;
    let mut report = StabilityReport::empty(StabilityMethod::BernoulliRank);
    report.matrix_rank = Some(rank);
    report.rank_threshold = Some(threshold);
    report.sufficient_condition_holds = Some(rank < threshold);
    Ok(report)
}

fn is_one_point(inst: &GameInstance) -> bool {
    inst.distribution()
        .probabilities()
        .iter()
        .any(|&p| p >= 1.0 - 1e-9)
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Full stability classification of one instance.
#[derive(Debug, Clone)]
pub struct StabilityClassification {
    pub bsse: EquilibriumResult,
    pub sol: StabilityReport,
    pub sol_nonempty: bool,
    /// The exact BSSE pair satisfies the equilibrium conditions.
    pub pair_hbne: bool,
    /// The BSSE defender strategy extends to an equilibrium with some
    /// completing attacker policy.
    pub strategy_hbne: bool,
    pub bsse_eu: f64,
    pub lp_calls: usize,
    /// Set when a nonempty SOL failed to certify the strategy, which the
    /// stability theorem says cannot happen on generic instances.
    pub theorem_violated: bool,
}

impl StabilityClassification {
    pub fn record(&self, instance_id: u64, seed: u64, n: usize, k: usize) -> ClassificationRecord {
        ClassificationRecord {
            instance_id,
            seed,
            n,
            k,
            sol_nonempty: self.sol_nonempty,
            pair_hbne: self.pair_hbne,
            strategy_hbne: self.strategy_hbne,
            bsse_eu: self.bsse_eu,
            lp_calls: self.lp_calls,
        }
    }
}

/// One CSV row of classification output.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRecord {
    pub instance_id: u64,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub sol_nonempty: bool,
    pub pair_hbne: bool,
    pub strategy_hbne: bool,
    pub bsse_eu: f64,
    pub lp_calls: usize,
}

impl ClassificationRecord {
    pub fn csv_header() -> &'static str {
        "instance_id,seed,n,K,sol_nonempty,pair_hbne,strategy_hbne,bsse_eu,lp_calls"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.instance_id,
            self.seed,
            self.n,
            self.k,
            self.sol_nonempty,
            self.pair_hbne,
            self.strategy_hbne,
            self.bsse_eu,
            self.lp_calls
        )
    }
}

/// Classifies an instance for the stability experiment: solves the BSSE,
/// runs the SOL test on its attacker policy, and evaluates both readings of
/// "the BSSE is stable" — the exact pair satisfying the equilibrium
/// conditions, and the defender strategy admitting some completion (tested
/// through the robustness system with an unperturbed distribution).
pub fn classify_stability(
    inst: &GameInstance,
    opts: &SolveOptions,
) -> Result<StabilityClassification, StabilityError> {
    let bsse = solve_bsse(inst, opts)?;
    let mut sol = check_sol(inst, &bsse.attacker_policy, opts)?;
    let sol_nonempty = sol.sol_nonempty.unwrap_or(false);

    let pair_report = verify_equilibrium(
        inst,
        &bsse.defender_strategy,
        &bsse.attacker_policy,
        inst.distribution(),
        1e-6,
    );
    let pair_hbne = pair_report.all_pass();

    let strategy_report = check_robust(
        inst,
        &bsse.defender_strategy,
        inst.distribution(),
        opts,
    )?;
    let strategy_hbne = strategy_report.is_robust;

    sol.hbne_pair_verified = Some(pair_hbne);
    sol.hbne_strategy_verified = Some(strategy_hbne);

    let theorem_violated = sol_nonempty && !strategy_hbne;
    if theorem_violated {
        // Never suppress: a counterexample to the stability theorem would be
        // significant and must be inspectable.
        eprintln!(
            "stability: nonempty SOL but strategy verification failed; instance = {}",
            inst.to_file().to_json()
        );
    }

    let lp_calls = bsse.diagnostics.lp_calls + 2; // SOL LP + robustness LP
    Ok(StabilityClassification {
        bsse_eu: bsse.defender_expected_utility,
        bsse,
        sol,
        sol_nonempty,
        pair_hbne,
        strategy_hbne,
        lp_calls,
        theorem_violated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_instance, DefenderStrategy, InstanceFile, TypeDistribution};

    fn reference_two_target() -> GameInstance {
        validate_instance(&InstanceFile {
            num_targets: 2,
            num_types: 1,
            defender_budget: 1.0,
            attacker_budget: 1.0,
            theta0: 0,
            type_probabilities: vec![1.0],
            defender_covered: vec![1.0, 1.0],
            defender_uncovered: vec![0.0, 0.0],
            attacker_covered: vec![vec![0.0, 0.0]],
            attacker_uncovered: vec![vec![1.0, 1.0]],
        })
        .unwrap()
    }

    #[test]
    fn sol_system_unit_ratios() {
        // DeltaU_a = DeltaU_d componentwise and P = (1): both blocks are I_K.
        let inst = validate_instance(&InstanceFile {
            num_targets: 3,
            num_types: 1,
            defender_budget: 1.0,
            attacker_budget: 1.0,
            theta0: 0,
            type_probabilities: vec![1.0],
            defender_covered: vec![2.0, 3.0, 4.0],
            defender_uncovered: vec![1.0, 1.0, 1.0],
            attacker_covered: vec![vec![0.0, 0.0, 0.0]],
            attacker_uncovered: vec![vec![1.0, 2.0, 3.0]],
        })
        .unwrap();
        let y = AttackerPolicy::new(vec![vec![1.0, 0.0, 0.0]], 1.0).unwrap();
        let system = build_sol_system(&inst, &y);
        for t in 0..3 {
            for c in 0..3 {
                let expect = if t == c { 1.0 } else { 0.0 };
                assert_eq!(system.a1[t][c], expect);
                assert_eq!(system.b[t][c], expect);
            }
        }
    }

    #[test]
    fn sol_system_support_mask() {
        let inst = reference_two_target();
        let y = AttackerPolicy::new(vec![vec![1.0, 0.0]], 1.0).unwrap();
        let system = build_sol_system(&inst, &y);
        assert_eq!(system.a2_diag, vec![0.0, 1.0]);
        assert_eq!(system.rhs_base, vec![1.0, 0.0]);
    }

    #[test]
    fn sol_system_probability_blocks() {
        let inst = validate_instance(&InstanceFile {
            num_targets: 2,
            num_types: 2,
            defender_budget: 1.0,
            attacker_budget: 1.0,
            theta0: 0,
            type_probabilities: vec![0.3, 0.7],
            defender_covered: vec![1.0, 1.0],
            defender_uncovered: vec![0.0, 0.0],
            attacker_covered: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            attacker_uncovered: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        })
        .unwrap();
        let y = AttackerPolicy::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]], 1.0).unwrap();
        let system = build_sol_system(&inst, &y);
        assert_eq!(system.b[0], vec![0.3, 0.0, 0.7, 0.0]);
        assert_eq!(system.b[1], vec![0.0, 0.3, 0.0, 0.7]);
    }

    #[test]
    fn sol_single_target_lambda_is_ratio() {
        let inst = validate_instance(&InstanceFile {
            num_targets: 1,
            num_types: 1,
            defender_budget: 1.0,
            attacker_budget: 2.0,
            theta0: 0,
            type_probabilities: vec![1.0],
            defender_covered: vec![3.0],
            defender_uncovered: vec![1.0],
            attacker_covered: vec![vec![0.5]],
            attacker_uncovered: vec![vec![5.5]],
        })
        .unwrap();
        let y = AttackerPolicy::new(vec![vec![2.0]], 2.0).unwrap();
        let report = check_sol(&inst, &y, &SolveOptions::default()).unwrap();
        assert_eq!(report.sol_nonempty, Some(true));
        // All equations forced: lambda = DeltaU_a / DeltaU_d = 5 / 2.
        assert!((report.witness_lambda.unwrap() - 2.5).abs() < 1e-7);
        assert_eq!(report.method, StabilityMethod::OnePoint);
    }

    #[test]
    fn sol_reference_pure_attack() {
        let inst = reference_two_target();
        let y = AttackerPolicy::new(vec![vec![1.0, 0.0]], 1.0).unwrap();
        let report = check_sol(&inst, &y, &SolveOptions::default()).unwrap();
        assert_eq!(report.sol_nonempty, Some(true));
        let lambda = report.witness_lambda.unwrap();
        assert!((lambda - 1.0).abs() < 1e-7);
        let witness = report.witness_y_prime.as_ref().unwrap();
        assert!((witness.row(0)[0] - 1.0).abs() < 1e-7);
        assert!(witness.row(0)[1].abs() < 1e-7);
        // Witness satisfies the system it certifies.
        let system = build_sol_system(&inst, &y);
        assert!(sol_residual(&system, witness, lambda) <= 1e-6);
    }

    #[test]
    fn uniform_requires_uniform() {
        let inst = validate_instance(&InstanceFile {
            num_targets: 1,
            num_types: 2,
            defender_budget: 1.0,
            attacker_budget: 1.0,
            theta0: 0,
            type_probabilities: vec![0.3, 0.7],
            defender_covered: vec![1.0],
            defender_uncovered: vec![0.0],
            attacker_covered: vec![vec![0.0], vec![0.0]],
            attacker_uncovered: vec![vec![1.0], vec![1.0]],
        })
        .unwrap();
        let y = AttackerPolicy::new(vec![vec![1.0], vec![1.0]], 1.0).unwrap();
        assert!(matches!(
            check_sol_uniform(&inst, &y, &SolveOptions::default()),
            Err(StabilityError::NotUniform(_))
        ));
    }

    #[test]
    fn uniform_agrees_with_general_on_single_type() {
        let inst = reference_two_target();
        let y = AttackerPolicy::new(vec![vec![0.5, 0.5]], 1.0).unwrap();
        let opts = SolveOptions::default();
        let general = check_sol(&inst, &y, &opts).unwrap();
        let uniform = check_sol_uniform(&inst, &y, &opts).unwrap();
        assert_eq!(general.sol_nonempty, uniform.sol_nonempty);
    }

    fn bernoulli_instance(k: usize) -> GameInstance {
        let covered: Vec<Vec<f64>> = vec![
            (0..k).map(|t| 0.2 + t as f64 * 0.3).collect(),
            (0..k).map(|t| 0.1 + t as f64 * 0.2).collect(),
        ];
        let uncovered: Vec<Vec<f64>> = vec![
            (0..k).map(|t| 2.0 + t as f64 * 0.7).collect(),
            (0..k).map(|t| 3.0 + t as f64 * 0.4).collect(),
        ];
        validate_instance(&InstanceFile {
            num_targets: k,
            num_types: 2,
            defender_budget: 1.0,
            attacker_budget: 1.0,
            theta0: 0,
            type_probabilities: vec![0.4, 0.6],
            defender_covered: (0..k).map(|t| 4.0 + t as f64).collect(),
            defender_uncovered: (0..k).map(|t| 1.0 + t as f64 * 0.5).collect(),
            attacker_covered: covered,
            attacker_uncovered: uncovered,
        })
        .unwrap()
    }

    #[test]
    fn bernoulli_full_support_rank_bounded_by_targets() {
        let inst = bernoulli_instance(3);
        let y =
            AttackerPolicy::new(vec![vec![0.2, 0.3, 0.5], vec![0.4, 0.4, 0.2]], 1.0).unwrap();
        let report = check_bernoulli_rank(&inst, &y, false).unwrap();
        // chi(y) = 1 everywhere: the support block vanishes and only the K
        // ratio rows remain.
        assert!(report.matrix_rank.unwrap() <= 3);
        assert_eq!(report.rank_threshold, Some(5));
    }

    #[test]
    fn bernoulli_single_target_never_fires() {
        let inst = bernoulli_instance(1);
        let y = AttackerPolicy::new(vec![vec![1.0], vec![1.0]], 1.0).unwrap();
        let report = check_bernoulli_rank(&inst, &y, false).unwrap();
        // 2K - 1 = 1 while the single ratio row already has rank 1.
        assert_eq!(report.matrix_rank, Some(1));
        assert_eq!(report.sufficient_condition_holds, Some(false));
    }

    #[test]
    fn bernoulli_factor_variants_agree() {
        let inst = bernoulli_instance(3);
        for rows in [
            vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]],
            vec![vec![0.2, 0.3, 0.5], vec![0.4, 0.4, 0.2]],
        ] {
            let y = AttackerPolicy::new(rows, 1.0).unwrap();
            let double = check_bernoulli_rank(&inst, &y, false).unwrap();
            let single = check_bernoulli_rank(&inst, &y, true).unwrap();
            assert_eq!(double.matrix_rank, single.matrix_rank);
            assert_eq!(
                double.sufficient_condition_holds,
                single.sufficient_condition_holds
            );
        }
    }

    #[test]
    fn bernoulli_preconditions() {
        let inst = reference_two_target();
        let y = AttackerPolicy::new(vec![vec![1.0, 0.0]], 1.0).unwrap();
        assert!(matches!(
            check_bernoulli_rank(&inst, &y, false),
            Err(StabilityError::PreconditionViolated(_))
        ));
        let degenerate = bernoulli_instance(2)
            .with_distribution(TypeDistribution::new(vec![1.0, 0.0]).unwrap())
            .unwrap();
        let y2 = AttackerPolicy::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]], 1.0).unwrap();
        assert!(matches!(
            check_bernoulli_rank(&degenerate, &y2, false),
            Err(StabilityError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn classify_single_target_trivially_stable() {
        let inst = validate_instance(&InstanceFile {
            num_targets: 1,
            num_types: 2,
            defender_budget: 1.0,
            attacker_budget: 1.0,
            theta0: 1,
            type_probabilities: vec![0.5, 0.5],
            defender_covered: vec![2.0],
            defender_uncovered: vec![0.5],
            attacker_covered: vec![vec![0.1], vec![0.2]],
            attacker_uncovered: vec![vec![1.0], vec![2.0]],
        })
        .unwrap();
        let result = classify_stability(&inst, &SolveOptions::default()).unwrap();
        assert!(result.sol_nonempty);
        assert!(result.strategy_hbne);
        assert!(result.pair_hbne);
        assert!(!result.theorem_violated);
    }

    #[test]
    fn classify_reference_instance() {
        let inst = reference_two_target();
        let result = classify_stability(&inst, &SolveOptions::default()).unwrap();
        // The solver returns the pure attacker vertex (1, 0): SOL is
        // nonempty and the strategy extends to an equilibrium, but the
        // exact pair leaves the defender with regret 0.5.
        assert!(result.sol_nonempty);
        assert!(result.strategy_hbne);
        assert!(!result.pair_hbne);
        let x = result.bsse.defender_strategy.allocation();
        assert!((x[0] - 0.5).abs() < 1e-7);
    }

    #[test]
    fn classification_record_round_trip() {
        let inst = reference_two_target();
        let result = classify_stability(&inst, &SolveOptions::default()).unwrap();
        let record = result.record(3, 42, 1, 2);
        let row = record.csv_row();
        assert!(row.starts_with("3,42,1,2,true,false,true,"));
        assert_eq!(
            ClassificationRecord::csv_header().split(',').count(),
            row.split(',').count()
        );
    }

    #[test]
    fn defender_strategy_support_threshold() {
        let x = DefenderStrategy::new(vec![1.0 - 1e-12, 1e-12], 1.0).unwrap();
        assert_eq!(x.support(), vec![0]);
    }
}
