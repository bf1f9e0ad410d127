//! Game data model: instances, strategies, type distributions, and the
//! utility formulas everything else is built from.
//!
//! A defender spreads `R_d` units of protection over `K` targets; an
//! attacker of type `theta` (drawn from a public distribution over `n`
//! types) spreads `R_a` units of attack. Per-target payoffs are linear in
//! both allocations, which is what makes every solver in this crate a
//! linear program.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Threshold below which an allocation coordinate is treated as zero when
/// computing supports and the indicator `chi`.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Absolute tolerance on simplex-sum invariants (allocations, probability
/// mass).
pub const SIMPLEX_SUM_TOL: f64 = 1e-9;

/// Default relative tie tolerance for best-response sets.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Validation errors
// ---------------------------------------------------------------------------

/// One violated invariant found while validating raw instance data.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    /// Structural problem: wrong lengths, bad index, non-positive budget.
    Shape(String),
    /// Probability vector problem: negative entry or mass away from 1.
    Probability(String),
    /// A payoff pair pointing the wrong way: the defender must gain from
    /// covering (i) and the attacker must prefer uncovered targets (ii).
    Assumption {
        part: &'static str,
        type_index: Option<usize>,
        target_index: usize,
        delta: f64,
    },
    /// NaN or infinite number where a finite one is required.
    NotFinite(String),
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Shape(msg) => write!(f, "shape: {msg}"),
            ValidationIssue::Probability(msg) => write!(f, "probability: {msg}"),
            ValidationIssue::Assumption {
                part,
                type_index,
                target_index,
                delta,
            } => match type_index {
                Some(j) => write!(
                    f,
                    "assumption ({part}): type {j}, target {target_index} has delta {delta} (must be > 0)"
                ),
                None => write!(
                    f,
                    "assumption ({part}): target {target_index} has delta {delta} (must be > 0)"
                ),
            },
            ValidationIssue::NotFinite(msg) => write!(f, "non-finite: {msg}"),
        }
    }
}

/// Every invariant violated by a candidate instance, reported together.
#[derive(Debug, Clone, Error)]
pub struct ValidationError {
    pub issues: Vec<ValidationIssue>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid instance ({} issue(s)):", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  - {issue}")?;
        }
        Ok(())
    }
}

impl ValidationError {
    fn single(issue: ValidationIssue) -> Self {
        ValidationError {
            issues: vec![issue],
        }
    }
}

// ---------------------------------------------------------------------------
// Instance file format
// ---------------------------------------------------------------------------

/// On-disk JSON shape of an instance. Field names match the file format
/// exactly; see `validate_instance` for the semantic checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "K")]
    pub num_targets: usize,
    #[serde(rename = "n")]
    pub num_types: usize,
    #[serde(rename = "R_d")]
    pub defender_budget: f64,
    #[serde(rename = "R_a")]
    pub attacker_budget: f64,
    pub theta0: usize,
    #[serde(rename = "P")]
    pub type_probabilities: Vec<f64>,
    #[serde(rename = "U_d_c")]
    pub defender_covered: Vec<f64>,
    #[serde(rename = "U_d_u")]
    pub defender_uncovered: Vec<f64>,
    #[serde(rename = "U_a_c")]
    pub attacker_covered: Vec<Vec<f64>>,
    #[serde(rename = "U_a_u")]
    pub attacker_uncovered: Vec<Vec<f64>>,
}

impl InstanceFile {
    /// Parses the JSON instance format. `serde_json` already rejects the
    /// bare tokens `NaN`/`Infinity`; out-of-range literals that overflow to
    /// infinity are caught by validation afterwards.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

// ---------------------------------------------------------------------------
// Core domain types
// ---------------------------------------------------------------------------

/// A fully validated game instance. Immutable after construction; build one
/// through [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    num_targets: usize,
    num_types: usize,
    defender_budget: f64,
    attacker_budget: f64,
    true_type_index: usize,
    type_probabilities: TypeDistribution,
    defender_covered: Vec<f64>,
    defender_uncovered: Vec<f64>,
    attacker_covered: Vec<Vec<f64>>,
    attacker_uncovered: Vec<Vec<f64>>,
}

/// Validates raw instance data, returning either a usable [`GameInstance`]
/// or the complete list of violated invariants.
pub fn validate_instance(candidate: &InstanceFile) -> Result<GameInstance, ValidationError> {
    let mut issues = Vec::new();
    let k = candidate.num_targets;
    let n = candidate.num_types;
    if k == 0 {
        issues.push(ValidationIssue::Shape("K must be >= 1".into()));
    }
    if n == 0 {
        issues.push(ValidationIssue::Shape("n must be >= 1".into()));
    }
    for (name, value) in [
        ("R_d", candidate.defender_budget),
        ("R_a", candidate.attacker_budget),
    ] {
        if !value.is_finite() {
            issues.push(ValidationIssue::NotFinite(format!("{name} = {value}")));
        } else if value <= 0.0 {
            issues.push(ValidationIssue::Shape(format!(
                "{name} must be > 0, got {value}"
            )));
        }
    }
    if n > 0 && candidate.theta0 >= n {
        issues.push(ValidationIssue::Shape(format!(
            "theta0 = {} is not a valid index into {n} types",
            candidate.theta0
        )));
    }

    let expect_len = |issues: &mut Vec<ValidationIssue>, name: &str, len: usize, want: usize| {
        if len != want {
            issues.push(ValidationIssue::Shape(format!(
                "{name} has length {len}, expected {want}"
            )));
            false
        } else {
            true
        }
    };
    let p_ok = expect_len(&mut issues, "P", candidate.type_probabilities.len(), n);
    let dc_ok = expect_len(&mut issues, "U_d_c", candidate.defender_covered.len(), k);
    let du_ok = expect_len(&mut issues, "U_d_u", candidate.defender_uncovered.len(), k);
    let mut ac_ok = expect_len(&mut issues, "U_a_c", candidate.attacker_covered.len(), n);
    let mut au_ok = expect_len(&mut issues, "U_a_u", candidate.attacker_uncovered.len(), n);
    if ac_ok {
        for (j, row) in candidate.attacker_covered.iter().enumerate() {
            ac_ok &= expect_len(&mut issues, &format!("U_a_c[{j}]"), row.len(), k);
        }
    }
    if au_ok {
        for (j, row) in candidate.attacker_uncovered.iter().enumerate() {
            au_ok &= expect_len(&mut issues, &format!("U_a_u[{j}]"), row.len(), k);
        }
    }

    let mut check_finite = |name: &str, values: &[f64]| {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue::NotFinite(format!("{name}[{i}] = {v}")));
            }
        }
    };
    check_finite("P", &candidate.type_probabilities);
    check_finite("U_d_c", &candidate.defender_covered);
    check_finite("U_d_u", &candidate.defender_uncovered);
    for (j, row) in candidate.attacker_covered.iter().enumerate() {
        check_finite(&format!("U_a_c[{j}]"), row);
    }
    for (j, row) in candidate.attacker_uncovered.iter().enumerate() {
        check_finite(&format!("U_a_u[{j}]"), row);
    }

    if p_ok {
        for (j, &p) in candidate.type_probabilities.iter().enumerate() {
            if p.is_finite() && p < 0.0 {
                issues.push(ValidationIssue::Probability(format!(
                    "P[{j}] = {p} is negative"
                )));
            }
        }
        let mass: f64 = candidate.type_probabilities.iter().sum();
        if mass.is_finite() && (mass - 1.0).abs() > SIMPLEX_SUM_TOL {
            issues.push(ValidationIssue::Probability(format!(
                "P sums to {mass}, expected 1"
            )));
        }
    }

    if dc_ok && du_ok {
        for target in 0..k {
            let delta =
                candidate.defender_covered[target] - candidate.defender_uncovered[target];
            if delta.is_finite() && delta <= 0.0 {
                issues.push(ValidationIssue::Assumption {
                    part: "i",
                    type_index: None,
                    target_index: target,
                    delta,
                });
            }
        }
    }
    if ac_ok && au_ok {
        for j in 0..n {
            for target in 0..k {
                let delta = candidate.attacker_uncovered[j][target]
                    - candidate.attacker_covered[j][target];
                if delta.is_finite() && delta <= 0.0 {
                    issues.push(ValidationIssue::Assumption {
                        part: "ii",
                        type_index: Some(j),
                        target_index: target,
                        delta,
                    });
                }
            }
        }
    }

    if !issues.is_empty() {
        return Err(ValidationError { issues });
    }
    Ok(GameInstance {
        num_targets: k,
        num_types: n,
        defender_budget: candidate.defender_budget,
        attacker_budget: candidate.attacker_budget,
        true_type_index: candidate.theta0,
        type_probabilities: TypeDistribution {
            probabilities: candidate.type_probabilities.clone(),
        },
        defender_covered: candidate.defender_covered.clone(),
        defender_uncovered: candidate.defender_uncovered.clone(),
        attacker_covered: candidate.attacker_covered.clone(),
        attacker_uncovered: candidate.attacker_uncovered.clone(),
    })
}

impl GameInstance {
    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn defender_budget(&self) -> f64 {
        self.defender_budget
    }

    pub fn attacker_budget(&self) -> f64 {
        self.attacker_budget
    }

    /// Index of the exact configuration known to the defender. Kept as
    /// metadata; defender payoffs are type-independent, so it never enters
    /// the arithmetic.
    pub fn true_type_index(&self) -> usize {
        self.true_type_index
    }

    pub fn distribution(&self) -> &TypeDistribution {
        &self.type_probabilities
    }

    pub fn defender_covered(&self, target: usize) -> f64 {
        self.defender_covered[target]
    }

    pub fn defender_uncovered(&self, target: usize) -> f64 {
        self.defender_uncovered[target]
    }

    pub fn attacker_covered(&self, type_index: usize, target: usize) -> f64 {
        self.attacker_covered[type_index][target]
    }

    pub fn attacker_uncovered(&self, type_index: usize, target: usize) -> f64 {
        self.attacker_uncovered[type_index][target]
    }

    /// `U_d^c(t_k) - U_d^u(t_k)`, strictly positive on valid instances.
    pub fn delta_defender(&self, target: usize) -> f64 {
        self.defender_covered[target] - self.defender_uncovered[target]
    }

    /// `U_a^u(theta, t_k) - U_a^c(theta, t_k)`, strictly positive on valid
    /// instances.
    pub fn delta_attacker(&self, type_index: usize, target: usize) -> f64 {
        self.attacker_uncovered[type_index][target] - self.attacker_covered[type_index][target]
    }

    /// Returns a copy of this instance with the type distribution replaced.
    pub fn with_distribution(&self, dist: TypeDistribution) -> Result<Self, ValidationError> {
        if dist.len() != self.num_types {
            return Err(ValidationError::single(ValidationIssue::Shape(format!(
                "distribution has {} entries, instance has {} types",
                dist.len(),
                self.num_types
            ))));
        }
        let mut out = self.clone();
        out.type_probabilities = dist;
        Ok(out)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            num_targets: self.num_targets,
            num_types: self.num_types,
            defender_budget: self.defender_budget,
            attacker_budget: self.attacker_budget,
            theta0: self.true_type_index,
            type_probabilities: self.type_probabilities.probabilities.clone(),
            defender_covered: self.defender_covered.clone(),
            defender_uncovered: self.defender_uncovered.clone(),
            attacker_covered: self.attacker_covered.clone(),
            attacker_uncovered: self.attacker_uncovered.clone(),
        }
    }

    // -----------------------------------------------------------------------
    // Utility formulas
    // -----------------------------------------------------------------------

    /// Defender payoff against a single attacker allocation:
    /// `sum_k y^k (x^k U_d^c(t_k) + (R_d - x^k) U_d^u(t_k))`.
    pub fn defender_utility(&self, x: &DefenderStrategy, y_row: &[f64]) -> f64 {
        let r_d = self.defender_budget;
        y_row
            .iter()
            .enumerate()
            .map(|(k, &y)| {
                y * (x.allocation[k] * self.defender_covered[k]
                    + (r_d - x.allocation[k]) * self.defender_uncovered[k])
            })
            .sum()
    }

    /// Attacker payoff under `type_index`:
    /// `sum_k y^k (x^k U_a^c(t_k, theta) + (R_d - x^k) U_a^u(t_k, theta))`.
    ///
    /// Panics when `type_index` is out of range.
    pub fn attacker_utility(&self, x: &DefenderStrategy, y_row: &[f64], type_index: usize) -> f64 {
        assert!(
            type_index < self.num_types,
            "type index {type_index} out of range for {} types",
            self.num_types
        );
        crate::numerics::dot(&self.attack_values(x, type_index), y_row)
    }

    /// Defender payoff in expectation over types:
    /// `sum_theta P(theta) U_d(x, y(theta))`.
    pub fn expected_defender_utility(
        &self,
        x: &DefenderStrategy,
        y: &AttackerPolicy,
        dist: &TypeDistribution,
    ) -> f64 {
        assert_eq!(dist.len(), self.num_types, "distribution length mismatch");
        dist.probabilities
            .iter()
            .zip(&y.rows)
            .map(|(&p, row)| p * self.defender_utility(x, row))
            .sum()
    }

    /// Per-target attack-value coefficients
    /// `a_k = x^k U_a^c(theta, t_k) + (R_d - x^k) U_a^u(theta, t_k)`,
    /// so that `attacker_utility = a . y_row`.
    pub fn attack_values(&self, x: &DefenderStrategy, type_index: usize) -> Vec<f64> {
        assert!(
            type_index < self.num_types,
            "type index {type_index} out of range for {} types",
            self.num_types
        );
        let r_d = self.defender_budget;
        (0..self.num_targets)
            .map(|k| {
                x.allocation[k] * self.attacker_covered[type_index][k]
                    + (r_d - x.allocation[k]) * self.attacker_uncovered[type_index][k]
            })
            .collect()
    }

    /// Targets whose attack value is within a relative `tie_tol` of the
    /// maximum. The face of the attacker simplex spanned by these indices is
    /// exactly the best-response set (attacker utility is linear in `y`).
    pub fn best_response_set(
        &self,
        x: &DefenderStrategy,
        type_index: usize,
        tie_tol: f64,
    ) -> Vec<usize> {
        let values = self.attack_values(x, type_index);
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cut = best - tie_tol * (1.0 + best.abs());
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= cut)
            .map(|(k, _)| k)
            .collect()
    }

    /// Coefficients `d_k = DeltaU_d(t_k) * sum_theta P(theta) y^k(theta)` and
    /// the constant `c0` such that
    /// `expected_defender_utility(x, y) = d . x + c0`.
    pub fn defender_coefficients(
        &self,
        y: &AttackerPolicy,
        dist: &TypeDistribution,
    ) -> (Vec<f64>, f64) {
        assert_eq!(dist.len(), self.num_types, "distribution length mismatch");
        let mut mass = vec![0.0; self.num_targets];
        for (&p, row) in dist.probabilities.iter().zip(&y.rows) {
            for (k, &v) in row.iter().enumerate() {
                mass[k] += p * v;
            }
        }
        let coefficients: Vec<f64> = (0..self.num_targets)
            .map(|k| self.delta_defender(k) * mass[k])
            .collect();
        let constant = self.defender_budget
            * mass
                .iter()
                .enumerate()
                .map(|(k, &m)| self.defender_uncovered[k] * m)
                .sum::<f64>();
        (coefficients, constant)
    }
}

/// Defender allocation over the `K` targets, summing to `R_d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DefenderStrategy {
    allocation: Vec<f64>,
}

impl DefenderStrategy {
    /// Checks the simplex invariants against `budget`.
    pub fn new(allocation: Vec<f64>, budget: f64) -> Result<Self, ValidationError> {
        let mut issues = Vec::new();
        for (k, &v) in allocation.iter().enumerate() {
            if !v.is_finite() {
                issues.push(ValidationIssue::NotFinite(format!("x[{k}] = {v}")));
            } else if v < 0.0 {
                issues.push(ValidationIssue::Shape(format!("x[{k}] = {v} is negative")));
            }
        }
        let sum: f64 = allocation.iter().sum();
        if (sum - budget).abs() > SIMPLEX_SUM_TOL {
            issues.push(ValidationIssue::Shape(format!(
                "x sums to {sum}, expected budget {budget}"
            )));
        }
        if issues.is_empty() {
            Ok(DefenderStrategy { allocation })
        } else {
            Err(ValidationError { issues })
        }
    }

    /// Cleans an LP solution: clamps tiny negatives and rescales so the sum
    /// is exactly `budget`.
    pub fn from_lp_solution(allocation: &[f64], budget: f64) -> Self {
        DefenderStrategy {
            allocation: clean_simplex(allocation, budget),
        }
    }

    pub fn allocation(&self) -> &[f64] {
        &self.allocation
    }

    pub fn len(&self) -> usize {
        self.allocation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allocation.is_empty()
    }

    /// Indices with allocation above [`SUPPORT_TOL`].
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.allocation)
    }
}

/// Attacker policy: one allocation row per type, each summing to `R_a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AttackerPolicy {
    rows: Vec<Vec<f64>>,
}

impl AttackerPolicy {
    pub fn new(rows: Vec<Vec<f64>>, budget: f64) -> Result<Self, ValidationError> {
        let mut issues = Vec::new();
        let width = rows.first().map_or(0, |r| r.len());
        for (j, row) in rows.iter().enumerate() {
            if row.len() != width {
                issues.push(ValidationIssue::Shape(format!(
                    "y row {j} has length {}, expected {width}",
                    row.len()
                )));
                continue;
            }
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    issues.push(ValidationIssue::NotFinite(format!("y[{j}][{k}] = {v}")));
                } else if v < 0.0 {
                    issues.push(ValidationIssue::Shape(format!(
                        "y[{j}][{k}] = {v} is negative"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - budget).abs() > SIMPLEX_SUM_TOL {
                issues.push(ValidationIssue::Shape(format!(
                    "y row {j} sums to {sum}, expected budget {budget}"
                )));
            }
        }
        if issues.is_empty() {
            Ok(AttackerPolicy { rows })
        } else {
            Err(ValidationError { issues })
        }
    }

    /// Cleans LP rows: clamps tiny negatives and rescales each row to sum
    /// exactly `budget`.
    pub fn from_lp_rows(rows: &[Vec<f64>], budget: f64) -> Self {
        AttackerPolicy {
            rows: rows.iter().map(|r| clean_simplex(r, budget)).collect(),
        }
    }

    /// A pure policy: all of `budget` on `targets[j]` for each type `j`.
    pub fn pure(targets: &[usize], num_targets: usize, budget: f64) -> Self {
        let rows = targets
            .iter()
            .map(|&t| {
                let mut row = vec![0.0; num_targets];
                row[t] = budget;
                row
            })
            .collect();
        AttackerPolicy { rows }
    }

    pub fn num_types(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, type_index: usize) -> &[f64] {
        &self.rows[type_index]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Row-major flattening `(y(theta_1), ..., y(theta_n))`, the coordinates
    /// the stability system works in.
    pub fn flatten(&self) -> Vec<f64> {
        self.rows.iter().flatten().cloned().collect()
    }

    pub fn supports(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| support_of(r)).collect()
    }
}

/// Probability distribution over the type set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TypeDistribution {
    probabilities: Vec<f64>,
}

impl TypeDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, ValidationError> {
        let mut issues = Vec::new();
        for (j, &p) in probabilities.iter().enumerate() {
            if !p.is_finite() {
                issues.push(ValidationIssue::NotFinite(format!("P[{j}] = {p}")));
            } else if p < 0.0 {
                issues.push(ValidationIssue::Probability(format!(
                    "P[{j}] = {p} is negative"
                )));
            }
        }
        let mass: f64 = probabilities.iter().sum();
        if (mass - 1.0).abs() > SIMPLEX_SUM_TOL {
            issues.push(ValidationIssue::Probability(format!(
                "P sums to {mass}, expected 1"
            )));
        }
        if issues.is_empty() {
            Ok(TypeDistribution { probabilities })
        } else {
            Err(ValidationError { issues })
        }
    }

    pub fn uniform(n: usize) -> Self {
        TypeDistribution {
            probabilities: vec![1.0 / n as f64; n],
        }
    }

    pub fn one_point(n: usize, type_index: usize) -> Self {
        let mut probabilities = vec![0.0; n];
        probabilities[type_index] = 1.0;
        TypeDistribution { probabilities }
    }

    /// Clamps negatives to zero and renormalizes; for grid points computed
    /// with floating arithmetic.
    pub fn from_unnormalized(raw: &[f64]) -> Self {
        let clamped: Vec<f64> = raw.iter().map(|&p| p.max(0.0)).collect();
        let mass: f64 = clamped.iter().sum();
        TypeDistribution {
            probabilities: clamped.iter().map(|&p| p / mass).collect(),
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let target = 1.0 / self.probabilities.len() as f64;
        self.probabilities.iter().all(|&p| (p - target).abs() <= tol)
    }

    /// `sum_theta |self - other|`, the perturbation size of the robustness
    /// results.
    pub fn l1_distance(&self, other: &TypeDistribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Indices of entries above [`SUPPORT_TOL`].
pub fn support_of(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > SUPPORT_TOL)
        .map(|(i, _)| i)
        .collect()
}

/// Entrywise support indicator `chi` at [`SUPPORT_TOL`].
pub fn chi(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v.abs() > SUPPORT_TOL { 1.0 } else { 0.0 })
        .collect()
}

fn clean_simplex(values: &[f64], budget: f64) -> Vec<f64> {
    let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let sum: f64 = clamped.iter().sum();
    if sum <= 0.0 {
        // Degenerate input; fall back to all mass on the first coordinate.
        let mut row = vec![0.0; values.len()];
        row[0] = budget;
        return row;
    }
    clamped.iter().map(|&v| v * budget / sum).collect()
}
