//! Robustness of defender strategies when the believed type distribution is
//! perturbed: the feasibility test for a robust strategy, an empirical
//! robustness radius, and the simplex sweep behind the triangle heatmaps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::equilibria::{solve_hbne, SolveOptions, SolverError};
use crate::model::{AttackerPolicy, DefenderStrategy, GameInstance, TypeDistribution};
use crate::numerics::{solve_feasibility, LinearProgram, NumericsError};

#[derive(Debug, Error)]
pub enum RobustnessError {
    #[error("strategy is not robust at the base distribution")]
    NotRobustAtBase,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Outcome of the robust-strategy feasibility test.
#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub is_robust: bool,
    /// Completing attacker policy `y'_{P'}` when robust.
    pub witness_policy: Option<AttackerPolicy>,
    /// `sum_theta |P'(theta) - P(theta)|` against the instance distribution.
    pub perturbation_l1: f64,
    /// Tie tolerance used for the best-response sets, and the types whose
    /// best response was tied (degeneracy flag: widening the tolerance can
    /// only enlarge the feasible face).
    pub tie_tolerance: f64,
    pub tied_best_response_types: Vec<usize>,
}

impl RobustnessReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "robust": self.is_robust,
            "witness": self.witness_policy.as_ref().map(|w| w.rows().to_vec()),
            "perturbation_l1": self.perturbation_l1,
            "tie_tolerance": self.tie_tolerance,
            "tied_best_response_types": self.tied_best_response_types,
        })
    }
}

/// Decides whether `x_star` remains an optimal commitment when the defender
/// believes the perturbed distribution `p_prime`: is there a completion
/// `y'(theta) in BR(x_star, theta)` for every type under which `x_star`
/// maximizes the P'-expected defender utility?
///
/// The defender objective is linear over the budget simplex, so optimality
/// of `x_star` is exactly "coefficients equal on supp(x_star) and dominant
/// everywhere", which makes the whole question one linear feasibility
/// system over `y'`.
pub fn check_robust(
    inst: &GameInstance,
    x_star: &DefenderStrategy,
    p_prime: &TypeDistribution,
    opts: &SolveOptions,
) -> Result<RobustnessReport, RobustnessError> {
    if p_prime.len() != inst.num_types() {
        return Err(RobustnessError::PreconditionViolated(format!(
            "perturbed distribution has {} entries, instance has {} types",
            p_prime.len(),
            inst.num_types()
        )));
    }
    let k = inst.num_targets();
    let n = inst.num_types();
    let r_a = inst.attacker_budget();
    let pp = p_prime.probabilities();
    let y_var = |j: usize, t: usize| j * k + t;

    let br_sets: Vec<Vec<usize>> = (0..n)
        .map(|j| inst.best_response_set(x_star, j, opts.tie_tol))
        .collect();
    let tied_best_response_types: Vec<usize> = (0..n).filter(|&j| br_sets[j].len() > 1).collect();

    let mut lp = LinearProgram::new(n * k);
    for (j, br) in br_sets.iter().enumerate() {
        let mut sum_row = vec![0.0; n * k];
        for t in 0..k {
            sum_row[y_var(j, t)] = 1.0;
        }
        lp.add_eq(sum_row, r_a);
        for t in 0..k {
            if !br.contains(&t) {
                let mut row = vec![0.0; n * k];
                row[y_var(j, t)] = 1.0;
                lp.add_eq(row, 0.0);
            }
        }
    }

    // d'_t = DeltaU_d(t) sum_j P'_j y'_jt: equal on supp(x_star), dominant
    // over every other target.
    let support = x_star.support();
    if support.is_empty() {
        return Err(RobustnessError::PreconditionViolated(
            "x_star has empty support".into(),
        ));
    }
    let anchor = support[0];
    let d_row = |t: usize| {
        let mut row = vec![0.0; n * k];
        for j in 0..n {
            row[y_var(j, t)] += pp[j] * inst.delta_defender(t);
            row[y_var(j, anchor)] -= pp[j] * inst.delta_defender(anchor);
        }
        row
    };
    for &t in &support[1..] {
        lp.add_eq(d_row(t), 0.0);
    }
    for t in 0..k {
        if !support.contains(&t) {
            lp.add_le(d_row(t), 0.0);
        }
    }

    let witness = solve_feasibility(&lp, &opts.numerics)?;
    let perturbation_l1 = inst.distribution().l1_distance(p_prime);
    Ok(RobustnessReport {
        is_robust: witness.is_some(),
        witness_policy: witness.map(|w| {
            let rows: Vec<Vec<f64>> = (0..n).map(|j| w[j * k..(j + 1) * k].to_vec()).collect();
            AttackerPolicy::from_lp_rows(&rows, r_a)
        }),
        perturbation_l1,
        tie_tolerance: opts.tie_tol,
        tied_best_response_types,
    })
}

/// Options for [`robustness_radius`].
#[derive(Debug, Clone, Copy)]
pub struct RadiusOptions {
    /// Random simplex directions sampled in addition to the vertex
    /// directions.
    pub direction_samples: usize,
    /// Final bracket width, in L1 distance.
    pub bisection_tolerance: f64,
    /// Forward-scan step locating the first failure before refinement.
    /// Robustness along a ray is not guaranteed monotone, so the scan runs
    /// first and bisection only sharpens the bracket it found.
    pub scan_step: f64,
    pub seed: u64,
    pub solve: SolveOptions,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        RadiusOptions {
            direction_samples: 64,
            bisection_tolerance: 1e-4,
            scan_step: 1e-2,
            seed: 7,
            solve: SolveOptions::default(),
        }
    }
}

/// Sampled lower bound on how far the believed distribution can drift (in
/// L1) before `x_star` stops being a robust strategy.
#[derive(Debug, Clone, Copy)]
pub struct RadiusEstimate {
    /// Certified lower bound: every tested distribution within this L1
    /// distance along the sampled directions was robust.
    pub radius: f64,
    /// Directions actually tested (vertex directions plus samples).
    pub direction_samples: usize,
    pub bisection_tolerance: f64,
    /// True when no direction ever failed before hitting the simplex
    /// boundary; the radius is then purely geometric.
    pub all_directions_hit_boundary: bool,
}

impl RadiusEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "radius": self.radius,
            "direction_samples": self.direction_samples,
            "bisection_tolerance": self.bisection_tolerance,
            "all_directions_hit_boundary": self.all_directions_hit_boundary,
        })
    }
}

/// Estimates the robustness radius around `p_base` by scanning rays: vertex
/// directions plus `direction_samples` random simplex points, each scanned
/// forward at `scan_step` and bisected around the first failure.
pub fn robustness_radius(
    inst: &GameInstance,
    x_star: &DefenderStrategy,
    p_base: &TypeDistribution,
    opts: &RadiusOptions,
) -> Result<RadiusEstimate, RobustnessError> {
    let n = inst.num_types();
    if !check_robust(inst, x_star, p_base, &opts.solve)?.is_robust {
        return Err(RobustnessError::NotRobustAtBase);
    }
    let base = p_base.probabilities();

    let mut directions: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut dir: Vec<f64> = base.iter().map(|&p| -p).collect();
        dir[j] += 1.0;
        directions.push(dir);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.direction_samples {
        let q = sample_simplex(&mut rng, n);
        let dir: Vec<f64> = q.iter().zip(base).map(|(a, b)| a - b).collect();
        directions.push(dir);
    }

    // Rays that reach the simplex boundary without failing constrain
    // nothing: the robust region simply extends to the boundary there. Only
    // rays with an actual failure bound the radius; when none fail, the
    // radius is the farthest reachable distance.
    let mut failure_radius = f64::INFINITY;
    let mut max_reach = 0.0_f64;
    let mut tested = 0usize;
    for dir in directions {
        let norm: f64 = dir.iter().map(|v| v.abs()).sum();
        if norm < 1e-12 {
            continue;
        }
        tested += 1;
        let unit: Vec<f64> = dir.iter().map(|v| v / norm).collect();
        // Distance (in L1 = ray parameter) at which the ray exits the simplex.
        let d_max = base
            .iter()
            .zip(&unit)
            .filter(|(_, &u)| u < 0.0)
            .map(|(&p, &u)| p / -u)
            .fold(f64::INFINITY, f64::min);
        if d_max <= 0.0 {
            continue;
        }

        let robust_at = |d: f64| -> Result<bool, RobustnessError> {
            let p: Vec<f64> = base.iter().zip(&unit).map(|(&b, &u)| b + d * u).collect();
            let dist = TypeDistribution::from_unnormalized(&p);
            Ok(check_robust(inst, x_star, &dist, &opts.solve)?.is_robust)
        };

        // Forward scan for the first failure.
        let mut last_good = 0.0_f64;
        let mut first_bad: Option<f64> = None;
        let mut d = opts.scan_step.min(d_max);
        loop {
            if robust_at(d)? {
                last_good = d;
            } else {
                first_bad = Some(d);
                break;
            }
            if d >= d_max {
                break;
            }
            d = (d + opts.scan_step).min(d_max);
        }

        match first_bad {
            None => {
                max_reach = max_reach.max(d_max);
            }
            Some(mut hi) => {
                let mut lo = last_good;
                while hi - lo > opts.bisection_tolerance {
                    let mid = 0.5 * (lo + hi);
                    if robust_at(mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                failure_radius = failure_radius.min(lo);
            }
        }
    }

    let all_boundary = failure_radius.is_infinite();
    Ok(RadiusEstimate {
        radius: if all_boundary { max_reach } else { failure_radius },
        direction_samples: tested,
        bisection_tolerance: opts.bisection_tolerance,
        all_directions_hit_boundary: all_boundary,
    })
}

/// Uniform point on the probability simplex via sorted uniform spacings.
fn sample_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &c in &cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(1.0 - prev);
    out
}

// ---------------------------------------------------------------------------
// Simplex grid sweep
// ---------------------------------------------------------------------------

/// Options for [`simplex_grid_sweep`].
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    /// Every `cross_check_stride`-th solved point is re-checked with
    /// [`check_robust`] against each feasible neighbor distribution
    /// (0 disables the cross-check).
    pub cross_check_stride: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solve: SolveOptions::default(),
            cross_check_stride: 7,
        }
    }
}

/// One grid point of the sweep.
#[derive(Debug, Clone)]
pub struct GridRecord {
    pub grid_i: usize,
    pub grid_j: usize,
    pub p: [f64; 3],
    /// Canonical hash of (support set, strategy rounded to 1e-3); `None`
    /// when the solve failed.
    pub color_key: Option<u64>,
    pub x: Option<Vec<f64>>,
    pub support: Vec<usize>,
    pub locally_robust: bool,
    pub status: String,
}

/// Sweep summary over the 3-type simplex.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<GridRecord>,
    /// Distinct color keys in order of first appearance (grid order).
    pub color_order: Vec<u64>,
    pub solved: usize,
    pub failed: usize,
    pub locally_robust: usize,
    pub locally_robust_fraction: f64,
    pub cross_checked: usize,
    pub cross_check_agreed: usize,
}

impl SweepResult {
    /// CSV with one row per grid point.
    pub fn to_csv(&self, num_targets: usize) -> String {
        let mut out = String::from("p1,p2,p3,color_key");
        for t in 1..=num_targets {
            out.push_str(&format!(",x{t}"));
        }
        out.push_str(",locally_robust,solver_status\n");
        for rec in &self.records {
            out.push_str(&format!("{},{},{}", rec.p[0], rec.p[1], rec.p[2]));
            match rec.color_key {
                Some(key) => out.push_str(&format!(",{key:016x}")),
                None => out.push(','),
            }
            for t in 0..num_targets {
                match &rec.x {
                    Some(x) => out.push_str(&format!(",{}", x[t])),
                    None => out.push(','),
                }
            }
            out.push_str(&format!(",{},{}\n", rec.locally_robust, rec.status));
        }
        out
    }
}

/// Solves the HBNE at every grid point `(P1, P2) = (i, j) * step` of the
/// 3-type simplex and colors it by the defender strategy it gets. A point is
/// "locally robust" when all simplex-feasible 4-neighbors share its color,
/// mirroring the same-color-neighborhood criterion of the robustness figure.
pub fn simplex_grid_sweep(
    template: &GameInstance,
    step: f64,
    opts: &SweepOptions,
) -> Result<SweepResult, RobustnessError> {
    if template.num_types() != 3 {
        return Err(RobustnessError::PreconditionViolated(format!(
            "sweep requires exactly 3 types, template has {}",
            template.num_types()
        )));
    }
    let cells = 1.0 / step;
    let m = cells.round() as usize;
    if m == 0 || (cells - m as f64).abs() > 1e-9 {
        return Err(RobustnessError::PreconditionViolated(format!(
            "grid step {step} does not divide 1"
        )));
    }

    let point_dist = |i: usize, j: usize| {
        let p1 = i as f64 * step;
        let p2 = j as f64 * step;
        TypeDistribution::from_unnormalized(&[p1, p2, 1.0 - p1 - p2])
    };

    // Row-major over i (P1 axis), then j (P2 axis).
    let mut keys: Vec<Vec<Option<u64>>> = vec![vec![None; m + 1]; m + 1];
    let mut records = Vec::new();
    let mut color_order: Vec<u64> = Vec::new();
    let mut solved = 0usize;
    let mut failed = 0usize;

    let mut solutions: Vec<Vec<Option<(DefenderStrategy, Vec<usize>)>>> =
        vec![vec![None; m + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=(m - i) {
            let dist = point_dist(i, j);
            let inst = template
                .with_distribution(dist.clone())
                .expect("template has 3 types");
            let (status, key, x, support) = match solve_hbne(&inst, &opts.solve) {
                Ok(result) => {
                    solved += 1;
                    let support = result.defender_support.clone();
                    let key = color_key(&support, result.defender_strategy.allocation());
                    if !color_order.contains(&key) {
                        color_order.push(key);
                    }
                    (
                        "ok".to_string(),
                        Some(key),
                        Some(result.defender_strategy),
                        support,
                    )
                }
                Err(err) => {
                    failed += 1;
                    (format!("error: {err}"), None, None, Vec::new())
                }
            };
            keys[i][j] = key;
            solutions[i][j] = x.clone().map(|x| (x, support.clone()));
            records.push(GridRecord {
                grid_i: i,
                grid_j: j,
                p: {
                    let p = dist.probabilities();
                    [p[0], p[1], p[2]]
                },
                color_key: key,
                x: x.map(|x| x.allocation().to_vec()),
                support,
                locally_robust: false,
                status,
            });
        }
    }

    // Neighbor comparison pass.
    let feasible = |i: isize, j: isize| -> bool {
        i >= 0 && j >= 0 && (i + j) as usize <= m
    };
    let mut locally_robust = 0usize;
    let mut cross_checked = 0usize;
    let mut cross_check_agreed = 0usize;
    for (idx, rec) in records.iter_mut().enumerate() {
        let (i, j) = (rec.grid_i as isize, rec.grid_j as isize);
        let Some(own) = rec.color_key else {
            continue;
        };
        let neighbors = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)];
        let same_color = neighbors.iter().all(|&(ni, nj)| {
            !feasible(ni, nj) || keys[ni as usize][nj as usize] == Some(own)
        });
        rec.locally_robust = same_color;
        if same_color {
            locally_robust += 1;
        }

        if opts.cross_check_stride > 0 && idx % opts.cross_check_stride == 0 && same_color {
            // The color criterion says the strategy should stay optimal at
            // the neighboring distributions; confirm with the feasibility
            // test directly.
            let (x, _) = solutions[i as usize][j as usize]
                .as_ref()
                .expect("colored points were solved");
            let inst = template
                .with_distribution(point_dist(i as usize, j as usize))
                .expect("template has 3 types");
            let mut agreed = true;
            for &(ni, nj) in &neighbors {
                if !feasible(ni, nj) {
                    continue;
                }
                let neighbor_dist = point_dist(ni as usize, nj as usize);
                let report = check_robust(&inst, x, &neighbor_dist, &opts.solve)?;
                agreed &= report.is_robust;
            }
            cross_checked += 1;
            if agreed {
                cross_check_agreed += 1;
            }
        }
    }

    let locally_robust_fraction = if solved > 0 {
        locally_robust as f64 / solved as f64
    } else {
        0.0
    };
    Ok(SweepResult {
        records,
        color_order,
        solved,
        failed,
        locally_robust,
        locally_robust_fraction,
        cross_checked,
        cross_check_agreed,
    })
}

/// Stable 64-bit key for (support, strategy rounded to 1e-3). Raw floating
/// strategies never compare equal across grid points; support identity plus
/// coarse rounding is what the flat color regions of the figure depict.
pub fn color_key(support: &[usize], allocation: &[f64]) -> u64 {
    let mut bytes = Vec::with_capacity(4 * support.len() + 8 * allocation.len());
    for &s in support {
        bytes.extend_from_slice(&(s as u32).to_le_bytes());
    }
    bytes.push(0xff);
    for &v in allocation {
        let milli = (v * 1000.0).round() as i64;
        bytes.extend_from_slice(&milli.to_le_bytes());
    }
    fnv1a64(&bytes)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
