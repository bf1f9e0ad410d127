//! Independent oracles shared by the integration and acceptance suites.
//! Everything here recomputes results by brute force (grid search, vertex
//! enumeration, dense elimination) without touching the solver paths it
//! checks.

#![allow(dead_code)]

use mtdhg_core::model::{DefenderStrategy, GameInstance, TypeDistribution};
use mtdhg_core::SolveOptions;

/// Brute-force Stackelberg value: scans the defender simplex on a lattice
/// with `divisions` steps per unit of budget and lets each type reply with
/// the defender-favoring vertex of its exact best-response face.
/// Only implemented for K <= 3.
pub fn bsse_grid_value(inst: &GameInstance, divisions: usize) -> f64 {
    let k = inst.num_targets();
    let r_d = inst.defender_budget();
    let h = r_d / divisions as f64;
    let mut best = f64::NEG_INFINITY;
    let mut eval = |alloc: Vec<f64>| {
        // Boundary lattice points can carry -1e-17 dust from the subtraction.
        let alloc: Vec<f64> = alloc.into_iter().map(|v| v.max(0.0)).collect();
        let x = DefenderStrategy::new(alloc, r_d).expect("lattice point is feasible");
        let v = optimistic_reply_value(inst, &x);
        if v > best {
            best = v;
        }
    };
    match k {
        1 => eval(vec![r_d]),
        2 => {
            for i in 0..=divisions {
                let a = i as f64 * h;
                eval(vec![a, r_d - a]);
            }
        }
        3 => {
            for i in 0..=divisions {
                for j in 0..=(divisions - i) {
                    let a = i as f64 * h;
                    let b = j as f64 * h;
                    eval(vec![a, b, r_d - a - b]);
                }
            }
        }
        _ => panic!("grid oracle supports K <= 3, got {k}"),
    }
    best
}

/// Defender value at `x` when every type attacks the best-for-the-defender
/// target among its exactly-tied best responses.
pub fn optimistic_reply_value(inst: &GameInstance, x: &DefenderStrategy) -> f64 {
    let r_d = inst.defender_budget();
    let r_a = inst.attacker_budget();
    let p = inst.distribution().probabilities();
    let mut total = 0.0;
    for j in 0..inst.num_types() {
        let values = inst.attack_values(x, j);
        let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let cut = top - 1e-9 * (1.0 + top.abs());
        let defender_gain = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= cut)
            .map(|(t, _)| {
                x.allocation()[t] * inst.delta_defender(t) + r_d * inst.defender_uncovered(t)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        total += p[j] * r_a * defender_gain;
    }
    total
}

// ---------------------------------------------------------------------------
// LP vertex enumeration
// ---------------------------------------------------------------------------

/// A small LP in explicit form for the vertex oracle.
pub struct DenseLp {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_le: Vec<Vec<f64>>,
    pub b_le: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Maximum of the objective over the polytope by enumerating candidate
/// vertices: every choice of active constraints that yields a square
/// solvable system. Returns `None` when no feasible vertex exists. Assumes
/// the feasible region is bounded (callers construct box-bounded programs),
/// so an optimum, if any, sits on a vertex.
pub fn lp_vertex_optimum(lp: &DenseLp) -> Option<f64> {
    let n = lp.objective.len();
    // Constraint pool beyond the always-active equalities.
    let mut pool: Vec<(Vec<f64>, f64)> = Vec::new();
    for (row, &b) in lp.a_le.iter().zip(&lp.b_le) {
        pool.push((row.clone(), b));
    }
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        pool.push((row.clone(), lp.upper[i]));
        row[i] = -1.0;
        pool.push((row, -lp.lower[i]));
    }
    let need = n.checked_sub(lp.a_eq.len()).expect("at most n equalities");
    let mut best: Option<f64> = None;
    let mut picks = vec![0usize; need];
    enumerate_combinations(pool.len(), need, &mut picks, 0, 0, &mut |chosen| {
        let mut a: Vec<Vec<f64>> = lp.a_eq.clone();
        let mut b: Vec<f64> = lp.b_eq.clone();
        for &c in chosen {
            a.push(pool[c].0.clone());
            b.push(pool[c].1);
        }
        if let Some(v) = solve_square(&a, &b) {
            if is_feasible(lp, &v, 1e-9) {
                let value = dot(&lp.objective, &v);
                if best.map_or(true, |cur| value > cur) {
                    best = Some(value);
                }
            }
        }
    });
    best
}

fn enumerate_combinations(
    pool: usize,
    need: usize,
    picks: &mut Vec<usize>,
    depth: usize,
    start: usize,
    visit: &mut dyn FnMut(&[usize]),
) {
    if depth == need {
        visit(picks);
        return;
    }
    for c in start..pool {
        picks[depth] = c;
        enumerate_combinations(pool, need, picks, depth + 1, c + 1, visit);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_feasible(lp: &DenseLp, v: &[f64], tol: f64) -> bool {
    for (row, &b) in lp.a_eq.iter().zip(&lp.b_eq) {
        if (dot(row, v) - b).abs() > tol {
            return false;
        }
    }
    for (row, &b) in lp.a_le.iter().zip(&lp.b_le) {
        if dot(row, v) > b + tol {
            return false;
        }
    }
    for i in 0..v.len() {
        if v[i] < lp.lower[i] - tol || v[i] > lp.upper[i] + tol {
            return false;
        }
    }
    true
}

/// Gaussian elimination with partial pivoting; `None` on singular systems.
pub fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    if a.len() != n {
        return None;
    }
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let (pivot_row, pivot_val) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .fold((col, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pivot_val < 1e-11 {
            return None;
        }
        m.swap(col, pivot_row);
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r][col] / m[col][col];
            if factor != 0.0 {
                for c in col..=n {
                    m[r][c] -= factor * m[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

// ---------------------------------------------------------------------------
// SOL and robustness grid oracles
// ---------------------------------------------------------------------------

/// All lattice points of the scaled simplex `{v >= 0, sum v = budget}` with
/// `steps` subdivisions. Only for dimension <= 3.
pub fn simplex_lattice(dim: usize, budget: f64, steps: usize) -> Vec<Vec<f64>> {
    let h = budget / steps as f64;
    match dim {
        1 => vec![vec![budget]],
        2 => (0..=steps)
            .map(|i| vec![i as f64 * h, budget - i as f64 * h])
            .collect(),
        3 => {
            let mut out = Vec::new();
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    out.push(vec![i as f64 * h, j as f64 * h, budget - (i + j) as f64 * h]);
                }
            }
            out
        }
        _ => panic!("lattice oracle supports dim <= 3"),
    }
}

/// Brute-force SOL nonemptiness for 2-type instances: scans candidate
/// witnesses on a per-block lattice, keeps those supported inside `supp(y)`,
/// and accepts when the two sides of the multiplier equation are
/// proportional with a positive factor. `tol` absorbs the lattice
/// discretization.
pub fn sol_grid_oracle(
    inst: &GameInstance,
    y: &mtdhg_core::AttackerPolicy,
    steps: usize,
    tol: f64,
) -> bool {
    assert_eq!(inst.num_types(), 2, "oracle written for 2 types");
    let k = inst.num_targets();
    let r_a = inst.attacker_budget();
    let p = inst.distribution().probabilities();
    let flat_y = y.flatten();

    // rhs = B vec(y).
    let rhs: Vec<f64> = (0..k)
        .map(|t| p[0] * flat_y[t] + p[1] * flat_y[k + t])
        .collect();
    let ratio = |j: usize, t: usize| inst.delta_attacker(j, t) / inst.delta_defender(t);
    let allowed: Vec<bool> = flat_y.iter().map(|&v| v.abs() > 1e-9).collect();

    let lattice = simplex_lattice(k, r_a, steps);
    for block0 in &lattice {
        if block0
            .iter()
            .enumerate()
            .any(|(t, &v)| v > 1e-12 && !allowed[t])
        {
            continue;
        }
        for block1 in &lattice {
            if block1
                .iter()
                .enumerate()
                .any(|(t, &v)| v > 1e-12 && !allowed[k + t])
            {
                continue;
            }
            let lhs: Vec<f64> = (0..k)
                .map(|t| p[0] * ratio(0, t) * block0[t] + p[1] * ratio(1, t) * block1[t])
                .collect();
            // Least-squares multiplier, then residual check.
            let denom = dot(&rhs, &rhs);
            if denom <= 0.0 {
                continue;
            }
            let lambda = dot(&lhs, &rhs) / denom;
            if lambda <= 1e-7 {
                continue;
            }
            let residual = lhs
                .iter()
                .zip(&rhs)
                .map(|(l, r)| (l - lambda * r).abs())
                .fold(0.0, f64::max);
            if residual <= tol {
                return true;
            }
        }
    }
    false
}

/// Brute-force robustness check for 2-type instances: scans completions on
/// a per-block lattice restricted to the best-response faces and tests the
/// defender optimality conditions with a discretization allowance
/// proportional to the lattice pitch.
pub fn robust_grid_oracle(
    inst: &GameInstance,
    x_star: &DefenderStrategy,
    p_prime: &TypeDistribution,
    steps: usize,
) -> bool {
    assert_eq!(inst.num_types(), 2, "oracle written for 2 types");
    let k = inst.num_targets();
    let r_a = inst.attacker_budget();
    let pp = p_prime.probabilities();
    let br: Vec<Vec<usize>> = (0..2)
        .map(|j| inst.best_response_set(x_star, j, 1e-9))
        .collect();
    let support = {
        let mut s = Vec::new();
        for (t, &v) in x_star.allocation().iter().enumerate() {
            if v > 1e-9 {
                s.push(t);
            }
        }
        s
    };
    let h = r_a / steps as f64;
    let max_delta = (0..k).map(|t| inst.delta_defender(t)).fold(0.0, f64::max);
    // Rounding a true witness to the lattice moves each coefficient by at
    // most DeltaU_d * h.
    let slack = 2.0 * max_delta * h;

    let lattice = simplex_lattice(k, r_a, steps);
    let on_face = |block: &Vec<f64>, face: &Vec<usize>| {
        block
            .iter()
            .enumerate()
            .all(|(t, &v)| v <= 1e-12 || face.contains(&t))
    };
    for block0 in lattice.iter().filter(|b| on_face(b, &br[0])) {
        for block1 in lattice.iter().filter(|b| on_face(b, &br[1])) {
            let d: Vec<f64> = (0..k)
                .map(|t| inst.delta_defender(t) * (pp[0] * block0[t] + pp[1] * block1[t]))
                .collect();
            let d_support = support.iter().map(|&t| d[t]).collect::<Vec<_>>();
            let d_max_support = d_support.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let d_min_support = d_support.iter().cloned().fold(f64::INFINITY, f64::min);
            if d_max_support - d_min_support > slack {
                continue;
            }
            let dominated = (0..k)
                .filter(|t| !support.contains(t))
                .all(|t| d[t] <= d_min_support + slack);
            if dominated {
                return true;
            }
        }
    }
    false
}

/// Exhaustive robustness scan of the 3-type simplex at `step`: returns the
/// minimum L1 distance from `p_base` to a non-robust grid distribution, or
/// `None` when every grid point is robust.
pub fn radius_grid_scan(
    inst: &GameInstance,
    x_star: &DefenderStrategy,
    p_base: &TypeDistribution,
    step: f64,
    opts: &SolveOptions,
) -> Option<f64> {
    let m = (1.0 / step).round() as usize;
    let mut nearest: Option<f64> = None;
    for i in 0..=m {
        for j in 0..=(m - i) {
            let p1 = i as f64 * step;
            let p2 = j as f64 * step;
            let dist = TypeDistribution::from_unnormalized(&[p1, p2, 1.0 - p1 - p2]);
            let robust = mtdhg_core::check_robust(inst, x_star, &dist, opts)
                .expect("robustness check solves")
                .is_robust;
            if !robust {
                let d = p_base.l1_distance(&dist);
                if nearest.map_or(true, |cur| d < cur) {
                    nearest = Some(d);
                }
            }
        }
    }
    nearest
}
