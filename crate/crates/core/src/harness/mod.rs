//! Seeded random-instance generation and the two batch experiments: the
//! stability case-ratio study (per-cell classification over a grid of type
//! and target counts) and the robustness simplex sweep. All outputs are
//! byte-reproducible from the configuration alone.

pub mod svg;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::equilibria::{SolveOptions, SolverError};
use crate::model::{validate_instance, GameInstance, InstanceFile};
use crate::robustness::{simplex_grid_sweep, RobustnessError, SweepOptions, SweepResult};
use crate::stability::{classify_stability, StabilityError};
use svg::{bar_chart, triangle_heatmap, BarSeries, HeatCell, SvgError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("instance regeneration gave up after {attempts} tie-rejections (seed {seed}, n={n}, K={k})")]
    RetryExhausted {
        seed: u64,
        n: usize,
        k: usize,
        attempts: usize,
    },
    #[error("cell (n={n}, K={k}) had {failures}/{instances} failures (> 5%), aborting run")]
    CellFailures {
        n: usize,
        k: usize,
        failures: usize,
        instances: usize,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Robustness(#[from] RobustnessError),
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Configuration of the simplex-sweep experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    /// One sweep ("setting") per template seed.
    pub template_seeds: Vec<u64>,
    pub grid_step: f64,
    pub num_targets: usize,
    /// Template payoffs are drawn in `[0, payoff_high]` with the orderings
    /// required by the model enforced per draw pair.
    pub payoff_high: f64,
    pub cross_check_stride: usize,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Fig2Config {
            template_seeds: vec![7, 303],
            grid_step: 0.05,
            num_targets: 3,
            payoff_high: 5.0,
            cross_check_stride: 7,
        }
    }
}

/// Configuration of a batch experiment run. Defaults follow the reference
/// setup: payoffs that favor covering (covered-defender and
/// uncovered-attacker draws in `[5, 10]`, their counterparts in `[0, 5]`),
/// budgets in `[1, 5]`, 100 instances per cell. Type/target counts default
/// to the desk-scale `{2, 3, 4}` — exact enumeration over the full
/// `{5..10}` grid is out of budget by design.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub instances_per_cell: usize,
    pub type_counts: Vec<usize>,
    pub target_counts: Vec<usize>,
    pub defender_covered_range: (f64, f64),
    pub defender_uncovered_range: (f64, f64),
    pub attacker_covered_range: (f64, f64),
    pub attacker_uncovered_range: (f64, f64),
    pub budget_range: (f64, f64),
    pub output_dir: PathBuf,
    /// Worker threads for per-cell parallelism; `None` uses the global
    /// default (machine parallelism).
    pub threads: Option<usize>,
    pub fig2: Fig2Config,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 2024,
            instances_per_cell: 100,
            type_counts: vec![2, 3, 4],
            target_counts: vec![2, 3, 4],
            defender_covered_range: (5.0, 10.0),
            defender_uncovered_range: (0.0, 5.0),
            attacker_covered_range: (0.0, 5.0),
            attacker_uncovered_range: (5.0, 10.0),
            budget_range: (1.0, 5.0),
            output_dir: PathBuf::from("runs"),
            threads: None,
            fig2: Fig2Config::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let ranges = [
            ("defender_covered_range", self.defender_covered_range),
            ("defender_uncovered_range", self.defender_uncovered_range),
            ("attacker_covered_range", self.attacker_covered_range),
            ("attacker_uncovered_range", self.attacker_uncovered_range),
            ("budget_range", self.budget_range),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(HarnessError::Config(format!(
                    "{name} = ({lo}, {hi}) is not an ordered finite range"
                )));
            }
        }
        if self.budget_range.0 <= 0.0 {
            return Err(HarnessError::Config(
                "budgets must be strictly positive".into(),
            ));
        }
        // Draw ranges must force the covering assumptions: covered-defender
        // and uncovered-attacker values dominate their counterparts.
        if self.defender_covered_range.0 < self.defender_uncovered_range.1 {
            return Err(HarnessError::Config(
                "defender_covered_range must sit at or above defender_uncovered_range".into(),
            ));
        }
        if self.attacker_uncovered_range.0 < self.attacker_covered_range.1 {
            return Err(HarnessError::Config(
                "attacker_uncovered_range must sit at or above attacker_covered_range".into(),
            ));
        }
        if self.type_counts.is_empty() || self.target_counts.is_empty() {
            return Err(HarnessError::Config(
                "type_counts and target_counts must be nonempty".into(),
            ));
        }
        if self.type_counts.iter().chain(&self.target_counts).any(|&c| c == 0) {
            return Err(HarnessError::Config("counts must be >= 1".into()));
        }
        if self.fig2.template_seeds.is_empty() {
            return Err(HarnessError::Config("fig2.template_seeds is empty".into()));
        }
        if self.fig2.num_targets == 0 {
            return Err(HarnessError::Config("fig2.num_targets must be >= 1".into()));
        }
        let cells = 1.0 / self.fig2.grid_step;
        if !(self.fig2.grid_step > 0.0 && (cells - cells.round()).abs() <= 1e-9) {
            return Err(HarnessError::Config(format!(
                "fig2.grid_step {} does not divide 1",
                self.fig2.grid_step
            )));
        }
        if !(self.fig2.payoff_high > 0.0) {
            return Err(HarnessError::Config("fig2.payoff_high must be > 0".into()));
        }
        Ok(())
    }

    /// Hex prefix of the SHA-256 of the canonical JSON encoding; names the
    /// run directory so identical configs always land in the same place.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(self).expect("config serializes"));
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(format!("run-{}", self.hash()))
    }
}

// ---------------------------------------------------------------------------
// Seeding and generation
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-instance seed derivation, fixed bit-exactly so independent
/// implementations agree:
///
/// ```text
/// s0   = splitmix64(base)
/// s1   = splitmix64(s0 ^ (n     * 0x9E3779B97F4A7C15))
/// s2   = splitmix64(s1 ^ (K     * 0xC2B2AE3D27D4EB4F))
/// seed = splitmix64(s2 ^ (index * 0x165667B19E3779F9))
/// ```
///
/// with wrapping multiplication and the SplitMix64 finalizer
/// (`z += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
/// z = (z ^ z>>27) * 0x94D049BB133111EB; z ^ z>>31`).
pub fn derive_instance_seed(base: u64, n: usize, k: usize, index: usize) -> u64 {
    let s0 = splitmix64(base);
    let s1 = splitmix64(s0 ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let s2 = splitmix64(s1 ^ (k as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
    splitmix64(s2 ^ (index as u64).wrapping_mul(0x1656_67B1_9E37_79F9))
}

/// A generated instance and how many tie-rejections it took.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub instance: GameInstance,
    pub seed: u64,
    pub regenerations: usize,
}

const MAX_REGENERATIONS: usize = 100;

/// Draws one instance from the configured ranges, deterministically from
/// `seed`. Draw order (all from one ChaCha8 stream seeded with `seed`):
/// `R_d`, `R_a`, `U_d^c` (K), `U_d^u` (K), `U_a^c` (n rows of K), `U_a^u`
/// (same), `P` (n-1 sorted spacings), `theta0` (one 64-bit draw mod n).
/// Uniform draws map `u in [0,1)` to `lo + u * (hi - lo)`.
///
/// Instances with an equilibrium-relevant near-tie (see
/// [`has_equilibrium_ties`]) are redrawn from the same stream, bounded by
/// 100 attempts; the classification experiments concern generic instances,
/// so ties are regenerated rather than classified, and the count is
/// published.
pub fn generate_instance(
    seed: u64,
    n: usize,
    k: usize,
    cfg: &ExperimentConfig,
) -> Result<GeneratedInstance, HarnessError> {
    assert!(n >= 1 && k >= 1, "counts must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut regenerations = 0usize;
    loop {
        let file = draw_instance_file(&mut rng, n, k, cfg);
        match validate_instance(&file) {
            Ok(instance) if !has_equilibrium_ties(&instance, 1e-9) => {
                return Ok(GeneratedInstance {
                    instance,
                    seed,
                    regenerations,
                });
            }
            // Validation can only fail on boundary draws (delta exactly 0),
            // which is itself a tie; redraw either way.
            _ => {
                regenerations += 1;
                if regenerations > MAX_REGENERATIONS {
                    return Err(HarnessError::RetryExhausted {
                        seed,
                        n,
                        k,
                        attempts: regenerations,
                    });
                }
            }
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    use rand::Rng;
    range.0 + rng.random::<f64>() * (range.1 - range.0)
}

fn draw_vec(rng: &mut ChaCha8Rng, len: usize, range: (f64, f64)) -> Vec<f64> {
    (0..len).map(|_| uniform(rng, range)).collect()
}

/// Uniform point on the simplex via sorted uniform spacings.
fn draw_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand::Rng;
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

fn draw_instance_file(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    cfg: &ExperimentConfig,
) -> InstanceFile {
    use rand::Rng;
    let defender_budget = uniform(rng, cfg.budget_range);
    let attacker_budget = uniform(rng, cfg.budget_range);
    let defender_covered = draw_vec(rng, k, cfg.defender_covered_range);
    let defender_uncovered = draw_vec(rng, k, cfg.defender_uncovered_range);
    let attacker_covered: Vec<Vec<f64>> = (0..n)
        .map(|_| draw_vec(rng, k, cfg.attacker_covered_range))
        .collect();
    let attacker_uncovered: Vec<Vec<f64>> = (0..n)
        .map(|_| draw_vec(rng, k, cfg.attacker_uncovered_range))
        .collect();
    let type_probabilities = draw_simplex(rng, n);
    let theta0 = (rng.random::<u64>() % n as u64) as usize;
    InstanceFile {
        num_targets: k,
        num_types: n,
        defender_budget,
        attacker_budget,
        theta0,
        type_probabilities,
        defender_covered,
        defender_uncovered,
        attacker_covered,
        attacker_uncovered,
    }
}

/// Detects near-ties (relative tolerance `tol`) in the quantities that
/// decide equilibrium supports: per type, the uncovered attack values, the
/// attack deltas, and the delta ratios; for the defender, covered payoffs
/// and deltas; plus vanishing type probabilities. Generic instances have
/// none of these; grid points landing on a tie would make the
/// classification depend on tolerance choices.
pub fn has_equilibrium_ties(inst: &GameInstance, tol: f64) -> bool {
    let near = |a: f64, b: f64| (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()));
    let any_pair_tied = |values: &[f64]| {
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if near(values[i], values[j]) {
                    return true;
                }
            }
        }
        false
    };
    let k = inst.num_targets();
    let n = inst.num_types();
    let r_d = inst.defender_budget();
    for j in 0..n {
        let uncovered: Vec<f64> = (0..k).map(|t| r_d * inst.attacker_uncovered(j, t)).collect();
        let deltas: Vec<f64> = (0..k).map(|t| inst.delta_attacker(j, t)).collect();
        let ratios: Vec<f64> = (0..k)
            .map(|t| inst.delta_attacker(j, t) / inst.delta_defender(t))
            .collect();
        if any_pair_tied(&uncovered) || any_pair_tied(&deltas) || any_pair_tied(&ratios) {
            return true;
        }
    }
    let covered: Vec<f64> = (0..k).map(|t| inst.defender_covered(t)).collect();
    let deltas: Vec<f64> = (0..k).map(|t| inst.delta_defender(t)).collect();
    if any_pair_tied(&covered) || any_pair_tied(&deltas) {
        return true;
    }
    n > 1 && inst.distribution().probabilities().iter().any(|&p| p < 1e-9)
}

/// Draws a sweep template: 3 types, unit budgets, all payoffs in
/// `[0, payoff_high]` with each covered/uncovered pair ordered by swapping,
/// so the covering assumptions hold with the figure's parameter ranges.
/// Draw order: per-target defender pairs, then per-type per-target attacker
/// pairs, then `theta0`; the distribution is a uniform placeholder that the
/// sweep replaces per grid point.
pub fn generate_fig2_template(
    seed: u64,
    num_targets: usize,
    payoff_high: f64,
) -> Result<GeneratedInstance, HarnessError> {
    use rand::Rng;
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut regenerations = 0usize;
    loop {
        let range = (0.0, payoff_high);
        let mut defender_covered = Vec::with_capacity(num_targets);
        let mut defender_uncovered = Vec::with_capacity(num_targets);
        for _ in 0..num_targets {
            let a = uniform(&mut rng, range);
            let b = uniform(&mut rng, range);
            defender_covered.push(a.max(b));
            defender_uncovered.push(a.min(b));
        }
        let mut attacker_covered = vec![Vec::with_capacity(num_targets); n];
        let mut attacker_uncovered = vec![Vec::with_capacity(num_targets); n];
        for j in 0..n {
            for _ in 0..num_targets {
                let a = uniform(&mut rng, range);
                let b = uniform(&mut rng, range);
                attacker_uncovered[j].push(a.max(b));
                attacker_covered[j].push(a.min(b));
            }
        }
        let theta0 = (rng.random::<u64>() % n as u64) as usize;
        let file = InstanceFile {
            num_targets,
            num_types: n,
            defender_budget: 1.0,
            attacker_budget: 1.0,
            theta0,
            type_probabilities: vec![1.0 / 3.0; 3],
            defender_covered,
            defender_uncovered,
            attacker_covered,
            attacker_uncovered,
        };
        match validate_instance(&file) {
            Ok(instance) if !has_equilibrium_ties(&instance, 1e-9) => {
                return Ok(GeneratedInstance {
                    instance,
                    seed,
                    regenerations,
                });
            }
            _ => {
                regenerations += 1;
                if regenerations > MAX_REGENERATIONS {
                    return Err(HarnessError::RetryExhausted {
                        seed,
                        n,
                        k: num_targets,
                        attempts: regenerations,
                    });
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Case-ratio experiment
// ---------------------------------------------------------------------------

/// Per-cell aggregate of the classification experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRecord {
    pub n: usize,
    pub k: usize,
    /// Among instances with nonempty SOL, the fraction whose BSSE strategy
    /// verified as stable (conditional; 1.0 when the denominator is 0).
    pub case1_ratio: f64,
    pub case1_num: usize,
    pub case1_den: usize,
    /// Among strategy-stable instances, the fraction with nonempty SOL.
    pub case2_ratio: f64,
    pub case2_num: usize,
    pub case2_den: usize,
    pub instances: usize,
    pub degenerate_regenerated: usize,
    pub failures: usize,
}

/// One classified instance of a cell.
#[derive(Debug, Clone)]
pub struct InstanceRow {
    pub n: usize,
    pub k: usize,
    pub index: usize,
    pub seed: u64,
    pub regenerations: usize,
    pub sol_nonempty: bool,
    pub pair_hbne: bool,
    pub strategy_hbne: bool,
    pub bsse_eu: f64,
}

/// In-memory results of the case-ratio experiment.
#[derive(Debug, Clone)]
pub struct Fig1Data {
    pub rows: Vec<InstanceRow>,
    pub ratios: Vec<RatioRecord>,
    pub instances_csv: String,
    pub ratios_csv: String,
    pub svg_by_targets: String,
    pub svg_by_types: String,
}

pub const FIG1_CSV_HEADER: &str =
    "n,K,instance,seed,sol_nonempty,pair_hbne,strategy_hbne,bsse_eu,regens";

/// Classifies `instances_per_cell` seeded instances for every
/// `(n, K)` cell and aggregates the two case ratios. Instances within a
/// cell run in parallel; results are aggregated in instance order, so the
/// output is independent of scheduling.
pub fn compute_fig1(
    cfg: &ExperimentConfig,
    opts: &SolveOptions,
) -> Result<Fig1Data, HarnessError> {
    cfg.validate()?;
    let mut rows: Vec<InstanceRow> = Vec::new();
    let mut ratios: Vec<RatioRecord> = Vec::new();

    for &n in &cfg.type_counts {
        for &k in &cfg.target_counts {
            let outcomes: Vec<(usize, u64, usize, Result<InstanceRow, String>)> =
                in_pool(cfg.threads, || {
                    (0..cfg.instances_per_cell)
                        .into_par_iter()
                        .map(|index| {
                            let seed = derive_instance_seed(cfg.seed, n, k, index);
                            let generated = match generate_instance(seed, n, k, cfg) {
                                Ok(g) => g,
                                Err(e) => return (index, seed, 0, Err(e.to_string())),
                            };
                            let regens = generated.regenerations;
                            match classify_stability(&generated.instance, opts) {
                                Ok(c) => (
                                    index,
                                    seed,
                                    regens,
                                    Ok(InstanceRow {
                                        n,
                                        k,
                                        index,
                                        seed,
                                        regenerations: regens,
                                        sol_nonempty: c.sol_nonempty,
                                        pair_hbne: c.pair_hbne,
                                        strategy_hbne: c.strategy_hbne,
                                        bsse_eu: c.bsse_eu,
                                    }),
                                ),
                                Err(e) => (index, seed, regens, Err(e.to_string())),
                            }
                        })
                        .collect()
                });

            let mut regens_total = 0usize;
            let mut failures = 0usize;
            let mut cell_rows: Vec<InstanceRow> = Vec::new();
            for (index, seed, regens, outcome) in outcomes {
                regens_total += regens;
                match outcome {
                    Ok(row) => cell_rows.push(row),
                    Err(message) => {
                        failures += 1;
                        eprintln!(
                            "cell (n={n}, K={k}) instance {index} (seed {seed}) failed: {message}"
                        );
                    }
                }
            }
            if cfg.instances_per_cell > 0
                && failures * 20 > cfg.instances_per_cell
            {
                return Err(HarnessError::CellFailures {
                    n,
                    k,
                    failures,
                    instances: cfg.instances_per_cell,
                });
            }

            let case1_den = cell_rows.iter().filter(|r| r.sol_nonempty).count();
            let case1_num = cell_rows
                .iter()
                .filter(|r| r.sol_nonempty && r.strategy_hbne)
                .count();
            let case2_den = cell_rows.iter().filter(|r| r.strategy_hbne).count();
            let case2_num = cell_rows
                .iter()
                .filter(|r| r.strategy_hbne && r.sol_nonempty)
                .count();
            let conditional = |num: usize, den: usize| {
                if den == 0 {
                    1.0
                } else {
                    num as f64 / den as f64
                }
            };
            ratios.push(RatioRecord {
                n,
                k,
                case1_ratio: conditional(case1_num, case1_den),
                case1_num,
                case1_den,
                case2_ratio: conditional(case2_num, case2_den),
                case2_num,
                case2_den,
                instances: cfg.instances_per_cell,
                degenerate_regenerated: regens_total,
                failures,
            });
            rows.extend(cell_rows);
        }
    }

    let instances_csv = render_instances_csv(&rows);
    let ratios_csv = render_ratios_csv(&ratios);
    let svg_by_targets = fig1_chart(cfg, &ratios, ChartAxis::Targets)?;
    let svg_by_types = fig1_chart(cfg, &ratios, ChartAxis::Types)?;
    Ok(Fig1Data {
        rows,
        ratios,
        instances_csv,
        ratios_csv,
        svg_by_targets,
        svg_by_types,
    })
}

fn render_instances_csv(rows: &[InstanceRow]) -> String {
    let mut out = String::from(FIG1_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.k,
            r.index,
            r.seed,
            r.sol_nonempty,
            r.pair_hbne,
            r.strategy_hbne,
            r.bsse_eu,
            r.regenerations
        ));
    }
    out
}

fn render_ratios_csv(ratios: &[RatioRecord]) -> String {
    let mut out = String::from(
        "n,K,case1_ratio,case1_num,case1_den,case2_ratio,case2_num,case2_den,instances,regens,failures\n",
    );
    for r in ratios {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.k,
            r.case1_ratio,
            r.case1_num,
            r.case1_den,
            r.case2_ratio,
            r.case2_num,
            r.case2_den,
            r.instances,
            r.degenerate_regenerated,
            r.failures
        ));
    }
    out
}

enum ChartAxis {
    /// Fix the largest configured type count, vary targets.
    Targets,
    /// Fix the largest configured target count, vary types.
    Types,
}

fn fig1_chart(
    cfg: &ExperimentConfig,
    ratios: &[RatioRecord],
    axis: ChartAxis,
) -> Result<String, SvgError> {
    let (fixed, title, x_label, categories): (usize, String, &str, Vec<usize>) = match axis {
        ChartAxis::Targets => {
            let n = *cfg.type_counts.iter().max().expect("nonempty");
            (
                n,
                format!("Case ratios (n = {n})"),
                "targets K",
                cfg.target_counts.clone(),
            )
        }
        ChartAxis::Types => {
            let k = *cfg.target_counts.iter().max().expect("nonempty");
            (
                k,
                format!("Case ratios (K = {k})"),
                "types n",
                cfg.type_counts.clone(),
            )
        }
    };
    let pick = |cat: usize| -> Option<&RatioRecord> {
        ratios.iter().find(|r| match axis {
            ChartAxis::Targets => r.n == fixed && r.k == cat,
            ChartAxis::Types => r.k == fixed && r.n == cat,
        })
    };
    let case1: Vec<f64> = categories
        .iter()
        .map(|&c| pick(c).map_or(0.0, |r| r.case1_ratio))
        .collect();
    let case2: Vec<f64> = categories
        .iter()
        .map(|&c| pick(c).map_or(0.0, |r| r.case2_ratio))
        .collect();
    bar_chart(
        &title,
        x_label,
        &categories.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        &[
            BarSeries {
                label: "Case 1".to_string(),
                values: case1,
            },
            BarSeries {
                label: "Case 2".to_string(),
                values: case2,
            },
        ],
    )
}

/// Files written by [`run_fig1`].
#[derive(Debug, Clone)]
pub struct Fig1Output {
    pub data: Fig1Data,
    pub run_dir: PathBuf,
    pub instances_csv_path: PathBuf,
    pub ratios_csv_path: PathBuf,
    pub svg_paths: Vec<PathBuf>,
}

/// Runs the case-ratio experiment and writes CSVs, SVGs, and run metadata
/// under a directory named by the config hash. All writes are
/// write-then-rename, so an interrupted run never leaves truncated files.
pub fn run_fig1(cfg: &ExperimentConfig, opts: &SolveOptions) -> Result<Fig1Output, HarnessError> {
    let data = compute_fig1(cfg, opts)?;
    let run_dir = cfg.run_dir();
    fs::create_dir_all(&run_dir)?;
    let instances_csv_path = run_dir.join("fig1_instances.csv");
    let ratios_csv_path = run_dir.join("fig1_ratios.csv");
    write_atomic(&instances_csv_path, &data.instances_csv)?;
    write_atomic(&ratios_csv_path, &data.ratios_csv)?;
    let svg_targets = run_dir.join("fig1_by_targets.svg");
    let svg_types = run_dir.join("fig1_by_types.svg");
    write_atomic(&svg_targets, &data.svg_by_targets)?;
    write_atomic(&svg_types, &data.svg_by_types)?;
    write_metadata(cfg, &run_dir)?;
    Ok(Fig1Output {
        data,
        run_dir,
        instances_csv_path,
        ratios_csv_path,
        svg_paths: vec![svg_targets, svg_types],
    })
}

// ---------------------------------------------------------------------------
// Simplex-sweep experiment
// ---------------------------------------------------------------------------

/// One sweep setting: the seeded template and its outputs.
#[derive(Debug, Clone)]
pub struct Fig2Setting {
    pub setting: usize,
    pub template_seed: u64,
    pub template_regenerations: usize,
    pub sweep: SweepResult,
    pub csv: String,
    pub svg: String,
}

#[derive(Debug, Clone)]
pub struct Fig2Data {
    pub settings: Vec<Fig2Setting>,
}

/// Sweeps the 3-type simplex for each configured template seed.
pub fn compute_fig2(
    cfg: &ExperimentConfig,
    opts: &SolveOptions,
) -> Result<Fig2Data, HarnessError> {
    cfg.validate()?;
    let mut settings = Vec::new();
    for (i, &seed) in cfg.fig2.template_seeds.iter().enumerate() {
        let template = generate_fig2_template(seed, cfg.fig2.num_targets, cfg.fig2.payoff_high)?;
        let sweep_opts = SweepOptions {
            solve: *opts,
            cross_check_stride: cfg.fig2.cross_check_stride,
        };
        let sweep = simplex_grid_sweep(&template.instance, cfg.fig2.grid_step, &sweep_opts)?;
        let csv = sweep.to_csv(cfg.fig2.num_targets);
        let cells: Vec<HeatCell> = sweep
            .records
            .iter()
            .filter_map(|rec| {
                rec.color_key.map(|key| HeatCell {
                    p1: rec.p[0],
                    p2: rec.p[1],
                    color_index: sweep
                        .color_order
                        .iter()
                        .position(|&k| k == key)
                        .expect("key registered during sweep"),
                })
            })
            .collect();
        let svg = triangle_heatmap(
            &format!("Robust strategies, setting {} (seed {seed})", i + 1),
            &cells,
            cfg.fig2.grid_step,
        )?;
        settings.push(Fig2Setting {
            setting: i + 1,
            template_seed: seed,
            template_regenerations: template.regenerations,
            sweep,
            csv,
            svg,
        });
    }
    Ok(Fig2Data { settings })
}

#[derive(Debug, Clone)]
pub struct Fig2Output {
    pub data: Fig2Data,
    pub run_dir: PathBuf,
    pub paths: Vec<PathBuf>,
}

/// Runs the sweep experiment and writes one CSV + SVG pair per setting.
pub fn run_fig2(cfg: &ExperimentConfig, opts: &SolveOptions) -> Result<Fig2Output, HarnessError> {
    let data = compute_fig2(cfg, opts)?;
    let run_dir = cfg.run_dir();
    fs::create_dir_all(&run_dir)?;
    let mut paths = Vec::new();
    for setting in &data.settings {
        let csv_path = run_dir.join(format!("fig2_setting{}.csv", setting.setting));
        let svg_path = run_dir.join(format!("fig2_setting{}.svg", setting.setting));
        write_atomic(&csv_path, &setting.csv)?;
        write_atomic(&svg_path, &setting.svg)?;
        paths.push(csv_path);
        paths.push(svg_path);
    }
    write_metadata(cfg, &run_dir)?;
    Ok(Fig2Output {
        data,
        run_dir,
        paths,
    })
}

// ---------------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------------

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Write-then-rename so interrupted runs never leave truncated files.
pub fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)
}

fn write_metadata(cfg: &ExperimentConfig, run_dir: &Path) -> io::Result<()> {
    let metadata = serde_json::json!({
        "config": cfg,
        "config_hash": cfg.hash(),
        "conventions": {
            "type_distribution": "uniform on the simplex via sorted uniform spacings",
            "instance_seed": "splitmix64 chain over (seed, n, K, index); see crate docs",
            "tie_policy": "near-ties regenerate (bounded), counts published in fig1_ratios.csv",
            "vacuous_ratio": "case ratios with denominator 0 are reported as 1.0",
        },
    });
    write_atomic(
        &run_dir.join("metadata.json"),
        &serde_json::to_string_pretty(&metadata).expect("metadata serializes"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            seed: 99,
            instances_per_cell: 4,
            type_counts: vec![1, 2],
            target_counts: vec![2],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn seed_derivation_is_stable() {
        let a = derive_instance_seed(2024, 3, 4, 17);
        let b = derive_instance_seed(2024, 3, 4, 17);
        assert_eq!(a, b);
        assert_ne!(derive_instance_seed(2024, 3, 4, 17), derive_instance_seed(2024, 3, 4, 18));
        assert_ne!(derive_instance_seed(2024, 3, 4, 17), derive_instance_seed(2024, 4, 3, 17));
        assert_ne!(derive_instance_seed(2024, 3, 4, 17), derive_instance_seed(2025, 3, 4, 17));
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        let cfg = ExperimentConfig::default();
        let a = generate_instance(42, 3, 2, &cfg).unwrap();
        let b = generate_instance(42, 3, 2, &cfg).unwrap();
        assert_eq!(a.instance, b.instance);
        assert_eq!(a.regenerations, b.regenerations);

        let inst = &a.instance;
        assert!(inst.defender_budget() >= 1.0 && inst.defender_budget() <= 5.0);
        assert!(inst.attacker_budget() >= 1.0 && inst.attacker_budget() <= 5.0);
        for t in 0..2 {
            assert!(inst.defender_covered(t) >= 5.0 && inst.defender_covered(t) <= 10.0);
            assert!(inst.defender_uncovered(t) >= 0.0 && inst.defender_uncovered(t) <= 5.0);
            for j in 0..3 {
                assert!(inst.attacker_covered(j, t) >= 0.0 && inst.attacker_covered(j, t) <= 5.0);
                assert!(
                    inst.attacker_uncovered(j, t) >= 5.0 && inst.attacker_uncovered(j, t) <= 10.0
                );
            }
        }
        let mass: f64 = inst.distribution().probabilities().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(inst.true_type_index() < 3);
    }

    #[test]
    fn generated_instances_validate() {
        let cfg = ExperimentConfig::default();
        for seed in 0..50 {
            let g = generate_instance(seed, 2, 3, &cfg).unwrap();
            // Round-trip through the file format re-validates.
            let file = g.instance.to_file();
            assert!(validate_instance(&file).is_ok());
        }
    }

    #[test]
    fn tie_detection_catches_duplicates() {
        let file = InstanceFile {
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
        };
        let inst = validate_instance(&file).unwrap();
        assert!(has_equilibrium_ties(&inst, 1e-9));
        let file = InstanceFile {
            defender_covered: vec![2.0, 1.0],
            defender_uncovered: vec![0.5, 0.0],
            attacker_covered: vec![vec![0.25, 1.0]],
            attacker_uncovered: vec![vec![3.0, 2.0]],
            ..file
        };
        let inst = validate_instance(&file).unwrap();
        assert!(!has_equilibrium_ties(&inst, 1e-9));
    }

    #[test]
    fn fig2_template_respects_ranges() {
        let g = generate_fig2_template(7, 3, 5.0).unwrap();
        let inst = &g.instance;
        assert_eq!(inst.num_types(), 3);
        assert_eq!(inst.defender_budget(), 1.0);
        assert_eq!(inst.attacker_budget(), 1.0);
        for t in 0..3 {
            assert!(inst.defender_covered(t) <= 5.0 && inst.defender_uncovered(t) >= 0.0);
            assert!(inst.delta_defender(t) > 0.0);
            for j in 0..3 {
                assert!(inst.attacker_uncovered(j, t) <= 5.0);
                assert!(inst.delta_attacker(j, t) > 0.0);
            }
        }
    }

    #[test]
    fn config_round_trip_and_hash() {
        let cfg = small_cfg();
        let parsed = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg.hash(), parsed.hash());
        let mut other = small_cfg();
        other.seed = 100;
        assert_ne!(cfg.hash(), other.hash());
        assert!(ExperimentConfig::from_json("{\"unknown_field\": 1}").is_err());
    }

    #[test]
    fn config_validation_rules() {
        let mut cfg = small_cfg();
        cfg.defender_covered_range = (0.0, 5.0); // overlaps uncovered range
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
        let mut cfg = small_cfg();
        cfg.fig2.grid_step = 0.3;
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
        let mut cfg = small_cfg();
        cfg.budget_range = (0.0, 5.0);
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
    }

    #[test]
    fn fig1_small_run_shapes() {
        let cfg = small_cfg();
        let opts = SolveOptions::default();
        let data = compute_fig1(&cfg, &opts).unwrap();
        assert_eq!(data.ratios.len(), 2);
        assert_eq!(data.rows.len(), 8);
        assert!(data.instances_csv.starts_with(FIG1_CSV_HEADER));
        assert_eq!(data.instances_csv.lines().count(), 9);
        // Single-type cells are one-point distributions: strategy stability
        // must hold throughout.
        for row in data.rows.iter().filter(|r| r.n == 1) {
            assert!(row.strategy_hbne);
            assert!(row.sol_nonempty);
        }
    }

    #[test]
    fn fig1_zero_instances_gives_header_only() {
        let mut cfg = small_cfg();
        cfg.instances_per_cell = 0;
        let data = compute_fig1(&cfg, &SolveOptions::default()).unwrap();
        assert_eq!(data.instances_csv, format!("{FIG1_CSV_HEADER}\n"));
        for ratio in &data.ratios {
            assert_eq!(ratio.case1_den, 0);
            assert_eq!(ratio.case1_ratio, 1.0);
        }
    }

    #[test]
    fn fig1_is_byte_reproducible() {
        let cfg = small_cfg();
        let opts = SolveOptions::default();
        let a = compute_fig1(&cfg, &opts).unwrap();
        let b = compute_fig1(&cfg, &opts).unwrap();
        assert_eq!(a.instances_csv, b.instances_csv);
        assert_eq!(a.ratios_csv, b.ratios_csv);
        assert_eq!(a.svg_by_targets, b.svg_by_targets);
        assert_eq!(a.svg_by_types, b.svg_by_types);
    }

    #[test]
    fn sampler_mean_sanity() {
        // Uniform draws should center on the range midpoint: |mean - mid|
        // within 3 standard errors over 1000 draws.
        let cfg = ExperimentConfig::default();
        let mut values = Vec::new();
        for seed in 0..250 {
            let g = generate_instance(seed, 1, 2, &cfg).unwrap();
            for t in 0..2 {
                values.push(g.instance.defender_covered(t));
            }
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        // Var of U[5,10] is 25/12.
        let se = (25.0 / 12.0_f64).sqrt() / n.sqrt();
        assert!(
            (mean - 7.5).abs() <= 3.0 * se,
            "mean {mean} out of range (se {se})"
        );
    }
}
