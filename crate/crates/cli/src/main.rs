//! `mtdhg` — generate, solve, check, and run experiments on
//! moving-target-defense hypergame instances.
//!
//! Exit codes: 0 on success, 1 on domain errors (invalid instances,
//! infeasible checks, solver failures), 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use mtdhg_core::harness::{self, ExperimentConfig};
use mtdhg_core::model::{validate_instance, DefenderStrategy, GameInstance, InstanceFile};
use mtdhg_core::robustness::RadiusOptions;
use mtdhg_core::stability::{self, StabilityError};
use mtdhg_core::{
    check_bernoulli_rank, check_robust, check_sol_uniform, robustness_radius, solve_bsse,
    solve_hbne, NumericsConfig, SolveOptions, TypeDistribution,
};

#[derive(Parser)]
#[command(
    name = "mtdhg",
    version,
    about = "Solvers and experiments for moving-target-defense games with incomplete information and asymmetric cognition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for experiment parallelism (defaults to machine
    /// parallelism).
    #[arg(long, global = true, env = "MTDHG_THREADS")]
    threads: Option<usize>,

    /// Feasibility tolerance of the LP kernel.
    #[arg(long, global = true)]
    feas_tol: Option<f64>,

    /// Pivot tolerance of the LP kernel.
    #[arg(long, global = true)]
    pivot_tol: Option<f64>,

    /// Relative tie tolerance for best-response sets.
    #[arg(long, global = true)]
    tie_tol: Option<f64>,

    /// Emit machine-readable JSON instead of the human summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded random instance and write it to a file.
    Generate(GenerateArgs),
    /// Compute an equilibrium of an instance.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Run stability or robustness checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Estimate the robustness radius of a defender strategy.
    Radius(RadiusArgs),
    /// Batch experiments with CSV/SVG outputs.
    #[command(subcommand)]
    Exp(ExpCommand),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of attacker types.
    #[arg(long)]
    types: usize,
    /// Number of targets.
    #[arg(long)]
    targets: usize,
    #[arg(long)]
    seed: u64,
    /// Output path for the instance JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Leader-commitment equilibrium (attacker best-responds, ties favor
    /// the defender).
    Bsse(InstanceArg),
    /// Simultaneous equilibrium of the hypergame (support enumeration).
    Hbne(InstanceArg),
}

#[derive(Args)]
struct InstanceArg {
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Full stability classification: equilibrium solve, linear-system
    /// test, and both stability readings.
    Stability(StabilityArgs),
    /// Robust-strategy feasibility under a perturbed type distribution.
    Robust(RobustArgs),
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Use the single-probability-factor variant of the Bernoulli rank
    /// matrix (the default carries the factor twice; both agree).
    #[arg(long)]
    bernoulli_single_factor: bool,
}

#[derive(Args)]
struct RobustArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Defender strategy file: a JSON array, or any object with an "x" key.
    #[arg(long)]
    x_file: PathBuf,
    /// Perturbed distribution as comma-separated probabilities.
    #[arg(long)]
    p_prime: String,
}

#[derive(Args)]
struct RadiusArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    x_file: PathBuf,
    /// Random directions sampled in addition to the vertex directions.
    #[arg(long, default_value_t = 64)]
    directions: usize,
    #[arg(long, default_value_t = 1e-4)]
    bisect_tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    scan_step: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand)]
enum ExpCommand {
    /// Per-cell stability classification over a grid of type/target counts.
    Fig1(ConfigArg),
    /// Simplex sweeps over the 3-type distribution triangle.
    Fig2(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            if json {
                let payload = json!({ "error": { "kind": err.kind, "message": err.message } });
                println!("{}", serde_json::to_string_pretty(&payload).expect("serializes"));
            } else {
                eprintln!("error ({}): {}", err.kind, err.message);
            }
            ExitCode::from(1)
        }
    }
}

struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }
}

macro_rules! domain_error {
    ($kind:expr) => {
        |e| CliError::new($kind, e.to_string())
    };
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let mut numerics = NumericsConfig::default();
    if let Some(t) = cli.feas_tol {
        numerics.feas_tol = t;
    }
    if let Some(t) = cli.pivot_tol {
        numerics.pivot_tol = t;
    }
    let mut opts = SolveOptions {
        numerics,
        ..SolveOptions::default()
    };
    if let Some(t) = cli.tie_tol {
        opts.tie_tol = t;
    }

    match cli.command {
        Command::Generate(args) => generate(args, cli.json),
        Command::Solve(which) => solve(which, &opts, cli.json),
        Command::Check(which) => check(which, &opts, cli.json),
        Command::Radius(args) => radius(args, &opts, cli.json),
        Command::Exp(which) => experiment(which, &opts, cli.threads, cli.json),
    }
}

fn load_instance(path: &Path) -> Result<GameInstance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    let file = InstanceFile::from_json(&text)
        .map_err(|e| CliError::new("parse", format!("{}: {e}", path.display())))?;
    validate_instance(&file).map_err(domain_error!("validation"))
}

fn load_strategy(path: &Path, budget: f64) -> Result<DefenderStrategy, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::new("parse", format!("{}: {e}", path.display())))?;
    let array = match &value {
        serde_json::Value::Array(_) => &value,
        serde_json::Value::Object(map) => map
            .get("x")
            .ok_or_else(|| CliError::new("parse", "strategy file has no \"x\" key"))?,
        _ => return Err(CliError::new("parse", "strategy file must be an array or object")),
    };
    let allocation: Vec<f64> = serde_json::from_value(array.clone())
        .map_err(|e| CliError::new("parse", format!("strategy vector: {e}")))?;
    DefenderStrategy::new(allocation, budget).map_err(domain_error!("validation"))
}

fn parse_distribution(text: &str, num_types: usize) -> Result<TypeDistribution, CliError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let probabilities =
        parts.map_err(|e| CliError::new("parse", format!("p-prime: {e}")))?;
    if probabilities.len() != num_types {
        return Err(CliError::new(
            "validation",
            format!(
                "p-prime has {} entries, instance has {num_types} types",
                probabilities.len()
            ),
        ));
    }
    TypeDistribution::new(probabilities).map_err(domain_error!("validation"))
}

fn generate(args: GenerateArgs, json: bool) -> Result<ExitCode, CliError> {
    if args.types == 0 || args.targets == 0 {
        return Err(CliError::new("validation", "types and targets must be >= 1"));
    }
    let cfg = ExperimentConfig::default();
    let generated = harness::generate_instance(args.seed, args.types, args.targets, &cfg)
        .map_err(domain_error!("generation"))?;
    let text = generated.instance.to_file().to_json();
    harness::write_atomic(&args.out, &text)
        .map_err(|e| CliError::new("io", format!("{}: {e}", args.out.display())))?;
    if json {
        let payload = json!({
            "path": args.out,
            "n": args.types,
            "K": args.targets,
            "seed": args.seed,
            "regenerations": generated.regenerations,
        });
        println!("{}", serde_json::to_string_pretty(&payload).expect("serializes"));
    } else {
        println!(
            "wrote instance (n={}, K={}, seed={}) to {} after {} tie-regenerations",
            args.types,
            args.targets,
            args.seed,
            args.out.display(),
            generated.regenerations
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn solve(which: SolveCommand, opts: &SolveOptions, json: bool) -> Result<ExitCode, CliError> {
    let (label, instance_path, result) = match which {
        SolveCommand::Bsse(args) => {
            let inst = load_instance(&args.instance)?;
            let result = solve_bsse(&inst, opts).map_err(domain_error!("solver"))?;
            ("BSSE", args.instance, result)
        }
        SolveCommand::Hbne(args) => {
            let inst = load_instance(&args.instance)?;
            let result = solve_hbne(&inst, opts).map_err(domain_error!("solver"))?;
            ("HBNE", args.instance, result)
        }
    };
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&result.to_json()).expect("serializes")
        );
    } else {
        println!("{label} of {}", instance_path.display());
        println!("  EU_d = {}", result.defender_expected_utility);
        println!("  x = {:?}", result.defender_strategy.allocation());
        for (j, row) in result.attacker_policy.rows().iter().enumerate() {
            println!("  y(theta_{j}) = {row:?}");
        }
        println!(
            "  supports: defender {:?}, attacker {:?}",
            result.defender_support, result.attacker_supports
        );
        println!(
            "  diagnostics: {} LP calls, {} pruned, {} supports examined, {:.3}s",
            result.diagnostics.lp_calls,
            result.diagnostics.nodes_pruned,
            result.diagnostics.supports_examined,
            result.diagnostics.wall_time_s
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn check(which: CheckCommand, opts: &SolveOptions, json: bool) -> Result<ExitCode, CliError> {
    match which {
        CheckCommand::Stability(args) => check_stability(args, opts, json),
        CheckCommand::Robust(args) => check_robustness(args, opts, json),
    }
}

fn check_stability(
    args: StabilityArgs,
    opts: &SolveOptions,
    json: bool,
) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    let class = stability::classify_stability(&inst, opts).map_err(domain_error!("stability"))?;

    // Specializations where the distribution shape admits them.
    let uniform = if inst.distribution().is_uniform(1e-9) && inst.num_types() > 1 {
        Some(
            check_sol_uniform(&inst, &class.bsse.attacker_policy, opts)
                .map_err(domain_error!("stability"))?,
        )
    } else {
        None
    };
    let bernoulli = match check_bernoulli_rank(
        &inst,
        &class.bsse.attacker_policy,
        args.bernoulli_single_factor,
    ) {
        Ok(report) => Some(report),
        Err(StabilityError::PreconditionViolated(_)) => None,
        Err(e) => return Err(CliError::new("stability", e.to_string())),
    };

    if json {
        let payload = json!({
            "bsse": class.bsse.to_json(),
            "sol": class.sol.to_json(),
            "sol_nonempty": class.sol_nonempty,
            "pair_hbne": class.pair_hbne,
            "strategy_hbne": class.strategy_hbne,
            "uniform": uniform.as_ref().map(|r| r.to_json()),
            "bernoulli": bernoulli.as_ref().map(|r| r.to_json()),
        });
        println!("{}", serde_json::to_string_pretty(&payload).expect("serializes"));
    } else {
        println!("stability of {}", args.instance.display());
        println!(
            "  BSSE: EU_d = {}, x = {:?}",
            class.bsse.defender_expected_utility,
            class.bsse.defender_strategy.allocation()
        );
        match class.sol.witness_lambda {
            Some(lambda) => println!("  SOL(y_BSSE): nonempty, multiplier {lambda}"),
            None => println!("  SOL(y_BSSE): empty"),
        }
        println!(
            "  stable as exact pair: {}; stable as defender strategy: {}",
            class.pair_hbne, class.strategy_hbne
        );
        if let Some(report) = &uniform {
            println!(
                "  uniform specialization agrees: {}",
                report.sol_nonempty == Some(class.sol_nonempty)
            );
        }
        if let Some(report) = &bernoulli {
            println!(
                "  Bernoulli rank: {} (threshold {}), sufficient condition fires: {}",
                report.matrix_rank.unwrap_or(0),
                report.rank_threshold.unwrap_or(0),
                report.sufficient_condition_holds.unwrap_or(false)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn check_robustness(
    args: RobustArgs,
    opts: &SolveOptions,
    json: bool,
) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    let x = load_strategy(&args.x_file, inst.defender_budget())?;
    let p_prime = parse_distribution(&args.p_prime, inst.num_types())?;
    let report = check_robust(&inst, &x, &p_prime, opts).map_err(domain_error!("robustness"))?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report.to_json()).expect("serializes")
        );
    } else {
        println!(
            "robust: {} (perturbation L1 = {})",
            report.is_robust, report.perturbation_l1
        );
        if !report.tied_best_response_types.is_empty() {
            println!(
                "  tied best responses for types {:?} at tie tolerance {}",
                report.tied_best_response_types, report.tie_tolerance
            );
        }
    }
    // A negative verdict is a domain outcome, not a usage problem.
    Ok(if report.is_robust {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn radius(args: RadiusArgs, opts: &SolveOptions, json: bool) -> Result<ExitCode, CliError> {
    let inst = load_instance(&args.instance)?;
    let x = load_strategy(&args.x_file, inst.defender_budget())?;
    let radius_opts = RadiusOptions {
        direction_samples: args.directions,
        bisection_tolerance: args.bisect_tol,
        scan_step: args.scan_step,
        seed: args.seed,
        solve: *opts,
    };
    let estimate = robustness_radius(&inst, &x, inst.distribution(), &radius_opts)
        .map_err(domain_error!("robustness"))?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&estimate.to_json()).expect("serializes")
        );
    } else {
        println!(
            "robustness radius >= {} (L1), {} directions, bisection tolerance {}",
            estimate.radius, estimate.direction_samples, estimate.bisection_tolerance
        );
        if estimate.all_directions_hit_boundary {
            println!("  no failures found: every direction reached the simplex boundary");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn experiment(
    which: ExpCommand,
    opts: &SolveOptions,
    threads: Option<usize>,
    json: bool,
) -> Result<ExitCode, CliError> {
    let load_config = |path: &Path| -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
        let mut cfg =
            ExperimentConfig::from_json(&text).map_err(domain_error!("config"))?;
        // Flags take precedence over the config file.
        if threads.is_some() {
            cfg.threads = threads;
        }
        Ok(cfg)
    };
    match which {
        ExpCommand::Fig1(args) => {
            let cfg = load_config(&args.config)?;
            let output = harness::run_fig1(&cfg, opts).map_err(domain_error!("experiment"))?;
            if json {
                let payload = json!({
                    "run_dir": output.run_dir,
                    "ratios": output.data.ratios,
                });
                println!("{}", serde_json::to_string_pretty(&payload).expect("serializes"));
            } else {
                for r in &output.data.ratios {
                    println!(
                        "cell n={} K={}: case1 {:.3} [{}/{}], case2 {:.3} [{}/{}], regens {}, failures {}",
                        r.n,
                        r.k,
                        r.case1_ratio,
                        r.case1_num,
                        r.case1_den,
                        r.case2_ratio,
                        r.case2_num,
                        r.case2_den,
                        r.degenerate_regenerated,
                        r.failures
                    );
                }
                println!("outputs in {}", output.run_dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        ExpCommand::Fig2(args) => {
            let cfg = load_config(&args.config)?;
            let output = harness::run_fig2(&cfg, opts).map_err(domain_error!("experiment"))?;
            if json {
                let settings: Vec<_> = output
                    .data
                    .settings
                    .iter()
                    .map(|s| {
                        json!({
                            "setting": s.setting,
                            "template_seed": s.template_seed,
                            "locally_robust_fraction": s.sweep.locally_robust_fraction,
                            "solved": s.sweep.solved,
                            "failed": s.sweep.failed,
                            "cross_checked": s.sweep.cross_checked,
                            "cross_check_agreed": s.sweep.cross_check_agreed,
                        })
                    })
                    .collect();
                let payload = json!({ "run_dir": output.run_dir, "settings": settings });
                println!("{}", serde_json::to_string_pretty(&payload).expect("serializes"));
            } else {
                for s in &output.data.settings {
                    println!(
                        "setting {} (seed {}): locally-robust fraction {:.3} over {} points ({} failed), cross-check {}/{}",
                        s.setting,
                        s.template_seed,
                        s.sweep.locally_robust_fraction,
                        s.sweep.solved,
                        s.sweep.failed,
                        s.sweep.cross_check_agreed,
                        s.sweep.cross_checked
                    );
                }
                println!("outputs in {}", output.run_dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
