//! Solver library for moving-target-defense games with incomplete
//! information (Bayesian Stackelberg) and asymmetric cognition (hypergame).
//!
//! The crate is organized around the pipeline the experiments run:
//!
//! * [`model`] — game data, validation, utility evaluation;
//! * [`numerics`] — dense simplex LP / feasibility / rank kernel;
//! * [`equilibria`] — BSSE and HBNE solvers plus an independent verifier;
//! * [`stability`] — the linear-system stability test and its special cases;
//! * [`robustness`] — robust-strategy tests under perturbed type
//!   distributions, radius estimation, and the simplex sweep;
//! * [`harness`] — seeded instance generation and the batch experiments.

pub mod equilibria;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod robustness;
pub mod stability;

pub use equilibria::{
    solve_bsse, solve_hbne, verify_equilibrium, EquilibriumResult, SolveOptions, SolverError,
    VerificationReport,
};
pub use model::{
    validate_instance, AttackerPolicy, DefenderStrategy, GameInstance, InstanceFile,
    TypeDistribution, ValidationError,
};
pub use numerics::{
    matrix_rank, solve_feasibility, solve_lp, LinearProgram, LpOutcome, LpStatus, NumericsConfig,
    NumericsError,
};
pub use robustness::{
    check_robust, robustness_radius, simplex_grid_sweep, RadiusEstimate, RadiusOptions,
    RobustnessError, RobustnessReport, SweepOptions, SweepResult,
};
pub use stability::{
    build_sol_system, check_bernoulli_rank, check_sol, check_sol_uniform, classify_stability,
    ClassificationRecord, SolSystem, StabilityError, StabilityReport,
};
