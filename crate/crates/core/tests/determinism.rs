//! Determinism checks: identical inputs must give bit-identical outputs,
//! from single solves up to whole experiment artifacts.

use mtdhg_core::harness::{
    compute_fig1, compute_fig2, derive_instance_seed, generate_instance, ExperimentConfig,
};
use mtdhg_core::{solve_bsse, solve_hbne, SolveOptions};

#[test]
fn solvers_repeat_bit_identically() {
    let cfg = ExperimentConfig::default();
    let opts = SolveOptions::default();
    for idx in 0..6 {
        let n = 1 + idx % 3;
        let k = 2 + idx % 2;
        let seed = derive_instance_seed(0xdede, n, k, idx);
        let inst = generate_instance(seed, n, k, &cfg).unwrap().instance;

        let a = solve_bsse(&inst, &opts).unwrap();
        let b = solve_bsse(&inst, &opts).unwrap();
        assert_eq!(a.defender_strategy.allocation(), b.defender_strategy.allocation());
        assert_eq!(a.attacker_policy.rows(), b.attacker_policy.rows());
        assert_eq!(
            a.defender_expected_utility.to_bits(),
            b.defender_expected_utility.to_bits()
        );
        assert_eq!(a.diagnostics.lp_calls, b.diagnostics.lp_calls);
        assert_eq!(a.diagnostics.nodes_pruned, b.diagnostics.nodes_pruned);

        let a = solve_hbne(&inst, &opts).unwrap();
        let b = solve_hbne(&inst, &opts).unwrap();
        assert_eq!(a.defender_strategy.allocation(), b.defender_strategy.allocation());
        assert_eq!(a.attacker_policy.rows(), b.attacker_policy.rows());
        assert_eq!(a.diagnostics.supports_examined, b.diagnostics.supports_examined);
    }
}

#[test]
fn fig1_artifacts_are_byte_identical_across_thread_counts() {
    let cfg1 = ExperimentConfig {
        seed: 51,
        instances_per_cell: 6,
        type_counts: vec![2],
        target_counts: vec![2, 3],
        threads: Some(1),
        ..ExperimentConfig::default()
    };
    let cfg2 = ExperimentConfig {
        threads: Some(2),
        ..cfg1.clone()
    };
    let opts = SolveOptions::default();
    let a = compute_fig1(&cfg1, &opts).unwrap();
    let b = compute_fig1(&cfg2, &opts).unwrap();
    // Scheduling must not leak into the artifacts.
    assert_eq!(a.instances_csv, b.instances_csv);
    assert_eq!(a.ratios_csv, b.ratios_csv);
    assert_eq!(a.svg_by_targets, b.svg_by_targets);
    assert_eq!(a.svg_by_types, b.svg_by_types);
}

#[test]
fn fig2_artifacts_are_byte_identical() {
    let cfg = ExperimentConfig {
        fig2: mtdhg_core::harness::Fig2Config {
            template_seeds: vec![31],
            grid_step: 0.25,
            ..Default::default()
        },
        ..ExperimentConfig::default()
    };
    let opts = SolveOptions::default();
    let a = compute_fig2(&cfg, &opts).unwrap();
    let b = compute_fig2(&cfg, &opts).unwrap();
    assert_eq!(a.settings.len(), 1);
    assert_eq!(a.settings[0].csv, b.settings[0].csv);
    assert_eq!(a.settings[0].svg, b.settings[0].svg);
}
