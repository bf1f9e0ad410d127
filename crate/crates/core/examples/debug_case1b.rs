use mtdhg_core::harness::{derive_instance_seed, generate_instance, ExperimentConfig};
use mtdhg_core::model::DefenderStrategy;
use mtdhg_core::{solve_bsse, SolveOptions};

fn main() {
    let cfg = ExperimentConfig { seed: 20240811, ..ExperimentConfig::default() };
    let opts = SolveOptions::default();
    let seed = derive_instance_seed(cfg.seed, 2, 2, 3);
    let inst = generate_instance(seed, 2, 2, &cfg).unwrap().instance;
    let bsse = solve_bsse(&inst, &opts).unwrap();
    println!("solver x_B = {:?} eu {}", bsse.defender_strategy.allocation(), bsse.defender_expected_utility);

    // Fine grid with exact-tie optimistic replies (independent of the LP).
    let r_d = inst.defender_budget();
    let r_a = inst.attacker_budget();
    let p = inst.distribution().probabilities();
    let div = 400_000usize;
    let mut best = f64::NEG_INFINITY;
    let mut best_x = 0.0;
    for i in 0..=div {
        let x0 = i as f64 * r_d / div as f64;
        let x = DefenderStrategy::new(vec![x0, (r_d - x0).max(0.0)], r_d).unwrap();
        let mut total = 0.0;
        for j in 0..2 {
            let av = inst.attack_values(&x, j);
            let top = av.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let cut = top - 1e-9 * (1.0 + top.abs());
            let gain = av.iter().enumerate().filter(|(_, &v)| v >= cut)
                .map(|(t, _)| x.allocation()[t] * inst.delta_defender(t) + r_d * inst.defender_uncovered(t))
                .fold(f64::NEG_INFINITY, f64::max);
            total += p[j] * r_a * gain;
        }
        if total > best { best = total; best_x = x0; }
    }
    println!("grid best eu {} at x0 = {}", best, best_x);
}
