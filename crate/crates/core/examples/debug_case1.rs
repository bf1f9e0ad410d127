use mtdhg_core::harness::{derive_instance_seed, generate_instance, ExperimentConfig};
use mtdhg_core::stability::classify_stability;
use mtdhg_core::model::TypeDistribution;
use mtdhg_core::{check_robust, check_sol, solve_bsse, solve_hbne, verify_equilibrium, SolveOptions};

fn main() {
    let cfg = ExperimentConfig { seed: 20240811, ..ExperimentConfig::default() };
    let opts = SolveOptions::default();
    let (n, k) = (2usize, 2usize);
    for idx in 0..100 {
        let seed = derive_instance_seed(cfg.seed, n, k, idx);
        let inst = generate_instance(seed, n, k, &cfg).unwrap().instance;
        let class = classify_stability(&inst, &opts).unwrap();
        if class.sol_nonempty && !class.strategy_hbne {
            println!("=== violating idx {idx} seed {seed}");
            println!("P = {:?}", inst.distribution().probabilities());
            println!("R_d = {}, R_a = {}", inst.defender_budget(), inst.attacker_budget());
            let bsse = &class.bsse;
            println!("x_B = {:?}", bsse.defender_strategy.allocation());
            println!("y_B = {:?}", bsse.attacker_policy.rows());
            println!("supp x_B = {:?}", bsse.defender_support);
            println!("lambda = {:?}", class.sol.witness_lambda);
            for j in 0..n {
                let av = inst.attack_values(&bsse.defender_strategy, j);
                println!("type {j}: attack values {:?}, BR = {:?}", av,
                    inst.best_response_set(&bsse.defender_strategy, j, 1e-9));
            }
            let (d, c0) = inst.defender_coefficients(&bsse.attacker_policy, inst.distribution());
            println!("d(y_B) = {:?}, c0 = {c0}", d);
            for t in 0..k {
                println!("DeltaU_d({t}) = {}", inst.delta_defender(t));
            }
            // What does the real HBNE look like?
            let hbne = solve_hbne(&inst, &opts).unwrap();
            println!("HBNE x = {:?}", hbne.defender_strategy.allocation());
            println!("HBNE y = {:?}", hbne.attacker_policy.rows());
            println!("HBNE eu = {}, BSSE eu = {}", hbne.defender_expected_utility, bsse.defender_expected_utility);
            // Witness-pair reading: is (x_B, y') an HBNE?
            if let Some(w) = &class.sol.witness_y_prime {
                let rep = verify_equilibrium(&inst, &bsse.defender_strategy, w, inst.distribution(), 1e-6);
                println!("witness-pair reading: attacker regrets {:?} defender regret {}", rep.attacker_regret, rep.defender_regret);
            }
            // check_robust at one-point on each type for diagnosis
            for j in 0..n {
                let p = TypeDistribution::one_point(n, j);
                let r = check_robust(&inst, &bsse.defender_strategy, &p, &opts).unwrap();
                println!("robust at one-point {j}: {}", r.is_robust);
            }
            let _ = check_sol(&inst, &bsse.attacker_policy, &opts);
            let _ = solve_bsse(&inst, &opts);
            break;
        }
    }
}
