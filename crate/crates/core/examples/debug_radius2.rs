use mtdhg_core::harness::{derive_instance_seed, generate_instance, ExperimentConfig};
use mtdhg_core::robustness::RadiusOptions;
use mtdhg_core::model::TypeDistribution;
use mtdhg_core::{check_robust, robustness_radius, solve_hbne, SolveOptions};

fn main() {
    let opts = SolveOptions::default();
    let cfg = ExperimentConfig::default();
    for idx in 0..5 {
        let k = 2 + idx % 2;
        let seed = derive_instance_seed(0xc8c, 3, k, idx);
        let inst = generate_instance(seed, 3, k, &cfg).unwrap().instance;
        let hbne = solve_hbne(&inst, &opts).unwrap();
        let x = &hbne.defender_strategy;
        let p_base = inst.distribution();
        // grid scan
        let m = 100usize;
        let mut nearest: Option<f64> = None;
        for i in 0..=m {
            for j in 0..=(m - i) {
                let p1 = i as f64 * 0.01;
                let p2 = j as f64 * 0.01;
                let dist = TypeDistribution::from_unnormalized(&[p1, p2, 1.0 - p1 - p2]);
                if !check_robust(&inst, x, &dist, &opts).unwrap().is_robust {
                    let d = p_base.l1_distance(&dist);
                    if nearest.map_or(true, |cur| d < cur) { nearest = Some(d); }
                }
            }
        }
        for samples in [256usize, 1024] {
            let ropts = RadiusOptions { direction_samples: samples, seed: 13, solve: opts, ..RadiusOptions::default() };
            let est = robustness_radius(&inst, x, p_base, &ropts).unwrap();
            println!("idx {idx} K={k}: samples {samples}: radius {:.4} scan {:?} gap {:+.4}",
                est.radius, nearest, nearest.map(|d| est.radius - d).unwrap_or(f64::NAN));
        }
    }
}
