use mtdhg_core::harness::{derive_instance_seed, generate_instance, ExperimentConfig};
use mtdhg_core::model::TypeDistribution;
use mtdhg_core::robustness::RadiusOptions;
use mtdhg_core::{check_robust, robustness_radius, solve_hbne, SolveOptions};

fn main() {
    let opts = SolveOptions::default();
    let cfg = ExperimentConfig::default();
    let k = 2;
    let seed = derive_instance_seed(0xc8c, 3, k, 0);
    let inst = generate_instance(seed, 3, k, &cfg).unwrap().instance;
    let hbne = solve_hbne(&inst, &opts).unwrap();
    let x = &hbne.defender_strategy;
    let p_base = inst.distribution();
    println!("p_base = {:?}", p_base.probabilities());
    println!("x = {:?}", x.allocation());
    println!("y = {:?}", hbne.attacker_policy.rows());

    let radius_opts = RadiusOptions { direction_samples: 256, seed: 13, solve: opts, ..RadiusOptions::default() };
    let est = robustness_radius(&inst, x, p_base, &radius_opts).unwrap();
    println!("radius = {}, boundary_only = {}", est.radius, est.all_directions_hit_boundary);

    // Grid scan: find nearest non-robust point and print a few.
    let m = 100usize;
    let mut nearest: Option<(f64, [f64;3])> = None;
    let mut fail_count = 0;
    for i in 0..=m {
        for j in 0..=(m - i) {
            let p1 = i as f64 * 0.01;
            let p2 = j as f64 * 0.01;
            let dist = TypeDistribution::from_unnormalized(&[p1, p2, 1.0 - p1 - p2]);
            let rob = check_robust(&inst, x, &dist, &opts).unwrap().is_robust;
            if !rob {
                fail_count += 1;
                let d = p_base.l1_distance(&dist);
                if nearest.as_ref().map_or(true, |(cur, _)| d < *cur) {
                    nearest = Some((d, [dist.probabilities()[0], dist.probabilities()[1], dist.probabilities()[2]]));
                }
            }
        }
    }
    println!("non-robust grid points: {fail_count}, nearest = {:?}", nearest);
    if let Some((_, p)) = nearest {
        // walk the ray from p_base through that point
        let base = p_base.probabilities();
        let dir: Vec<f64> = p.iter().zip(base).map(|(a, b)| a - b).collect();
        let norm: f64 = dir.iter().map(|v| v.abs()).sum();
        let unit: Vec<f64> = dir.iter().map(|v| v / norm).collect();
        for step in [0.25, 0.5, 0.75, 1.0, 1.25] {
            let d = norm * step;
            let q: Vec<f64> = base.iter().zip(&unit).map(|(&b, &u)| b + d * u).collect();
            let dist = TypeDistribution::from_unnormalized(&q);
            let rob = check_robust(&inst, x, &dist, &opts).unwrap().is_robust;
            println!("along ray d = {d:.4}: robust = {rob} at {:?}", dist.probabilities());
        }
    }
}
