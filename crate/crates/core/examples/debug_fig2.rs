use mtdhg_core::harness::generate_fig2_template;
use mtdhg_core::robustness::{simplex_grid_sweep, SweepOptions};

fn main() {
    for seed in [101u64, 202, 7, 11, 23, 42, 77, 99, 123, 211, 303, 404] {
        let template = generate_fig2_template(seed, 3, 5.0).unwrap();
        let sweep = simplex_grid_sweep(&template.instance, 0.05, &SweepOptions::default()).unwrap();
        println!(
            "seed {seed}: fraction {:.3}, colors {}, failed {}, cross {}/{}",
            sweep.locally_robust_fraction,
            sweep.color_order.len(),
            sweep.failed,
            sweep.cross_check_agreed,
            sweep.cross_checked
        );
    }
}
