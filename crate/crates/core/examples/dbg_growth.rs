use polar_core::experiments::{experiment_growth, growth_defaults};

fn main() {
    for eps in [1e-4, 5e-5, 3e-5, 2e-5] {
        let mut cfg = growth_defaults();
        cfg.eps = eps;
        let report = experiment_growth(&cfg).unwrap();
        for c in &report.checks {
            println!(
                "eps={eps:.1e} {} value={:.4e} pass={} ({})",
                c.theorem, c.value, c.pass, c.note
            );
        }
        println!();
    }
}
