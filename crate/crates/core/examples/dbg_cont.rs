use polar_core::experiments::config::ExperimentConfig;
use polar_core::experiments::experiment_continuity;
use polar_core::initdata::Scenario;

fn main() {
    let mut cfg = ExperimentConfig::default_for(Scenario::Continuity);
    cfg.t_end = 120.0 * cfg.dt;
    let report = experiment_continuity(&cfg).unwrap();
    for c in &report.checks {
        println!(
            "{} eta={:.4} eps={:.1e} t_bar={:.5e} (steps {:.1}) value={:.4e} pass={}",
            c.theorem, c.eta, c.eps, c.t_bar, c.t_bar / cfg.dt, c.value, c.pass
        );
    }
}
