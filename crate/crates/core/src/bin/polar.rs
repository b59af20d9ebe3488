//! Command-line harness for the torus obstacle-problem experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polar_core::experiments::config::{parse_config, ExperimentConfig};
use polar_core::experiments::{
    self, run_scenario, selftest, variational_summary, ExperimentReport,
};
use polar_core::initdata::{preset_scenario, Scenario};
use polar_core::variational::{classify, default_classify_tol};

#[derive(Parser)]
#[command(name = "polar", about = "Mass-conserving obstacle problem on the flat torus", version)]
struct Cli {
    /// Structured text config (key = value under [grid]/[solver]/[experiment]/[io]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Scenario name: continuity | jump | nongeneric | classical.
    #[arg(long, global = true)]
    scenario: Option<String>,

    /// Grid cells per side.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Comma-separated ε sweep, e.g. `1e-2,1e-3,1e-4`.
    #[arg(long, global = true)]
    eps: Option<String>,

    /// Output directory.
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,

    /// RNG seed (selftest and report determinism).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory of the configured scenario and dump CSV + fields.
    Run,
    /// Print the variational summary (λ₀, Λ[u₀], regime) of a scenario.
    Lambda,
    /// Theorem 3.1 experiment: continuity of λ and of the support at t = 0.
    Continuity,
    /// Theorem 4.3 experiment: the initial jump onto the maximizer set.
    Jump,
    /// Corollary 3.9 experiment: support growth bound.
    Growth,
    /// Theorems 5.1/5.2 for the classical obstacle problem.
    Classical,
    /// Run the deterministic property battery of every module.
    Selftest,
}

fn load_config(cli: &Cli, fallback: Scenario) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::default_for(fallback),
    };
    if let Some(name) = &cli.scenario {
        cfg.scenario = Scenario::parse(name).map_err(|e| e.to_string())?;
    }
    if let Some(n) = cli.n {
        cfg.n = n;
        let h = 1.0 / n as f64;
        cfg.dt = 0.25 * h * h;
    }
    if let Some(list) = &cli.eps {
        let parsed: Result<Vec<f64>, _> = list.split(',').map(|s| s.trim().parse()).collect();
        cfg.eps_list = parsed.map_err(|_| format!("cannot parse --eps `{list}`"))?;
        if let Some(&last) = cfg.eps_list.last() {
            cfg.eps = last;
        }
    }
    if let Some(dir) = &cli.outdir {
        cfg.outdir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn finish_report(report: &ExperimentReport, cfg: &ExperimentConfig) -> ExitCode {
    let dir = cfg.outdir.join(&report.name);
    if let Err(e) = report.write_all(&dir) {
        eprintln!("error writing report: {e}");
        return ExitCode::from(1);
    }
    let mut text = Vec::new();
    report.write_text(&mut text).ok();
    print!("{}", String::from_utf8_lossy(&text));
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        for row in report.failures() {
            eprintln!("failed check: {} ({})", row.theorem, row.note);
        }
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fallback = match cli.command {
        Command::Jump => Scenario::Jump,
        Command::Classical => Scenario::Classical,
        _ => Scenario::Continuity,
    };
    let cfg = match &cli.command {
        Command::Growth if cli.config.is_none() => {
            let mut cfg = experiments::growth_defaults();
            if let Some(dir) = &cli.outdir {
                cfg.outdir = dir.clone();
            }
            if let Some(n) = cli.n {
                cfg.n = n;
                let h = 1.0 / n as f64;
                cfg.dt = 0.25 * h * h;
                cfg.t_end = 1050.0 * cfg.dt;
            }
            cfg
        }
        _ => match load_config(&cli, fallback) {
            Ok(cfg) => cfg,
            Err(message) => {
                eprintln!("config error: {message}");
                return ExitCode::from(2);
            }
        },
    };

    let outcome = match cli.command {
        Command::Run => {
            let dir = cfg.outdir.join(cfg.scenario.name());
            match run_scenario(&cfg, &dir) {
                Ok(traj) => {
                    println!(
                        "wrote {} records to {}",
                        traj.len(),
                        dir.join("trajectory.csv").display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("run failed: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Lambda => match cfg.grid().and_then(|grid| {
            let (g, data) = preset_scenario(cfg.scenario, grid)?;
            let summary = variational_summary(&g, &data)?;
            let regime = classify(&g, &data, default_classify_tol(&g));
            Ok((summary, regime))
        }) {
            Ok((summary, _)) => {
                println!(
                    "lambda0 = {:.9}\nLambda  = {:.9}\nregime  = {}\ntheta   = {:.9}\nviolationArea = {:.9}\nplateauArea   = {:.9}",
                    summary.lambda0,
                    summary.capital_lambda,
                    summary.regime,
                    summary.theta,
                    summary.violation_area,
                    summary.plateau_area
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("lambda failed: {e}");
                ExitCode::from(1)
            }
        },
        Command::Continuity => match experiments::experiment_continuity(&cfg) {
            Ok(report) => finish_report(&report, &cfg),
            Err(e) => {
                eprintln!("continuity experiment failed: {e}");
                ExitCode::from(1)
            }
        },
        Command::Jump => match experiments::experiment_jump(&cfg) {
            Ok(report) => finish_report(&report, &cfg),
            Err(e) => {
                eprintln!("jump experiment failed: {e}");
                ExitCode::from(1)
            }
        },
        Command::Growth => match experiments::experiment_growth(&cfg) {
            Ok(report) => finish_report(&report, &cfg),
            Err(e) => {
                eprintln!("growth experiment failed: {e}");
                ExitCode::from(1)
            }
        },
        Command::Classical => match experiments::experiment_classical(&cfg) {
            Ok(report) => finish_report(&report, &cfg),
            Err(e) => {
                eprintln!("classical experiment failed: {e}");
                ExitCode::from(1)
            }
        },
        Command::Selftest => match selftest::run_selftest(cfg.seed.max(7)) {
            Ok(0) => ExitCode::SUCCESS,
            Ok(k) => {
                eprintln!("{k} selftest item(s) failed");
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("selftest errored: {e}");
                ExitCode::from(1)
            }
        },
    };
    outcome
}
