//! The four theorem-level experiments.
//!
//! Each experiment measures rather than predicts: `t_bar` is always the
//! last recorded time before the first violated check. The early collar
//! window `t < 10·dt` is excluded from jump-limit assertions because the
//! O(ε) collar contaminates threshold supports near t = 0; the same
//! reasoning gives the support sandwich of the jump experiment a measured
//! onset time (the threshold L₀ε is only crossed once the freshly activated
//! region has grown past it, which takes O(ε) time).

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{
    dilate, distance_to, erode, write_field, MaskSet, ScalarField,
};
use crate::initdata::{
    build_jump_sequence, build_regularized_initial, preset_scenario, JumpSequenceParams,
    Scenario,
};
use crate::solver::{
    multiplier, run_approx_sequence, run_classical, run_regularized, step_regularized,
    support_of, ClassicalSource, Scheme, SolverParams, Trajectory,
};
use crate::variational::{
    capital_lambda, classify, default_classify_tol, maximizer_set, plateau_area, Coefficient,
    InitialData, Regime,
};

use super::config::ExperimentConfig;
use super::report::{CheckRow, ExperimentReport, VariationalSummary};

/// Records collected by the lightweight per-step loops (scalars and masks
/// only; fields are not retained).
struct LeanSeries {
    times: Vec<f64>,
    lambda: Vec<f64>,
    masks: Vec<MaskSet>,
}

fn run_lean(
    u0: &ScalarField,
    g: &Coefficient,
    p: &SolverParams,
    steps: usize,
) -> Result<LeanSeries> {
    let mut series = LeanSeries {
        times: Vec::with_capacity(steps + 1),
        lambda: Vec::with_capacity(steps + 1),
        masks: Vec::with_capacity(steps + 1),
    };
    let mut u = u0.clone();
    let (lam, _) = multiplier(&u, g, p.eps);
    series.times.push(0.0);
    series.lambda.push(lam);
    series.masks.push(support_of(&u, p));
    for k in 1..=steps {
        let (next, _, _) = step_regularized(&u, g, p)?;
        u = next;
        let (lam, _) = multiplier(&u, g, p.eps);
        series.times.push(k as f64 * p.dt);
        series.lambda.push(lam);
        series.masks.push(support_of(&u, p));
    }
    Ok(series)
}

/// Largest recorded time through which `ok` holds at every index ≥ `from`;
/// 0 when the very first checked record already fails.
fn t_bar_of(times: &[f64], from: usize, ok: impl Fn(usize) -> bool) -> f64 {
    let mut last = 0.0;
    for i in from..times.len() {
        if ok(i) {
            last = times[i];
        } else {
            return last;
        }
    }
    last
}

/// Least-squares fit of ln(y) = e·ln(x) + c over points with y > 0.
fn fit_power_law(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(x, y)| x > 0.0 && y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 3 {
        return None;
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    let exponent = (n * sxy - sx * sy) / denom;
    let intercept = (sy - exponent * sx) / n;
    Some((exponent, intercept))
}

/// Variational side of a preset: the report record of the spec.
pub fn variational_summary(g: &Coefficient, data: &InitialData) -> Result<VariationalSummary> {
    let tol = default_classify_tol(g);
    let regime = classify(g, data, tol);
    let lambda = capital_lambda(g, data.support())?;
    Ok(VariationalSummary {
        lambda0: data.lambda0(),
        alpha0: data.alpha0(),
        capital_lambda: lambda,
        regime: regime.tag().to_string(),
        theta: regime.theta(),
        violation_area: regime.violation_area(),
        plateau_area: plateau_area(g, lambda, tol),
    })
}

fn require_regime(
    experiment: &str,
    expected: &str,
    regime: &Regime,
) -> Result<()> {
    if regime.tag() != expected {
        return Err(Error::WrongRegime {
            experiment: experiment.into(),
            expected: expected.into(),
            found: regime.tag().into(),
        });
    }
    Ok(())
}

/// Shared setup for the continuity-preset experiments: θ from classify, the
/// collar width σ = h, the collar bound m, and the L₀ formula.
struct ContinuitySetup {
    g: Coefficient,
    data: InitialData,
    theta: f64,
    sigma: f64,
    m_bound: f64,
    l0: f64,
}

fn continuity_setup(cfg: &ExperimentConfig, experiment: &str) -> Result<ContinuitySetup> {
    let grid = cfg.grid()?;
    let (g, data) = preset_scenario(Scenario::Continuity, grid)?;
    let regime = classify(&g, &data, default_classify_tol(&g));
    require_regime(experiment, "nondegenerate", &regime)?;
    let theta = if cfg.theta > 0.0 { cfg.theta } else { regime.theta() };
    let sigma = grid.h();
    // m is ε-independent; probe it with any ε.
    let probe = build_regularized_initial(&data, &g, 1e-3, theta, sigma)?;
    let l0 = if cfg.l0 > 0.0 {
        cfg.l0
    } else {
        SolverParams::l0_for_theta(g.g0(), theta, probe.m_bound)
    };
    Ok(ContinuitySetup {
        g,
        data,
        theta,
        sigma,
        m_bound: probe.m_bound,
        l0,
    })
}

/// Theorem 3.1: for nondegenerate data the multiplier and the support are
/// right-continuous at t = 0, uniformly across the ε-sweep.
pub fn experiment_continuity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let setup = continuity_setup(cfg, "continuity")?;
    let (g, data) = (&setup.g, &setup.data);
    let grid = data.u0().grid();
    let summary = variational_summary(g, data)?;

    let steps = ((cfg.t_end / cfg.dt).round() as usize).max(1);
    let mut checks = Vec::new();

    // Pre-compute the η-sandwich reference sets.
    let references: Vec<(f64, MaskSet, MaskSet)> = cfg
        .eta_list
        .iter()
        .map(|&eta| {
            Ok((
                eta,
                erode(data.support(), eta)?,
                dilate(data.support(), eta)?,
            ))
        })
        .collect::<Result<_>>()?;

    let mut eps_sorted = cfg.eps_list.clone();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut t_bars: Vec<(f64, f64, f64)> = Vec::new(); // (eps, eta, t_bar)
    for &eps in &eps_sorted {
        let reg = build_regularized_initial(data, g, eps, setup.theta, setup.sigma)?;
        let p = SolverParams {
            eps,
            dt: cfg.dt,
            t_end: cfg.t_end,
            theta: setup.theta,
            l0: setup.l0,
            scheme: cfg.scheme,
            record_every: cfg.record_every,
        };
        p.validate(grid)?;
        let series = run_lean(&reg.field, g, &p, steps)?;
        for (eta, lo, up) in &references {
            let t_bar = t_bar_of(&series.times, 0, |i| {
                (series.lambda[i] - data.lambda0()).abs() <= *eta
                    && lo.is_subset_of(&series.masks[i])
                    && series.masks[i].is_subset_of(up)
            });
            checks.push(CheckRow {
                theorem: "thm-3.1-continuity".into(),
                eta: *eta,
                eps,
                t_bar,
                value: t_bar,
                pass: t_bar > 0.0,
                note: format!("L0={:.3} m={:.3}", setup.l0, setup.m_bound),
            });
            t_bars.push((eps, *eta, t_bar));
        }
    }

    // Uniformity across the sweep: t̄ must not shrink as ε decreases.
    for (eta, _, _) in &references {
        let series: Vec<f64> = t_bars
            .iter()
            .filter(|(_, e, _)| e == eta)
            .map(|&(_, _, t)| t)
            .collect();
        let non_shrinking = series.windows(2).all(|w| w[1] >= w[0] - 1e-15);
        let min_t = series.iter().copied().fold(f64::INFINITY, f64::min);
        checks.push(CheckRow {
            theorem: "thm-3.1-tbar-uniform".into(),
            eta: *eta,
            eps: f64::NAN,
            t_bar: min_t,
            value: min_t,
            pass: non_shrinking && min_t > 0.0,
            note: "t_bar non-shrinking across the eps sweep".into(),
        });
    }

    // Lemma 3.2 qualitative Hölder bound: sup-norm drift from u₀^ε fits
    // C·t^e with e ≥ 0.75 on [dt, 100dt].
    let eps_fine = *eps_sorted.last().unwrap();
    let reg = build_regularized_initial(data, g, eps_fine, setup.theta, setup.sigma)?;
    let p = SolverParams {
        eps: eps_fine,
        dt: cfg.dt,
        t_end: cfg.t_end,
        theta: setup.theta,
        l0: setup.l0,
        scheme: cfg.scheme,
        record_every: 1,
    };
    let mut u = reg.field.clone();
    let mut drift_points = Vec::new();
    for k in 1..=100 {
        let (next, _, _) = step_regularized(&u, g, &p)?;
        u = next;
        let gap = u
            .values()
            .iter()
            .zip(reg.field.values())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        drift_points.push((k as f64 * cfg.dt, gap));
    }
    let (exponent, _) = fit_power_law(&drift_points).unwrap_or((f64::NAN, 0.0));
    checks.push(CheckRow {
        theorem: "lem-3.2-holder".into(),
        eta: f64::NAN,
        eps: eps_fine,
        t_bar: 100.0 * cfg.dt,
        value: exponent,
        pass: exponent >= 0.75,
        note: "sup-norm drift exponent over [dt, 100dt]".into(),
    });

    Ok(ExperimentReport {
        name: "continuity".into(),
        summary,
        checks,
    })
}

/// Corollary 3.9: the support excess over {u₀ > 0} obeys the
/// √(t |log t|) growth bound; in pure power-law form the exponent sits
/// near 1/2.
pub fn experiment_growth(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let setup = continuity_setup(cfg, "growth")?;
    let (g, data) = (&setup.g, &setup.data);
    let summary = variational_summary(g, data)?;

    let eps = cfg.eps;
    let p = SolverParams {
        eps,
        dt: cfg.dt,
        t_end: cfg.t_end,
        theta: setup.theta,
        l0: setup.l0,
        scheme: cfg.scheme,
        record_every: 1,
    };
    p.validate(data.u0().grid())?;
    let steps = ((cfg.t_end / cfg.dt).round() as usize).max(1);

    let reg = build_regularized_initial(data, g, eps, setup.theta, setup.sigma)?;
    let dist_to_support = distance_to(data.support())?;
    let mut u = reg.field.clone();
    let mut excess: Vec<(f64, f64)> = Vec::with_capacity(steps + 1);
    let threshold = p.l0 * p.eps;
    let measure = |field: &ScalarField| -> f64 {
        field
            .values()
            .iter()
            .zip(dist_to_support.values())
            .filter_map(|(&v, &d)| (v > threshold).then_some(d))
            .fold(0.0f64, f64::max)
    };
    excess.push((0.0, measure(&u)));
    for k in 1..=steps {
        let (next, _, _) = step_regularized(&u, g, &p)?;
        u = next;
        excess.push((k as f64 * p.dt, measure(&u)));
    }

    let mut checks = Vec::new();
    let d0 = excess[0].1;
    checks.push(CheckRow {
        theorem: "cor-3.9-collar-excluded".into(),
        eta: f64::NAN,
        eps,
        t_bar: 0.0,
        value: d0,
        pass: d0 == 0.0,
        note: "initial excess vanishes once the collar is thresholded out".into(),
    });

    let window: Vec<(f64, f64)> = excess
        .iter()
        .copied()
        .filter(|&(t, _)| t >= 10.0 * p.dt - 1e-15 && t <= 1000.0 * p.dt + 1e-15)
        .collect();
    let (exponent, _) = fit_power_law(&window).unwrap_or((f64::NAN, 0.0));
    checks.push(CheckRow {
        theorem: "cor-3.9-exponent".into(),
        eta: f64::NAN,
        eps,
        t_bar: 1000.0 * p.dt,
        value: exponent,
        pass: (0.4..=0.6).contains(&exponent),
        note: "power-law exponent of d(t) over [10dt, 1000dt]".into(),
    });

    // Fitted constant of d ≤ C₂ √(t |log t|) and the inclusion it implies.
    let envelope = |t: f64| (t * t.ln().abs()).sqrt();
    let c2 = window
        .iter()
        .filter(|&&(t, _)| t > 0.0)
        .map(|&(t, d)| d / envelope(t))
        .fold(0.0f64, f64::max);
    let inclusion_ok = excess
        .iter()
        .all(|&(t, d)| t == 0.0 || d <= c2 * envelope(t) + 1e-12 || t < 10.0 * p.dt);
    let residual = window
        .iter()
        .map(|&(t, d)| (d - c2 * envelope(t)).abs())
        .fold(0.0f64, f64::max);
    checks.push(CheckRow {
        theorem: "cor-3.9-inclusion".into(),
        eta: f64::NAN,
        eps,
        t_bar: cfg.t_end,
        value: c2,
        pass: inclusion_ok && c2.is_finite() && c2 > 0.0,
        note: format!("envelope residual {residual:.3e}"),
    });

    // Right-continuity: the excess decays toward zero at small times.
    let d_early = window.first().map(|&(_, d)| d).unwrap_or(f64::NAN);
    let d_late = window.last().map(|&(_, d)| d).unwrap_or(f64::NAN);
    checks.push(CheckRow {
        theorem: "thm-1.1-right-continuity".into(),
        eta: f64::NAN,
        eps,
        t_bar: 10.0 * p.dt,
        value: d_early,
        pass: d_early < 0.1 && d_early < 0.5 * d_late,
        note: "excess at 10dt is small and well below the late excess".into(),
    });

    Ok(ExperimentReport {
        name: "growth".into(),
        summary,
        checks,
    })
}

/// Per-ε time step of the jump experiment. The Michaelis-Menten shadow
/// relaxes at rate (1-g)/ε, so a step proportional to ε resolves the
/// multiplier transient in a fixed number of steps for every ε while
/// keeping the explicit reaction monotone (dt (1-g₀) < ε).
pub fn jump_dt(eps: f64, g0: f64) -> f64 {
    0.6 * eps / (1.0 - g0)
}

/// Theorem 4.3 / Corollary 4.7: when the first nondegeneracy condition
/// fails, λ jumps to Λ[u₀] and the support jumps to the maximizer set.
pub fn experiment_jump(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let (g, data) = preset_scenario(Scenario::Jump, grid)?;
    let regime = classify(&g, &data, default_classify_tol(&g));
    require_regime("jump", "jump", &regime)?;
    let summary = variational_summary(&g, &data)?;
    let lambda0 = data.lambda0();
    let lambda_star = summary.capital_lambda;
    let a_star = maximizer_set(&g, data.support())?;

    let mut checks = Vec::new();
    checks.push(CheckRow {
        theorem: "cor-4.7-gap".into(),
        eta: f64::NAN,
        eps: f64::NAN,
        t_bar: 0.0,
        value: lambda_star - lambda0,
        pass: lambda_star - lambda0 > 0.02,
        note: "Lambda - lambda0 computed variationally".into(),
    });
    checks.push(CheckRow {
        theorem: "cor-4.7-area".into(),
        eta: f64::NAN,
        eps: f64::NAN,
        t_bar: 0.0,
        value: a_star.difference(data.support()).area(),
        pass: a_star.difference(data.support()).area() > 0.0,
        note: "maximizer strictly exceeds the initial support".into(),
    });

    let l0 = if cfg.l0 > 0.0 {
        cfg.l0
    } else {
        SolverParams::l0_default(g.g0())
    };

    // Sandwich reference sets per η.
    let lower_core = data.support().union(&g.field().superlevel(lambda_star));
    let upper_core = data
        .support()
        .union(&g.field().superlevel_closed(lambda_star));
    let references: Vec<(f64, MaskSet, MaskSet)> = cfg
        .eta_list
        .iter()
        .map(|&eta| Ok((eta, erode(&lower_core, eta)?, dilate(&upper_core, eta)?)))
        .collect::<Result<_>>()?;

    let mut eps_sorted = cfg.eps_list.clone();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let total_steps = 260usize;
    let trusted_step = 10usize;
    let onset_deadline = 150usize;

    let mut gaps = Vec::new();
    let mut final_series: Option<LeanSeries> = None;
    for &eps in &eps_sorted {
        let dt = jump_dt(eps, g.g0());
        let p = SolverParams {
            eps,
            dt,
            t_end: total_steps as f64 * dt,
            theta: 0.0,
            l0,
            scheme: Scheme::Imex,
            record_every: 1,
        };
        p.validate(grid)?;
        let series = run_lean(data.u0(), &g, &p, total_steps)?;

        // λ at the earliest trusted time is closer to Λ than to λ₀.
        let gap = (series.lambda[trusted_step] - lambda_star).abs();
        gaps.push(gap);
        checks.push(CheckRow {
            theorem: "thm-4.3-lambda-limit".into(),
            eta: f64::NAN,
            eps,
            t_bar: trusted_step as f64 * dt,
            value: gap,
            pass: gap < 0.5 * (lambda_star - lambda0),
            note: format!("|lambda(10dt)-Lambda| vs (Lambda-lambda0)/2 = {:.4}", 0.5 * (lambda_star - lambda0)),
        });

        // |λ - Λ| ≤ η from the trusted time onward.
        for (eta, _, _) in &references {
            let t_bar = t_bar_of(&series.times, trusted_step, |i| {
                (series.lambda[i] - lambda_star).abs() <= *eta
            });
            checks.push(CheckRow {
                theorem: "thm-4.3-lambda-interval".into(),
                eta: *eta,
                eps,
                t_bar,
                value: t_bar,
                pass: t_bar >= series.times[total_steps] - 1e-15,
                note: "multiplier stays within eta of Lambda after the collar window".into(),
            });
        }

        // Support sandwich: measured onset, then no violation through T.
        for (eta, lo, up) in &references {
            let holds = |i: usize| lo.is_subset_of(&series.masks[i]) && series.masks[i].is_subset_of(up);
            let onset = (trusted_step..series.times.len()).find(|&i| holds(i));
            let (t_on, pass) = match onset {
                Some(i) if i <= onset_deadline => {
                    let sustained = (i..series.times.len()).all(holds);
                    (series.times[i], sustained)
                }
                _ => (f64::NAN, false),
            };
            checks.push(CheckRow {
                theorem: "thm-4.3-sandwich".into(),
                eta: *eta,
                eps,
                t_bar: series.times[total_steps],
                value: t_on,
                pass,
                note: format!("threshold-crossing onset by step {onset_deadline}, sustained to T"),
            });
        }

        final_series = Some(series);
    }

    // Gaps tighten monotonically as ε decreases through the sweep.
    let tightening = gaps.windows(2).all(|w| w[1] < w[0]);
    checks.push(CheckRow {
        theorem: "thm-4.3-tightening".into(),
        eta: f64::NAN,
        eps: f64::NAN,
        t_bar: 0.0,
        value: *gaps.last().unwrap(),
        pass: tightening,
        note: format!("gaps across sweep: {gaps:?}"),
    });

    // Remark 4.2: up to plateau cells, the support approximates A⁰∗.
    if let Some(series) = &final_series {
        let tol = default_classify_tol(&g);
        let plateau = MaskSet::from_bits(
            grid,
            g.field()
                .values()
                .iter()
                .map(|&v| (v - lambda_star).abs() < tol)
                .collect(),
        );
        let last = series.masks.last().unwrap();
        let value = last.union(&plateau).symmetric_difference_area(&a_star);
        checks.push(CheckRow {
            theorem: "rem-4.2-plateau".into(),
            eta: f64::NAN,
            eps: *eps_sorted.last().unwrap(),
            t_bar: *series.times.last().unwrap(),
            value,
            pass: value < 0.05,
            note: "area((support ∪ plateau) Δ maximizer) at the final time".into(),
        });
    }

    // Approximating sequence: ordering, contraction, and λ agreement.
    let params = JumpSequenceParams::new(0.25 * (g.g1() - g.g0()), 0.48, 4)?;
    let seq = build_jump_sequence(&data, &g, lambda_star, &params)?;
    let eps_mid = eps_sorted[eps_sorted.len() / 2];
    let dt = jump_dt(eps_mid, g.g0());
    let p = SolverParams {
        eps: eps_mid,
        dt,
        t_end: 200.0 * dt,
        theta: 0.0,
        l0,
        scheme: Scheme::Imex,
        record_every: 4,
    };
    let fields: Vec<ScalarField> = seq.members.iter().map(|m| m.field.clone()).collect();
    let trajectories = run_approx_sequence(&fields, &g, &p)?;
    let base = run_regularized(data.u0(), &g, &p)?;

    let mut ordering_worst = 0.0f64;
    for hi in 0..trajectories.len() {
        for lo in (hi + 1)..trajectories.len() {
            // Larger index = smaller γ = smaller datum, so u_lo ≤ u_hi.
            for k in 0..trajectories[hi].snapshots.len() {
                let (ta, ua) = &trajectories[lo].snapshots[k];
                let (tb, ub) = &trajectories[hi].snapshots[k];
                debug_assert_eq!(ta, tb);
                let worst = ua
                    .values()
                    .iter()
                    .zip(ub.values())
                    .fold(0.0f64, |m, (&a, &b)| m.max(a - b));
                ordering_worst = ordering_worst.max(worst);
            }
        }
        for k in 0..base.snapshots.len() {
            let worst = base.snapshots[k]
                .1
                .values()
                .iter()
                .zip(trajectories[hi].snapshots[k].1.values())
                .fold(0.0f64, |m, (&b, &u)| m.max(b - u));
            ordering_worst = ordering_worst.max(worst);
        }
    }
    checks.push(CheckRow {
        theorem: "eq-un-monoton".into(),
        eta: f64::NAN,
        eps: eps_mid,
        t_bar: p.t_end,
        value: ordering_worst,
        pass: ordering_worst <= 1e-9,
        note: "pointwise ordering u ≤ u_n1 ≤ u_n2 along trajectories".into(),
    });

    let mut contraction_worst = 0.0f64;
    for hi in 0..trajectories.len() {
        for lo in (hi + 1)..trajectories.len() {
            let mut prev = f64::INFINITY;
            for k in 0..trajectories[hi].snapshots.len() {
                let diff = trajectories[hi].snapshots[k]
                    .1
                    .zip_with(&trajectories[lo].snapshots[k].1, |a, b| (a - b).max(0.0));
                let l1 = crate::grid::integrate(&diff);
                if l1 > prev {
                    contraction_worst = contraction_worst.max(l1 - prev);
                }
                prev = l1;
            }
        }
    }
    checks.push(CheckRow {
        theorem: "eq-contraction".into(),
        eta: f64::NAN,
        eps: eps_mid,
        t_bar: p.t_end,
        value: contraction_worst,
        pass: contraction_worst <= 1e-8,
        note: "L1 distance of ordered pairs is non-increasing".into(),
    });

    let lam_gap = (trajectories.last().unwrap().lambda.last().unwrap()
        - base.lambda.last().unwrap())
    .abs();
    checks.push(CheckRow {
        theorem: "eq-conv-un".into(),
        eta: cfg.eta_list[0],
        eps: eps_mid,
        t_bar: p.t_end,
        value: lam_gap,
        pass: lam_gap <= cfg.eta_list[0],
        note: "deepest member tracks the base multiplier".into(),
    });

    Ok(ExperimentReport {
        name: "jump".into(),
        summary,
        checks,
    })
}

/// Theorems 5.1 and 5.2 for the classical obstacle problem: support
/// continuity under strictly negative forcing, support jump onto {f > 0}.
pub fn experiment_classical(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let (g, data) = preset_scenario(Scenario::Classical, grid)?;
    let summary = variational_summary(&g, &data)?;
    let h = grid.h();
    let eta = 8.0 * h;
    let dt = cfg.dt;
    // The support threshold must sit above solver dust (resolvent tails,
    // per-step stencil refill) and below physical field values.
    let p = SolverParams {
        eps: 2e-5,
        dt,
        t_end: if cfg.t_end > 0.0 { cfg.t_end } else { 1000.0 * dt },
        theta: 0.0,
        l0: 1.0,
        scheme: cfg.scheme,
        record_every: cfg.record_every.max(4),
    };
    p.validate(grid)?;
    let mut checks = Vec::new();

    // Instance (a): f ≡ -1/2, the support is continuous at t = 0. The
    // sandwich window is genuinely short: the steep preset bump spreads
    // diffusively until the sink catches up, exactly the √(t log t) overrun
    // the growth bound allows, so t̄ of a few dt is the honest outcome.
    let p_a = SolverParams {
        record_every: 1,
        t_end: 100.0 * dt,
        ..p
    };
    let src = ClassicalSource::steady(ScalarField::constant(grid, -0.5));
    let traj = run_classical(data.u0(), &src, &p_a)?;
    let lo = erode(data.support(), eta)?;
    let up = dilate(data.support(), eta)?;
    let t_bar = t_bar_of(&traj.times, 0, |i| {
        lo.is_subset_of(&traj.support_masks[i].1) && traj.support_masks[i].1.is_subset_of(&up)
    });
    checks.push(CheckRow {
        theorem: "thm-5.1-sandwich".into(),
        eta,
        eps: f64::NAN,
        t_bar,
        value: t_bar,
        pass: t_bar > 0.0,
        note: "f = -1/2: support sandwich at eta = 8h".into(),
    });

    // Instance (b): f = +1/2 on a disk disjoint from the support. The
    // forced disk activates within a step or two; the sandwich then holds
    // on a short window until the diffusive overrun of the old support
    // breaches the +η collar.
    let region = MaskSet::from_fn(grid, |x, y| {
        let dx = x - 0.75;
        let dy = y - 0.75;
        dx * dx + dy * dy <= 0.12 * 0.12
    });
    let f = region
        .indicator()
        .map(|ind| if ind > 0.5 { 0.5 } else { -0.5 });
    let src = ClassicalSource::steady(f);
    let p_b = SolverParams {
        t_end: 60.0 * dt,
        record_every: 1,
        ..p
    };
    let traj = run_classical(data.u0(), &src, &p_b)?;
    let target = data.support().union(&region);
    let lo = erode(&target, eta)?;
    let up = dilate(&target, eta)?;
    let holds = |i: usize| {
        lo.is_subset_of(&traj.support_masks[i].1) && traj.support_masks[i].1.is_subset_of(&up)
    };
    let onset = (1..traj.times.len()).find(|&i| holds(i));
    let (t_on, window_len) = match onset {
        Some(i) => {
            let end = (i..traj.times.len()).take_while(|&k| holds(k)).count();
            (traj.times[i], end)
        }
        None => (f64::NAN, 0),
    };
    checks.push(CheckRow {
        theorem: "thm-5.2-sandwich".into(),
        eta,
        eps: f64::NAN,
        t_bar: if window_len > 0 { t_on + (window_len - 1) as f64 * dt } else { 0.0 },
        value: t_on,
        pass: window_len >= 5 && t_on <= 20.0 * dt,
        note: "f > 0 on a disjoint disk: support jumps onto it".into(),
    });

    // Instance (c): f ≡ 0 sanity row, pure heat flow spreads the support.
    let src = ClassicalSource::steady(ScalarField::zeros(grid));
    let p_c = SolverParams {
        t_end: 100.0 * dt,
        ..p
    };
    let traj = run_classical(data.u0(), &src, &p_c)?;
    checks.push(CheckRow {
        theorem: "sanity-pure-heat".into(),
        eta: f64::NAN,
        eps: f64::NAN,
        t_bar: p_c.t_end,
        value: *traj.support_area.last().unwrap(),
        pass: traj.support_area.last().unwrap() > &traj.support_area[0],
        note: "with f = 0 the positivity set spreads".into(),
    });

    Ok(ExperimentReport {
        name: "classical".into(),
        summary,
        checks,
    })
}

/// Generic `run` subcommand: one trajectory of the configured scenario,
/// dumped as CSV plus FIELD snapshots.
pub fn run_scenario(cfg: &ExperimentConfig, outdir: &Path) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let (g, data) = preset_scenario(cfg.scenario, grid)?;
    let t_end = if cfg.t_end > 0.0 { cfg.t_end } else { 20.0 * cfg.dt };

    let traj = match cfg.scenario {
        Scenario::Classical => {
            let p = SolverParams {
                eps: 2e-5,
                dt: cfg.dt,
                t_end,
                theta: 0.0,
                l0: 1.0,
                scheme: cfg.scheme,
                record_every: cfg.record_every,
            };
            let src = ClassicalSource::steady(ScalarField::constant(grid, -0.5));
            run_classical(data.u0(), &src, &p)?
        }
        scenario => {
            let regime = classify(&g, &data, default_classify_tol(&g));
            let (u0, theta, l0) = match regime {
                Regime::Nondegenerate { theta } => {
                    let reg = build_regularized_initial(&data, &g, cfg.eps, theta, grid.h())?;
                    let l0 = if cfg.l0 > 0.0 {
                        cfg.l0
                    } else {
                        SolverParams::l0_for_theta(g.g0(), theta, reg.m_bound)
                    };
                    (reg.field, theta, l0)
                }
                _ => {
                    let l0 = if cfg.l0 > 0.0 {
                        cfg.l0
                    } else {
                        SolverParams::l0_default(g.g0())
                    };
                    (data.u0().clone(), 0.0, l0)
                }
            };
            let p = SolverParams {
                eps: cfg.eps,
                dt: cfg.dt,
                t_end,
                theta,
                l0,
                scheme: cfg.scheme,
                record_every: cfg.record_every,
            };
            let _ = scenario;
            run_regularized(&u0, &g, &p)?
        }
    };

    std::fs::create_dir_all(outdir)?;
    let mut csv = std::fs::File::create(outdir.join("trajectory.csv"))?;
    traj.write_csv(&mut csv)?;
    for (k, (_, field)) in traj.snapshots.iter().enumerate() {
        let name = format!("u_t{k}");
        let mut f = std::fs::File::create(outdir.join(format!("{name}.f64")))?;
        write_field(&mut f, &name, field)?;
    }
    Ok(traj)
}

/// Growth defaults: the exponent window wants an early threshold crossing,
/// so the growth run uses a finer ε than the continuity sweep.
pub fn growth_defaults() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(Scenario::Continuity);
    cfg.eps = 3e-5;
    cfg.t_end = 1050.0 * cfg.dt;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_fit_recovers_exponent() {
        let pts: Vec<(f64, f64)> = (1..50)
            .map(|k| {
                let t = k as f64 * 1e-4;
                (t, 3.0 * t.powf(0.5))
            })
            .collect();
        let (e, c) = fit_power_law(&pts).unwrap();
        assert!((e - 0.5).abs() < 1e-9);
        assert!((c.exp() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn t_bar_respects_first_violation() {
        let times = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(t_bar_of(&times, 0, |i| i < 2), 1.0);
        assert_eq!(t_bar_of(&times, 0, |_| true), 3.0);
        assert_eq!(t_bar_of(&times, 0, |_| false), 0.0);
        assert_eq!(t_bar_of(&times, 2, |i| i == 2), 2.0);
    }

    #[test]
    fn wrong_preset_is_rejected() {
        let mut cfg = ExperimentConfig::default_for(Scenario::Jump);
        cfg.n = 64;
        // experiment_continuity builds its own continuity preset, so the
        // regime guard triggers only through the jump experiment run on
        // nondegenerate data; simulate by asking the continuity preset to
        // behave as jump.
        let grid = cfg.grid().unwrap();
        let (g, data) = preset_scenario(Scenario::Continuity, grid).unwrap();
        let regime = classify(&g, &data, default_classify_tol(&g));
        assert!(require_regime("jump", "jump", &regime).is_err());
    }
}
