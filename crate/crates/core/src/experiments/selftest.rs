//! `selftest` subcommand: a quick deterministic battery over every module's
//! core properties. Each item prints one line; the battery returns the
//! number of failures.

use crate::error::Result;
use crate::grid::{
    boundary_annulus_area, dilate, distance_to, erode, heat_semigroup, implicit_heat_solve,
    integrate, laplacian, mean_over, set_distance, MaskSet, ScalarField, TorusGrid,
};
use crate::initdata::{preset_scenario, Scenario};
use crate::solver::{multiplier, step_regularized, Scheme, SolverParams};
use crate::variational::{
    capital_lambda, capital_lambda_scan, classify, default_classify_tol, lambda_of,
    maximizer_set, Coefficient, Regime,
};

/// Tiny deterministic xorshift generator; the selftest battery must not
/// depend on dev-dependencies.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed.max(1))
    }

    fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn bool(&mut self, p: f64) -> bool {
        self.f64() < p
    }
}

fn random_mask(grid: TorusGrid, rng: &mut Rng) -> MaskSet {
    loop {
        let bits: Vec<bool> = (0..grid.len()).map(|_| rng.bool(0.4)).collect();
        let m = MaskSet::from_bits(grid, bits);
        if !m.is_empty_set() && !m.is_full() {
            return m;
        }
    }
}

fn random_field(grid: TorusGrid, rng: &mut Rng) -> ScalarField {
    ScalarField::new(grid, (0..grid.len()).map(|_| rng.f64()).collect()).unwrap()
}

type Item = (&'static str, fn(u64) -> Result<bool>);

fn delta_set_lemmas(seed: u64) -> Result<bool> {
    let grid = TorusGrid::new(32)?;
    let h = grid.h();
    let mut rng = Rng::new(seed);
    for _ in 0..25 {
        let a = random_mask(grid, &mut rng);
        let c = random_mask(grid, &mut rng);
        for delta in [h, 2.0 * h, 5.0 * h] {
            // Complement inclusions.
            if !dilate(&a, delta)?.complement().is_subset_of(&erode(&a.complement(), delta)?) {
                return Ok(false);
            }
            if !erode(&a, delta)?.complement().is_subset_of(&dilate(&a.complement(), delta)?) {
                return Ok(false);
            }
            // Union identities.
            let u = a.union(&c);
            if dilate(&u, delta)? != dilate(&a, delta)?.union(&dilate(&c, delta)?) {
                return Ok(false);
            }
            let eu = erode(&u, delta)?;
            let ea = erode(&a, delta)?;
            let ec = erode(&c, delta)?;
            if !ea.union(&ec).is_subset_of(&eu) {
                return Ok(false);
            }
            let ring = dilate(&a, delta)?.difference(&ea);
            if !eu.is_subset_of(&ea.union(&ec).union(&ring)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn level_set_sandwich(seed: u64) -> Result<bool> {
    let grid = TorusGrid::new(32)?;
    let mut rng = Rng::new(seed);
    let cx = rng.f64();
    let cy = rng.f64();
    let tau = 2.0 * std::f64::consts::PI;
    let f = ScalarField::from_fn(grid, |x, y| {
        (tau * (x - cx)).cos() + (tau * (y - cy)).cos() - 0.7
    });
    let positive = f.superlevel(0.0);
    let nonpositive = positive.complement();
    if positive.is_empty_set() || nonpositive.is_empty_set() {
        return Ok(true);
    }
    let fmax = f.max();
    for k in 1..=10 {
        let r = fmax * k as f64 / 11.0;
        let level = f.superlevel_closed(r);
        if level.is_empty_set() {
            continue;
        }
        // Right inclusion with δ₂(r) = d({f ≥ r}, {f ≤ 0}).
        let delta2 = set_distance(&level, &nonpositive)?;
        if !level.is_subset_of(&erode(&positive, delta2)?) {
            return Ok(false);
        }
        // Left inclusion: scan realized distances for the smallest δ with
        // min over the eroded set of f at least r.
        let dist = distance_to(&nonpositive)?;
        let mut realized: Vec<f64> = positive
            .bits()
            .iter()
            .zip(dist.values())
            .filter_map(|(&b, &d)| b.then_some(d))
            .collect();
        realized.sort_by(|a, b| a.partial_cmp(b).unwrap());
        realized.dedup();
        let mut delta1 = None;
        for &d in &realized {
            let m = f
                .values()
                .iter()
                .zip(dist.values())
                .filter_map(|(&fv, &dv)| (dv >= d).then_some(fv))
                .fold(f64::INFINITY, f64::min);
            if m >= r {
                delta1 = Some(d);
                break;
            }
        }
        if let Some(d1) = delta1 {
            if !erode(&positive, d1)?.is_subset_of(&f.superlevel_closed(r)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn heat_conservation(seed: u64) -> Result<bool> {
    let grid = TorusGrid::new(64)?;
    let mut rng = Rng::new(seed);
    let f = random_field(grid, &mut rng);
    let m0 = integrate(&f);
    let w = implicit_heat_solve(&f, 1e-3)?;
    let s = heat_semigroup(&f, 0.37)?;
    let ok = (integrate(&w) - m0).abs() / m0 < 1e-12
        && (integrate(&s) - m0).abs() / m0 < 1e-12
        && integrate(&laplacian(&f)).abs() < 1e-12
        && s.min() >= f.min() - 1e-12
        && s.max() <= f.max() + 1e-12;
    Ok(ok)
}

fn variational_oracle(seed: u64) -> Result<bool> {
    let grid = TorusGrid::new(32)?;
    let mut rng = Rng::new(seed);
    for _ in 0..10 {
        let g = Coefficient::new(
            ScalarField::new(grid, (0..grid.len()).map(|_| 0.2 + 0.6 * rng.f64()).collect())?,
            0.2,
            0.8,
        )?;
        let s = random_mask(grid, &mut rng);
        let fast = capital_lambda(&g, &s)?;
        let slow = capital_lambda_scan(&g, &s)?;
        if (fast - slow).abs() > 1e-9 {
            return Ok(false);
        }
        if fast < lambda_of(&g, &s)? - 1e-12 {
            return Ok(false);
        }
        let m = maximizer_set(&g, &s)?;
        if (mean_over(g.field(), &m)? - fast).abs() > 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn preset_classification(_seed: u64) -> Result<bool> {
    let grid = TorusGrid::new(64)?;
    let (g, data) = preset_scenario(Scenario::Continuity, grid)?;
    let tol = default_classify_tol(&g);
    let a = matches!(classify(&g, &data, tol), Regime::Nondegenerate { .. });
    let (g, data) = preset_scenario(Scenario::Jump, grid)?;
    let b = matches!(classify(&g, &data, tol), Regime::Jump { .. });
    let (g, data) = preset_scenario(Scenario::NonGeneric, grid)?;
    let c = matches!(
        classify(&g, &data, default_classify_tol(&g)),
        Regime::NonGeneric { .. }
    );
    Ok(a && b && c)
}

fn solver_conservation(_seed: u64) -> Result<bool> {
    let grid = TorusGrid::new(64)?;
    let (g, data) = preset_scenario(Scenario::Jump, grid)?;
    let p = SolverParams {
        eps: 1e-3,
        dt: 1e-5,
        t_end: 0.0,
        theta: 0.0,
        l0: SolverParams::l0_default(g.g0()),
        scheme: Scheme::Imex,
        record_every: 1,
    };
    let mut u = data.u0().clone();
    let m0 = integrate(&u);
    for _ in 0..200 {
        let (next, lambda, alpha) = step_regularized(&u, &g, &p)?;
        if (alpha - (1.0 / lambda - 1.0)).abs() > 1e-12 {
            return Ok(false);
        }
        u = next;
    }
    let (lam, alp) = multiplier(&u, &g, p.eps);
    Ok((integrate(&u) - m0).abs() / m0 < 1e-10
        && u.min() > 0.0
        && (alp - (1.0 / lam - 1.0)).abs() < 1e-12)
}

fn annulus_regularity(_seed: u64) -> Result<bool> {
    let grid = TorusGrid::new(64)?;
    let h = grid.h();
    let stripe = MaskSet::from_fn(grid, |x, _| x < 0.5);
    for k in 1..=8 {
        let delta = k as f64 * h;
        if boundary_annulus_area(&stripe, delta)? > 4.5 * delta {
            return Ok(false);
        }
    }
    let checker = MaskSet::from_fn(grid, |x, y| {
        let i = (x * 32.0).floor() as i64;
        let j = (y * 32.0).floor() as i64;
        (i + j) % 2 == 0
    });
    Ok(boundary_annulus_area(&checker, 2.0 * h)? > 0.5)
}

/// Runs the whole battery, printing one line per item.
pub fn run_selftest(seed: u64) -> Result<usize> {
    let items: &[Item] = &[
        ("delta-set-lemmas", delta_set_lemmas),
        ("level-set-sandwich", level_set_sandwich),
        ("heat-conservation", heat_conservation),
        ("variational-oracle", variational_oracle),
        ("preset-classification", preset_classification),
        ("solver-conservation", solver_conservation),
        ("annulus-regularity", annulus_regularity),
    ];
    let mut failures = 0;
    for (name, f) in items {
        let ok = f(seed)?;
        println!("selftest {name}: {}", if ok { "ok" } else { "FAILED" });
        if !ok {
            failures += 1;
        }
    }
    Ok(failures)
}
