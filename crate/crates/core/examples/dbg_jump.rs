use polar_core::experiments::jump_dt;
use polar_core::grid::{dilate, erode, TorusGrid};
use polar_core::initdata::{preset_scenario, Scenario};
use polar_core::solver::{multiplier, step_regularized, support_of, Scheme, SolverParams};
use polar_core::variational::capital_lambda;

fn main() {
    let grid = TorusGrid::new(128).unwrap();
    let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
    let lam_star = capital_lambda(&g, data.support()).unwrap();
    let eta = 8.0 * grid.h();
    let lower_core = data.support().union(&g.field().superlevel(lam_star));
    let upper_core = data.support().union(&g.field().superlevel_closed(lam_star));
    let lo = erode(&lower_core, eta).unwrap();
    let up = dilate(&upper_core, eta).unwrap();

    for eps in [1e-3, 1e-4, 3e-5] {
        let dt = jump_dt(eps, g.g0());
        let p = SolverParams {
            eps, dt, t_end: 0.0, theta: 0.0,
            l0: SolverParams::l0_default(g.g0()),
            scheme: Scheme::Imex, record_every: 1,
        };
        let mut u = data.u0().clone();
        println!("=== eps={eps:.0e} dt={dt:.3e} (Lambda={lam_star:.4})");
        let mut first_ok = None;
        let mut last_ok = None;
        for k in 0..=400 {
            let (lam, _) = multiplier(&u, &g, eps);
            let s = support_of(&u, &p);
            let left = lo.is_subset_of(&s);
            let right = s.is_subset_of(&up);
            if left && right {
                first_ok.get_or_insert(k);
                last_ok = Some(k);
            }
            if k % 40 == 0 {
                println!("  k={k:3} t={:.3e} lambda={lam:.4} left={left} right={right}", k as f64 * dt);
            }
            let (next, _, _) = step_regularized(&u, &g, &p).unwrap();
            u = next;
        }
        println!("  sandwich window: first_ok={first_ok:?} last_ok={last_ok:?}");
    }
}
