use polar_core::grid::TorusGrid;
use polar_core::initdata::{preset_scenario, Scenario};
use polar_core::variational::capital_lambda;

fn main() {
    for n in [128usize, 192, 256, 320, 384, 512] {
        let grid = TorusGrid::new(n).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let lam = capital_lambda(&g, data.support()).unwrap();
        let mut vals: Vec<f64> = g.field().values().to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for (g0, r, label) in [(0.08f64, 0.45f64, "a"), (0.08, 0.48, "b"), (0.1, 0.48, "c")] {
            let counts: Vec<usize> = (1..=9)
                .map(|k| {
                    let gamma = g0 * r.powi(k);
                    vals.iter()
                        .filter(|&&v| v >= lam - 2.0 * gamma && v < lam - gamma)
                        .count()
                })
                .collect();
            let min = counts.iter().min().unwrap();
            println!("n={n} Λ={lam:.6} cfg={label} (γ0={g0},ρ={r}) counts={counts:?} min={min}");
        }
    }
}
