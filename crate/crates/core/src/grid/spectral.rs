//! Heat solves by exact diagonalization of the periodic five-point stencil.
//!
//! Both the backward-Euler resolvent `(I - τΔ_h)⁻¹` and the semigroup
//! `e^{tΔ_h}` act mode-by-mode in the discrete Fourier basis, so solves are
//! exact up to FFT round-off and conserve the zero mode (total mass) by
//! construction.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLAN_CACHE: Lazy<Mutex<HashMap<usize, Arc<Plans>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plans_for(n: usize) -> Arc<Plans> {
    let mut cache = PLAN_CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Eigenvalue of `-Δ_h` for the mode `(kx, ky)`:
/// `(2/h²)(2 - cos(2πkx/n) - cos(2πky/n))`.
pub fn stencil_eigenvalue(grid: TorusGrid, kx: usize, ky: usize) -> f64 {
    let n = grid.n() as f64;
    let inv_h2 = n * n;
    let two_pi = 2.0 * std::f64::consts::PI;
    let cx = (two_pi * kx as f64 / n).cos();
    let cy = (two_pi * ky as f64 / n).cos();
    inv_h2 * (4.0 - 2.0 * cx - 2.0 * cy)
}

/// Applies `multiplier(μ_k)` to every Fourier mode of `f`.
fn apply_spectral_multiplier(f: &ScalarField, multiplier: impl Fn(f64) -> f64) -> ScalarField {
    let grid = f.grid();
    let n = grid.n();
    let plans = plans_for(n);

    let mut data: Vec<Complex64> = f
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();

    // Forward transform: rows, then columns via transpose.
    for row in data.chunks_exact_mut(n) {
        plans.forward.process(row);
    }
    transpose_in_place(&mut data, n);
    for row in data.chunks_exact_mut(n) {
        plans.forward.process(row);
    }

    // After the double transform the layout is transposed: index (kx, ky).
    for kx in 0..n {
        for ky in 0..n {
            let m = multiplier(stencil_eigenvalue(grid, kx, ky));
            data[kx * n + ky] *= m;
        }
    }

    for row in data.chunks_exact_mut(n) {
        plans.inverse.process(row);
    }
    transpose_in_place(&mut data, n);
    for row in data.chunks_exact_mut(n) {
        plans.inverse.process(row);
    }

    let scale = 1.0 / (n * n) as f64;
    let values = data.iter().map(|c| c.re * scale).collect();
    ScalarField::new(grid, values).expect("spectral output is finite")
}

fn transpose_in_place(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Solves `(I - τ Δ_h) w = f` exactly in the stencil's Fourier basis.
///
/// `τ = 0` returns `f` unchanged; total mass is preserved because the zero
/// mode has multiplier 1.
pub fn implicit_heat_solve(f: &ScalarField, tau: f64) -> Result<ScalarField> {
    if tau < 0.0 {
        return Err(Error::NegativeTime(tau));
    }
    if tau == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_spectral_multiplier(f, |mu| 1.0 / (1.0 + tau * mu)))
}

/// Heat semigroup `e^{tΔ_h} f` via per-mode multiplication by `e^{-tμ}`.
///
/// Mass-preserving, and the discrete maximum principle is enforced as a
/// postcondition with 1e-12 slack.
pub fn heat_semigroup(f: &ScalarField, t: f64) -> Result<ScalarField> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let out = apply_spectral_multiplier(f, |mu| (-t * mu).exp());
    let slack = 1e-12 * f.sup_norm().max(1.0);
    let (lo, hi) = (f.min(), f.max());
    assert!(
        out.min() >= lo - slack && out.max() <= hi + slack,
        "heat semigroup violated the maximum principle: [{:.3e}, {:.3e}] vs [{:.3e}, {:.3e}]",
        out.min(),
        out.max(),
        lo,
        hi
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, tests::random_field};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn implicit_solve_rejects_negative_time() {
        let grid = TorusGrid::new(8).unwrap();
        let f = ScalarField::constant(grid, 1.0);
        assert!(matches!(
            implicit_heat_solve(&f, -0.1),
            Err(Error::NegativeTime(_))
        ));
        assert!(matches!(heat_semigroup(&f, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn tau_zero_is_identity_and_constants_are_fixed() {
        let grid = TorusGrid::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_field(grid, &mut rng);
        assert_eq!(implicit_heat_solve(&f, 0.0).unwrap(), f);
        assert_eq!(heat_semigroup(&f, 0.0).unwrap(), f);

        let c = ScalarField::constant(grid, 2.5);
        let w = implicit_heat_solve(&c, 1.7).unwrap();
        assert!(w.values().iter().all(|&v| (v - 2.5).abs() < 1e-12));
        let s = heat_semigroup(&c, 0.9).unwrap();
        assert!(s.values().iter().all(|&v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn implicit_solve_divides_single_mode() {
        // cos(2πx) with τ=1 is scaled by 1/(1+μ₁).
        let grid = TorusGrid::new(32).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| (2.0 * std::f64::consts::PI * x).cos());
        let tau = 1.0;
        let w = implicit_heat_solve(&f, tau).unwrap();
        let mu = stencil_eigenvalue(grid, 1, 0);
        let err = w
            .values()
            .iter()
            .zip(f.values())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b / (1.0 + tau * mu)).abs()));
        assert!(err < 1e-12, "mode division error {err:.3e}");
    }

    #[test]
    fn solves_residual_is_exact() {
        // (I - τΔ_h) applied back to the solution reproduces f.
        let grid = TorusGrid::new(24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_field(grid, &mut rng);
        let tau = 3e-4;
        let w = implicit_heat_solve(&f, tau).unwrap();
        let residual = w
            .zip_with(&crate::grid::laplacian(&w), |wi, li| wi - tau * li)
            .zip_with(&f, |a, b| a - b);
        assert!(residual.sup_norm() < 1e-10, "residual {:.3e}", residual.sup_norm());
    }

    #[test]
    fn both_solves_conserve_mass() {
        let grid = TorusGrid::new(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let f = random_field(grid, &mut rng);
        let m0 = integrate(&f);
        let w = implicit_heat_solve(&f, 0.02).unwrap();
        let s = heat_semigroup(&f, 0.37).unwrap();
        assert!((integrate(&w) - m0).abs() / m0.abs() < 1e-12);
        assert!((integrate(&s) - m0).abs() / m0.abs() < 1e-12);
    }

    #[test]
    fn semigroup_respects_extrema() {
        let grid = TorusGrid::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let f = random_field(grid, &mut rng);
        let s = heat_semigroup(&f, 0.05).unwrap();
        assert!(s.min() >= f.min() - 1e-12);
        assert!(s.max() <= f.max() + 1e-12);
    }
}
