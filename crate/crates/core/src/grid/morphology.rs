//! Periodic distance transforms and the δ-set calculus.
//!
//! `A_{+δ} = {x : d(x, A) ≤ δ}` and `A_{-δ} = {x : d(x, Aᶜ) ≥ δ}`, with the
//! distance taken between cell centers under the flat periodic metric. The
//! transform is exact: the mask is tiled 3×3 so the two-pass squared
//! Euclidean distance transform sees every periodic replica that can be
//! nearest (periodic distances never exceed n·h/√2).

use crate::error::{Error, Result};
use crate::grid::{MaskSet, ScalarField};

const INF: f64 = 1e20;

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn dt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}

/// Squared periodic distances in cell units from every cell to `mask`.
fn periodic_squared_distances(mask: &MaskSet) -> Vec<f64> {
    let n = mask.grid().n();
    let m = 3 * n;
    let mut field = vec![INF; m * m];
    for row in 0..n {
        for col in 0..n {
            if mask.get(row, col) {
                for tr in 0..3 {
                    for tc in 0..3 {
                        field[(tr * n + row) * m + (tc * n + col)] = 0.0;
                    }
                }
            }
        }
    }

    let mut d = vec![0.0; m];
    let mut v = vec![0usize; m];
    let mut z = vec![0.0; m + 1];
    let mut col_buf = vec![0.0; m];

    // Columns first, then rows.
    for col in 0..m {
        for row in 0..m {
            col_buf[row] = field[row * m + col];
        }
        dt_1d(&col_buf, &mut d, &mut v, &mut z);
        for row in 0..m {
            field[row * m + col] = d[row];
        }
    }
    let mut row_buf = vec![0.0; m];
    for row in 0..m {
        row_buf.copy_from_slice(&field[row * m..(row + 1) * m]);
        dt_1d(&row_buf, &mut d, &mut v, &mut z);
        field[row * m..(row + 1) * m].copy_from_slice(&d);
    }

    let mut out = vec![0.0; n * n];
    for row in 0..n {
        for col in 0..n {
            out[row * n + col] = field[(n + row) * m + (n + col)];
        }
    }
    out
}

/// Periodic Euclidean distance from every cell center to the nearest cell of
/// `mask`, exactly zero on the mask itself.
pub fn distance_to(mask: &MaskSet) -> Result<ScalarField> {
    if mask.is_empty_set() {
        return Err(Error::EmptyMask);
    }
    let grid = mask.grid();
    let h = grid.h();
    let values = periodic_squared_distances(mask)
        .into_iter()
        .map(|d2| h * d2.sqrt())
        .collect();
    ScalarField::new(grid, values)
}

/// Outer δ-set `A_{+δ} = {d(·, A) ≤ δ}`.
pub fn dilate(mask: &MaskSet, delta: f64) -> Result<MaskSet> {
    if delta < 0.0 {
        return Err(Error::BadParameter(format!("dilation radius {delta} < 0")));
    }
    let dist = distance_to(mask)?;
    Ok(MaskSet::from_bits(
        mask.grid(),
        dist.values().iter().map(|&d| d <= delta).collect(),
    ))
}

/// Inner δ-set `A_{-δ} = {x ∈ A : d(x, Aᶜ) ≥ δ}`.
///
/// Restricting to `A` only matters at `δ = 0`, where it makes the grid-level
/// identity `erode(A, 0) = A` hold; for `δ > 0` the two definitions agree.
/// `erode(Γ, δ) = Γ` since the complement is empty.
pub fn erode(mask: &MaskSet, delta: f64) -> Result<MaskSet> {
    if delta < 0.0 {
        return Err(Error::BadParameter(format!("erosion radius {delta} < 0")));
    }
    let complement = mask.complement();
    if complement.is_empty_set() {
        return Ok(mask.clone());
    }
    let dist = distance_to(&complement)?;
    Ok(MaskSet::from_bits(
        mask.grid(),
        dist.values()
            .iter()
            .zip(mask.bits())
            .map(|(&d, &inside)| inside && d >= delta)
            .collect(),
    ))
}

/// Symmetric Hausdorff distance `max(sup_A d(·,B), sup_B d(·,A))`.
pub fn hausdorff(a: &MaskSet, b: &MaskSet) -> Result<f64> {
    if a.is_empty_set() || b.is_empty_set() {
        return Err(Error::EmptyMask);
    }
    let d_to_b = distance_to(b)?;
    let d_to_a = distance_to(a)?;
    Ok(one_sided_sup(a, &d_to_b).max(one_sided_sup(b, &d_to_a)))
}

fn one_sided_sup(mask: &MaskSet, dist: &ScalarField) -> f64 {
    mask.bits()
        .iter()
        .zip(dist.values())
        .filter_map(|(&b, &d)| b.then_some(d))
        .fold(0.0f64, f64::max)
}

/// Largest distance from a cell of `mask` to `target`; 0 when `mask ⊆ target`.
pub fn excess_over(mask: &MaskSet, target: &MaskSet) -> Result<f64> {
    if mask.is_empty_set() {
        return Ok(0.0);
    }
    if target.is_empty_set() {
        return Err(Error::EmptyMask);
    }
    Ok(one_sided_sup(mask, &distance_to(target)?))
}

/// Minimum distance between two nonempty sets.
pub fn set_distance(a: &MaskSet, b: &MaskSet) -> Result<f64> {
    if a.is_empty_set() || b.is_empty_set() {
        return Err(Error::EmptyMask);
    }
    let d_to_b = distance_to(b)?;
    Ok(a.bits()
        .iter()
        .zip(d_to_b.values())
        .filter_map(|(&m, &d)| m.then_some(d))
        .fold(f64::INFINITY, f64::min))
}

/// `|A_{+δ}| - |A_{-δ}|`, the area of the δ-annulus around ∂A.
///
/// Vanishing as δ → 0 is the discrete regularity criterion for `A`.
pub fn boundary_annulus_area(mask: &MaskSet, delta: f64) -> Result<f64> {
    if mask.is_empty_set() || mask.complement().is_empty_set() {
        return Err(Error::EmptyMask);
    }
    let outer = dilate(mask, delta)?;
    let inner = erode(mask, delta)?;
    Ok(outer.area() - inner.area())
}
