//! Periodic grid geometry and calculus on the flat unit 2-torus.
//!
//! The domain is the unit square with both pairs of opposite edges
//! identified, discretized into `n × n` square cells of side `h = 1/n`.
//! Fields are cell-centered; sets are unions of closed cells; every
//! integral carries the weight `h²`, so the torus has total area 1.

mod io;
mod morphology;
mod spectral;

pub use io::{read_field, read_mask, write_field, write_mask};
pub use morphology::{excess_over, set_distance};

use crate::error::{Error, Result};

/// Minimum cells per side; below this the δ-set calculus degenerates.
pub const MIN_GRID: usize = 8;

/// Uniform periodic discretization of the unit 2-torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::BadParameter(format!(
                "grid side must be at least {MIN_GRID}, got {n}"
            )));
        }
        Ok(TorusGrid { n })
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell spacing, stored implicitly as the exact rational 1/n.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Area weight of a single cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major index of cell (row, col).
    pub fn idx(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    /// Center coordinates of cell (row, col); row advances y, col advances x.
    pub fn center(&self, row: usize, col: usize) -> (f64, f64) {
        let h = self.h();
        ((col as f64 + 0.5) * h, (row as f64 + 0.5) * h)
    }

    /// Shortest periodic displacement between two cell indices along one axis,
    /// in cell units.
    pub fn axis_gap(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        d.min(self.n - d)
    }

    /// Periodic Euclidean distance between two cell centers, in torus units.
    pub fn cell_distance(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        let dr = self.axis_gap(a.0, b.0) as f64;
        let dc = self.axis_gap(a.1, b.1) as f64;
        self.h() * (dr * dr + dc * dc).sqrt()
    }
}

/// Neumaier-compensated sum; keeps grid sums exact to a few ulps so that
/// the 1e-12 conservation contracts are testable rather than noise-bound.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Cell-centered real-valued function on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::BadParameter(format!(
                "field length {} does not match grid {}²",
                values.len(),
                grid.n()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::BadParameter("field contains non-finite entries".into()));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Sample `f(x, y)` at every cell center.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..n {
            for col in 0..n {
                let (x, y) = grid.center(row, col);
                values.push(f(x, y));
            }
        }
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.idx(row, col)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Pointwise superlevel set `{f > threshold}`.
    pub fn superlevel(&self, threshold: f64) -> MaskSet {
        MaskSet::from_bits(self.grid, self.values.iter().map(|&v| v > threshold).collect())
    }

    /// Pointwise closed superlevel set `{f ≥ threshold}`.
    pub fn superlevel_closed(&self, threshold: f64) -> MaskSet {
        MaskSet::from_bits(self.grid, self.values.iter().map(|&v| v >= threshold).collect())
    }
}

/// Boolean subset of the torus, a union of closed grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSet {
    grid: TorusGrid,
    bits: Vec<bool>,
}

impl MaskSet {
    pub fn from_bits(grid: TorusGrid, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), grid.len(), "mask length does not match grid");
        MaskSet { grid, bits }
    }

    pub fn empty(grid: TorusGrid) -> Self {
        MaskSet {
            grid,
            bits: vec![false; grid.len()],
        }
    }

    pub fn full(grid: TorusGrid) -> Self {
        MaskSet {
            grid,
            bits: vec![true; grid.len()],
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> bool) -> Self {
        let n = grid.n();
        let mut bits = Vec::with_capacity(grid.len());
        for row in 0..n {
            for col in 0..n {
                let (x, y) = grid.center(row, col);
                bits.push(f(x, y));
            }
        }
        MaskSet { grid, bits }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[self.grid.idx(row, col)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Area measure `h² · #cells`; always in [0, 1].
    pub fn area(&self) -> f64 {
        self.grid.cell_area() * self.count() as f64
    }

    pub fn is_empty_set(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn complement(&self) -> MaskSet {
        MaskSet {
            grid: self.grid,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn union(&self, other: &MaskSet) -> MaskSet {
        assert_eq!(self.grid, other.grid);
        MaskSet {
            grid: self.grid,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &MaskSet) -> MaskSet {
        assert_eq!(self.grid, other.grid);
        MaskSet {
            grid: self.grid,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &MaskSet) -> MaskSet {
        assert_eq!(self.grid, other.grid);
        MaskSet {
            grid: self.grid,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| a && !b)
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &MaskSet) -> bool {
        assert_eq!(self.grid, other.grid);
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(&a, &b)| !a || b)
    }

    pub fn symmetric_difference_area(&self, other: &MaskSet) -> f64 {
        assert_eq!(self.grid, other.grid);
        let cells = self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(&a, &b)| a != b)
            .count();
        self.grid.cell_area() * cells as f64
    }

    /// Indicator field with values in {0.0, 1.0}.
    pub fn indicator(&self) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Total mass `h² Σ f`; linear in `f`, exact on the unit-area torus.
pub fn integrate(f: &ScalarField) -> f64 {
    f.grid.cell_area() * compensated_sum(f.values.iter().copied())
}

/// Average of `f` over the cells of `mask`.
pub fn mean_over(f: &ScalarField, mask: &MaskSet) -> Result<f64> {
    assert_eq!(f.grid, mask.grid, "field and mask live on different grids");
    let cells = mask.count();
    if cells == 0 {
        return Err(Error::EmptyMask);
    }
    let sum = compensated_sum(
        f.values
            .iter()
            .zip(&mask.bits)
            .filter_map(|(&v, &b)| b.then_some(v)),
    );
    Ok(sum / cells as f64)
}

/// `h²`-weighted integral of `f` restricted to `mask`.
pub fn integrate_over(f: &ScalarField, mask: &MaskSet) -> f64 {
    assert_eq!(f.grid, mask.grid);
    f.grid.cell_area()
        * compensated_sum(
            f.values
                .iter()
                .zip(&mask.bits)
                .filter_map(|(&v, &b)| b.then_some(v)),
        )
}

/// Five-point periodic stencil `(f_E + f_W + f_N + f_S - 4 f_C) / h²`.
///
/// Discrete counterpart of the Laplace-Beltrami operator on the flat torus;
/// its output telescopes to zero mass.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid;
    let n = grid.n();
    let inv_h2 = (n * n) as f64;
    let mut out = vec![0.0; grid.len()];
    for row in 0..n {
        let up = if row == 0 { n - 1 } else { row - 1 };
        let down = if row == n - 1 { 0 } else { row + 1 };
        for col in 0..n {
            let left = if col == 0 { n - 1 } else { col - 1 };
            let right = if col == n - 1 { 0 } else { col + 1 };
            let c = f.values[grid.idx(row, col)];
            let sum = f.values[grid.idx(row, left)]
                + f.values[grid.idx(row, right)]
                + f.values[grid.idx(up, col)]
                + f.values[grid.idx(down, col)]
                - 4.0 * c;
            out[grid.idx(row, col)] = sum * inv_h2;
        }
    }
    ScalarField { grid, values: out }
}

pub use spectral::{heat_semigroup, implicit_heat_solve, stencil_eigenvalue};

pub use morphology::{boundary_annulus_area, dilate, distance_to, erode, hausdorff};

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_field(grid: TorusGrid, rng: &mut ChaCha8Rng) -> ScalarField {
        ScalarField::new(grid, (0..grid.len()).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    pub(crate) fn random_mask(grid: TorusGrid, rng: &mut ChaCha8Rng) -> MaskSet {
        loop {
            let bits: Vec<bool> = (0..grid.len()).map(|_| rng.gen_bool(0.5)).collect();
            let m = MaskSet::from_bits(grid, bits);
            if !m.is_empty_set() && !m.is_full() {
                return m;
            }
        }
    }

    #[test]
    fn integrate_constants() {
        let grid = TorusGrid::new(16).unwrap();
        assert_eq!(integrate(&ScalarField::constant(grid, 1.0)), 1.0);
        assert_eq!(integrate(&ScalarField::constant(grid, 0.0)), 0.0);
    }

    #[test]
    fn integrate_scaled_indicator_matches_direct_sum() {
        // c-scaled indicator of k cells integrates to c·k·h².
        let grid = TorusGrid::new(12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mask = random_mask(grid, &mut rng);
        let c = 0.37;
        let f = mask.indicator().map(|v| c * v);
        let k = mask.count() as f64;
        let expected = c * k * grid.cell_area();
        assert!((integrate(&f) - expected).abs() < 1e-15);
    }

    #[test]
    fn mean_over_rejects_empty_mask() {
        let grid = TorusGrid::new(8).unwrap();
        let f = ScalarField::constant(grid, 1.0);
        assert!(matches!(
            mean_over(&f, &MaskSet::empty(grid)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn mean_over_constant_and_full_set() {
        let grid = TorusGrid::new(8).unwrap();
        let f = ScalarField::constant(grid, 3.25);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_mask(grid, &mut rng);
        assert!((mean_over(&f, &a).unwrap() - 3.25).abs() < 1e-15);

        let g = random_field(grid, &mut rng);
        let full = MaskSet::full(grid);
        assert!((mean_over(&g, &full).unwrap() - integrate(&g)).abs() < 1e-13);
    }

    #[test]
    fn mean_over_two_valued_halves() {
        // 0.2 on the left half, 0.8 on the right half: the full-torus mean is 0.5.
        let grid = TorusGrid::new(16).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| if x < 0.5 { 0.2 } else { 0.8 });
        let m = mean_over(&f, &MaskSet::full(grid)).unwrap();
        assert!((m - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let grid = TorusGrid::new(8).unwrap();
        let out = laplacian(&ScalarField::constant(grid, 4.2));
        assert!(out.sup_norm() < 1e-11);
    }

    #[test]
    fn laplacian_eigenfunction() {
        // cos(2πx) is a discrete eigenfunction with eigenvalue -(2/h²)(1-cos(2πh)).
        let n = 32;
        let grid = TorusGrid::new(n).unwrap();
        let f = ScalarField::from_fn(grid, |x, _| (2.0 * std::f64::consts::PI * x).cos());
        let lap = laplacian(&f);
        let mu = stencil_eigenvalue(grid, 1, 0);
        let expected = f.map(|v| -mu * v);
        let err = lap
            .values()
            .iter()
            .zip(expected.values())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        assert!(err < 1e-9, "eigenfunction mismatch {err:.3e}");
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        let grid = TorusGrid::new(24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let f = random_field(grid, &mut rng);
            assert!(integrate(&laplacian(&f)).abs() < 1e-12);
        }
    }
}
