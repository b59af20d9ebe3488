//! Construction of coefficients and initial data: smooth bumps, the
//! Michaelis-Menten collar data u₀^ε, the monotone approximating sequence
//! u_n⁰, and the canonical test scenarios.

use crate::error::{Error, Result};
use crate::grid::{dilate, distance_to, MaskSet, ScalarField, TorusGrid};
use crate::variational::{alpha_of, capital_lambda, Coefficient, InitialData};

/// Polynomial smoothstep of order `k`: the unique degree-(2k+1) polynomial
/// with S(0) = 0, S(1) = 1 and k vanishing derivatives at both ends,
/// clamped outside [0, 1]. Order 1 is the classic 3s² - 2s³.
pub fn smoothstep(order: u32, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let n = order as i64;
    let mut acc = 0.0;
    for k in 0..=n {
        acc += binomial(n + k, k) * binomial(2 * n + 1, n - k) * (-s).powi(k as i32);
    }
    s.powi((n + 1) as i32) * acc
}

fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Nested pair of sets carrying a plateau-one bump profile.
#[derive(Debug, Clone)]
pub struct BumpSpec {
    inner: MaskSet,
    outer: MaskSet,
    profile_order: u32,
}

impl BumpSpec {
    /// Requires the discrete compact containment `dilate(inner, h) ⊆ outer`.
    pub fn new(inner: MaskSet, outer: MaskSet, profile_order: u32) -> Result<Self> {
        if profile_order < 1 {
            return Err(Error::BadParameter("profile order must be ≥ 1".into()));
        }
        if inner.is_empty_set() {
            return Err(Error::BadContainment("inner set is empty".into()));
        }
        let grown = dilate(&inner, inner.grid().h())?;
        if !grown.is_subset_of(&outer) {
            return Err(Error::BadContainment(
                "dilate(inner, h) is not contained in outer".into(),
            ));
        }
        Ok(BumpSpec {
            inner,
            outer,
            profile_order,
        })
    }

    pub fn inner(&self) -> &MaskSet {
        &self.inner
    }

    pub fn outer(&self) -> &MaskSet {
        &self.outer
    }
}

/// Builds ζ with ζ = 1 on `inner`, ζ > 0 on `outer`, ζ = 0 off `outer` and
/// 0 ≤ ζ ≤ 1, as a smoothstep of the normalized distance to the complement
/// of `outer`.
pub fn build_bump(spec: &BumpSpec) -> Result<ScalarField> {
    let grid = spec.inner.grid();
    let complement = spec.outer.complement();
    if complement.is_empty_set() {
        // outer = Γ: the constant-one profile satisfies all four properties.
        return Ok(ScalarField::constant(grid, 1.0));
    }
    let dist = distance_to(&complement)?;
    let d_ref = spec
        .inner
        .bits()
        .iter()
        .zip(dist.values())
        .filter_map(|(&b, &d)| b.then_some(d))
        .fold(f64::INFINITY, f64::min);
    debug_assert!(d_ref > 0.0, "containment guarantees inner avoids ∂outer");
    let order = spec.profile_order;
    Ok(dist.map(|d| smoothstep(order, d / d_ref)))
}

/// Regularized initial datum u₀^ε = u₀ + û₀^ε ζ and the bound û₀^ε ≤ m·ε.
#[derive(Debug, Clone)]
pub struct RegularizedInitial {
    pub field: ScalarField,
    /// Smallest m with u₀^ε ≤ m·ε on {u₀ = 0}.
    pub m_bound: f64,
    /// Collar width used for K_σ.
    pub sigma: f64,
}

/// Builds the collar datum of the regularized problem:
/// û₀^ε = ε α₀ g / ((1-g) - α₀ g) on K_σ = dilate({u₀=0}, σ), glued to u₀
/// by a cutoff that is 1 on {u₀ = 0} and 0 off K_σ.
///
/// By construction -f_ε(û₀^ε)(1-g) + α₀ g = 0 on {u₀ = 0}, so the collar
/// starts at the multiplier balance point.
pub fn build_regularized_initial(
    data: &InitialData,
    g: &Coefficient,
    eps: f64,
    theta: f64,
    sigma: f64,
) -> Result<RegularizedInitial> {
    if eps <= 0.0 {
        return Err(Error::BadParameter(format!("ε must be positive, got {eps}")));
    }
    if theta <= 0.0 {
        return Err(Error::NotNondegenerate(format!(
            "θ must be positive, got {theta}"
        )));
    }
    let grid = data.u0().grid();
    if sigma < grid.h() {
        return Err(Error::BadParameter(format!(
            "collar width σ = {sigma} is below one cell"
        )));
    }
    let zero_set = data.support().complement();
    if zero_set.is_empty_set() {
        return Ok(RegularizedInitial {
            field: data.u0().clone(),
            m_bound: 0.0,
            sigma,
        });
    }
    let k_sigma = dilate(&zero_set, sigma)?;
    let alpha0 = data.alpha0();

    // (1-g) - α₀ g ≥ θ/2 must hold throughout the collar.
    let mut m_bound = 0.0f64;
    for (&gv, &in_collar) in g.field().values().iter().zip(k_sigma.bits()) {
        if in_collar {
            let denom = (1.0 - gv) - alpha0 * gv;
            if denom < theta / 2.0 {
                return Err(Error::NotNondegenerate(format!(
                    "(1-g) - α₀g = {denom:.4e} < θ/2 = {:.4e} inside K_σ",
                    theta / 2.0
                )));
            }
            m_bound = m_bound.max(alpha0 * gv / denom);
        }
    }

    let zeta = build_bump(&BumpSpec::new(zero_set.clone(), k_sigma.clone(), 1)?)?;
    let mut values = data.u0().values().to_vec();
    for idx in 0..values.len() {
        let z = zeta.values()[idx];
        if z > 0.0 {
            let gv = g.field().values()[idx];
            let hat = eps * alpha0 * gv / ((1.0 - gv) - alpha0 * gv);
            values[idx] += hat * z;
        }
    }
    let field = ScalarField::new(grid, values)?;
    debug_assert!(field
        .values()
        .iter()
        .zip(data.u0().values())
        .all(|(&a, &b)| a >= b));
    Ok(RegularizedInitial {
        field,
        m_bound,
        sigma,
    })
}

/// Parameters of the approximating sequence: γ_n = gamma0 · ratioⁿ.
#[derive(Debug, Clone, Copy)]
pub struct JumpSequenceParams {
    pub gamma0: f64,
    pub ratio: f64,
    pub nmax: usize,
}

impl JumpSequenceParams {
    pub fn new(gamma0: f64, ratio: f64, nmax: usize) -> Result<Self> {
        if gamma0 <= 0.0 {
            return Err(Error::BadParameter("gamma0 must be positive".into()));
        }
        // ratio < 1/2 enforces 2γ_{n+1} < γ_n, keeping the r_n intervals
        // disjoint and increasing.
        if !(ratio > 0.0 && ratio < 0.5) {
            return Err(Error::BadParameter(format!(
                "ratio must lie in (0, 1/2), got {ratio}"
            )));
        }
        if nmax == 0 {
            return Err(Error::BadParameter("nmax must be at least 1".into()));
        }
        Ok(JumpSequenceParams { gamma0, ratio, nmax })
    }

    pub fn default_for(g: &Coefficient) -> Self {
        JumpSequenceParams {
            gamma0: 0.1 * (g.g1() - g.g0()),
            ratio: 1.0 / 3.0,
            nmax: 8,
        }
    }

    pub fn gamma(&self, n: usize) -> f64 {
        self.gamma0 * self.ratio.powi(n as i32)
    }
}

/// One member u_n⁰ = u₀ + γ_n ζ_n of the approximating sequence.
#[derive(Debug, Clone)]
pub struct JumpMember {
    pub field: ScalarField,
    pub gamma: f64,
    /// Level below which ζ_n vanishes.
    pub r_lo: f64,
    /// Level above which ζ_n is one.
    pub r_hi: f64,
    /// λ_n⁰ = mean of g over {u_n⁰ > 0}.
    pub lambda_n0: f64,
    /// |λ_n⁰ - Λ[u₀]|, the lemma's item-(6) diagnostic.
    pub lambda_gap: f64,
    /// |{u_n⁰ > 0} \ A⁰∗|, the item-(8) diagnostic.
    pub excess_area: f64,
}

/// The approximating sequence together with the target maximizer set.
#[derive(Debug, Clone)]
pub struct JumpSequence {
    pub members: Vec<JumpMember>,
    pub maximizer: MaskSet,
    pub lambda_target: f64,
}

/// Nearest realized grid value of g inside [lo, hi), preferring the value
/// closest to the interval midpoint.
fn pick_level(sorted_values: &[f64], lo: f64, hi: f64, n: usize) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    let mut best: Option<f64> = None;
    for &v in sorted_values {
        if v >= lo && v < hi {
            match best {
                Some(b) if (b - mid).abs() <= (v - mid).abs() => {}
                _ => best = Some(v),
            }
        }
    }
    best.ok_or(Error::SequenceExhausted { n, lo, hi })
}

/// Builds the non-increasing sequence u_n⁰ ↓ u₀ whose supports approximate
/// the maximizer set from outside.
///
/// ζ_n is a smoothstep of g between the realized levels r_n < r_{n+1},
/// chosen from [Λ - 2γ, Λ - γ); the half-open right end keeps
/// `u_n⁰ > 0 on {g ≥ Λ - γ_n}` exact on the grid.
pub fn build_jump_sequence(
    data: &InitialData,
    g: &Coefficient,
    lambda_target: f64,
    params: &JumpSequenceParams,
) -> Result<JumpSequence> {
    let grid = data.u0().grid();
    let mut sorted: Vec<f64> = g.field().values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();

    let mut levels = Vec::with_capacity(params.nmax + 1);
    for n in 1..=params.nmax + 1 {
        let gamma = params.gamma(n);
        levels.push(pick_level(
            &sorted,
            lambda_target - 2.0 * gamma,
            lambda_target - gamma,
            n,
        )?);
    }
    debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));

    let maximizer = g
        .field()
        .superlevel_closed(lambda_target)
        .union(data.support());

    let mut members: Vec<JumpMember> = Vec::with_capacity(params.nmax);
    for n in 1..=params.nmax {
        let gamma = params.gamma(n);
        let r_lo = levels[n - 1];
        let r_hi = levels[n];
        let width = r_hi - r_lo;
        let zeta = g.field().map(|gv| smoothstep(1, (gv - r_lo) / width));
        let field = data.u0().zip_with(&zeta, |u, z| u + gamma * z);

        // Lemma items (1)-(4) and the sup-norm identity hold by construction;
        // they are cheap, so assert them outright.
        let support = field.superlevel(0.0);
        if let Some(prev) = members.last() {
            assert!(
                field
                    .values()
                    .iter()
                    .zip(prev.field.values())
                    .all(|(&a, &b)| a <= b),
                "sequence ordering u_n ≤ u_(n-1) violated"
            );
            assert!(
                support.is_subset_of(&prev.field.superlevel(0.0)),
                "sequence supports are not nested"
            );
        }
        assert!(
            field
                .values()
                .iter()
                .zip(data.u0().values())
                .all(|(&a, &b)| a >= b),
            "sequence member dropped below u₀"
        );
        for (idx, &gv) in g.field().values().iter().enumerate() {
            if gv >= lambda_target - gamma {
                assert!(field.values()[idx] > 0.0, "item (3) failed at {idx}");
            }
            if gv <= lambda_target - 2.0 * gamma && data.u0().values()[idx] == 0.0 {
                assert!(field.values()[idx] == 0.0, "item (4) failed at {idx}");
            }
        }
        let sup_gap = field
            .values()
            .iter()
            .zip(data.u0().values())
            .fold(0.0f64, |m, (&a, &b)| m.max(a - b));
        assert!(
            (sup_gap - gamma).abs() < 1e-15,
            "‖u_n⁰ - u₀‖ = {sup_gap} differs from γ_n = {gamma}"
        );

        let lambda_n0 = crate::variational::lambda_of(g, &support)?;
        members.push(JumpMember {
            gamma,
            r_lo,
            r_hi,
            lambda_n0,
            lambda_gap: (lambda_n0 - lambda_target).abs(),
            excess_area: support.difference(&maximizer).area(),
            field,
        });
        let _ = grid;
    }

    Ok(JumpSequence {
        members,
        maximizer,
        lambda_target,
    })
}

/// Canonical scenarios used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Continuity,
    Jump,
    NonGeneric,
    Classical,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "continuity" => Ok(Scenario::Continuity),
            "jump" => Ok(Scenario::Jump),
            "nongeneric" => Ok(Scenario::NonGeneric),
            "classical" => Ok(Scenario::Classical),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Continuity => "continuity",
            Scenario::Jump => "jump",
            Scenario::NonGeneric => "nongeneric",
            Scenario::Classical => "classical",
        }
    }
}

/// Shortest periodic displacement from b to a on the unit circle.
fn periodic_delta(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    while d > 0.5 {
        d -= 1.0;
    }
    while d < -0.5 {
        d += 1.0;
    }
    d
}

fn disk_mask(grid: TorusGrid, center: (f64, f64), radius: f64) -> MaskSet {
    MaskSet::from_fn(grid, |x, y| {
        let dx = periodic_delta(x, center.0);
        let dy = periodic_delta(y, center.1);
        dx * dx + dy * dy <= radius * radius
    })
}

fn sinsin_coefficient(grid: TorusGrid) -> Coefficient {
    let tau = 2.0 * std::f64::consts::PI;
    let g = ScalarField::from_fn(grid, |x, y| 0.5 + 0.2 * (tau * x).sin() * (tau * y).sin());
    Coefficient::new(g, 0.3, 0.7).expect("sin-product stays inside [0.3, 0.7]")
}

/// Superlevel threshold of the continuity preset: {u₀ > 0} = {g > 0.6}.
pub const CONTINUITY_LEVEL: f64 = 0.6;

fn bump_field(grid: TorusGrid, center: (f64, f64), r_inner: f64, r_outer: f64, amp: f64) -> Result<ScalarField> {
    let spec = BumpSpec::new(
        disk_mask(grid, center, r_inner),
        disk_mask(grid, center, r_outer),
        1,
    )?;
    Ok(build_bump(&spec)?.map(|z| amp * z))
}

/// Builds the named scenario on the given grid.
///
/// All scenarios share g = 0.5 + 0.2 sin(2πx) sin(2πy) except `nongeneric`,
/// which flattens g to the constant 1/2 so that g = λ₀ on all of {u₀ = 0}.
pub fn preset_scenario(scenario: Scenario, grid: TorusGrid) -> Result<(Coefficient, InitialData)> {
    match scenario {
        Scenario::Continuity => {
            let g = sinsin_coefficient(grid);
            let c = CONTINUITY_LEVEL;
            let scale = g.g1() - c;
            // Order-2 profile: C² across the free boundary, so the early
            // sup-norm drift under the flow stays linear in t rather than
            // dropping to √t at a gradient kink.
            let u0 = g.field().map(|gv| smoothstep(2, (gv - c) / scale));
            let data = InitialData::new(u0, &g)?;
            Ok((g, data))
        }
        Scenario::Jump => {
            let g = sinsin_coefficient(grid);
            // Bump planted at a minimizer of g.
            let u0 = bump_field(grid, (0.25, 0.75), 0.05, 0.15, 0.5)?;
            let data = InitialData::new(u0, &g)?;
            Ok((g, data))
        }
        Scenario::NonGeneric => {
            let g = Coefficient::new(ScalarField::constant(grid, 0.5), 0.45, 0.55)?;
            let u0 = bump_field(grid, (0.25, 0.75), 0.05, 0.15, 0.5)?;
            let data = InitialData::new(u0, &g)?;
            Ok((g, data))
        }
        Scenario::Classical => {
            let g = sinsin_coefficient(grid);
            let u0 = bump_field(grid, (0.25, 0.25), 0.1, 0.2, 1.0)?;
            let data = InitialData::new(u0, &g)?;
            Ok((g, data))
        }
    }
}

/// Convenience wrapper: Λ[u₀] for preset data.
pub fn preset_capital_lambda(g: &Coefficient, data: &InitialData) -> Result<f64> {
    capital_lambda(g, data.support())
}

/// α₀ recomputed through the independent two-integral quotient.
pub fn alpha0_of(g: &Coefficient, data: &InitialData) -> Result<f64> {
    alpha_of(g, data.support())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{erode, hausdorff};
    use crate::variational::{classify, default_classify_tol, lambda_of, Regime};

    #[test]
    fn smoothstep_shape() {
        for order in 1..=3 {
            assert_eq!(smoothstep(order, -0.2), 0.0);
            assert_eq!(smoothstep(order, 0.0), 0.0);
            assert_eq!(smoothstep(order, 1.0), 1.0);
            assert_eq!(smoothstep(order, 1.7), 1.0);
            let mid = smoothstep(order, 0.5);
            assert!((mid - 0.5).abs() < 1e-12, "midpoint symmetry");
            for k in 1..20 {
                let s = k as f64 / 20.0;
                let v = smoothstep(order, s);
                assert!(v > 0.0 && v <= 1.0);
                assert!(smoothstep(order, s + 0.05) >= v, "monotone");
            }
        }
        // Order 1 is the cubic 3s² - 2s³.
        let s = 0.3;
        assert!((smoothstep(1, s) - (3.0 * s * s - 2.0 * s * s * s)).abs() < 1e-14);
    }

    #[test]
    fn bump_rejects_bad_containment() {
        let grid = TorusGrid::new(16).unwrap();
        let inner = disk_mask(grid, (0.5, 0.5), 0.2);
        // inner = outer: the h-dilation sticks out.
        assert!(matches!(
            BumpSpec::new(inner.clone(), inner, 1),
            Err(Error::BadContainment(_))
        ));
    }

    #[test]
    fn bump_has_the_four_claimed_properties() {
        let grid = TorusGrid::new(64).unwrap();
        let inner = disk_mask(grid, (0.5, 0.5), 0.1);
        let outer = disk_mask(grid, (0.5, 0.5), 0.2);
        let spec = BumpSpec::new(inner.clone(), outer.clone(), 1).unwrap();
        let zeta = build_bump(&spec).unwrap();
        for idx in 0..grid.len() {
            let z = zeta.values()[idx];
            assert!((0.0..=1.0).contains(&z));
            if inner.bits()[idx] {
                assert_eq!(z, 1.0, "ζ = 1 on the inner set");
            }
            if outer.bits()[idx] {
                assert!(z > 0.0, "ζ > 0 on the outer set");
            } else {
                assert_eq!(z, 0.0, "ζ = 0 off the outer set");
            }
        }
        // Center is deep inside the inner disk; distance > 0.2 lands outside.
        let n = grid.n();
        assert_eq!(zeta.get(n / 2, n / 2), 1.0);
    }

    #[test]
    fn bump_range_on_random_nested_masks() {
        use rand::SeedableRng;
        let grid = TorusGrid::new(32).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let seed = crate::grid::tests::random_mask(grid, &mut rng);
            let inner = erode(&seed, grid.h()).unwrap();
            if inner.is_empty_set() {
                continue;
            }
            let outer = dilate(&seed, 2.0 * grid.h()).unwrap();
            if outer.is_full() {
                continue;
            }
            let zeta = build_bump(&BumpSpec::new(inner, outer, 2).unwrap()).unwrap();
            assert!(zeta.min() >= 0.0 && zeta.max() <= 1.0);
        }
    }

    #[test]
    fn collar_balances_the_multiplier_identically() {
        let grid = TorusGrid::new(128).unwrap();
        let (g, data) = preset_scenario(Scenario::Continuity, grid).unwrap();
        let regime = classify(&g, &data, default_classify_tol(&g));
        let theta = match regime {
            Regime::Nondegenerate { theta } => theta,
            other => panic!("continuity preset must be nondegenerate, got {other:?}"),
        };
        let eps = 1e-3;
        let reg = build_regularized_initial(&data, &g, eps, theta, grid.h()).unwrap();

        // On {u₀ = 0}: -f_ε(û₀^ε)(1-g) + α₀ g = 0 to round-off.
        let zero_set = data.support().complement();
        let alpha0 = data.alpha0();
        for idx in 0..grid.len() {
            if zero_set.bits()[idx] {
                let u = reg.field.values()[idx];
                let gv = g.field().values()[idx];
                let residual = -(u / (u + eps)) * (1.0 - gv) + alpha0 * gv;
                assert!(residual.abs() < 1e-12, "balance residual {residual:.3e}");
                assert!(u <= reg.m_bound * eps + 1e-15);
            }
            assert!(reg.field.values()[idx] >= data.u0().values()[idx]);
        }

        // ε-sweep: max|u₀^ε - u₀| ≤ ε (2(1-g₀) - θ)/θ.
        for eps in [1e-2, 1e-3, 1e-4] {
            let reg = build_regularized_initial(&data, &g, eps, theta, grid.h()).unwrap();
            let gap = reg
                .field
                .values()
                .iter()
                .zip(data.u0().values())
                .fold(0.0f64, |m, (&a, &b)| m.max(a - b));
            let bound = eps * (2.0 * (1.0 - g.g0()) - theta) / theta;
            assert!(gap <= bound, "collar gap {gap:.3e} exceeds {bound:.3e}");
        }
    }

    #[test]
    fn constant_g_collar_is_degenerate() {
        let grid = TorusGrid::new(32).unwrap();
        let (g, data) = preset_scenario(Scenario::NonGeneric, grid).unwrap();
        // α₀ = 1 and g ≡ 1/2 make (1-g) - α₀g vanish identically: θ = 0.
        assert!(matches!(
            build_regularized_initial(&data, &g, 1e-3, 0.0, grid.h()),
            Err(Error::NotNondegenerate(_))
        ));
        assert!(matches!(
            build_regularized_initial(&data, &g, 1e-3, 0.2, grid.h()),
            Err(Error::NotNondegenerate(_))
        ));
    }

    #[test]
    fn jump_sequence_members_and_diagnostics() {
        // Eight members need nine realized levels of g below Λ; the sinsin
        // lattice is value-degenerate, so this runs at n = 320 where every
        // γ-interval holds several distinct values.
        let grid = TorusGrid::new(320).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let lambda = capital_lambda(&g, data.support()).unwrap();
        let params = JumpSequenceParams::new(0.1, 0.48, 8).unwrap();
        let seq = build_jump_sequence(&data, &g, lambda, &params).unwrap();
        assert_eq!(seq.members.len(), 8);

        // Item (6): the λ gap drops below γ_n/4 from some n† ≤ nmax onward.
        let mut n_dagger = None;
        for (i, m) in seq.members.iter().enumerate() {
            if m.lambda_gap < m.gamma / 4.0 {
                n_dagger.get_or_insert(i + 1);
            } else {
                n_dagger = None;
            }
            // λ_n⁰ never exceeds Λ.
            assert!(m.lambda_n0 <= lambda + 1e-12);
        }
        assert!(n_dagger.is_some(), "item (6) never engaged");

        // Item (8): excess over the maximizer is non-increasing and ends small.
        for w in seq.members.windows(2) {
            assert!(w[1].excess_area <= w[0].excess_area + 1e-15);
        }
        assert!(seq.members.last().unwrap().excess_area < 0.02);

        // Inclusion (9): supports enter dilate(A⁰∗, η) for η ∈ {4h, 8h}.
        for eta_cells in [4.0, 8.0] {
            let blown = dilate(&seq.maximizer, eta_cells * grid.h()).unwrap();
            let last = seq.members.last().unwrap().field.superlevel(0.0);
            assert!(last.is_subset_of(&blown));
        }
    }

    #[test]
    fn jump_sequence_exhausts_on_tiny_gamma() {
        let grid = TorusGrid::new(16).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let lambda = capital_lambda(&g, data.support()).unwrap();
        // At n = 16 the realized values of g are far too sparse for γ ~ 1e-9.
        let params = JumpSequenceParams::new(1e-8, 0.45, 2).unwrap();
        assert!(matches!(
            build_jump_sequence(&data, &g, lambda, &params),
            Err(Error::SequenceExhausted { .. })
        ));
    }

    #[test]
    fn presets_classify_as_documented() {
        let grid = TorusGrid::new(128).unwrap();

        let (g, data) = preset_scenario(Scenario::Continuity, grid).unwrap();
        let tol = default_classify_tol(&g);
        assert!(matches!(
            classify(&g, &data, tol),
            Regime::Nondegenerate { .. }
        ));
        // Support is exactly the superlevel set {g > c}.
        assert_eq!(
            data.support(),
            &g.field().superlevel(CONTINUITY_LEVEL)
        );

        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        assert!(matches!(classify(&g, &data, tol), Regime::Jump { .. }));
        let lambda = capital_lambda(&g, data.support()).unwrap();
        assert!(
            lambda > data.lambda0() + 0.02,
            "jump preset gap Λ - λ₀ = {}",
            lambda - data.lambda0()
        );

        let (g, data) = preset_scenario(Scenario::NonGeneric, grid).unwrap();
        assert!(matches!(
            classify(&g, &data, default_classify_tol(&g)),
            Regime::NonGeneric { .. }
        ));

        assert!(matches!(
            Scenario::parse("unknown-thing"),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn nondegenerate_preset_has_lambda_equal_lambda0() {
        let grid = TorusGrid::new(64).unwrap();
        let (g, data) = preset_scenario(Scenario::Continuity, grid).unwrap();
        let lambda = capital_lambda(&g, data.support()).unwrap();
        assert!((lambda - data.lambda0()).abs() < 1e-9);
        let lam_direct = lambda_of(&g, data.support()).unwrap();
        assert!((lambda - lam_direct).abs() < 1e-9);
    }

    #[test]
    fn jump_sequence_supports_converge_in_hausdorff() {
        let grid = TorusGrid::new(128).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let lambda = capital_lambda(&g, data.support()).unwrap();
        let params = JumpSequenceParams::new(0.1, 0.48, 4).unwrap();
        let seq = build_jump_sequence(&data, &g, lambda, &params).unwrap();
        let mut prev = f64::INFINITY;
        for m in &seq.members {
            let d = hausdorff(&m.field.superlevel(0.0), &seq.maximizer).unwrap();
            assert!(d <= prev + 1e-12);
            prev = d;
        }
    }
}
