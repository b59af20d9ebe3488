//! The multiplier λ, its variational envelope Λ, and the regime
//! classification of initial data.
//!
//! For a coefficient g and a set S, `Λ_S = sup { mean of g over A : A ⊇ S }`.
//! The supremum is attained by a superlevel union `{g ≥ Λ_S} ∪ S`, which
//! reduces the set optimization to a scalar fixed point: Λ is the unique
//! crossing of `μ ↦ mean(g over {g ≥ μ} ∪ S) - μ` from nonnegative to
//! negative. `capital_lambda` locates it by bisection; `capital_lambda_scan`
//! is the independent threshold-scan oracle kept alongside it permanently.

use crate::error::{Error, Result};
use crate::grid::{integrate_over, mean_over, MaskSet, ScalarField};

/// Bracket width at which the Λ bisection terminates.
pub const LAMBDA_BISECTION_TOL: f64 = 1e-12;

/// Reaction coefficient g with certified bounds `0 < g0 ≤ g ≤ g1 < 1`.
#[derive(Debug, Clone)]
pub struct Coefficient {
    g: ScalarField,
    g0: f64,
    g1: f64,
}

impl Coefficient {
    pub fn new(g: ScalarField, g0: f64, g1: f64) -> Result<Self> {
        let (min, max) = (g.min(), g.max());
        if !(0.0 < g0 && g0 <= min && max <= g1 && g1 < 1.0) {
            return Err(Error::BadParameter(format!(
                "coefficient bounds violated: need 0 < {g0} ≤ {min} ≤ {max} ≤ {g1} < 1"
            )));
        }
        Ok(Coefficient { g, g0, g1 })
    }

    pub fn field(&self) -> &ScalarField {
        &self.g
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn g1(&self) -> f64 {
        self.g1
    }
}

/// Nonnegative initial datum with its support, multiplier and α value.
#[derive(Debug, Clone)]
pub struct InitialData {
    u0: ScalarField,
    support: MaskSet,
    lambda0: f64,
    alpha0: f64,
}

impl InitialData {
    pub fn new(u0: ScalarField, g: &Coefficient) -> Result<Self> {
        if u0.min() < 0.0 {
            return Err(Error::BadParameter("initial data must be nonnegative".into()));
        }
        let support = u0.superlevel(0.0);
        if support.is_empty_set() {
            return Err(Error::BadParameter("initial support has zero area".into()));
        }
        let lambda0 = lambda_of(g, &support)?;
        let alpha0 = alpha_of(g, &support)?;
        debug_assert!((alpha0 - (1.0 / lambda0 - 1.0)).abs() < 1e-12);
        Ok(InitialData {
            u0,
            support,
            lambda0,
            alpha0,
        })
    }

    pub fn u0(&self) -> &ScalarField {
        &self.u0
    }

    pub fn support(&self) -> &MaskSet {
        &self.support
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }
}

/// Continuity/jump classification of initial data.
///
/// `Nondegenerate`: g < λ₀ strictly on {u₀ = 0}, with margin
/// θ = min over {u₀ = 0} of (1-g) - α₀g > 0; λ and the support are
/// right-continuous at t = 0.
/// `Jump`: {u₀ = 0} ∩ {g > λ₀} has positive area; λ jumps to Λ[u₀].
/// `NonGeneric`: neither, i.e. g = λ₀ on part of {u₀ = 0} (up to the
/// classification tolerance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Nondegenerate { theta: f64 },
    Jump { violation_area: f64 },
    NonGeneric { equality_area: f64 },
}

impl Regime {
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Nondegenerate { .. } => "nondegenerate",
            Regime::Jump { .. } => "jump",
            Regime::NonGeneric { .. } => "nongeneric",
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            Regime::Nondegenerate { theta } => *theta,
            _ => 0.0,
        }
    }

    pub fn violation_area(&self) -> f64 {
        match self {
            Regime::Jump { violation_area } => *violation_area,
            _ => 0.0,
        }
    }
}

/// `λ = mean of g over A`, the Lagrange multiplier of a support A.
pub fn lambda_of(g: &Coefficient, a: &MaskSet) -> Result<f64> {
    mean_over(g.field(), a)
}

/// `α = ∫_A (1-g) / ∫_A g`; satisfies α = 1/λ - 1.
pub fn alpha_of(g: &Coefficient, a: &MaskSet) -> Result<f64> {
    if a.is_empty_set() {
        return Err(Error::EmptyMask);
    }
    let num = integrate_over(&g.field().map(|v| 1.0 - v), a);
    let den = integrate_over(g.field(), a);
    Ok(num / den)
}

fn candidate_mean(g: &Coefficient, s: &MaskSet, mu: f64) -> f64 {
    let set = g.field().superlevel_closed(mu).union(s);
    mean_over(g.field(), &set).expect("superlevel union contains S, hence nonempty")
}

/// `Λ_S = sup { mean of g over A : A ⊇ S }`, by monotone bisection on the
/// superlevel threshold.
///
/// The crossing function `ψ(μ) = mean(g over {g ≥ μ} ∪ S) - μ` is ≥ 0 on
/// `[λ_S, Λ_S]` and < 0 above, so the bracket `[λ_S, g1]` narrows to Λ.
pub fn capital_lambda(g: &Coefficient, s: &MaskSet) -> Result<f64> {
    if s.is_empty_set() {
        return Err(Error::EmptyMask);
    }
    let mut lo = lambda_of(g, s)?;
    let mut hi = g.g1();
    if candidate_mean(g, s, hi) >= hi {
        // Only possible when g is constant at its upper bound on the
        // candidate set; the supremum is attained there.
        return Ok(candidate_mean(g, s, hi));
    }
    while hi - lo > LAMBDA_BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if candidate_mean(g, s, mid) >= mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(candidate_mean(g, s, lo))
}

/// Brute-force threshold scan: evaluates the candidate mean at every distinct
/// grid value of g (plus the bare set S) and takes the maximum.
///
/// Permanent oracle for [`capital_lambda`]; kept deliberately free of the
/// bisection logic.
pub fn capital_lambda_scan(g: &Coefficient, s: &MaskSet) -> Result<f64> {
    if s.is_empty_set() {
        return Err(Error::EmptyMask);
    }
    let mut best = lambda_of(g, s)?;
    let mut values: Vec<f64> = g.field().values().to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    for v in values {
        let m = candidate_mean(g, s, v);
        if m > best {
            best = m;
        }
    }
    Ok(best)
}

/// Canonical maximizer `{g ≥ Λ_S} ∪ S`; its mean equals Λ_S and every other
/// maximizer is contained in it up to cells with g = Λ_S.
pub fn maximizer_set(g: &Coefficient, s: &MaskSet) -> Result<MaskSet> {
    let lambda = capital_lambda(g, s)?;
    Ok(g.field().superlevel_closed(lambda).union(s))
}

/// Default classification tolerance for equality with λ₀.
pub fn default_classify_tol(g: &Coefficient) -> f64 {
    1e-9 * (g.g1() - g.g0()).max(f64::MIN_POSITIVE)
}

/// Classifies initial data into the continuity, jump, or non-generic regime.
///
/// Cells of {u₀ = 0} with `g > λ₀ + tol` count toward the jump violation
/// area; cells with `|g - λ₀| ≤ tol` count as non-generic equality mass.
pub fn classify(g: &Coefficient, data: &InitialData, tol: f64) -> Regime {
    let lambda0 = data.lambda0();
    let alpha0 = data.alpha0();
    let zero_set = data.support().complement();
    let cell = zero_set.grid().cell_area();

    let mut violation_cells = 0usize;
    let mut equality_cells = 0usize;
    let mut theta = f64::INFINITY;
    for (&gv, &off) in g.field().values().iter().zip(zero_set.bits()) {
        if !off {
            continue;
        }
        if gv > lambda0 + tol {
            violation_cells += 1;
        } else if gv >= lambda0 - tol {
            equality_cells += 1;
        }
        theta = theta.min((1.0 - gv) - alpha0 * gv);
    }

    if violation_cells > 0 {
        Regime::Jump {
            violation_area: cell * violation_cells as f64,
        }
    } else if equality_cells > 0 {
        Regime::NonGeneric {
            equality_area: cell * equality_cells as f64,
        }
    } else {
        Regime::Nondegenerate { theta }
    }
}

/// Area of the plateau `{|g - Λ| < tol}` on which maximizers are non-unique.
pub fn plateau_area(g: &Coefficient, lambda: f64, tol: f64) -> f64 {
    let cell = g.field().grid().cell_area();
    let cells = g
        .field()
        .values()
        .iter()
        .filter(|&&v| (v - lambda).abs() < tol)
        .count();
    cell * cells as f64
}
