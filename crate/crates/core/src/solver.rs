//! Time integration of the regularized nonlocal problem, the approximating
//! sequence, and the classical obstacle problem.
//!
//! One step of the regularized flow reads the multiplier off the current
//! state,
//!
//! ```text
//! α = ∫(1-g) f_ε(u) / ∫ g,       f_ε(u) = u/(u+ε),
//! ```
//!
//! applies the reaction explicitly and the diffusion either through the
//! exact spectral semigroup (imex) or the explicit stencil. The α quadrature
//! makes the reaction integrate to zero, so total mass is exact to round-off
//! regardless of dt. Using e^{dtΔ} rather than the backward-Euler resolvent
//! keeps the comparison with S(t)u₀ - t exact step by step: the resolvent
//! does not dominate the semigroup pointwise on rough data, the semigroup
//! trivially does.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{
    hausdorff, heat_semigroup, implicit_heat_solve, integrate, laplacian, MaskSet, ScalarField,
    TorusGrid,
};
use crate::variational::Coefficient;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Imex,
    Explicit,
}

impl Scheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "imex" => Ok(Scheme::Imex),
            "explicit" => Ok(Scheme::Explicit),
            other => Err(Error::BadParameter(format!("unknown scheme `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Imex => "imex",
            Scheme::Explicit => "explicit",
        }
    }
}

/// Parameters of one trajectory.
#[derive(Debug, Clone, Copy)]
pub struct SolverParams {
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Nondegeneracy margin θ; 0 when unknown (jump regime).
    pub theta: f64,
    /// Support-threshold multiplier: the support is read off as {u > L₀ ε}.
    pub l0: f64,
    pub scheme: Scheme,
    pub record_every: usize,
}

impl SolverParams {
    pub fn validate(&self, grid: TorusGrid) -> Result<()> {
        if self.eps <= 0.0 {
            return Err(Error::BadParameter(format!("ε must be positive, got {}", self.eps)));
        }
        if self.dt <= 0.0 {
            return Err(Error::BadParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if self.t_end < 0.0 {
            return Err(Error::BadParameter(format!("T must be ≥ 0, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::BadParameter("record_every must be ≥ 1".into()));
        }
        if self.l0 <= 0.0 {
            return Err(Error::BadParameter(format!("L₀ must be positive, got {}", self.l0)));
        }
        if self.scheme == Scheme::Explicit {
            let h = grid.h();
            let limit = h * h / 4.0;
            if self.dt > limit * (1.0 + 1e-12) {
                return Err(Error::BadParameter(format!(
                    "explicit scheme needs dt ≤ h²/4 = {limit:.3e}, got {:.3e}",
                    self.dt
                )));
            }
        }
        Ok(())
    }

    /// L₀ for the nondegenerate regime: L₀ ≥ 2m and (1-g₀)/(L₀+1) ≤ θ/4.
    pub fn l0_for_theta(g0: f64, theta: f64, m: f64) -> f64 {
        (2.0 * m).max(4.0 * (1.0 - g0) / theta - 1.0)
    }

    /// Default L₀ when θ is unavailable (jump regime).
    pub fn l0_default(g0: f64) -> f64 {
        4.0 * (1.0 - g0) / g0
    }

    /// The explicit Michaelis-Menten reaction is monotone and positivity
    /// preserving when dt·(1-g₀) ≤ ε.
    pub fn reaction_monotone(&self, g0: f64) -> bool {
        self.dt * (1.0 - g0) <= self.eps
    }
}

/// Multiplier pair of a state: α from the Michaelis-Menten quadrature over
/// all of Γ, and λ = 1/(1+α).
pub fn multiplier(u: &ScalarField, g: &Coefficient, eps: f64) -> (f64, f64) {
    let feps = u.map(|v| v / (v + eps));
    let num = integrate(&feps.zip_with(g.field(), |f, gv| (1.0 - gv) * f));
    let den = integrate(g.field());
    let alpha = num / den;
    (1.0 / (1.0 + alpha), alpha)
}

/// One step of the regularized flow. Returns the updated field and the
/// multiplier pair read off the pre-step state.
pub fn step_regularized(
    u: &ScalarField,
    g: &Coefficient,
    p: &SolverParams,
) -> Result<(ScalarField, f64, f64)> {
    let (lambda, alpha) = multiplier(u, g, p.eps);
    let reacted = u.zip_with(g.field(), |uv, gv| {
        let f = uv / (uv + p.eps);
        uv + p.dt * (-(1.0 - gv) * f + alpha * gv)
    });
    let next = match p.scheme {
        Scheme::Imex => heat_semigroup(&reacted, p.dt)?,
        Scheme::Explicit => reacted.zip_with(&laplacian(u), |v, l| v + p.dt * l),
    };
    let min = next.min();
    if min < -1e-12 {
        return Err(Error::NegativityBreach { min });
    }
    Ok((next, lambda, alpha))
}

/// Threshold support `{u > L₀ ε}`: separates the coincidence set (where the
/// solution rides at the O(ε) collar height) from genuine positivity.
pub fn support_of(u: &ScalarField, p: &SolverParams) -> MaskSet {
    u.superlevel(p.l0 * p.eps)
}

/// Time series of one run. All scalar lists share the record times; the
/// field snapshots and support masks are stored at the same cadence.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub mass: Vec<f64>,
    pub support_area: Vec<f64>,
    pub snapshots: Vec<(f64, ScalarField)>,
    pub support_masks: Vec<(f64, MaskSet)>,
}

impl Trajectory {
    fn new() -> Self {
        Trajectory {
            times: Vec::new(),
            lambda: Vec::new(),
            alpha: Vec::new(),
            mass: Vec::new(),
            support_area: Vec::new(),
            snapshots: Vec::new(),
            support_masks: Vec::new(),
        }
    }

    fn record(&mut self, t: f64, u: &ScalarField, lambda: f64, alpha: f64, p: &SolverParams) {
        let mask = support_of(u, p);
        self.times.push(t);
        self.lambda.push(lambda);
        self.alpha.push(alpha);
        self.mass.push(integrate(u));
        self.support_area.push(mask.area());
        self.snapshots.push((t, u.clone()));
        self.support_masks.push((t, mask));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &ScalarField {
        &self.snapshots.last().expect("trajectory has records").1
    }

    /// Relative mass drift over the whole horizon.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass
            .iter()
            .fold(0.0f64, |worst, &m| worst.max((m - m0).abs()))
            / m0.abs()
    }

    /// CSV dump: t, lambda, alpha, mass, support_area, hausdorff_to_initial.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "t,lambda,alpha,mass,support_area,hausdorff_to_initial")?;
        let initial = &self.support_masks[0].1;
        for k in 0..self.len() {
            let mask = &self.support_masks[k].1;
            let hd = if initial.is_empty_set() || mask.is_empty_set() {
                f64::NAN
            } else {
                hausdorff(mask, initial)?
            };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt(self.times[k]),
                fmt(self.lambda[k]),
                fmt(self.alpha[k]),
                fmt(self.mass[k]),
                fmt(self.support_area[k]),
                fmt(hd)
            )?;
        }
        Ok(())
    }
}

/// Deterministic float formatting shared by every CSV writer.
pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.12e}")
    }
}

fn step_count(p: &SolverParams) -> usize {
    if p.t_end <= 0.0 {
        0
    } else {
        (p.t_end / p.dt).round().max(1.0) as usize
    }
}

/// Runs the regularized problem from `u0eps`, recording every
/// `record_every` steps (plus the initial and final states).
pub fn run_regularized(
    u0eps: &ScalarField,
    g: &Coefficient,
    p: &SolverParams,
) -> Result<Trajectory> {
    p.validate(u0eps.grid())?;
    if u0eps.min() < 0.0 {
        return Err(Error::BadParameter("initial data must be nonnegative".into()));
    }
    let steps = step_count(p);
    let mut traj = Trajectory::new();
    let mut u = u0eps.clone();
    let (l0, a0) = multiplier(&u, g, p.eps);
    traj.record(0.0, &u, l0, a0, p);
    for k in 1..=steps {
        let (next, _, _) = step_regularized(&u, g, p)?;
        u = next;
        if k % p.record_every == 0 || k == steps {
            let t = k as f64 * p.dt;
            let (lam, alp) = multiplier(&u, g, p.eps);
            traj.record(t, &u, lam, alp, p);
        }
    }
    Ok(traj)
}

/// Runs every member of an approximating sequence under identical params.
pub fn run_approx_sequence(
    seq: &[ScalarField],
    g: &Coefficient,
    p: &SolverParams,
) -> Result<Vec<Trajectory>> {
    seq.iter().map(|u0| run_regularized(u0, g, p)).collect()
}

/// Time-indexed source f(·, t) of the classical problem.
pub struct ClassicalSource {
    f: Box<dyn Fn(f64) -> ScalarField + Send + Sync>,
}

impl ClassicalSource {
    pub fn new(f: impl Fn(f64) -> ScalarField + Send + Sync + 'static) -> Self {
        ClassicalSource { f: Box::new(f) }
    }

    /// Time-constant source.
    pub fn steady(field: ScalarField) -> Self {
        ClassicalSource {
            f: Box::new(move |_| field.clone()),
        }
    }

    pub fn at(&self, t: f64) -> ScalarField {
        (self.f)(t)
    }
}

/// One projected IMEX step of the classical obstacle problem
/// `∂_t u - Δu = f H(u)`, `u ≥ 0`.
///
/// The source acts wherever `u > 0` or `f > 0`; the latter is the
/// complementarity activation (a region with f > 0 cannot stay coincident),
/// and together with the final truncation this is equivalent to applying f
/// unconditionally and projecting back onto u ≥ 0.
pub fn step_classical(
    u: &ScalarField,
    src: &ClassicalSource,
    t: f64,
    p: &SolverParams,
) -> Result<ScalarField> {
    let f = src.at(t);
    let reacted = u.zip_with(&f, |uv, fv| (uv + p.dt * fv).max(0.0));
    let diffused = match p.scheme {
        Scheme::Imex => implicit_heat_solve(&reacted, p.dt)?,
        Scheme::Explicit => reacted.zip_with(&laplacian(u), |v, l| v + p.dt * l),
    };
    Ok(diffused.map(|v| v.max(0.0)))
}

/// Runs the classical problem; the multiplier columns are not defined for
/// this flow and are recorded as NaN.
pub fn run_classical(
    u0: &ScalarField,
    src: &ClassicalSource,
    p: &SolverParams,
) -> Result<Trajectory> {
    p.validate(u0.grid())?;
    if u0.min() < 0.0 {
        return Err(Error::BadParameter("initial data must be nonnegative".into()));
    }
    let steps = step_count(p);
    let mut traj = Trajectory::new();
    let mut u = u0.clone();
    traj.record(0.0, &u, f64::NAN, f64::NAN, p);
    for k in 1..=steps {
        u = step_classical(&u, src, (k - 1) as f64 * p.dt, p)?;
        if k % p.record_every == 0 || k == steps {
            traj.record(k as f64 * p.dt, &u, f64::NAN, f64::NAN, p);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{heat_semigroup, MaskSet, TorusGrid};
    use crate::initdata::{preset_scenario, Scenario};

    fn small_params(eps: f64, dt: f64, t_end: f64) -> SolverParams {
        SolverParams {
            eps,
            dt,
            t_end,
            theta: 0.0,
            l0: SolverParams::l0_default(0.3),
            scheme: Scheme::Imex,
            record_every: 8,
        }
    }

    #[test]
    fn homogeneous_state_is_a_fixed_point() {
        let grid = TorusGrid::new(16).unwrap();
        let g = Coefficient::new(ScalarField::constant(grid, 0.5), 0.4, 0.6).unwrap();
        let u = ScalarField::constant(grid, 0.7);
        let p = small_params(1e-3, 1e-5, 0.0);
        let (next, lambda, alpha) = step_regularized(&u, &g, &p).unwrap();
        // α balances the reaction exactly, so the RHS vanishes identically
        // and the heat solve fixes constants.
        let diff = next
            .values()
            .iter()
            .fold(0.0f64, |m, &v| m.max((v - 0.7).abs()));
        assert!(diff < 1e-13, "fixed point drifted by {diff:.3e}");
        assert!((alpha - (1.0 / lambda - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn mass_is_conserved_over_many_steps() {
        let grid = TorusGrid::new(32).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let p = small_params(1e-3, 2e-5, 0.0);
        let mut u = data.u0().clone();
        let m0 = integrate(&u);
        for _ in 0..1000 {
            let (next, _, _) = step_regularized(&u, &g, &p).unwrap();
            u = next;
        }
        let drift = (integrate(&u) - m0).abs() / m0;
        assert!(drift < 1e-10, "relative drift {drift:.3e}");
        // Strict interior positivity develops immediately in imex mode.
        assert!(u.min() > 0.0);
    }

    #[test]
    fn richardson_self_consistency() {
        // One step of 2dt vs two steps of dt differ at O(dt²).
        let grid = TorusGrid::new(32).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let u0 = data.u0().clone();
        let mut gaps = Vec::new();
        for &dt in &[4e-5, 2e-5, 1e-5] {
            let big = small_params(1e-2, 2.0 * dt, 0.0);
            let half = small_params(1e-2, dt, 0.0);
            let (one, _, _) = step_regularized(&u0, &g, &big).unwrap();
            let (mid, _, _) = step_regularized(&u0, &g, &half).unwrap();
            let (two, _, _) = step_regularized(&mid, &g, &half).unwrap();
            gaps.push(
                one.values()
                    .iter()
                    .zip(two.values())
                    .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs())),
            );
        }
        // Quartering dt should cut the one-vs-two-step gap by ~4 each time.
        assert!(gaps[1] < gaps[0] * 0.4, "{gaps:?}");
        assert!(gaps[2] < gaps[1] * 0.4, "{gaps:?}");
    }

    #[test]
    fn explicit_scheme_needs_small_dt() {
        let grid = TorusGrid::new(32).unwrap();
        let h2 = grid.h() * grid.h();
        let mut p = small_params(1e-3, h2, 1e-3);
        p.scheme = Scheme::Explicit;
        assert!(p.validate(grid).is_err());
        p.dt = h2 / 4.0;
        assert!(p.validate(grid).is_ok());
    }

    #[test]
    fn explicit_and_imex_converge_together() {
        // The schemes differ by O(dt²) in one step; quartering dt shrinks
        // the gap by roughly 16x, so successive halvings drop it fast.
        let grid = TorusGrid::new(32).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let h2 = grid.h() * grid.h();
        let mut gaps = Vec::new();
        for &dt in &[h2 / 8.0, h2 / 16.0, h2 / 32.0] {
            let mut p = small_params(1e-2, dt, 0.0);
            let (a, _, _) = step_regularized(data.u0(), &g, &p).unwrap();
            p.scheme = Scheme::Explicit;
            let (b, _, _) = step_regularized(data.u0(), &g, &p).unwrap();
            gaps.push(
                a.values()
                    .iter()
                    .zip(b.values())
                    .fold(0.0f64, |m, (&x, &y)| m.max((x - y).abs())),
            );
        }
        assert!(gaps[1] < 0.35 * gaps[0], "{gaps:?}");
        assert!(gaps[2] < 0.35 * gaps[1], "{gaps:?}");
    }

    #[test]
    fn support_threshold_basics() {
        let grid = TorusGrid::new(32).unwrap();
        let p = small_params(1e-3, 1e-5, 0.0);
        assert!(support_of(&ScalarField::zeros(grid), &p).is_empty_set());

        // Threshold covariance: {c·u > c·L₀ε} = {u > L₀ε}.
        let (_, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let c = 3.7;
        let scaled = data.u0().map(|v| c * v);
        let mut p_scaled = p;
        p_scaled.eps = p.eps * c;
        assert_eq!(support_of(&scaled, &p_scaled), support_of(data.u0(), &p));
    }

    #[test]
    fn zero_horizon_gives_single_record() {
        let grid = TorusGrid::new(32).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let p = small_params(1e-3, 1e-5, 0.0);
        let traj = run_regularized(data.u0(), &g, &p).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.times[0], 0.0);
    }

    #[test]
    fn trajectory_alpha_lambda_consistency_and_csv() {
        let grid = TorusGrid::new(32).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let p = small_params(1e-3, 2e-5, 2e-3);
        let traj = run_regularized(data.u0(), &g, &p).unwrap();
        assert!(traj.len() > 2);
        for k in 0..traj.len() {
            assert!((traj.alpha[k] - (1.0 / traj.lambda[k] - 1.0)).abs() < 1e-12);
        }
        assert!(traj.mass_drift() < 1e-10);

        let mut csv = Vec::new();
        traj.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,lambda,alpha,mass,support_area,hausdorff_to_initial\n"));
        assert_eq!(text.lines().count(), traj.len() + 1);
    }

    #[test]
    fn subsolution_bound_along_short_run() {
        // u(·,t) ≥ S(t)u₀ - t - 10dt at every recorded time.
        let grid = TorusGrid::new(32).unwrap();
        let (g, data) = preset_scenario(Scenario::Jump, grid).unwrap();
        let p = small_params(1e-3, 2e-5, 1e-3);
        let traj = run_regularized(data.u0(), &g, &p).unwrap();
        for (t, u) in &traj.snapshots {
            let bound = heat_semigroup(data.u0(), *t).unwrap();
            let worst = u
                .values()
                .iter()
                .zip(bound.values())
                .fold(f64::INFINITY, |m, (&uv, &bv)| m.min(uv - (bv - t - 10.0 * p.dt)));
            assert!(worst >= 0.0, "subsolution violated by {worst:.3e} at t={t}");
        }
    }

    #[test]
    fn classical_with_zero_source_is_pure_heat() {
        let grid = TorusGrid::new(32).unwrap();
        let (_, data) = preset_scenario(Scenario::Classical, grid).unwrap();
        let p = small_params(1e-12, 2e-5, 0.0);
        let src = ClassicalSource::steady(ScalarField::zeros(grid));
        let stepped = step_classical(data.u0(), &src, 0.0, &p).unwrap();
        let heat = implicit_heat_solve(data.u0(), p.dt).unwrap().map(|v| v.max(0.0));
        assert_eq!(stepped, heat);
    }

    #[test]
    fn classical_negative_source_shrinks_support() {
        // Shrinkage needs the edge flux to lose against the sink. With the
        // explicit stencil the one-cell leak is dt·u_edge/h², so a pancake
        // with edge values below h² burns away monotonically; anything
        // steeper first spreads diffusively, as the growth bound allows.
        let grid = TorusGrid::new(64).unwrap();
        let inner = MaskSet::from_fn(grid, |x, y| {
            let dx = x - 0.5;
            let dy = y - 0.5;
            dx * dx + dy * dy <= 0.01
        });
        let outer = MaskSet::from_fn(grid, |x, y| {
            let dx = x - 0.5;
            let dy = y - 0.5;
            dx * dx + dy * dy <= 0.09
        });
        let spec = crate::initdata::BumpSpec::new(inner, outer, 1).unwrap();
        let u0 = crate::initdata::build_bump(&spec).unwrap().map(|z| 2e-3 * z);
        let mut p = small_params(2e-5, 1.5e-5, 1.5e-3);
        p.l0 = 1.0;
        p.scheme = Scheme::Explicit;
        p.record_every = 20;
        let src = ClassicalSource::steady(ScalarField::constant(grid, -1.0));
        let traj = run_classical(&u0, &src, &p).unwrap();
        for w in traj.support_area.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "support grew under f = -1: {w:?}");
        }
        assert!(traj.support_area.last().unwrap() < &traj.support_area[0]);
    }

    #[test]
    fn classical_positive_source_activates_disjoint_region() {
        let grid = TorusGrid::new(64).unwrap();
        let (_, data) = preset_scenario(Scenario::Classical, grid).unwrap();
        let mut p = small_params(2e-5, 1.5e-5, 6e-4);
        p.l0 = 1.0;
        p.record_every = 4;
        // +1/2 on a far disk, -1/2 elsewhere.
        let region = MaskSet::from_fn(grid, |x, y| {
            let dx = x - 0.75;
            let dy = y - 0.75;
            dx * dx + dy * dy <= 0.12 * 0.12
        });
        let f = region.indicator().map(|ind| if ind > 0.5 { 0.5 } else { -0.5 });
        let src = ClassicalSource::steady(f);
        let traj = run_classical(data.u0(), &src, &p).unwrap();
        let last = &traj.support_masks.last().unwrap().1;
        assert!(
            !last.intersection(&region).is_empty_set(),
            "support never reached the forced region"
        );
    }
}
