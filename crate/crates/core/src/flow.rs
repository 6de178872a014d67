//! The ε-regularized, δ-approximated level-set flow
//!
//! `∂_t u = Σ_{i,j} (δ_ij - X_{iδ}u X_{jδ}u / (|∇_δ u|² + ε²)) X_{iδ}X_{jδ}u`
//!
//! integrated with explicit Euler, plus the vanishing-viscosity sweep over a
//! decreasing ε schedule and a comparison checker for ordered data.

use alloc::vec;
use alloc::vec::Vec;

use crate::barriers::{self, DecayFit};
use crate::field::{FrameStencil, GridSpec, ScalarField};
use crate::group::ValidatedGroup;
use crate::math;
use crate::par;
use crate::stats;
use crate::{Error, Result};

/// Default fraction of the explicit stability bound.
pub const DEFAULT_CFL_SAFETY: f64 = 0.25;
/// Any value larger than this in magnitude is treated as a blow-up.
pub const BLOW_UP: f64 = 1e12;
/// Sweeps whose differences all fall below this are flagged degenerate.
pub const DEGENERATE_DIFF: f64 = 1e-14;
/// Variation threshold used for the per-level confinement radius in sweeps.
pub const SWEEP_CONFINEMENT_TOL: f64 = 1e-3;

/// What happens at the edge of the computational domain.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Boundary {
    /// One-sided differences at non-periodic edges, no clamping.
    #[default]
    Free,
    /// Nodes with `pseudo_norm ≥ radius` are held at `value`, initially and
    /// after every step.
    Shell { radius: f64, value: f64 },
    /// Nodes where `mask` is set are held at `values`, initially and after
    /// every step.
    Pinned { mask: Vec<bool>, values: Vec<f64> },
}

/// One regularized run.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProblem {
    pub group: ValidatedGroup,
    pub u0: ScalarField,
    pub epsilon: f64,
    pub delta: f64,
    pub final_time: f64,
    pub cfl_safety: f64,
    /// Requested output times in `[0, final_time]`; `final_time` is always added.
    pub snapshot_times: Vec<f64>,
    pub boundary: Boundary,
    /// Fixed time step; must respect the stability bound.
    pub dt: Option<f64>,
    /// Clip each update to the range of the node's `3^d` neighbourhood.
    pub limit_extrema: bool,
}

impl FlowProblem {
    pub fn new(
        group: ValidatedGroup,
        u0: ScalarField,
        epsilon: f64,
        delta: f64,
        final_time: f64,
    ) -> Self {
        FlowProblem {
            group,
            u0,
            epsilon,
            delta,
            final_time,
            cfl_safety: DEFAULT_CFL_SAFETY,
            snapshot_times: Vec::new(),
            boundary: Boundary::Free,
            dt: None,
            limit_extrema: true,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_snapshot_times(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_cfl_safety(mut self, cfl: f64) -> Self {
        self.cfl_safety = cfl;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_extremum_limiter(mut self, on: bool) -> Self {
        self.limit_extrema = on;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        self.u0.grid()
    }

    pub fn validate(&self) -> Result<()> {
        self.grid().check_group(&self.group)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::BadParams("epsilon must be positive"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::BadParams("delta must lie in (0, 1]"));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::BadParams("final time must be nonnegative"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::BadParams("cfl safety must lie in (0, 1)"));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(t >= 0.0 && t <= self.final_time))
        {
            return Err(Error::BadParams("snapshot times must lie in [0, T]"));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::BadParams("snapshot times must be sorted"));
        }
        match &self.boundary {
            Boundary::Free => {}
            Boundary::Shell { radius, value } => {
                if !value.is_finite() {
                    return Err(Error::BadParams("shell value must be finite"));
                }
                let inner = inscribed_radius(&self.group, self.grid());
                if !(*radius > 0.0 && *radius < inner) {
                    return Err(Error::BadParams(
                        "shell radius must lie strictly inside the grid",
                    ));
                }
            }
            Boundary::Pinned { mask, values } => {
                if mask.len() != self.grid().len() || values.len() != self.grid().len() {
                    return Err(Error::GridMismatch(
                        "pinned mask/values differ from grid size",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Stability bound `cfl_safety · h_min² / (2 n c_max)`.
    pub fn cfl_limit(&self) -> Result<f64> {
        let st = FrameStencil::new(&self.group, self.grid(), self.delta)?;
        Ok(cfl_limit(&st, self.cfl_safety))
    }
}

fn cfl_limit(st: &FrameStencil, cfl_safety: f64) -> f64 {
    let h = st.grid().h_min();
    cfl_safety * h * h / (2.0 * st.n() as f64 * st.c_max())
}

/// Radius of the largest pseudo-ball around the origin inside the grid box.
///
/// Periodic axes do not constrain the ball. A degree-2 axis at distance `d`
/// from the origin admits radius `√d`.
pub fn inscribed_radius(group: &ValidatedGroup, grid: &GridSpec) -> f64 {
    let mut r = f64::INFINITY;
    for (a, ax) in grid.axes().iter().enumerate() {
        if ax.periodic {
            continue;
        }
        let lo = ax.origin;
        let hi = ax.coord(ax.count - 1);
        let d = if lo <= 0.0 && hi >= 0.0 {
            (-lo).min(hi)
        } else {
            0.0
        };
        let reach = if group.is_se2() || a < group.m() {
            d
        } else {
            math::sqrt(d)
        };
        r = r.min(reach);
    }
    r
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub dt: f64,
    pub max_abs_rhs: f64,
}

/// Snapshots of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Ordered by time; each field carries its time tag.
    pub snapshots: Vec<ScalarField>,
    pub steps: Vec<StepRecord>,
    /// Radius of the clamped shell, when the run used one.
    pub shell_radius: Option<f64>,
}

impl Trajectory {
    pub fn final_field(&self) -> &ScalarField {
        self.snapshots
            .last()
            .expect("trajectory has at least one snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time()).collect()
    }

    /// Smallest and largest value over all snapshots.
    pub fn value_range(&self) -> (f64, f64) {
        self.snapshots
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.min()), hi.max(s.max()))
            })
    }
}

/// Precomputed operator for one `(group, grid, ε, δ)`.
struct Operator {
    st: FrameStencil,
    eps2: f64,
}

impl Operator {
    fn new(group: &ValidatedGroup, grid: &GridSpec, epsilon: f64, delta: f64) -> Result<Self> {
        Ok(Operator {
            st: FrameStencil::new(group, grid, delta)?,
            eps2: epsilon * epsilon,
        })
    }

    fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let n = self.st.n();
        let d = self.st.first_derivatives(u);
        // dd[i * n + j] = X_i(X_j u)
        let mut dd: Vec<Vec<f64>> = vec![Vec::new(); n * n];
        for j in 0..n {
            let pj = self.st.partials(&d[j]);
            for i in 0..n {
                dd[i * n + j] = self.st.apply(i, &pj);
            }
        }
        let eps2 = self.eps2;
        par::map_indices(u.len(), |k| {
            let g2: f64 = d.iter().map(|di| di[k] * di[k]).sum();
            let denom = g2 + eps2;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let id = if i == j { 1.0 } else { 0.0 };
                    s += (id - d[i][k] * d[j][k] / denom) * dd[i * n + j][k];
                }
            }
            s
        })
    }
}

/// Right-hand side of the regularized flow at every node.
pub fn rhs(
    u: &ScalarField,
    group: &ValidatedGroup,
    epsilon: f64,
    delta: f64,
) -> Result<ScalarField> {
    let op = Operator::new(group, u.grid(), epsilon, delta)?;
    let r = op.rhs(u.values());
    check_finite(&r, f64::INFINITY)?;
    Ok(ScalarField::from_parts(u.grid().clone(), r, u.time()))
}

/// `Σ_i X_{iδ}X_{iδ}u`, the δ-Laplacian.
pub fn delta_laplacian(u: &ScalarField, group: &ValidatedGroup, delta: f64) -> Result<ScalarField> {
    let st = FrameStencil::new(group, u.grid(), delta)?;
    let d = st.first_derivatives(u.values());
    let mut out = vec![0.0; u.grid().len()];
    for (i, di) in d.iter().enumerate() {
        let x = st.derive(i, di);
        for (o, v) in out.iter_mut().zip(&x) {
            *o += v;
        }
    }
    Ok(ScalarField::from_parts(u.grid().clone(), out, u.time()))
}

fn check_finite(values: &[f64], bound: f64) -> Result<()> {
    match values.iter().enumerate().find(|(_, v)| !(v.abs() <= bound)) {
        Some((node, &value)) => Err(Error::NonFiniteField { node, value }),
        None => Ok(()),
    }
}

/// One limited explicit Euler step with the default stability safety factor
/// and no boundary clamping.
pub fn step(
    u: &ScalarField,
    group: &ValidatedGroup,
    epsilon: f64,
    delta: f64,
    dt: f64,
) -> Result<ScalarField> {
    let op = Operator::new(group, u.grid(), epsilon, delta)?;
    let limit = cfl_limit(&op.st, DEFAULT_CFL_SAFETY);
    if !(dt > 0.0 && dt <= limit) {
        return Err(Error::CflViolation { dt, limit });
    }
    let (next, _) = euler(&op, u.values(), dt, true)?;
    Ok(ScalarField::from_parts(
        u.grid().clone(),
        next,
        u.time() + dt,
    ))
}

fn euler(op: &Operator, u: &[f64], dt: f64, limit: bool) -> Result<(Vec<f64>, f64)> {
    let r = op.rhs(u);
    let max_abs = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let grid = op.st.grid();
    let next: Vec<f64> = par::map_indices(u.len(), |k| {
        let v = u[k] + dt * r[k];
        if limit {
            let (lo, hi) = grid.neighborhood_range(u, k);
            v.clamp(lo, hi)
        } else {
            v
        }
    });
    check_finite(&next, BLOW_UP)?;
    Ok((next, max_abs))
}

/// Clamped nodes of a boundary, with the values they are held at.
fn clamp_set(problem: &FlowProblem) -> Option<(Vec<bool>, Vec<f64>)> {
    let grid = problem.grid();
    match &problem.boundary {
        Boundary::Free => None,
        Boundary::Shell { radius, value } => {
            let mask = par::map_collect(grid.len(), |k| {
                problem.group.pseudo_norm(&grid.coords(k)) >= *radius
            });
            Some((mask, vec![*value; grid.len()]))
        }
        Boundary::Pinned { mask, values } => Some((mask.clone(), values.clone())),
    }
}

fn impose(u: &mut [f64], clamp: &Option<(Vec<bool>, Vec<f64>)>) {
    if let Some((mask, values)) = clamp {
        for ((v, &m), &c) in u.iter_mut().zip(mask).zip(values) {
            if m {
                *v = c;
            }
        }
    }
}

/// Initial datum with the boundary condition imposed.
pub fn imposed_initial(problem: &FlowProblem) -> ScalarField {
    let mut u = problem.u0.values().to_vec();
    impose(&mut u, &clamp_set(problem));
    ScalarField::from_parts(problem.grid().clone(), u, 0.0)
}

/// Integrates the problem to its final time.
///
/// Each step is `u + dt · rhs(u)`. The nested central stencils are not
/// monotone, so by default every updated value is clipped to the range of
/// `u` over the node's `3^d` neighbourhood; this keeps the discrete maximum
/// principle and leaves monotone updates untouched.
///
/// The step is `T / ceil(T / dt_max)` where `dt_max` is the stability bound
/// or the requested fixed step. Each requested time is served by the nearest
/// completed step.
pub fn run(problem: &FlowProblem) -> Result<Trajectory> {
    problem.validate()?;
    let op = Operator::new(
        &problem.group,
        problem.grid(),
        problem.epsilon,
        problem.delta,
    )?;
    let limit = cfl_limit(&op.st, problem.cfl_safety);
    let dt_max = match problem.dt {
        Some(dt) if !(dt > 0.0 && dt <= limit) => return Err(Error::CflViolation { dt, limit }),
        Some(dt) => dt,
        None => limit,
    };
    let t_final = problem.final_time;
    let n_steps = if t_final > 0.0 {
        math::ceil(t_final / dt_max) as usize
    } else {
        0
    };
    let dt = if n_steps > 0 {
        t_final / n_steps as f64
    } else {
        0.0
    };

    let mut wanted: Vec<usize> = problem
        .snapshot_times
        .iter()
        .map(|&t| {
            if n_steps == 0 {
                0
            } else {
                (math::round(t / dt) as usize).min(n_steps)
            }
        })
        .collect();
    wanted.push(n_steps);
    wanted.dedup();

    let clamp = clamp_set(problem);
    let grid = problem.grid().clone();
    let mut u = problem.u0.values().to_vec();
    impose(&mut u, &clamp);

    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut steps = Vec::with_capacity(n_steps);
    let mut next_wanted = 0;
    for k in 0..=n_steps {
        while next_wanted < wanted.len() && wanted[next_wanted] == k {
            snapshots.push(ScalarField::from_parts(
                grid.clone(),
                u.clone(),
                k as f64 * dt,
            ));
            next_wanted += 1;
        }
        if k == n_steps {
            break;
        }
        let (mut next, max_abs_rhs) = euler(&op, &u, dt, problem.limit_extrema)?;
        impose(&mut next, &clamp);
        u = next;
        steps.push(StepRecord { dt, max_abs_rhs });
    }
    let shell_radius = match problem.boundary {
        Boundary::Shell { radius, .. } => Some(radius),
        _ => None,
    };
    Ok(Trajectory {
        snapshots,
        steps,
        shell_radius,
    })
}

/// Largest `A - B` over matching snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub max_violation: f64,
    pub snapshot: usize,
    pub node: usize,
    pub time: f64,
    pub pass: bool,
}

fn check_aligned(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::GridMismatch(
            "trajectories have different snapshot counts",
        ));
    }
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if sa.grid() != sb.grid() {
            return Err(Error::GridMismatch("trajectories live on different grids"));
        }
        if math::abs(sa.time() - sb.time()) > 1e-12 * sa.time().abs().max(1.0) {
            return Err(Error::GridMismatch("snapshot times differ"));
        }
    }
    Ok(())
}

/// Checks `A ≤ B + tol` at every node of every snapshot.
pub fn comparison_check(a: &Trajectory, b: &Trajectory, tol: f64) -> Result<ComparisonReport> {
    check_aligned(a, b)?;
    let mut best = ComparisonReport {
        max_violation: f64::NEG_INFINITY,
        snapshot: 0,
        node: 0,
        time: 0.0,
        pass: false,
    };
    for (s, (sa, sb)) in a.snapshots.iter().zip(&b.snapshots).enumerate() {
        for (k, (va, vb)) in sa.values().iter().zip(sb.values()).enumerate() {
            let v = va - vb;
            if v > best.max_violation {
                best = ComparisonReport {
                    max_violation: v,
                    snapshot: s,
                    node: k,
                    time: sa.time(),
                    pass: false,
                };
            }
        }
    }
    best.pass = best.max_violation <= tol;
    Ok(best)
}

/// Largest `|A - B|` over matching snapshots, optionally restricted to a node set.
pub fn sup_difference(a: &Trajectory, b: &Trajectory, nodes: Option<&[bool]>) -> Result<f64> {
    check_aligned(a, b)?;
    let mut best = 0.0_f64;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        for (k, (va, vb)) in sa.values().iter().zip(sb.values()).enumerate() {
            if nodes.is_none_or(|m| m[k]) {
                best = best.max(math::abs(va - vb));
            }
        }
    }
    Ok(best)
}

/// One ε level of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepLevel {
    pub epsilon: f64,
    pub delta: f64,
    /// `sup |u^{ε_prev} - u^{ε}|`; absent on the first level.
    pub sup_diff: Option<f64>,
    pub confinement_radius: Option<f64>,
    pub decay: Option<DecayFit>,
}

/// Least-squares fit of `ln(diff)` against `ln(ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub alpha: f64,
    pub rms_residual: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub sigma: f64,
    pub levels: Vec<SweepLevel>,
    /// Present when there are at least three levels and the sweep is not degenerate.
    pub rate: Option<RateFit>,
    pub degenerate: bool,
    pub trajectories: Vec<Trajectory>,
}

impl SweepReport {
    pub fn sup_diffs(&self) -> Vec<f64> {
        self.levels.iter().filter_map(|l| l.sup_diff).collect()
    }

    /// Whether consecutive differences strictly decrease.
    pub fn strictly_decreasing(&self) -> bool {
        self.sup_diffs().windows(2).all(|w| w[1] < w[0])
    }
}

/// `δ(ε) = ε^σ`, clipped to `(0, ε]`.
pub fn coupled_delta(epsilon: f64, sigma: f64) -> f64 {
    math::powf(epsilon, sigma).min(epsilon)
}

/// Runs the base problem at every ε of a strictly decreasing schedule with
/// `δ = δ(ε)` and measures how fast consecutive levels approach each other.
pub fn vanishing_viscosity_sweep(
    base: &FlowProblem,
    eps_schedule: &[f64],
    sigma: f64,
) -> Result<SweepReport> {
    if eps_schedule.len() < 2 {
        return Err(Error::ScheduleTooShort { need: 2 });
    }
    if eps_schedule.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::BadParams("every epsilon must lie in (0, 1)"));
    }
    if eps_schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::BadParams("epsilon schedule must strictly decrease"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::BadParams("sigma must be nonnegative"));
    }
    let far_value = match base.boundary {
        Boundary::Shell { value, .. } => Some(value),
        _ => None,
    };
    let mut levels = Vec::with_capacity(eps_schedule.len());
    let mut trajectories: Vec<Trajectory> = Vec::with_capacity(eps_schedule.len());
    for &eps in eps_schedule {
        let delta = coupled_delta(eps, sigma);
        let mut p = base.clone();
        p.epsilon = eps;
        p.delta = delta;
        let traj = run(&p)?;
        let sup_diff = match trajectories.last() {
            Some(prev) => Some(sup_difference(prev, &traj, None)?),
            None => None,
        };
        let confinement_radius =
            barriers::confinement_radius(&traj, &base.group, SWEEP_CONFINEMENT_TOL);
        let decay = far_value.and_then(|c| barriers::decay_fit(&traj, &base.group, c).ok());
        levels.push(SweepLevel {
            epsilon: eps,
            delta,
            sup_diff,
            confinement_radius,
            decay,
        });
        trajectories.push(traj);
    }
    let diffs: Vec<(f64, f64)> = levels
        .iter()
        .filter_map(|l| l.sup_diff.map(|d| (l.epsilon, d)))
        .collect();
    let degenerate = diffs.iter().all(|&(_, d)| d < DEGENERATE_DIFF);
    let rate = if !degenerate && levels.len() >= 3 && diffs.iter().all(|&(_, d)| d > 0.0) {
        let x: Vec<f64> = diffs.iter().map(|&(e, _)| math::ln(e)).collect();
        let y: Vec<f64> = diffs.iter().map(|&(_, d)| math::ln(d)).collect();
        stats::fit_line(&x, &y).ok().map(|f| RateFit {
            alpha: f.slope,
            rms_residual: f.rms_residual,
            r2: f.r2,
        })
    } else {
        None
    };
    Ok(SweepReport {
        sigma,
        levels,
        rate,
        degenerate,
        trajectories,
    })
}

/// Sup differences between runs with consecutive shell radii.
#[derive(Debug, Clone, PartialEq)]
pub struct RLimitReport {
    pub radii: Vec<f64>,
    /// `diffs[k]` compares radius `k` with radius `k + 1`, on the smallest ball.
    pub diffs: Vec<f64>,
}

impl RLimitReport {
    pub fn decreasing(&self) -> bool {
        self.diffs.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Runs the base problem with shells of increasing radius.
///
/// The shell value is taken from the base problem's shell, or 0 otherwise.
pub fn r_limit_check(base: &FlowProblem, radii: &[f64]) -> Result<RLimitReport> {
    if radii.len() < 2 {
        return Err(Error::ScheduleTooShort { need: 2 });
    }
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::BadParams("radii must not decrease"));
    }
    let value = match base.boundary {
        Boundary::Shell { value, .. } => value,
        _ => 0.0,
    };
    let grid = base.grid();
    let inside: Vec<bool> = (0..grid.len())
        .map(|k| base.group.pseudo_norm(&grid.coords(k)) < radii[0])
        .collect();
    let mut runs = Vec::with_capacity(radii.len());
    for &radius in radii {
        let p = base
            .clone()
            .with_boundary(Boundary::Shell { radius, value });
        runs.push(run(&p)?);
    }
    let diffs = runs
        .windows(2)
        .map(|w| sup_difference(&w[0], &w[1], Some(&inside)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RLimitReport {
        radii: radii.to_vec(),
        diffs,
    })
}

/// Mean radius of the zero level set in the plane of the first two axes,
/// measured along `rays` rays from `center`.
///
/// Along each ray the field is interpolated multilinearly and the first
/// sign change is refined by bisection. Returns `None` when some ray has no
/// sign change inside the grid.
pub fn zero_level_radius(u: &ScalarField, center: &[f64], rays: usize) -> Option<f64> {
    let grid = u.grid();
    let h = grid.axes()[0].spacing.min(grid.axes()[1].spacing);
    let ds = 0.25 * h;
    let mut total = 0.0;
    for r in 0..rays {
        let phi = math::TAU * r as f64 / rays as f64;
        let (s, c) = (math::sin(phi), math::cos(phi));
        let at = |rho: f64| {
            let mut p = center.to_vec();
            p[0] += rho * c;
            p[1] += rho * s;
            u.interpolate(&p).ok()
        };
        let mut a = 0.0;
        let mut fa = at(a)?;
        let mut found = None;
        loop {
            let b = a + ds;
            let fb = at(b)?;
            if (fa <= 0.0) != (fb <= 0.0) {
                found = Some((a, b, fa));
                break;
            }
            a = b;
            fa = fb;
            if a > 1e6 {
                break;
            }
        }
        let (mut lo, mut hi, flo) = found?;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fm = at(mid)?;
            if (fm <= 0.0) == (flo <= 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        total += 0.5 * (lo + hi);
    }
    Some(total / rays as f64)
}
