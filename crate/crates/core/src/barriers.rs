//! Barrier functions for the regularized flow and the checks built on them.
//!
//! A barrier is `V = Ψ(h(ξ), t)` for a profile `Ψ` and a gauge `h`. Its flow
//! residual
//!
//! `L[V] = ∂_t V - Σ_{i,j} (δ_ij - X_iV X_jV / (|∇_δ V|² + ε²)) X_iX_jV`
//!
//! is evaluated with exact profile derivatives and central finite differences
//! of `h` along the frame fields. A subsolution needs `L[V] ≤ 0`, a
//! supersolution `L[V] ≥ 0`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::flow::{inscribed_radius, Trajectory};
use crate::group::{Point, ValidatedGroup};
use crate::math;
use crate::par;
use crate::sampling;
use crate::stats;
use crate::{Error, Result};

/// Default constant of the cubic barrier's time drift, `64√3`.
pub const DEFAULT_CUBIC_C: f64 = 110.851_251_684_408_14;
/// Default finite-difference step for barrier residuals.
pub const DEFAULT_FD_H: f64 = 1e-4;
/// Residuals smaller than this are not used by [`decay_fit`].
pub const DECAY_FLOOR: f64 = 1e-14;
/// Minimum number of nodes for a decay fit.
pub const DECAY_MIN_NODES: usize = 10;

/// `Ψ(s) = (s - 2)³` on `[0, 2]`, `0` beyond, with its first two derivatives.
pub fn psi_cubic(s: f64) -> Result<(f64, f64, f64)> {
    if !(s >= 0.0) {
        return Err(Error::NegativeArgument(s));
    }
    if s >= 2.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let d = s - 2.0;
    Ok((d * d * d, 3.0 * d * d, 6.0 * d))
}

/// `h(ξ) = (x² + y²) / 2`.
#[inline]
fn half_square(p: &[f64]) -> f64 {
    0.5 * (p[0] * p[0] + p[1] * p[1])
}

/// `V(ξ, t) = Ψ(h(ξ) + tε) - C t ε^{1/2}` on SE(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBarrier {
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
}

impl CubicBarrier {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        CubicBarrier {
            epsilon,
            delta,
            c: DEFAULT_CUBIC_C,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }
}

pub fn eval_cubic_barrier(b: &CubicBarrier, xi: &[f64], t: f64) -> f64 {
    let s = half_square(xi) + t * b.epsilon;
    let (psi, _, _) = psi_cubic(s).expect("h + tε is nonnegative");
    psi - b.c * t * math::sqrt(b.epsilon)
}

/// Gauge used by the exponential barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeKind {
    /// `(x² + y²) / 2` on SE(2).
    Se2HalfSquare,
    /// `|x|² + Σ_s √(1 + θ_s²)` on Carnot groups.
    CarnotMixed,
}

/// `v(ξ, t) = ĉ exp(-σ(2T - αt) h(ξ))` with `ĉ = 2e^{4σT}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpBarrier {
    pub sigma: f64,
    pub alpha: f64,
    pub final_time: f64,
    pub c_hat: f64,
    pub gauge: GaugeKind,
}

impl ExpBarrier {
    pub fn new(sigma: f64, alpha: f64, final_time: f64, gauge: GaugeKind) -> Self {
        ExpBarrier {
            sigma,
            alpha,
            final_time,
            c_hat: 2.0 * math::exp(4.0 * sigma * final_time),
            gauge,
        }
    }

    /// Gauge appropriate for the group.
    pub fn for_group(group: &ValidatedGroup, sigma: f64, alpha: f64, final_time: f64) -> Self {
        let gauge = if group.is_se2() {
            GaugeKind::Se2HalfSquare
        } else {
            GaugeKind::CarnotMixed
        };
        ExpBarrier::new(sigma, alpha, final_time, gauge)
    }

    fn gauge_value(&self, m: usize, p: &[f64]) -> f64 {
        match self.gauge {
            GaugeKind::Se2HalfSquare => half_square(p),
            GaugeKind::CarnotMixed => {
                let x2: f64 = p[..m].iter().map(|v| v * v).sum();
                let t: f64 = p[m..].iter().map(|v| math::sqrt(1.0 + v * v)).sum();
                x2 + t
            }
        }
    }

    /// Rate `σ(2T - αt)` of the exponent.
    fn rate(&self, t: f64) -> f64 {
        self.sigma * (2.0 * self.final_time - self.alpha * t)
    }
}

pub fn eval_exp_barrier(b: &ExpBarrier, group: &ValidatedGroup, xi: &[f64], t: f64) -> Result<f64> {
    if !(t >= 0.0 && t <= b.final_time) {
        return Err(Error::TimeOutOfRange {
            t,
            t_final: b.final_time,
        });
    }
    let h = b.gauge_value(group.m(), xi);
    Ok(b.c_hat * math::exp(-b.rate(t) * h))
}

/// Which inequality a residual report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// `L[V] ≤ tol`.
    Subsolution,
    /// `L[V] ≥ -tol`.
    Supersolution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub kind: Inequality,
    pub samples: usize,
    /// Signed residual per sample.
    pub residuals: Vec<f64>,
    /// Largest residual (subsolution) or smallest residual (supersolution).
    pub extreme: f64,
    /// Sample attaining `extreme`.
    pub argmax: usize,
    /// Worst violation of the inequality, `max(extreme, 0)` resp. `min(extreme, 0)`.
    pub violation: f64,
    pub tol: f64,
    /// Largest change of a residual when the difference step is doubled.
    pub richardson_gap: f64,
    pub pass: bool,
}

/// Profile derivatives `(∂_t Ψ, ∂_s Ψ, ∂_s² Ψ)` at one sample.
type ProfileJet = (f64, f64, f64);

/// `X_i h` and `X_i X_j h` at `p` by nested central differences along the frame.
fn gauge_jet<H>(
    group: &ValidatedGroup,
    delta: f64,
    h: &H,
    p: &[f64],
    fd: f64,
) -> (Vec<f64>, Vec<f64>)
where
    H: Fn(&[f64]) -> f64,
{
    let n = group.n();
    let shifted = |q: &[f64], c: &[f64], s: f64| -> Vec<f64> {
        q.iter().zip(c).map(|(a, b)| a + s * b).collect()
    };
    let first = |q: &[f64], j: usize| -> f64 {
        let mut c = vec![0.0; n];
        group.frame_into(j, delta, q, &mut c);
        (h(&shifted(q, &c, fd)) - h(&shifted(q, &c, -fd))) / (2.0 * fd)
    };
    let d1: Vec<f64> = (0..n).map(|j| first(p, j)).collect();
    let mut d2 = vec![0.0; n * n];
    for i in 0..n {
        let mut c = vec![0.0; n];
        group.frame_into(i, delta, p, &mut c);
        let plus = shifted(p, &c, fd);
        let minus = shifted(p, &c, -fd);
        for j in 0..n {
            d2[i * n + j] = (first(&plus, j) - first(&minus, j)) / (2.0 * fd);
        }
    }
    (d1, d2)
}

/// `L[Ψ(h)]` from the profile jet and the gauge jet.
fn flow_residual(jet: ProfileJet, d1: &[f64], d2: &[f64], epsilon: f64) -> f64 {
    let (psi_t, psi_s, psi_ss) = jet;
    let n = d1.len();
    let grad2: f64 = d1.iter().map(|g| psi_s * g * psi_s * g).sum();
    let denom = grad2 + epsilon * epsilon;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            let a = id - psi_s * d1[i] * psi_s * d1[j] / denom;
            s += a * (psi_ss * d1[i] * d1[j] + psi_s * d2[i * n + j]);
        }
    }
    psi_t - s
}

fn residual_report<F>(kind: Inequality, count: usize, fd_h: f64, eval: F) -> Result<ResidualReport>
where
    F: Fn(usize, f64) -> f64 + Sync + Send,
{
    if count == 0 {
        return Err(Error::EmptySampleSet);
    }
    let pairs: Vec<(f64, f64)> = par::map_collect(count, |k| (eval(k, fd_h), eval(k, 2.0 * fd_h)));
    let residuals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let richardson_gap = pairs
        .iter()
        .map(|(a, b)| math::abs(a - b))
        .fold(0.0, f64::max);
    let mut argmax = 0;
    for (k, &r) in residuals.iter().enumerate() {
        let better = match kind {
            Inequality::Subsolution => r > residuals[argmax],
            Inequality::Supersolution => r < residuals[argmax],
        };
        if better {
            argmax = k;
        }
    }
    let extreme = residuals[argmax];
    let tol = 10.0 * fd_h * fd_h;
    let (violation, pass) = match kind {
        Inequality::Subsolution => (extreme.max(0.0), extreme <= tol),
        Inequality::Supersolution => (extreme.min(0.0), extreme >= -tol),
    };
    Ok(ResidualReport {
        kind,
        samples: count,
        residuals,
        extreme,
        argmax,
        violation,
        tol,
        richardson_gap,
        pass,
    })
}

/// Checks `L[V] ≤ 10 fd_h²` for the cubic barrier at `(ξ, t)` samples on SE(2).
pub fn check_cubic_subsolution(
    b: &CubicBarrier,
    group: &ValidatedGroup,
    samples: &[(Point, f64)],
    fd_h: f64,
) -> Result<ResidualReport> {
    if !group.is_se2() {
        return Err(Error::BadParams("the cubic barrier lives on SE(2)"));
    }
    let sqrt_eps = math::sqrt(b.epsilon);
    residual_report(Inequality::Subsolution, samples.len(), fd_h, |k, fd| {
        let (p, t) = (&samples[k].0, samples[k].1);
        let s = half_square(p) + t * b.epsilon;
        let (_, d1psi, d2psi) = psi_cubic(s).expect("h + tε is nonnegative");
        let jet = (d1psi * b.epsilon - b.c * sqrt_eps, d1psi, d2psi);
        let (d1, d2) = gauge_jet(group, b.delta, &half_square, p, fd);
        flow_residual(jet, &d1, &d2, b.epsilon)
    })
}

/// Checks `L[v] / v ≥ -10 fd_h²` for the exponential barrier.
///
/// Dividing by `v > 0` keeps the sign and makes the residual independent of
/// the size of `ĉ`.
pub fn check_exp_supersolution(
    b: &ExpBarrier,
    group: &ValidatedGroup,
    samples: &[(Point, f64)],
    epsilon: f64,
    delta: f64,
    fd_h: f64,
) -> Result<ResidualReport> {
    if let Some((_, &t)) = samples
        .iter()
        .map(|(p, t)| (p, t))
        .find(|(_, &t)| !(t >= 0.0 && t <= b.final_time))
    {
        return Err(Error::TimeOutOfRange {
            t,
            t_final: b.final_time,
        });
    }
    let m = group.m();
    let gauge = |q: &[f64]| b.gauge_value(m, q);
    residual_report(Inequality::Supersolution, samples.len(), fd_h, |k, fd| {
        let (p, t) = (&samples[k].0, samples[k].1);
        let h = gauge(p);
        let v = b.c_hat * math::exp(-b.rate(t) * h);
        let k_rate = b.rate(t);
        // Ψ_t = σαh v, Ψ_s = -k v, Ψ_ss = k² v
        let jet = (b.sigma * b.alpha * h * v, -k_rate * v, k_rate * k_rate * v);
        let (d1, d2) = gauge_jet(group, delta, &gauge, p, fd);
        flow_residual(jet, &d1, &d2, epsilon) / v
    })
}

/// `(ξ, t)` samples with `(x, y)` uniform in the disc of radius `radius`,
/// `θ` uniform in `[0, 2π)` and `t` uniform in `[0, t_max]`.
pub fn se2_disc_samples(count: usize, radius: f64, t_max: f64, seed: u64) -> Vec<(Point, f64)> {
    sampling::sample(seed, count, |rng| {
        let r = radius * math::sqrt(rng.gen::<f64>());
        let a = math::TAU * rng.gen::<f64>();
        let th = math::TAU * rng.gen::<f64>();
        let t = t_max * rng.gen::<f64>();
        (Point::se2(r * math::cos(a), r * math::sin(a), th), t)
    })
}

/// `(ξ, t)` samples uniform in the box `[-half_width, half_width]^n × [0, t_max]`.
pub fn box_samples(
    n: usize,
    count: usize,
    half_width: f64,
    t_max: f64,
    seed: u64,
) -> Vec<(Point, f64)> {
    sampling::sample(seed, count, |rng| {
        let p: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-half_width..=half_width))
            .collect();
        (Point::new(p), t_max * rng.gen::<f64>())
    })
}

/// Radius `R` such that every snapshot is constant, to within `tol`, on the
/// nodes with pseudo-norm greater than `R`.
///
/// `R` is the largest pseudo-norm of a node that breaks the constant outer
/// shell, `0` for a constant trajectory. Returns `None` when the outermost
/// nodes already vary or `R` exceeds the largest pseudo-ball in the grid.
pub fn confinement_radius(traj: &Trajectory, group: &ValidatedGroup, tol: f64) -> Option<f64> {
    let first = traj.snapshots.first()?;
    let grid = first.grid();
    let norms: Vec<f64> = par::map_indices(grid.len(), |k| group.pseudo_norm(&grid.coords(k)));
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut k = 0;
    while k < order.len() {
        let r = norms[order[k]];
        let mut end = k;
        while end < order.len() && norms[order[end]] == r {
            let node = order[end];
            for s in &traj.snapshots {
                let v = s.values()[node];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            end += 1;
        }
        if hi - lo >= tol {
            // Outermost nodes already vary: no constant shell on this grid.
            return (k > 0 && r <= inscribed_radius(group, grid)).then_some(r);
        }
        k = end;
    }
    Some(0.0)
}

/// Exponential envelope `|c - u| ≤ B e^{-b |ξ|}` fitted on the final snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub big_b: f64,
    pub b: f64,
    pub r2: f64,
    pub used: usize,
}

/// Fits `ln |c - u|` against the pseudo-norm on the final snapshot.
///
/// Nodes with `|c - u| ≤ 1e-14` and nodes within two cells of a clamped
/// shell are skipped. `B` is the smallest constant making the fitted rate an
/// envelope of the data.
pub fn decay_fit(
    traj: &Trajectory,
    group: &ValidatedGroup,
    boundary_constant: f64,
) -> Result<DecayFit> {
    let u = traj.snapshots.last().ok_or(Error::DegenerateFit {
        usable: 0,
        need: DECAY_MIN_NODES,
    })?;
    let grid = u.grid();
    let cutoff = traj.shell_radius.map(|r| {
        let h = grid
            .axes()
            .iter()
            .filter(|a| !a.periodic)
            .map(|a| a.spacing)
            .fold(0.0, f64::max);
        r - 2.0 * h
    });
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut res = Vec::new();
    for (k, &v) in u.values().iter().enumerate() {
        let rho = group.pseudo_norm(&grid.coords(k));
        if cutoff.is_some_and(|c| rho >= c) {
            continue;
        }
        let d = math::abs(boundary_constant - v);
        if d > DECAY_FLOOR {
            xs.push(rho);
            ys.push(math::ln(d));
            res.push(d);
        }
    }
    if xs.len() < DECAY_MIN_NODES {
        return Err(Error::DegenerateFit {
            usable: xs.len(),
            need: DECAY_MIN_NODES,
        });
    }
    let fit = stats::fit_line(&xs, &ys)?;
    let b = -fit.slope;
    let big_b = xs
        .iter()
        .zip(&res)
        .map(|(rho, d)| d * math::exp(b * rho))
        .fold(0.0, f64::max);
    Ok(DecayFit {
        big_b,
        b,
        r2: fit.r2,
        used: xs.len(),
    })
}
