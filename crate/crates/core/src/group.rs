//! Step-2 Carnot groups and SE(2): frames, increments and pseudo-distances.
//!
//! Coordinates are `(x_1..x_m, θ_1..θ_{n-m})` for a Carnot group and
//! `(x, y, θ)` for SE(2). Frame indices are 1-based as in `X_1..X_n`;
//! indices `> m` are the vertical fields, scaled by `δ` when a `delta` is
//! supplied (`X_{iδ} = δ^{deg i - 1} X_i`).
//!
//! The horizontal Carnot fields are
//! `X_i = ∂_{x_i} + Σ_k Σ_l w^{(k)}_{il} x_l ∂_{θ_k}` and the vertical ones
//! are `∂_{θ_k}`. On SE(2) the frame is `X_1 = cos θ ∂_x + sin θ ∂_y`,
//! `X_2 = ∂_θ` and `X_3 = -sin θ ∂_x + cos θ ∂_y`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{self, TAU};
use crate::{Error, Result};

/// Skew-symmetry tolerance on `|w_ij + w_ji|`.
pub const SKEW_TOLERANCE: f64 = 1e-12;
/// Relative singular-value cutoff used by the bracket-generation rank test.
pub const RANK_TOLERANCE: f64 = 1e-10;

const GENERIC_POINT_SEED: u64 = 0x5352_4d43_4631;

/// Structure description, prior to validation.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupSpec {
    /// Step-2 Carnot group. `layers[k]` is the row-major `m × m` matrix
    /// `W^{(k+1)}`; there must be `n - m` of them.
    Carnot {
        m: usize,
        n: usize,
        layers: Vec<Vec<f64>>,
    },
    /// Roto-translations `(x, y, θ)` with `θ` periodic of period 2π.
    Se2,
}

impl GroupSpec {
    pub fn carnot(m: usize, n: usize, layers: Vec<Vec<f64>>) -> Self {
        GroupSpec::Carnot { m, n, layers }
    }

    /// First Heisenberg group with `w_12 = -1/2`, so that `[X_1, X_2] = ∂_θ`.
    pub fn heisenberg() -> Self {
        GroupSpec::Carnot {
            m: 2,
            n: 3,
            layers: vec![vec![0.0, -0.5, 0.5, 0.0]],
        }
    }

    /// Euclidean `R^m` seen as the degenerate Carnot group with no second layer.
    pub fn euclidean(m: usize) -> Self {
        GroupSpec::Carnot {
            m,
            n: m,
            layers: Vec::new(),
        }
    }

    pub fn validate(self) -> Result<ValidatedGroup> {
        validate_group(self)
    }
}

/// Reference angle used by the SE(2) increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaPolicy {
    /// `θ_0 = θ_ξ`.
    Left,
    /// `θ_0 = (θ_ξ + θ_η) / 2` along the shortest arc.
    #[default]
    Midpoint,
}

/// A group description that passed [`validate_group`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedGroup {
    spec: GroupSpec,
    theta_policy: ThetaPolicy,
}

/// A point of the group in exponential coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    /// SE(2) point with `θ` reduced to `[0, 2π)`.
    pub fn se2(x: f64, y: f64, theta: f64) -> Self {
        Point {
            coords: vec![x, y, math::rem_period(theta, TAU)],
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(coords: [f64; N]) -> Self {
        Point {
            coords: coords.to_vec(),
        }
    }
}

/// Exponential coordinates `e_1..e_n` of `η` relative to `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementVector(pub Vec<f64>);

impl Deref for IncrementVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `d_β² = d_0² + d_3²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceTriple {
    pub d_beta: f64,
    pub d_0: f64,
    pub d_3: f64,
}

/// Checks skew-symmetry and step-2 bracket generation.
pub fn validate_group(spec: GroupSpec) -> Result<ValidatedGroup> {
    if let GroupSpec::Carnot { m, n, ref layers } = spec {
        if m == 0 || n == 0 {
            return Err(Error::BadDimensions("empty group"));
        }
        if m > n {
            return Err(Error::BadDimensions("m > n"));
        }
        if layers.len() != n - m {
            return Err(Error::BadDimensions("need exactly n - m layer matrices"));
        }
        if layers.iter().any(|w| w.len() != m * m) {
            return Err(Error::BadDimensions("layer matrix is not m x m"));
        }
        for (k, w) in layers.iter().enumerate() {
            for i in 0..m {
                for j in i..m {
                    let dev = math::abs(w[i * m + j] + w[j * m + i]);
                    if !(dev <= SKEW_TOLERANCE) {
                        return Err(Error::NotSkewSymmetric {
                            layer: k + 1,
                            row: i + 1,
                            col: j + 1,
                            deviation: dev,
                        });
                    }
                }
            }
        }
    }
    let group = ValidatedGroup {
        spec,
        theta_policy: ThetaPolicy::default(),
    };
    let n = group.n();
    let mut rng = ChaCha8Rng::seed_from_u64(GENERIC_POINT_SEED);
    let generic: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let origin = vec![0.0; n];
    for p in [&generic, &origin] {
        let rank = group.step2_rank(p);
        if rank < n {
            return Err(Error::BracketGenerationFails { rank, n });
        }
    }
    Ok(group)
}

impl ValidatedGroup {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn theta_policy(&self) -> ThetaPolicy {
        self.theta_policy
    }

    pub fn with_theta_policy(mut self, policy: ThetaPolicy) -> Self {
        self.theta_policy = policy;
        self
    }

    pub fn is_se2(&self) -> bool {
        matches!(self.spec, GroupSpec::Se2)
    }

    /// Number of horizontal directions.
    pub fn m(&self) -> usize {
        match self.spec {
            GroupSpec::Carnot { m, .. } => m,
            GroupSpec::Se2 => 2,
        }
    }

    /// Topological dimension.
    pub fn n(&self) -> usize {
        match self.spec {
            GroupSpec::Carnot { n, .. } => n,
            GroupSpec::Se2 => 3,
        }
    }

    /// Degree (1 or 2) of the 1-based frame index `i`.
    pub fn degree(&self, i: usize) -> u8 {
        if i <= self.m() {
            1
        } else {
            2
        }
    }

    /// Coordinate axis that is periodic (the SE(2) angle), if any.
    pub fn periodic_axis(&self) -> Option<usize> {
        if self.is_se2() {
            Some(2)
        } else {
            None
        }
    }

    fn check_index(&self, i: usize, max: usize) -> Result<()> {
        if i == 0 || i > max {
            Err(Error::IndexOutOfRange { index: i, max })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn w(&self, layer: usize, i: usize, l: usize) -> f64 {
        match &self.spec {
            GroupSpec::Carnot { m, layers, .. } => layers[layer][i * m + l],
            GroupSpec::Se2 => unreachable!(),
        }
    }

    /// Coefficients of `X_{iδ}` at `p` in the coordinate basis.
    pub fn frame_coefficients(&self, i: usize, delta: f64, p: &[f64]) -> Result<Vec<f64>> {
        self.check_index(i, self.n())?;
        assert_eq!(p.len(), self.n(), "point dimension");
        let mut out = vec![0.0; self.n()];
        self.frame_into(i - 1, delta, p, &mut out);
        Ok(out)
    }

    /// 0-based, unchecked version of [`frame_coefficients`](Self::frame_coefficients).
    pub(crate) fn frame_into(&self, i0: usize, delta: f64, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|c| *c = 0.0);
        match &self.spec {
            GroupSpec::Carnot { m, n, .. } => {
                let (m, n) = (*m, *n);
                if i0 < m {
                    out[i0] = 1.0;
                    for k in 0..n - m {
                        let mut s = 0.0;
                        for l in 0..m {
                            s += self.w(k, i0, l) * p[l];
                        }
                        out[m + k] = s;
                    }
                } else {
                    out[i0] = delta;
                }
            }
            GroupSpec::Se2 => {
                let th = p[2];
                match i0 {
                    0 => {
                        out[0] = math::cos(th);
                        out[1] = math::sin(th);
                    }
                    1 => out[2] = 1.0,
                    _ => {
                        out[0] = -delta * math::sin(th);
                        out[1] = delta * math::cos(th);
                    }
                }
            }
        }
    }

    /// `jac[a * n + b] = ∂ c_a / ∂ x_b` for the coefficients of `X_{iδ}`.
    fn frame_jacobian_into(&self, i0: usize, delta: f64, p: &[f64], jac: &mut [f64]) {
        let n = self.n();
        jac.iter_mut().for_each(|c| *c = 0.0);
        match &self.spec {
            GroupSpec::Carnot { m, .. } => {
                let m = *m;
                if i0 < m {
                    for k in 0..n - m {
                        for b in 0..m {
                            jac[(m + k) * n + b] = self.w(k, i0, b);
                        }
                    }
                }
            }
            GroupSpec::Se2 => {
                let th = p[2];
                match i0 {
                    0 => {
                        jac[2] = -math::sin(th);
                        jac[n + 2] = math::cos(th);
                    }
                    1 => {}
                    _ => {
                        jac[2] = -delta * math::cos(th);
                        jac[n + 2] = -delta * math::sin(th);
                    }
                }
            }
        }
    }

    fn bracket_any(&self, i0: usize, j0: usize, delta: f64, p: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut ci = vec![0.0; n];
        let mut cj = vec![0.0; n];
        let mut ji = vec![0.0; n * n];
        let mut jj = vec![0.0; n * n];
        self.frame_into(i0, delta, p, &mut ci);
        self.frame_into(j0, delta, p, &mut cj);
        self.frame_jacobian_into(i0, delta, p, &mut ji);
        self.frame_jacobian_into(j0, delta, p, &mut jj);
        (0..n)
            .map(|c| {
                (0..n)
                    .map(|b| ci[b] * jj[c * n + b] - cj[b] * ji[c * n + b])
                    .sum()
            })
            .collect()
    }

    /// Coefficients of `[X_i, X_j]` at `p`, for horizontal `i, j`.
    pub fn lie_bracket(&self, i: usize, j: usize, p: &[f64]) -> Result<Vec<f64>> {
        let m = self.m();
        self.check_index(i, m)?;
        self.check_index(j, m)?;
        assert_eq!(p.len(), self.n(), "point dimension");
        Ok(self.bracket_any(i - 1, j - 1, 1.0, p))
    }

    /// Rank of `{X_i} ∪ {[X_i, X_j]}` at `p`.
    fn step2_rank(&self, p: &[f64]) -> usize {
        let n = self.n();
        let m = self.m();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for i in 0..m {
            let mut c = vec![0.0; n];
            self.frame_into(i, 1.0, p, &mut c);
            cols.push(c);
        }
        for i in 0..m {
            for j in i + 1..m {
                cols.push(self.bracket_any(i, j, 1.0, p));
            }
        }
        let mat = DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
        let sv = mat.singular_values();
        let largest = sv.iter().cloned().fold(0.0_f64, f64::max);
        if largest == 0.0 {
            return 0;
        }
        sv.iter()
            .filter(|&&s| s >= RANK_TOLERANCE * largest)
            .count()
    }

    /// SE(2) reference angle `θ_0` for the pair under the configured policy.
    pub fn reference_angle(&self, xi: &[f64], eta: &[f64]) -> f64 {
        match self.theta_policy {
            ThetaPolicy::Left => xi[2],
            ThetaPolicy::Midpoint => eta[2] + 0.5 * math::wrap_angle(xi[2] - eta[2]),
        }
    }

    /// Exponential increments of `η` relative to `ξ`.
    pub fn increments(&self, xi: &[f64], eta: &[f64]) -> IncrementVector {
        let theta0 = if self.is_se2() {
            self.reference_angle(xi, eta)
        } else {
            0.0
        };
        self.increments_anchored(xi, eta, theta0)
    }

    /// Increments with an explicit SE(2) reference angle (ignored for Carnot groups).
    pub fn increments_anchored(&self, xi: &[f64], eta: &[f64], theta0: f64) -> IncrementVector {
        let n = self.n();
        assert!(xi.len() == n && eta.len() == n, "point dimension");
        let mut e = vec![0.0; n];
        match &self.spec {
            GroupSpec::Carnot { m, .. } => {
                let m = *m;
                for i in 0..m {
                    e[i] = xi[i] - eta[i];
                }
                for k in 0..n - m {
                    let mut s = 0.0;
                    for l in 0..m {
                        for j in 0..m {
                            s += self.w(k, l, j) * (xi[j] * eta[l] - xi[l] * eta[j]);
                        }
                    }
                    e[m + k] = xi[m + k] - eta[m + k] + 0.5 * s;
                }
            }
            GroupSpec::Se2 => {
                let dx = xi[0] - eta[0];
                let dy = xi[1] - eta[1];
                let (s0, c0) = (math::sin(theta0), math::cos(theta0));
                e[0] = c0 * dx + s0 * dy;
                e[1] = math::sin(xi[2] - eta[2]);
                e[2] = -s0 * dx + c0 * dy;
            }
        }
        IncrementVector(e)
    }

    /// `(d_β, d_0, d_3)` from a precomputed increment vector.
    pub fn distance_from_increments(&self, e: &[f64], beta: f64) -> DistanceTriple {
        let m = self.m();
        let h: f64 = e[..m].iter().map(|v| v * v).sum();
        let v: f64 = e[m..].iter().map(|v| v * v).sum();
        let d0sq = h;
        let d3sq = beta * beta * v;
        DistanceTriple {
            d_beta: math::sqrt(d0sq + d3sq),
            d_0: math::sqrt(d0sq),
            d_3: math::sqrt(d3sq),
        }
    }

    pub fn distance_beta(&self, xi: &[f64], eta: &[f64], beta: f64) -> DistanceTriple {
        self.distance_from_increments(&self.increments(xi, eta), beta)
    }

    /// Homogeneous pseudo-norm used for asymptotics: `(x² + y²)^{1/2}` on
    /// SE(2) and `(|x|⁴ + |θ|²)^{1/4}` on Carnot groups.
    pub fn pseudo_norm(&self, p: &[f64]) -> f64 {
        match self.spec {
            GroupSpec::Se2 => math::sqrt(p[0] * p[0] + p[1] * p[1]),
            GroupSpec::Carnot { m, .. } => {
                let x2: f64 = p[..m].iter().map(|v| v * v).sum();
                let t2: f64 = p[m..].iter().map(|v| v * v).sum();
                math::sqrt(math::sqrt(x2 * x2 + t2))
            }
        }
    }

    /// Largest sampled ratio `|u(ξ) - u(η)| / d_β(ξ, η)`.
    ///
    /// This is a lower bound for the Lipschitz constant of `u` with respect
    /// to `d_β`. Pairs at zero distance are skipped.
    pub fn lipschitz_estimate(&self, samples: &[(Point, f64)], beta: f64) -> Result<f64> {
        if samples.len() < 2 {
            return Err(Error::TooFewSamples {
                got: samples.len(),
                need: 2,
            });
        }
        let mut best = 0.0_f64;
        for (a, (pa, ua)) in samples.iter().enumerate() {
            for (pb, ub) in &samples[a + 1..] {
                let d = self.distance_beta(pa, pb, beta).d_beta;
                if d > 0.0 {
                    best = best.max(math::abs(ua - ub) / d);
                }
            }
        }
        Ok(best)
    }
}
