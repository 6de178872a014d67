//! The doubling-of-variables test function
//!
//! `φ(ξ, η, t) = (μ/γ) ε^{1-γ/2} d_β(ξ, η)^γ + (M t / 2T) ε^α`
//!
//! with exact first and second frame derivatives in both variables, sampling
//! audits of the derivative bounds used by the comparison argument, and the
//! grid search for the maximum of `ω = u(ξ) - u^ε(η) - φ`.
//!
//! Derivatives are taken along the frames `X^ξ_{iδ}` and `X^η_{iδ}`. On SE(2)
//! the increments depend on a reference angle `θ_0`; derivatives hold it
//! fixed at its value for the pair, so they are the derivatives of
//! `ξ, η ↦ d_β` with a frozen frame.
//!
//! Derivative vectors over both variables are indexed `a = ζ n + (i - 1)`,
//! with `ζ = 0` for `ξ` and `ζ = 1` for `η`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::field::ScalarField;
use crate::flow::Trajectory;
use crate::group::{DistanceTriple, GroupSpec, IncrementVector, Point, ValidatedGroup};
use crate::math::{self, PI, TAU};
use crate::sampling;
use crate::{Error, Result};

/// Relative drift allowed between an audit and the same audit on twice the samples.
pub const STABILITY_DRIFT: f64 = 0.05;
/// Minimum sample count for an audit.
pub const MIN_AUDIT_SAMPLES: usize = 100;
/// Gradient tolerance for the zero-gradient implication.
pub const ZERO_GRADIENT_TOL: f64 = 1e-12;

/// Parameters of `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiParams {
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub m_const: f64,
    pub alpha: f64,
    pub final_time: f64,
    pub lip_u0: f64,
    pub sigma: f64,
}

impl PhiParams {
    /// Parameters with the coupling `β = δ = ε^σ`.
    pub fn coupled(
        gamma: f64,
        epsilon: f64,
        sigma: f64,
        m_const: f64,
        alpha: f64,
        final_time: f64,
        lip_u0: f64,
    ) -> Self {
        let bd = math::powf(epsilon, sigma);
        PhiParams {
            gamma,
            beta: bd,
            delta: bd,
            epsilon,
            m_const,
            alpha,
            final_time,
            lip_u0,
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 2.0) {
            return Err(Error::BadParams("gamma must exceed 2"));
        }
        if !(self.m_const > 0.0) {
            return Err(Error::BadParams("M must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::BadParams("epsilon must lie in (0, 1)"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) || !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::BadParams("beta and delta must lie in (0, 1]"));
        }
        if !(self.alpha > 0.0) || !(self.final_time > 0.0) || !(self.lip_u0 >= 0.0) {
            return Err(Error::BadParams(
                "alpha, T must be positive and Lip(u0) nonnegative",
            ));
        }
        Ok(())
    }

    /// `μ = γ 4^γ Lip(u_0)^γ / M^{γ-1}`.
    pub fn mu(&self) -> f64 {
        self.gamma * math::powf(4.0, self.gamma) * math::powf(self.lip_u0, self.gamma)
            / math::powf(self.m_const, self.gamma - 1.0)
    }

    /// `μ ε^{1-γ/2}`, the common scale of the derivative bounds.
    fn scale(&self) -> f64 {
        self.mu() * math::powf(self.epsilon, 1.0 - 0.5 * self.gamma)
    }

    fn time_term(&self, t: f64) -> f64 {
        self.m_const * t / (2.0 * self.final_time) * math::powf(self.epsilon, self.alpha)
    }
}

/// `μ` after validating `γ > 2` and `M > 0`.
pub fn mu_of(params: &PhiParams) -> Result<f64> {
    if !(params.gamma > 2.0) {
        return Err(Error::BadParams("gamma must exceed 2"));
    }
    if !(params.m_const > 0.0) {
        return Err(Error::BadParams("M must be positive"));
    }
    Ok(params.mu())
}

pub fn phi(
    params: &PhiParams,
    group: &ValidatedGroup,
    xi: &[f64],
    eta: &[f64],
    t: f64,
) -> Result<f64> {
    params.validate()?;
    if !(t >= 0.0 && t <= params.final_time) {
        return Err(Error::BadParams("t must lie in [0, T]"));
    }
    let d = group.distance_beta(xi, eta, params.beta).d_beta;
    Ok(params.scale() / params.gamma * math::powf(d, params.gamma) + params.time_term(t))
}

/// `ω = u(ξ) - u^ε(η) - φ(ξ, η, t)` with multilinear interpolation.
pub fn omega(
    params: &PhiParams,
    group: &ValidatedGroup,
    u: &ScalarField,
    ueps: &ScalarField,
    xi: &[f64],
    eta: &[f64],
    t: f64,
) -> Result<f64> {
    Ok(u.interpolate(xi)? - ueps.interpolate(eta)? - phi(params, group, xi, eta, t)?)
}

/// Increments with their first and second frame derivatives.
struct IncrementJet {
    e: Vec<f64>,
    /// `de[a][k] = Y_a e_k`
    de: Vec<Vec<f64>>,
    /// `dde[a * 2n + b][k] = Y_a(Y_b e_k)`
    dde: Vec<Vec<f64>>,
}

fn increment_jet(group: &ValidatedGroup, xi: &[f64], eta: &[f64], delta: f64) -> IncrementJet {
    let n = group.n();
    let nn = 2 * n;
    let mut de = vec![vec![0.0; n]; nn];
    let mut dde = vec![vec![0.0; n]; nn * nn];
    let sign = |zeta: usize| if zeta == 0 { 1.0 } else { -1.0 };
    let e = match group.spec() {
        GroupSpec::Carnot { m, layers, .. } => {
            let m = *m;
            for zeta in 0..2 {
                let s = sign(zeta);
                let e = group.increments(xi, eta);
                for i in 0..n {
                    let row = &mut de[zeta * n + i];
                    if i < m {
                        row[i] = s;
                        for (k, w) in layers.iter().enumerate() {
                            row[m + k] = (0..m).map(|l| w[i * m + l] * e[l]).sum();
                        }
                    } else {
                        row[i] = s * delta;
                    }
                }
            }
            for za in 0..2 {
                for i in 0..m {
                    for zb in 0..2 {
                        for j in 0..m {
                            let out = &mut dde[(za * n + i) * nn + zb * n + j];
                            for (k, w) in layers.iter().enumerate() {
                                out[m + k] = sign(za) * w[j * m + i];
                            }
                        }
                    }
                }
            }
            group.increments(xi, eta).0
        }
        GroupSpec::Se2 => {
            let theta0 = group.reference_angle(xi, eta);
            let u = xi[2] - eta[2];
            let (su, cu) = (math::sin(u), math::cos(u));
            let phase = |zeta: usize| {
                let th = if zeta == 0 { xi[2] } else { eta[2] };
                let p = th - theta0;
                (math::sin(p), math::cos(p))
            };
            for zeta in 0..2 {
                let s = sign(zeta);
                let (sp, cp) = phase(zeta);
                de[zeta * n] = vec![s * cp, 0.0, s * sp];
                de[zeta * n + 1] = vec![0.0, s * cu, 0.0];
                de[zeta * n + 2] = vec![-s * delta * sp, 0.0, s * delta * cp];
            }
            // Only ∂_θ (the field X_2) acts on the first derivatives.
            for za in 0..2 {
                let s1 = sign(za);
                let a = za * n + 1;
                for zb in 0..2 {
                    let s2 = sign(zb);
                    let (sp, cp) = phase(zb);
                    if za == zb {
                        dde[a * nn + zb * n] = vec![-s2 * sp, 0.0, s2 * cp];
                        dde[a * nn + zb * n + 2] = vec![-s2 * delta * cp, 0.0, -s2 * delta * sp];
                    }
                    dde[a * nn + zb * n + 1] = vec![0.0, -s1 * s2 * su, 0.0];
                }
            }
            group.increments_anchored(xi, eta, theta0).0
        }
    };
    IncrementJet { e, de, dde }
}

/// First and second derivatives of `φ` at a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiJet {
    /// `first[a] = Y_a φ` over `a = 0..2n`.
    pub first: Vec<f64>,
    /// `second[a * 2n + b] = Y_a(Y_b φ)`.
    pub second: Vec<f64>,
    pub distance: DistanceTriple,
    pub increments: IncrementVector,
}

impl PhiJet {
    pub fn dim(&self) -> usize {
        self.first.len() / 2
    }

    pub fn xi(&self) -> &[f64] {
        &self.first[..self.dim()]
    }

    pub fn eta(&self) -> &[f64] {
        &self.first[self.dim()..]
    }

    pub fn second_at(&self, a: usize, b: usize) -> f64 {
        self.second[a * self.first.len() + b]
    }
}

/// Exact derivatives of `φ` in both variables.
pub fn phi_jet(
    params: &PhiParams,
    group: &ValidatedGroup,
    xi: &[f64],
    eta: &[f64],
) -> Result<PhiJet> {
    params.validate()?;
    let n = group.n();
    let m = group.m();
    let nn = 2 * n;
    let jet = increment_jet(group, xi, eta, params.delta);
    let b2 = params.beta * params.beta;
    let w: Vec<f64> = (0..n).map(|k| if k < m { 1.0 } else { b2 }).collect();
    let dsq: f64 = (0..n).map(|k| w[k] * jet.e[k] * jet.e[k]).sum();
    if !(dsq > 0.0) {
        return Err(Error::DegeneratePair);
    }
    let g = 0.5 * params.gamma;
    let a_coef = params.scale() / params.gamma;
    let dd: Vec<f64> = (0..nn)
        .map(|a| 2.0 * (0..n).map(|k| w[k] * jet.e[k] * jet.de[a][k]).sum::<f64>())
        .collect();
    let p1 = a_coef * g * math::powf(dsq, g - 1.0);
    let p2 = a_coef * g * (g - 1.0) * math::powf(dsq, g - 2.0);
    let first: Vec<f64> = dd.iter().map(|v| p1 * v).collect();
    let mut second = vec![0.0; nn * nn];
    for a in 0..nn {
        for b in 0..nn {
            let hd: f64 = 2.0
                * (0..n)
                    .map(|k| {
                        w[k] * (jet.de[a][k] * jet.de[b][k] + jet.e[k] * jet.dde[a * nn + b][k])
                    })
                    .sum::<f64>();
            second[a * nn + b] = p2 * dd[a] * dd[b] + p1 * hd;
        }
    }
    let distance = group.distance_from_increments(&jet.e, params.beta);
    Ok(PhiJet {
        first,
        second,
        distance,
        increments: IncrementVector(jet.e),
    })
}

/// `(X^ξ_{iδ}φ, X^η_{iδ}φ)` for `i = 1..n`.
pub fn phi_first_derivatives(
    params: &PhiParams,
    group: &ValidatedGroup,
    xi: &[f64],
    eta: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let j = phi_jet(params, group, xi, eta)?;
    Ok((j.xi().to_vec(), j.eta().to_vec()))
}

/// A sampled pair with its increments.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    pub xi: Point,
    pub eta: Point,
    pub t: f64,
    pub increments: IncrementVector,
    pub distance: DistanceTriple,
}

/// `η` such that the increments of `η` relative to `ξ` equal `e`.
///
/// On SE(2) this needs `|e_2| < 1` and uses the midpoint reference angle.
pub fn eta_from_increments(group: &ValidatedGroup, xi: &[f64], e: &[f64]) -> Vec<f64> {
    match group.spec() {
        GroupSpec::Carnot { m, n, layers } => {
            let (m, n) = (*m, *n);
            let mut eta = vec![0.0; n];
            for i in 0..m {
                eta[i] = xi[i] - e[i];
            }
            for (k, w) in layers.iter().enumerate() {
                let mut s = 0.0;
                for l in 0..m {
                    for j in 0..m {
                        s += w[l * m + j] * (xi[j] * eta[l] - xi[l] * eta[j]);
                    }
                }
                eta[m + k] = xi[m + k] - e[m + k] + 0.5 * s;
            }
            eta
        }
        GroupSpec::Se2 => {
            let th_eta = xi[2] - math::asin(e[1]);
            let theta0 = match group.theta_policy() {
                crate::ThetaPolicy::Left => xi[2],
                crate::ThetaPolicy::Midpoint => 0.5 * (xi[2] + th_eta),
            };
            let (s0, c0) = (math::sin(theta0), math::cos(theta0));
            let dx = c0 * e[0] - s0 * e[2];
            let dy = s0 * e[0] + c0 * e[2];
            vec![xi[0] - dx, xi[1] - dy, th_eta]
        }
    }
}

/// Pairs with `0 < d_β ≤ 1`, `ξ` uniform in a unit box and the increment
/// vector uniform in the `d_β` unit ball. On SE(2), `|θ_ξ - θ_η| ≤ π/4`.
pub fn sample_pairs(
    group: &ValidatedGroup,
    beta: f64,
    t_max: f64,
    count: usize,
    seed: u64,
) -> Vec<SamplePair> {
    let n = group.n();
    let m = group.m();
    let se2 = group.is_se2();
    let max_e2 = math::sin(0.25 * PI);
    sampling::sample(seed, count, |rng| loop {
        let xi: Vec<f64> = (0..n)
            .map(|a| {
                if se2 && a == 2 {
                    rng.gen_range(0.0..TAU)
                } else {
                    rng.gen_range(-1.0..=1.0)
                }
            })
            .collect();
        let dir: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
        let norm = math::sqrt(dir.iter().map(|v| v * v).sum());
        if !(norm > 1e-12) {
            continue;
        }
        let rho = math::powf(rng.gen::<f64>(), 1.0 / n as f64);
        if !(rho > 0.0) {
            continue;
        }
        let e: Vec<f64> = (0..n)
            .map(|k| {
                let v = rho * dir[k] / norm;
                if k < m {
                    v
                } else {
                    v / beta
                }
            })
            .collect();
        if se2 && math::abs(e[1]) > max_e2 {
            continue;
        }
        let t = t_max * rng.gen::<f64>();
        let eta = eta_from_increments(group, &xi, &e);
        let increments = group.increments(&xi, &eta);
        let distance = group.distance_from_increments(&increments, beta);
        if !(distance.d_beta > 0.0 && distance.d_beta <= 1.0) {
            continue;
        }
        break SamplePair {
            xi: Point::new(xi),
            eta: Point::new(eta),
            t,
            increments,
            distance,
        };
    })
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; the first uniform is kept away from 0.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(TAU * u2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `lhs ≤ K rhs`: the audit reports `max lhs/rhs`.
    Upper,
    /// `lhs ≥ rhs`: the audit reports `min lhs/rhs`.
    Lower,
}

/// Empirical constant of one inequality over a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAudit {
    pub id: &'static str,
    pub kind: BoundKind,
    pub samples: usize,
    /// `max lhs/rhs` (upper) or `min lhs/rhs` (lower) over all samples.
    pub ratio: f64,
    /// Same over the first half of the samples.
    pub half_ratio: f64,
    pub argmax: usize,
    pub argmax_pair: (Vec<f64>, Vec<f64>),
    /// `|ratio - half_ratio| / |half_ratio|`.
    pub drift: f64,
    pub stable: bool,
    /// Whether the inequality holds with ratio ≥ 1 - 1e-9 (lower bounds only).
    pub holds: Option<bool>,
}

impl BoundAudit {
    /// Upper bounds: finite and stable ratio. Lower bounds: the inequality holds.
    pub fn pass(&self) -> bool {
        match self.kind {
            BoundKind::Upper => self.ratio.is_finite() && self.stable,
            BoundKind::Lower => self.holds == Some(true),
        }
    }
}

/// `lhs / rhs`, with `0/0 = 0` for upper bounds and `None` (skip) for lower bounds.
fn ratio(lhs: f64, rhs: f64, kind: BoundKind) -> Option<f64> {
    if rhs > 0.0 {
        Some(lhs / rhs)
    } else {
        match kind {
            BoundKind::Upper if lhs == 0.0 => Some(0.0),
            BoundKind::Upper => Some(f64::INFINITY),
            BoundKind::Lower => None,
        }
    }
}

fn build_audit(
    id: &'static str,
    kind: BoundKind,
    pairs: &[SamplePair],
    ratios: &[Option<f64>],
) -> BoundAudit {
    let extreme = |upto: usize| -> (f64, usize) {
        let mut best = match kind {
            BoundKind::Upper => f64::NEG_INFINITY,
            BoundKind::Lower => f64::INFINITY,
        };
        let mut arg = 0;
        for (k, r) in ratios[..upto].iter().enumerate() {
            if let Some(r) = *r {
                let better = match kind {
                    BoundKind::Upper => r > best,
                    BoundKind::Lower => r < best,
                };
                if better {
                    best = r;
                    arg = k;
                }
            }
        }
        (best, arg)
    };
    let (r_full, arg) = extreme(ratios.len());
    let (r_half, _) = extreme(ratios.len() / 2);
    let drift = if r_full == r_half {
        0.0
    } else {
        math::abs(r_full - r_half) / math::abs(r_half)
    };
    let holds = match kind {
        BoundKind::Lower => Some(r_full >= 1.0 - 1e-9),
        BoundKind::Upper => None,
    };
    BoundAudit {
        id,
        kind,
        samples: ratios.len(),
        ratio: r_full,
        half_ratio: r_half,
        argmax: arg,
        argmax_pair: (pairs[arg].xi.to_vec(), pairs[arg].eta.to_vec()),
        drift,
        stable: drift.is_finite() && drift < STABILITY_DRIFT,
        holds,
    }
}

fn audit_pairs(
    params: &PhiParams,
    group: &ValidatedGroup,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<SamplePair>> {
    params.validate()?;
    if n_samples < MIN_AUDIT_SAMPLES {
        return Err(Error::TooFewSamples {
            got: n_samples,
            need: MIN_AUDIT_SAMPLES,
        });
    }
    // Twice the samples: the first half is the baseline for the drift.
    Ok(sample_pairs(
        group,
        params.beta,
        params.final_time,
        2 * n_samples,
        seed,
    ))
}

/// Audits of the first-derivative bounds.
///
/// * `firstderivphi`: `|X^ζ_i φ| ≤ K μ ε^{1-γ/2} d_β^{γ-2} d_0`, `deg i = 1`;
/// * `firstderivphi_sum`: `|X^ξ_i φ + X^η_i φ| ≤ K μ ε^{1-γ/2} d_β^{γ-1} d_0 β`;
/// * `remarkderivative`: `|X^ζ_{iδ} φ| ≤ K μ ε^{1-γ/2} d_β^{γ-2} d_0 δ (d_β + β)`, `deg i = 2`;
/// * `remarkderivative_sum`: `|X^ξ_{iδ} φ + X^η_{iδ} φ| ≤ K μ ε^{1-γ/2} d_β^γ δ`;
/// * `remarkderivative_vertical`: `|X^ζ_{iδ} φ| ≤ K μ ε^{1-γ/2} d_β^{γ-2} δ (d_0 + β d_3)`,
///   `deg i = 2`. Unlike `remarkderivative` this keeps the `β² e_i δ` term
///   that survives when `d_0 = 0`;
/// * `remarknabla`: `|∇^ζ_0 φ| ≥ μ ε^{1-γ/2} d_β^{γ-2} d_0`;
/// * `remarknabla_delta`: `|∇^η_δ φ|² ≥ γ² μ² ε^{2-γ} (d_0^{2γ-2} + β² δ² d_3^{2γ-2})`.
///
/// Each audit runs on `2 n_samples` pairs; the drift compares against the
/// first `n_samples`.
pub fn audit_lemma42(
    params: &PhiParams,
    group: &ValidatedGroup,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<BoundAudit>> {
    let pairs = audit_pairs(params, group, n_samples, seed)?;
    let n = group.n();
    let m = group.m();
    let scale = params.scale();
    let (g, beta, delta) = (params.gamma, params.beta, params.delta);
    let jets: Vec<PhiJet> = crate::par::map_collect(pairs.len(), |k| {
        phi_jet(params, group, &pairs[k].xi, &pairs[k].eta)
            .expect("sampled pairs are non-degenerate")
    });
    let mut cols: Vec<Vec<Option<f64>>> = (0..7).map(|_| Vec::with_capacity(pairs.len())).collect();
    for (p, j) in pairs.iter().zip(&jets) {
        let d = p.distance.d_beta;
        let d0 = p.distance.d_0;
        let d3 = p.distance.d_3;
        let base = scale * math::powf(d, g - 2.0);
        let horiz = (0..m)
            .map(|i| math::abs(j.first[i]).max(math::abs(j.first[n + i])))
            .fold(0.0, f64::max);
        let horiz_sum = (0..m)
            .map(|i| math::abs(j.first[i] + j.first[n + i]))
            .fold(0.0, f64::max);
        let vert = (m..n)
            .map(|i| math::abs(j.first[i]).max(math::abs(j.first[n + i])))
            .fold(0.0, f64::max);
        let vert_sum = (m..n)
            .map(|i| math::abs(j.first[i] + j.first[n + i]))
            .fold(0.0, f64::max);
        let grad0 = |zeta: usize| {
            math::sqrt(
                (0..m)
                    .map(|i| j.first[zeta * n + i] * j.first[zeta * n + i])
                    .sum(),
            )
        };
        let grad_delta_eta_sq: f64 = (0..n).map(|i| j.first[n + i] * j.first[n + i]).sum();
        cols[0].push(ratio(horiz, base * d0, BoundKind::Upper));
        cols[1].push(ratio(horiz_sum, base * d * d0 * beta, BoundKind::Upper));
        cols[2].push(ratio(
            vert,
            base * d0 * delta * (d + beta),
            BoundKind::Upper,
        ));
        cols[3].push(ratio(vert_sum, base * d * d * delta, BoundKind::Upper));
        cols[4].push(ratio(grad0(0).min(grad0(1)), base * d0, BoundKind::Lower));
        let rhs = g
            * g
            * scale
            * scale
            * (math::powf(d0, 2.0 * g - 2.0)
                + beta * beta * delta * delta * math::powf(d3, 2.0 * g - 2.0));
        cols[5].push(ratio(grad_delta_eta_sq, rhs, BoundKind::Lower));
        cols[6].push(ratio(
            vert,
            base * delta * (d0 + beta * d3),
            BoundKind::Upper,
        ));
    }
    let mut out = vec![
        build_audit("firstderivphi", BoundKind::Upper, &pairs, &cols[0]),
        build_audit("firstderivphi_sum", BoundKind::Upper, &pairs, &cols[1]),
    ];
    if n > m {
        out.push(build_audit(
            "remarkderivative",
            BoundKind::Upper,
            &pairs,
            &cols[2],
        ));
        out.push(build_audit(
            "remarkderivative_sum",
            BoundKind::Upper,
            &pairs,
            &cols[3],
        ));
        out.push(build_audit(
            "remarkderivative_vertical",
            BoundKind::Upper,
            &pairs,
            &cols[6],
        ));
    }
    out.push(build_audit(
        "remarknabla",
        BoundKind::Lower,
        &pairs,
        &cols[4],
    ));
    out.push(build_audit(
        "remarknabla_delta",
        BoundKind::Lower,
        &pairs,
        &cols[5],
    ));
    Ok(out)
}

/// Audits of the second-derivative bounds, all in the `η` variable except
/// the last:
///
/// * `secondorder_11`: `|X^η_i X^η_j φ| ≤ K μ ε^{1-γ/2} d_β^{γ-2}`, `deg i = deg j = 1`;
/// * `secondorder_12`: same with a factor `δ`, exactly one of `i, j` of degree 2;
/// * `secondorder_22`: same with a factor `δ²`, `deg i = deg j = 2`;
/// * `hessian_sum`: `|X^ζ_i (X^ξ_j φ + X^η_j φ)| ≤ K μ ε^{1-γ/2} β d_β^{γ-2}`, any degrees.
pub fn audit_lemma44(
    params: &PhiParams,
    group: &ValidatedGroup,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<BoundAudit>> {
    let pairs = audit_pairs(params, group, n_samples, seed)?;
    let n = group.n();
    let m = group.m();
    let scale = params.scale();
    let jets: Vec<PhiJet> = crate::par::map_collect(pairs.len(), |k| {
        phi_jet(params, group, &pairs[k].xi, &pairs[k].eta)
            .expect("sampled pairs are non-degenerate")
    });
    let mut cols: Vec<Vec<Option<f64>>> = (0..4).map(|_| Vec::with_capacity(pairs.len())).collect();
    for (p, jet) in pairs.iter().zip(&jets) {
        let base = scale * math::powf(p.distance.d_beta, params.gamma - 2.0);
        let mut worst = [0.0_f64; 3];
        for i in 0..n {
            for j in 0..n {
                let v = math::abs(jet.second_at(n + i, n + j));
                let class = usize::from(i >= m) + usize::from(j >= m);
                worst[class] = worst[class].max(v);
            }
        }
        let mut sum = 0.0_f64;
        for a in 0..2 * n {
            for j in 0..n {
                sum = sum.max(math::abs(jet.second_at(a, j) + jet.second_at(a, n + j)));
            }
        }
        cols[0].push(ratio(worst[0], base, BoundKind::Upper));
        cols[1].push(ratio(worst[1], base * params.delta, BoundKind::Upper));
        cols[2].push(ratio(
            worst[2],
            base * params.delta * params.delta,
            BoundKind::Upper,
        ));
        cols[3].push(ratio(sum, base * params.beta, BoundKind::Upper));
    }
    let mut out = vec![build_audit(
        "secondorder_11",
        BoundKind::Upper,
        &pairs,
        &cols[0],
    )];
    if n > m {
        out.push(build_audit(
            "secondorder_12",
            BoundKind::Upper,
            &pairs,
            &cols[1],
        ));
        out.push(build_audit(
            "secondorder_22",
            BoundKind::Upper,
            &pairs,
            &cols[2],
        ));
    }
    out.push(build_audit(
        "hessian_sum",
        BoundKind::Upper,
        &pairs,
        &cols[3],
    ));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroGradientReport {
    pub pairs: usize,
    /// Largest `|∇^ξ_0 φ|` over the constructed pairs (should be 0).
    pub max_xi_gradient: f64,
    /// Largest `|∇^η_0 φ|` over the constructed pairs.
    pub max_eta_gradient: f64,
    pub pass: bool,
}

/// Builds pairs with `∇^ξ_0 φ = 0` and checks `|∇^η_0 φ| ≤ 1e-12`.
///
/// Carnot pairs differ only in the vertical coordinates. SE(2) pairs share
/// the angle and differ along the in-plane normal `(-sin θ, cos θ)`. The pair
/// `ξ = η` is included.
pub fn check_zero_gradient_implication(
    params: &PhiParams,
    group: &ValidatedGroup,
    n_samples: usize,
    seed: u64,
) -> Result<ZeroGradientReport> {
    params.validate()?;
    let n = group.n();
    let m = group.m();
    let se2 = group.is_se2();
    let beta = params.beta;
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = sampling::sample(seed, n_samples, |rng| {
        let xi: Vec<f64> = (0..n)
            .map(|a| {
                if se2 && a == 2 {
                    rng.gen_range(0.0..TAU)
                } else {
                    rng.gen_range(-1.0..=1.0)
                }
            })
            .collect();
        let mut e = vec![0.0; n];
        for v in e.iter_mut().skip(m) {
            *v = rng.gen_range(-1.0..=1.0) / beta;
        }
        let eta = eta_from_increments(group, &xi, &e);
        (xi, eta)
    });
    let origin: Vec<f64> = vec![0.25; n];
    pairs.push((origin.clone(), origin));
    let mut max_xi = 0.0_f64;
    let mut max_eta = 0.0_f64;
    for (xi, eta) in &pairs {
        let (gx, ge) = match phi_jet(params, group, xi, eta) {
            Ok(j) => {
                let g = |z: usize| {
                    math::sqrt(
                        (0..m)
                            .map(|i| j.first[z * n + i] * j.first[z * n + i])
                            .sum(),
                    )
                };
                (g(0), g(1))
            }
            // φ is flat to first order at coincidence.
            Err(Error::DegeneratePair) => (0.0, 0.0),
            Err(e) => return Err(e),
        };
        max_xi = max_xi.max(gx);
        max_eta = max_eta.max(ge);
    }
    Ok(ZeroGradientReport {
        pairs: pairs.len(),
        max_xi_gradient: max_xi,
        max_eta_gradient: max_eta,
        pass: max_eta <= ZERO_GRADIENT_TOL,
    })
}

/// Grid maximizer of `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMax {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub t: f64,
    pub snapshot: usize,
    pub omega: f64,
    pub d_beta: f64,
    /// Localization radius; `None` when the expression under the root is negative.
    pub radius: Option<f64>,
    pub t_positive: bool,
    pub within_radius: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaxOmegaOutcome {
    /// `sup_{t>0} (u - u^ε) ≤ M ε^α`: nothing to localize.
    HypothesisNotMet {
        sup_diff: f64,
        threshold: f64,
    },
    Located(OmegaMax),
}

/// Searches the grid maximum of `ω` over node pairs and snapshots and checks
/// that it sits at positive time within the localization radius
/// `r = ((2γC/μ) ε^{γ/2-1} - (Mγ/4μ) ε^{α+γ/2-1})^{1/γ}`, `C` the larger sup norm.
pub fn locate_max_omega(
    params: &PhiParams,
    group: &ValidatedGroup,
    u: &Trajectory,
    ueps: &Trajectory,
) -> Result<MaxOmegaOutcome> {
    params.validate()?;
    if u.snapshots.len() != ueps.snapshots.len() || u.snapshots.is_empty() {
        return Err(Error::GridMismatch(
            "trajectories have different snapshot counts",
        ));
    }
    for (a, b) in u.snapshots.iter().zip(&ueps.snapshots) {
        if a.grid() != b.grid() {
            return Err(Error::GridMismatch("trajectories live on different grids"));
        }
        if math::abs(a.time() - b.time()) > 1e-12 * a.time().abs().max(1.0) {
            return Err(Error::GridMismatch("snapshot times differ"));
        }
    }
    let threshold = params.m_const * math::powf(params.epsilon, params.alpha);
    let mut sup_diff = f64::NEG_INFINITY;
    for (a, b) in u.snapshots.iter().zip(&ueps.snapshots) {
        if a.time() > 0.0 {
            for (x, y) in a.values().iter().zip(b.values()) {
                sup_diff = sup_diff.max(x - y);
            }
        }
    }
    if !(sup_diff > threshold) {
        return Ok(MaxOmegaOutcome::HypothesisNotMet {
            sup_diff,
            threshold,
        });
    }

    let grid = u.snapshots[0].grid();
    let len = grid.len();
    let coords: Vec<Vec<f64>> = (0..len).map(|k| grid.coords(k)).collect();
    let a_coef = params.scale() / params.gamma;
    let mut best: Option<(f64, usize, usize, usize)> = None;
    for (s, (us, es)) in u.snapshots.iter().zip(&ueps.snapshots).enumerate() {
        let t = us.time().min(params.final_time);
        let tt = params.time_term(t);
        let uv = us.values();
        let ev = es.values();
        let mut by_u: Vec<usize> = (0..len).collect();
        by_u.sort_by(|&a, &b| uv[b].total_cmp(&uv[a]).then(a.cmp(&b)));
        let mut by_e: Vec<usize> = (0..len).collect();
        by_e.sort_by(|&a, &b| ev[a].total_cmp(&ev[b]).then(a.cmp(&b)));
        let e_min = ev[by_e[0]];
        for &x in &by_u {
            let cap = uv[x] - e_min - tt;
            if best.is_some_and(|b| cap <= b.0) {
                break;
            }
            for &y in &by_e {
                let cap = uv[x] - ev[y] - tt;
                if best.is_some_and(|b| cap <= b.0) {
                    break;
                }
                let d = group
                    .distance_beta(&coords[x], &coords[y], params.beta)
                    .d_beta;
                let w = cap - a_coef * math::powf(d, params.gamma);
                if best.is_none_or(|b| w > b.0) {
                    best = Some((w, x, y, s));
                }
            }
        }
    }
    let (w, x, y, s) = best.expect("grid is nonempty");
    let c_tilde = u
        .snapshots
        .iter()
        .chain(&ueps.snapshots)
        .flat_map(|f| f.values().iter())
        .fold(0.0_f64, |acc, v| acc.max(math::abs(*v)));
    let mu = params.mu();
    let (g, eps) = (params.gamma, params.epsilon);
    let radius = if mu > 0.0 {
        let inner = 2.0 * g * c_tilde / mu * math::powf(eps, 0.5 * g - 1.0)
            - params.m_const * g / (4.0 * mu) * math::powf(eps, params.alpha + 0.5 * g - 1.0);
        (inner >= 0.0).then(|| math::powf(inner, 1.0 / g))
    } else {
        None
    };
    let d_beta = group
        .distance_beta(&coords[x], &coords[y], params.beta)
        .d_beta;
    let t = u.snapshots[s].time();
    Ok(MaxOmegaOutcome::Located(OmegaMax {
        xi: coords[x].clone(),
        eta: coords[y].clone(),
        t,
        snapshot: s,
        omega: w,
        d_beta,
        radius,
        t_positive: t > 0.0,
        within_radius: radius.map(|r| d_beta <= r),
    }))
}

/// `α = (γ-2)(1-4σ) / (2(γ-1))` and the slack `(1-γ/2)(2/γ) + σ - α`.
///
/// Neither is required to be positive.
pub fn schedule_exponents(gamma: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(gamma > 2.0) {
        return Err(Error::BadParams("gamma must exceed 2"));
    }
    if !(sigma > 0.0) {
        return Err(Error::BadParams("sigma must be positive"));
    }
    let alpha = (gamma - 2.0) * (1.0 - 4.0 * sigma) / (2.0 * (gamma - 1.0));
    let slack = (1.0 - 0.5 * gamma) * (2.0 / gamma) + sigma - alpha;
    Ok((alpha, slack))
}
