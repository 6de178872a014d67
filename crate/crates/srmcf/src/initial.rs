//! Named initial data.

use serde::{Deserialize, Serialize};
use srmcf_core::{GridSpec, ScalarField, ValidatedGroup};

use crate::config::FlowSection;

/// Analytic initial data. `ρ` is the group pseudo-norm and `x` the
/// horizontal coordinates (`(x, y)` on SE(2)). Every value is shifted by the
/// `offset` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Primitive {
    /// `height`.
    Constant,
    /// `|x|² - radius²`, negative inside the ball.
    Ball,
    /// `height` on the rectangle of size `length × width` centred at the
    /// origin and turned by `angle` in the plane of the first two axes, 0 off it.
    Bar,
    /// `height · cos²(π ρ / (2 radius))` for `ρ < radius`, 0 beyond.
    CosineBump,
    /// `height · exp(-(ρ / width)²)`.
    Gaussian,
    /// `height · (1 - exp(-rate · ρ))`.
    ExpProfile,
    /// Values read from an SRMCF1 file.
    Snapshot,
}

/// Value of an analytic primitive at `p`.
pub fn eval(kind: Primitive, f: &FlowSection, group: &ValidatedGroup, p: &[f64]) -> f64 {
    let m = if group.is_se2() { 2 } else { group.m() };
    let rho = || group.pseudo_norm(p);
    let v = match kind {
        Primitive::Constant | Primitive::Snapshot => f.height,
        Primitive::Ball => p[..m].iter().map(|x| x * x).sum::<f64>() - f.radius * f.radius,
        Primitive::Bar => {
            let (x, y) = (p[0], p.get(1).copied().unwrap_or(0.0));
            let (s, c) = f.angle.sin_cos();
            let along = c * x + s * y;
            let across = -s * x + c * y;
            if along.abs() <= 0.5 * f.length && across.abs() <= 0.5 * f.width {
                f.height
            } else {
                0.0
            }
        }
        Primitive::CosineBump => {
            let r = rho();
            if r < f.radius {
                let c = (std::f64::consts::FRAC_PI_2 * r / f.radius).cos();
                f.height * c * c
            } else {
                0.0
            }
        }
        Primitive::Gaussian => {
            let r = rho() / f.width;
            f.height * (-r * r).exp()
        }
        Primitive::ExpProfile => f.height * (1.0 - (-f.rate * rho()).exp()),
    };
    v + f.offset
}

pub fn sample(f: &FlowSection, group: &ValidatedGroup, grid: &GridSpec) -> ScalarField {
    ScalarField::from_fn(grid, |p| eval(f.initial, f, group, p))
}
