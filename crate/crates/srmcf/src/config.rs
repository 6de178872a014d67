//! Run configuration.
//!
//! A configuration file is a flat `key = value` document split into the
//! sections `[group]`, `[grid]`, `[flow]`, `[sweep]`, `[barriers]`, `[phi]`
//! and `[inpaint]`. Lines starting with `#` are comments. Strings are quoted,
//! lists use brackets:
//!
//! ```toml
//! [group]
//! kind = "se2"
//!
//! [grid]
//! counts = [32, 32, 16]
//! half_width = 3.0
//!
//! [flow]
//! epsilon = 0.1
//! delta = 0.1
//! final_time = 0.05
//! initial = "cosine-bump"
//! radius = 1.0
//! ```
//!
//! Every key is optional and falls back to the default shown by
//! [`Config::default`]. Unknown sections and keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use srmcf_core::barriers::{DEFAULT_CUBIC_C, DEFAULT_FD_H};
use srmcf_core::phi::PhiParams;
use srmcf_core::{
    Axis, Boundary, FlowProblem, GridSpec, GroupSpec, ScalarField, ThetaPolicy, ValidatedGroup,
};

use crate::error::{AppError, Result};
use crate::initial::{self, Primitive};
use crate::snapshot;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub group: GroupSection,
    pub grid: GridSection,
    pub flow: FlowSection,
    pub sweep: SweepSection,
    pub barriers: BarrierSection,
    pub phi: PhiSection,
    pub inpaint: InpaintSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Heisenberg,
    Se2,
    Euclidean,
    Carnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaPolicyKey {
    Midpoint,
    Left,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupSection {
    pub kind: GroupKind,
    /// Horizontal dimension (`euclidean`, `carnot`).
    pub m: usize,
    /// Total dimension (`carnot`).
    pub n: usize,
    /// The `n - m` matrices `W^{(k)}`, each row-major `m × m`, concatenated.
    pub w: Vec<f64>,
    pub theta_policy: ThetaPolicyKey,
}

impl Default for GroupSection {
    fn default() -> Self {
        GroupSection {
            kind: GroupKind::Se2,
            m: 2,
            n: 3,
            w: Vec::new(),
            theta_policy: ThetaPolicyKey::Midpoint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Nodes per axis.
    pub counts: Vec<usize>,
    /// Non-periodic axes span `[-half_width, half_width]`.
    pub half_width: f64,
    /// Axes to make periodic with period `2 · half_width` (Carnot groups).
    /// The SE(2) angle is always periodic with period 2π.
    pub periodic: Vec<bool>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            counts: vec![32, 32, 16],
            half_width: 3.0,
            periodic: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Free,
    Shell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub epsilon: f64,
    pub delta: f64,
    pub final_time: f64,
    pub cfl_safety: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub snapshot_times: Vec<f64>,
    pub limit_extrema: bool,
    /// Initial datum; see [`Primitive`].
    pub initial: Primitive,
    pub radius: f64,
    pub height: f64,
    pub width: f64,
    pub length: f64,
    pub angle: f64,
    pub rate: f64,
    /// Added to every primitive.
    pub offset: f64,
    /// SRMCF1 file read when `initial = "snapshot"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
    pub boundary: BoundaryKind,
    pub shell_radius: f64,
    pub shell_value: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            epsilon: 0.1,
            delta: 0.1,
            final_time: 0.05,
            cfl_safety: srmcf_core::flow::DEFAULT_CFL_SAFETY,
            dt: None,
            snapshot_times: Vec::new(),
            limit_extrema: true,
            initial: Primitive::CosineBump,
            radius: 1.0,
            height: 1.0,
            width: 1.0,
            length: 2.0,
            angle: 0.0,
            rate: 2.0,
            offset: 0.0,
            snapshot: None,
            boundary: BoundaryKind::Free,
            shell_radius: 2.5,
            shell_value: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
    pub sigma: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierSection {
    pub seed: u64,
    pub samples: usize,
    pub fd_h: f64,
    /// Cubic barrier on SE(2).
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
    pub radius: f64,
    pub t_max: f64,
    /// Exponential barrier.
    pub exp_sigma: f64,
    pub exp_alpha: f64,
    pub exp_final_time: f64,
    pub exp_epsilon: f64,
    pub exp_delta: f64,
    pub exp_radius: f64,
}

impl Default for BarrierSection {
    fn default() -> Self {
        BarrierSection {
            seed: 0,
            samples: 10_000,
            fd_h: DEFAULT_FD_H,
            epsilon: 0.1,
            delta: 0.1,
            c: DEFAULT_CUBIC_C,
            radius: 2.0,
            t_max: 1.0,
            exp_sigma: 1e-2,
            exp_alpha: 0.5,
            exp_final_time: 1.0,
            exp_epsilon: 1e-2,
            exp_delta: 1e-2,
            exp_radius: 3.0,
        }
    }
}

/// Bounds that `verify --check phi` enforces by default.
pub const DEFAULT_ENFORCED_BOUNDS: &[&str] = &[
    "firstderivphi",
    "firstderivphi_sum",
    "remarkderivative_vertical",
    "remarkderivative_sum",
    "remarknabla",
    "secondorder_11",
    "secondorder_12",
    "secondorder_22",
    "hessian_sum",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiSection {
    pub seed: u64,
    pub samples: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub m_const: f64,
    pub alpha: f64,
    pub final_time: f64,
    pub lip: f64,
    /// Audit ids whose failure fails the check; the others are reported only.
    pub enforce: Vec<String>,
}

impl Default for PhiSection {
    fn default() -> Self {
        PhiSection {
            seed: 0,
            samples: 10_000,
            gamma: 4.0,
            epsilon: 0.1,
            sigma: 1.0,
            m_const: 4.0,
            alpha: 0.5,
            final_time: 1.0,
            lip: 1.0,
            enforce: DEFAULT_ENFORCED_BOUNDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InpaintSection {
    /// Grayscale P5 image.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    /// P5 mask of the same size; nonzero pixels are missing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
    pub orientations: usize,
    /// Standard deviation of the Gaussian filters, in pixels.
    pub filter_scale: f64,
    pub pixel_size: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub final_time: f64,
}

impl Default for InpaintSection {
    fn default() -> Self {
        InpaintSection {
            image: None,
            mask: None,
            orientations: 16,
            filter_scale: 1.5,
            pixel_size: 0.02,
            epsilon: 1.0,
            delta: 0.1,
            final_time: 0.02,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| AppError::Config(e.message().to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Config::parse(&text)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config values are always representable")
    }

    /// Overrides every seed key.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.barriers.seed = seed;
        self.phi.seed = seed;
        self
    }

    /// Range checks that do not need the group or grid.
    pub fn check(&self) -> Result<()> {
        let f = &self.flow;
        positive("flow.epsilon", f.epsilon)?;
        if !(f.delta > 0.0 && f.delta <= 1.0) {
            return Err(AppError::key("flow.delta", "must lie in (0, 1]"));
        }
        if !(f.final_time >= 0.0 && f.final_time.is_finite()) {
            return Err(AppError::key("flow.final_time", "must be nonnegative"));
        }
        if !(f.cfl_safety > 0.0 && f.cfl_safety < 1.0) {
            return Err(AppError::key("flow.cfl_safety", "must lie in (0, 1)"));
        }
        if let Some(dt) = f.dt {
            positive("flow.dt", dt)?;
        }
        if f.snapshot_times
            .iter()
            .any(|&t| !(t >= 0.0 && t <= f.final_time))
        {
            return Err(AppError::key(
                "flow.snapshot_times",
                "must lie in [0, final_time]",
            ));
        }
        if f.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(AppError::key("flow.snapshot_times", "must be sorted"));
        }
        if f.initial == Primitive::Snapshot && f.snapshot.is_none() {
            return Err(AppError::key(
                "flow.snapshot",
                "required when initial = \"snapshot\"",
            ));
        }
        if self.grid.counts.iter().any(|&c| c < 3) {
            return Err(AppError::key(
                "grid.counts",
                "every axis needs at least 3 nodes",
            ));
        }
        positive("grid.half_width", self.grid.half_width)?;
        let s = &self.sweep;
        if s.epsilons.len() < 2 {
            return Err(AppError::key("sweep.epsilons", "need at least 2 levels"));
        }
        if s.epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(AppError::key(
                "sweep.epsilons",
                "every level must lie in (0, 1)",
            ));
        }
        if s.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(AppError::key("sweep.epsilons", "must strictly decrease"));
        }
        if !(s.sigma >= 0.0 && s.sigma.is_finite()) {
            return Err(AppError::key("sweep.sigma", "must be nonnegative"));
        }
        let b = &self.barriers;
        if b.samples == 0 {
            return Err(AppError::key("barriers.samples", "must be positive"));
        }
        positive("barriers.fd_h", b.fd_h)?;
        positive("barriers.epsilon", b.epsilon)?;
        positive("barriers.delta", b.delta)?;
        positive("barriers.radius", b.radius)?;
        positive("barriers.exp_sigma", b.exp_sigma)?;
        positive("barriers.exp_alpha", b.exp_alpha)?;
        positive("barriers.exp_final_time", b.exp_final_time)?;
        positive("barriers.exp_epsilon", b.exp_epsilon)?;
        positive("barriers.exp_delta", b.exp_delta)?;
        positive("barriers.exp_radius", b.exp_radius)?;
        if !(b.t_max >= 0.0) {
            return Err(AppError::key("barriers.t_max", "must be nonnegative"));
        }
        if !b.c.is_finite() {
            return Err(AppError::key("barriers.c", "must be finite"));
        }
        let p = &self.phi;
        if !(p.gamma > 2.0) {
            return Err(AppError::key("phi.gamma", "must exceed 2"));
        }
        if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
            return Err(AppError::key("phi.epsilon", "must lie in (0, 1)"));
        }
        positive("phi.sigma", p.sigma)?;
        positive("phi.m_const", p.m_const)?;
        positive("phi.alpha", p.alpha)?;
        positive("phi.final_time", p.final_time)?;
        if !(p.lip >= 0.0 && p.lip.is_finite()) {
            return Err(AppError::key("phi.lip", "must be nonnegative"));
        }
        if p.samples < srmcf_core::phi::MIN_AUDIT_SAMPLES {
            return Err(AppError::key("phi.samples", "need at least 100"));
        }
        let i = &self.inpaint;
        if i.orientations < 8 {
            return Err(AppError::key("inpaint.orientations", "need at least 8"));
        }
        positive("inpaint.filter_scale", i.filter_scale)?;
        positive("inpaint.pixel_size", i.pixel_size)?;
        positive("inpaint.epsilon", i.epsilon)?;
        if !(i.delta > 0.0 && i.delta <= 1.0) {
            return Err(AppError::key("inpaint.delta", "must lie in (0, 1]"));
        }
        if !(i.final_time >= 0.0 && i.final_time.is_finite()) {
            return Err(AppError::key("inpaint.final_time", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        let g = &self.group;
        Ok(match g.kind {
            GroupKind::Heisenberg => GroupSpec::heisenberg(),
            GroupKind::Se2 => GroupSpec::Se2,
            GroupKind::Euclidean => GroupSpec::euclidean(g.m),
            GroupKind::Carnot => {
                if g.n < g.m {
                    return Err(AppError::key("group.n", "must be at least m"));
                }
                let size = g.m * g.m;
                if g.w.len() != (g.n - g.m) * size {
                    return Err(AppError::key(
                        "group.w",
                        format!("expected {} entries", (g.n - g.m) * size),
                    ));
                }
                GroupSpec::carnot(
                    g.m,
                    g.n,
                    g.w.chunks(size.max(1)).map(<[f64]>::to_vec).collect(),
                )
            }
        })
    }

    pub fn group(&self) -> Result<ValidatedGroup> {
        let policy = match self.group.theta_policy {
            ThetaPolicyKey::Midpoint => ThetaPolicy::Midpoint,
            ThetaPolicyKey::Left => ThetaPolicy::Left,
        };
        Ok(self.group_spec()?.validate()?.with_theta_policy(policy))
    }

    pub fn grid(&self, group: &ValidatedGroup) -> Result<GridSpec> {
        let gs = &self.grid;
        if gs.counts.len() != group.n() {
            return Err(AppError::key(
                "grid.counts",
                format!("need {} entries", group.n()),
            ));
        }
        if !gs.periodic.is_empty() && gs.periodic.len() != group.n() {
            return Err(AppError::key(
                "grid.periodic",
                format!("need {} entries", group.n()),
            ));
        }
        let hw = gs.half_width;
        let axes = gs
            .counts
            .iter()
            .enumerate()
            .map(|(a, &count)| {
                if group.periodic_axis() == Some(a) {
                    Axis::periodic(count, std::f64::consts::TAU)
                } else if gs.periodic.get(a).copied().unwrap_or(false) {
                    Axis::periodic(count, 2.0 * hw)
                } else {
                    Axis::closed(count, -hw, hw)
                }
            })
            .collect();
        Ok(GridSpec::new(axes)?)
    }

    pub fn initial_field(&self, group: &ValidatedGroup, grid: &GridSpec) -> Result<ScalarField> {
        let f = &self.flow;
        if f.initial == Primitive::Snapshot {
            let path = f.snapshot.as_deref().expect("checked in Config::check");
            let u = snapshot::read(Path::new(path))?;
            if u.grid() != grid {
                return Err(AppError::key("flow.snapshot", "grid differs from [grid]"));
            }
            return Ok(u.with_time(0.0));
        }
        Ok(initial::sample(f, group, grid))
    }

    pub fn boundary(&self) -> Boundary {
        match self.flow.boundary {
            BoundaryKind::Free => Boundary::Free,
            BoundaryKind::Shell => Boundary::Shell {
                radius: self.flow.shell_radius,
                value: self.flow.shell_value,
            },
        }
    }

    pub fn flow_problem(&self) -> Result<FlowProblem> {
        let group = self.group()?;
        let grid = self.grid(&group)?;
        let u0 = self.initial_field(&group, &grid)?;
        let f = &self.flow;
        let mut p = FlowProblem::new(group, u0, f.epsilon, f.delta, f.final_time)
            .with_boundary(self.boundary())
            .with_snapshot_times(f.snapshot_times.clone())
            .with_cfl_safety(f.cfl_safety)
            .with_extremum_limiter(f.limit_extrema);
        if let Some(dt) = f.dt {
            p = p.with_dt(dt);
        }
        p.validate()?;
        Ok(p)
    }

    pub fn phi_params(&self) -> PhiParams {
        let p = &self.phi;
        PhiParams::coupled(
            p.gamma,
            p.epsilon,
            p.sigma,
            p.m_const,
            p.alpha,
            p.final_time,
            p.lip,
        )
    }
}

fn positive(key: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AppError::key(key, "must be positive and finite"))
    }
}
