//! Sampled scalar fields on structured grids and finite-difference frames.
//!
//! Coordinate partials use central differences on interior nodes and on
//! periodic axes, and second-order one-sided differences at the ends of
//! non-periodic axes. A frame derivative is `X_{iδ}u = Σ_a c_a ∂_a u` with
//! the coefficients `c_a` evaluated at the node. Second derivatives are
//! nested first derivatives, `X_i(X_j u)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::group::ValidatedGroup;
use crate::math::{self, TAU};
use crate::par;
use crate::{Error, Result};

/// Tolerance on `count · h = 2π` for the SE(2) angle axis.
pub const PERIOD_TOLERANCE: f64 = 1e-12;

/// One grid axis. Node `k` sits at `origin + k · spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub count: usize,
    pub origin: f64,
    pub spacing: f64,
    pub periodic: bool,
}

impl Axis {
    /// Non-periodic axis with `count` nodes spanning `[lo, hi]`.
    pub fn closed(count: usize, lo: f64, hi: f64) -> Self {
        let spacing = if count > 1 {
            (hi - lo) / (count - 1) as f64
        } else {
            0.0
        };
        Axis {
            count,
            origin: lo,
            spacing,
            periodic: false,
        }
    }

    /// Periodic axis with `count` nodes covering one period starting at 0.
    pub fn periodic(count: usize, period: f64) -> Self {
        Axis {
            count,
            origin: 0.0,
            spacing: period / count as f64,
            periodic: true,
        }
    }

    pub fn period(&self) -> f64 {
        self.count as f64 * self.spacing
    }

    /// Coordinate of node `k`.
    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.spacing
    }
}

/// Axis-aligned structured grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

impl GridSpec {
    /// Periodic origins are reduced to `[0, period)`.
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::GridMismatch("grid has no axes"));
        }
        let mut axes = axes;
        for ax in &mut axes {
            if ax.count < 3 {
                return Err(Error::GridMismatch("axis needs at least 3 nodes"));
            }
            if !(ax.spacing > 0.0 && ax.spacing.is_finite() && ax.origin.is_finite()) {
                return Err(Error::GridMismatch(
                    "axis spacing must be positive and finite",
                ));
            }
            if ax.periodic {
                ax.origin = math::rem_period(ax.origin, ax.period());
            }
        }
        let mut strides = vec![1; axes.len()];
        for a in (0..axes.len() - 1).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].count;
        }
        let len = strides[0] * axes[0].count;
        Ok(GridSpec { axes, strides, len })
    }

    /// SE(2) grid: `nx × ny` nodes on `[-half_width, half_width]²` and
    /// `ntheta` angles covering `[0, 2π)`.
    pub fn se2(nx: usize, ny: usize, ntheta: usize, half_width: f64) -> Result<Self> {
        GridSpec::new(vec![
            Axis::closed(nx, -half_width, half_width),
            Axis::closed(ny, -half_width, half_width),
            Axis::periodic(ntheta, TAU),
        ])
    }

    /// Cube `[-half_width, half_width]^dim` with `count` nodes per axis.
    pub fn cube(dim: usize, count: usize, half_width: f64) -> Result<Self> {
        GridSpec::new(vec![Axis::closed(count, -half_width, half_width); dim])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn h_min(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.spacing)
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of node `flat` along `axis`.
    #[inline]
    pub fn index_along(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.axes[axis].count
    }

    /// Multi-index of a flat node index.
    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| self.index_along(flat, a)).collect()
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Smallest and largest value over the `3^d` box of nodes around `flat`,
    /// wrapped on periodic axes and truncated at the other edges.
    pub fn neighborhood_range(&self, values: &[f64], flat: usize) -> (f64, f64) {
        let mut nodes: Vec<usize> = Vec::with_capacity(27);
        nodes.push(flat);
        for (a, ax) in self.axes.iter().enumerate() {
            let s = self.strides[a];
            let count = nodes.len();
            for t in 0..count {
                let node = nodes[t];
                let k = self.index_along(node, a);
                let base = node - k * s;
                if ax.periodic {
                    nodes.push(base + ((k + 1) % ax.count) * s);
                    nodes.push(base + ((k + ax.count - 1) % ax.count) * s);
                } else {
                    if k + 1 < ax.count {
                        nodes.push(node + s);
                    }
                    if k > 0 {
                        nodes.push(node - s);
                    }
                }
            }
        }
        nodes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| {
                (lo.min(values[k]), hi.max(values[k]))
            })
    }

    /// Coordinates of node `flat` written into `out`.
    #[inline]
    pub fn coords_into(&self, flat: usize, out: &mut [f64]) {
        for (a, ax) in self.axes.iter().enumerate() {
            out[a] = ax.coord(self.index_along(flat, a));
        }
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.coords_into(flat, &mut out);
        out
    }

    /// Errors unless the grid has the group's dimension and, on SE(2), a
    /// periodic angle axis covering exactly one turn.
    pub fn check_group(&self, group: &ValidatedGroup) -> Result<()> {
        if self.dim() != group.n() {
            return Err(Error::GridMismatch(
                "grid dimension differs from group dimension",
            ));
        }
        if let Some(a) = group.periodic_axis() {
            let ax = &self.axes[a];
            if !ax.periodic || math::abs(ax.period() - TAU) > PERIOD_TOLERANCE {
                return Err(Error::GridMismatch(
                    "angle axis must be periodic with period 2π",
                ));
            }
        }
        Ok(())
    }

    /// Flat indices of the nodes read by the partial along `axis` at `flat`.
    fn stencil_along(&self, flat: usize, axis: usize) -> [usize; 2] {
        let ax = &self.axes[axis];
        let s = self.strides[axis];
        let k = self.index_along(flat, axis);
        let base = flat - k * s;
        let n = ax.count;
        if ax.periodic {
            [base + ((k + 1) % n) * s, base + ((k + n - 1) % n) * s]
        } else if k == 0 {
            [base + s, base + 2 * s]
        } else if k == n - 1 {
            [base + (n - 2) * s, base + (n - 3) * s]
        } else {
            [base + (k + 1) * s, base + (k - 1) * s]
        }
    }
}

/// Values on a grid, tagged with a flow time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
    time: f64,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch("value count differs from node count"));
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteField { node, value });
        }
        Ok(ScalarField { grid, values, time })
    }

    pub(crate) fn from_parts(grid: GridSpec, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values, time }
    }

    /// Samples `f` at every node, at time 0.
    pub fn from_fn<F>(grid: &GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = par::map_indices(grid.len(), |k| {
            let mut p = vec![0.0; grid.dim()];
            grid.coords_into(k, &mut p);
            f(&p)
        });
        ScalarField::from_parts(grid.clone(), values, 0.0)
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        ScalarField::from_parts(grid.clone(), vec![c; grid.len()], 0.0)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Multilinear interpolation at `p`, wrapping on periodic axes.
    pub fn interpolate(&self, p: &[f64]) -> Result<f64> {
        let g = &self.grid;
        let d = g.dim();
        if p.len() != d {
            return Err(Error::GridMismatch(
                "point dimension differs from grid dimension",
            ));
        }
        let mut lo = vec![0usize; d];
        let mut hi = vec![0usize; d];
        let mut frac = vec![0.0; d];
        for (a, ax) in g.axes().iter().enumerate() {
            let mut s = (p[a] - ax.origin) / ax.spacing;
            if ax.periodic {
                s = math::rem_period(s, ax.count as f64);
                let i = (math::floor(s) as usize).min(ax.count - 1);
                lo[a] = i;
                hi[a] = (i + 1) % ax.count;
                frac[a] = s - i as f64;
            } else {
                let last = (ax.count - 1) as f64;
                if !(s >= -1e-9 && s <= last + 1e-9) {
                    return Err(Error::OutOfGrid);
                }
                let s = s.clamp(0.0, last);
                let i = (math::floor(s) as usize).min(ax.count - 2);
                lo[a] = i;
                hi[a] = i + 1;
                frac[a] = s - i as f64;
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..d {
                let up = corner >> a & 1 == 1;
                w *= if up { frac[a] } else { 1.0 - frac[a] };
                flat += if up { hi[a] } else { lo[a] } * g.strides()[a];
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        Ok(acc)
    }
}

/// A field together with a validity mask (`true` = meaningful value).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedField {
    pub field: ScalarField,
    pub valid: Vec<bool>,
}

impl MaskedField {
    /// Value at `node`, `None` where masked.
    pub fn get(&self, node: usize) -> Option<f64> {
        self.valid[node].then(|| self.field.values()[node])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

/// Coordinate partial of `values` along `axis`.
pub(crate) fn partial(grid: &GridSpec, values: &[f64], axis: usize) -> Vec<f64> {
    let ax = grid.axes()[axis];
    let s = grid.strides()[axis];
    let n = ax.count;
    let inv2h = 1.0 / (2.0 * ax.spacing);
    par::map_indices(grid.len(), |flat| {
        let k = grid.index_along(flat, axis);
        let base = flat - k * s;
        let at = |j: usize| values[base + j * s];
        if ax.periodic {
            (at((k + 1) % n) - at((k + n - 1) % n)) * inv2h
        } else if k == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h
        } else if k == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h
        } else {
            (at(k + 1) - at(k - 1)) * inv2h
        }
    })
}

/// Frame coefficients `c_a` of every `X_{iδ}` tabulated on a grid.
///
/// Axes along which a coefficient vanishes identically are skipped.
#[derive(Debug, Clone)]
pub struct FrameStencil {
    grid: GridSpec,
    /// `coeffs[i][a]`: coefficient of `∂_a` in `X_{(i+1)δ}` at every node.
    coeffs: Vec<Vec<Option<Vec<f64>>>>,
    /// Axes touched by at least one frame.
    used_axes: Vec<bool>,
    m: usize,
}

impl FrameStencil {
    pub fn new(group: &ValidatedGroup, grid: &GridSpec, delta: f64) -> Result<Self> {
        grid.check_group(group)?;
        let n = group.n();
        let len = grid.len();
        let mut coeffs = Vec::with_capacity(n);
        let mut used_axes = vec![false; n];
        for i0 in 0..n {
            let table: Vec<Vec<f64>> = par::map_collect(len, |flat| {
                let mut p = vec![0.0; n];
                let mut c = vec![0.0; n];
                grid.coords_into(flat, &mut p);
                group.frame_into(i0, delta, &p, &mut c);
                c
            });
            let mut per_axis = Vec::with_capacity(n);
            for a in 0..n {
                let col: Vec<f64> = table.iter().map(|c| c[a]).collect();
                if col.iter().all(|&v| v == 0.0) {
                    per_axis.push(None);
                } else {
                    used_axes[a] = true;
                    per_axis.push(Some(col));
                }
            }
            coeffs.push(per_axis);
        }
        Ok(FrameStencil {
            grid: grid.clone(),
            coeffs,
            used_axes,
            m: group.m(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of frame fields.
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    /// Number of horizontal fields.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Largest `Σ_a c_a²` over nodes and frames.
    pub fn c_max(&self) -> f64 {
        let mut best = 0.0_f64;
        for frame in &self.coeffs {
            for k in 0..self.grid.len() {
                let s: f64 = frame.iter().flatten().map(|col| col[k] * col[k]).sum();
                best = best.max(s);
            }
        }
        best
    }

    /// Coordinate partials of `values` along the axes any frame uses.
    pub(crate) fn partials(&self, values: &[f64]) -> Vec<Option<Vec<f64>>> {
        self.used_axes
            .iter()
            .enumerate()
            .map(|(a, &used)| used.then(|| partial(&self.grid, values, a)))
            .collect()
    }

    /// `X_{iδ}u` (0-based `i0`) from precomputed partials.
    pub(crate) fn apply(&self, i0: usize, partials: &[Option<Vec<f64>>]) -> Vec<f64> {
        let frame = &self.coeffs[i0];
        par::map_indices(self.grid.len(), |k| {
            let mut s = 0.0;
            for (c, d) in frame.iter().zip(partials) {
                if let (Some(c), Some(d)) = (c, d) {
                    s += c[k] * d[k];
                }
            }
            s
        })
    }

    /// `X_{iδ}u` (0-based `i0`).
    pub fn derive(&self, i0: usize, values: &[f64]) -> Vec<f64> {
        self.apply(i0, &self.partials(values))
    }

    /// All first derivatives `X_{iδ}u`, `i = 1..n`.
    pub fn first_derivatives(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let p = self.partials(values);
        (0..self.n()).map(|i| self.apply(i, &p)).collect()
    }
}

fn frame_index(group: &ValidatedGroup, i: usize) -> Result<usize> {
    if i == 0 || i > group.n() {
        Err(Error::IndexOutOfRange {
            index: i,
            max: group.n(),
        })
    } else {
        Ok(i - 1)
    }
}

/// `X_{iδ}u` on every node (`i` is 1-based).
pub fn derive_x(
    u: &ScalarField,
    group: &ValidatedGroup,
    i: usize,
    delta: f64,
) -> Result<ScalarField> {
    let i0 = frame_index(group, i)?;
    let st = FrameStencil::new(group, u.grid(), delta)?;
    Ok(ScalarField::from_parts(
        u.grid().clone(),
        st.derive(i0, u.values()),
        u.time(),
    ))
}

/// `X_{iδ}(X_{jδ}u)` on every node.
pub fn derive_xx(
    u: &ScalarField,
    group: &ValidatedGroup,
    i: usize,
    j: usize,
    delta: f64,
) -> Result<ScalarField> {
    let i0 = frame_index(group, i)?;
    let j0 = frame_index(group, j)?;
    let st = FrameStencil::new(group, u.grid(), delta)?;
    let inner = st.derive(j0, u.values());
    Ok(ScalarField::from_parts(
        u.grid().clone(),
        st.derive(i0, &inner),
        u.time(),
    ))
}

/// `(|∇_0 u|², |∇_δ u|²)`.
pub fn gradient_norms(
    u: &ScalarField,
    group: &ValidatedGroup,
    delta: f64,
) -> Result<(ScalarField, ScalarField)> {
    let st = FrameStencil::new(group, u.grid(), delta)?;
    let d = st.first_derivatives(u.values());
    let m = group.m();
    let len = u.grid().len();
    let mut h = vec![0.0; len];
    let mut full = vec![0.0; len];
    for (i, di) in d.iter().enumerate() {
        for k in 0..len {
            let sq = di[k] * di[k];
            if i < m {
                h[k] += sq;
            }
            full[k] += sq;
        }
    }
    Ok((
        ScalarField::from_parts(u.grid().clone(), h, u.time()),
        ScalarField::from_parts(u.grid().clone(), full, u.time()),
    ))
}

/// Default characteristic threshold: `1e-8` times the value range.
pub fn default_tol_char(u: &ScalarField) -> f64 {
    let range = u.max() - u.min();
    if range > 0.0 {
        1e-8 * range
    } else {
        1e-8
    }
}

/// Horizontal mean curvature `Σ_{i≤m} X_i(X_i u / |∇_0 u|)`.
///
/// Nodes where `|∇_0 u| < tol_char`, and nodes whose difference stencil
/// reads such a node, are masked.
pub fn horizontal_mean_curvature(
    u: &ScalarField,
    group: &ValidatedGroup,
    tol_char: f64,
) -> Result<MaskedField> {
    let grid = u.grid();
    let st = FrameStencil::new(group, grid, 1.0)?;
    let m = group.m();
    let len = grid.len();
    let p = st.partials(u.values());
    let d: Vec<Vec<f64>> = (0..m).map(|i| st.apply(i, &p)).collect();
    let norm: Vec<f64> = (0..len)
        .map(|k| math::sqrt(d.iter().map(|di| di[k] * di[k]).sum()))
        .collect();
    let characteristic: Vec<bool> = norm.iter().map(|&g| !(g >= tol_char)).collect();
    let mut k0 = vec![0.0; len];
    for (i0, di) in d.iter().enumerate() {
        let nu: Vec<f64> = (0..len)
            .map(|k| {
                if characteristic[k] {
                    0.0
                } else {
                    di[k] / norm[k]
                }
            })
            .collect();
        let dnu = st.derive(i0, &nu);
        for k in 0..len {
            k0[k] += dnu[k];
        }
    }
    let valid: Vec<bool> = (0..len)
        .map(|k| {
            !characteristic[k]
                && (0..grid.dim()).all(|a| {
                    grid.stencil_along(k, a)
                        .iter()
                        .all(|&nb| !characteristic[nb])
                })
        })
        .collect();
    for k in 0..len {
        if !valid[k] {
            k0[k] = 0.0;
        }
    }
    Ok(MaskedField {
        field: ScalarField::from_parts(grid.clone(), k0, u.time()),
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn heis() -> ValidatedGroup {
        GroupSpec::heisenberg().validate().unwrap()
    }

    fn max_abs_diff(a: &[f64], f: impl Fn(usize) -> f64) -> f64 {
        a.iter()
            .enumerate()
            .map(|(k, v)| (v - f(k)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(vec![Axis::closed(2, 0.0, 1.0)]).is_err());
        assert!(GridSpec::new(vec![Axis::closed(3, 1.0, 1.0)]).is_err());
        let g = GridSpec::cube(3, 5, 1.0).unwrap();
        assert_eq!(g.len(), 125);
        assert_eq!(g.strides(), &[25, 5, 1]);
        assert_eq!(g.unravel(g.ravel(&[1, 2, 3])), vec![1, 2, 3]);
        assert!(g.check_group(&heis()).is_ok());
        let s = GroupSpec::Se2.validate().unwrap();
        assert!(g.check_group(&s).is_err());
        assert!(GridSpec::se2(5, 5, 8, 1.0).unwrap().check_group(&s).is_ok());
        assert!(GridSpec::cube(2, 5, 1.0)
            .unwrap()
            .check_group(&heis())
            .is_err());
    }

    #[test]
    fn periodic_origin_is_reduced() {
        let mut ax = Axis::periodic(8, TAU);
        ax.origin = TAU;
        let g = GridSpec::new(vec![ax]).unwrap();
        assert_eq!(g.axes()[0].origin, 0.0);
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let g = GridSpec::cube(3, 6, 1.0).unwrap();
        let u = ScalarField::constant(&g, 3.5);
        for i in 1..=3 {
            let d = derive_x(&u, &heis(), i, 0.3).unwrap();
            assert!(d.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn heisenberg_first_derivative_examples() {
        let g = GridSpec::cube(3, 9, 2.0).unwrap();
        let h = heis();
        let u = ScalarField::from_fn(&g, |p| p[0]);
        let d = derive_x(&u, &h, 1, 1.0).unwrap();
        assert!(max_abs_diff(d.values(), |_| 1.0) <= 1e-12);
        let u = ScalarField::from_fn(&g, |p| p[2]);
        let d = derive_x(&u, &h, 1, 1.0).unwrap();
        // node (x1, x2) = (0, 2): X_1 θ = -x2/2 = -1
        let k = g.ravel(&[4, 8, 3]);
        assert!((d.values()[k] + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn quadratic_second_derivative() {
        let g = GridSpec::cube(3, 7, 1.0).unwrap();
        let u = ScalarField::from_fn(&g, |p| p[0] * p[0]);
        let d = derive_xx(&u, &heis(), 1, 1, 0.5).unwrap();
        assert!(max_abs_diff(d.values(), |_| 2.0) <= 1e-10);
    }

    #[test]
    fn gradient_norm_example() {
        let g = GridSpec::cube(3, 7, 1.0).unwrap();
        let u = ScalarField::from_fn(&g, |p| p[0] + 0.3 * p[2]);
        let (h, full) = gradient_norms(&u, &heis(), 0.5).unwrap();
        for k in 0..g.len() {
            assert!(full.values()[k] >= h.values()[k]);
        }
        let u = ScalarField::from_fn(&g, |p| p[0]);
        let (h, _) = gradient_norms(&u, &heis(), 0.5).unwrap();
        assert!(max_abs_diff(h.values(), |_| 1.0) <= 1e-12);
    }

    #[test]
    fn curvature_of_cylinder() {
        let g = GridSpec::cube(3, 41, 2.0).unwrap();
        let u = ScalarField::from_fn(&g, |p| p[0] * p[0] + p[1] * p[1]);
        let k = horizontal_mean_curvature(&u, &heis(), default_tol_char(&u)).unwrap();
        let at = g.ravel(&[30, 20, 20]); // (1, 0, 0)
        assert!((k.get(at).unwrap() - 1.0).abs() < 1e-2);
        let origin = g.ravel(&[20, 20, 20]);
        assert_eq!(k.get(origin), None);

        let u = ScalarField::from_fn(&g, |p| p[0]);
        let k = horizontal_mean_curvature(&u, &heis(), 1e-8).unwrap();
        assert_eq!(k.valid_count(), g.len());
        assert!(k.field.values().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn interpolation() {
        let g = GridSpec::se2(5, 5, 8, 1.0).unwrap();
        let u = ScalarField::from_fn(&g, |p| 2.0 * p[0] - p[1] + 0.25);
        let v = u.interpolate(&[0.3, -0.7, 1.0]).unwrap();
        assert!((v - (0.6 + 0.7 + 0.25)).abs() < 1e-14);
        assert_eq!(u.interpolate(&[1.5, 0.0, 0.0]), Err(Error::OutOfGrid));
        // periodic wrap past the last node
        let w = ScalarField::from_fn(&g, |p| math::cos(p[2]));
        let a = w.interpolate(&[0.0, 0.0, TAU - 0.1]).unwrap();
        let b = w.interpolate(&[0.0, 0.0, -0.1]).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = GridSpec::cube(1, 3, 1.0).unwrap();
        assert!(matches!(
            ScalarField::new(g, vec![0.0, f64::NAN, 1.0], 0.0),
            Err(Error::NonFiniteField { node: 1, .. })
        ));
    }
}
