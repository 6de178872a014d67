//! Inpainting by evolving an orientation score on SE(2).
//!
//! The image is lifted to `(x, y, θ_k)`, `θ_k = 2πk/K`, by the magnitude of
//! the scale-normalised Gaussian second derivative across direction `θ_k`.
//! The lift evolves under the regularized flow with lifted nodes over known
//! pixels held fixed. The maximum over `θ` is projected back and rescaled to
//! intensities so that the largest known projection maps to the largest
//! known intensity; known pixels keep their input value.

use srmcf_core::flow::{self, Trajectory};
use srmcf_core::{Axis, Boundary, FlowProblem, GridSpec, GroupSpec, ScalarField};

use crate::config::InpaintSection;
use crate::error::{AppError, Result};
use crate::pgm::Image;

/// Image, mask (`true` = missing) and flow settings.
#[derive(Debug, Clone)]
pub struct InpaintTask {
    pub image: Image,
    pub mask: Vec<bool>,
    pub settings: InpaintSection,
}

#[derive(Debug, Clone)]
pub struct InpaintOutput {
    pub image: Image,
    pub lift: Trajectory,
}

impl InpaintTask {
    pub fn new(image: Image, mask: &Image, settings: InpaintSection) -> Result<Self> {
        if (mask.rows, mask.cols) != (image.rows, image.cols) {
            return Err(AppError::key("inpaint.mask", "mask and image sizes differ"));
        }
        if settings.orientations < 8 {
            return Err(AppError::key("inpaint.orientations", "need at least 8"));
        }
        let mask = mask.data.iter().map(|&v| v > 0.0).collect();
        Ok(InpaintTask {
            image,
            mask,
            settings,
        })
    }

    /// SE(2) grid with one spatial node per pixel. `x` runs along columns,
    /// `y` along rows.
    pub fn grid(&self) -> Result<GridSpec> {
        let h = self.settings.pixel_size;
        let axis = |count: usize| {
            let half = 0.5 * (count as f64 - 1.0) * h;
            Axis::closed(count, -half, half)
        };
        Ok(GridSpec::new(vec![
            axis(self.image.cols),
            axis(self.image.rows),
            Axis::periodic(self.settings.orientations, std::f64::consts::TAU),
        ])?)
    }
}

fn gaussian_hessian_kernels(scale: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, isize) {
    let r = (3.0 * scale).ceil() as isize;
    let s2 = scale * scale;
    let mut gxx = Vec::new();
    let mut gxy = Vec::new();
    let mut gyy = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let (x, y) = (dx as f64, dy as f64);
            let g = (-(x * x + y * y) / (2.0 * s2)).exp() / (std::f64::consts::TAU * s2);
            gxx.push((x * x / s2 - 1.0) / s2 * g);
            gxy.push(x * y / (s2 * s2) * g);
            gyy.push((y * y / s2 - 1.0) / s2 * g);
        }
    }
    (gxx, gxy, gyy, r)
}

/// `s² ∂²(G_s * I)` for the three second derivatives, with edge replication.
fn hessian(img: &Image, scale: f64) -> [Vec<f64>; 3] {
    let (kxx, kxy, kyy, r) = gaussian_hessian_kernels(scale);
    let w = (2 * r + 1) as usize;
    let (rows, cols) = (img.rows as isize, img.cols as isize);
    let mut out = [
        vec![0.0; img.data.len()],
        vec![0.0; img.data.len()],
        vec![0.0; img.data.len()],
    ];
    for row in 0..rows {
        for col in 0..cols {
            let mut acc = [0.0; 3];
            for dy in -r..=r {
                for dx in -r..=r {
                    let rr = (row - dy).clamp(0, rows - 1) as usize;
                    let cc = (col - dx).clamp(0, cols - 1) as usize;
                    let v = img.get(rr, cc);
                    let k = (dy + r) as usize * w + (dx + r) as usize;
                    acc[0] += kxx[k] * v;
                    acc[1] += kxy[k] * v;
                    acc[2] += kyy[k] * v;
                }
            }
            let idx = row as usize * img.cols + col as usize;
            for (o, a) in out.iter_mut().zip(acc) {
                o[idx] = scale * scale * a;
            }
        }
    }
    out
}

/// Orientation score of `img` on `grid`.
pub fn lift(img: &Image, grid: &GridSpec, scale: f64) -> ScalarField {
    let [hxx, hxy, hyy] = hessian(img, scale);
    let ny = grid.axes()[1].count;
    let nt = grid.axes()[2].count;
    let theta = grid.axes()[2];
    let values = (0..grid.len())
        .map(|k| {
            let (ix, rest) = (k / (ny * nt), k % (ny * nt));
            let (iy, it) = (rest / nt, rest % nt);
            let (s, c) = theta.coord(it).sin_cos();
            // normal to the orientation (cos θ, sin θ)
            let (nx, nyv) = (-s, c);
            let p = iy * img.cols + ix;
            (nx * nx * hxx[p] + 2.0 * nx * nyv * hxy[p] + nyv * nyv * hyy[p]).abs()
        })
        .collect();
    ScalarField::new(grid.clone(), values, 0.0).expect("finite filter responses")
}

/// Maximum over `θ` at every pixel, row-major.
pub fn project(u: &ScalarField, rows: usize, cols: usize) -> Vec<f64> {
    let nt = u.grid().axes()[2].count;
    let mut out = vec![f64::NEG_INFINITY; rows * cols];
    for (k, &v) in u.values().iter().enumerate() {
        let (ix, iy) = (k / (rows * nt), (k / nt) % rows);
        let p = iy * cols + ix;
        out[p] = out[p].max(v);
    }
    out
}

pub fn run(task: &InpaintTask) -> Result<InpaintOutput> {
    let grid = task.grid()?;
    let s = &task.settings;
    let lifted = lift(&task.image, &grid, s.filter_scale);
    let (rows, cols) = (task.image.rows, task.image.cols);
    let nt = s.orientations;
    let fixed: Vec<bool> = (0..grid.len())
        .map(|k| {
            let (ix, iy) = (k / (rows * nt), (k / nt) % rows);
            !task.mask[iy * cols + ix]
        })
        .collect();
    let group = GroupSpec::Se2.validate()?;
    let problem = FlowProblem::new(group, lifted.clone(), s.epsilon, s.delta, s.final_time)
        .with_boundary(Boundary::Pinned {
            mask: fixed,
            values: lifted.values().to_vec(),
        });
    let traj = flow::run(&problem)?;
    let proj = project(traj.final_field(), rows, cols);
    let known = |p: usize| !task.mask[p];
    let (mut p_ref, mut i_ref) = (0.0_f64, 0.0_f64);
    for p in (0..rows * cols).filter(|&p| known(p)) {
        p_ref = p_ref.max(proj[p]);
        i_ref = i_ref.max(task.image.data[p]);
    }
    if task.mask.iter().all(|&m| m) {
        p_ref = proj.iter().copied().fold(0.0, f64::max);
        i_ref = 1.0;
    }
    let data = (0..rows * cols)
        .map(|p| {
            if known(p) {
                task.image.data[p]
            } else if p_ref > 0.0 {
                (proj[p] / p_ref * i_ref).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(InpaintOutput {
        image: Image::new(rows, cols, data),
        lift: traj,
    })
}

/// Connected runs of `values ≥ level`.
pub fn count_runs(values: &[f64], level: f64) -> usize {
    let mut runs = 0;
    let mut inside = false;
    for &v in values {
        let now = v >= level;
        if now && !inside {
            runs += 1;
        }
        inside = now;
    }
    runs
}
