//! The subcommands. Each writes its files into an output directory and
//! returns the lines of its log.

use std::fs;
use std::path::{Path, PathBuf};

use srmcf_core::barriers::{self, CubicBarrier, ExpBarrier};
use srmcf_core::flow::{self, Trajectory};
use srmcf_core::phi;
use srmcf_core::{GroupSpec, ScalarField, ValidatedGroup};

use crate::config::Config;
use crate::error::{AppError, Result};
use crate::inpaint::{self, InpaintTask};
use crate::pgm;
use crate::report::{self, fmt_f64};
use crate::snapshot;

/// Largest allowed gap between a bracket and its finite-difference value.
pub const BRACKET_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Barriers,
    Phi,
    Brackets,
}

impl Check {
    pub const ALL: [Check; 3] = [Check::Brackets, Check::Barriers, Check::Phi];
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn write_log(dir: &Path, name: &str, lines: &[String]) -> Result<()> {
    let path = dir.join(name);
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(&path, text).map_err(|e| AppError::io(path, e))
}

/// Writes `snapshot_000.srmcf`, `snapshot_001.srmcf`, … and returns their paths.
pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    traj.snapshots
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let path = dir.join(format!("snapshot_{k:03}.srmcf"));
            snapshot::write(&path, u)?;
            Ok(path)
        })
        .collect()
}

pub fn simulate(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let problem = cfg.flow_problem()?;
    let traj = flow::run(&problem)?;
    let paths = write_snapshots(out, &traj)?;
    let (lo, hi) = traj.value_range();
    let mut log = vec![
        format!("steps = {}", traj.steps.len()),
        format!("dt = {}", traj.steps.first().map_or(0.0, |s| s.dt)),
        format!("value_range = [{}, {}]", fmt_f64(lo), fmt_f64(hi)),
    ];
    for (u, p) in traj.snapshots.iter().zip(&paths) {
        log.push(format!(
            "snapshot t = {} -> {}",
            fmt_f64(u.time()),
            p.display()
        ));
    }
    write_log(out, "run.log", &log)?;
    Ok(log)
}

pub fn sweep(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let base = cfg.flow_problem()?;
    let report = flow::vanishing_viscosity_sweep(&base, &cfg.sweep.epsilons, cfg.sweep.sigma)?;
    create_dir(out)?;
    report::write_sweep(&out.join("sweep.csv"), &report)?;
    for (k, t) in report.trajectories.iter().enumerate() {
        write_snapshots(&out.join(format!("level_{k:02}")), t)?;
    }
    let mut log = vec![
        format!("levels = {}", report.levels.len()),
        format!("degenerate = {}", report.degenerate),
        format!("strictly_decreasing = {}", report.strictly_decreasing()),
    ];
    match report.rate {
        Some(r) => log.push(format!(
            "alpha = {} (r2 = {})",
            fmt_f64(r.alpha),
            fmt_f64(r.r2)
        )),
        None => log.push("alpha = none".to_string()),
    }
    write_log(out, "sweep.log", &log)?;
    Ok(log)
}

/// Runs the selected checks, writing one CSV per check. Fails with
/// [`AppError::CheckFailed`] naming every failed bound.
pub fn verify(cfg: &Config, checks: &[Check], out: &Path) -> Result<Vec<String>> {
    create_dir(out)?;
    let mut log = Vec::new();
    let mut failed = Vec::new();
    for check in checks {
        match check {
            Check::Brackets => verify_brackets(cfg, out, &mut log, &mut failed)?,
            Check::Barriers => verify_barriers(cfg, out, &mut log, &mut failed)?,
            Check::Phi => verify_phi(cfg, out, &mut log, &mut failed)?,
        }
    }
    write_log(out, "verify.log", &log)?;
    if failed.is_empty() {
        Ok(log)
    } else {
        Err(AppError::CheckFailed(failed.join(", ")))
    }
}

/// `[X_i, X_j]` against the commutator of the frames with Jacobians taken by
/// central differences.
fn bracket_gap(g: &ValidatedGroup, i: usize, j: usize, p: &[f64]) -> Result<f64> {
    let n = p.len();
    let h = 1e-6;
    let jac = |k: usize| -> Result<Vec<Vec<f64>>> {
        (0..n)
            .map(|a| {
                let mut qp = p.to_vec();
                let mut qm = p.to_vec();
                qp[a] += h;
                qm[a] -= h;
                let fp = g.frame_coefficients(k, 1.0, &qp)?;
                let fm = g.frame_coefficients(k, 1.0, &qm)?;
                Ok((0..n).map(|r| (fp[r] - fm[r]) / (2.0 * h)).collect())
            })
            .collect()
    };
    let (xi, xj) = (
        g.frame_coefficients(i, 1.0, p)?,
        g.frame_coefficients(j, 1.0, p)?,
    );
    let (ji, jj) = (jac(i)?, jac(j)?);
    let exact = g.lie_bracket(i, j, p)?;
    Ok((0..n)
        .map(|r| {
            let fd: f64 = (0..n).map(|a| jj[a][r] * xi[a] - ji[a][r] * xj[a]).sum();
            (fd - exact[r]).abs()
        })
        .fold(0.0, f64::max))
}

fn verify_brackets(
    cfg: &Config,
    out: &Path,
    log: &mut Vec<String>,
    failed: &mut Vec<String>,
) -> Result<()> {
    let g = match cfg.group_spec()?.validate() {
        Ok(g) => g,
        Err(e) => {
            log.push(format!("brackets: FAIL {e:?}"));
            failed.push(format!("brackets ({e:?})"));
            return Ok(());
        }
    };
    let points: Vec<Vec<f64>> = (0..8)
        .map(|k| {
            (0..g.n())
                .map(|a| ((k * 7 + a * 3) % 11) as f64 / 5.0 - 1.0)
                .collect()
        })
        .collect();
    let path = out.join("brackets.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["i", "j", "point", "gap"])?;
    let mut worst = 0.0_f64;
    for i in 1..=g.m() {
        for j in i + 1..=g.m() {
            for (k, p) in points.iter().enumerate() {
                let gap = bracket_gap(&g, i, j, p)?;
                worst = worst.max(gap);
                w.write_record([i.to_string(), j.to_string(), k.to_string(), fmt_f64(gap)])?;
            }
        }
    }
    w.flush().map_err(|e| AppError::io(&path, e))?;
    let ok = worst <= BRACKET_TOL;
    log.push(format!(
        "brackets: {} max gap {}",
        verdict(ok),
        fmt_f64(worst)
    ));
    if !ok {
        failed.push("brackets".to_string());
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify_barriers(
    cfg: &Config,
    out: &Path,
    log: &mut Vec<String>,
    failed: &mut Vec<String>,
) -> Result<()> {
    let b = &cfg.barriers;
    let se2 = GroupSpec::Se2.validate()?;
    let samples = barriers::se2_disc_samples(b.samples, b.radius, b.t_max, b.seed);
    let cubic = CubicBarrier::new(b.epsilon, b.delta).with_c(b.c);
    let rep = barriers::check_cubic_subsolution(&cubic, &se2, &samples, b.fd_h)?;
    report::write_residuals(&out.join("barrier_cubic.csv"), &rep, &samples)?;
    log.push(format!(
        "barrier cubic: {} max residual {}",
        verdict(rep.pass),
        fmt_f64(rep.extreme)
    ));
    if !rep.pass {
        failed.push("barrier cubic".to_string());
    }

    let g = cfg.group()?;
    let exp = ExpBarrier::for_group(&g, b.exp_sigma, b.exp_alpha, b.exp_final_time);
    let t_max = b.t_max.min(b.exp_final_time);
    let samples = if g.is_se2() {
        barriers::se2_disc_samples(b.samples, b.exp_radius, t_max, b.seed.wrapping_add(1))
    } else {
        barriers::box_samples(
            g.n(),
            b.samples,
            b.exp_radius,
            t_max,
            b.seed.wrapping_add(1),
        )
    };
    let rep =
        barriers::check_exp_supersolution(&exp, &g, &samples, b.exp_epsilon, b.exp_delta, b.fd_h)?;
    report::write_residuals(&out.join("barrier_exp.csv"), &rep, &samples)?;
    log.push(format!(
        "barrier exp: {} min residual {}",
        verdict(rep.pass),
        fmt_f64(rep.extreme)
    ));
    if !rep.pass {
        failed.push("barrier exp".to_string());
    }
    Ok(())
}

fn verify_phi(
    cfg: &Config,
    out: &Path,
    log: &mut Vec<String>,
    failed: &mut Vec<String>,
) -> Result<()> {
    let g = cfg.group()?;
    let params = cfg.phi_params();
    let (n, seed) = (cfg.phi.samples, cfg.phi.seed);
    let mut audits = phi::audit_lemma42(&params, &g, n, seed)?;
    audits.extend(phi::audit_lemma44(&params, &g, n, seed.wrapping_add(1))?);
    let enforced = &cfg.phi.enforce;
    if let Some(unknown) = enforced
        .iter()
        .find(|e| !audits.iter().any(|a| a.id == e.as_str()))
    {
        return Err(AppError::key(
            "phi.enforce",
            format!("unknown bound `{unknown}`"),
        ));
    }
    report::write_audits(&out.join("phi_audit.csv"), &audits, enforced)?;
    for a in &audits {
        let on = enforced.iter().any(|e| e == a.id);
        log.push(format!(
            "phi {:<26} ratio {} drift {} {}{}",
            a.id,
            fmt_f64(a.ratio),
            fmt_f64(a.drift),
            verdict(a.pass()),
            if on { "" } else { " (reported only)" }
        ));
        if on && !a.pass() {
            failed.push(format!("phi {}", a.id));
        }
    }
    let zero = phi::check_zero_gradient_implication(&params, &g, n.min(1000), seed)?;
    log.push(format!(
        "phi zero_gradient: {} max |grad_eta| {}",
        verdict(zero.pass),
        fmt_f64(zero.max_eta_gradient)
    ));
    if !zero.pass {
        failed.push("phi zero_gradient".to_string());
    }
    let (slack, alpha) = phi::schedule_exponents(params.gamma, params.sigma)?;
    log.push(format!(
        "phi schedule: slack {} alpha {}",
        fmt_f64(slack),
        fmt_f64(alpha)
    ));
    Ok(())
}

pub fn inpaint(cfg: &Config, out: &Path) -> Result<Vec<String>> {
    let s = &cfg.inpaint;
    let image_path = s
        .image
        .as_deref()
        .ok_or_else(|| AppError::key("inpaint.image", "required"))?;
    let mask_path = s
        .mask
        .as_deref()
        .ok_or_else(|| AppError::key("inpaint.mask", "required"))?;
    let image = pgm::read(Path::new(image_path))?;
    let mask = pgm::read(Path::new(mask_path))?;
    let task = InpaintTask::new(image, &mask, s.clone())?;
    let result = inpaint::run(&task)?;
    create_dir(out)?;
    pgm::write(&out.join("inpainted.pgm"), &result.image)?;
    write_snapshots(&out.join("lift"), &result.lift)?;
    let missing = task.mask.iter().filter(|&&m| m).count();
    let log = vec![
        format!("pixels = {} x {}", task.image.rows, task.image.cols),
        format!("missing = {missing}"),
        format!("steps = {}", result.lift.steps.len()),
    ];
    write_log(out, "inpaint.log", &log)?;
    Ok(log)
}

/// The 2D slice of `u` obtained by fixing `axis` at `index`, with its row and
/// column counts. Two-dimensional fields are returned whole when `axis` is `None`.
pub fn slice(
    u: &ScalarField,
    axis: Option<usize>,
    index: usize,
) -> Result<(usize, usize, Vec<f64>)> {
    let grid = u.grid();
    let shape = grid.shape();
    match (shape.len(), axis) {
        (2, None) => Ok((shape[0], shape[1], u.values().to_vec())),
        (3, Some(a)) if a < 3 => {
            if index >= shape[a] {
                return Err(AppError::key(
                    "index",
                    format!("{index} is out of range 0..{}", shape[a]),
                ));
            }
            let keep: Vec<usize> = (0..3).filter(|&b| b != a).collect();
            let (rows, cols) = (shape[keep[0]], shape[keep[1]]);
            let mut values = Vec::with_capacity(rows * cols);
            let mut idx = [0usize; 3];
            idx[a] = index;
            for r in 0..rows {
                for c in 0..cols {
                    idx[keep[0]] = r;
                    idx[keep[1]] = c;
                    values.push(u.values()[grid.ravel(&idx)]);
                }
            }
            Ok((rows, cols, values))
        }
        (3, _) => Err(AppError::key("axis", "a 3D snapshot needs an axis in 0..3")),
        (d, _) => Err(AppError::key(
            "axis",
            format!("cannot slice a {d}D snapshot to 2D"),
        )),
    }
}

pub fn export_slice(
    snapshot_path: &Path,
    axis: Option<usize>,
    index: usize,
    out: &Path,
) -> Result<Vec<String>> {
    let u = snapshot::read(snapshot_path)?;
    let (rows, cols, values) = slice(&u, axis, index)?;
    create_dir(out)?;
    pgm::write(
        &out.join("slice.pgm"),
        &pgm::normalized(rows, cols, &values),
    )?;
    report::write_slice(&out.join("slice.csv"), &values, cols)?;
    Ok(vec![format!("slice {rows} x {cols}")])
}
