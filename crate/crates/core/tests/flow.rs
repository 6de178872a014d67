use srmcf_core::flow::{
    self, comparison_check, r_limit_check, vanishing_viscosity_sweep, zero_level_radius,
};
use srmcf_core::{
    Axis, Boundary, Error, FlowProblem, GridSpec, GroupSpec, ScalarField, Trajectory,
    ValidatedGroup,
};

fn heis() -> ValidatedGroup {
    GroupSpec::heisenberg().validate().unwrap()
}

fn se2() -> ValidatedGroup {
    GroupSpec::Se2.validate().unwrap()
}

fn bump(p: &[f64]) -> f64 {
    let r2 = p[0] * p[0] + p[1] * p[1];
    if r2 < 1.0 {
        (1.0 - r2).powi(2)
    } else {
        0.0
    }
}

fn assert_max_principle(p: &FlowProblem, t: &Trajectory) {
    let u0 = flow::imposed_initial(p);
    let (lo, hi) = (u0.min(), u0.max());
    for s in &t.snapshots {
        assert!(
            s.min() >= lo - 1e-9 && s.max() <= hi + 1e-9,
            "[{}, {}] vs [{lo}, {hi}]",
            s.min(),
            s.max()
        );
    }
}

#[test]
fn maximum_principle_on_several_runs() {
    let g = se2();
    let grid = GridSpec::se2(24, 24, 12, 2.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| bump(p) * (1.0 + 0.3 * p[2].cos()));
    let p = FlowProblem::new(g, u0, 0.05, 0.05, 0.05).with_snapshot_times(vec![0.01, 0.02]);
    assert_max_principle(&p, &flow::run(&p).unwrap());

    let grid = GridSpec::cube(3, 15, 1.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| (3.0 * p[0]).sin() * p[1] - p[2].abs());
    let p = FlowProblem::new(heis(), u0, 0.1, 0.1, 0.01).with_boundary(Boundary::Shell {
        radius: 0.9,
        value: -0.5,
    });
    assert_max_principle(&p, &flow::run(&p).unwrap());

    let grid = GridSpec::cube(2, 40, 1.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| (p[0].abs() + p[1].abs() - 0.5).min(0.3));
    let p = FlowProblem::new(
        GroupSpec::euclidean(2).validate().unwrap(),
        u0,
        1e-3,
        1.0,
        0.02,
    );
    assert_max_principle(&p, &flow::run(&p).unwrap());
}

#[test]
fn unlimited_scheme_overshoots_on_se2_bump() {
    // The nested stencil is not monotone; without the limiter the bump
    // produces negative values next to its support.
    let g = se2();
    let grid = GridSpec::se2(32, 32, 16, 3.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, bump);
    let p = FlowProblem::new(g, u0, 0.1, 0.1, 0.01).with_extremum_limiter(false);
    assert!(flow::run(&p).unwrap().value_range().0 < -1e-6);
}

#[test]
fn radial_data_stay_theta_independent_at_unit_delta() {
    let g = se2();
    let grid = GridSpec::se2(24, 24, 8, 2.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| (-(p[0] * p[0] + p[1] * p[1])).exp());
    let t = flow::run(&FlowProblem::new(g, u0, 0.1, 1.0, 0.05)).unwrap();
    let u = t.final_field();
    let mut worst: f64 = 0.0;
    for k in 0..grid.len() {
        let mut idx = grid.unravel(k);
        idx[2] = 0;
        worst = worst.max((u.values()[k] - u.values()[grid.ravel(&idx)]).abs());
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn periodic_translation_commutes_with_the_flow() {
    let g = GroupSpec::euclidean(2).validate().unwrap();
    let grid = GridSpec::new(vec![Axis::periodic(20, 2.0), Axis::periodic(20, 2.0)]).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| {
        (std::f64::consts::PI * p[0]).sin() * (p[1] - 1.0).powi(2)
    });
    let shift = |v: &[f64]| -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let mut idx = grid.unravel(k);
                idx[0] = (idx[0] + 3) % 20;
                idx[1] = (idx[1] + 1) % 20;
                v[grid.ravel(&idx)]
            })
            .collect()
    };
    let shifted = ScalarField::new(grid.clone(), shift(u0.values()), 0.0).unwrap();
    let a = flow::run(&FlowProblem::new(g.clone(), shifted, 0.2, 1.0, 0.01)).unwrap();
    let b = flow::run(&FlowProblem::new(g, u0, 0.2, 1.0, 0.01)).unwrap();
    assert_eq!(
        a.final_field().values(),
        shift(b.final_field().values()).as_slice()
    );
}

#[test]
fn heisenberg_vertical_translation_commutes_with_the_flow() {
    let g = heis();
    let grid = GridSpec::new(vec![
        Axis::closed(9, -1.0, 1.0),
        Axis::closed(9, -1.0, 1.0),
        Axis::periodic(12, 3.0),
    ])
    .unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| {
        p[0] * p[1] + (p[2] * std::f64::consts::TAU / 3.0).cos()
    });
    let roll = |v: &[f64]| -> Vec<f64> {
        (0..grid.len())
            .map(|k| {
                let mut idx = grid.unravel(k);
                idx[2] = (idx[2] + 5) % 12;
                v[grid.ravel(&idx)]
            })
            .collect()
    };
    let rolled = ScalarField::new(grid.clone(), roll(u0.values()), 0.0).unwrap();
    let a = flow::run(&FlowProblem::new(g.clone(), rolled, 0.3, 0.5, 0.005)).unwrap();
    let b = flow::run(&FlowProblem::new(g, u0, 0.3, 0.5, 0.005)).unwrap();
    assert_eq!(
        a.final_field().values(),
        roll(b.final_field().values()).as_slice()
    );
}

#[test]
fn one_step_matches_direct_formula() {
    // u = x_1²: X_1 u = 2 x_1, X_1 X_1 u = 2 and every other derivative vanishes.
    let g = heis();
    let grid = GridSpec::cube(3, 11, 1.0).unwrap();
    let u = ScalarField::from_fn(&grid, |p| p[0] * p[0]);
    let (eps, delta) = (0.1, 0.1);
    let dt = 1e-4;
    let next = flow::step(&u, &g, eps, delta, dt).unwrap();
    // Interior nodes only: edge maxima of x_1² are clipped by the limiter.
    for k in (0..grid.len()).step_by(grid.len() / 10) {
        let idx = grid.unravel(k);
        if idx.iter().any(|&i| i == 0 || i == 10) {
            continue;
        }
        let x = grid.coords(k)[0];
        let d2 = 4.0 * x * x;
        let want = x * x + dt * 2.0 * (1.0 - d2 / (d2 + eps * eps));
        assert!((next.values()[k] - want).abs() <= 1e-12, "node {k}");
    }
    assert!(matches!(
        flow::step(&u, &g, eps, delta, 1.0),
        Err(Error::CflViolation { .. })
    ));
}

#[test]
fn large_epsilon_recovers_the_delta_laplacian() {
    let g = heis();
    let grid = GridSpec::cube(3, 9, 1.0).unwrap();
    let u = ScalarField::from_fn(&grid, |p| p[0].sin() * p[2] + p[1] * p[1]);
    let r = flow::rhs(&u, &g, 1e6, 0.5).unwrap();
    let lap = flow::delta_laplacian(&u, &g, 0.5).unwrap();
    for (a, b) in r.values().iter().zip(lap.values()) {
        assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()));
    }
}

#[test]
fn shrinking_circle_on_a_coarse_grid() {
    let g = GroupSpec::euclidean(2).validate().unwrap();
    let grid = GridSpec::cube(2, 64, 1.0).unwrap();
    let r0 = 0.6;
    let u0 = ScalarField::from_fn(&grid, |p| (p[0] * p[0] + p[1] * p[1]).sqrt() - r0);
    let t = r0 * r0 / 4.0;
    let traj = flow::run(&FlowProblem::new(g, u0, 1e-3, 1.0, t)).unwrap();
    let r = zero_level_radius(traj.final_field(), &[0.0, 0.0], 32).unwrap();
    let want = (r0 * r0 - 2.0 * t).sqrt();
    assert!((r - want).abs() / want < 0.02, "{r} vs {want}");
}

#[test]
fn snapshots_land_within_one_step_of_requests() {
    let g = heis();
    let grid = GridSpec::cube(3, 9, 1.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| p[0]);
    let req = vec![0.0, 0.0013, 0.004];
    let traj =
        flow::run(&FlowProblem::new(g, u0, 0.1, 0.1, 0.005).with_snapshot_times(req.clone()))
            .unwrap();
    let dt = traj.steps[0].dt;
    let times = traj.times();
    assert_eq!(times.len(), 4);
    for (want, got) in req.iter().zip(&times) {
        assert!((want - got).abs() <= dt);
    }
    assert!((times[3] - 0.005).abs() < 1e-15);
}

#[test]
fn ordered_data_stay_ordered() {
    let g = se2();
    let grid = GridSpec::se2(16, 16, 8, 2.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| bump(p) * p[2].sin());
    let v0 = ScalarField::from_fn(&grid, |p| bump(p) * p[2].sin() + 0.1);
    let a = flow::run(&FlowProblem::new(g.clone(), u0, 0.1, 0.1, 0.02)).unwrap();
    let b = flow::run(&FlowProblem::new(g, v0, 0.1, 0.1, 0.02)).unwrap();
    let rep = comparison_check(&a, &b, 1e-6).unwrap();
    assert!(rep.pass && rep.max_violation <= -0.1 + 1e-9);
}

#[test]
fn constant_sweep_is_degenerate() {
    let g = se2();
    let grid = GridSpec::se2(8, 8, 8, 1.0).unwrap();
    let base = FlowProblem::new(g, ScalarField::constant(&grid, 2.0), 0.2, 0.2, 0.01);
    let rep = vanishing_viscosity_sweep(&base, &[0.2, 0.1, 0.05], 1.0).unwrap();
    assert!(rep.degenerate);
    assert!(rep.rate.is_none());
    assert!(matches!(
        vanishing_viscosity_sweep(&base, &[0.2], 1.0),
        Err(Error::ScheduleTooShort { need: 2 })
    ));
}

#[test]
fn two_level_sweep_reports_no_rate() {
    let g = se2();
    let grid = GridSpec::se2(12, 12, 8, 2.0).unwrap();
    let base = FlowProblem::new(g, ScalarField::from_fn(&grid, bump), 0.2, 0.2, 0.01);
    let rep = vanishing_viscosity_sweep(&base, &[0.2, 0.1], 1.0).unwrap();
    assert!(rep.rate.is_none());
    assert_eq!(rep.sup_diffs().len(), 1);
}

#[test]
fn confined_data_do_not_see_the_shell() {
    let g = se2();
    let grid = GridSpec::se2(24, 24, 8, 3.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| bump(&[2.0 * p[0], 2.0 * p[1]]));
    let base = FlowProblem::new(g, u0, 0.1, 0.1, 0.01);
    let rep = r_limit_check(&base, &[2.0, 2.5]).unwrap();
    assert!(rep.diffs[0] <= 1e-8, "{:?}", rep.diffs);
    let same = r_limit_check(&base, &[2.0, 2.0]).unwrap();
    assert_eq!(same.diffs, vec![0.0]);
}

#[test]
fn shell_outside_grid_is_rejected() {
    let grid = GridSpec::se2(8, 8, 8, 1.0).unwrap();
    let p = FlowProblem::new(se2(), ScalarField::constant(&grid, 0.0), 0.1, 0.1, 0.01)
        .with_boundary(Boundary::Shell {
            radius: 5.0,
            value: 0.0,
        });
    assert!(matches!(flow::run(&p), Err(Error::BadParams(_))));
}
