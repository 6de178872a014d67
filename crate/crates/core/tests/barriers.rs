use srmcf_core::barriers::*;
use srmcf_core::flow::{self, Trajectory};
use srmcf_core::{Boundary, Error, FlowProblem, GridSpec, GroupSpec, ScalarField, ValidatedGroup};

fn se2() -> ValidatedGroup {
    GroupSpec::Se2.validate().unwrap()
}

#[test]
fn cubic_barrier_is_a_subsolution_with_the_default_constant() {
    let g = se2();
    let samples = se2_disc_samples(10_000, 2.0, 1.0, 11);
    let rep =
        check_cubic_subsolution(&CubicBarrier::new(0.1, 0.1), &g, &samples, DEFAULT_FD_H).unwrap();
    assert!(rep.pass, "max residual {}", rep.extreme);
    assert!(rep.extreme <= 1e-6);
    assert!(rep.richardson_gap < 1e-4);
}

#[test]
fn cubic_barrier_alternative_constant_also_works() {
    let g = se2();
    let samples = se2_disc_samples(2_000, 2.0, 1.0, 12);
    let c = 12.0 + 32.0 * 3f64.sqrt();
    let rep = check_cubic_subsolution(
        &CubicBarrier::new(0.1, 0.1).with_c(c),
        &g,
        &samples,
        DEFAULT_FD_H,
    )
    .unwrap();
    assert!(rep.pass);
}

#[test]
fn negative_constant_breaks_the_subsolution() {
    let g = se2();
    let samples = se2_disc_samples(500, 2.0, 1.0, 13);
    let rep = check_cubic_subsolution(
        &CubicBarrier::new(0.1, 0.1).with_c(-1.0),
        &g,
        &samples,
        DEFAULT_FD_H,
    )
    .unwrap();
    assert!(!rep.pass && rep.extreme > 0.0);
}

#[test]
fn cubic_check_needs_se2_and_samples() {
    let h = GroupSpec::heisenberg().validate().unwrap();
    assert!(check_cubic_subsolution(
        &CubicBarrier::new(0.1, 0.1),
        &h,
        &se2_disc_samples(3, 1.0, 1.0, 0),
        1e-4
    )
    .is_err());
    assert_eq!(
        check_cubic_subsolution(&CubicBarrier::new(0.1, 0.1), &se2(), &[], 1e-4).unwrap_err(),
        Error::EmptySampleSet
    );
}

#[test]
fn cubic_initial_bands() {
    let b = CubicBarrier::new(0.1, 0.1);
    for k in 0..=400 {
        let r = 3.0 * k as f64 / 400.0;
        let h = r * r / 2.0;
        let v = eval_cubic_barrier(&b, &[r, 0.0, 1.0], 0.0);
        if h >= 2.0 {
            assert_eq!(v, 0.0);
        } else if h >= 1.0 {
            assert!((-1.0..=0.0).contains(&v));
        } else {
            assert!(v <= -1.0);
        }
    }
}

#[test]
fn exp_barrier_is_a_supersolution_for_small_sigma() {
    let g = se2();
    let b = ExpBarrier::for_group(&g, 1e-2, 0.5, 1.0);
    let samples = se2_disc_samples(10_000, 3.0, 1.0, 21);
    let rep = check_exp_supersolution(&b, &g, &samples, 1e-2, 1e-2, DEFAULT_FD_H).unwrap();
    assert!(rep.pass && rep.extreme >= -1e-6, "{}", rep.extreme);
}

#[test]
fn exp_barrier_fails_for_large_sigma() {
    let g = se2();
    let b = ExpBarrier::for_group(&g, 10.0, 0.5, 1.0);
    let samples = se2_disc_samples(2_000, 3.0, 1.0, 22);
    let rep = check_exp_supersolution(&b, &g, &samples, 1e-2, 1e-2, DEFAULT_FD_H).unwrap();
    assert!(!rep.pass);
}

#[test]
fn exp_barrier_on_heisenberg() {
    let g = GroupSpec::heisenberg().validate().unwrap();
    let b = ExpBarrier::for_group(&g, 1e-2, 0.5, 1.0);
    let samples = box_samples(3, 2_000, 2.0, 1.0, 23);
    let rep = check_exp_supersolution(&b, &g, &samples, 1e-2, 1e-2, DEFAULT_FD_H).unwrap();
    assert!(rep.pass, "{}", rep.extreme);
}

#[test]
fn exp_barrier_monotonicity() {
    let g = se2();
    let b = ExpBarrier::for_group(&g, 0.1, 0.5, 1.0);
    let at = |r: f64, t: f64| eval_exp_barrier(&b, &g, &[r, 0.0, 0.0], t).unwrap();
    assert!(at(1.0, 0.5) < at(0.5, 0.5));
    assert!(at(1.0, 0.6) > at(1.0, 0.5));
    assert_eq!(
        eval_exp_barrier(&b, &g, &[0.0; 3], 2.0).unwrap_err(),
        Error::TimeOutOfRange {
            t: 2.0,
            t_final: 1.0
        }
    );
}

#[test]
fn residual_reports_are_deterministic() {
    let g = se2();
    let a = se2_disc_samples(300, 2.0, 1.0, 5);
    let b = se2_disc_samples(300, 2.0, 1.0, 5);
    assert_eq!(a, b);
    let ra = check_cubic_subsolution(&CubicBarrier::new(0.1, 0.1), &g, &a, 1e-4).unwrap();
    let rb = check_cubic_subsolution(&CubicBarrier::new(0.1, 0.1), &g, &b, 1e-4).unwrap();
    assert_eq!(ra, rb);
}

fn bump(p: &[f64]) -> f64 {
    let r2 = p[0] * p[0] + p[1] * p[1];
    if r2 < 1.0 {
        (1.0 - r2).powi(2)
    } else {
        0.0
    }
}

#[test]
fn compact_data_stay_confined() {
    let g = se2();
    let grid = GridSpec::se2(32, 32, 16, 3.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, bump);
    let mut radii = Vec::new();
    for eps in [0.1, 0.05] {
        let p = FlowProblem::new(g.clone(), u0.clone(), eps, eps, 0.05)
            .with_snapshot_times(vec![0.0, 0.025]);
        let t = flow::run(&p).unwrap();
        let r = confinement_radius(&t, &g, 1e-3).unwrap();
        assert!(r * r / 2.0 <= 2.0);
        radii.push(r);
    }
    assert!(radii[1] <= radii[0]);
}

#[test]
fn touching_the_edge_gives_no_radius() {
    let g = se2();
    let grid = GridSpec::se2(12, 12, 8, 1.0).unwrap();
    let u = ScalarField::from_fn(&grid, |p| p[0] + p[1]);
    let t = Trajectory {
        snapshots: vec![u],
        steps: vec![],
        shell_radius: None,
    };
    assert_eq!(confinement_radius(&t, &g, 1e-3), None);
}

#[test]
fn synthetic_exponential_profile() {
    let g = se2();
    let grid = GridSpec::se2(48, 48, 4, 4.0).unwrap();
    let u = ScalarField::from_fn(&grid, |p| {
        1.0 - (-2.0 * (p[0] * p[0] + p[1] * p[1]).sqrt()).exp()
    });
    let t = Trajectory {
        snapshots: vec![u],
        steps: vec![],
        shell_radius: None,
    };
    let fit = decay_fit(&t, &g, 1.0).unwrap();
    assert!((fit.b - 2.0).abs() < 0.02 && fit.r2 >= 0.999);
    let flat = Trajectory {
        snapshots: vec![ScalarField::constant(&grid, 1.0)],
        steps: vec![],
        shell_radius: None,
    };
    assert!(matches!(
        decay_fit(&flat, &g, 1.0),
        Err(Error::DegenerateFit { .. })
    ));
}

#[test]
fn decay_survives_the_flow() {
    let g = se2();
    let grid = GridSpec::se2(32, 32, 16, 3.0).unwrap();
    let u0 = ScalarField::from_fn(&grid, |p| {
        1.0 - (-2.0 * (p[0] * p[0] + p[1] * p[1]).sqrt()).exp()
    });
    let p = FlowProblem::new(g.clone(), u0, 0.1, 0.1, 0.05).with_boundary(Boundary::Shell {
        radius: 2.5,
        value: 1.0,
    });
    let fit = decay_fit(&flow::run(&p).unwrap(), &g, 1.0).unwrap();
    assert!(fit.b > 0.0 && fit.r2 >= 0.9);
}
