//! Results must not depend on the size of the thread pool.

use srmcf_core::barriers::{check_cubic_subsolution, se2_disc_samples, CubicBarrier, DEFAULT_FD_H};
use srmcf_core::flow::{self, vanishing_viscosity_sweep};
use srmcf_core::phi::{audit_lemma42, PhiParams};
use srmcf_core::{Boundary, FlowProblem, GridSpec, GroupSpec, ScalarField};

fn on_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn flow_runs_are_bitwise_stable() {
    let run = || {
        let g = GroupSpec::Se2.validate().unwrap();
        let grid = GridSpec::se2(16, 16, 8, 2.0).unwrap();
        let u0 = ScalarField::from_fn(&grid, |p| {
            (-(p[0] * p[0] + p[1] * p[1])).exp() * (1.0 + 0.2 * p[2].sin())
        });
        let p = FlowProblem::new(g, u0, 0.1, 0.1, 0.02).with_boundary(Boundary::Shell {
            radius: 1.8,
            value: 0.0,
        });
        let t = flow::run(&p).unwrap();
        let sweep = vanishing_viscosity_sweep(&p, &[0.2, 0.1, 0.05], 1.0).unwrap();
        (bits(t.final_field().values()), bits(&sweep.sup_diffs()))
    };
    assert_eq!(on_threads(1, run), on_threads(4, run));
}

#[test]
fn sampled_checks_are_bitwise_stable() {
    let run = || {
        let g = GroupSpec::Se2.validate().unwrap();
        let samples = se2_disc_samples(2_000, 2.0, 1.0, 5);
        let rep = check_cubic_subsolution(&CubicBarrier::new(0.1, 0.1), &g, &samples, DEFAULT_FD_H)
            .unwrap();
        let h = GroupSpec::heisenberg().validate().unwrap();
        let p = PhiParams::coupled(4.0, 0.1, 1.0, 4.0, 0.5, 1.0, 1.0);
        let audits = audit_lemma42(&p, &h, 1_000, 9).unwrap();
        let ratios: Vec<f64> = audits.iter().map(|a| a.ratio).collect();
        (bits(&rep.residuals), bits(&ratios))
    };
    assert_eq!(on_threads(1, run), on_threads(4, run));
}
