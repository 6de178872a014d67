use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use srmcf::pgm::{self, Image};
use srmcf::{report, snapshot};
use srmcf_core::flow::zero_level_radius;

fn srmcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srmcf"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        cmd,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    srmcf(&args)
}

#[test]
fn constant_datum_gives_identical_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[grid]\ncounts = [8, 8, 8]\n[flow]\ninitial = \"constant\"\nheight = 0.75\nfinal_time = 0.2\nsnapshot_times = [0.0, 0.1]\n",
    );
    let out = dir.path().join("out");
    let o = run("simulate", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut n = 0;
    for k in 0..3 {
        let u = snapshot::read(&out.join(format!("snapshot_{k:03}.srmcf"))).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.75));
        n += 1;
    }
    assert_eq!(n, 3);
    assert!(out.join("run.log").exists());
}

#[test]
fn shrinking_circle_config() {
    let dir = tempfile::tempdir().unwrap();
    let (r0, t) = (0.6_f64, 0.09_f64);
    let cfg = config(
        dir.path(),
        &format!(
            "[group]\nkind = \"euclidean\"\nm = 2\n[grid]\ncounts = [64, 64]\nhalf_width = 1.0\n\
             [flow]\nepsilon = 1e-3\ndelta = 1.0\nfinal_time = {t}\ninitial = \"ball\"\nradius = {r0}\n"
        ),
    );
    let out = dir.path().join("out");
    assert_eq!(code(&run("simulate", &cfg, &out, &[])), 0);
    let u = snapshot::read(&out.join("snapshot_000.srmcf")).unwrap();
    let r = zero_level_radius(&u, &[0.0, 0.0], 32).unwrap();
    let want = (r0 * r0 - 2.0 * t).sqrt();
    assert!((r - want).abs() / want < 0.02, "{r} vs {want}");
}

#[test]
fn dt_above_the_stability_bound_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[grid]\ncounts = [8, 8, 8]\n[flow]\ndt = 0.5\nfinal_time = 1.0\n",
    );
    let o = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("CFL"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[flow]\nepsilon = -1.0\n");
    let o = run("simulate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("flow.epsilon"));
    let o = srmcf(&[
        "simulate",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let cfg = config(dir.path(), "[sweep]\nepsilons = [0.1]\n");
    let o = run("sweep", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("sweep.epsilons"));
}

#[test]
fn sweep_on_a_radial_datum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[grid]\ncounts = [32, 32, 16]\n[flow]\ninitial = \"gaussian\"\nfinal_time = 0.05\nboundary = \"shell\"\nshell_radius = 2.5\n",
    );
    let out = dir.path().join("out");
    let o = run("sweep", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut r = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let headers: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(
        headers,
        [
            "epsilon",
            "delta",
            "sup_diff",
            "confinement_radius",
            "decay_b",
            "decay_B",
            "fit_r2"
        ]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[0][2], "");
    let diffs: Vec<f64> = rows[1..]
        .iter()
        .map(|row| row[2].parse().unwrap())
        .collect();
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
    assert!(out.join("level_03").join("snapshot_000.srmcf").exists());
}

#[test]
fn degenerate_sweep_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[grid]\ncounts = [8, 8, 8]\n[flow]\ninitial = \"constant\"\nfinal_time = 0.01\n[sweep]\nepsilons = [0.2, 0.1, 0.05]\n",
    );
    let out = dir.path().join("out");
    let o = run("sweep", &cfg, &out, &[]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("degenerate = true"));
}

#[test]
fn default_barrier_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let out = dir.path().join("out");
    let o = run(
        "verify",
        &cfg,
        &out,
        &["--check", "barriers", "--seed", "3"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut r = csv::Reader::from_path(out.join("barrier_cubic.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["sample", "x1", "x2", "x3", "t", "residual"]
    );
    assert_eq!(r.records().count(), 10_000);
}

#[test]
fn broken_barrier_constant_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "[barriers]\nc = -1.0\nsamples = 500\n");
    let o = run(
        "verify",
        &cfg,
        &dir.path().join("out"),
        &["--check", "barriers"],
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("barrier cubic"));
}

#[test]
fn phi_audit_on_heisenberg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[group]\nkind = \"heisenberg\"\n[grid]\ncounts = [9, 9, 9]\n[phi]\ngamma = 4.0\nepsilon = 0.1\nsigma = 1.0\n",
    );
    let out = dir.path().join("out");
    let o = run("verify", &cfg, &out, &["--check", "phi"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("firstderivphi") && table.contains("hessian_sum"));
    assert!(table.contains("remarkderivative ") && table.contains("(reported only)"));
    let mut r = csv::Reader::from_path(out.join("phi_audit.csv")).unwrap();
    assert_eq!(&r.headers().unwrap()[0], "bound");
    assert_eq!(r.records().count(), 11);
}

#[test]
fn enforcing_the_stated_vertical_bound_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[group]\nkind = \"heisenberg\"\n[grid]\ncounts = [9, 9, 9]\n[phi]\nsamples = 5000\nenforce = [\"remarkderivative\"]\n",
    );
    let o = run("verify", &cfg, &dir.path().join("out"), &["--check", "phi"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("phi remarkderivative"));
}

#[test]
fn bracket_check_on_a_non_skew_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[group]\nkind = \"carnot\"\nm = 2\nn = 3\nw = [0.0, 1.0, 1.0, 0.0]\n[grid]\ncounts = [5, 5, 5]\n",
    );
    let o = run(
        "verify",
        &cfg,
        &dir.path().join("out"),
        &["--check", "brackets"],
    );
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("NotSkewSymmetric"), "{}", stderr(&o));

    let cfg = config(dir.path(), "");
    let o = run(
        "verify",
        &cfg,
        &dir.path().join("out2"),
        &["--check", "brackets"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn export_slice_of_a_constant_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[grid]\ncounts = [6, 7, 8]\n[flow]\ninitial = \"constant\"\nfinal_time = 0.0\n",
    );
    let out = dir.path().join("sim");
    assert_eq!(code(&run("simulate", &cfg, &out, &[])), 0);
    let snap = out.join("snapshot_000.srmcf");
    let slice_dir = dir.path().join("slice");
    let o = srmcf(&[
        "export-slice",
        "--snapshot",
        snap.to_str().unwrap(),
        "--axis",
        "2",
        "--index",
        "3",
        "--out",
        slice_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let img = pgm::read(&slice_dir.join("slice.pgm")).unwrap();
    assert_eq!((img.rows, img.cols), (6, 7));
    assert!(img.data.iter().all(|&v| v == img.data[0]));
    let o = srmcf(&[
        "export-slice",
        "--snapshot",
        snap.to_str().unwrap(),
        "--axis",
        "2",
        "--index",
        "8",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("out of range"));
}

#[test]
fn export_slice_csv_matches_the_snapshot_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[grid]\ncounts = [6, 7, 8]\n[flow]\ninitial = \"gaussian\"\nfinal_time = 0.001\n",
    );
    let out = dir.path().join("sim");
    assert_eq!(code(&run("simulate", &cfg, &out, &[])), 0);
    let snap = out.join("snapshot_000.srmcf");
    let slice_dir = dir.path().join("slice");
    let o = srmcf(&[
        "export-slice",
        "--snapshot",
        snap.to_str().unwrap(),
        "--axis",
        "0",
        "--index",
        "2",
        "--out",
        slice_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let u = snapshot::read(&snap).unwrap();
    let rows = report::read_slice(&slice_dir.join("slice.csv")).unwrap();
    assert_eq!(rows.len(), 7 * 8);
    for (i, j, v) in rows {
        let k = u.grid().ravel(&[2, i, j]);
        assert_eq!(v.to_bits(), u.values()[k].to_bits());
    }
}

#[test]
fn inpaint_with_an_empty_mask_returns_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut img = Image::filled(10, 12, 0.0);
    for c in 2..10 {
        img.set(5, c, 1.0);
    }
    let (ip, mp) = (dir.path().join("in.pgm"), dir.path().join("mask.pgm"));
    pgm::write(&ip, &img).unwrap();
    pgm::write(&mp, &Image::filled(10, 12, 0.0)).unwrap();
    let cfg = config(
        dir.path(),
        &format!(
            "[inpaint]\nimage = \"{}\"\nmask = \"{}\"\norientations = 8\nfinal_time = 0.001\n",
            ip.display(),
            mp.display()
        ),
    );
    let out = dir.path().join("out");
    let o = run("inpaint", &cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let back = pgm::read(&out.join("inpainted.pgm")).unwrap();
    for (a, b) in back.data.iter().zip(&img.data) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert!(out.join("lift").join("snapshot_000.srmcf").exists());
}

#[test]
fn inpaint_shape_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (ip, mp) = (dir.path().join("in.pgm"), dir.path().join("mask.pgm"));
    pgm::write(&ip, &Image::filled(10, 12, 0.0)).unwrap();
    pgm::write(&mp, &Image::filled(10, 11, 0.0)).unwrap();
    let cfg = config(
        dir.path(),
        &format!(
            "[inpaint]\nimage = \"{}\"\nmask = \"{}\"\n",
            ip.display(),
            mp.display()
        ),
    );
    let o = run("inpaint", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("inpaint.mask"));
}

#[test]
fn commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "[grid]\ncounts = [12, 12, 8]\n[flow]\nfinal_time = 0.01\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run("simulate", &cfg, &a, &[])), 0);
    assert_eq!(code(&run("simulate", &cfg, &b, &[])), 0);
    let fa = fs::read(a.join("snapshot_000.srmcf")).unwrap();
    let fb = fs::read(b.join("snapshot_000.srmcf")).unwrap();
    assert_eq!(fa, fb);
}
