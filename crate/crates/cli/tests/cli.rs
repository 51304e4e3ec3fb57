use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaussfisher"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gaussfisher")
}

fn out_path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: `{s}`"))
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let a = out_path(&dir, "a.csv");
    let b = out_path(&dir, "b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "run",
            "--scenario",
            "fig_optdyne",
            "--set",
            "t_steps=300",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn header_and_schema() {
    let dir = TempDir::new().unwrap();
    let p = out_path(&dir, "fig2.csv");
    assert!(run(&["run", "--scenario", "fig2", "--out", p.to_str().unwrap()])
        .status
        .success());
    let (header, rows) = read_csv(&p);
    assert_eq!(
        header,
        [
            "series",
            "t",
            "qfi",
            "cfi_homodyne_q",
            "cfi_homodyne_p",
            "cfi_heterodyne",
            "cfi_optimal",
            "z_optimal",
            "rate_plus",
            "rate_minus"
        ]
    );
    assert_eq!(rows.len(), 2000);
    let ts: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
    // memory effects drive a rate negative somewhere in the window
    assert!(rows.iter().any(|r| num(&r[9]) < 0.0 || num(&r[8]) < 0.0));
    assert!(rows.iter().all(|r| r[2].is_empty()));
}

#[test]
fn fig1a_unsqueezed_curve() {
    let dir = TempDir::new().unwrap();
    let p = out_path(&dir, "fig1a.csv");
    assert!(run(&["run", "--scenario", "fig1a", "--out", p.to_str().unwrap()])
        .status
        .success());
    let (header, rows) = read_csv(&p);
    assert_eq!(header[0], "beta_mod");
    let mut curves = 0;
    for r in rows.iter().filter(|r| num(&r[0]) == 0.0) {
        let t = num(&r[2]);
        assert!((num(&r[3]) - 4.0 * t * t).abs() <= 1e-12 * (1.0 + 4.0 * t * t));
        curves += 1;
    }
    assert_eq!(curves, 2000);
    assert_eq!(rows.len(), 4000);
}

#[test]
fn config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# thermal bath\ngamma = 0.05\nn_th = 0.1\nt_end = 5\nt_steps = 10\nmodel = markovian\n",
    )
    .unwrap();
    let p = out_path(&dir, "custom.csv");
    let o = run(&[
        "run",
        "--scenario",
        "custom",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "t_steps=7",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&p);
    assert_eq!(rows.len(), 7);
    assert_eq!(num(&rows[6][1]), 5.0);
}

#[test]
fn singleton_sweep_matches_plain_run() {
    let dir = TempDir::new().unwrap();
    let plain = out_path(&dir, "plain.csv");
    let swept = out_path(&dir, "swept.csv");
    let base = ["run", "--scenario", "fig_optdyne", "--set", "t_steps=200"];
    let mut a: Vec<&str> = base.to_vec();
    a.extend(["--out", plain.to_str().unwrap()]);
    assert!(run(&a).status.success());
    let mut b: Vec<&str> = base.to_vec();
    b.extend(["--set", "sweep=n_th: 0.1", "--out", swept.to_str().unwrap()]);
    assert!(run(&b).status.success());

    let (h1, r1) = read_csv(&plain);
    let (h2, r2) = read_csv(&swept);
    assert_eq!(h2[0], "n_th");
    assert_eq!(&h2[1..], &h1[..]);
    assert_eq!(r1.len(), r2.len());
    for (x, y) in r1.iter().zip(&r2) {
        assert_eq!(&y[1..], &x[..]);
    }
}

#[test]
fn thermal_noise_lowers_unsqueezed_qfi() {
    let dir = TempDir::new().unwrap();
    let p = out_path(&dir, "n.csv");
    let o = run(&[
        "run",
        "--scenario",
        "fig1b",
        "--set",
        "sweep=n_th: 0, 0.5, 1",
        "--set",
        "beta_mod=0",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&p);
    assert_eq!(rows.len(), 6000);
    for i in 0..2000 {
        let q: Vec<f64> = (0..3).map(|k| num(&rows[k * 2000 + i][3])).collect();
        assert!(
            q[1] <= q[0] * (1.0 + 1e-12) && q[2] <= q[1] * (1.0 + 1e-12),
            "row {i}: {q:?}"
        );
    }
}

#[test]
fn fig5_gap_grows_with_squeezing() {
    let dir = TempDir::new().unwrap();
    let p = out_path(&dir, "fig5.csv");
    let o = run(&[
        "run",
        "--scenario",
        "fig5_gap",
        "--set",
        "t_steps=8001",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&p);
    assert_eq!(header, ["beta_I", "qfi_opt_over_t", "cfi_opt_over_t", "relative_gap"]);
    assert_eq!(rows.len(), 6);
    let gaps: Vec<f64> = rows.iter().map(|r| num(&r[3])).collect();
    assert!(gaps.windows(2).all(|w| w[1] >= w[0]), "{gaps:?}");
    assert!(gaps.iter().all(|&g| g >= 0.0));
}

#[test]
fn verify_writes_passing_report() {
    let dir = TempDir::new().unwrap();
    let p = out_path(&dir, "verify.csv");
    let o = run(&["verify", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&p);
    assert_eq!(
        header,
        ["quantity", "analytic", "oracle", "rel_error", "tolerance", "pass"]
    );
    assert!(rows.len() > 40);
    assert!(rows.iter().all(|r| r[5] == "true"));
}

#[test]
fn config_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let p = out_path(&dir, "x.csv");
    let out = p.to_str().unwrap();
    for args in [
        vec!["run", "--scenario", "fig9", "--out", out],
        vec!["run", "--scenario", "fig2", "--set", "omega=-7", "--out", out],
        vec!["run", "--scenario", "fig2", "--set", "bogus=1", "--out", out],
        vec!["run", "--scenario", "fig2", "--set", "t_end=0", "--out", out],
        vec![
            "run",
            "--scenario",
            "fig2",
            "--config",
            "/nonexistent/cfg",
            "--out",
            out,
        ],
        vec!["run", "--scenario", "fig2"],
        vec!["launch"],
    ] {
        let o = run(&args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = run(&["run", "--scenario", "fig2", "--set", "omega=-7", "--out", out]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega"));
    assert!(!p.exists());
}

#[test]
fn numeric_failure_exits_2() {
    // β beyond the stability bound makes the covariance integrals blow up
    let dir = TempDir::new().unwrap();
    let p = out_path(&dir, "x.csv");
    let o = run(&[
        "run",
        "--scenario",
        "custom",
        "--set",
        "beta_mod=2000",
        "--set",
        "t_end=80",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn help_exits_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
