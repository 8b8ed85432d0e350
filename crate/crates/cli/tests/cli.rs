use std::path::Path;
use std::process::{Command, Output};

fn ctorsion(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctorsion"))
        .args(args)
        .env("CTORSION_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn spectrum_fs_l8() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = ctorsion(&tmp.path().join("c"), &["spectrum", "-L", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue");
    assert_eq!(lines.len(), 82);
    let vals: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(vals[0].abs() < 1e-10);
    for v in &vals[1..4] {
        assert!((v - 1.0).abs() < 1e-10);
    }
    assert!((vals[80] - 36.0).abs() < 1e-9);
    assert_eq!(summary(&out)["status"], "pass");
}

#[test]
fn theta_csv_has_configured_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[discretization]\nl = 6\n[theta]\nlo = 0.1\nhi = 5.0\ncount = 7\n").unwrap();
    let o = ctorsion(
        &tmp.path().join("c"),
        &["theta", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("theta.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,theta,trunc_bound"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn validation_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("c");
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    assert_eq!(ctorsion(&c, &["spectrum", "--metric", "pnorm:0", "--out", out]).status.code(), Some(2));
    assert_eq!(ctorsion(&c, &["spectrum", "-L", "0", "--out", out]).status.code(), Some(2));
    assert_eq!(ctorsion(&c, &["nonsense"]).status.code(), Some(2));
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[metric]\nspeck = \"fs\"\n").unwrap();
    assert_eq!(
        ctorsion(&c, &["spectrum", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(),
        Some(2)
    );
    // A user window far below the accurate range cannot support a fit.
    std::fs::write(&cfg, "[discretization]\nl = 6\n[fit]\nwindow = [1e-6, 1e-5]\n").unwrap();
    assert_eq!(
        ctorsion(&c, &["zeta", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(),
        Some(2)
    );
}

#[test]
fn failed_tolerance_exits_3() {
    // At L = 8 the Mellin route cannot reach 1e-4 relative agreement.
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = ctorsion(&tmp.path().join("c"), &["zeta", "-L", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let s = summary(&out);
    assert_eq!(s["status"], "fail");
    assert_eq!(s["failed"][0], "key2");
    assert!(out.join("zeta.json").exists());
}

#[test]
fn unwritable_output_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let o = ctorsion(&tmp.path().join("c"), &["spectrum", "-L", "4", "--out", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("c");
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let n = tmp.path().join("n");
    for (dir, extra) in [(&a, None), (&b, None), (&n, Some("--no-cache"))] {
        let mut args = vec!["zeta", "-L", "16", "--metric", "pnorm:3", "--out", dir.to_str().unwrap()];
        args.extend(extra);
        let o = ctorsion(&c, &args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    let read = |d: &Path| std::fs::read(d.join("zeta.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&n));
    assert_eq!(std::fs::read_dir(&c).unwrap().count(), 1);
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = ctorsion(&tmp.path().join("c"), &["selftest", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(summary(&out)["status"], "pass");
}
