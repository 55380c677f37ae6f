use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn diracl2(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_diracl2"));
    cmd.args(args);
    cmd.env_remove("DIRACL2_THREADS");
    if let Some(t) = threads {
        cmd.env("DIRACL2_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diracl2-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn out_of_range_n_is_a_config_error() {
    let out = diracl2(&["verify", "--n", "99"], None);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n = 99"));
}

#[test]
fn unknown_flags_and_bad_values_exit_2() {
    assert_eq!(code(&diracl2(&["verify", "--bogus"], None)), 2);
    assert_eq!(code(&diracl2(&["solve", "--tol", "abc"], None)), 2);
    assert_eq!(code(&diracl2(&["solve", "--n", "1", "--grid", "300"], None)), 2);
    assert_eq!(code(&diracl2(&["solve", "--weight", "nope"], None)), 2);
    assert_eq!(code(&diracl2(&["verify", "--n", "1"], Some("zero"))), 2);
}

#[test]
fn quadratic_weight_solve_certifies_the_bound() {
    let out = diracl2(
        &[
            "solve", "--n", "1", "--grid", "129,129", "--domain", "-1:1,-1:1", "--weight", "quadratic0", "--rhs", "bump:e0",
            "--tol", "1e-10",
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["report"]["converged"], true);
    let ratio = r["checks"]["bound_ratio"].as_f64().unwrap();
    assert!(ratio > 0.0 && ratio <= 1.0, "{ratio}");
    assert!(r["report"]["relative_residual"].as_f64().unwrap() <= 1e-10);
    assert!(r["report"]["slab"]["ratio"].as_f64().unwrap() <= 1.0);
    assert_eq!(r["checks"]["necessity_holds"], true);
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let path = scratch("run.cfg");
    std::fs::write(&path, "# solve settings\nn = 2\ngrid = 9\nweight = aniso-quadratic\nmax_iter = 500\n").unwrap();
    let cfg = path.to_str().unwrap();

    let out = diracl2(&["solve", "--config", cfg], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["config"]["n"], 2);
    assert_eq!(r["config"]["grid"], serde_json::json!([9, 9, 9]));
    assert_eq!(r["config"]["weight"], "aniso-quadratic");
    assert_eq!(r["config"]["max_iter"], 500);
    assert_eq!(r["config"]["seed"], 7);

    let out = diracl2(&["solve", "--config", cfg, "--grid", "7", "--seed", "3"], None);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["config"]["grid"], serde_json::json!([7, 7, 7]));
    assert_eq!(r["config"]["seed"], 3);
    assert_eq!(r["config"]["weight"], "aniso-quadratic");

    std::fs::write(&path, "colour = blue\n").unwrap();
    assert_eq!(code(&diracl2(&["solve", "--config", cfg], None)), 2);
}

#[test]
fn io_failures_exit_4() {
    let missing = scratch("no-such-dir").join("out.json");
    let out = diracl2(&["verify", "--n", "1", "--trials", "5", "--fields", "1", "--output", missing.to_str().unwrap()], None);
    assert_eq!(code(&out), 4);
    let out = diracl2(&["verify", "--config", "/definitely/not/here.cfg"], None);
    assert_eq!(code(&out), 4);
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cases: [&[&str]; 3] = [
        &["verify", "--n", "3", "--trials", "40", "--fields", "4"],
        &["solve", "--n", "2", "--grid", "13", "--weight", "aniso-quadratic", "--rhs", "bump:e12"],
        &["sweep", "--n", "1", "--grid", "17", "--weight", "quadratic0", "--levels", "2"],
    ];
    for args in cases {
        let one = diracl2(args, Some("1"));
        let four = diracl2(args, Some("4"));
        assert_eq!(code(&one), code(&four));
        assert!(!one.stdout.is_empty());
        assert!(one.stdout == four.stdout, "{args:?}");
    }
}

#[test]
fn output_file_and_snapshot_are_written() {
    let out_path = scratch("solve.json");
    let snap = scratch("u.csv");
    let out = diracl2(
        &[
            "solve", "--n", "1", "--grid", "17", "--output", out_path.to_str().unwrap(), "--snapshot", snap.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    let csv = std::fs::read_to_string(&snap).unwrap();
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    // header plus one row per node
    assert_eq!(rows, 1 + 17 * 17);
}

#[test]
fn verify_reports_every_suite() {
    let out = diracl2(&["verify", "--n", "2", "--trials", "50", "--fields", "5"], None);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["suites"].as_array().unwrap().len(), 7);
    assert!(r["skipped"].as_array().unwrap().is_empty());

    let r = report(&diracl2(&["verify", "--n", "1", "--trials", "50", "--fields", "5"], None));
    assert_eq!(r["skipped"].as_array().unwrap().len(), 1);
}

#[test]
fn kernel_scan_matches_the_point_mass() {
    let out = diracl2(&["kernel", "--n", "1", "--grid", "33", "--levels", "3"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let levels = r["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 3);
    let last = &levels[2];
    assert!(last["relative_error"].as_f64().unwrap() < 0.05);
    let order = r["annulus_orders"][1].as_f64().unwrap();
    assert!((order - 2.0).abs() < 0.3, "{order}");
}

#[test]
fn sweep_csv_has_fixed_columns() {
    let out = diracl2(&["sweep", "--n", "1", "--grid", "17", "--levels", "3", "--weight", "quadratic0"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let config: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config=").unwrap()).unwrap();
    assert_eq!(config["command"], "sweep");
    assert_eq!(lines.next().unwrap(), "level,h,defect_eq22,bound_ratio,weak_defect,observed_order");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[0][5], "");
    let order: f64 = rows[2][5].parse().unwrap();
    assert!((order - 2.0).abs() < 0.3);
}
