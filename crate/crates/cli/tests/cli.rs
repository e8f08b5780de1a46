use std::path::Path;
use std::process::{Command, Output};

use anglewalk::io::read_polyline_csv;

fn anglewalk() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_anglewalk"));
    cmd.env_remove("ANGLEWALK_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    anglewalk().args(args).output().expect("binary runs")
}

fn csv_at(path: &Path) -> anglewalk::io::ParsedCsv {
    read_polyline_csv(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

fn spec_json(path: &Path) -> serde_json::Value {
    let csv = csv_at(path);
    serde_json::from_str(&csv.header.spec_json).unwrap()
}

#[test]
fn bm_limit_has_grid_plus_one_rows() {
    let out = run(&["limit", "--kind", "bm", "--sigma", "0.7071", "--grid", "100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).skip(1).count();
    assert_eq!(rows, 101);
    assert!(text.lines().nth(2).unwrap() == "t,x,y");
}

#[test]
fn c2_drift_rules() {
    let dir = tempfile::tempdir().unwrap();
    let derived = dir.path().join("derived.csv");
    let out = run(&[
        "limit", "--kind", "c2", "--kappa", "16", "--grid", "10000", "--drift-coeff", "derived", "--out",
        derived.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let c = spec_json(&derived)["limit"]["kind"]["c2"]["drift_coeff"].as_f64().unwrap();
    assert!((c - (16.0f64 / 3.0).sqrt()).abs() < 1e-12);
    let csv = csv_at(&derived);
    assert_eq!(csv.rows.len(), 10_001);
    assert!(csv.rows.iter().all(|r| r.phi.is_some() && r.driver.is_some()));

    let paper = dir.path().join("paper.csv");
    let out = run(&[
        "limit", "--kind", "c2", "--kappa", "16", "--drift-coeff", "paper", "--out",
        paper.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let c = spec_json(&paper)["limit"]["kind"]["c2"]["drift_coeff"].as_f64().unwrap();
    assert!((c - 2.0 * 16.0 / 3.0).abs() < 1e-12);
}

#[test]
fn simulate_figure_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("markov.csv");
    let svg = dir.path().join("markov.svg");
    let out = run(&[
        "simulate", "--construction", "markov", "--coeff", "200.96", "--exponent", "1.5", "--n", "100000",
        "--seed", "7", "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = csv_at(&csv);
    assert_eq!(parsed.rows.len(), 100_001);
    assert_eq!(parsed.header.seed, "7");
    assert_eq!(parsed.header.construction, "markov");
    let doc_text = std::fs::read_to_string(&svg).unwrap();
    roxmltree::Document::parse(&doc_text).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("seed=7") && stderr.contains("markov_increments"));

    let out = run(&[
        "simulate", "--construction", "iid-shrinking", "--coeff", "6.2832", "--exponent", "0.5", "--n", "1000",
        "--rescale", "by-n",
    ]);
    assert!(out.status.success());
    let parsed = read_polyline_csv(&out.stdout[..]).unwrap();
    assert_eq!(parsed.header.scale, 1e-3);
    let last = parsed.rows.last().unwrap();
    assert!(last.point.norm() <= 1.0 + 1e-12);

    let out = run(&["simulate", "--construction", "iid", "--alpha", "0.7853981634", "--n", "500"]);
    assert!(out.status.success());
}

#[test]
fn alpha_degrees_are_recorded_in_radians() {
    let out = run(&["simulate", "--alpha-deg", "45", "--n", "10"]);
    assert!(out.status.success());
    let parsed = read_polyline_csv(&out.stdout[..]).unwrap();
    let spec: serde_json::Value = serde_json::from_str(&parsed.header.spec_json).unwrap();
    let alpha = spec["walk"]["construction"]["iid_constant"]["alpha"].as_f64().unwrap();
    assert!((alpha - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
}

#[test]
fn rerun_is_byte_identical_and_seed_is_verbatim() {
    let args = ["simulate", "--construction", "iid", "--alpha", "1.2", "--n", "300", "--seed", "0x1F"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(text.starts_with("# anglewalk v1, seed=0x1F, construction=iid, n=300, scale=1\n"));
    let decimal = run(&["simulate", "--construction", "iid", "--alpha", "1.2", "--n", "300", "--seed", "31"]);
    let strip = |o: &[u8]| String::from_utf8(o.to_vec()).unwrap().lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a.stdout), strip(&decimal.stdout));
}

#[test]
fn seed_from_environment() {
    let from_env = anglewalk()
        .env("ANGLEWALK_SEED", "99")
        .args(["simulate", "--alpha", "1", "--n", "20"])
        .output()
        .unwrap();
    let flag = run(&["simulate", "--alpha", "1", "--n", "20", "--seed", "99"]);
    assert_eq!(from_env.stdout, flag.stdout);
    let default = run(&["simulate", "--alpha", "1", "--n", "20"]);
    assert!(String::from_utf8(default.stdout).unwrap().contains("seed=0,"));
}

#[test]
fn verify_msd_example() {
    let out = run(&["verify", "msd", "--alpha", "1.5707963", "--n", "1000", "--replicates", "5000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let check = &report["suites"][0]["checks"][0];
    assert_eq!(check["name"], "msd_n1000");
    assert!((check["expected"].as_f64().unwrap() - 4494.2).abs() < 0.5);
    for key in ["name", "expected", "observed", "tolerance", "pass"] {
        assert!(check.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_tv_example() {
    let out = run(&["verify", "tv", "--alpha", "1.5707963", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = report["suites"][0]["checks"].as_array().unwrap();
    let get = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap()["observed"].as_f64().unwrap();
    assert!((get("tv_empirical_r2") - 0.25).abs() < 0.02);
    assert!((get("fourier_bound_r2") - 0.5).abs() < 1e-6);
}

#[test]
fn verify_lipschitz_example() {
    let out = run(&["verify", "lipschitz", "--construction", "iid", "--alpha", "3.1415926", "--n", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = report["suites"][0]["checks"].as_array().unwrap();
    let max = checks.iter().find(|c| c["name"] == "lipschitz_max_constant").unwrap();
    assert!(max["observed"].as_f64().unwrap() <= 1.0 + 1e-9);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "nonsense"],
        vec!["verify", "msd", "--r", "2"],
        vec!["simulate", "--construction", "markov", "--n", "10"],
        vec!["simulate", "--alpha", "4.0", "--n", "10"],
        vec!["simulate", "--alpha", "1", "--alpha-deg", "30", "--n", "10"],
        vec!["limit", "--kind", "c2"],
        vec!["limit", "--kind", "c1", "--kappa", "1", "--drift-coeff", "huge"],
        vec!["limit", "--kind", "bm", "--grid", "1"],
        vec!["simulate", "--alpha", "1", "--n", "10", "--seed", "banana"],
        vec!["frobnicate"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn failing_checks_exit_one() {
    // One replicate has zero standard error, so the 3-SE band is empty.
    let out = run(&["verify", "msd", "--alpha", "0.3", "--n", "50", "--replicates", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["suites"][0]["checks"][0]["pass"], false);
    assert!(String::from_utf8(out.stderr).unwrap().contains("FAIL msd/msd_n50"));
}

#[test]
fn run_plan_emits_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"seed": "0xabc", "replicates": 200,
            "target": {"walk": {"construction": {"iid_constant": {"alpha": 3.141592653589793}}, "n": 100}},
            "estimators": [{"name": "endpoint_sq_norm", "params": {}}]}"#,
    )
    .unwrap();
    let out = run(&["run", "--plan", plan.to_str().unwrap(), "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let rec: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(rec["n_samples"], 200);
    assert_eq!(rec["seed"], 0xabc);
    let mean = rec["value"].as_f64().unwrap();
    assert!((mean - 100.0).abs() < 5.0 * rec["stderr"].as_f64().unwrap());
}
