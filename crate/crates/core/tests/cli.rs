use std::fs;
use std::path::Path;

use heatex::cli::{self, CommonArgs, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_SEARCH};
use tempfile::TempDir;

fn heatex(verb: &str, out: &Path, extra: &[&str]) -> (i32, String) {
    let mut args = vec!["heatex".to_string(), verb.to_string(), "--out".into(), out.display().to_string()];
    for s in extra {
        args.push("--set".into());
        args.push(s.to_string());
    }
    let mut stdout = Vec::new();
    let code = cli::run(args, &mut stdout);
    (code, String::from_utf8(stdout).unwrap())
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn json_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn field(line: &str, key: &str) -> f64 {
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn linear_default_run() {
    let dir = TempDir::new().unwrap();
    let (code, out) = heatex("linear", dir.path(), &[]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = read_csv(&dir.path().join("trace.csv"));
    assert_eq!(header, ["t", "sup_u", "sup_v", "mass_u", "mass_v", "evanescent_sup"]);
    assert!(rows.len() >= 8);
    let exponent = field(out.lines().next().unwrap(), "decay_exponent");
    assert!((exponent - 0.5).abs() <= 0.05, "{exponent}");
    let rate = field(out.lines().nth(1).unwrap(), "evanescent_rate");
    assert!(rate >= 2.0 - 0.05, "{rate}");
}

#[test]
fn malformed_config_reports_location() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\n  \"c\": 1,\n  oops\n}").unwrap();
    let args = CommonArgs {
        config: Some(cfg.clone()),
        out: dir.path().into(),
        seed: 0,
        threads: None,
        overrides: vec![],
    };
    let err = cli::load_config(&args).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(err.to_string().contains("line 3 column 3"), "{err}");
    let mut sink = Vec::new();
    let code = cli::run(
        ["heatex", "linear", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        &mut sink,
    );
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn config_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"t_end": 10, "samples": 12, "fit_window": [2, 10]}"#).unwrap();
    let mut sink = Vec::new();
    let code = cli::run(
        [
            "heatex",
            "linear",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "samples=20",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &mut sink,
    );
    assert_eq!(code, EXIT_OK);
    let (_, rows) = read_csv(&dir.path().join("trace.csv"));
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.last().unwrap()[0].parse::<f64>().unwrap(), 10.0);
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(heatex("linear", dir.path(), &["bogus=1"]).0, EXIT_CONFIG);
    assert_eq!(heatex("linear", dir.path(), &["t_max=1"]).0, EXIT_CONFIG);
    assert_eq!(heatex("linear", dir.path(), &["c=-1"]).0, EXIT_CONFIG);
    assert_eq!(heatex("linear", dir.path(), &["points=1000"]).0, EXIT_CONFIG);
    assert_eq!(heatex("linear", dir.path(), &["dim=3"]).0, EXIT_CONFIG);
    assert_eq!(heatex("semilinear", dir.path(), &["data=ring"]).0, EXIT_CONFIG);
    let mut sink = Vec::new();
    let code = cli::run(["heatex", "symbols", "--threads", "0", "--out", dir.path().to_str().unwrap()], &mut sink);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn wraparound_is_a_numerical_guard() {
    let dir = TempDir::new().unwrap();
    let (code, _) = heatex("linear", dir.path(), &["t_end=200", "fit_window=[5,200]"]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn semilinear_outcome_lines() {
    let dir = TempDir::new().unwrap();
    let (code, out) = heatex("semilinear", dir.path(), &[]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("BLOW_UP t_star="), "{out}");
    let (header, rows) = read_csv(&dir.path().join("trace.csv"));
    assert_eq!(header[0], "t");
    assert!(rows.len() > 10);

    let (code, out) = heatex("semilinear", dir.path(), &["data=zero"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "GLOBAL_DECAY");

    let small = ["data=gaussian", "amp_u=0.05", "amp_v=0.05", "p=4", "t_end=40", "dt_max=0.1"];
    let (code, out) = heatex("semilinear", dir.path(), &small);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "GLOBAL_DECAY");
}

#[test]
fn sweep_grid_records() {
    let dir = TempDir::new().unwrap();
    let mut sink = Vec::new();
    let code = cli::run(
        ["heatex", "sweep", "--threads", "2", "--out", dir.path().to_str().unwrap()],
        &mut sink,
    );
    assert_eq!(code, EXIT_OK);
    let records = json_lines(&dir.path().join("grid.json"));
    assert_eq!(records.len(), 9);
    assert!(records.iter().all(|r| r["outcome"] == "BLOW_UP" && r["t_star"].is_number()));
    let ps: Vec<f64> = records.iter().map(|r| r["p"].as_f64().unwrap()).collect();
    assert_eq!(ps, [0.5, 0.5, 0.5, 1.0, 1.0, 1.0, 1.5, 1.5, 1.5]);
    let (header, rows) = read_csv(&dir.path().join("grid.csv"));
    assert_eq!(header, ["p", "amplitude", "m", "m0", "outcome", "t_star"]);
    assert_eq!(rows.len(), 9);
}

#[test]
fn sweep_keeps_inconclusive_cells() {
    let dir = TempDir::new().unwrap();
    let (code, _) = heatex(
        "sweep",
        dir.path(),
        &["data=gaussian", "p_values=[4]", "amplitudes=[1.5]", "t_end=0.01"],
    );
    assert_eq!(code, EXIT_OK);
    let records = json_lines(&dir.path().join("grid.json"));
    assert_eq!(records[0]["outcome"], "INCONCLUSIVE");
    assert!(records[0]["t_star"].is_null());
    assert!(records[0]["m0"].is_number());
    assert_eq!(heatex("sweep", dir.path(), &["amplitudes=[]"]).0, EXIT_CONFIG);
}

#[test]
fn symbol_profiles() {
    let dir = TempDir::new().unwrap();
    let (code, _) = heatex("symbols", dir.path(), &[]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = read_csv(&dir.path().join("lprofile.csv"));
    assert_eq!(header, ["xi", "L_0", "L_1", "L_2", "L_3"]);
    assert_eq!(rows.len(), 512);
    let values: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert!(values[0][1..].iter().all(|&l| l == 0.0));
    for row in &values {
        assert!((row[1] + row[0] * row[0]).abs() <= 1e-12 * (1.0 + row[0] * row[0]));
    }
    for col in 1..5 {
        assert!(values.windows(2).all(|w| w[1][col] <= w[0][col]));
    }
    assert_eq!(heatex("symbols", dir.path(), &["combinations=[]"]).0, EXIT_CONFIG);
}

#[test]
fn phaseplane_search_run() {
    let dir = TempDir::new().unwrap();
    let (code, out) = heatex("phaseplane", dir.path(), &[]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("BLOW_UP"), "{out}");
    assert!(field(&out, "epsilon") > 0.0);
    let records = json_lines(&dir.path().join("geometry.json"));
    assert_eq!(records[0]["record"], "summary");
    let dets: Vec<&serde_json::Value> = records.iter().filter(|r| r["record"] == "det").collect();
    assert_eq!(dets.len(), 101);
    let last = dets.last().unwrap();
    assert_eq!(last["alpha"].as_f64(), Some(1.0));
    assert!(last["det"].as_f64().unwrap().abs() < 1e-10);
    let inv = records.iter().find(|r| r["record"] == "invariance").unwrap();
    assert_eq!(inv["exits"], 0);
    let (header, rows) = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(header, ["t", "U", "V"]);
    assert!(rows.len() > 10);
}

#[test]
fn phaseplane_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(heatex("phaseplane", dir.path(), &["p=3"]).0, EXIT_CONFIG);
    assert_eq!(heatex("phaseplane", dir.path(), &["eta=1e-6"]).0, EXIT_SEARCH);
    let degenerate = ["mode=direct", "lambda=5", "u0=1", "v0=1"];
    assert_eq!(heatex("phaseplane", dir.path(), &degenerate).0, EXIT_CONFIG);
    // the direct path has no exponent restriction
    let (code, out) = heatex("phaseplane", dir.path(), &["mode=direct", "lambda=0", "u0=2", "v0=1", "p=3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("BLOW_UP"), "{out}");
}

#[test]
fn certificate_records() {
    let dir = TempDir::new().unwrap();
    let (code, out) = heatex("certificate", dir.path(), &[]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("CERTIFIED"));
    let rec = &json_lines(&dir.path().join("certificate.json"))[0];
    assert_eq!(rec["certified"], true);
    assert!(rec["m"].as_f64().unwrap() < rec["m0"].as_f64().unwrap());

    let (code, _) = heatex("certificate", dir.path(), &["amp_u=1"]);
    assert_eq!(code, EXIT_CONFIG);
    let rec = &json_lines(&dir.path().join("certificate.json"))[0];
    assert_eq!(rec["certified"], false);
    assert!(rec["bound_u"].is_null());
    assert_eq!(heatex("certificate", dir.path(), &["p=2"]).0, EXIT_CONFIG);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for verb in ["symbols", "phaseplane", "certificate"] {
        heatex(verb, a.path(), &[]);
        heatex(verb, b.path(), &[]);
    }
    for name in ["lprofile.csv", "geometry.json", "trajectory.csv", "certificate.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}
