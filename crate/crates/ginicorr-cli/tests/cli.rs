//! End-to-end tests of the `ginicorr` binary: output values against frozen
//! reference numbers, JSON determinism, exit codes, and report files.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ginicorr"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}):\n{}", stdout(out));
    })
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        stderr(out)
    );
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        stderr(out)
    );
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------- estimate

#[test]
fn estimate_iris_matches_frozen_values() {
    let out = run(&["estimate", "--data", "iris", "--json"]);
    assert_success(&out);
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "estimate");
    assert_eq!(doc["n"], 150);
    assert_eq!(doc["dim"], 4);
    assert_eq!(doc["label"], "species");
    assert!(close(doc["rho_g"].as_f64().unwrap(), 0.6289690790270397, 1e-12));
    assert!(close(doc["rho_u"].as_f64().unwrap(), 0.6239210392859109, 1e-12));
    let v_pooled = 2.5446414657151366 * 149.0 / 150.0;
    assert!(close(doc["gmd_pooled"].as_f64().unwrap(), v_pooled, 1e-12));
    // rho_g = gcov / gmd_pooled by construction.
    let gcov = doc["gcov"].as_f64().unwrap();
    assert!(close(gcov / v_pooled, 0.6289690790270397, 1e-12));
    let classes = doc["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 3);
    let names: Vec<&str> = classes.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["setosa", "versicolor", "virginica"]);
    for c in classes {
        assert_eq!(c["count"], 50);
    }
}

#[test]
fn estimate_human_output_lists_headline_quantities() {
    let out = run(&["estimate", "--data", "iris", "--features", "petal_length,petal_width"]);
    assert_success(&out);
    let text = stdout(&out);
    for needle in ["rho_g", "rho_u", "gcov", "delta", "n_k", "setosa", "0.759404"] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }
}

#[test]
fn estimate_selects_features_by_index_and_name_identically() {
    let by_name = run(&["estimate", "--data", "iris", "--features", "sepal_width,petal_width", "--json"]);
    let by_index = run(&["estimate", "--data", "iris", "--features", "1,3", "--json"]);
    assert_success(&by_name);
    assert_success(&by_index);
    assert_eq!(stdout(&by_name), stdout(&by_index));
}

// ---------------------------------------------------------------------- ci

#[test]
fn ci_iris_matches_frozen_intervals() {
    let out = run(&[
        "ci", "--data", "iris", "--features", "sepal_width,petal_width", "--json",
    ]);
    assert_success(&out);
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["level"], 0.95);
    let intervals = doc["intervals"].as_array().unwrap();
    assert_eq!(intervals.len(), 4);
    let get = |name: &str| -> (f64, f64, String) {
        let ci = intervals
            .iter()
            .find(|ci| ci["method"] == name)
            .unwrap_or_else(|| panic!("method {name} missing"));
        (
            ci["lower"].as_f64().unwrap(),
            ci["upper"].as_f64().unwrap(),
            ci["status"].as_str().unwrap().to_string(),
        )
    };
    let expected = [
        ("jel", 0.5127859974826514, 0.5958779905165374),
        ("ajel", 0.5119998359109101, 0.5965503160829484),
        ("wjel", 0.4728251479740081, 0.5761199088568625),
        ("jv", 0.5229984591174679, 0.6033496399768685),
    ];
    for (name, lo, hi) in expected {
        let (l, u, status) = get(name);
        assert!(close(l, lo, 1e-8), "{name} lower {l} vs {lo}");
        assert!(close(u, hi, 1e-8), "{name} upper {u} vs {hi}");
        assert_eq!(status, "ok", "{name}");
    }
    // EL methods expose their anchor; the normal approximation has none.
    let jel = intervals.iter().find(|ci| ci["method"] == "jel").unwrap();
    assert!(close(jel["anchor"].as_f64().unwrap(), 0.5572308393369256, 1e-12));
    let jv = intervals.iter().find(|ci| ci["method"] == "jv").unwrap();
    assert!(jv["anchor"].is_null());
}

#[test]
fn ci_method_subset_and_level_are_honored() {
    let out = run(&[
        "ci", "--data", "iris", "--features", "petal_length,petal_width",
        "--method", "jv", "--level", "0.99", "--json",
    ]);
    assert_success(&out);
    let doc = json(&out);
    let intervals = doc["intervals"].as_array().unwrap();
    assert_eq!(intervals.len(), 1);
    assert_eq!(intervals[0]["method"], "jv");
    assert_eq!(intervals[0]["level"], 0.99);
}

#[test]
fn ci_levels_nest() {
    let narrow = run(&["ci", "--data", "iris", "--method", "jel", "--level", "0.95", "--json"]);
    let wide = run(&["ci", "--data", "iris", "--method", "jel", "--level", "0.99", "--json"]);
    assert_success(&narrow);
    assert_success(&wide);
    let n = json(&narrow)["intervals"][0].clone();
    let w = json(&wide)["intervals"][0].clone();
    assert!(w["lower"].as_f64().unwrap() <= n["lower"].as_f64().unwrap() + 1e-9);
    assert!(w["upper"].as_f64().unwrap() >= n["upper"].as_f64().unwrap() - 1e-9);
}

#[test]
fn ci_failure_exits_with_numerical_code() {
    // Interleaved singletons: the correlation is decisively negative, the
    // whole-parameter-range statistic stays above the threshold, and no
    // confidence set exists inside [0, 1].
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("interleaved.csv");
    let mut text = String::from("x,group\n");
    for i in 0..20 {
        text.push_str(&format!("{}.0,{}\n", i, if i % 2 == 0 { "a" } else { "b" }));
    }
    std::fs::write(&path, text).unwrap();
    let out = run(&["ci", "--data", path.to_str().unwrap(), "--method", "jel"]);
    assert_exit(&out, 3);
    assert!(stdout(&out).contains("failed"), "stdout: {}", stdout(&out));
}

// ------------------------------------------------------------------ oracle

#[test]
fn oracle_closed_forms_print_exact_values() {
    let out = run(&["oracle", "exponential", "--p", "0.5", "--theta", "1", "--beta", "4", "--json"]);
    assert_success(&out);
    let doc = json(&out);
    assert!(close(doc["rho"].as_f64().unwrap(), 0.15254237288135594, 1e-12));
    assert_eq!(doc["family"], "exponential");

    let out = run(&["oracle", "normal-location", "--p", "0.5", "--a", "3", "--json"]);
    assert_success(&out);
    assert!(close(json(&out)["rho"].as_f64().unwrap(), 0.45562891217985413, 1e-12));

    // Equal scales mean the classes are identical: zero correlation.
    let out = run(&["oracle", "normal-scale", "--p", "0.5", "--r", "1"]);
    assert_success(&out);
    assert!(stdout(&out).contains("0.0000000000"), "stdout: {}", stdout(&out));
}

#[test]
fn oracle_rejects_invalid_parameters() {
    let out = run(&["oracle", "exponential", "--p", "1.5", "--theta", "1", "--beta", "4"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("p"), "stderr: {}", stderr(&out));
}

#[test]
fn oracle_monte_carlo_is_seeded_and_deterministic() {
    let args = [
        "oracle", "monte-carlo", "--config", "normal_mixture_k3",
        "--n-total", "10000", "--seed", "7", "--json",
    ];
    let first = run(&args);
    assert_success(&first);
    let second = run(&args);
    assert_eq!(stdout(&first), stdout(&second), "seeded runs must be byte-identical");
    let doc = json(&first);
    let rho = doc["rho"].as_f64().unwrap();
    let se = doc["standard_error"].as_f64().unwrap();
    assert_eq!(doc["block_estimates"].as_array().unwrap().len(), 10);
    assert!(se > 0.0);
    assert!((rho - 0.2297).abs() < 4.0 * se, "rho {rho} se {se}");

    // The seed is mandatory.
    let out = run(&["oracle", "monte-carlo", "--config", "normal_mixture_k3"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("--seed"), "stderr: {}", stderr(&out));
}

// ---------------------------------------------------------------- simulate

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL_CONFIG: &str = r#"
id = "cli-smoke"
n = 30
replications = 100
batches = 2
rho_true = 0.45562891217985413

[[components]]
weight = 0.5
family = "normal"
mean = 0.0
sd = 1.0

[[components]]
weight = 0.5
family = "normal"
mean = 3.0
sd = 1.0
"#;

#[test]
fn simulate_writes_tsv_and_json_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "study.toml", SMALL_CONFIG);
    let out_dir = dir.path().join("reports");
    let out = run(&[
        "simulate", "--config", &config, "--seed", "11",
        "--methods", "jel,jv", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("cli-smoke"), "stdout: {text}");
    assert!(text.contains("jel") && text.contains("jv"), "stdout: {text}");

    let tsv = std::fs::read_to_string(out_dir.join("cli-smoke.tsv")).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 3, "header + one row per method:\n{tsv}");
    assert!(lines[0].starts_with("scenario_id\tn\tmethod"));
    assert!(lines[1].contains("\tjel\t"));
    assert!(lines[2].contains("\tjv\t"));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("cli-smoke.json")).unwrap())
            .unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "simulate");
    let reports = doc["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert_eq!(r["replications"], 100);
        assert_eq!(r["batches"], 2);
        assert_eq!(r["n"], 30);
        assert_eq!(r["seed"], 11);
        let coverage = r["coverage"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&coverage));
        assert!(r["mean_length"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn simulate_is_byte_identical_given_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "study.toml", SMALL_CONFIG);
    let mut outputs = Vec::new();
    for run_dir in ["a", "b"] {
        let out_dir = dir.path().join(run_dir);
        let out = run(&[
            "simulate", "--config", &config, "--seed", "99",
            "--methods", "jv", "--out-dir", out_dir.to_str().unwrap(), "--json",
        ]);
        assert_success(&out);
        outputs.push((
            stdout(&out),
            std::fs::read(out_dir.join("cli-smoke.tsv")).unwrap(),
            std::fs::read(out_dir.join("cli-smoke.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "stdout differs between seeded runs");
    assert_eq!(outputs[0].1, outputs[1].1, "TSV differs between seeded runs");
    assert_eq!(outputs[0].2, outputs[1].2, "JSON differs between seeded runs");
}

#[test]
fn simulate_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "study.toml", SMALL_CONFIG);
    let out = run(&["simulate", "--config", &config]);
    assert_exit(&out, 2);
    let msg = stderr(&out);
    assert!(msg.contains("seed"), "stderr: {msg}");
}

#[test]
fn simulate_config_errors_carry_line_locations() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "typo.toml",
        "id = \"x\"\nn = 30\nreplicas = 5\nrho_true = 0.3\n",
    );
    let out = run(&["simulate", "--config", &config, "--seed", "1"]);
    assert_exit(&out, 2);
    let msg = stderr(&out);
    assert!(msg.contains("replicas"), "stderr: {msg}");
    assert!(msg.contains('3'), "no location in: {msg}");
}

#[test]
fn simulate_rejects_too_few_replications() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "study.toml", SMALL_CONFIG);
    let out = run(&["simulate", "--config", &config, "--seed", "1", "--replications", "50"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("100"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_unknown_bundled_config_lists_options() {
    let out = run(&["simulate", "--config", "nonexistent", "--seed", "1"]);
    assert_exit(&out, 2);
    let msg = stderr(&out);
    assert!(msg.contains("normal_location_k2"), "stderr: {msg}");
}

// ----------------------------------------------------------------- general

#[test]
fn unknown_method_is_a_usage_error() {
    let out = run(&["ci", "--data", "iris", "--method", "bogus"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("bogus"), "stderr: {}", stderr(&out));
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = run(&["estimate", "--data", "/no/such/file.csv"]);
    assert_exit(&out, 2);
}

#[test]
fn single_class_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    std::fs::write(&path, "x,group\n1.0,a\n2.0,a\n3.0,a\n").unwrap();
    let out = run(&["estimate", "--data", path.to_str().unwrap()]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("K >= 2 required"), "stderr: {}", stderr(&out));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    for sub in ["estimate", "ci", "oracle", "simulate"] {
        assert!(text.contains(sub), "help missing {sub}:\n{text}");
    }
}
