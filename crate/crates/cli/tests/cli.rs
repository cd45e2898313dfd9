use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bose2d() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bose2d"));
    c.env_remove("BOSE2D_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bose2d().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = run(&["energy", "--a", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("--N"), "{err}");
    assert!(err.contains("Usage: bose2d energy"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn validation_and_numerical_failures_have_distinct_codes() {
    assert_eq!(run(&["diag", "--F", "1", "--G", "2"]).status.code(), Some(1));
    assert_eq!(run(&["diag", "--F", "-1", "--G", "0"]).status.code(), Some(1));
    assert_eq!(run(&["energy", "--N", "10", "--a", "0.1", "--form", "bogus"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["ed", "--pairs", "1,0.5;oops"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(1));
    // the Fock space for this request is far beyond the nonzero budget
    let out = run(&["ed", "--pairs", "1,0.5;1,0.5;1,0.5;1,0.5", "--nmax", "200"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn no_subcommand_prints_usage() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn flags_override_config_and_config_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", r#"{"subcommand": "energy", "N": 8, "a": 0.1}"#);

    let from_config = json(&run(&["--config", &cfg, "energy", "--json"]));
    assert_eq!(from_config["n"], 8);
    assert_eq!(from_config["form"], "eN");

    let flagged = json(&run(&["--config", &cfg, "energy", "--N", "12", "--json"]));
    assert_eq!(flagged["n"], 12);
    assert_eq!(flagged["a"].as_f64(), Some(0.1));

    // the subcommand may come from the config alone
    let out = run(&["--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("E = "));
}

#[test]
fn config_rejects_unknown_keys_and_mismatched_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"N": 8, "a": 0.1, "colour": "blue"}"#);
    let out = run(&["--config", &bad, "energy"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));

    let other = write(dir.path(), "other.json", r#"{"subcommand": "spectrum", "zeta": 10}"#);
    assert_eq!(run(&["--config", &other, "diag", "--F", "2", "--G", "1"]).status.code(), Some(1));

    let broken = write(dir.path(), "broken.json", "{ N: 8");
    assert_eq!(run(&["--config", &broken, "energy"]).status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["coeffs", "--N", "10"];
    let one = bose2d().args(args).args(["--threads", "1"]).output().unwrap();
    let four = bose2d().args(args).env("BOSE2D_THREADS", "4").output().unwrap();
    let auto = run(&args);
    assert!(one.status.success() && four.status.success() && auto.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);

    let bad = bose2d().args(args).env("BOSE2D_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("BOSE2D_THREADS"));
    // the flag wins over the environment
    let flagged = bose2d().args(args).args(["--threads", "2"]).env("BOSE2D_THREADS", "many").output().unwrap();
    assert!(flagged.status.success());
}

#[test]
fn energy_report_schema() {
    let v = json(&run(&["energy", "--N", "10", "--a", "0.1", "--json"]));
    for key in ["E", "S_bog", "j0_sum", "tail_bound", "cutoffs"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    for sum in ["S_bog", "j0_sum"] {
        for key in ["value", "cutoff", "tail_bound", "strategy"] {
            assert!(v[sum].get(key).is_some(), "missing {sum}.{key}");
        }
    }
    let e = v["E"].as_f64().unwrap();
    let remark = json(&run(&["energy", "--N", "10", "--a", "0.1", "--form", "remark4", "--json"]));
    let diff = (remark["E"].as_f64().unwrap() - e).abs();
    assert!(diff <= v["tail_bound"].as_f64().unwrap() + remark["tail_bound"].as_f64().unwrap());

    let r = json(&run(&["energy", "--N", "10", "--a", "0.1", "--R", "100", "--json"]));
    assert!(r["E"].as_f64().unwrap().is_finite());
    assert!(r.get("cutoffs").is_some() && r.get("tail_bound").is_some());

    let text = run(&["energy", "--N", "10", "--a", "0.1"]);
    let line = String::from_utf8(text.stdout).unwrap();
    assert!(line.starts_with("E = ") && line.contains("tail bound"), "{line}");
    let shown: f64 = line[4..].split_whitespace().next().unwrap().parse().unwrap();
    assert_eq!(shown, e);
}

#[test]
fn sums_report_value_cutoff_and_tail() {
    for args in [
        vec!["sums", "--sum", "sbog", "--cutoff", "600"],
        vec!["sums", "--sum", "j0", "--ell", "0.1"],
        vec!["sums", "--sum", "i-ell", "--ell", "0.1", "--a", "0.1"],
    ] {
        let v = json(&run(&args));
        assert!(v["value"].as_f64().unwrap().is_finite(), "{args:?}");
        assert!(v["tail_bound"].as_f64().unwrap() >= 0.0, "{args:?}");
        // I_ℓ carries the cutoff of its J0 sum
        let cutoff = v.get("cutoff").or_else(|| v["j0_sum"].get("cutoff"));
        assert!(cutoff.and_then(Value::as_f64).is_some(), "{args:?}");
    }
}

#[test]
fn diag_agrees_with_the_library_bit_for_bit() {
    let v = json(&run(&["diag", "--F", "2", "--G", "-1.5"]));
    let d = bose2d::bogoliubov::pair_frequency(2.0, -1.5).unwrap();
    assert_eq!(v["frequency"].as_f64(), Some(d));
    assert_eq!(v["shift"].as_f64(), Some(d - 2.0));
    assert!(v["reconstruction_error"].as_f64().unwrap() < 1e-14);
}

#[test]
fn spectrum_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("levels.csv");
    let zeta = 3.0 * bose2d::bogoliubov::dispersion(4.0 * std::f64::consts::PI.powi(2), 1.0);
    let out = run(&["spectrum", "--zeta", &zeta.to_string(), "--csv", csv.to_str().unwrap()]);
    let v = json(&out);
    assert_eq!(v["tail_bound"].as_f64(), Some(0.0));
    let mut r = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["value", "degeneracy", "occupation_labels"]);
    let deg: Vec<usize> = r.records().map(|x| x.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(deg, [1, 4, 4, 10, 16, 20]);
}

#[test]
fn coefficient_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let summary = dir.path().join("summary.json");
    let out = run(&["coeffs", "--N", "8", "--csv", csv.to_str().unwrap(), "--out", summary.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
    assert_eq!(v["N"], 8);
    let mut r = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["m", "p_sq", "multiplicity", "eta", "omega_hat", "F", "G", "tau", "upsilon", "alpha"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len() as u64, v["shells"].as_u64().unwrap());
    for row in &rows {
        let p_sq: f64 = row[1].parse().unwrap();
        let f: f64 = row[5].parse().unwrap();
        let g: f64 = row[6].parse().unwrap();
        assert!(0.5 * p_sq <= f && g.abs() < f);
    }

    // the table feeds the ED driver
    let ed = json(&run(&["ed", "--from-table", csv.to_str().unwrap(), "--shells", "1", "--nmax", "20"]));
    assert!(ed["max_deviation"].as_f64().unwrap() < 1e-6, "{ed}");
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = run(&["scatter", "--radius", "1000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let re = |tok: &str| {
        let t = tok.trim_matches(|c: char| c == ',' || c == '"');
        let (mant, exp) = t.split_once('e')?;
        let digits: String = mant.trim_start_matches('-').chars().filter(|c| c.is_ascii_digit()).collect();
        exp.parse::<i32>().ok()?;
        Some(digits.len())
    };
    let mut floats = 0;
    for tok in text.split_whitespace() {
        if tok.contains('.') && !tok.contains('=') {
            assert_eq!(re(tok), Some(17), "{tok}");
            floats += 1;
        }
    }
    assert!(floats > 5);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["scatter", "--sweep", "100:10000:3"],
        vec!["ed", "--pairs", "2,1;1.5,-0.5", "--nmax", "10", "--lanczos", "--seed", "7"],
        vec!["ed", "--gp-n", "10", "--nmax", "20"],
        vec!["verify", "--suite", "sums"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn verify_suite_reports_checks() {
    let v = json(&run(&["verify", "--suite", "ed"]));
    assert_eq!(v["passed"], true);
    let checks = v["suites"][0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "ed_single_pair"));
    assert!(checks.iter().all(|c| c["passed"] == true));
}
