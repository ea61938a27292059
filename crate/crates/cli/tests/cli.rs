use std::f64::consts::LN_2;
use std::path::Path;
use std::process::{Command, Output};

use ecsim::dump::StateDump;
use ecsim_core::purification::fidelity_recursion;
use ecsim_core::states::quasi_bell;
use ecsim_core::QuasiBell;

fn ecsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Header and data rows of a CSV with its leading comment line stripped.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn purify_default_run() {
    let o = ecsim(&["purify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# ecsim "));
    assert!(first.contains("experiment=purify"));
    assert!(first.contains("seed=none"));
    assert!(first.contains("config-sha256="));
    let (header, rows) = table(&text);
    assert_eq!(header[0], "round");
    assert_eq!(rows.len(), 4);
    let f: f64 = rows[3][column(&header, "fidelity_exact")].parse().unwrap();
    assert!((f - 0.999_847_607_436_757).abs() < 1e-10);
}

#[test]
fn monte_carlo_is_deterministic() {
    let args = ["purify", "--alpha", "1", "--iterations", "1", "--trials", "20000", "--seed", "11"];
    let a = ecsim(&args);
    let b = ecsim(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let mut other = args;
    other[8] = "12";
    assert_ne!(stdout(&a), stdout(&ecsim(&other)));
    let (header, rows) = table(&stdout(&a));
    assert_eq!(rows[1][column(&header, "mc_trials")], "20000");
    assert_eq!(rows[1][column(&header, "mc_within_4sigma")], "true");
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(ecsim(&["purify", "--trials", "10"]).status.code(), Some(2));
    assert_eq!(ecsim(&["purify", "--f0", "1.5"]).status.code(), Some(2));
    assert_eq!(ecsim(&["purify", "--scheme", "simple-p1", "--target", "phi-"]).status.code(), Some(2));
    assert_eq!(ecsim(&["entropy-scan", "--phis", "7"]).status.code(), Some(2));
    assert_eq!(ecsim(&["multimode", "--f0", "0.4"]).status.code(), Some(2));
    assert_eq!(ecsim(&["verify", "--alphas", "3"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("d.json");
    assert_eq!(ecsim(&["entropy-scan", "--dump", dump.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "f0 = 0.6\niterations = 3\nalpha = 1.5\n").unwrap();
    let o = ecsim(&["purify", "--config", cfg.to_str().unwrap(), "--iterations", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 2);
    let f: f64 = rows[1][column(&header, "fidelity_exact")].parse().unwrap();
    assert!((f - fidelity_recursion(0.6)).abs() < 1e-10);
    let a: f64 = rows[1][column(&header, "amplitude")].parse().unwrap();
    assert!((a - 1.5).abs() < 1e-12);

    std::fs::write(&cfg, "f0 = 0.6\nbogus = 1\n").unwrap();
    assert_eq!(ecsim(&["purify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_file_and_hash_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = ecsim(&["entropy-scan", "--alphas", "1", "--phi-steps", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let (header, rows) = table(&text);
    assert_eq!(header, ["alpha", "phi", "entropy", "entropy_product_form"]);
    assert_eq!(rows.len(), 4);
    let e: f64 = rows[2][2].parse().unwrap();
    assert!((e - 1.0).abs() < 1e-9);
    let same =
        ecsim(&["entropy-scan", "--alphas", "1", "--phis", "0,1.5707963267948966,3.141592653589793,4.71238898038469"]);
    assert_eq!(stdout(&same).lines().next(), text.lines().next());
}

#[test]
fn json_report_matches_csv() {
    let csv = stdout(&ecsim(&["decoherence", "--alphas", "1,2", "--gamma-taus", "0.2,1"]));
    let o = ecsim(&["decoherence", "--alphas", "1,2", "--gamma-taus", "0.2,1", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tool"], "ecsim");
    assert_eq!(v["experiment"], "decoherence");
    assert!(v["seed"].is_null());
    let hash = v["configSha256"].as_str().unwrap();
    assert!(csv.lines().next().unwrap().contains(&format!("config-sha256={hash}")));
    assert_eq!(v["config"]["gamma-taus"], serde_json::json!([0.2, 1.0]));
    assert!(v["config"].get("phis").is_none());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let f = r["f_tau"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&f));
        assert!((r["threshold"].as_f64().unwrap() - LN_2).abs() < 1e-8);
    }
}

fn read_dump(path: &Path) -> StateDump {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let o = ecsim(&["purify", "--iterations", "2", "--dump", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = table(&stdout(&o));
    let want: f64 = rows[2][column(&header, "fidelity_exact")].parse().unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.trim_start().starts_with("{\n  \"modeCount\""));
    let dump = read_dump(&path);
    assert_eq!(dump.mode_count, 2);
    let rho = dump.to_state().unwrap();
    let got = rho.fidelity(&quasi_bell(2.0, QuasiBell::PhiMinus).unwrap()).unwrap();
    assert!((got - want).abs() < 1e-12);
    assert_eq!(StateDump::from(&rho), dump);
}

#[test]
fn verify_passes_and_catches_the_swapped_convention() {
    let small = ["--random-states", "12", "--alphas", "0.5", "--gamma-taus", "0.1"];
    let ok = ecsim(&[&["verify"][..], &small].concat());
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let text = stdout(&ok);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");

    let bad = ecsim(&[&["verify", "--convention", "swapped"][..], &small].concat());
    assert_eq!(bad.status.code(), Some(3));
    let text = stdout(&bad);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL ")).collect();
    assert_eq!(failed.len(), 1, "{text}");
    assert!(failed[0].contains("beam splitter"));
}

#[test]
fn purify_with_verify_reports_checks() {
    let o = ecsim(&["purify", "--alpha", "1", "--iterations", "1", "--verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.lines().any(|l| l.starts_with("PASS comparison stage")), "{err}");
    assert!(err.lines().any(|l| l.starts_with("PASS parity stage")), "{err}");
}

#[test]
fn multimode_first_round() {
    let o = ecsim(&["multimode", "--f0", "0.7", "--iterations", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = table(&stdout(&o));
    let f: f64 = rows.last().unwrap()[column(&header, "fidelity_exact")].parse().unwrap();
    assert!((f - 0.49 / 0.58).abs() < 1e-9);
}
