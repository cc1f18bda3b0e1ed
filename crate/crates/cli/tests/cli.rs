use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const PERIODIC_30: &str = r#"
schema_version = 1
horizon_slotframes = 100000

[traffic]
kind = "periodic"
period_s = 30.0

[strategy]
kind = "periodic_ls"
"#;

const LOSSY_EXTENDED: &str = r#"
schema_version = 1
horizon_slotframes = 20000

[traffic]
kind = "quasi_periodic"
period_s = 120.0
deadline_s = 30.0
jitter = 0.2

[strategy]
kind = "extended_periodic_ls"

[channel]
data_loss = 0.1
ack_loss = 0.05
seed = 3
"#;

fn tsch_ls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsch-ls"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn metric(csv: &str, key: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no {key} in\n{csv}"))
        .parse()
        .unwrap()
}

#[test]
fn table1_passes_and_prints_csv() {
    let out = tsch_ls(&["table1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 15);
    assert!(text.contains("30,-,TSCH,-,-,2.02,8.8667,73.3168"));
    assert!(text.contains("600,-,Basic (slow),296,-,129.28,1.0333,1.2733"));
}

#[test]
fn compare_reports_small_error() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "p30.toml", PERIODIC_30);
    let out = tsch_ls(&["run", &path, "--compare"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(metric(&text, "rel_err_tx") <= 0.01);
    assert!(metric(&text, "rel_err_rx") <= 0.01);
    assert_eq!(metric(&text, "p_rx_analytic_uw"), 13.6468);
}

#[test]
fn misspelled_key_is_named_and_exits_one() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "bad.toml",
        &PERIODIC_30.replace("period_s", "perod_s"),
    );
    let out = tsch_ls(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("perod_s"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn missing_file_exits_one() {
    let out = tsch_ls(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fixed_seed_gives_identical_csv_and_trace() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "lossy.toml", LOSSY_EXTENDED);
    let runs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|i| {
            let trace = dir.path().join(format!("trace{i}.jsonl"));
            let out = tsch_ls(&["run", &path, "--trace", trace.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0));
            (out.stdout, std::fs::read(&trace).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(!runs[0].1.is_empty());
    let first = String::from_utf8_lossy(&runs[0].1);
    assert!(first.lines().next().unwrap().starts_with(r#"{"slot":"#));

    let other = tsch_ls(&["run", &path, "--seed", "4"]);
    assert_ne!(other.stdout, runs[0].0);
}

#[test]
fn baseline_is_opt_in() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "p30.toml", &PERIODIC_30.replace("100000", "2000"));
    let plain = String::from_utf8(tsch_ls(&["run", &path]).stdout).unwrap();
    let with = String::from_utf8(tsch_ls(&["run", &path, "--include-baseline"]).stdout).unwrap();
    let delta = metric(&with, "p_tx_uw") - metric(&plain, "p_tx_uw");
    assert!((delta - 31_400.0).abs() < 1e-3, "{delta}");
    assert!(!plain.contains("baseline_uw"));
}

#[test]
fn sweep_outputs_rows_in_input_order() {
    let dir = TempDir::new().unwrap();
    let base = r#"
schema_version = 1
horizon_slotframes = 3000
[traffic]
kind = "periodic"
period_s = 600.0
deadline_s = 30.0
[strategy]
kind = "extended_periodic_ls"
"#;
    let path = write(&dir, "x600.toml", base);
    let out = tsch_ls(&[
        "sweep",
        &path,
        "--param",
        "deadline_s",
        "--values",
        "10,30,120",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let p_rx: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap())
        .collect();
    assert_eq!(p_rx, ["17.5177", "5.3277", "1.6477"]);

    let empty = tsch_ls(&["sweep", &path, "--param", "data_loss", "--values", ""]);
    assert_eq!(String::from_utf8(empty.stdout).unwrap().lines().count(), 1);

    let unknown = tsch_ls(&["sweep", &path, "--param", "slots", "--values", "1"]);
    assert_ne!(unknown.status.code(), Some(0));
}

#[test]
fn scenario_path_is_reported_on_schema_errors() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "noversion.toml",
        &PERIODIC_30.replace("schema_version = 1", ""),
    );
    let out = tsch_ls(&["run", &path]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains(Path::new(&path).file_name().unwrap().to_str().unwrap()),
        "{err}"
    );
    assert!(err.contains("schema_version"), "{err}");
}
