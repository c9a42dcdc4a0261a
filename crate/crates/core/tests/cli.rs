use std::path::Path;
use std::process::{Command, Output};

fn metap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metap")).args(args).current_dir(dir).output().unwrap()
}

fn csv_lines(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
    text.lines().map(str::to_owned).collect()
}

#[test]
fn seminorm_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = metap(
        &["seminorm", "--fn", "sin", "--family", "besicovitch", "--p", "2", "--a", "0.5", "--out", "s.csv", "--summary", "s.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = csv_lines(&dir.path().join("s.csv"));
    assert_eq!(lines[0], "t,value");
    assert_eq!(lines.len(), 13);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    let limit = summary["limit_estimate"].as_f64().unwrap();
    assert!((limit - 1.0).abs() < 1e-3, "{limit}");
}

#[test]
fn approx_reports_decreasing_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = metap(&["approx", "--fn", "corpus:semi-anti", "--ns", "1,4,16", "--metric", "sup", "--window", "0:50", "--out", "a.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = csv_lines(&dir.path().join("a.csv"));
    assert_eq!(lines[0], "index,error,bound");
    let errors: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(errors.len(), 3);
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn normality_lists_selected_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = metap(
        &["normality", "--fn", "sin", "--translates", "0:25.2:6.283185307179586", "--eps", "0.2", "--metric", "sup", "--window", "0:7", "--out", "n.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = csv_lines(&dir.path().join("n.csv"));
    assert_eq!(lines[0], "i,j,distance");
    assert_eq!(lines.len(), 1 + 5 * 5);
}

#[test]
fn unknown_corpus_entry_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = metap(&["verify", "nosuch"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nosuch"));
}

#[test]
fn malformed_flag_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(metap(&["seminorm", "--fn", "sin", "--family", "stepanov", "--window", "5:1"], dir.path()).status.code(), Some(2));
    assert_eq!(metap(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = metap(&["distance", "--fn", "sin", "--metric", "sup", "--out", "missing/dir/d.csv"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_passes_for_semi_anti() {
    let dir = tempfile::tempdir().unwrap();
    let out = metap(&["verify", "semi-anti", "--out", "v.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert!(csv_lines(&dir.path().join("v.csv")).len() > 1);
}

#[test]
fn config_out_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = metap(&["heat", "--fn", "sin", "--t0", "0.5", "--method", "analytic", "--points", "0:2:1", "--config-out", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("c.json")).unwrap();
    let back = metap::cli::RunConfig::from_canonical(&text).unwrap();
    assert_eq!(back.canonical().unwrap(), text);
}

#[test]
fn descriptor_json_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let json = metap::funcspace::descriptor_to_json(&metap::FunctionDescriptor::cos()).unwrap();
    std::fs::write(dir.path().join("f.json"), json).unwrap();
    let out = metap(&["distance", "--fn", "f.json", "--against", "cos", "--metric", "sup", "--window", "0:10"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["distance"]["value"].as_f64().unwrap() < 1e-12);
}
