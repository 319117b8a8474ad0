use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ddkit::pulseshape::PulseShape;
use ddkit::sequences::{udd_times, Schedule};
use tempfile::TempDir;

fn ddkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddkit")).args(args).env_remove("DDKIT_CONFIG").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fits_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn udd_sequence_on_stdout() {
    let out = ddkit(&["sequence", "--scheme", "udd", "--orders", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let s = Schedule::from_json(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap();
    let times: Vec<f64> = s.events.iter().map(|e| e.t).collect();
    assert_eq!(times, udd_times(3));
    assert_eq!(s.intervals, 4);
    assert!(stderr(&out).contains("4 intervals"));
}

#[test]
fn sequence_to_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("cdd.json");
    let out = ddkit(&["sequence", "--scheme", "cdd", "--orders", "2", "--out", path_str(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let s = Schedule::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(s.intervals, 16);
}

#[test]
fn odd_inner_nudd_needs_opt_in() {
    let out = ddkit(&["sequence", "--scheme", "nudd", "--orders", "1,2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("odd order 1"), "{}", stderr(&out));

    let out = ddkit(&["sequence", "--scheme", "nudd", "--orders", "1,2", "--allow-odd-inner"]);
    assert_eq!(code(&out), 0);
    let s = Schedule::from_json(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap();
    let times: Vec<f64> = s.events.iter().map(|e| e.t).collect();
    let expected = [0.125, 0.25, 0.5, 0.75, 0.875];
    assert_eq!(times.len(), expected.len());
    for (t, e) in times.iter().zip(expected) {
        assert!((t - e).abs() < 1e-12, "{times:?}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&ddkit(&["sequence", "--scheme", "udd", "--orders", "2", "--bogus"])), 1);
    assert_eq!(code(&ddkit(&["sequence", "--scheme", "wobble"])), 1);
    assert_eq!(code(&ddkit(&["sequence", "--orders", "2"])), 1);
    assert_eq!(code(&ddkit(&["sequence", "--scheme", "udd", "--orders", "2,3"])), 1);
    assert_eq!(code(&ddkit(&["frobnicate"])), 1);
    assert_eq!(code(&ddkit(&["--help"])), 0);
}

#[test]
fn udd_scan_rows_and_fits() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("udd.csv");
    let args = ["scan", "--scheme", "udd", "--orders", "2", "--targets", "Z1", "--out", path_str(&csv_path)];
    let out = ddkit(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["scheme", "orders", "operator", "T", "seed", "error"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12 * 8);
    assert!(rows.iter().all(|r| &r[0] == "udd" && &r[1] == "2" && &r[2] == "Z1"));

    let fits = fits_json(&dir.path().join("udd.fits.json"));
    let list = fits["fits"].as_array().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["status"], "fitted");
    let slope = list[0]["slope"].as_f64().unwrap();
    assert!((2.7..=3.3).contains(&slope), "{slope}");

    // A rerun on one thread is byte-identical.
    let first = fs::read(&csv_path).unwrap();
    let out = ddkit(&[&["--threads", "1"], &args[..]].concat());
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&csv_path).unwrap(), first);
}

#[test]
fn free_evolution_fit_depends_on_grid() {
    let dir = TempDir::new().unwrap();
    let sched = dir.path().join("free.json");
    fs::write(&sched, Schedule::free().to_json()).unwrap();
    let csv_path = dir.path().join("free.csv");
    let base = ["scan", "--schedule", path_str(&sched), "--targets", "Z1", "--out", path_str(&csv_path)];

    let out = ddkit(&base);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("unfittable"));

    let out = ddkit(&[&base[..], &["--t-min", "1e-5", "--t-max", "5e-3"]].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let fits = fits_json(&dir.path().join("free.fits.json"));
    let slope = fits["fits"][0]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
}

#[test]
fn config_file_and_env() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"seed": [1, 2]}"#).unwrap();
    let out = ddkit(&["--config", path_str(&bad), "sequence", "--scheme", "udd", "--orders", "1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown field"), "{}", stderr(&out));

    let good = dir.path().join("small.json");
    fs::write(&good, r#"{"seeds": [4, 9], "t_points": 5}"#).unwrap();
    let csv_path = dir.path().join("env.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_ddkit"))
        .args(["scan", "--scheme", "first_order", "--out", path_str(&csv_path)])
        .env("DDKIT_CONFIG", &good)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows: Vec<csv::StringRecord> =
        csv::Reader::from_path(&csv_path).unwrap().records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 5 * 2);
    assert!(rows.iter().all(|r| &r[4] == "4" || &r[4] == "9"));
}

#[test]
fn model_dimension_must_match() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("x.csv");
    let out = ddkit(&[
        "scan",
        "--scheme",
        "first_order",
        "--moos",
        "qubit_full:2",
        "--model",
        "general:2x4",
        "--out",
        path_str(&csv_path),
    ]);
    assert_eq!(code(&out), 2);
    let out = ddkit(&["scan", "--scheme", "first_order", "--model", "general", "--out", path_str(&csv_path)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn moos_document_round_trip_and_rejection() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m6.json");
    let out = ddkit(&["moos", "mlevel_full:6", "--closure", "--out", path_str(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("Lie closure dimension"));
    let again = ddkit(&["moos", path_str(&path)]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));

    // X and (X + Y)/sqrt(2) neither commute nor anticommute.
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let doc = serde_json::json!({
        "dim": 2,
        "elements": [
            {"label": "X", "re": [0.0, 1.0, 1.0, 0.0], "im": [0.0, 0.0, 0.0, 0.0]},
            {"label": "R", "re": [0.0, r, r, 0.0], "im": [0.0, -r, r, 0.0]}
        ]
    });
    let bad = dir.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let out = ddkit(&["moos", path_str(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("neither commutes nor anticommutes"), "{}", stderr(&out));
}

#[test]
fn pulse_design_and_scan() {
    let dir = TempDir::new().unwrap();
    let pulse = dir.path().join("sym3.json");
    let out = ddkit(&["pulse", "design", "--family", "sym3", "--out", path_str(&pulse)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let shape = PulseShape::from_json(&fs::read_to_string(&pulse).unwrap()).unwrap();
    assert_eq!(shape.segments.len(), 3);

    let csv_path = dir.path().join("pulse.csv");
    let out = ddkit(&["pulse", "scan", "--pulse", path_str(&pulse), "--seeds", "3", "--out", path_str(&csv_path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows: Vec<csv::StringRecord> =
        csv::Reader::from_path(&csv_path).unwrap().records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12 * 3);
    let slope = fits_json(&dir.path().join("pulse.fits.json"))["fits"][0]["slope"].as_f64().unwrap();
    assert!((1.8..=2.3).contains(&slope), "{slope}");

    let out = ddkit(&["pulse", "design", "--family", "rect"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("free parameters"));
    assert_eq!(code(&ddkit(&["pulse", "design", "--family", "wobble"])), 2);
}

#[test]
fn accept_exit_code_counts_failures() {
    let out = ddkit(&["accept"]);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let failures = text.lines().filter(|l| l.starts_with("[FAIL]")).count();
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 10, "{text}");
    assert_eq!(code(&out), failures as i32, "{text}");
}
