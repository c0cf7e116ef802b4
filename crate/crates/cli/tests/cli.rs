//! End-to-end tests that spawn the built binary.

use std::io::Write;
use std::process::{Command, Output};

fn dyncoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyncoh"))
        .args(args)
        .output()
        .expect("spawn dyncoh")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn json_out(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("json stdout")
}

#[test]
fn lr_of_identity_is_one() {
    let out = dyncoh(&["lr", "--channel", "identity:2", "--out", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_out(&out);
    assert_eq!(v["command"], "lr");
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["gap"].as_f64().unwrap() <= 1e-7);
    assert!(v["time_ms"].is_u64());
    assert!(v.get("witness").is_none());
}

#[test]
fn distill_perfect_qubit_gives_one_bit() {
    let out = dyncoh(&[
        "distill",
        "--channel",
        "depolarizing:1.0:2",
        "--eps",
        "0",
        "--set",
        "misc",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("value 1.0"), "{text}");
    assert!(text.contains("n 2"), "{text}");
}

#[test]
fn convert_classical_to_itself_is_free() {
    let out = dyncoh(&[
        "convert",
        "--channel",
        "dephasing:2",
        "--channel2",
        "dephasing:2",
        "--set",
        "disc",
        "--out",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_out(&out);
    assert!(v["value"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn witness_appears_only_on_request() {
    let plain = dyncoh(&["lr", "--channel", "identity:2", "--out", "json"]);
    assert!(json_out(&plain).get("witness").is_none());
    let with = dyncoh(&["lr", "--channel", "identity:2", "--out", "json", "--witness"]);
    let v = json_out(&with);
    let w = v.get("witness").expect("witness requested");
    assert!(w.get("omega").is_some() && w.get("eta").is_some());
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    for args in [
        vec!["lr", "--channel", "teleport:2"],
        vec!["lr", "--channel", "depolarizing:1.5:2"],
        vec!["distill", "--channel", "identity:2", "--eps", "1.0", "--set", "misc"],
        vec!["smooth-lr", "--channel", "identity:2", "--eps", "-0.2"],
    ] {
        let out = dyncoh(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.trim().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn missing_required_flag_exits_two() {
    let out = dyncoh(&["convert", "--channel", "identity:2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_is_a_usage_error() {
    let out = dyncoh(&["dmax", "--channel", "identity:2", "--channel2", "identity:3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
}

#[test]
fn channel_files_feed_the_same_pipeline() {
    let dir = tempfile::tempdir().unwrap();

    let choi_path = dir.path().join("dep.json");
    let c = dyncoh_core::ChannelChoi::depolarizing(0.5, 2).unwrap();
    let mut f = std::fs::File::create(&choi_path).unwrap();
    write!(f, "{}", dyncoh_core::channel_to_value(&c)).unwrap();
    let from_file = dyncoh(&[
        "lr",
        "--channel",
        &format!("choi-file:{}", choi_path.display()),
        "--out",
        "json",
    ]);
    assert!(from_file.status.success());
    let inline = dyncoh(&["lr", "--channel", "depolarizing:0.5:2", "--out", "json"]);
    let a = json_out(&from_file)["value"].as_f64().unwrap();
    let b = json_out(&inline)["value"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9);

    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, r#"{"type": "identity", "d": 2, "spin": 1}"#).unwrap();
    let bad = dyncoh(&["lr", "--channel", &format!("choi-file:{}", bad_path.display())]);
    assert_eq!(bad.status.code(), Some(2));

    // A recipe file is not an explicit choi file.
    let recipe_path = dir.path().join("recipe.json");
    std::fs::write(&recipe_path, r#"{"type": "identity", "d": 2}"#).unwrap();
    let mismatched = dyncoh(&[
        "lr",
        "--channel",
        &format!("choi-file:{}", recipe_path.display()),
    ]);
    assert_eq!(mismatched.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let strip = |s: String| -> String {
        s.lines()
            .filter(|l| !l.starts_with("time_ms"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = dyncoh(&["lr", "--channel", "replace-plus:2"]);
    let b = dyncoh(&["lr", "--channel", "replace-plus:2"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(strip(stdout(&a)), strip(stdout(&b)));
}

#[test]
fn reproduce_remarks_passes_in_all_formats() {
    let table = dyncoh(&["reproduce", "remarks"]);
    assert!(table.status.success(), "{}", String::from_utf8_lossy(&table.stderr));
    let text = stdout(&table);
    assert!(text.contains("PASS (6 rows)"), "{text}");

    let json = dyncoh(&["reproduce", "remarks", "--out", "json"]);
    assert!(json.status.success());
    let v = json_out(&json);
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert_eq!(row["pass"], true, "{row}");
    }
    let id_row = rows
        .iter()
        .find(|r| r["row"] == "lr identity:2")
        .expect("identity row");
    assert!((id_row["computed"].as_f64().unwrap() - 1.0).abs() < 1e-5);

    let csv = dyncoh(&["reproduce", "remarks", "--out", "csv"]);
    assert!(csv.status.success());
    let text = stdout(&csv);
    assert!(text.lines().nth(1).unwrap().starts_with("row,set,computed"));
    assert!(text.contains("# PASS (6 rows)"), "{text}");
}

#[test]
fn smooth_lr_interpolates_below_plain_lr() {
    let smoothed = dyncoh(&[
        "smooth-lr",
        "--channel",
        "identity:2",
        "--eps",
        "0.1",
        "--out",
        "json",
    ]);
    assert!(smoothed.status.success());
    let v = json_out(&smoothed)["value"].as_f64().unwrap();
    assert!((v - 1.8f64.log2()).abs() < 1e-4, "smoothed value {v}");
}

#[test]
fn classify_and_cost_report_details() {
    let out = dyncoh(&["classify", "--channel", "dephasing:3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("classical yes"));

    let out = dyncoh(&["classify", "--channel", "identity:3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("classical no"));

    let out = dyncoh(&["cost", "--channel", "identity:3", "--set", "misc", "--out", "json"]);
    assert!(out.status.success());
    let v = json_out(&out);
    assert!((v["value"].as_f64().unwrap() - 3.0f64.log2()).abs() < 1e-6);
    assert_eq!(v["inputs"]["m"], "3");
}
