//! End-to-end tests of the `causalbox` binary: exit codes, report files and
//! deterministic rendering.

use std::path::PathBuf;
use std::process::{Command, Output};

fn causalbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causalbox"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    causalbox(args).status.code().expect("exited normally")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("causalbox-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn presets_satisfy_the_constraints() {
    for preset in [
        "bell_standard",
        "jamming_triangle",
        "four_party",
        "compass",
        "six_config",
        "black_hole",
    ] {
        assert_eq!(code(&["check", "--scenario", preset]), 0, "{preset}");
    }
}

#[test]
fn violations_exit_with_one() {
    assert_eq!(code(&["case-study", "loop", "--layout", "degenerate"]), 1);
    assert_eq!(code(&["case-study", "loop", "--layout", "fig5"]), 0);
    assert_eq!(code(&["case-study", "compass", "--lambda", "1/2", "--mu", "1/2"]), 1);
    assert_eq!(
        code(&[
            "case-study",
            "compass",
            "--lambda",
            "1/2",
            "--mu",
            "1/2",
            "--ablate",
            "4"
        ]),
        0
    );
    assert_eq!(code(&["protocol", "--scenario", "degenerate_loop"]), 1);
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(code(&["simulate", "--scenario", "degenerate_loop"]), 3);
    assert_eq!(code(&["no-such-command"]), 3);
    assert_eq!(code(&["check", "--scenario", "no_such_preset"]), 3);
    assert_eq!(code(&["monogamy", "--game", "chsh", "--theory", "quantum"]), 3);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn malformed_json_reports_its_position() {
    let dir = scratch("json");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\n  \"preset\": \"bell_standard\",\n  oops\n}\n").unwrap();
    let out = causalbox(&["check", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn monogamy_report_is_written_to_out() {
    let dir = scratch("monogamy");
    let out = causalbox(&[
        "monogamy",
        "--game",
        "chsh",
        "--theory",
        "ns",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("monogamy.json")).unwrap()).unwrap();
    assert_eq!(stdout, file);
    assert_eq!(file["value"], "3/2");
}

#[test]
fn scenario_files_round_trip_through_check() {
    let dir = scratch("scenario");
    let path = dir.join("pr.json");
    std::fs::write(&path, r#"{ "preset": "bell_standard", "canonical": "pr_box" }"#).unwrap();
    let out = causalbox(&["check", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["violations"].as_array().map(Vec::len), Some(0));
}

#[test]
fn renders_are_deterministic() {
    for args in [
        &["render", "--scenario", "bell_standard"][..],
        &["render", "--scenario", "black_hole"],
        &["render", "--scenario", "njam(4, 7/10)"],
    ] {
        let a = causalbox(args);
        let b = causalbox(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert!(a.stdout.starts_with(b"<svg") || String::from_utf8_lossy(&a.stdout).contains("<svg"));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
