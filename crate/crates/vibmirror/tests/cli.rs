//! End-to-end checks of the command-line binary: exit codes, config-file
//! layering, and artifact shape.

use std::path::Path;
use std::process::{Command, Output};

fn vibmirror(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vibmirror"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn unknown_config_key_exits_2_with_the_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.ini");
    std::fs::write(
        &config,
        "[experiment]\ndrop_height_m = 3.6e-3\nheight = 1\n",
    )
    .unwrap();
    let output = vibmirror(
        dir.path(),
        &["--config", config.to_str().unwrap(), "weights"],
    );
    assert_eq!(output.status.code(), Some(2));
    let message = stderr(&output);
    assert!(message.contains("line 3"), "stderr was: {message}");
    assert!(message.contains("height"), "stderr was: {message}");
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let output = vibmirror(dir.path(), &["weights", "--frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unphysical_barrier_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let output = vibmirror(dir.path(), &["weights", "--u0-over-e", "0.5"]);
    assert_eq!(output.status.code(), Some(1), "stderr: {}", stderr(&output));
    assert!(!stderr(&output).is_empty());
}

#[test]
fn config_file_overrides_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let preset_only = dir.path().join("preset");
    let overridden = dir.path().join("override");
    let config = dir.path().join("run.ini");
    std::fs::write(&config, "[experiment]\ndetuning_swing_hz = 163e6\n").unwrap();

    let out = vibmirror(preset_only.as_path(), &["--preset", "a", "weights"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let out = vibmirror(
        overridden.as_path(),
        &[
            "--preset",
            "a",
            "--config",
            config.to_str().unwrap(),
            "weights",
        ],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let a = std::fs::read(preset_only.join("weights.csv")).unwrap();
    let with_override = std::fs::read(overridden.join("weights.csv")).unwrap();
    assert_ne!(a, with_override);

    // the override reproduces preset b, which differs from a only in the swing
    let as_b = vibmirror(preset_only.as_path(), &["--preset", "b", "weights"]);
    assert!(as_b.status.success());
    let b = std::fs::read(preset_only.join("weights.csv")).unwrap();
    assert_eq!(with_override, b);
}

#[test]
fn flag_overrides_beat_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.ini");
    std::fs::write(&config, "[experiment]\ndetuning_swing_hz = 130e6\n").unwrap();
    let out = vibmirror(
        dir.path(),
        &[
            "--config",
            config.to_str().unwrap(),
            "weights",
            "--detuning-swing-hz",
            "163e6",
        ],
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let flag_wins = std::fs::read(dir.path().join("weights.csv")).unwrap();

    let b_dir = dir.path().join("b");
    let out = vibmirror(b_dir.as_path(), &["--preset", "b", "weights"]);
    assert!(out.status.success());
    let b = std::fs::read(b_dir.join("weights.csv")).unwrap();
    assert_eq!(flag_wins, b);
}

#[test]
fn artifacts_carry_units_in_their_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = vibmirror(dir.path(), &["--preset", "a", "positions"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("positions.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for column in ["order", "v_n [m/s]", "k_n [1/m]", "rel_position [um]"] {
        assert!(header.contains(column), "header was: {header}");
    }
}

#[test]
fn report_without_the_slow_section_covers_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let out = vibmirror(dir.path(), &["--preset", "c", "report", "--skip-oracle"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let report = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    for section in [
        "## Parameters",
        "## Detection positions",
        "## Sideband weights",
        "## Drive-depth sweep",
        "## First-principles comparison",
    ] {
        assert!(report.contains(section), "missing {section}");
    }
    assert!(report.contains("Skipped on request."));
}
