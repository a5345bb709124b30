//! End-to-end command line behavior: exit codes, report determinism, config
//! round-trips, and the shipped example configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_fockalg")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> String {
    configs_dir().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn missing_config_file_is_a_validation_error() {
    let out = run(&["basis", "--config", "/nonexistent/model.toml"]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "[basis\nstatistics = ").expect("write");
    let out = run(&["basis", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn unknown_verify_suite_is_a_validation_error() {
    let out = run(&["verify", "no_such_suite"]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_suite"));
}

#[test]
fn unknown_flag_is_a_validation_error() {
    let out = run(&["basis", "--config", &config("free-field.toml"), "--bogus"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn command_without_its_analysis_section_is_a_validation_error() {
    // free-field.toml configures no trotter schedule.
    let out = run(&["trotter", "--config", &config("free-field.toml")]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("analysis.trotter"));
}

#[test]
fn verify_subset_runs_only_the_selected_suites() {
    let out = run(&["verify", "ccr", "gram", "--seed", "3"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS ccr."));
    assert!(text.contains("PASS gram."));
    assert!(!text.contains("morphism."));
}

#[test]
fn under_resolved_threshold_scan_is_a_property_failure() {
    // A window narrower than the grid step around one lattice point: the
    // scan provably cannot flag the threshold at 2, so the layered
    // comparison must fail and the process must distinguish that from a
    // validation error.
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("under-resolved.toml");
    std::fs::write(
        &path,
        r#"
[basis]
statistics = "boson"
d = 2
n_max = 3

[one_particle]
h = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]]]

[interaction]
kind = "none"

[conjugate]
a = [[[0.0, 0.0], [0.0, -0.5]], [[0.0, 0.5], [0.0, 0.0]]]

[analysis.mourre]
epsilon = 0.02
delta = 1e-8

[analysis.mourre.grid]
lo = 0.5
hi = 2.6
points = 31
"#,
    )
    .expect("write");
    let out = run(&["mourre", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn shipped_configs_round_trip_through_the_parser() {
    for name in [
        "free-field.toml",
        "cutoff-polynomial.toml",
        "pauli-fierz.toml",
        "fibered-family.toml",
    ] {
        let text = std::fs::read_to_string(configs_dir().join(name)).expect("config readable");
        let first = fockalg_cli::config::parse_config(&text).expect("parses");
        let canonical = fockalg_cli::config::serialize_config(&first).expect("serializes");
        let second = fockalg_cli::config::parse_config(&canonical).expect("reparses");
        let canonical_again = fockalg_cli::config::serialize_config(&second).expect("serializes");
        assert_eq!(canonical, canonical_again, "{name} round-trips");
        second.build().expect("builds");
    }
}

#[test]
fn shipped_configs_run_their_commands() {
    let matrix: &[(&str, &[&str])] = &[
        ("free-field.toml", &["basis", "spectrum", "ess", "mourre"]),
        ("cutoff-polynomial.toml", &["ess", "trotter"]),
        ("pauli-fierz.toml", &["spectrum", "ess", "trotter"]),
        ("fibered-family.toml", &["ess"]),
    ];
    for (name, commands) in matrix {
        for command in *commands {
            let out = run(&[command, "--config", &config(name)]);
            assert_eq!(
                exit_code(&out),
                0,
                "{command} on {name}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
}

#[test]
fn free_field_report_shows_the_exact_gap() {
    let out = run(&["spectrum", "--config", &config("free-field.toml")]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("gap_to_essential = 1.0000000000000000e0"));
}

#[test]
fn reports_are_identical_across_runs_and_out_matches_stdout() {
    let dir_a = tempfile::tempdir().expect("tempdir");
    let dir_b = tempfile::tempdir().expect("tempdir");
    let first = run(&[
        "mourre",
        "--config",
        &config("free-field.toml"),
        "--out",
        dir_a.path().to_str().unwrap(),
    ]);
    let second = run(&[
        "mourre",
        "--config",
        &config("free-field.toml"),
        "--out",
        dir_b.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(exit_code(&second), 0);
    assert_eq!(first.stdout, second.stdout);
    let file_a = std::fs::read(dir_a.path().join("report-mourre.txt")).expect("report written");
    let file_b = std::fs::read(dir_b.path().join("report-mourre.txt")).expect("report written");
    assert_eq!(file_a, file_b);
    assert_eq!(first.stdout, file_a);
}

#[test]
fn worker_count_does_not_change_the_report() {
    for (cfg, cmd) in [
        ("fibered-family.toml", "ess"),
        ("free-field.toml", "mourre"),
    ] {
        let serial = run(&[cmd, "--config", &config(cfg), "--jobs", "1"]);
        let parallel = run(&[cmd, "--config", &config(cfg), "--jobs", "4"]);
        assert_eq!(exit_code(&serial), 0);
        assert_eq!(exit_code(&parallel), 0);
        assert_eq!(serial.stdout, parallel.stdout, "{cmd} on {cfg}");
    }
}

#[test]
fn tabular_format_emits_tab_separated_rows() {
    let out = run(&[
        "basis",
        "--config",
        &config("free-field.toml"),
        "--format",
        "tabular",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("# report\tbasis"));
    assert!(text.contains("model\td\t2"));
}
