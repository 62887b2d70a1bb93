//! End-to-end tests of the command-line interface.

use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phonon-sim"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_writes_result_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "experiment = \"RABI_FOCK\"\n\n[scan]\npoints = 101\n",
    );
    let out = dir.path().join("out");
    let status = binary()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "stderr: {}", String::from_utf8_lossy(&status.stderr));

    let entries: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 2, "expected CSV and JSON, found {entries:?}");
    let csv_path = entries.iter().find(|p| p.extension().unwrap() == "csv").unwrap();
    assert!(csv_path.file_name().unwrap().to_str().unwrap().starts_with("rabi_fock-"));
    let text = std::fs::read_to_string(csv_path).unwrap();
    // header plus the 101 grid rows
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn invalid_config_key_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "experiment = \"RABI_FOCK\"\nnot_a_key = 1\n");
    let out = dir.path().join("out");
    let output = binary()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("not_a_key"), "stderr does not name the key: {stderr}");
}

#[test]
fn cutoff_override_is_echoed_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "experiment = \"RABI_FOCK\"\n\n[scan]\npoints = 5\n",
    );
    let out = dir.path().join("out");
    let output = binary()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--format", "json", "--cutoff-override", "4", "4", "--seed", "7"])
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let json_path = std::fs::read_dir(&out).unwrap().next().unwrap().unwrap().path();
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
    assert_eq!(parsed["metadata"]["config"]["space"]["n_max_1"], 4);
    assert_eq!(parsed["metadata"]["config"]["space"]["n_max_2"], 4);
    assert_eq!(parsed["metadata"]["config"]["seed"], 7);
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "experiment = \"TOMO_ROUNDTRIP\"\nseed = 3\nn_max_fit = 3\n",
    );
    let mut outputs = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let status = binary()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--format", "csv"])
            .status()
            .unwrap();
        assert!(status.success());
        let path = std::fs::read_dir(&out).unwrap().next().unwrap().unwrap().path();
        outputs.push(std::fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "reruns must be bit-identical");
}

#[test]
fn list_prints_catalogue() {
    let output = binary().arg("list").output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    for (name, figure) in [
        ("PHASE_SCAN_FOCK", "Fig. 3a"),
        ("RABI_COHERENT", "Fig. 5"),
        ("RABI_EXCITED", "Fig. 10"),
    ] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.contains(figure), "{line}");
    }
}

#[test]
fn verify_filter_runs_and_passes() {
    let output = binary().args(["verify", "--filter", "collective"]).output().unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("PASS  collective-orthonormality"));
    assert!(text.contains("0 failed"));
}

#[test]
fn verify_unknown_filter_fails() {
    let output = binary().args(["verify", "--filter", "no-such-check"]).output().unwrap();
    assert!(!output.status.success());
}

#[test]
fn missing_config_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let output = binary()
        .args(["run", "--config"])
        .arg(dir.path().join("absent.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
}
