//! Behavioral tests of the `hslab` binary: exit codes, output routing,
//! and bytewise reproducibility of the written datasets.
//!
//! All runs use the `deform` experiment because it finishes in well
//! under a second while still exercising the full run pipeline
//! (config, output directory, checks, manifest).

use heleshaw_lab::config::{parse_config, ExperimentKind};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn hslab() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hslab"));
    // Never let the ambient environment pick the output root.
    cmd.env_remove("HSLAB_OUT");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).expect("write config");
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn defaults_pass_and_write_expected_files() {
    let tmp = TempDir::new().unwrap();
    let out = hslab()
        .args(["deform", "--out"])
        .arg(tmp.path())
        .output()
        .expect("run hslab");
    let stdout = stdout_of(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {stdout}");
    assert!(stdout.contains("PASS inversion-identities"), "{stdout}");
    assert!(stdout.contains("4/4 checks passed"), "{stdout}");
    for name in ["deform.csv", "deform.json", "manifest.json"] {
        let path = tmp.path().join("deform").join(name);
        assert!(path.is_file(), "missing {}", path.display());
    }
}

#[test]
fn config_violations_exit_2_with_locations() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.cfg",
        "experiment = deform\n[domain]\neps = -0.05\nmystery = 1\n",
    );
    let out = hslab()
        .args(["deform", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .expect("run hslab");
    let stderr = stderr_of(&out);
    assert_eq!(out.status.code(), Some(2), "stderr: {stderr}");
    assert!(stderr.contains("invalid configuration (2 problem(s))"), "{stderr}");
    assert!(stderr.contains("domain.eps"), "{stderr}");
    assert!(stderr.contains("mystery"), "{stderr}");
}

#[test]
fn missing_config_file_exits_2() {
    let tmp = TempDir::new().unwrap();
    let out = hslab()
        .args(["deform", "--config"])
        .arg(tmp.path().join("nonexistent.cfg"))
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .expect("run hslab");
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
}

#[test]
fn experiment_mismatch_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "mismatch.cfg", "experiment = simulate\n");
    let out = hslab()
        .args(["deform", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .expect("run hslab");
    let stderr = stderr_of(&out);
    assert_eq!(out.status.code(), Some(2), "stderr: {stderr}");
    assert!(stderr.contains("config names"), "{stderr}");
}

#[test]
fn numeric_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    // Sweep sizes above 0.1 demand an inversion radius below the
    // admissible floor; the run must abort as a numerical failure, not
    // report a failed check.
    let cfg = write_config(
        tmp.path(),
        "steep.cfg",
        "experiment = deform\n[deform]\nsweep = 0.2, 0.15, 0.12\n",
    );
    let out = hslab()
        .args(["deform", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .expect("run hslab");
    let stderr = stderr_of(&out);
    assert_eq!(out.status.code(), Some(3), "stderr: {stderr}");
    assert!(stderr.contains("numerical failure"), "{stderr}");
    // The aborted run still leaves an audit record behind.
    assert!(
        tmp.path().join("out").join("deform").join("manifest.json").is_file(),
        "manifest missing after abort"
    );
}

#[test]
fn failed_checks_exit_4() {
    let tmp = TempDir::new().unwrap();
    // A vanishing tolerance makes the sweep checks fail while the run
    // itself completes.
    let cfg = write_config(
        tmp.path(),
        "strict.cfg",
        "experiment = deform\n[deform]\nsigma = 1e-6\n",
    );
    let out = hslab()
        .args(["deform", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .expect("run hslab");
    let stdout = stdout_of(&out);
    assert_eq!(out.status.code(), Some(4), "stdout: {stdout}");
    assert!(stdout.contains("FAIL inversion-sweep"), "{stdout}");
    assert!(stdout.contains("2/4 checks passed"), "{stdout}");
}

#[test]
fn env_var_selects_output_root() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_hslab"))
        .arg("deform")
        .env("HSLAB_OUT", &root)
        .output()
        .expect("run hslab");
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout_of(&out));
    assert!(root.join("deform").join("manifest.json").is_file());
}

#[test]
fn default_root_is_hslab_out_under_cwd() {
    let tmp = TempDir::new().unwrap();
    let out = hslab()
        .arg("deform")
        .current_dir(tmp.path())
        .output()
        .expect("run hslab");
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout_of(&out));
    assert!(tmp
        .path()
        .join("hslab-out")
        .join("deform")
        .join("manifest.json")
        .is_file());
}

#[test]
fn custom_subdir_routes_outputs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "subdir.cfg",
        "experiment = deform\n[run]\nsubdir = custom\n",
    );
    let out = hslab()
        .args(["deform", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .expect("run hslab");
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout_of(&out));
    assert!(tmp
        .path()
        .join("out")
        .join("custom")
        .join("manifest.json")
        .is_file());
}

#[test]
fn example_configs_parse_cleanly() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).expect("configs directory") {
        let path = entry.expect("dir entry").path();
        if path.extension().map_or(true, |e| e != "cfg") {
            continue;
        }
        let text = fs::read_to_string(&path).expect("read example config");
        let name = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.starts_with('#'))
            .find_map(|l| l.strip_prefix("experiment"))
            .and_then(|rest| rest.trim().strip_prefix('='))
            .map(str::trim)
            .unwrap_or_else(|| panic!("{}: no experiment line", path.display()));
        let kind = ExperimentKind::parse(name)
            .unwrap_or_else(|| panic!("{}: unknown experiment {name:?}", path.display()));
        parse_config(kind, &path)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 3, "expected at least three example configs, found {seen}");
}

#[test]
fn runs_are_bytewise_reproducible() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for root in [&a, &b] {
        let out = hslab()
            .args(["deform", "--out"])
            .arg(root)
            .output()
            .expect("run hslab");
        assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout_of(&out));
    }
    for name in ["deform.csv", "deform.json"] {
        let bytes_a = fs::read(a.join("deform").join(name)).unwrap();
        let bytes_b = fs::read(b.join("deform").join(name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs between identical runs");
    }
}
