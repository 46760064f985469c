//! Contract tests for the `latgas` binary: exit codes, artifact layout,
//! environment overrides, and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const JOB: &str = r#"
spec_version = 1

[model]
dimension = 1
preset = "nearest-neighbor"
coupling = 1.0

[run]
lengths = [24]
beta = 0.4
seed = 9
algorithm = "metropolis"
n_samples = 400
thin_sweeps = 1

[analysis]
mode = "mcmc"
window = [6]

[diffraction]
grid_m = 32
"#;

fn latgas(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_latgas"));
    for key in ["LATGAS_CONFIG", "LATGAS_OUT", "LATGAS_SEED", "LATGAS_THREADS"] {
        cmd.env_remove(key);
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.args(args).output().expect("binary should spawn")
}

fn write_job(dir: &Path) -> String {
    let path = dir.join("job.toml");
    fs::write(&path, JOB).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn full_pipeline_succeeds_and_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let job = write_job(tmp.path());
    let out_dir = tmp.path().join("out");
    let out = latgas(&["all", "--config", &job, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "conditions.txt",
        "samples.bin",
        "stats.txt",
        "correlations_spin.tsv",
        "correlations_density.tsv",
        "fits.txt",
        "spectrum.tsv",
        "structure_factor.tsv",
        "checks.txt",
        "MANIFEST.tsv",
        "report.md",
    ] {
        assert!(out_dir.join(name).is_file(), "missing artifact {name}");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("report at"), "unexpected stdout: {stdout}");
}

#[test]
fn malformed_and_invalid_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();

    let unknown_key = tmp.path().join("bad.toml");
    fs::write(&unknown_key, JOB.replace("[diffraction]", "[diffraction]\nmystery = 1\n")).unwrap();
    let out = latgas(&["check", "--config", unknown_key.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let missing = tmp.path().join("nowhere.toml");
    let out = latgas(&["check", "--config", missing.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 2);

    // Usage errors from the argument parser share the configuration code.
    let out = latgas(&["definitely-not-a-subcommand"], &[]);
    assert_eq!(code(&out), 2);
}

#[test]
fn analyze_before_simulate_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let job = write_job(tmp.path());
    let out_dir = tmp.path().join("out");
    let out = latgas(&["analyze", "--config", &job, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("simulate"), "hint missing from: {stderr}");
}

#[test]
fn tampered_artifact_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let job = write_job(tmp.path());
    let out_dir = tmp.path().join("out");
    let ok = latgas(&["all", "--config", &job, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&ok), 0);

    let stats = out_dir.join("stats.txt");
    let mut text = fs::read_to_string(&stats).unwrap();
    text.push_str("tampered = true\n");
    fs::write(&stats, text).unwrap();

    let out = latgas(&["report", "--config", &job, "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("stats.txt"));
}

#[test]
fn environment_variables_stand_in_for_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let job = write_job(tmp.path());
    let out_dir = tmp.path().join("env-out");
    let out = latgas(
        &["check"],
        &[
            ("LATGAS_CONFIG", job.as_str()),
            ("LATGAS_OUT", out_dir.to_str().unwrap()),
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("conditions.txt").is_file());

    // A seed override changes the recorded sample stream.
    let seeded = tmp.path().join("seeded");
    let out = latgas(
        &["simulate", "--config", &job, "--out", seeded.to_str().unwrap()],
        &[("LATGAS_SEED", "777")],
    );
    assert_eq!(code(&out), 0);
    let stats = fs::read_to_string(seeded.join("stats.txt")).unwrap();
    assert!(stats.contains("seed = 777"), "stats: {stats}");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let job = write_job(tmp.path());
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    for dir in [&first, &second] {
        let out = latgas(&["all", "--config", &job, "--out", dir.to_str().unwrap()], &[]);
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["MANIFEST.tsv", "samples.bin", "spectrum.tsv", "report.md"] {
        let a = fs::read(first.join(name)).unwrap();
        let b = fs::read(second.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}
