//! End-to-end checks of the `regrecon` binary: exit codes, report files, and
//! byte-level determinism of the summaries.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regrecon"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn hopf_selftest_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "hopf",
        "[experiment]\nname = \"hopf-selftest\"\nseed = 42\n",
    );
    let out = dir.path().join("runs");
    let status = bin()
        .args(["hopf-selftest", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("hopf-selftest.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["experiment"], "hopf-selftest");
    assert_eq!(summary["pass"], true);
    assert!(summary["config_hash"].is_string());
    assert!(summary["metrics"]["tree_counts"].is_object());
}

#[test]
fn summaries_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "gen",
        "[experiment]\nname = \"gen-path\"\nseed = 3\n[grid]\nresolution_log2 = 9\n",
    );
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("runs{run}"));
        let status = bin()
            .args(["gen-path", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push((
            std::fs::read(out.join("gen-path.summary.json")).unwrap(),
            std::fs::read(out.join("gen-path.path.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    assert_eq!(outputs[0].1, outputs[1].1);
}

#[test]
fn seed_override_changes_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "gen",
        "[experiment]\nname = \"gen-path\"\nseed = 3\n[grid]\nresolution_log2 = 8\n",
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert!(bin()
        .args(["gen-path", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_a)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["gen-path", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_b)
        .args(["--seed", "4"])
        .status()
        .unwrap()
        .success());
    let a = std::fs::read(out_a.join("gen-path.path.csv")).unwrap();
    let b = std::fs::read(out_b.join("gen-path.path.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn invalid_config_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    // missing mandatory seed
    let config = write_config(dir.path(), "bad", "[experiment]\nname = \"gen-path\"\n");
    let output = bin()
        .args(["gen-path", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("seed"), "{stderr}");

    // out-of-range value names the key
    let config = write_config(
        dir.path(),
        "bad2",
        "[experiment]\nname = \"gen-path\"\nseed = 1\n[model]\nalpha = 2.0\n",
    );
    let output = bin()
        .args(["gen-path", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("model.alpha"));
}

#[test]
fn unknown_experiment_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "cfg",
        "[experiment]\nname = \"nope\"\nseed = 1\n",
    );
    let output = bin()
        .args(["nope", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    // a single-width sweep cannot exhibit a decreasing trend, so the
    // two-model experiment reports a numerical-acceptance failure
    let config = write_config(
        dir.path(),
        "fail",
        "[experiment]\nname = \"recon-two-model\"\nseed = 1\n[grid]\nresolution_log2 = 9\n[model]\nk_terms = 9\n[sweep]\nlambda_log2 = [4]\n",
    );
    let out = dir.path().join("runs");
    let output = bin()
        .args(["recon-two-model", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    // the summary is still written, with pass = false
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("recon-two-model.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["pass"], false);
}

#[test]
fn list_prints_the_experiments() {
    let output = bin().arg("--list").output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    for name in ["hopf-selftest", "mollify-rate", "rp-integral-rate", "gen-path"] {
        assert!(stdout.contains(name), "{stdout}");
    }
}
