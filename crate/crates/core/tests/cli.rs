use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn freqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqlab"))
        .args(args)
        .output()
        .expect("spawn freqlab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = freqlab(&["gradcheck", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("gradcheck: PASS"));
    let v = json(dir.path(), "gradcheck.json");
    assert_eq!(v["pass"], true);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["provenance"]["seed"], 3);
    assert!(dir.path().join("gradcheck.csv").exists());
}

#[test]
fn missing_seed_is_a_config_error() {
    let out = freqlab(&["gradcheck"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn rank_outside_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = freqlab(&[
        "theorem1", "--seed", "1", "--K", "100", "--r", "40", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("r=40"));
}

#[test]
fn unknown_flag_is_a_config_error() {
    assert_eq!(code(&freqlab(&["theorem2", "--seed", "1", "--bogus"])), 1);
    assert_eq!(code(&freqlab(&["nonsense"])), 1);
    assert_eq!(code(&freqlab(&["--help"])), 0);
}

#[test]
fn inconclusive_run_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = freqlab(&[
        "theorem1", "--seed", "1", "--K", "12", "--r", "2", "--trials", "1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(dir.path(), "theorem1.json")["pass"], false);
}

#[test]
fn config_file_merges_under_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small grid\nseed = 9\nK = 12,16\nr = 2\ntrials = 50\n").unwrap();
    let out = freqlab(&[
        "theorem1", "--config", cfg.to_str().unwrap(), "--trials", "4", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ne!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let c = &json(dir.path(), "theorem1.json")["config"];
    assert_eq!(c["seed"], 9);
    assert_eq!(c["trials"], 4);
    assert_eq!(c["K"], serde_json::json!([12, 16]));

    std::fs::write(&cfg, "seed = 9\ncolour = blue\n").unwrap();
    let out = freqlab(&["theorem1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let run = |workers: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = freqlab(&[
            "theorem1", "--seed", "7", "--K", "12,16", "--r", "2", "--trials", "30", "--workers",
            workers, "--out", dir.path().to_str().unwrap(),
        ]);
        assert_ne!(code(&out), 1);
        std::fs::read(dir.path().join("theorem1.csv")).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}
