//! The `dyadic-field` binary: exit codes, error payloads, manifests, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dyadic-field"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {text}"))
}

const WLLN: &str = r#"
name = "small_wlln"
command = "wlln"
seed = 11
[model.marginal]
distribution = { kind = "symmetrized_pareto", tail_index = 1.5 }
[params]
p = 1.5
grid_exps = [2, 4, 6]
reps = 200
"#;

#[test]
fn successful_run_writes_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.toml", WLLN);
    let out = dir.path().join("out");
    let o = run(&["wlln", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(manifest["seed"], 11);
    let csv = std::fs::read_to_string(out.join("wlln_trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3, "one row per grid:\n{csv}");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("wlln.json")).unwrap()).unwrap();
    assert!(json["verdict"].is_string());
    let check = run(&["manifest", "--out", out.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
}

#[test]
fn tampered_output_fails_manifest_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.toml", WLLN);
    let out = dir.path().join("out");
    assert!(run(&["wlln", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "csv"]).status.success());
    assert!(!out.join("wlln.json").exists());
    std::fs::write(out.join("wlln_trace.csv"), "tampered\n").unwrap();
    let o = run(&["manifest", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let check: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(check["mismatches"][0], "wlln_trace.csv");
}

#[test]
fn invalid_config_exits_2_with_every_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "command = \"wlln\"\n[model.marginal]\ndistribution = { kind = \"rademacher\" }\n[params]\np = 2.5\nreps = 0\nepsilon = -1.0\n",
    );
    let o = run(&["wlln", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "config");
    assert_eq!(e["error"]["violations"].as_array().unwrap().len(), 3, "{e}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "command = \"lp\"\nbogus = 1\n[params]\np = \"high\"\n");
    let o = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    let v: Vec<String> = e["error"]["violations"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_owned()).collect();
    assert!(v.iter().any(|s| s.contains("bogus")), "{v:?}");
    assert!(v.iter().any(|s| s.contains("params")), "{v:?}");
    let o = run(&["lp", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "config");
}

#[test]
fn mismatched_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.toml", WLLN);
    let o = run(&["lp", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_3_and_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "lp.toml",
        "command = \"lp\"\n[model.marginal]\ndistribution = { kind = \"pareto\", tail_index = 0.8 }\n[params]\np = 1.5\ngrid_exps = [2]\nreps = 5\n",
    );
    let out = dir.path().join("o");
    let o = run(&["lp", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_json(&o)["error"]["kind"], "runtime");
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for (sub, file) in [("series", "series.toml"), ("rosenthal", "rosenthal.toml"), ("lp", "lp.toml"), ("dominate", "dominate.toml")] {
        let cfg = scenarios.join(file);
        let mut outs = Vec::new();
        for t in ["1", "8"] {
            let out = dir.path().join(format!("{sub}-{t}"));
            let o = run(&[sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", t, "--seed", "99"]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.file_name().unwrap() != "manifest.json")
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            files.sort();
            outs.push(files);
        }
        assert!(!outs[0].is_empty());
        assert!(outs[0] == outs[1], "{sub} output depends on the thread count");
    }
}

#[test]
fn seed_override_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "w.toml", WLLN);
    let read = |seed: &str| {
        let out = dir.path().join(format!("o{seed}"));
        assert!(run(&["wlln", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]).status.success());
        std::fs::read(out.join("wlln_trace.csv")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}
