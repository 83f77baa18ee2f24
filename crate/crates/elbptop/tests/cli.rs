mod common;

use std::path::Path;
use std::process::{Command, Output};

fn elbptop(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_elbptop"));
    cmd.args(args).env_remove("ELBPTOP_CACHE_DIR");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr)
}

#[test]
fn synth_evaluate_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let cache = dir.path().join("cache");
    let o = elbptop(&["synth", "--out", data.to_str().unwrap(), "--subjects", "3", "--clips", "3", "--size", "24", "--length", "8"], &[]);
    assert!(o.status.success(), "{}", text(&o));

    let cfg_path = dir.path().join("config.json");
    common::small_config(None).save(&cfg_path).unwrap();
    let manifest = data.join("manifest.json");
    let report = dir.path().join("report.json");
    let args = ["evaluate", "--manifest", manifest.to_str().unwrap(), "--config", cfg_path.to_str().unwrap(), "--report", report.to_str().unwrap(), "--seed", "7"];
    let o = elbptop(&args, &[("ELBPTOP_CACHE_DIR", &cache)]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("overall"));
    // The environment variable placed the cache.
    assert!(cache.read_dir().unwrap().count() >= 3);

    let saved = elbptop::RunReport::load(&report).unwrap();
    assert_eq!(saved.config.seed, 7);
    assert_eq!(saved.config.cache_dir.as_deref(), Some(cache.as_path()));
    let o = elbptop(&["report", report.to_str().unwrap()], &[]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout), saved.table());

    let o = elbptop(&["extract", "--manifest", manifest.to_str().unwrap(), "--config", cfg_path.to_str().unwrap(), "--cache-dir", cache.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("0 computed, 27 from cache"), "{}", text(&o));
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let o = elbptop(&["evaluate", "--manifest", missing.to_str().unwrap(), "--preset", "casme2"], &[]);
    assert!(!o.status.success());
    assert!(text(&o).contains("nope.json"), "{}", text(&o));

    let o = elbptop(&["preset", "unknown"], &[]);
    assert!(!o.status.success());

    // A manifest with a single subject cannot be evaluated.
    let data = dir.path().join("data");
    let o = elbptop(&["synth", "--out", data.to_str().unwrap(), "--subjects", "2", "--clips", "2", "--size", "16", "--length", "6"], &[]);
    assert!(o.status.success(), "{}", text(&o));
    let manifest = data.join("manifest.json");
    let mut m = elbptop::DatasetManifest::load(&manifest).unwrap();
    for e in &mut m.entries {
        e.subject_id = "s".into();
    }
    m.save(&manifest).unwrap();
    let cfg_path = dir.path().join("config.json");
    common::small_config(None).save(&cfg_path).unwrap();
    let o = elbptop(&["evaluate", "--manifest", manifest.to_str().unwrap(), "--config", cfg_path.to_str().unwrap(), "--no-tim", "--no-evm"], &[]);
    assert!(!o.status.success());
    assert!(text(&o).contains("protocol error"), "{}", text(&o));
}

#[test]
fn preset_prints_loadable_config() {
    let o = elbptop(&["preset", "samm"], &[]);
    assert!(o.status.success());
    let cfg: elbptop::RunConfig = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cfg, elbptop::RunConfig::preset("samm").unwrap());
}
