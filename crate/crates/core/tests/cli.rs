use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mimo-fas"));
    c.env_remove("MIMO_FAS_OUT_DIR");
    c
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn text(o: &Output) -> (String, String) {
    (
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

#[test]
fn every_shipped_config_validates() {
    for entry in std::fs::read_dir(shipped("")).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().arg("validate").arg(&path).output().unwrap();
        assert!(o.status.success(), "{}: {:?}", path.display(), text(&o));
    }
}

#[test]
fn dmt_subcommand_prints_endpoints() {
    let o = bin().args(["dmt", "--rank", "23"]).output().unwrap();
    assert!(o.status.success());
    let (out, _) = text(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("sweep,metric,value,trials,ci95,seed"));
    assert_eq!(lines.next(), Some("0,d.mimo_fas,529,0,0,0"));
    assert_eq!(lines.next(), Some("0,d.antenna_selection,81,0,0,0"));
    assert_eq!(lines.next(), Some("0,d.traditional,16,0,0,0"));
}

#[test]
fn table_subcommand_estimates_ranks() {
    let o = bin()
        .args(["table1", "--apertures", "0.5,1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let (out, _) = text(&o);
    assert!(out.contains("0.5,rank,13,"), "{out}");
    assert!(out.contains("1,rank,23,"), "{out}");
}

#[test]
fn run_writes_identical_results_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let out = dir.path().join(threads);
        let o = bin()
            .arg("run")
            .arg(shipped("qr-vs-exhaustive.json"))
            .args([
                "--trials",
                "20",
                "--seed",
                "9",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{:?}", text(&o));
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
                .unwrap();
        assert_eq!(summary["config"]["seed"], 9);
        assert_eq!(summary["config"]["trials"], 20);
        outputs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].contains(&b'\r'));
}

#[test]
fn output_directory_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("MIMO_FAS_OUT_DIR", dir.path())
        .arg("run")
        .arg(shipped("table1.json"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{:?}", text(&o));
    assert!(dir.path().join("results.csv").exists());
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(shipped("orderings-outage.json")).unwrap())
            .unwrap();
    v["scenario"]["n_rx"] = 101.into();
    std::fs::write(&cfg, v.to_string()).unwrap();
    for cmd in ["validate", "run"] {
        let o = bin().arg(cmd).arg(&cfg).output().unwrap();
        assert!(!o.status.success());
        let (_, err) = text(&o);
        assert!(err.contains("scenario.n_rx"), "{err}");
    }
}

#[test]
fn exhaustive_refusal_reports_the_combination_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(shipped("orderings-rate.json")).unwrap())
            .unwrap();
    v["baselines"] = serde_json::json!([{ "label": "ex", "strategy": { "kind": "exhaustive" } }]);
    std::fs::write(&cfg, v.to_string()).unwrap();
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert!(!o.status.success());
    let (_, err) = text(&o);
    // C(100,4)^2
    assert!(err.contains("15376005500625"), "{err}");
    assert!(err.contains("baselines[0].strategy.combo_limit"), "{err}");
}

#[test]
fn malformed_and_missing_configs_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("junk.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    assert!(!bin()
        .arg("validate")
        .arg(&cfg)
        .output()
        .unwrap()
        .status
        .success());
    let missing = dir.path().join("missing.json");
    assert!(!bin()
        .arg("run")
        .arg(&missing)
        .output()
        .unwrap()
        .status
        .success());
}
