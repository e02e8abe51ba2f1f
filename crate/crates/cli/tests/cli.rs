use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use saompower::panel::PanelSet;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny.toml")
}

fn run(args: &[&str], out: &Path, threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saompower"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SAOMPOWER_THREADS", threads)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_panels_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture();
    let o = run(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--scenario",
            "tiny",
            "--reps",
            "2",
        ],
        dir.path(),
        "1",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["panels"].as_array().unwrap().len(), 2);
    assert!(manifest["scenario_hash"].is_string());
    for p in manifest["panels"].as_array().unwrap() {
        let text = fs::read_to_string(dir.path().join(p["file"].as_str().unwrap())).unwrap();
        let set = PanelSet::from_json(&text).unwrap();
        assert_eq!(set.groups[0].n_waves(), 3);
        assert_eq!(set.groups[0].n(), 14);
    }
}

#[test]
fn zero_rates_give_identical_waves() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture())
        .unwrap()
        .replace(
            r#"effect = "rate", parameter = 4.0"#,
            r#"effect = "rate", parameter = 0.0"#,
        )
        .replace(
            r#"effect = "rate", parameter = 2.0"#,
            r#"effect = "rate", parameter = 0.0"#,
        );
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = run(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--scenario",
            "tiny",
            "--reps",
            "1",
        ],
        &out,
        "1",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let set = PanelSet::from_json(&fs::read_to_string(out.join("tiny-rep0000.json")).unwrap()).unwrap();
    let waves = &set.groups[0].waves;
    assert!(waves
        .windows(2)
        .all(|w| w[0].network == w[1].network && w[0].behavior == w[1].behavior));
}

#[test]
fn estimate_resumes_and_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture();
    let cfg = cfg.to_str().unwrap();
    let panels = dir.path().join("panels");
    assert!(run(
        &["simulate", "--config", cfg, "--scenario", "tiny", "--reps", "2"],
        &panels,
        "1"
    )
    .status
    .success());
    let est = dir.path().join("est");
    let o = run(
        &[
            "estimate",
            "--config",
            cfg,
            "--scenario",
            "tiny",
            panels.to_str().unwrap(),
        ],
        &est,
        "1",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(est.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("tiny-rep0000,"));

    let o = run(
        &[
            "estimate",
            "--config",
            cfg,
            "--scenario",
            "tiny",
            "--resume",
            panels.to_str().unwrap(),
        ],
        &est,
        "1",
    );
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 skipped"));
    assert_eq!(fs::read_to_string(est.join("results.csv")).unwrap(), csv);

    let empty = dir.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let o = run(
        &[
            "estimate",
            "--config",
            cfg,
            "--scenario",
            "tiny",
            empty.to_str().unwrap(),
        ],
        &est,
        "1",
    );
    assert_eq!(o.status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{}").unwrap();
    let o = run(
        &[
            "estimate",
            "--config",
            cfg,
            "--scenario",
            "tiny",
            broken.to_str().unwrap(),
        ],
        &dir.path().join("bad"),
        "1",
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(fs::read_to_string(dir.path().join("bad/errors.csv"))
        .unwrap()
        .contains("broken"));
}

#[test]
fn power_output_is_identical_across_thread_counts_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture();
    let cfg = cfg.to_str().unwrap();
    let outputs: Vec<(String, String)> = [("a", "1"), ("b", "2"), ("c", "1")]
        .iter()
        .map(|(name, threads)| {
            let out = dir.path().join(name);
            let o = run(&["power", "--config", cfg], &out, threads);
            assert!(o.status.success(), "{}", stderr(&o));
            (
                fs::read_to_string(out.join("power.csv")).unwrap(),
                fs::read_to_string(out.join("replications.csv")).unwrap(),
            )
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let out = dir.path().join("a");
    assert!(fs::read_to_string(out.join("summary.txt")).unwrap().contains("tiny"));
    assert!(serde_json::from_str::<serde_json::Value>(&fs::read_to_string(out.join("power.json")).unwrap()).is_ok());

    // resuming a finished run recomputes nothing and reproduces the report
    let o = run(&["power", "--config", cfg, "--resume"], &out, "1");
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(out.join("power.csv")).unwrap(), outputs[0].0);
    fs::write(out.join("checkpoint.jsonl"), "garbage\n").unwrap();
    assert_eq!(
        run(&["power", "--config", cfg, "--resume"], &out, "1").status.code(),
        Some(3)
    );
    let o = run(&["power", "--config", cfg, "--resume", "--force"], &out, "1");
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("power.csv")).unwrap(), outputs[0].0);
}

#[test]
fn gof_writes_distributions_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture();
    let o = run(
        &[
            "gof",
            "--config",
            cfg.to_str().unwrap(),
            "--scenario",
            "tiny",
            "--runs",
            "100",
        ],
        dir.path(),
        "1",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(dir.path().join("gof.csv"))
        .unwrap()
        .starts_with("kind,component,run,value"));
    let summary = fs::read_to_string(dir.path().join("gof_summary.csv")).unwrap();
    assert!(summary.contains("triad_census"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture())
        .unwrap()
        .replace(r#"effect = "recip""#, r#"effect = "mutual""#);
    let cfg = write_config(dir.path(), &text);
    let o = run(
        &["simulate", "--config", cfg.to_str().unwrap(), "--scenario", "tiny"],
        dir.path(),
        "1",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("row 3") && stderr(&o).contains("mutual"),
        "{}",
        stderr(&o)
    );

    let good = fixture();
    let o = run(
        &["simulate", "--config", good.to_str().unwrap(), "--scenario", "nope"],
        dir.path(),
        "1",
    );
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["power", "--config", "/nonexistent.toml"], dir.path(), "1");
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &["power", "--config", good.to_str().unwrap(), "--force"],
        dir.path(),
        "1",
    );
    assert_eq!(o.status.code(), Some(2));
}
