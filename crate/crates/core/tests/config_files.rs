mod common;

use std::path::PathBuf;

use saompower::config::ConfigFile;
use saompower::Error;

fn repo_configs() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    files
}

fn config_error(text: &str) -> String {
    match ConfigFile::parse(text) {
        Err(Error::Config(msg)) | Err(Error::UnknownCovariate(msg)) => msg,
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn every_repository_config_parses_and_round_trips() {
    let files = repo_configs();
    assert!(files.len() >= 3);
    for path in files {
        let cfg = ConfigFile::load(&path).unwrap();
        let again = ConfigFile::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again, "{}", path.display());
        assert_eq!(cfg.scenarios().unwrap(), again.scenarios().unwrap());
    }
}

#[test]
fn example_grids_expand_to_the_expected_cells() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let communities = ConfigFile::load(&dir.join("communities.toml"))
        .unwrap()
        .scenarios()
        .unwrap();
    assert_eq!(communities.len(), 5);
    let cohorts = ConfigFile::load(&dir.join("cohorts.toml"))
        .unwrap()
        .scenarios()
        .unwrap();
    assert_eq!(cohorts.len(), 30);
    assert!(cohorts.iter().any(|s| s.id == "s2-larger-t3-m7"));
}

#[test]
fn unknown_keys_are_rejected_at_every_level() {
    let base = common::TINY_CONFIG;
    let mutations = [
        ("seed = 99", "seed = 99\nsede = 1"),
        ("phase3_runs = 60", "phase3_runs = 60\nphase4_runs = 1"),
        (r#"parameter = 4.0 }"#, r#"parameter = 4.0, weight = 1 }"#),
        ("[models.m]", "[models.m]\nlabel = \"x\""),
        (r#"id = "tiny""#, "id = \"tiny\"\nnotes = \"x\""),
        ("communities = [0]", "communities = [0]\nclusters = 2"),
        ("distance_scale = 4.0 }", "distance_scale = 4.0, spread = 1.0 }"),
    ];
    ConfigFile::parse(base).unwrap();
    for (from, to) in mutations {
        assert!(base.contains(from), "{from}");
        let mutated = base.replacen(from, to, 1);
        let msg = config_error(&mutated);
        assert!(msg.contains("unknown field"), "{to}: {msg}");
    }
}

#[test]
fn unknown_keys_in_repository_configs_are_rejected() {
    for path in repo_configs() {
        let text = std::fs::read_to_string(&path).unwrap();
        let mutated = format!("bogus_key = 1\n{text}");
        assert!(config_error(&mutated).contains("unknown field"), "{}", path.display());
    }
}

#[test]
fn diagnostics_name_the_offending_row() {
    let bad_effect = common::TINY_CONFIG.replace(r#"effect = "recip""#, r#"effect = "reciprocity""#);
    let msg = config_error(&bad_effect);
    assert!(msg.contains("row 3") && msg.contains("reciprocity"), "{msg}");

    let bad_cov = common::TINY_CONFIG.replace(r#"covariate = "dist""#, r#"covariate = "distance""#);
    assert!(config_error(&bad_cov).contains("distance"));

    let bad_focal = common::TINY_CONFIG.replace(r#"focal = ["simX", "totSim"]"#, r#"focal = ["avAlt"]"#);
    assert!(config_error(&bad_focal).contains("avAlt"));

    let no_scenarios = &common::TINY_CONFIG[..common::TINY_CONFIG.find("[[scenarios]]").unwrap()];
    assert!(config_error(no_scenarios).contains("no scenarios"));

    let syntax = common::TINY_CONFIG.replace("seed = 99", "seed = ");
    assert!(config_error(&syntax).contains("line"));
}

#[test]
fn overrides_replace_generating_values() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let s = ConfigFile::load(&dir.join("communities-null.toml"))
        .unwrap()
        .scenario("null-n60-w3")
        .unwrap();
    for e in s.model.network_effects.iter().chain(&s.model.behavior_effects) {
        let name = e.kind.to_string();
        if name == "simX" || name == "totSim" {
            assert_eq!(e.parameter, 0.0);
        }
    }
    assert_eq!(s.replications, 400);
}
