use std::path::Path;
use std::process::Command;

use revivals_cli::config::Subsystems;
use revivals_cli::{run, Experiment, ExperimentConfig, Metadata, RunOptions};

fn revivals(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_revivals")).args(args).current_dir(dir).output().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn hayden_preskill(a: usize, d: usize, out: &Path) -> Vec<Vec<String>> {
    let mut cfg = ExperimentConfig::for_experiment(Experiment::HaydenPreskill);
    cfg.hamiltonian = Some(revivals::hamiltonian::HamiltonianSpec::Pxp { n: 8 });
    cfg.time_grid.points = 4;
    cfg.subsystems = Some(Subsystems { a: vec![a], d: vec![d] });
    run(&cfg, &RunOptions { out_dir: Some(out.to_path_buf()), threads: 1 }).unwrap();
    rows(&out.join("hayden_preskill.csv"))
}

#[test]
fn hayden_preskill_first_row() {
    let dir = tempfile::tempdir().unwrap();
    let disjoint = hayden_preskill(1, 8, &dir.path().join("disjoint"));
    assert_eq!(disjoint[0][..2], ["t".to_string(), "value".to_string()]);
    assert_eq!(disjoint[1][1].parse::<f64>().unwrap(), 0.25);
    let same = hayden_preskill(1, 1, &dir.path().join("same"));
    assert_eq!(same[1][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn csv_uses_seventeen_significant_digits_and_lf() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::for_experiment(Experiment::Z1Overlap);
    cfg.hamiltonian = Some(revivals::hamiltonian::HamiltonianSpec::Pxp { n: 4 });
    cfg.time_grid.points = 5;
    run(&cfg, &RunOptions { out_dir: Some(dir.path().to_path_buf()), threads: 1 }).unwrap();
    let text = std::fs::read_to_string(dir.path().join("z1_overlap.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 6);
    let value = text.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    let mantissa = value.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17, "{value}");
}

#[test]
fn metadata_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::for_experiment(Experiment::Recovery).resolve(Experiment::Recovery).unwrap();
    cfg.hamiltonian = Some(revivals::hamiltonian::HamiltonianSpec::Synthetic {
        rational: vec!["1/2".parse().unwrap(), "2".parse().unwrap()],
        irrational: vec!["sqrt(2)".parse().unwrap(), "1/3+sqrt(7)".parse().unwrap()],
        basis_seed: Some(9),
    });
    cfg.seed = 11;
    let summary = run(&cfg, &RunOptions { out_dir: Some(dir.path().to_path_buf()), threads: 1 }).unwrap();
    let meta: Metadata = serde_json::from_str(&std::fs::read_to_string(&summary.metadata).unwrap()).unwrap();
    assert_eq!(meta.config, cfg);
    assert_eq!(meta.artifacts, vec!["recovery.json".to_string()]);
    let echoed = serde_json::to_string(&meta.config).unwrap();
    assert_eq!(ExperimentConfig::parse(&echoed).unwrap(), cfg);
    assert_eq!(ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
}

#[test]
fn toy_verify_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = revivals(&["toy-verify", "--out", "o"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/toy_verify.json")).unwrap()).unwrap();
    assert_eq!(report["eigenvalues"].as_array().unwrap().len(), 4);
    assert_eq!(report["matches_exact"], true);
    assert!(report["classification"]["spacing_violations"].as_array().unwrap().is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // otoc without observables
    assert_eq!(revivals(&["otoc", "--out", "o"], p).status.code(), Some(2));
    std::fs::write(p.join("big.toml"), "[hamiltonian]\nkind = \"pxp\"\nn = 13\n").unwrap();
    assert_eq!(revivals(&["spectrum", "--config", "big.toml", "--out", "o"], p).status.code(), Some(4));
    // no rational eigenvalue, so the revival time is undefined
    std::fs::write(p.join("m.txt"), "dim 2\n0 0 1.4142135623730951 0\n1 1 1.7320508075688772 0\n").unwrap();
    std::fs::write(p.join("irr.toml"), "[hamiltonian]\nkind = \"explicit-matrix\"\npath = \"m.txt\"\n").unwrap();
    assert_eq!(revivals(&["revival", "--config", "irr.toml", "--out", "o"], p).status.code(), Some(3));
    std::fs::write(p.join("bad.toml"), "bogus = 1\n").unwrap();
    assert_eq!(revivals(&["spectrum", "--config", "bad.toml"], p).status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("c.toml"), "seed = 1\n[state]\nkind = \"haar\"\n").unwrap();
    assert!(revivals(&["revival", "--config", "c.toml", "--seed", "5", "--out", "a"], p).status.success());
    let meta: Metadata = serde_json::from_str(&std::fs::read_to_string(p.join("a/revival.meta.json")).unwrap()).unwrap();
    assert_eq!(meta.seed, 5);
    assert!(revivals(&["revival", "--config", "c.toml", "--seed", "5", "--out", "b", "--threads", "1"], p).status.success());
    assert_eq!(std::fs::read(p.join("a/revival.csv")).unwrap(), std::fs::read(p.join("b/revival.csv")).unwrap());
}
