use std::path::Path;
use std::process::Command;

use rwre_cli::run::{STATS_FILE, MANIFEST_FILE};
use rwre_cli::{run, run_task, ExperimentConfig, RunManifest, RunOptions, Scenario, StatsRecord};
use rwre_core::treecore::{OffspringDistribution, OffspringLaw};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rwre"))
}

fn run_in(config: &ExperimentConfig, dir: &Path, workers: usize) -> RunManifest {
    run(config, &RunOptions { out_dir: dir.to_path_buf(), workers }).unwrap()
}

fn small(scenario: Scenario) -> ExperimentConfig {
    let ladder = match scenario {
        Scenario::Sinai | Scenario::Barriers | Scenario::Brox => vec![10, 20],
        _ => vec![16, 64],
    };
    let mut c = ExperimentConfig::new(scenario, 7, ladder);
    c.replications = 3;
    c
}

#[test]
fn same_seed_gives_identical_statistics() {
    for s in Scenario::ALL {
        let c = small(s);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_in(&c, a.path(), 1);
        run_in(&c, b.path(), 4);
        let sa = std::fs::read(a.path().join(STATS_FILE)).unwrap();
        let sb = std::fs::read(b.path().join(STATS_FILE)).unwrap();
        assert!(!sa.is_empty());
        assert_eq!(sa, sb, "{}", s.name());
        let m = run_in(&c, a.path(), 2);
        for f in m.outputs.iter().filter(|f| f.ends_with(".csv")) {
            assert_eq!(
                std::fs::read(a.path().join(f)).unwrap(),
                std::fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
    }
}

#[test]
fn different_seed_changes_statistics() {
    let mut c = small(Scenario::Sinai);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_in(&c, a.path(), 1);
    c.seed += 1;
    run_in(&c, b.path(), 1);
    assert_ne!(
        std::fs::read(a.path().join(STATS_FILE)).unwrap(),
        std::fs::read(b.path().join(STATS_FILE)).unwrap()
    );
}

#[test]
fn sinai_smoke_run() {
    let c = ExperimentConfig::new(Scenario::Sinai, 1, vec![100]);
    let dir = tempfile::tempdir().unwrap();
    let m = run_in(&c, dir.path(), 1);
    let csvs: Vec<_> = std::fs::read_dir(dir.path().join("trajectories")).unwrap().collect();
    assert_eq!(csvs.len(), 1);
    let stats = std::fs::read_to_string(dir.path().join(STATS_FILE)).unwrap();
    assert_eq!(stats.lines().count(), 1);
    let rec: StatsRecord = serde_json::from_str(stats.lines().next().unwrap()).unwrap();
    assert_eq!(rec.scale, 100);
    assert_eq!(rec.scenario, Scenario::Sinai);
    assert_eq!(m.seeds.len(), 1);
}

#[test]
fn manifest_is_complete() {
    let c = small(Scenario::Errw);
    let dir = tempfile::tempdir().unwrap();
    run_in(&c, dir.path(), 2);
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let m: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(m.config, c);
    assert_eq!(ExperimentConfig::from_toml(&m.config_toml).unwrap(), c);
    assert_eq!(m.seeds.len(), c.replications);
    // every file on disk is listed, and every listed file exists
    let mut on_disk = vec![STATS_FILE.to_string()];
    for e in std::fs::read_dir(dir.path().join("trajectories")).unwrap() {
        on_disk.push(format!("trajectories/{}", e.unwrap().file_name().to_string_lossy()));
    }
    for f in &m.outputs {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    for f in &on_disk {
        assert!(m.outputs.contains(f), "{f} not listed");
    }
}

#[test]
fn single_replication_reproduces() {
    for s in Scenario::ALL {
        let c = small(s);
        let dir = tempfile::tempdir().unwrap();
        let m = run_in(&c, dir.path(), 3);
        let stats = std::fs::read_to_string(dir.path().join(STATS_FILE)).unwrap();
        let (k, r) = (1, 2);
        let out = run_task(&c, k, r).unwrap();
        // compare serialized lines: parsing floats back is not bit-exact
        let line = serde_json::to_string(&out.record).unwrap();
        assert!(stats.lines().any(|l| l == line), "{}", s.name());
        assert_eq!(out.record.seed, m.seeds[r]);
        assert_eq!(std::fs::read_to_string(dir.path().join(&out.record.trajectory)).unwrap(), out.csv);
    }
}

#[test]
fn validate_flags_small_beta() {
    let mut c = ExperimentConfig::new(Scenario::BrwBias, 1, vec![16]);
    c.model.beta = 0.5;
    let d = c.validate();
    assert_eq!(d.len(), 1);
    assert!(d[0].contains("beta"));
}

#[test]
fn validate_flags_noncritical_offspring() {
    let mut c = ExperimentConfig::new(Scenario::Errw, 1, vec![16]);
    c.model.offspring = OffspringDistribution::new(OffspringLaw::Pmf { probs: vec![0.5, 0.2, 0.3] });
    let d = c.validate();
    assert!(!d.is_empty());
    assert!(d.iter().any(|x| x.contains("offspring")));
}

#[test]
fn validate_accepts_defaults() {
    for s in Scenario::ALL {
        assert!(small(s).validate().is_empty(), "{}", s.name());
    }
}

#[test]
fn validate_flags_ladder_and_barrier_params() {
    let mut c = ExperimentConfig::new(Scenario::Barriers, 1, vec![20, 10, 10]);
    c.model.p = 1.0;
    c.model.q = Some(0.5);
    c.model.lambda = 50.0;
    let d = c.validate();
    assert!(d.iter().any(|x| x.contains("increasing")));
    assert!(d.iter().any(|x| x.contains("p = 1")));
    assert!(d.iter().any(|x| x.contains("q = 0.5")));
    assert!(d.iter().any(|x| x.contains("lambda / m")));
}

#[test]
fn run_rejects_invalid_config() {
    let mut c = ExperimentConfig::new(Scenario::BrwBias, 1, vec![16]);
    c.model.beta = 0.5;
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&c, &RunOptions { out_dir: dir.path().into(), workers: 1 }).is_err());
    assert!(!dir.path().join(STATS_FILE).exists());
}

#[test]
fn unknown_scenario_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "scenario = \"unknown\"\nseed = 1\nladder = [10]\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scenario"));
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn binary_runs_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    let mut c = ExperimentConfig::new(Scenario::Sinai, 5, vec![10]);
    c.replications = 2;
    std::fs::write(&path, c.to_toml().unwrap()).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(out.status.success());

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (o, w) in [(&a, "1"), (&b, "3")] {
        let st = bin().args(["sinai", "--workers", w, "--config"]).arg(&path).arg("--out").arg(o).output().unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    }
    assert_eq!(std::fs::read(a.join(STATS_FILE)).unwrap(), std::fs::read(b.join(STATS_FILE)).unwrap());

    // seed override changes output; scenario mismatch is a config error
    let st = bin().args(["run", "--seed", "6", "--config"]).arg(&path).arg("--out").arg(&b).output().unwrap();
    assert!(st.status.success());
    assert_ne!(std::fs::read(a.join(STATS_FILE)).unwrap(), std::fs::read(b.join(STATS_FILE)).unwrap());
    let st = bin().args(["brox", "--config"]).arg(&path).output().unwrap();
    assert_eq!(st.status.code(), Some(2));

    let mut bad = c.clone();
    bad.ladder = vec![10, 5];
    std::fs::write(&path, bad.to_toml().unwrap()).unwrap();
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("increasing"));
}
