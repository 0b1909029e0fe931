//! Scenario registry and the replication runner.
//!
//! A run evaluates every `(rung, replication)` pair of the configuration.
//! Replication `r` uses the `r`-th seed derived from the master seed, and
//! rung `k` uses stream `k` of that seed, so each pair can be recomputed on
//! its own with [`run_task`]. Results are collected in ladder-major order
//! and written by a single thread, which makes the statistics file
//! independent of the worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use rwre_core::continuum::{
    brox_simulate, make_potential, sample_excursion, stick_breaking, PotentialDomain, PotentialKind, PotentialParams,
};
use rwre_core::env1d::{barrier_env, flatten, Environment1D};
use rwre_core::errw::{default_weights, simulate_errw};
use rwre_core::rng::{replication_seeds, stream, SimRng};
use rwre_core::rwre_tree::{
    biased_conductances, simulate_speed_motion, tree_potential, weak_bias_exponent, TreeMetricMeasure,
};
use rwre_core::treecore::{
    embed_brw, sample_gw_conditioned, GaussianSteps, OrderedTree, SpatialMarks, UniformSteps, DEFAULT_GW_ATTEMPTS,
};
use serde::{Deserialize, Serialize};

use crate::config::{AlphaRule, ExperimentConfig, Scenario, StepLawConfig};
use crate::error::{CliError, CliResult};

pub const STATS_FILE: &str = "stats.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAJECTORY_DIR: &str = "trajectories";

/// One line of `stats.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub scenario: Scenario,
    /// Ladder value: `m` for lattice scenarios, `n` for tree sizes, grid
    /// size for `crt_check`.
    pub scale: u64,
    pub replication: usize,
    pub seed: u64,
    pub stats: BTreeMap<String, f64>,
    /// Trajectory file, relative to the output directory.
    pub trajectory: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub config_toml: String,
    pub library_version: String,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    /// Every file written, relative to the output directory.
    pub outputs: Vec<String>,
}

/// Result of one `(rung, replication)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutput {
    pub record: StatsRecord,
    pub csv: String,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
}

pub fn trajectory_name(scenario: Scenario, scale: u64, replication: usize) -> String {
    format!("{TRAJECTORY_DIR}/{}_{scale}_r{replication}.csv", scenario.name())
}

/// Runs the experiment and writes its outputs under `opts.out_dir`.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<RunManifest> {
    let problems = config.validate();
    if !problems.is_empty() {
        return Err(CliError::Invalid(problems));
    }
    let start = Instant::now();
    let seeds = replication_seeds(config.seed, config.replications);
    let tasks: Vec<(usize, usize)> = (0..config.ladder.len())
        .flat_map(|k| (0..config.replications).map(move |r| (k, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let outputs: Vec<TaskOutput> =
        pool.install(|| tasks.par_iter().map(|&(k, r)| run_task(config, k, r)).collect::<CliResult<_>>())?;

    let dir = &opts.out_dir;
    let traj_dir = dir.join(TRAJECTORY_DIR);
    fs::create_dir_all(&traj_dir).map_err(|e| CliError::io(&traj_dir, e))?;
    let mut files = Vec::new();
    let mut stats = String::new();
    for out in &outputs {
        let line = serde_json::to_string(&out.record).map_err(|e| CliError::Serialize(e.to_string()))?;
        stats.push_str(&line);
        stats.push('\n');
        write_file(&dir.join(&out.record.trajectory), out.csv.as_bytes())?;
        files.push(out.record.trajectory.clone());
    }
    write_file(&dir.join(STATS_FILE), stats.as_bytes())?;
    files.push(STATS_FILE.to_string());
    files.push(MANIFEST_FILE.to_string());

    let manifest = RunManifest {
        config: config.clone(),
        config_toml: config.to_toml()?,
        library_version: rwre_core::VERSION.to_string(),
        seeds,
        workers: pool.current_num_threads(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs: files,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Serialize(e.to_string()))?;
    write_file(&dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(manifest)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

/// Recomputes rung `k`, replication `r` of `config`.
pub fn run_task(config: &ExperimentConfig, k: usize, r: usize) -> CliResult<TaskOutput> {
    let scale = config.ladder[k];
    let seed = replication_seeds(config.seed, r + 1)[r];
    let mut rng = stream(seed, k as u64);
    let wrap = |source| CliError::Run {
        scenario: config.scenario.name(),
        rung: scale,
        replication: r,
        source,
    };
    let (stats, csv) = match config.scenario {
        Scenario::Sinai => sinai(config, scale, &mut rng),
        Scenario::Barriers => barriers(config, scale, &mut rng),
        Scenario::BrwBias => brw_bias(config, scale, &mut rng),
        Scenario::Errw => errw(config, scale, &mut rng),
        Scenario::CrtCheck => crt_check(config, scale, &mut rng),
        Scenario::Brox => brox(config, scale, &mut rng),
    }
    .map_err(wrap)?;
    Ok(TaskOutput {
        record: StatsRecord {
            scenario: config.scenario,
            scale,
            replication: r,
            seed,
            stats: stats.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            trajectory: trajectory_name(config.scenario, scale, r),
        },
        csv,
    })
}

type Outcome = rwre_core::Result<(Vec<(&'static str, f64)>, String)>;

/// About `points` indices spread over `0..len`, always including the last.
fn thin(len: usize, points: usize) -> Vec<usize> {
    if len <= points {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..points - 1).map(|i| i * (len - 1) / (points - 1)).collect();
    idx.push(len - 1);
    idx.dedup();
    idx
}

fn lattice_walk(config: &ExperimentConfig, env: &Environment1D, m: u64, rng: &mut SimRng) -> Outcome {
    let steps = m * m;
    let every = (steps / config.model.trajectory_points as u64).max(1);
    let path = env.walk_kernel().run_path(0, steps, every, rng)?;
    let mf = m as f64;
    let mut csv = String::from("step,position,scaled_time,scaled_position\n");
    for &(t, x) in &path {
        writeln!(csv, "{t},{x},{},{}", t as f64 / (mf * mf), x as f64 / mf).unwrap();
    }
    let last = path.last().unwrap().1;
    let max_abs = path.iter().map(|(_, x)| x.unsigned_abs()).max().unwrap();
    Ok((
        vec![
            ("final_scaled", last as f64 / mf),
            ("max_abs_scaled", max_abs as f64 / mf),
            ("sigma2", env.sigma2().unwrap_or_else(|| env.estimate_sigma2())),
        ],
        csv,
    ))
}

fn window(config: &ExperimentConfig, m: u64) -> i64 {
    (config.model.window_factor * m as f64).ceil() as i64
}

fn sinai(config: &ExperimentConfig, m: u64, rng: &mut SimRng) -> Outcome {
    let w = window(config, m);
    let base = Environment1D::sample(&config.model.environment, -w, w, rng)?;
    let env = flatten(&base, m)?;
    lattice_walk(config, &env, m, rng)
}

fn barriers(config: &ExperimentConfig, m: u64, rng: &mut SimRng) -> Outcome {
    let w = window(config, m);
    let benv = barrier_env(config.model.lambda / m as f64, config.model.p, -w, w, rng)?;
    let marks = (-w..=w).filter(|&z| benv.xi(z).unwrap_or(false)).count();
    let (mut stats, csv) = lattice_walk(config, &benv.to_environment(), m, rng)?;
    stats.push(("marks_per_unit", marks as f64 / (2 * w + 1) as f64 * m as f64));
    Ok((stats, csv))
}

fn gw_tree(config: &ExperimentConfig, n: u64, rng: &mut SimRng) -> rwre_core::Result<OrderedTree> {
    sample_gw_conditioned(&config.model.offspring, n as usize, DEFAULT_GW_ATTEMPTS, rng)
}

fn embed(config: &ExperimentConfig, tree: &OrderedTree, rng: &mut SimRng) -> rwre_core::Result<SpatialMarks> {
    let d = config.model.dim;
    match config.model.step_law {
        StepLawConfig::Gaussian { sd } => embed_brw(tree, &GaussianSteps::isotropic(d, sd)?, rng),
        StepLawConfig::Uniform { half_width } => embed_brw(tree, &UniformSteps { dim: d, half_width }, rng),
    }
}

fn brw_bias(config: &ExperimentConfig, n: u64, rng: &mut SimRng) -> Outcome {
    let tree = gw_tree(config, n, rng)?.with_planted(true);
    let marks = embed(config, &tree, rng)?;
    let cond = biased_conductances(&tree, &marks, config.model.beta, weak_bias_exponent(n as usize), None)?;
    let mm = TreeMetricMeasure::new(tree_potential(&cond)).weakly_biased();
    let path = simulate_speed_motion(&mm, tree.root(), config.model.horizon, rng)?;
    let nf = n as f64;
    let depth = |u: usize| if u < tree.n() { tree.depth(u) as f64 + 1.0 } else { 0.0 };
    let phi1 = |u: usize| if u < tree.n() { marks.first(u) } else { 0.0 };
    let last = *path.vertices.last().unwrap();
    let mut csv = String::from("t,vertex,depth");
    for k in 1..=marks.dim() {
        write!(csv, ",phi{k}").unwrap();
    }
    csv.push('\n');
    for i in thin(path.vertices.len(), config.model.trajectory_points) {
        let u = path.vertices[i];
        write!(csv, "{},{},{}", path.times[i], u, depth(u)).unwrap();
        for k in 0..marks.dim() {
            let x = if u < tree.n() { marks.position(u)[k] } else { 0.0 };
            write!(csv, ",{x}").unwrap();
        }
        csv.push('\n');
    }
    Ok((
        vec![
            ("final_depth_scaled", depth(last) / nf.sqrt()),
            ("final_phi1_scaled", phi1(last) / nf.powf(0.25)),
            ("height_scaled", tree.height() as f64 / nf.sqrt()),
            ("jumps", (path.vertices.len() - 1) as f64),
            ("root_total_rate", mm.total_rate(tree.root())),
        ],
        csv,
    ))
}

fn errw(config: &ExperimentConfig, n: u64, rng: &mut SimRng) -> Outcome {
    let tree = gw_tree(config, n, rng)?;
    let a = match config.model.alpha0 {
        AlphaRule::SqrtHalf => default_weights(n as usize)?,
        AlphaRule::Constant { value } => value,
    };
    let steps = config.model.steps_per_vertex * n as usize;
    let (path, _) = simulate_errw(&tree, &vec![a; tree.n()], tree.root(), steps, rng)?;
    let mut visited = vec![false; tree.n()];
    path.iter().for_each(|&u| visited[u] = true);
    let nf = n as f64;
    let mut csv = String::from("step,vertex,depth\n");
    for i in thin(path.len(), config.model.trajectory_points) {
        writeln!(csv, "{i},{},{}", path[i], tree.depth(path[i])).unwrap();
    }
    let max_depth = path.iter().map(|&u| tree.depth(u)).max().unwrap();
    Ok((
        vec![
            ("alpha0", a),
            ("final_depth_scaled", tree.depth(*path.last().unwrap()) as f64 / nf.sqrt()),
            ("max_depth_scaled", max_depth as f64 / nf.sqrt()),
            ("visited_fraction", visited.iter().filter(|&&v| v).count() as f64 / nf),
        ],
        csv,
    ))
}

fn crt_check(config: &ExperimentConfig, n: u64, rng: &mut SimRng) -> Outcome {
    let n = n as usize;
    let e = sample_excursion(n, rng)?;
    let u = rng.random_range(0..n);
    let k = config.model.segments;
    let stick = stick_breaking(rng, k)?;
    let leaf = rng.random_range(0..k);
    let mut csv = String::from("t,g\n");
    for i in thin(n + 1, config.model.trajectory_points) {
        writeln!(csv, "{},{}", e.time_of(i), e.value(i)).unwrap();
    }
    Ok((
        vec![
            ("excursion_height", e.values().iter().cloned().fold(0.0, f64::max)),
            ("excursion_uniform_depth", 2.0 * e.value(u)),
            ("stick_leaf_depth", stick.tip_depth(leaf)),
            ("stick_total_length", stick.total_length()),
        ],
        csv,
    ))
}

fn brox(config: &ExperimentConfig, m: u64, rng: &mut SimRng) -> Outcome {
    let h = 1.0 / m as f64;
    let w = make_potential(
        PotentialKind::TwoSidedBm,
        PotentialParams::default(),
        PotentialDomain::Line {
            half_width: config.model.half_width,
            mesh: h,
        },
        rng,
    )?;
    let path = brox_simulate(&w, config.model.horizon, h, rng)?;
    let mut csv = String::from("t,x\n");
    for i in thin(path.times.len(), config.model.trajectory_points) {
        writeln!(csv, "{},{}", path.times[i], path.positions[i]).unwrap();
    }
    let last = *path.positions.last().unwrap();
    let max_abs = path.positions.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok((
        vec![
            ("final", last),
            ("max_abs", max_abs),
            ("jumps", (path.times.len() - 1) as f64),
        ],
        csv,
    ))
}
