//! Experiment configuration.
//!
//! A configuration is a TOML document:
//!
//! ```toml
//! scenario = "sinai"        # sinai | barriers | brw_bias | errw | crt_check | brox
//! seed = 42
//! replications = 4
//! ladder = [100, 1000]      # m (lattice scale) or n (tree size), increasing
//! output_dir = "runs/sinai" # optional; the --out flag takes precedence
//!
//! [model]                   # every key optional
//! environment = { kind = "log_normal", sigma = 1.0 }
//! beta = 2.0
//! p = 0.3
//! lambda = 1.0
//! alpha0 = { rule = "sqrt_half" }
//! offspring = { law = { kind = "geometric" } }
//! dim = 1
//! step_law = { kind = "gaussian", sd = 1.0 }
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rwre_core::env1d::EnvironmentLaw;
use rwre_core::treecore::OffspringDistribution;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Flattened i.i.d. environment on `ℤ`, walk run for `m²` steps.
    Sinai,
    /// Barrier environment with marks of probability `λ/m`, `m²` steps.
    Barriers,
    /// Weakly biased walk on a Galton–Watson tree embedded by a branching
    /// random walk.
    BrwBias,
    /// Edge-reinforced walk on a Galton–Watson tree.
    Errw,
    /// Excursion-coded and stick-breaking trees side by side.
    CrtCheck,
    /// Brox diffusion on the mesh `1/m`.
    Brox,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Sinai,
        Scenario::Barriers,
        Scenario::BrwBias,
        Scenario::Errw,
        Scenario::CrtCheck,
        Scenario::Brox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Sinai => "sinai",
            Scenario::Barriers => "barriers",
            Scenario::BrwBias => "brw_bias",
            Scenario::Errw => "errw",
            Scenario::CrtCheck => "crt_check",
            Scenario::Brox => "brox",
        }
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Scenario::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
            .ok_or_else(|| CliError::Config(format!("unknown scenario '{s}'")))
    }
}

/// Initial ERRW weight on every edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum AlphaRule {
    /// `√n / 2` for a tree with `n` vertices.
    SqrtHalf,
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepLawConfig {
    /// Isotropic Gaussian steps with standard deviation `sd` per coordinate.
    Gaussian { sd: f64 },
    /// Uniform steps on `[-half_width, half_width]^d`.
    Uniform { half_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Law of the base environment (sinai).
    pub environment: EnvironmentLaw,
    /// Lattice window half-width in units of `m` (sinai, barriers).
    pub window_factor: f64,
    /// Bias base `β ≥ 1` (brw_bias).
    pub beta: f64,
    /// Rightward probability at barriers (barriers).
    pub p: f64,
    /// Leftward probability at barriers; must equal `1 - p` when given.
    pub q: Option<f64>,
    /// Barrier intensity: marks have probability `λ/m` (barriers); also
    /// the Poisson rate of the poisson-log potential.
    pub lambda: f64,
    pub alpha0: AlphaRule,
    pub offspring: OffspringDistribution,
    /// Embedding dimension (brw_bias).
    pub dim: usize,
    pub step_law: StepLawConfig,
    /// Continuous time horizon (brw_bias, brox).
    pub horizon: f64,
    /// Reinforced steps per vertex of the tree (errw).
    pub steps_per_vertex: usize,
    /// Stick-breaking segments (crt_check).
    pub segments: usize,
    /// Potential window half-width (brox).
    pub half_width: f64,
    /// Rows written per trajectory, at most.
    pub trajectory_points: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            environment: EnvironmentLaw::LogNormal { sigma: 1.0 },
            window_factor: 20.0,
            beta: 2.0,
            p: 0.3,
            q: None,
            lambda: 1.0,
            alpha0: AlphaRule::SqrtHalf,
            offspring: OffspringDistribution::geometric(),
            dim: 1,
            step_law: StepLawConfig::Gaussian { sd: 1.0 },
            horizon: 1.0,
            steps_per_vertex: 10,
            segments: 50,
            half_width: 10.0,
            trajectory_points: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    #[serde(default = "one")]
    pub replications: usize,
    pub ladder: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub model: ModelParams,
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, seed: u64, ladder: Vec<u64>) -> Self {
        Self {
            scenario,
            seed,
            replications: 1,
            ladder,
            output_dir: None,
            model: ModelParams::default(),
        }
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        // a bad scenario name gets its own message rather than serde's
        if let Ok(table) = text.parse::<toml::Table>() {
            if let Some(toml::Value::String(s)) = table.get("scenario") {
                s.parse::<Scenario>()?;
            }
        }
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Violated invariants, one message each; empty when the configuration
    /// can be run.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = &self.model;
        if self.ladder.is_empty() {
            out.push("ladder is empty".to_string());
        }
        if self.ladder.contains(&0) {
            out.push("ladder values must be positive".to_string());
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            out.push("ladder must be strictly increasing".to_string());
        }
        if self.replications == 0 {
            out.push("replications must be >= 1".to_string());
        }
        if m.trajectory_points < 2 {
            out.push("trajectory_points must be >= 2".to_string());
        }
        match self.scenario {
            Scenario::Sinai => {
                if let Err(e) = m.environment.validate() {
                    out.push(e.to_string());
                }
                if !(m.window_factor > 0.0) {
                    out.push("window_factor must be positive".to_string());
                }
            }
            Scenario::Barriers => {
                if !(m.p > 0.0 && m.p < 1.0) {
                    out.push(format!("p = {} must lie in (0, 1)", m.p));
                }
                if let Some(q) = m.q {
                    if (m.p + q - 1.0).abs() > 1e-12 {
                        out.push(format!("q = {q} must equal 1 - p"));
                    }
                }
                if !(m.lambda > 0.0) {
                    out.push("lambda must be positive".to_string());
                }
                if let Some(&first) = self.ladder.first() {
                    if m.lambda > first as f64 {
                        out.push(format!("lambda / m = {} exceeds 1 at m = {first}", m.lambda / first as f64));
                    }
                }
                if !(m.window_factor > 0.0) {
                    out.push("window_factor must be positive".to_string());
                }
            }
            Scenario::BrwBias => {
                if !(m.beta >= 1.0 && m.beta.is_finite()) {
                    out.push(format!("beta = {} must be >= 1", m.beta));
                }
                if m.dim == 0 {
                    out.push("dim must be >= 1".to_string());
                }
                self.check_offspring(&mut out);
                self.check_step_law(&mut out);
                if !(m.horizon > 0.0) {
                    out.push("horizon must be positive".to_string());
                }
            }
            Scenario::Errw => {
                self.check_offspring(&mut out);
                if let AlphaRule::Constant { value } = m.alpha0 {
                    if !(value > 0.0 && value.is_finite()) {
                        out.push("alpha0 must be positive".to_string());
                    }
                }
                if self.ladder.first() == Some(&1) {
                    out.push("errw needs trees with at least 2 vertices".to_string());
                }
            }
            Scenario::CrtCheck => {
                if self.ladder.first() == Some(&1) {
                    out.push("excursion grids need at least 2 steps".to_string());
                }
                if m.segments == 0 {
                    out.push("segments must be >= 1".to_string());
                }
            }
            Scenario::Brox => {
                if !(m.horizon > 0.0 && m.half_width > 0.0) {
                    out.push("horizon and half_width must be positive".to_string());
                }
            }
        }
        out
    }

    fn check_offspring(&self, out: &mut Vec<String>) {
        let o = &self.model.offspring;
        if let Err(e) = o.validate() {
            out.push(format!("offspring law: {e}"));
            return;
        }
        let g = o.support_gcd() as u64;
        for &n in &self.ladder {
            if g > 1 && n.saturating_sub(1) % g != 0 {
                out.push(format!("no tree with {n} vertices under an offspring law supported on multiples of {g}"));
            }
        }
    }

    fn check_step_law(&self, out: &mut Vec<String>) {
        match self.model.step_law {
            StepLawConfig::Gaussian { sd } if !(sd > 0.0) => out.push("step sd must be positive".to_string()),
            StepLawConfig::Uniform { half_width } if !(half_width > 0.0) => {
                out.push("step half_width must be positive".to_string())
            }
            _ => {}
        }
    }
}
