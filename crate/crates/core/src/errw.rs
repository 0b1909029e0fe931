//! Edge-reinforced random walk on trees and its random environment
//! representation.
//!
//! Edge data is stored at the lower endpoint; the root slot is unused.
//! The walk lives on the tree's own edges, so the root of an ERRW tree
//! has only its children as neighbors.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::treecore::OrderedTree;

/// Initial weight `√n / 2` for trees of size `n`.
pub fn default_weights(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("tree size must be >= 1"));
    }
    Ok(0.5 * (n as f64).sqrt())
}

fn check_weights(tree: &OrderedTree, w: &[f64], what: &str) -> Result<()> {
    if w.len() != tree.n() {
        return Err(Error::Consistency(format!("one {what} per vertex expected")));
    }
    for u in 0..tree.n() {
        if u != tree.root() && !(w[u] > 0.0 && w[u].is_finite()) {
            return Err(invalid(format!("{what} above vertex {u} must be positive")));
        }
    }
    Ok(())
}

fn neighbors(tree: &OrderedTree, x: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    // (neighbor, edge slot)
    tree.parent(x)
        .map(|p| (p, x))
        .into_iter()
        .chain(tree.children(x).iter().map(|&c| (c, c)))
}

/// Counters and position of a running ERRW. The counter of edge `e` is
/// `initial[e] + crossings[e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrwState {
    pub initial: Vec<f64>,
    pub crossings: Vec<u64>,
    pub current: usize,
    pub time: usize,
}

impl ErrwState {
    pub fn new(tree: &OrderedTree, alpha0: &[f64], start: usize) -> Result<Self> {
        check_weights(tree, alpha0, "initial weight")?;
        if start >= tree.n() {
            return Err(invalid("start vertex outside the tree"));
        }
        let mut initial = alpha0.to_vec();
        initial[tree.root()] = 0.0;
        Ok(Self {
            crossings: vec![0; initial.len()],
            initial,
            current: start,
            time: 0,
        })
    }

    /// `N(e)`.
    pub fn counter(&self, e: usize) -> f64 {
        self.initial[e] + self.crossings[e] as f64
    }

    pub fn counters(&self) -> Vec<f64> {
        (0..self.initial.len()).map(|e| self.counter(e)).collect()
    }

    /// Probabilities of the next move from the current vertex.
    pub fn transition_probs(&self, tree: &OrderedTree) -> Vec<(usize, f64)> {
        let nb: Vec<(usize, usize)> = neighbors(tree, self.current).collect();
        let total: f64 = nb.iter().map(|&(_, e)| self.counter(e)).sum();
        nb.into_iter().map(|(y, e)| (y, self.counter(e) / total)).collect()
    }

    pub fn step<R: Rng + ?Sized>(&mut self, tree: &OrderedTree, rng: &mut R) -> usize {
        let x = self.current;
        let total: f64 = neighbors(tree, x).map(|(_, e)| self.counter(e)).sum();
        let mut u = rng.random::<f64>() * total;
        let mut chosen = None;
        for (y, e) in neighbors(tree, x) {
            chosen = Some((y, e));
            u -= self.counter(e);
            if u < 0.0 {
                break;
            }
        }
        let (y, e) = chosen.expect("vertex has a neighbor");
        self.crossings[e] += 1;
        self.current = y;
        self.time += 1;
        y
    }
}

/// Runs the reinforced walk; returns the visited vertices and the final state.
pub fn simulate_errw<R: Rng + ?Sized>(
    tree: &OrderedTree,
    alpha0: &[f64],
    start: usize,
    steps: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, ErrwState)> {
    let mut state = ErrwState::new(tree, alpha0, start)?;
    if steps > 0 && tree.n() < 2 {
        return Err(invalid("the walk needs at least one edge"));
    }
    let mut path = Vec::with_capacity(steps + 1);
    path.push(start);
    for _ in 0..steps {
        path.push(state.step(tree, rng));
    }
    Ok((path, state))
}

/// Exact law of the first `steps` moves, enumerated trajectory by
/// trajectory. Limited to trees with at most 6 vertices and 6 steps.
pub fn exact_law(tree: &OrderedTree, alpha0: &[f64], start: usize, steps: usize) -> Result<Vec<(Vec<usize>, f64)>> {
    if tree.n() > 6 || steps > 6 {
        return Err(invalid("enumeration limited to 6 vertices and 6 steps"));
    }
    if steps > 0 && tree.n() < 2 {
        return Err(invalid("the walk needs at least one edge"));
    }
    let state = ErrwState::new(tree, alpha0, start)?;
    let mut out = Vec::new();
    let mut path = vec![start];
    enumerate(tree, state, steps, 1.0, &mut path, &mut out);
    Ok(out)
}

fn enumerate(
    tree: &OrderedTree,
    state: ErrwState,
    left: usize,
    p: f64,
    path: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, f64)>,
) {
    if left == 0 {
        out.push((path.clone(), p));
        return;
    }
    for (y, q) in state.transition_probs(tree) {
        let mut next = state.clone();
        let e = if tree.parent(state.current) == Some(y) { state.current } else { y };
        next.crossings[e] += 1;
        next.current = y;
        next.time += 1;
        path.push(y);
        enumerate(tree, next, left - 1, p * q, path, out);
        path.pop();
    }
}

/// Independent `Gamma(α₀(e), 1)` weights per edge.
pub fn sample_gamma_weights<R: Rng + ?Sized>(tree: &OrderedTree, alpha0: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_weights(tree, alpha0, "initial weight")?;
    let mut out = vec![0.0; tree.n()];
    for u in 0..tree.n() {
        if u != tree.root() {
            out[u] = Gamma::new(alpha0[u], 1.0)
                .map_err(|e| invalid(e.to_string()))?
                .sample(rng);
        }
    }
    Ok(out)
}

/// Log of the density `√(α/2π) exp(-2α sinh²(x/2) + x/2)`.
pub fn sinh_log_density(alpha: f64, x: f64) -> f64 {
    let s = (0.5 * x).sinh();
    0.5 * (alpha / (2.0 * std::f64::consts::PI)).ln() - 2.0 * alpha * s * s + 0.5 * x
}

/// `E[ω]` when `α ~ Gamma(a, 1)` and `ω | α` has the sinh density.
pub fn mixed_omega_mean(a: f64) -> f64 {
    use statrs::function::gamma::digamma;
    0.5 * (digamma(0.5 * (a + 1.0)) - digamma(0.5 * a))
}

/// `Var[ω]` under the same mixture.
pub fn mixed_omega_variance(a: f64) -> f64 {
    use crate::env1d::trigamma;
    0.25 * (trigamma(0.5 * (a + 1.0)) + trigamma(0.5 * a))
}

pub const DEFAULT_GRID_THRESHOLD: f64 = 0.5;
const GRID_POINTS: usize = 4096;

/// Proposal and acceptance counts of the rejection sampler.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SinhStats {
    pub proposals: u64,
    pub accepted: u64,
}

/// Sampler for the sinh density. Gaussian-envelope rejection for
/// `α >= grid_threshold`, tabulated CDF inversion below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinhSampler {
    pub grid_threshold: f64,
}

impl Default for SinhSampler {
    fn default() -> Self {
        Self {
            grid_threshold: DEFAULT_GRID_THRESHOLD,
        }
    }
}

impl SinhSampler {
    pub fn sample<R: Rng + ?Sized>(&self, alpha: f64, rng: &mut R) -> Result<f64> {
        self.sample_with_stats(alpha, rng, &mut SinhStats::default())
    }

    pub fn sample_with_stats<R: Rng + ?Sized>(&self, alpha: f64, rng: &mut R, stats: &mut SinhStats) -> Result<f64> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("sinh parameter {alpha} must be positive")));
        }
        if alpha < self.grid_threshold {
            return Ok(grid_sample(alpha, rng));
        }
        let sa = alpha.sqrt();
        loop {
            stats.proposals += 1;
            let z: f64 = rng.sample(StandardNormal);
            let x = z / sa + 0.5 / alpha;
            let s = (0.5 * x).sinh();
            // log of target / (e^{1/(8α)} · proposal)
            let log_acc = alpha * (0.5 * x * x - 2.0 * s * s);
            if rng.random::<f64>().ln() < log_acc {
                stats.accepted += 1;
                return Ok(x);
            }
        }
    }
}

pub fn sample_sinh<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<f64> {
    SinhSampler::default().sample(alpha, rng)
}

/// Tabulated CDF of the sinh density on a window outside which the density
/// is below `e^{-40}` of its mode.
#[derive(Debug, Clone)]
pub struct SinhTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl SinhTable {
    pub fn new(alpha: f64) -> Self {
        let mode = (0.5 / alpha).asinh();
        let top = sinh_log_density(alpha, mode);
        let mut step = 0.25 + 1.0 / alpha.sqrt();
        let mut lo = mode;
        while sinh_log_density(alpha, lo) > top - 40.0 {
            lo -= step;
        }
        let mut hi = mode;
        while sinh_log_density(alpha, hi) > top - 40.0 {
            hi += step;
        }
        step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..GRID_POINTS).map(|k| lo + k as f64 * step).collect();
        let dens: Vec<f64> = xs.iter().map(|&x| (sinh_log_density(alpha, x) - top).exp()).collect();
        let mut cdf = vec![0.0; GRID_POINTS];
        for k in 1..GRID_POINTS {
            cdf[k] = cdf[k - 1] + 0.5 * step * (dens[k] + dens[k - 1]);
        }
        let total = cdf[GRID_POINTS - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        Self { xs, cdf }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[GRID_POINTS - 1] {
            return 1.0;
        }
        let k = self.xs.partition_point(|&g| g <= x) - 1;
        let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.cdf[k] + w * (self.cdf[k + 1] - self.cdf[k])
    }

    pub fn inverse(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= u).clamp(1, GRID_POINTS - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[k - 1] + w * (self.xs[k] - self.xs[k - 1])
    }
}

fn grid_sample<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    SinhTable::new(alpha).inverse(rng.random::<f64>())
}

/// Gamma weights, sinh increments and the field `U(u) = Σ_{path} ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinhEnvironment {
    tree: OrderedTree,
    alpha: Vec<f64>,
    omega: Vec<f64>,
    u: Vec<f64>,
}

/// Field `U` from per-edge increments; `U(root) = 0`.
pub fn build_field(tree: &OrderedTree, omega: &[f64]) -> Result<Vec<f64>> {
    if omega.len() != tree.n() {
        return Err(Error::Consistency("one increment per vertex expected".into()));
    }
    let mut u = vec![0.0; tree.n()];
    for x in tree.preorder() {
        if let Some(p) = tree.parent(x) {
            u[x] = u[p] + omega[x];
        }
    }
    Ok(u)
}

impl SinhEnvironment {
    pub fn new(tree: &OrderedTree, alpha: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        check_weights(tree, &alpha, "gamma weight")?;
        let u = build_field(tree, &omega)?;
        Ok(Self {
            tree: tree.clone(),
            alpha,
            omega,
            u,
        })
    }

    /// Gamma weights with parameters `alpha0`, then sinh increments.
    pub fn sample<R: Rng + ?Sized>(tree: &OrderedTree, alpha0: &[f64], sampler: &SinhSampler, rng: &mut R) -> Result<Self> {
        let alpha = sample_gamma_weights(tree, alpha0, rng)?;
        let mut omega = vec![0.0; tree.n()];
        for x in 0..tree.n() {
            if x != tree.root() {
                omega[x] = sampler.sample(alpha[x], rng)?;
            }
        }
        Self::new(tree, alpha, omega)
    }

    pub fn alpha(&self, e: usize) -> f64 {
        self.alpha[e]
    }

    pub fn omega(&self, e: usize) -> f64 {
        self.omega[e]
    }

    pub fn field(&self, u: usize) -> f64 {
        self.u[u]
    }

    pub fn fields(&self) -> &[f64] {
        &self.u
    }

    /// `U(ū) + U(u) - log α({ū, u})`.
    pub fn potential(&self, u: usize) -> Option<f64> {
        self.tree.parent(u).map(|p| self.u[p] + self.u[u] - self.alpha[u].ln())
    }

    /// Unnormalized weight of the move `x -> y` along edge slot `e`.
    pub fn weight(&self, x: usize, y: usize, e: usize) -> f64 {
        self.alpha[e] * (-(self.u[x] + self.u[y])).exp()
    }

    /// Transition probabilities out of `x`.
    pub fn transition_probs(&self, x: usize) -> Vec<(usize, f64)> {
        let w: Vec<(usize, f64)> = neighbors(&self.tree, x).map(|(y, e)| (y, self.weight(x, y, e))).collect();
        let total: f64 = w.iter().map(|(_, v)| v).sum();
        w.into_iter().map(|(y, v)| (y, v / total)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "edge,alpha,omega,U")?;
        for x in 0..self.tree.n() {
            if x != self.tree.root() {
                writeln!(w, "{},{},{},{}", x, self.alpha[x], self.omega[x], self.u[x])?;
            }
        }
        Ok(())
    }
}

/// Draws `U(u)` only, sampling just the edges on the root path of `u`.
pub fn sample_field_at<R: Rng + ?Sized>(
    tree: &OrderedTree,
    alpha0: &[f64],
    u: usize,
    sampler: &SinhSampler,
    rng: &mut R,
) -> Result<f64> {
    check_weights(tree, alpha0, "initial weight")?;
    let mut acc = 0.0;
    let mut x = u;
    while let Some(p) = tree.parent(x) {
        let a = Gamma::new(alpha0[x], 1.0).map_err(|e| invalid(e.to_string()))?.sample(rng);
        acc += sampler.sample(a, rng)?;
        x = p;
    }
    Ok(acc)
}

/// Markov chain in a fixed environment.
pub fn simulate_mixture<R: Rng + ?Sized>(
    env: &SinhEnvironment,
    start: usize,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if start >= env.tree.n() {
        return Err(invalid("start vertex outside the tree"));
    }
    if steps > 0 && env.tree.n() < 2 {
        return Err(invalid("the walk needs at least one edge"));
    }
    let table: Vec<Vec<(usize, f64)>> = (0..env.tree.n()).map(|x| env.transition_probs(x)).collect();
    let mut path = Vec::with_capacity(steps + 1);
    path.push(start);
    let mut x = start;
    for _ in 0..steps {
        let mut u = rng.random::<f64>();
        let row = &table[x];
        let mut next = row[row.len() - 1].0;
        for &(y, p) in row {
            u -= p;
            if u < 0.0 {
                next = y;
                break;
            }
        }
        x = next;
        path.push(x);
    }
    Ok(path)
}
