//! Finite pointed metric measure spaces, correspondences and couplings,
//! and the distance bounds built from them.
//!
//! The bound reported for two spaces `X`, `X'` with correspondence `C` and
//! coupling `π` is
//!
//! `½ dis(C) + D(π; ν, ν') + π(Cᶜ) + sup_{(z,z') ∈ C} |φ(z) − φ'(z')|`.
//!
//! The discrepancy `D` is the sum of absolute differences of each marginal
//! to its target measure, multiplied by [`TV_FACTOR`] (= 1).

use rand::{Rng, RngCore};
use serde::Serialize;

use crate::chain::Law1D;
use crate::continuum::{brox_law, make_potential, ContinuumPotential, PotentialDomain, PotentialKind, PotentialParams};
use crate::env1d::{flatten, potential1d, Environment1D, Potential1D};
use crate::error::{invalid, Error, Result};
use crate::stats;
use crate::treecore::{contour, OrderedTree};

/// Factor applied to `Σ |marginal − target|` in the discrepancy.
pub const TV_FACTOR: f64 = 1.0;
/// Tolerance for the metric axioms.
pub const METRIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FinitePointedMMSpace {
    n: usize,
    root: usize,
    dist: Vec<f64>,
    mass: Vec<f64>,
    marks: Option<(usize, Vec<f64>)>,
}

impl FinitePointedMMSpace {
    /// `dist` is the row-major `n × n` distance matrix.
    pub fn new(dist: Vec<f64>, mass: Vec<f64>, root: usize) -> Result<Self> {
        let n = mass.len();
        if n == 0 {
            return Err(Error::EmptyInput("metric measure space"));
        }
        if dist.len() != n * n || root >= n {
            return Err(invalid("distance matrix or root does not match the point count"));
        }
        if mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(invalid("masses must be finite and nonnegative"));
        }
        let d = |i: usize, j: usize| dist[i * n + j];
        for i in 0..n {
            if d(i, i).abs() > METRIC_TOL {
                return Err(Error::Consistency(format!("d({i},{i}) != 0")));
            }
            for j in 0..n {
                if !(d(i, j) >= -METRIC_TOL) || (d(i, j) - d(j, i)).abs() > METRIC_TOL {
                    return Err(Error::Consistency(format!("d({i},{j}) not symmetric and nonnegative")));
                }
                for k in 0..n {
                    if d(i, k) > d(i, j) + d(j, k) + METRIC_TOL {
                        return Err(Error::Consistency(format!("triangle inequality fails at ({i},{j},{k})")));
                    }
                }
            }
        }
        Ok(Self {
            n,
            root,
            dist,
            mass,
            marks: None,
        })
    }

    /// Attaches marks in `ℝ^dim`, `dim` coordinates per point.
    pub fn with_marks(mut self, dim: usize, marks: Vec<f64>) -> Result<Self> {
        if dim == 0 || marks.len() != dim * self.n {
            return Err(invalid("marks need dim coordinates per point"));
        }
        self.marks = Some((dim, marks));
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mark(&self, i: usize) -> Option<&[f64]> {
        self.marks.as_ref().map(|(d, m)| &m[i * d..(i + 1) * d])
    }

    /// Closed ball of radius `r` around the root, with the retained
    /// original indices.
    pub fn restrict(&self, r: f64) -> (Self, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n).filter(|&i| self.dist(self.root, i) <= r).collect();
        let k = keep.len();
        let mut dist = vec![0.0; k * k];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                dist[a * k + b] = self.dist(i, j);
            }
        }
        let marks = self.marks.as_ref().map(|(d, _)| {
            (*d, keep.iter().flat_map(|&i| self.mark(i).unwrap().to_vec()).collect())
        });
        let space = Self {
            n: k,
            root: keep.iter().position(|&i| i == self.root).unwrap(),
            dist,
            mass: keep.iter().map(|&i| self.mass[i]).collect(),
            marks,
        };
        (space, keep)
    }
}

/// Set of index pairs, surjective onto both sides and containing the
/// root pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    pairs: Vec<(usize, usize)>,
    left: usize,
    right: usize,
}

impl Correspondence {
    pub fn new(mut pairs: Vec<(usize, usize)>, left: usize, right: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("correspondence"));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut hit_l = vec![false; left];
        let mut hit_r = vec![false; right];
        for &(a, b) in &pairs {
            if a >= left || b >= right {
                return Err(invalid(format!("pair ({a},{b}) out of range")));
            }
            hit_l[a] = true;
            hit_r[b] = true;
        }
        if hit_l.iter().chain(&hit_r).any(|h| !h) {
            return Err(Error::Consistency("correspondence is not surjective".into()));
        }
        Ok(Self { pairs, left, right })
    }

    /// All pairs.
    pub fn full(left: usize, right: usize) -> Result<Self> {
        Self::new((0..left).flat_map(|a| (0..right).map(move |b| (a, b))).collect(), left, right)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (i, i)).collect(), n, n)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }
}

/// Nonnegative joint weights over point pairs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    left: usize,
    right: usize,
    joint: Vec<f64>,
}

impl Coupling {
    pub fn new(left: usize, right: usize, joint: Vec<f64>) -> Result<Self> {
        if joint.len() != left * right {
            return Err(invalid("coupling shape mismatch"));
        }
        if joint.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("coupling weights must be finite and nonnegative"));
        }
        Ok(Self { left, right, joint })
    }

    /// `π(i, i) = ν(i)`.
    pub fn diagonal(mass: &[f64]) -> Result<Self> {
        let n = mass.len();
        let mut joint = vec![0.0; n * n];
        (0..n).for_each(|i| joint[i * n + i] = mass[i]);
        Self::new(n, n, joint)
    }

    /// `ν ⊗ ν' / |ν'|`.
    pub fn product(a: &[f64], b: &[f64]) -> Result<Self> {
        let total: f64 = b.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("second measure has no mass"));
        }
        Self::new(a.len(), b.len(), a.iter().flat_map(|x| b.iter().map(move |y| x * y / total)).collect())
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.joint[i * self.right + j]
    }

    pub fn first_marginal(&self) -> Vec<f64> {
        self.joint.chunks(self.right).map(|r| r.iter().sum()).collect()
    }

    pub fn second_marginal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.right];
        for row in self.joint.chunks(self.right) {
            m.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        }
        m
    }

    /// `π(Cᶜ)`.
    pub fn mass_outside(&self, c: &Correspondence) -> f64 {
        let mut s = 0.0;
        for i in 0..self.left {
            for j in 0..self.right {
                let w = self.weight(i, j);
                if w > 0.0 && !c.contains((i, j)) {
                    s += w;
                }
            }
        }
        s
    }
}

fn check_shapes(c: &Correspondence, x: &FinitePointedMMSpace, y: &FinitePointedMMSpace) -> Result<()> {
    if c.left != x.n || c.right != y.n {
        return Err(invalid("correspondence does not match the spaces"));
    }
    Ok(())
}

/// `sup |r(x, y) − r'(x', y')|` over pairs of pairs in `C`.
pub fn distortion(c: &Correspondence, x: &FinitePointedMMSpace, y: &FinitePointedMMSpace) -> Result<f64> {
    check_shapes(c, x, y)?;
    let p = &c.pairs;
    let mut best = 0.0f64;
    for (k, &(a, b)) in p.iter().enumerate() {
        for &(a2, b2) in &p[k + 1..] {
            best = best.max((x.dist(a, a2) - y.dist(b, b2)).abs());
        }
    }
    Ok(best)
}

/// `TV_FACTOR · (Σ|π₁ − ν| + Σ|π₂ − ν'|)`.
pub fn discrepancy(pi: &Coupling, nu: &[f64], nu2: &[f64]) -> Result<f64> {
    if nu.len() != pi.left || nu2.len() != pi.right {
        return Err(invalid("measure shapes do not match the coupling"));
    }
    Ok(TV_FACTOR * (l1(&pi.first_marginal(), nu) + l1(&pi.second_marginal(), nu2)))
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Terms of the distance bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GhBound {
    pub distortion: f64,
    pub discrepancy: f64,
    pub unmatched: f64,
    pub marks: f64,
    pub total: f64,
}

impl GhBound {
    fn from_terms(distortion: f64, discrepancy: f64, unmatched: f64, marks: f64) -> Self {
        Self {
            distortion,
            discrepancy,
            unmatched,
            marks,
            total: 0.5 * distortion + discrepancy + unmatched + marks,
        }
    }
}

pub fn spatial_gh_bound(
    x: &FinitePointedMMSpace,
    y: &FinitePointedMMSpace,
    c: &Correspondence,
    pi: &Coupling,
) -> Result<GhBound> {
    check_shapes(c, x, y)?;
    if !c.contains((x.root, y.root)) {
        return Err(Error::Consistency("correspondence misses the root pair".into()));
    }
    let marks = match (&x.marks, &y.marks) {
        (Some((d1, _)), Some((d2, _))) if d1 != d2 => return Err(invalid("mark dimensions differ")),
        (Some(_), Some(_)) => c
            .pairs
            .iter()
            .map(|&(a, b)| euclid(x.mark(a).unwrap(), y.mark(b).unwrap()))
            .fold(0.0, f64::max),
        _ => 0.0,
    };
    Ok(GhBound::from_terms(
        distortion(c, x, y)?,
        discrepancy(pi, &x.mass, &y.mass)?,
        pi.mass_outside(c),
        marks,
    ))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Smallest bound over every correspondence containing the root pair, for
/// a fixed coupling. Exhaustive; at most 3 points per side.
pub fn brute_force_min_bound(
    x: &FinitePointedMMSpace,
    y: &FinitePointedMMSpace,
    pi: &Coupling,
) -> Result<(Correspondence, GhBound)> {
    if x.n > 3 || y.n > 3 {
        return Err(invalid("exhaustive search is limited to 3-point spaces"));
    }
    let all: Vec<(usize, usize)> = (0..x.n).flat_map(|a| (0..y.n).map(move |b| (a, b))).collect();
    let mut best: Option<(Correspondence, GhBound)> = None;
    for mask in 1u32..(1 << all.len()) {
        let pairs: Vec<_> = all.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, p)| *p).collect();
        if !pairs.contains(&(x.root, y.root)) {
            continue;
        }
        let Ok(c) = Correspondence::new(pairs, x.n, y.n) else {
            continue;
        };
        let b = spatial_gh_bound(x, y, &c, pi)?;
        if best.as_ref().is_none_or(|(_, bb)| b.total < bb.total) {
            best = Some((c, b));
        }
    }
    best.ok_or_else(|| Error::Consistency("no admissible correspondence".into()))
}

/// Pairs lattice site `i` (given by position in `sites`) with grid point
/// `s` when `i = ⌊m s⌋`. Sites missed by the grid are paired with their
/// nearest grid point.
pub fn lattice_correspondence(m: f64, sites: &[i64], grid: &[f64]) -> Result<Correspondence> {
    if sites.is_empty() || grid.is_empty() {
        return Err(Error::EmptyInput("lattice correspondence"));
    }
    let lo = *sites.iter().min().unwrap();
    let mut index = vec![usize::MAX; (sites.iter().max().unwrap() - lo + 1) as usize];
    for (k, &z) in sites.iter().enumerate() {
        index[(z - lo) as usize] = k;
    }
    let mut pairs = Vec::with_capacity(grid.len());
    let mut hit = vec![false; sites.len()];
    for (j, &s) in grid.iter().enumerate() {
        let z = (m * s + 1e-9).floor() as i64;
        let k = (z - lo)
            .try_into()
            .ok()
            .and_then(|u: usize| index.get(u).copied())
            .filter(|&k| k != usize::MAX)
            .ok_or_else(|| invalid(format!("grid point {s} maps to site {z} outside the lattice")))?;
        pairs.push((k, j));
        hit[k] = true;
    }
    for (k, &z) in sites.iter().enumerate() {
        if !hit[k] {
            let target = z as f64 / m;
            let j = nearest(grid, target);
            pairs.push((k, j));
        }
    }
    Correspondence::new(pairs, sites.len(), grid.len())
}

fn nearest(grid: &[f64], t: f64) -> usize {
    (0..grid.len())
        .min_by(|&a, &b| (grid[a] - t).abs().total_cmp(&(grid[b] - t).abs()))
        .unwrap()
}

/// Pairs the `i`-th contour vertex with the grid time `t` when
/// `i = ⌊steps · t⌋`, `steps = 2(n − 1)`; vertices missed by the grid are
/// paired with their nearest contour time on the grid. Grid times must lie
/// in `[0, 1]`.
pub fn contour_correspondence(tree: &OrderedTree, grid: &[f64]) -> Result<Correspondence> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("contour correspondence"));
    }
    let c = contour(tree);
    let steps = c.steps();
    let mut hit = vec![false; tree.n()];
    let mut pairs = Vec::new();
    for (j, &t) in grid.iter().enumerate() {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("contour time {t} outside [0, 1]")));
        }
        let i = ((steps as f64 * t) as usize).min(steps);
        let u = c.visits[i];
        pairs.push((u, j));
        hit[u] = true;
    }
    for (i, &u) in c.visits.iter().enumerate() {
        if !hit[u] {
            let t = if steps == 0 { 0.0 } else { i as f64 / steps as f64 };
            pairs.push((u, nearest(grid, t)));
            hit[u] = true;
        }
    }
    Correspondence::new(pairs, tree.n(), grid.len())
}

/// Interquartile range over `walkers` quenched walks of
/// `σ² X_n / (log n)²`, with `σ²` from the environment's metadata or, if
/// absent, estimated from the window.
pub fn localization_stat<R: RngCore + ?Sized>(env: &Environment1D, n: u64, walkers: usize, rng: &mut R) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain("log n vanishes for n < 2".into()));
    }
    if walkers == 0 {
        return Err(invalid("need at least one walker"));
    }
    let sigma2 = env.sigma2().unwrap_or_else(|| env.estimate_sigma2());
    let scale = sigma2 / (n as f64).ln().powi(2);
    let kernel = env.walk_kernel();
    let xs = (0..walkers)
        .map(|_| kernel.run(0, n, rng).map(|x| scale * x as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(stats::iqr(&xs))
}

/// Bound between the lattice space `(m⁻¹ℤ, m⁻¹ r, m⁻¹ ν)` of a potential
/// `v` and the continuum space `(ℝ, ∫e^W, 2e^{-W} dx)` of `w`, both
/// restricted to positions in `[-half_width, half_width)`.
///
/// The correspondence pairs `⌊m s⌋` with `s` on the grid of `w`; the
/// coupling puts the continuum mass of the cell `[s, s+h)` on that pair.
/// Marks are the positions `i/m` and `s`.
pub fn line_gh_bound(v: &Potential1D, m: f64, w: &ContinuumPotential, half_width: f64) -> Result<GhBound> {
    let h = w.mesh;
    let (lo, hi) = v.window();
    let sm = v.scale_function();
    let vals = v.values();
    let wo = w.origin as i64;
    let jl = (-half_width / h).round() as i64;
    let jh = (half_width / h).round() as i64;
    if wo + jl < 0 || wo + jh >= w.values.len() as i64 {
        return Err(invalid("restriction window exceeds the continuum grid"));
    }
    let site = |s: f64| (m * s + 1e-9).floor() as i64;
    let (zl, zh) = (site(jl as f64 * h), site((jh - 1) as f64 * h));
    if zl - 1 < lo || zh > hi {
        return Err(invalid("restriction window exceeds the lattice window"));
    }
    let wv = |j: i64| w.values[(wo + j) as usize];
    let mut s_cont = 0.0;
    let mut d_min = 0.0f64;
    let mut d_max = 0.0f64;
    let mut marks = 0.0f64;
    let mut first = vec![0.0; (zh - zl + 1) as usize];
    // positive side then negative side, accumulating S from 0
    let mut visit = |j: i64, s_cont: f64| {
        let s = j as f64 * h;
        let z = site(s);
        let d = sm[(z - lo) as usize] / m - s_cont;
        d_min = d_min.min(d);
        d_max = d_max.max(d);
        marks = marks.max((z as f64 / m - s).abs());
        if j < jh {
            let mass = h * ((-wv(j)).exp() + (-wv(j + 1)).exp());
            first[(z - zl) as usize] += mass;
        }
    };
    for j in 0..jh {
        visit(j, s_cont);
        s_cont += 0.5 * h * (wv(j).exp() + wv(j + 1).exp());
    }
    s_cont = 0.0;
    for j in (jl..0).rev() {
        s_cont -= 0.5 * h * (wv(j).exp() + wv(j + 1).exp());
        visit(j, s_cont);
    }
    let disc: f64 = (zl..=zh)
        .map(|z| {
            let nu = ((-vals[(z - lo) as usize]).exp() + (-vals[(z - 1 - lo) as usize]).exp()) / m;
            (first[(z - zl) as usize] - nu).abs()
        })
        .sum();
    Ok(GhBound::from_terms(d_max - d_min, TV_FACTOR * disc, 0.0, marks))
}

/// Settings for the line-scaling experiment.
#[derive(Debug, Clone, Serialize)]
pub struct LineScalingConfig {
    /// Lattice scales; `1 / (m · mesh)` must be a whole number for each.
    pub ladder: Vec<u64>,
    /// Mesh of the common Brownian potential.
    pub mesh: f64,
    /// Half-width of the potential window.
    pub half_width: f64,
    /// Half-width of the restriction used for the distance bound.
    pub ball: f64,
    /// Time steps of the forward-equation solver.
    pub law_steps: usize,
    /// Evaluation time.
    pub time: f64,
}

impl Default for LineScalingConfig {
    fn default() -> Self {
        Self {
            ladder: vec![100, 1000, 10_000],
            mesh: 5e-5,
            half_width: 6.0,
            ball: 1.0,
            law_steps: 1000,
            time: 1.0,
        }
    }
}

/// One ladder rung of one replication.
#[derive(Debug, Clone, Serialize)]
pub struct LineScalingRecord {
    pub m: u64,
    /// KS distance between the law of the rescaled walk and the Brox law.
    pub ks: f64,
    pub bound: GhBound,
    /// Mass lost through the window ends by the two laws.
    pub lost_mass: f64,
}

/// Brox law at `time` on the mesh of `w`.
pub fn brox_reference(w: &ContinuumPotential, cfg: &LineScalingConfig) -> Result<Law1D> {
    brox_law(w, w.mesh, cfg.time, cfg.law_steps)
}

/// Lattice environment coupled to `w`: `V^m_x = W(x/m)`, produced by
/// flattening the log-ratios `√m (W(x/m) − W((x−1)/m))` with index `m`.
pub fn coupled_environment(w: &ContinuumPotential, m: u64) -> Result<Environment1D> {
    let ratio = 1.0 / (m as f64 * w.mesh);
    let stride = ratio.round() as usize;
    if stride == 0 || (ratio - stride as f64).abs() > 1e-6 {
        return Err(invalid(format!("1/(m·mesh) is not a whole number for m = {m}")));
    }
    let k = (w.origin / stride) as i64;
    let kr = ((w.values.len() - 1 - w.origin) / stride) as i64;
    let at = |x: i64| w.values[(w.origin as i64 + x * stride as i64) as usize];
    let sm = (m as f64).sqrt();
    let log_rho = (-k..=kr)
        .map(|x| if x == -k { 0.0 } else { sm * (at(x) - at(x - 1)) })
        .collect();
    let base = Environment1D::from_log_rho(-k, kr, log_rho)?;
    let sigma2 = w.params.sigma * w.params.sigma;
    flatten(&base.with_sigma2(sigma2), m)
}

/// One replication: samples `W` and evaluates every rung of the ladder.
pub fn line_scaling_replication<R: Rng + ?Sized>(cfg: &LineScalingConfig, rng: &mut R) -> Result<Vec<LineScalingRecord>> {
    let w = make_potential(
        PotentialKind::TwoSidedBm,
        PotentialParams::default(),
        PotentialDomain::Line {
            half_width: cfg.half_width,
            mesh: cfg.mesh,
        },
        rng,
    )?;
    let brox = brox_reference(&w, cfg)?;
    cfg.ladder
        .iter()
        .map(|&m| {
            let env = coupled_environment(&w, m)?;
            let law = env.poissonized_chain(m as f64)?.law_at((-env.window().0) as usize, cfg.time, cfg.law_steps)?;
            let ks = stats::ks_between_laws(&law.positions, &law.probs, &brox.positions, &brox.probs)?;
            let bound = line_gh_bound(&potential1d(&env), m as f64, &w, cfg.ball)?;
            Ok(LineScalingRecord {
                m,
                ks,
                bound,
                lost_mass: law.lost_mass.max(brox.lost_mass),
            })
        })
        .collect()
}
