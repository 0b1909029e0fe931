//! Plane trees, size-conditioned Galton–Watson sampling, contour coding and
//! branching random walk embeddings.
//!
//! Vertices are `0..n`. An edge is named by its lower endpoint, so
//! per-edge data lives in per-vertex arrays whose root slot belongs to the
//! planted edge (or is unused for unplanted trees).

use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, parse_err, Error, Result};

/// Ordered rooted tree, optionally planted (a base vertex below the root
/// joined by a unit edge; the base is not stored as a vertex here).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTree {
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    root: usize,
    planted: bool,
}

impl OrderedTree {
    /// Builds a tree from ordered child lists.
    pub fn from_children(children: Vec<Vec<usize>>, planted: bool) -> Result<Self> {
        let n = children.len();
        if n == 0 {
            return Err(Error::EmptyInput("tree with no vertices"));
        }
        let mut parent = vec![None; n];
        for (u, cs) in children.iter().enumerate() {
            for &c in cs {
                if c >= n {
                    return Err(invalid(format!("child {c} out of range")));
                }
                if parent[c].is_some() || c == u {
                    return Err(invalid(format!("vertex {c} has two parents")));
                }
                parent[c] = Some(u);
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&u| parent[u].is_none()).collect();
        if roots.len() != 1 {
            return Err(invalid(format!("expected one root, found {}", roots.len())));
        }
        let root = roots[0];
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut stack = vec![root];
        let mut seen = 1;
        while let Some(u) = stack.pop() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                seen += 1;
                stack.push(c);
            }
        }
        if seen != n {
            return Err(invalid("parent map contains a cycle"));
        }
        Ok(Self {
            parent,
            children,
            depth,
            root,
            planted,
        })
    }

    /// Builds a tree from a parent map; children are ordered by index.
    pub fn from_parents(parents: &[Option<usize>], planted: bool) -> Result<Self> {
        let n = parents.len();
        let mut children = vec![Vec::new(); n];
        for (u, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(invalid(format!("parent {p} out of range")));
                }
                children[p].push(u);
            }
        }
        Self::from_children(children, planted)
    }

    /// Builds the tree whose preorder offspring counts are `counts`
    /// (a Łukasiewicz word). Vertices are numbered in preorder.
    pub fn from_offspring_preorder(counts: &[usize], planted: bool) -> Result<Self> {
        let n = counts.len();
        if n == 0 {
            return Err(Error::EmptyInput("offspring word"));
        }
        if counts.iter().sum::<usize>() != n - 1 {
            return Err(invalid("offspring counts must sum to n - 1"));
        }
        let mut children = vec![Vec::new(); n];
        let mut open: Vec<(usize, usize)> = Vec::new();
        if counts[0] > 0 {
            open.push((0, counts[0]));
        }
        for (j, &k) in counts.iter().enumerate().skip(1) {
            let top = open
                .last_mut()
                .ok_or_else(|| invalid("offspring word closes before its end"))?;
            children[top.0].push(j);
            top.1 -= 1;
            if top.1 == 0 {
                open.pop();
            }
            if k > 0 {
                open.push((j, k));
            }
        }
        Self::from_children(children, planted)
    }

    pub fn single(planted: bool) -> Self {
        Self::from_children(vec![Vec::new()], planted).expect("valid")
    }

    /// Path `0 - 1 - … - (n-1)` rooted at 0.
    pub fn path(n: usize, planted: bool) -> Result<Self> {
        let children = (0..n)
            .map(|u| if u + 1 < n { vec![u + 1] } else { Vec::new() })
            .collect();
        Self::from_children(children, planted)
    }

    /// Root with `k` leaf children.
    pub fn star(k: usize, planted: bool) -> Self {
        let mut children = vec![(1..=k).collect::<Vec<_>>()];
        children.extend((0..k).map(|_| Vec::new()));
        Self::from_children(children, planted).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn is_planted(&self) -> bool {
        self.planted
    }

    pub fn with_planted(mut self, planted: bool) -> Self {
        self.planted = planted;
        self
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.parent[u]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    pub fn depth(&self, u: usize) -> usize {
        self.depth[u]
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Depth-first order, children left to right.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].expect("non-root");
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].expect("non-root");
        }
        while u != v {
            u = self.parent[u].expect("non-root");
            v = self.parent[v].expect("non-root");
        }
        u
    }

    /// Graph distance.
    pub fn distance(&self, u: usize, v: usize) -> usize {
        let a = self.lca(u, v);
        self.depth[u] + self.depth[v] - 2 * self.depth[a]
    }

    /// Vertices on the path from the root to `u`, root first.
    pub fn ancestry(&self, u: usize) -> Vec<usize> {
        let mut out = vec![u];
        let mut x = u;
        while let Some(p) = self.parent[x] {
            out.push(p);
            x = p;
        }
        out.reverse();
        out
    }

    /// Preorder offspring counts.
    pub fn lukasiewicz(&self) -> Vec<usize> {
        self.preorder().iter().map(|&u| self.children[u].len()).collect()
    }

    /// Rebuilds a tree from its contour, reusing the recorded vertex ids.
    pub fn from_contour(c: &ContourSequence, planted: bool) -> Result<Self> {
        let n = c.n_vertices();
        let mut children = vec![Vec::new(); n];
        let mut parent_seen = vec![false; n];
        for i in 0..c.len() - 1 {
            let (a, b) = (c.visits[i], c.visits[i + 1]);
            if a >= n || b >= n {
                return Err(Error::Consistency("contour vertex out of range".into()));
            }
            match c.heights[i + 1] as i64 - c.heights[i] as i64 {
                1 => {
                    if parent_seen[b] {
                        return Err(Error::Consistency(format!("vertex {b} entered twice")));
                    }
                    parent_seen[b] = true;
                    children[a].push(b);
                }
                -1 => {}
                _ => return Err(Error::Consistency("contour steps must be ±1".into())),
            }
        }
        Self::from_children(children, planted)
    }
}

/// Depth-first contour: heights `C(i)` and visited vertices `u_i`,
/// `i = 0, …, 2(n-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContourSequence {
    pub heights: Vec<usize>,
    pub visits: Vec<usize>,
}

impl ContourSequence {
    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn n_vertices(&self) -> usize {
        (self.heights.len() - 1) / 2 + 1
    }

    /// Number of unit steps, `2(n-1)`.
    pub fn steps(&self) -> usize {
        self.heights.len() - 1
    }
}

pub fn contour(tree: &OrderedTree) -> ContourSequence {
    let n = tree.n();
    let mut heights = Vec::with_capacity(2 * n - 1);
    let mut visits = Vec::with_capacity(2 * n - 1);
    let mut stack: Vec<(usize, usize)> = vec![(tree.root(), 0)];
    heights.push(0);
    visits.push(tree.root());
    while let Some(top) = stack.last_mut() {
        let (u, k) = *top;
        if k < tree.children(u).len() {
            top.1 += 1;
            let c = tree.children(u)[k];
            stack.push((c, 0));
            heights.push(tree.depth(c));
            visits.push(c);
        } else {
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                heights.push(tree.depth(p));
                visits.push(p);
            }
        }
    }
    ContourSequence { heights, visits }
}

/// Offspring law for Galton–Watson trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffspringLaw {
    /// `P(k) = 2^{-(k+1)}`.
    Geometric,
    /// 0 or 2 children with probability one half each.
    Binary,
    /// Poisson with mean 1.
    Poisson,
    /// Explicit probabilities of `0, 1, 2, …` children.
    Pmf { probs: Vec<f64> },
}

/// Offspring law with the regularity flags recorded by the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffspringDistribution {
    pub law: OffspringLaw,
    /// Caller's assertion that the law has exponential moments.
    #[serde(default = "yes")]
    pub exponential_tails: bool,
}

fn yes() -> bool {
    true
}

impl OffspringDistribution {
    pub fn new(law: OffspringLaw) -> Self {
        let exponential_tails = true;
        Self {
            law,
            exponential_tails,
        }
    }

    pub fn geometric() -> Self {
        Self::new(OffspringLaw::Geometric)
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match &self.law {
            OffspringLaw::Geometric => 0.5f64.powi(k as i32 + 1),
            OffspringLaw::Binary => {
                if k == 0 || k == 2 {
                    0.5
                } else {
                    0.0
                }
            }
            OffspringLaw::Poisson => {
                let lg = statrs::function::gamma::ln_gamma(k as f64 + 1.0);
                (-1.0 - lg).exp()
            }
            OffspringLaw::Pmf { probs } => probs.get(k).copied().unwrap_or(0.0),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.law {
            OffspringLaw::Geometric | OffspringLaw::Binary | OffspringLaw::Poisson => 1.0,
            OffspringLaw::Pmf { probs } => probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.law {
            OffspringLaw::Geometric => 2.0,
            OffspringLaw::Binary | OffspringLaw::Poisson => 1.0,
            OffspringLaw::Pmf { probs } => {
                let m = self.mean();
                probs
                    .iter()
                    .enumerate()
                    .map(|(k, p)| (k as f64 - m).powi(2) * p)
                    .sum()
            }
        }
    }

    /// Gcd of the support's pairwise differences with 1, i.e. the period
    /// of `ξ - 1` sums; total progeny `n` needs `(n-1) ≡ 0` modulo the
    /// gcd of the support.
    pub fn support_gcd(&self) -> usize {
        match &self.law {
            OffspringLaw::Geometric | OffspringLaw::Poisson => 1,
            OffspringLaw::Binary => 2,
            OffspringLaw::Pmf { probs } => probs
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0.0)
                .fold(0, |g, (k, _)| gcd(g, k)),
        }
    }

    pub fn is_aperiodic(&self) -> bool {
        self.support_gcd() == 1
    }

    /// Checks normalization and criticality to 1e-12.
    pub fn validate(&self) -> Result<()> {
        if let OffspringLaw::Pmf { probs } = &self.law {
            if probs.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
                return Err(invalid("offspring probabilities must be nonnegative"));
            }
            let s: f64 = probs.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("offspring probabilities sum to {s}")));
            }
        }
        let m = self.mean();
        if (m - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("offspring mean {m} is not critical")));
        }
        Ok(())
    }

    fn sampler(&self) -> Result<OffspringSampler> {
        Ok(match &self.law {
            OffspringLaw::Geometric => OffspringSampler::Geometric(Geometric::new(0.5).expect("valid")),
            OffspringLaw::Binary => OffspringSampler::Binary,
            OffspringLaw::Poisson => OffspringSampler::Poisson(Poisson::new(1.0).expect("valid")),
            OffspringLaw::Pmf { probs } => OffspringSampler::Table(
                WeightedIndex::new(probs).map_err(|e| invalid(e.to_string()))?,
            ),
        })
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

enum OffspringSampler {
    Geometric(Geometric),
    Binary,
    Poisson(Poisson<f64>),
    Table(WeightedIndex<f64>),
}

impl OffspringSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            OffspringSampler::Geometric(g) => g.sample(rng) as usize,
            OffspringSampler::Binary => 2 * (rng.random::<bool>() as usize),
            OffspringSampler::Poisson(p) => p.sample(rng) as usize,
            OffspringSampler::Table(t) => t.sample(rng),
        }
    }
}

pub const DEFAULT_GW_ATTEMPTS: u64 = 1_000_000;

/// Galton–Watson tree conditioned on `n` vertices, by the cycle lemma:
/// draw `n` offspring counts until they sum to `n - 1`, then rotate the
/// word to start right after the first minimum of its Łukasiewicz walk.
/// The result is unplanted and numbered in preorder.
pub fn sample_gw_conditioned<R: Rng + ?Sized>(
    dist: &OffspringDistribution,
    n: usize,
    max_attempts: u64,
    rng: &mut R,
) -> Result<OrderedTree> {
    dist.validate()?;
    if n == 0 {
        return Err(invalid("tree size must be >= 1"));
    }
    if n == 1 {
        return Ok(OrderedTree::single(false));
    }
    let g = dist.support_gcd();
    if g == 0 || (n - 1) % g != 0 {
        return Err(Error::SamplingFailure {
            attempts: 0,
            reason: format!("total progeny {n} has probability zero"),
        });
    }
    let sampler = dist.sampler()?;
    let mut word = vec![0usize; n];
    for _ in 0..max_attempts {
        let mut sum = 0usize;
        for x in word.iter_mut() {
            *x = sampler.sample(rng);
            sum += *x;
            if sum > n - 1 {
                break;
            }
        }
        if sum != n - 1 {
            continue;
        }
        let mut s = 0i64;
        let mut best = (0i64, 0usize);
        for (k, &x) in word.iter().enumerate() {
            s += x as i64 - 1;
            if s < best.0 {
                best = (s, k + 1);
            }
        }
        let start = best.1 % n;
        word.rotate_left(start);
        return OrderedTree::from_offspring_preorder(&word, false);
    }
    Err(Error::SamplingFailure {
        attempts: max_attempts,
        reason: format!("no offspring word summed to {}", n - 1),
    })
}

/// Law of an i.i.d. centered step in `ℝ^d`.
pub trait StepLaw {
    fn dim(&self) -> usize;
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);
    /// Step covariance, row-major `d × d`.
    fn covariance(&self) -> Vec<f64>;
}

/// Gaussian step `L z` with `z` standard normal and `L` lower triangular,
/// so the covariance is `L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSteps {
    dim: usize,
    factor: Vec<f64>,
}

impl GaussianSteps {
    pub fn isotropic(dim: usize, sd: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        let mut factor = vec![0.0; dim * dim];
        for i in 0..dim {
            factor[i * dim + i] = sd;
        }
        Ok(Self { dim, factor })
    }

    /// `factor` is row-major; entries above the diagonal are ignored.
    pub fn from_factor(dim: usize, factor: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        if factor.len() != dim * dim {
            return Err(invalid("factor must be d × d"));
        }
        let mut f = factor;
        for i in 0..dim {
            for j in i + 1..dim {
                f[i * dim + j] = 0.0;
            }
        }
        Ok(Self { dim, factor: f })
    }
}

impl StepLaw for GaussianSteps {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.dim;
        let mut z = [0.0f64; 16];
        let mut zv;
        let zs: &mut [f64] = if d <= 16 {
            &mut z[..d]
        } else {
            zv = vec![0.0; d];
            &mut zv
        };
        for x in zs.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        for i in 0..d {
            out[i] = (0..=i).map(|j| self.factor[i * d + j] * zs[j]).sum();
        }
    }

    fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let mut c = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                c[i * d + j] = (0..d).map(|k| self.factor[i * d + k] * self.factor[j * d + k]).sum();
            }
        }
        c
    }
}

/// Uniform step on the cube `[-a, a]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSteps {
    pub dim: usize,
    pub half_width: f64,
}

impl StepLaw for UniformSteps {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut().take(self.dim) {
            *x = self.half_width * (2.0 * rng.random::<f64>() - 1.0);
        }
    }

    fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        let mut c = vec![0.0; d * d];
        for i in 0..d {
            c[i * d + i] = self.half_width * self.half_width / 3.0;
        }
        c
    }
}

/// The zero step.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSteps(pub usize);

impl StepLaw for ZeroSteps {
    fn dim(&self) -> usize {
        self.0
    }

    fn sample_into<R: Rng + ?Sized>(&self, _rng: &mut R, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
    }

    fn covariance(&self) -> Vec<f64> {
        vec![0.0; self.0 * self.0]
    }
}

/// Edge increments and vertex positions of a tree embedded in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMarks {
    dim: usize,
    parents: Vec<Option<usize>>,
    increments: Vec<f64>,
    positions: Vec<f64>,
    step_cov: Option<Vec<f64>>,
}

impl SpatialMarks {
    /// Positions from per-vertex increments (`n × d`, row-major); the root
    /// row is ignored and stored as zero.
    pub fn from_increments(tree: &OrderedTree, dim: usize, increments: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        if increments.len() != tree.n() * dim {
            return Err(Error::Consistency("increments must be n × d".into()));
        }
        let mut inc = increments;
        let r = tree.root();
        inc[r * dim..(r + 1) * dim].iter_mut().for_each(|x| *x = 0.0);
        let mut pos = vec![0.0; inc.len()];
        for u in tree.preorder() {
            if let Some(p) = tree.parent(u) {
                for k in 0..dim {
                    pos[u * dim + k] = pos[p * dim + k] + inc[u * dim + k];
                }
            }
        }
        Ok(Self {
            dim,
            parents: tree.parents().to_vec(),
            increments: inc,
            positions: pos,
            step_cov: None,
        })
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step_covariance(&self) -> Option<&[f64]> {
        self.step_cov.as_deref()
    }

    /// Position `φ(u)`.
    pub fn position(&self, u: usize) -> &[f64] {
        &self.positions[u * self.dim..(u + 1) * self.dim]
    }

    /// Increment on the edge from the parent of `u` to `u`.
    pub fn increment(&self, u: usize) -> &[f64] {
        &self.increments[u * self.dim..(u + 1) * self.dim]
    }

    /// `φ¹(u)`.
    pub fn first(&self, u: usize) -> f64 {
        self.positions[u * self.dim]
    }

    pub fn belongs_to(&self, tree: &OrderedTree) -> bool {
        self.parents == tree.parents()
    }

    /// All increments multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            parents: self.parents.clone(),
            increments: self.increments.iter().map(|x| c * x).collect(),
            positions: self.positions.iter().map(|x| c * x).collect(),
            step_cov: self.step_cov.as_ref().map(|s| s.iter().map(|x| c * c * x).collect()),
        }
    }
}

/// Branching random walk on `tree` with i.i.d. steps from `law`.
pub fn embed_brw<L: StepLaw, R: Rng + ?Sized>(tree: &OrderedTree, law: &L, rng: &mut R) -> Result<SpatialMarks> {
    let d = law.dim();
    if d == 0 {
        return Err(invalid("dimension must be >= 1"));
    }
    let mut inc = vec![0.0; tree.n() * d];
    for u in 0..tree.n() {
        if u != tree.root() {
            law.sample_into(rng, &mut inc[u * d..(u + 1) * d]);
        }
    }
    let mut marks = SpatialMarks::from_increments(tree, d, inc)?;
    marks.step_cov = Some(law.covariance());
    Ok(marks)
}

/// Head function `R(i) = φ(u_i)`.
pub fn head_function(marks: &SpatialMarks, c: &ContourSequence) -> Result<Vec<Vec<f64>>> {
    if marks.n() != c.n_vertices() {
        return Err(Error::Consistency(format!(
            "marks cover {} vertices, contour {}",
            marks.n(),
            c.n_vertices()
        )));
    }
    for w in c.visits.windows(2) {
        let (a, b) = (w[0], w[1]);
        if marks.parents[b] != Some(a) && marks.parents[a] != Some(b) {
            return Err(Error::Consistency(format!("contour step {a} -> {b} is not an edge")));
        }
    }
    Ok(c.visits.iter().map(|&u| marks.position(u).to_vec()).collect())
}

/// Moves each edge length to the lower endpoint. `lengths` is indexed by
/// the lower vertex; the root entry is ignored.
pub fn discrete_length_measure(tree: &OrderedTree, lengths: &[f64]) -> Result<Vec<f64>> {
    if lengths.len() != tree.n() {
        return Err(Error::Consistency("one length per vertex expected".into()));
    }
    let mut mass = vec![0.0; tree.n()];
    for u in 0..tree.n() {
        if u == tree.root() {
            continue;
        }
        if !(lengths[u] > 0.0 && lengths[u].is_finite()) {
            return Err(invalid(format!("edge above vertex {u} has length {}", lengths[u])));
        }
        mass[u] = lengths[u];
    }
    Ok(mass)
}

/// Writes `vertex,parent,rank` rows, `parent = -1` at the root.
pub fn write_parent_array<W: Write>(tree: &OrderedTree, mut w: W) -> Result<()> {
    writeln!(w, "# n={} planted={}", tree.n(), tree.is_planted())?;
    writeln!(w, "vertex,parent,rank")?;
    let mut rank = vec![0usize; tree.n()];
    for u in 0..tree.n() {
        for (k, &c) in tree.children(u).iter().enumerate() {
            rank[c] = k;
        }
    }
    for u in 0..tree.n() {
        match tree.parent(u) {
            Some(p) => writeln!(w, "{u},{p},{}", rank[u])?,
            None => writeln!(w, "{u},-1,0")?,
        }
    }
    Ok(())
}

pub fn read_parent_array<R: BufRead>(r: R) -> Result<OrderedTree> {
    let mut planted = false;
    let mut rows: Vec<(usize, Option<usize>, usize)> = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if let Some(meta) = t.strip_prefix('#') {
            planted = meta.split_whitespace().any(|f| f == "planted=true");
            continue;
        }
        if t.is_empty() || t.starts_with("vertex") {
            continue;
        }
        let f: Vec<&str> = t.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(k + 1, "expected vertex,parent,rank"));
        }
        let u: usize = f[0].parse().map_err(|_| parse_err(k + 1, "bad vertex"))?;
        let p: i64 = f[1].parse().map_err(|_| parse_err(k + 1, "bad parent"))?;
        let rank: usize = f[2].parse().map_err(|_| parse_err(k + 1, "bad rank"))?;
        rows.push((u, if p < 0 { None } else { Some(p as usize) }, rank));
    }
    let n = rows.len();
    let mut slots: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut seen = vec![false; n];
    for &(u, p, rank) in &rows {
        if u >= n || seen[u] {
            return Err(invalid(format!("vertex {u} duplicated or out of range")));
        }
        seen[u] = true;
        if let Some(p) = p {
            if p >= n {
                return Err(invalid(format!("parent {p} out of range")));
            }
            slots[p].push((rank, u));
        }
    }
    let children = slots
        .into_iter()
        .map(|mut s| {
            s.sort();
            s.into_iter().map(|(_, u)| u).collect()
        })
        .collect();
    OrderedTree::from_children(children, planted)
}

/// Writes `i,C,vertex,R1..Rd` rows.
pub fn write_contour_csv<W: Write>(c: &ContourSequence, heads: Option<&[Vec<f64>]>, mut w: W) -> Result<()> {
    let d = heads.and_then(|h| h.first()).map_or(0, |r| r.len());
    write!(w, "i,C,vertex")?;
    for k in 1..=d {
        write!(w, ",R{k}")?;
    }
    writeln!(w)?;
    for i in 0..c.len() {
        write!(w, "{},{},{}", i, c.heights[i], c.visits[i])?;
        if let Some(h) = heads {
            for x in &h[i] {
                write!(w, ",{x}")?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
