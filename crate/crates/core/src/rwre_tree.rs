//! Random walks on planted trees with edge conductances.
//!
//! The network has the tree vertices `0..n` plus the base `n`, joined to
//! the root by the planted edge. Per-edge values are stored at the lower
//! endpoint, so slot `root` holds the planted edge.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::treecore::{OrderedTree, SpatialMarks};

/// How conductances depend on the embedding.
#[derive(Debug, Clone, PartialEq)]
pub enum BiasMode {
    /// `c({u,v}) = β^{γ·max(φ¹(u), φ¹(v))}`.
    MaxFirstCoordinate,
    /// `c({u,v}) = exp(γ·log β·(φ(u)+φ(v))·ℓ)` for a unit vector `ℓ`.
    Direction(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConductances {
    tree: OrderedTree,
    c: Vec<f64>,
    bias_base: f64,
    exponent_scale: f64,
    mode: BiasMode,
}

impl TreeConductances {
    /// Conductances given per lower vertex; `c[root]` is the planted edge
    /// and must equal 1.
    pub fn new(tree: &OrderedTree, c: Vec<f64>) -> Result<Self> {
        if c.len() != tree.n() {
            return Err(Error::Consistency("one conductance per vertex expected".into()));
        }
        if c.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("conductances must be positive and finite"));
        }
        if c[tree.root()] != 1.0 {
            return Err(Error::Consistency("planted edge must have conductance 1".into()));
        }
        Ok(Self {
            tree: tree.clone().with_planted(true),
            c,
            bias_base: 1.0,
            exponent_scale: 0.0,
            mode: BiasMode::MaxFirstCoordinate,
        })
    }

    pub fn unit(tree: &OrderedTree) -> Self {
        Self::new(tree, vec![1.0; tree.n()]).expect("valid")
    }

    pub fn tree(&self) -> &OrderedTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    /// Index of the base vertex.
    pub fn base(&self) -> usize {
        self.tree.n()
    }

    /// Conductance of the edge from `u` to its parent (the base for the root).
    pub fn edge(&self, u: usize) -> f64 {
        self.c[u]
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }

    pub fn bias_base(&self) -> f64 {
        self.bias_base
    }

    pub fn exponent_scale(&self) -> f64 {
        self.exponent_scale
    }

    pub fn mode(&self) -> &BiasMode {
        &self.mode
    }

    /// Network edges `(lower, upper, conductance)` including the planted edge.
    pub fn network_edges(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n())
            .map(|u| (u, net_parent(&self.tree, u).expect("tree vertex"), self.c[u]))
            .collect()
    }

    /// Neighbors of a network vertex with the conductances of the joining edges.
    pub fn neighbors(&self, x: usize) -> Vec<(usize, f64)> {
        let n = self.n();
        if x == n {
            return vec![(self.tree.root(), 1.0)];
        }
        let mut out = vec![(net_parent(&self.tree, x).expect("tree vertex"), self.c[x])];
        out.extend(self.tree.children(x).iter().map(|&y| (y, self.c[y])));
        out
    }

    /// `c({x}) = Σ_y c(x, y)`.
    pub fn vertex_conductance(&self, x: usize) -> f64 {
        self.neighbors(x).iter().map(|(_, c)| c).sum()
    }
}

fn net_parent(tree: &OrderedTree, u: usize) -> Option<usize> {
    if u == tree.n() {
        None
    } else {
        Some(tree.parent(u).unwrap_or(tree.n()))
    }
}

fn net_depth(tree: &OrderedTree, u: usize) -> usize {
    if u == tree.n() {
        0
    } else {
        tree.depth(u) + 1
    }
}

/// Lowest common ancestor in the network, base as the root.
pub fn net_lca(tree: &OrderedTree, mut u: usize, mut v: usize) -> usize {
    while net_depth(tree, u) > net_depth(tree, v) {
        u = net_parent(tree, u).expect("non-base");
    }
    while net_depth(tree, v) > net_depth(tree, u) {
        v = net_parent(tree, v).expect("non-base");
    }
    while u != v {
        u = net_parent(tree, u).expect("non-base");
        v = net_parent(tree, v).expect("non-base");
    }
    u
}

/// Unique vertex where the paths between `u1`, `u2`, `u3` meet: the
/// deepest of the three pairwise common ancestors.
pub fn branch_point(tree: &OrderedTree, u1: usize, u2: usize, u3: usize) -> usize {
    [net_lca(tree, u1, u2), net_lca(tree, u1, u3), net_lca(tree, u2, u3)]
        .into_iter()
        .max_by_key(|&a| net_depth(tree, a))
        .expect("three candidates")
}

/// Bias exponent `n^{-1/4}` of the weakly biased regime.
pub fn weak_bias_exponent(n: usize) -> f64 {
    (n as f64).powf(-0.25)
}

/// Conductances biased by the embedding `marks` of `tree`.
pub fn biased_conductances(
    tree: &OrderedTree,
    marks: &SpatialMarks,
    beta: f64,
    gamma: f64,
    direction: Option<&[f64]>,
) -> Result<TreeConductances> {
    if !(beta >= 1.0 && beta.is_finite()) {
        return Err(invalid(format!("bias base {beta} must be >= 1")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid(format!("exponent scale {gamma} must be positive")));
    }
    if !marks.belongs_to(tree) {
        return Err(Error::Consistency("marks belong to a different tree".into()));
    }
    let lb = beta.ln();
    let root = tree.root();
    let mode = match direction {
        None => BiasMode::MaxFirstCoordinate,
        Some(l) => {
            if l.len() != marks.dim() {
                return Err(invalid("direction has the wrong dimension"));
            }
            let norm = l.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("direction has norm {norm}, expected 1")));
            }
            BiasMode::Direction(l.to_vec())
        }
    };
    let base_phi = vec![0.0; marks.dim()];
    let mut c = Vec::with_capacity(tree.n());
    for u in 0..tree.n() {
        let upper = match tree.parent(u) {
            Some(p) => marks.position(p),
            None => &base_phi[..],
        };
        let lower = marks.position(u);
        let exponent = match &mode {
            BiasMode::MaxFirstCoordinate => gamma * lb * upper[0].max(lower[0]),
            BiasMode::Direction(l) => {
                gamma * lb * l.iter().zip(upper.iter().zip(lower)).map(|(a, (x, y))| a * (x + y)).sum::<f64>()
            }
        };
        c.push(exponent.exp());
    }
    if c[root] != 1.0 {
        return Err(Error::Consistency(format!(
            "planted edge conductance {} differs from 1 (root is not at the origin)",
            c[root]
        )));
    }
    let mut out = TreeConductances::new(tree, c)?;
    out.bias_base = beta;
    out.exponent_scale = gamma;
    out.mode = mode;
    Ok(out)
}

/// `V(ρ) = 0`, `V(u) = -log c({ū, u})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePotential {
    tree: OrderedTree,
    v: Vec<f64>,
}

impl TreePotential {
    pub fn tree(&self) -> &OrderedTree {
        &self.tree
    }

    pub fn value(&self, u: usize) -> f64 {
        self.v[u]
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn from_values(tree: &OrderedTree, v: Vec<f64>) -> Result<Self> {
        if v.len() != tree.n() {
            return Err(Error::Consistency("one potential value per vertex expected".into()));
        }
        if v[tree.root()] != 0.0 {
            return Err(invalid("potential must vanish at the root"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid("potential must be finite"));
        }
        Ok(Self {
            tree: tree.clone().with_planted(true),
            v,
        })
    }
}

pub fn tree_potential(cond: &TreeConductances) -> TreePotential {
    let root = cond.tree.root();
    let v = (0..cond.n())
        .map(|u| if u == root { 0.0 } else { -cond.c[u].ln() })
        .collect();
    TreePotential {
        tree: cond.tree.clone(),
        v,
    }
}

fn check_vertex(tree: &OrderedTree, u: usize) -> Result<()> {
    if u > tree.n() {
        return Err(invalid(format!("vertex {u} not in the network of {} vertices", tree.n() + 1)));
    }
    Ok(())
}

/// `Σ e^{V(u)}` over the path from `u1` to `u2`, the common ancestor
/// excluded. Vertex `n` is the base.
pub fn tree_resistance(v: &TreePotential, u1: usize, u2: usize) -> Result<f64> {
    let tree = &v.tree;
    check_vertex(tree, u1)?;
    check_vertex(tree, u2)?;
    let (mut a, mut b) = (u1, u2);
    // the two legs are summed separately so that r(u1, u2) = r(u2, u1) exactly
    let (mut ra, mut rb) = (0.0, 0.0);
    while a != b {
        if net_depth(tree, a) >= net_depth(tree, b) {
            ra += v.v[a].exp();
            a = net_parent(tree, a).expect("non-base");
        } else {
            rb += v.v[b].exp();
            b = net_parent(tree, b).expect("non-base");
        }
    }
    Ok(ra + rb)
}

/// `ν(u) = e^{-V(u)} + Σ_i e^{-V(u_i)}`; the base has mass 1.
pub fn tree_invariant(v: &TreePotential, u: usize) -> Result<f64> {
    let tree = &v.tree;
    check_vertex(tree, u)?;
    if u == tree.n() {
        return Ok((-v.v[tree.root()]).exp());
    }
    Ok((-v.v[u]).exp() + tree.children(u).iter().map(|&c| (-v.v[c]).exp()).sum::<f64>())
}

/// Resistance metric and invariant measure with recorded scale factors.
#[derive(Debug, Clone)]
pub struct TreeMetricMeasure {
    potential: TreePotential,
    edge_r: Vec<f64>,
    nu: Vec<f64>,
    r_scale: f64,
    nu_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundleSummary {
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
    pub r_scale: f64,
    pub nu_scale: f64,
}

impl TreeMetricMeasure {
    pub fn new(potential: TreePotential) -> Self {
        let n = potential.tree.n();
        let nu = (0..=n).map(|u| tree_invariant(&potential, u).expect("in range")).collect();
        let edge_r = potential.v.iter().map(|x| x.exp()).collect();
        Self {
            potential,
            edge_r,
            nu,
            r_scale: 1.0,
            nu_scale: 1.0,
        }
    }

    /// Multiplies the current scale factors.
    pub fn rescaled(mut self, r_factor: f64, nu_factor: f64) -> Self {
        self.r_scale *= r_factor;
        self.nu_scale *= nu_factor;
        self
    }

    /// `r̃ = n^{-1/2} r`, `ν̃ = (2n)^{-1} ν` with `n` the tree size.
    pub fn weakly_biased(self) -> Self {
        let n = self.potential.tree.n() as f64;
        self.rescaled(n.powf(-0.5), 1.0 / (2.0 * n))
    }

    pub fn potential(&self) -> &TreePotential {
        &self.potential
    }

    pub fn tree(&self) -> &OrderedTree {
        &self.potential.tree
    }

    pub fn r_scale(&self) -> f64 {
        self.r_scale
    }

    pub fn nu_scale(&self) -> f64 {
        self.nu_scale
    }

    /// Number of network vertices, base included.
    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn resistance(&self, u1: usize, u2: usize) -> Result<f64> {
        Ok(self.r_scale * tree_resistance(&self.potential, u1, u2)?)
    }

    pub fn nu(&self, u: usize) -> f64 {
        self.nu_scale * self.nu[u]
    }

    /// Resistance of the edge between `u` and its network parent.
    pub fn edge_resistance(&self, u: usize) -> f64 {
        self.r_scale * self.edge_r[u]
    }

    /// Neighbors of `x` with jump rates `(2 ν({x}) r(x, y))^{-1}`.
    pub fn jump_rates(&self, x: usize) -> Vec<(usize, f64)> {
        let tree = &self.potential.tree;
        let n = tree.n();
        let k = 1.0 / (2.0 * self.nu(x));
        if x == n {
            let root = tree.root();
            return vec![(root, k / self.edge_resistance(root))];
        }
        let mut out = vec![(net_parent(tree, x).expect("tree vertex"), k / self.edge_resistance(x))];
        out.extend(tree.children(x).iter().map(|&y| (y, k / self.edge_resistance(y))));
        out
    }

    pub fn total_rate(&self, x: usize) -> f64 {
        self.jump_rates(x).iter().map(|(_, q)| q).sum()
    }

    pub fn summary(&self, beta: f64, gamma: f64) -> BundleSummary {
        BundleSummary {
            n: self.potential.tree.n(),
            beta,
            gamma,
            r_scale: self.r_scale,
            nu_scale: self.nu_scale,
        }
    }
}

/// Precomputed neighbor lists with cumulative weights.
#[derive(Debug, Clone)]
struct JumpTable {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    totals: Vec<f64>,
}

impl JumpTable {
    fn build(len: usize, mut f: impl FnMut(usize) -> Vec<(usize, f64)>) -> Self {
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        let mut totals = Vec::with_capacity(len);
        for x in 0..len {
            let nb = f(x);
            totals.push(nb.iter().map(|(_, w)| w).sum());
            for (y, w) in nb {
                targets.push(y);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Self {
            offsets,
            targets,
            weights,
            totals,
        }
    }

    fn step<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let (a, b) = (self.offsets[x], self.offsets[x + 1]);
        let mut u = rng.random::<f64>() * self.totals[x];
        for k in a..b - 1 {
            u -= self.weights[k];
            if u < 0.0 {
                return self.targets[k];
            }
        }
        self.targets[b - 1]
    }
}

/// Discrete-time walk with transitions proportional to conductances.
#[derive(Debug, Clone)]
pub struct DiscreteWalk {
    table: JumpTable,
}

impl DiscreteWalk {
    pub fn new(cond: &TreeConductances) -> Self {
        Self {
            table: JumpTable::build(cond.n() + 1, |x| cond.neighbors(x)),
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        self.table.step(x, rng)
    }

    /// Whether the walk from `start` reaches `a` before `b`.
    pub fn hits_first<R: Rng + ?Sized>(&self, start: usize, a: usize, b: usize, rng: &mut R) -> bool {
        let mut x = start;
        loop {
            x = self.step(x, rng);
            if x == a {
                return true;
            }
            if x == b {
                return false;
            }
        }
    }
}

pub fn simulate_discrete<R: Rng + ?Sized>(
    cond: &TreeConductances,
    start: usize,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_vertex(&cond.tree, start)?;
    let walk = DiscreteWalk::new(cond);
    let mut path = Vec::with_capacity(steps + 1);
    path.push(start);
    let mut x = start;
    for _ in 0..steps {
        x = walk.step(x, rng);
        path.push(x);
    }
    Ok(path)
}

/// Continuous-time path: `vertices[k]` is occupied on `[times[k], times[k+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedPath {
    pub times: Vec<f64>,
    pub vertices: Vec<usize>,
    pub horizon: f64,
}

/// ν-speed motion driven by competing exponential clocks, one per
/// incident edge.
#[derive(Debug, Clone)]
pub struct SpeedMotion {
    table: JumpTable,
}

impl SpeedMotion {
    pub fn new(mm: &TreeMetricMeasure) -> Self {
        Self {
            table: JumpTable::build(mm.len(), |x| mm.jump_rates(x)),
        }
    }

    pub fn total_rate(&self, x: usize) -> f64 {
        self.table.totals[x]
    }

    /// Holding time and next vertex from `x`.
    pub fn jump<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> (f64, usize) {
        let (a, b) = (self.table.offsets[x], self.table.offsets[x + 1]);
        let mut best = (f64::INFINITY, x);
        for k in a..b {
            let t = rng.sample::<f64, _>(Exp1) / self.table.weights[k];
            if t < best.0 {
                best = (t, self.table.targets[k]);
            }
        }
        best
    }

    pub fn run<R: Rng + ?Sized>(&self, start: usize, horizon: f64, rng: &mut R) -> TimedPath {
        let mut times = vec![0.0];
        let mut vertices = vec![start];
        let mut t = 0.0;
        let mut x = start;
        loop {
            let (h, y) = self.jump(x, rng);
            if t + h > horizon {
                break;
            }
            t += h;
            x = y;
            times.push(t);
            vertices.push(x);
        }
        TimedPath {
            times,
            vertices,
            horizon,
        }
    }

    /// Adds to `occupation` the time spent at each vertex before the
    /// first visit to `target`.
    pub fn occupation_before_hit<R: Rng + ?Sized>(
        &self,
        start: usize,
        target: usize,
        occupation: &mut [f64],
        rng: &mut R,
    ) {
        let mut x = start;
        while x != target {
            let (h, y) = self.jump(x, rng);
            occupation[x] += h;
            x = y;
        }
    }

    /// Whether the motion from `start` reaches `a` before `b`.
    pub fn hits_first<R: Rng + ?Sized>(&self, start: usize, a: usize, b: usize, rng: &mut R) -> bool {
        let mut x = start;
        loop {
            x = self.jump(x, rng).1;
            if x == a {
                return true;
            }
            if x == b {
                return false;
            }
        }
    }
}

pub fn simulate_speed_motion<R: Rng + ?Sized>(
    mm: &TreeMetricMeasure,
    start: usize,
    horizon: f64,
    rng: &mut R,
) -> Result<TimedPath> {
    if !(horizon > 0.0) {
        return Err(invalid("horizon must be positive"));
    }
    check_vertex(mm.tree(), start)?;
    Ok(SpeedMotion::new(mm).run(start, horizon, rng))
}

/// Effective resistance between `u1` and `u2` from the Dirichlet
/// principle: solve for the harmonic potential with `f(u1) = 0`,
/// `f(u2) = 1` and invert its energy. `edges` are `(x, y, conductance)`.
pub fn effective_resistance_variational(
    vertices: usize,
    edges: &[(usize, usize, f64)],
    u1: usize,
    u2: usize,
) -> Result<f64> {
    if vertices == 0 {
        return Err(Error::EmptyInput("network"));
    }
    if vertices > 1000 {
        return Err(invalid("variational solver limited to 1000 vertices"));
    }
    if u1 >= vertices || u2 >= vertices {
        return Err(invalid("terminal outside the network"));
    }
    let mut adj = vec![Vec::new(); vertices];
    for &(x, y, c) in edges {
        if x >= vertices || y >= vertices {
            return Err(invalid("edge endpoint outside the network"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("conductances must be positive and finite"));
        }
        adj[x].push((y, c));
        adj[y].push((x, c));
    }
    let mut seen = vec![false; vertices];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &(y, _) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    if let Some(x) = seen.iter().position(|s| !s) {
        return Err(Error::Disconnected(format!("vertex {x} unreachable")));
    }
    if u1 == u2 {
        return Ok(0.0);
    }
    let interior: Vec<usize> = (0..vertices).filter(|&x| x != u1 && x != u2).collect();
    let mut slot = vec![usize::MAX; vertices];
    for (k, &x) in interior.iter().enumerate() {
        slot[x] = k;
    }
    let m = interior.len();
    let mut f = vec![0.0; vertices];
    f[u2] = 1.0;
    if m > 0 {
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for (k, &x) in interior.iter().enumerate() {
            for &(y, c) in &adj[x] {
                a[(k, k)] += c;
                if y == u2 {
                    rhs[k] += c;
                } else if y != u1 {
                    a[(k, slot[y])] -= c;
                }
            }
        }
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("singular Laplacian block".into()))?;
        for (k, &x) in interior.iter().enumerate() {
            f[x] = sol[k];
        }
    }
    let energy: f64 = edges.iter().map(|&(x, y, c)| c * (f[x] - f[y]).powi(2)).sum();
    if !(energy > 0.0) {
        return Err(Error::Numerical("zero Dirichlet energy".into()));
    }
    Ok(1.0 / energy)
}

/// Writes `t,vertex,phi1..phid` rows; the base sits at the origin.
pub fn write_timed_path<W: Write>(path: &TimedPath, marks: Option<&SpatialMarks>, mut w: W) -> Result<()> {
    let d = marks.map_or(0, |m| m.dim());
    write!(w, "t,vertex")?;
    for k in 1..=d {
        write!(w, ",phi{k}")?;
    }
    writeln!(w)?;
    for (t, &u) in path.times.iter().zip(&path.vertices) {
        write!(w, "{t},{u}")?;
        if let Some(m) = marks {
            if u < m.n() {
                for x in m.position(u) {
                    write!(w, ",{x}")?;
                }
            } else {
                for _ in 0..d {
                    write!(w, ",0")?;
                }
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::treecore::{embed_brw, sample_gw_conditioned, GaussianSteps, OffspringDistribution};

    fn random_bundle(n: usize, seed: u64) -> (OrderedTree, SpatialMarks, TreeConductances) {
        let mut rng = seeded(seed);
        let t = sample_gw_conditioned(&OffspringDistribution::geometric(), n, 1_000_000, &mut rng).unwrap();
        let m = embed_brw(&t, &GaussianSteps::isotropic(2, 1.0).unwrap(), &mut rng).unwrap();
        let c = biased_conductances(&t, &m, 3.0, 0.7, None).unwrap();
        (t, m, c)
    }

    #[test]
    fn unbiased_is_simple() {
        let (t, m, _) = random_bundle(30, 1);
        let c = biased_conductances(&t, &m, 1.0, 1.0, None).unwrap();
        assert!(c.values().iter().all(|&x| x == 1.0));
        let v = tree_potential(&c);
        assert!(v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn max_rule_substitution() {
        let t = OrderedTree::path(3, false).unwrap();
        let m = SpatialMarks::from_increments(&t, 1, vec![0.0, 2.0, -1.0]).unwrap();
        let c = biased_conductances(&t, &m, std::f64::consts::E, 1.0, None).unwrap();
        assert_eq!(c.edge(0), 1.0);
        assert!((c.edge(1) - 2f64.exp()).abs() < 1e-12);
        assert!((c.edge(2) - 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn parameter_checks() {
        let (t, m, _) = random_bundle(10, 2);
        assert!(biased_conductances(&t, &m, 0.5, 1.0, None).is_err());
        assert!(biased_conductances(&t, &m, 2.0, 0.0, None).is_err());
        assert!(biased_conductances(&t, &m, 2.0, 1.0, Some(&[1.0, 1.0])).is_err());
        assert!(biased_conductances(&t, &m, 2.0, 1.0, Some(&[0.6, 0.8])).is_ok());
    }

    #[test]
    fn potential_identity() {
        let (t, m, c) = random_bundle(200, 3);
        let v = tree_potential(&c);
        assert_eq!(v.value(t.root()), 0.0);
        let lb = 3f64.ln();
        for u in 0..t.n() {
            if let Some(p) = t.parent(u) {
                let delta = m.first(u) - m.first(p);
                let expected = -lb * 0.7 * (m.first(p) + delta.max(0.0));
                assert!((v.value(u) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resistance_and_invariant_basics() {
        let t = OrderedTree::star(2, false);
        let c = TreeConductances::unit(&t);
        let v = tree_potential(&c);
        assert_eq!(tree_invariant(&v, 0).unwrap(), 3.0);
        assert_eq!(tree_invariant(&v, 1).unwrap(), 1.0);
        assert_eq!(tree_invariant(&v, 3).unwrap(), 1.0);
        assert_eq!(tree_resistance(&v, 1, 2).unwrap(), 2.0);
        assert_eq!(tree_resistance(&v, 1, 1).unwrap(), 0.0);
        assert_eq!(tree_resistance(&v, 3, 2).unwrap(), 2.0);
        assert!(tree_resistance(&v, 4, 0).is_err());
    }

    #[test]
    fn series_law_matches_potential_sum() {
        let (t, _, c) = random_bundle(80, 4);
        let v = tree_potential(&c);
        let mut rng = seeded(40);
        for _ in 0..200 {
            let a = rng.random_range(0..=t.n());
            let b = rng.random_range(0..=t.n());
            let l = net_lca(&t, a, b);
            let mut series = 0.0;
            for mut x in [a, b] {
                while x != l {
                    series += 1.0 / c.edge(x);
                    x = net_parent(&t, x).unwrap();
                }
            }
            let r = tree_resistance(&v, a, b).unwrap();
            assert!((r - series).abs() <= 1e-12 * r.max(1.0));
        }
    }

    #[test]
    fn variational_examples() {
        assert!((effective_resistance_variational(2, &[(0, 1, 1.0)], 0, 1).unwrap() - 1.0).abs() < 1e-14);
        let r = effective_resistance_variational(3, &[(0, 1, 0.5), (1, 2, 0.25)], 0, 2).unwrap();
        assert!((r - 6.0).abs() < 1e-12);
        assert!(matches!(
            effective_resistance_variational(3, &[(0, 1, 1.0)], 0, 1),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn variational_equals_path_sum() {
        let (t, _, c) = random_bundle(50, 5);
        let v = tree_potential(&c);
        let edges = c.network_edges();
        let mut rng = seeded(50);
        for _ in 0..10 {
            let a = rng.random_range(0..=t.n());
            let b = rng.random_range(0..=t.n());
            let x = effective_resistance_variational(t.n() + 1, &edges, a, b).unwrap();
            let y = tree_resistance(&v, a, b).unwrap();
            assert!((x - y).abs() < 1e-8 * y.max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn line_rates() {
        let t = OrderedTree::path(5, false).unwrap();
        let mm = TreeMetricMeasure::new(tree_potential(&TreeConductances::unit(&t)));
        // interior vertex: ν = 2, r = 1
        assert_eq!(mm.nu(2), 2.0);
        for (_, q) in mm.jump_rates(2) {
            assert_eq!(q, 0.25);
        }
        assert_eq!(mm.total_rate(2), 0.5);
    }

    #[test]
    fn discrete_path_shape() {
        let (_, _, c) = random_bundle(20, 6);
        let mut rng = seeded(60);
        assert_eq!(simulate_discrete(&c, 0, 0, &mut rng).unwrap(), vec![0]);
        let p = simulate_discrete(&c, 0, 100, &mut rng).unwrap();
        assert_eq!(p.len(), 101);
        for w in p.windows(2) {
            assert!(c.neighbors(w[0]).iter().any(|(y, _)| *y == w[1]));
        }
    }

    #[test]
    fn speed_motion_respects_horizon() {
        let (_, _, c) = random_bundle(20, 7);
        let mm = TreeMetricMeasure::new(tree_potential(&c));
        let mut rng = seeded(70);
        assert!(simulate_speed_motion(&mm, 0, 0.0, &mut rng).is_err());
        let p = simulate_speed_motion(&mm, 0, 50.0, &mut rng).unwrap();
        assert!(p.times.windows(2).all(|w| w[0] < w[1]));
        assert!(*p.times.last().unwrap() <= 50.0);
    }
}
