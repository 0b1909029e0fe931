use super::excursion::{CodedTree, Excursion};
use crate::error::{Error, Result};
use crate::treecore::{contour, OrderedTree};

/// Path integrals `∫ f dλ` along a coded tree, with `f` given on the grid.
///
/// `prev[t]` is the last index before `t` with a strictly lower value; it
/// is the next grid ancestor of `t` on the way to the root, and the
/// integral from the root is accumulated along that chain by trapezoids.
#[derive(Debug, Clone)]
pub struct DistortedMetric<'a> {
    tree: &'a CodedTree,
    prev: Vec<usize>,
    integral: Vec<f64>,
}

impl<'a> DistortedMetric<'a> {
    /// `weight[t]` is the integrand at grid index `t`.
    pub fn new(tree: &'a CodedTree, weight: &[f64]) -> Result<Self> {
        let g = tree.excursion().values();
        if weight.len() != g.len() {
            return Err(Error::Consistency("one weight per grid point expected".into()));
        }
        let mut prev = vec![usize::MAX; g.len()];
        let mut integral = vec![0.0; g.len()];
        let mut stack: Vec<usize> = Vec::new();
        for t in 0..g.len() {
            while let Some(&top) = stack.last() {
                if g[top] >= g[t] {
                    stack.pop();
                } else {
                    break;
                }
            }
            if let Some(&p) = stack.last() {
                prev[t] = p;
                integral[t] = integral[p] + (g[t] - g[p]) * 0.5 * (weight[t] + weight[p]);
            }
            stack.push(t);
        }
        Ok(Self { tree, prev, integral })
    }

    /// Integral from the root to the grid point `t`.
    pub fn root_integral(&self, t: usize) -> f64 {
        self.integral[t]
    }

    /// Integral from the root to the ancestor of `t` at height `h`.
    fn integral_at_height(&self, t: usize, h: f64) -> f64 {
        let g = self.tree.excursion().values();
        let mut a = t;
        loop {
            if g[a] <= h {
                return self.integral[a];
            }
            let p = self.prev[a];
            if p == usize::MAX {
                return 0.0;
            }
            if g[p] <= h {
                let w = (h - g[p]) / (g[a] - g[p]);
                return self.integral[p] + w * (self.integral[a] - self.integral[p]);
            }
            a = p;
        }
    }

    /// Integral along the tree path between grid points `s` and `u`.
    pub fn distance(&self, s: usize, u: usize) -> f64 {
        let m = self.tree.excursion().min_between(s, u);
        (self.integral[s] - self.integral_at_height(s, m)) + (self.integral[u] - self.integral_at_height(u, m))
    }
}

/// `∫_{[[s,u]]} e^{σ ψ} dλ` between grid points `s` and `u`.
pub fn distorted_metric(tree: &CodedTree, psi: &[f64], sigma: f64, s: usize, u: usize) -> Result<f64> {
    let w: Vec<f64> = psi.iter().map(|p| (sigma * p).exp()).collect();
    Ok(DistortedMetric::new(tree, &w)?.distance(s, u))
}

/// `ẽ(t) = ∫_{[[ρ, p(t)]]} e^{-σ ψ} dλ`.
pub fn tilted_excursion(tree: &CodedTree, psi: &[f64], sigma: f64) -> Result<Excursion> {
    let w: Vec<f64> = psi.iter().map(|p| (-sigma * p).exp()).collect();
    let d = DistortedMetric::new(tree, &w)?;
    Excursion::new((0..w.len()).map(|t| d.root_integral(t)).collect())
}

/// `C̃(i) = Σ e^{-γ V(u)}` over the non-root vertices on the path from the
/// root to the `i`-th contour vertex.
pub fn distorted_contour(tree: &OrderedTree, potential: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if potential.len() != tree.n() {
        return Err(Error::Consistency("one potential value per vertex expected".into()));
    }
    let mut acc = vec![0.0; tree.n()];
    for u in tree.preorder() {
        if let Some(p) = tree.parent(u) {
            acc[u] = acc[p] + (-gamma * potential[u]).exp();
        }
    }
    Ok(contour(tree).visits.iter().map(|&u| acc[u]).collect())
}
