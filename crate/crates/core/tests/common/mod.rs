#![allow(dead_code)]

use proptest::prelude::*;
use rwre_core::treecore::OrderedTree;

/// Random recursive tree: vertex `i` hangs below a uniform earlier vertex.
pub fn tree_strategy(min: usize, max: usize) -> impl Strategy<Value = OrderedTree> {
    (min..=max)
        .prop_flat_map(|n| {
            let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|i| (0..i).boxed()).collect();
            parents
        })
        .prop_map(|ps| {
            let mut parents = vec![None];
            parents.extend(ps.into_iter().map(Some));
            OrderedTree::from_parents(&parents, true).unwrap()
        })
}

/// `|observed - expected| <= k · se`.
pub fn within(observed: f64, expected: f64, se: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * se
}

/// All unordered rooted trees (as parent arrays, root 0) with `n` vertices,
/// one per isomorphism class.
pub fn rooted_shapes(n: usize) -> Vec<OrderedTree> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut ps = vec![0usize; n.saturating_sub(1)];
    loop {
        let mut parents = vec![None];
        parents.extend(ps.iter().map(|&p| Some(p)));
        let t = OrderedTree::from_parents(&parents, true).unwrap();
        if seen.insert(canonical(&t, t.root())) {
            out.push(t);
        }
        // odometer over p[i] in [0, i]
        let mut k = 0;
        loop {
            if k == ps.len() {
                return out;
            }
            if ps[k] < k {
                ps[k] += 1;
                break;
            }
            ps[k] = 0;
            k += 1;
        }
    }
}

fn canonical(t: &OrderedTree, u: usize) -> String {
    let mut parts: Vec<String> = t.children(u).iter().map(|&c| canonical(t, c)).collect();
    parts.sort();
    format!("({})", parts.concat())
}

/// Mean and variance of the density `√(α/2π) exp(-2α sinh²(x/2) + x/2)`
/// by the composite Simpson rule.
pub fn sinh_moments(alpha: f64) -> (f64, f64) {
    let half = 40.0 / alpha.sqrt() + 10.0;
    let k = 200_000;
    let h = 2.0 * half / k as f64;
    let dens = |x: f64| {
        let s = (0.5 * x).sinh();
        (alpha / (2.0 * std::f64::consts::PI)).sqrt() * (-2.0 * alpha * s * s + 0.5 * x).exp()
    };
    let mut m = [0.0; 3];
    for i in 0..=k {
        let x = -half + i as f64 * h;
        let w = if i == 0 || i == k { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let d = w * dens(x);
        m[0] += d;
        m[1] += d * x;
        m[2] += d * x * x;
    }
    let mean = m[1] / m[0];
    (mean, m[2] / m[0] - mean * mean)
}
