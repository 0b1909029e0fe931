use rand::Rng;

use super::potential::ContinuumPotential;
use crate::chain::{BirthDeathChain, Law1D};
use crate::error::{invalid, Result};

/// Jump times and positions of a one-dimensional path started at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
}

/// Birth–death chain on `hℤ` for the diffusion in the potential `W`:
/// `r_h` is the trapezoid rule for `∫ e^W` over a cell, `ν_h(x)` half of
/// the trapezoid masses of `2e^{-W}` on the two cells at `x`, and the jump
/// rates are `(ν_h(x) r_h(x, x±h))^{-1}`. With `W ≡ 0` this is the
/// simple walk converging to standard Brownian motion.
///
/// `h` must be a whole multiple of the potential's mesh.
pub fn brox_chain(w: &ContinuumPotential, h: f64) -> Result<BirthDeathChain> {
    if !(h > 0.0) {
        return Err(invalid("mesh must be positive"));
    }
    let ratio = h / w.mesh;
    let stride = ratio.round() as usize;
    if stride == 0 || (ratio - stride as f64).abs() > 1e-9 * ratio.max(1.0) {
        return Err(invalid("brox mesh must be a multiple of the potential mesh"));
    }
    let left = w.origin / stride;
    let right = (w.values.len() - 1 - w.origin) / stride;
    let nodes: Vec<f64> = (0..=left + right)
        .map(|k| w.values[w.origin + k * stride - left * stride])
        .collect();
    let n = nodes.len();
    if n < 2 {
        return Err(invalid("potential window shorter than one brox cell"));
    }
    let r: Vec<f64> = (0..n - 1)
        .map(|i| 0.5 * h * (nodes[i].exp() + nodes[i + 1].exp()))
        .collect();
    let mass: Vec<f64> = (0..n - 1)
        .map(|i| h * ((-nodes[i]).exp() + (-nodes[i + 1]).exp()))
        .collect();
    let mut up = vec![0.0; n];
    let mut down = vec![0.0; n];
    for i in 0..n {
        // beyond the window the end cell is repeated
        let ml = mass[i.saturating_sub(1).min(n - 2)];
        let mr = mass[i.min(n - 2)];
        let nu = 0.5 * (ml + mr);
        let rl = r[i.saturating_sub(1).min(n - 2)];
        let rr = r[i.min(n - 2)];
        up[i] = 1.0 / (nu * rr);
        down[i] = 1.0 / (nu * rl);
    }
    BirthDeathChain::new(left, h, up, down)
}

/// Brox path on `[0, horizon]` from 0; leaving the window is an error.
pub fn brox_simulate<R: Rng + ?Sized>(w: &ContinuumPotential, horizon: f64, h: f64, rng: &mut R) -> Result<PathSample> {
    let chain = brox_chain(w, h)?;
    let mut times = Vec::new();
    let mut positions = Vec::new();
    chain.simulate(chain.origin(), horizon, rng, |t, i| {
        times.push(t);
        positions.push(chain.position(i));
    })?;
    Ok(PathSample { times, positions })
}

/// Law of the mesh-`h` chain at `time`, from the forward equation.
pub fn brox_law(w: &ContinuumPotential, h: f64, time: f64, steps: usize) -> Result<Law1D> {
    let chain = brox_chain(w, h)?;
    chain.law_at(chain.origin(), time, steps)
}
