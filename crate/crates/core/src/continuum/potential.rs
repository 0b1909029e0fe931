use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::excursion::CodedTree;
use super::field::{gaussian_drift_values, GaussianFieldSampler};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `σ W` with `W` a two-sided standard Brownian motion.
    TwoSidedBm,
    /// `log(q/p) N` with `N` a two-sided rate-`λ` Poisson counting process.
    PoissonLog,
    /// `√2 φ + d(ρ, ·)` on a coded tree.
    GaussianDrift,
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided-bm" => Ok(Self::TwoSidedBm),
            "poisson-log" => Ok(Self::PoissonLog),
            "gaussian-drift" => Ok(Self::GaussianDrift),
            other => Err(invalid(format!("unknown potential kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub sigma: f64,
    pub p: f64,
    pub lambda: f64,
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            p: 0.5,
            lambda: 1.0,
        }
    }
}

/// Where the potential lives.
#[derive(Debug, Clone, Copy)]
pub enum PotentialDomain<'a> {
    /// Grid `k · mesh`, `|k · mesh| <= half_width`.
    Line { half_width: f64, mesh: f64 },
    /// Grid indices of a coded tree.
    Tree { tree: &'a CodedTree, times: &'a [usize] },
}

/// Sampled potential: `values[k]` at `positions[k]`; `origin` indexes the
/// point where the potential is pinned to 0 (line kinds).
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumPotential {
    pub kind: PotentialKind,
    pub params: PotentialParams,
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
    pub origin: usize,
    pub mesh: f64,
}

impl ContinuumPotential {
    /// Two-sided line potential from values on the grid `(k - origin)·mesh`.
    pub fn on_line(kind: PotentialKind, params: PotentialParams, mesh: f64, origin: usize, values: Vec<f64>) -> Result<Self> {
        if !(mesh > 0.0) || origin >= values.len() {
            return Err(invalid("bad line grid"));
        }
        let positions = (0..values.len()).map(|k| (k as f64 - origin as f64) * mesh).collect();
        Ok(Self {
            kind,
            params,
            positions,
            values,
            origin,
            mesh,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,value")?;
        for (x, v) in self.positions.iter().zip(&self.values) {
            writeln!(w, "{x},{v}")?;
        }
        Ok(())
    }
}

pub fn make_potential<R: Rng + ?Sized>(
    kind: PotentialKind,
    params: PotentialParams,
    domain: PotentialDomain<'_>,
    rng: &mut R,
) -> Result<ContinuumPotential> {
    match (kind, domain) {
        (PotentialKind::TwoSidedBm | PotentialKind::PoissonLog, PotentialDomain::Line { half_width, mesh }) => {
            if !(mesh > 0.0 && half_width >= 0.0) {
                return Err(invalid("line grid needs mesh > 0 and half_width >= 0"));
            }
            let k = (half_width / mesh + 1e-9).floor() as usize;
            let mut values = vec![0.0; 2 * k + 1];
            let mut step: Box<dyn FnMut(&mut R) -> f64> = match kind {
                PotentialKind::TwoSidedBm => {
                    if !(params.sigma >= 0.0) {
                        return Err(invalid("sigma must be >= 0"));
                    }
                    let sd = params.sigma * mesh.sqrt();
                    Box::new(move |r: &mut R| sd * r.sample::<f64, _>(StandardNormal))
                }
                _ => {
                    if !(params.p > 0.0 && params.p < 1.0 && params.lambda > 0.0) {
                        return Err(invalid("poisson-log needs 0 < p < 1 and lambda > 0"));
                    }
                    let jump = ((1.0 - params.p) / params.p).ln();
                    let pois = Poisson::new(params.lambda * mesh).map_err(|e| invalid(e.to_string()))?;
                    Box::new(move |r: &mut R| jump * pois.sample(r))
                }
            };
            for i in k + 1..values.len() {
                values[i] = values[i - 1] + step(rng);
            }
            for i in (0..k).rev() {
                values[i] = values[i + 1] - step(rng);
            }
            ContinuumPotential::on_line(kind, params, mesh, k, values)
        }
        (PotentialKind::GaussianDrift, PotentialDomain::Tree { tree, times }) => {
            let field = GaussianFieldSampler::new(tree, times)?.sample(1, None, rng)?;
            let steps = tree.steps() as f64;
            Ok(ContinuumPotential {
                kind,
                params,
                positions: times.iter().map(|&i| i as f64 / steps).collect(),
                values: gaussian_drift_values(tree, &field),
                origin: 0,
                mesh: 1.0 / steps,
            })
        }
        (k, _) => Err(invalid(format!("potential kind {k:?} does not live on this domain"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn pinned_at_origin() {
        let mut rng = seeded(1);
        let w = make_potential(
            PotentialKind::TwoSidedBm,
            PotentialParams::default(),
            PotentialDomain::Line { half_width: 5.0, mesh: 0.01 },
            &mut rng,
        )
        .unwrap();
        assert_eq!(w.values[w.origin], 0.0);
        assert_eq!(w.positions[w.origin], 0.0);
        assert_eq!(w.values.len(), 1001);
    }

    #[test]
    fn fair_poisson_is_flat() {
        let mut rng = seeded(2);
        let params = PotentialParams { p: 0.5, lambda: 3.0, ..Default::default() };
        let w = make_potential(
            PotentialKind::PoissonLog,
            params,
            PotentialDomain::Line { half_width: 5.0, mesh: 0.1 },
            &mut rng,
        )
        .unwrap();
        assert!(w.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn poisson_jumps_are_multiples() {
        let mut rng = seeded(3);
        let params = PotentialParams { p: 0.25, lambda: 3.0, ..Default::default() };
        let w = make_potential(
            PotentialKind::PoissonLog,
            params,
            PotentialDomain::Line { half_width: 5.0, mesh: 0.1 },
            &mut rng,
        )
        .unwrap();
        let j = 3f64.ln();
        for d in w.values.windows(2) {
            let k = (d[1] - d[0]) / j;
            assert!((k - k.round()).abs() < 1e-9 && k >= -1e-9);
        }
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("two-sided-bm".parse::<PotentialKind>().unwrap(), PotentialKind::TwoSidedBm);
        assert!("levy".parse::<PotentialKind>().is_err());
    }

    #[test]
    fn domain_mismatch_rejected() {
        let mut rng = seeded(4);
        let r = make_potential(
            PotentialKind::GaussianDrift,
            PotentialParams::default(),
            PotentialDomain::Line { half_width: 1.0, mesh: 0.1 },
            &mut rng,
        );
        assert!(r.is_err());
    }
}
