use std::io::Write;

use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use super::excursion::CodedTree;
use crate::error::{invalid, Error, Result};

/// Maximum number of distinct sample times for the dense factorization.
pub const MAX_FIELD_TIMES: usize = 2000;
const JITTERS: [f64; 5] = [0.0, 1e-15, 1e-14, 1e-13, 1e-12];

/// Gaussian field sampled at grid indices of a coded tree.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianField {
    pub times: Vec<usize>,
    pub dim: usize,
    /// `times.len() × dim`, row-major.
    pub values: Vec<f64>,
    /// Row-major `dim × dim` factor `F`; the covariance is
    /// `m_g(s, u) · F Fᵀ`.
    pub coefficient: Vec<f64>,
}

impl GaussianField {
    pub fn value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn write_csv<W: Write>(&self, steps: usize, mut w: W) -> Result<()> {
        write!(w, "t")?;
        for k in 1..=self.dim {
            write!(w, ",phi{k}")?;
        }
        writeln!(w)?;
        for (k, &i) in self.times.iter().enumerate() {
            write!(w, "{}", i as f64 / steps as f64)?;
            for x in self.value(k) {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Cholesky factor of the covariance `m_g` over the distinct non-root
/// classes among the requested times, reusable across draws.
#[derive(Debug, Clone)]
pub struct GaussianFieldSampler {
    times: Vec<usize>,
    row: Vec<Option<usize>>,
    factor: DMatrix<f64>,
}

impl GaussianFieldSampler {
    pub fn new(tree: &CodedTree, times: &[usize]) -> Result<Self> {
        if times.iter().any(|&i| i > tree.steps()) {
            return Err(invalid("sample time outside the grid"));
        }
        let rep = tree.class_representatives();
        let mut classes: Vec<usize> = times
            .iter()
            .map(|&i| rep[i])
            .filter(|&r| tree.root_distance(r) > 0.0)
            .collect();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() > MAX_FIELD_TIMES {
            return Err(invalid(format!(
                "{} distinct sample points exceed the limit of {MAX_FIELD_TIMES}",
                classes.len()
            )));
        }
        let row = times
            .iter()
            .map(|&i| classes.binary_search(&rep[i]).ok())
            .collect();
        let k = classes.len();
        let g = tree.excursion();
        let cov = DMatrix::from_fn(k, k, |a, b| g.min_between(classes[a], classes[b]));
        let mut factor = None;
        for jitter in JITTERS {
            let mut m = cov.clone();
            for a in 0..k {
                m[(a, a)] += jitter;
            }
            if let Some(ch) = Cholesky::new(m) {
                factor = Some(ch.l());
                break;
            }
        }
        let factor = factor.ok_or_else(|| {
            Error::Numerical("covariance not positive definite within jitter 1e-12".into())
        })?;
        Ok(Self {
            times: times.to_vec(),
            row,
            factor,
        })
    }

    /// One draw in `ℝ^d`; `coefficient` is an optional `d × d` factor.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, coefficient: Option<&[f64]>, rng: &mut R) -> Result<GaussianField> {
        if dim == 0 {
            return Err(invalid("dimension must be >= 1"));
        }
        let coef = match coefficient {
            Some(c) if c.len() == dim * dim => c.to_vec(),
            Some(_) => return Err(invalid("coefficient must be d × d")),
            None => {
                let mut id = vec![0.0; dim * dim];
                (0..dim).for_each(|a| id[a * dim + a] = 1.0);
                id
            }
        };
        let k = self.factor.nrows();
        let mut coords = vec![vec![0.0; k]; dim];
        for c in coords.iter_mut() {
            let z: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            for a in 0..k {
                c[a] = (0..=a).map(|b| self.factor[(a, b)] * z[b]).sum();
            }
        }
        let mut values = vec![0.0; self.times.len() * dim];
        for (t, r) in self.row.iter().enumerate() {
            if let Some(r) = *r {
                for a in 0..dim {
                    values[t * dim + a] = (0..dim).map(|b| coef[a * dim + b] * coords[b][r]).sum();
                }
            }
        }
        Ok(GaussianField {
            times: self.times.clone(),
            dim,
            values,
            coefficient: coef,
        })
    }
}

/// Centered Gaussian field with `Cov(φ(s), φ(u)) = m_g(s, u) · I`.
pub fn sample_gaussian_field<R: Rng + ?Sized>(
    tree: &CodedTree,
    times: &[usize],
    dim: usize,
    rng: &mut R,
) -> Result<GaussianField> {
    GaussianFieldSampler::new(tree, times)?.sample(dim, None, rng)
}

/// `U = √2 φ¹ + d(ρ, ·)` at the field's sample times.
pub fn gaussian_drift_values(tree: &CodedTree, field: &GaussianField) -> Vec<f64> {
    field
        .times
        .iter()
        .enumerate()
        .map(|(k, &i)| std::f64::consts::SQRT_2 * field.value(k)[0] + tree.root_distance(i))
        .collect()
}
