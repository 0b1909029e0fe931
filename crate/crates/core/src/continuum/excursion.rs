use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Nonnegative function on the grid `i / N`, `i = 0..=N`, vanishing at
/// both ends, with constant-time range minima.
#[derive(Debug, Clone)]
pub struct Excursion {
    values: Vec<f64>,
    table: Vec<Vec<u32>>,
}

impl Excursion {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("an excursion needs at least two grid points"));
        }
        if values.len() > u32::MAX as usize {
            return Err(invalid("grid too large"));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(invalid("an excursion must vanish at both ends"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("an excursion must be finite and nonnegative"));
        }
        let table = sparse_table(&values);
        Ok(Self { values, table })
    }

    /// Number of grid steps `N`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Grid index nearest to the time `t ∈ [0, 1]` (ties round up).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("time {t} outside [0, 1]")));
        }
        Ok(((t * self.steps() as f64).round() as usize).min(self.steps()))
    }

    pub fn time_of(&self, i: usize) -> f64 {
        i as f64 / self.steps() as f64
    }

    /// Index of the leftmost minimum on `[min(i,j), max(i,j)]`.
    pub fn argmin_between(&self, i: usize, j: usize) -> usize {
        let (a, b) = (i.min(j), i.max(j));
        let k = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        let x = self.table[k][a] as usize;
        let y = self.table[k][b + 1 - (1 << k)] as usize;
        if self.values[y] < self.values[x] {
            y
        } else {
            x
        }
    }

    /// `m_g(i, j)`.
    pub fn min_between(&self, i: usize, j: usize) -> f64 {
        self.values[self.argmin_between(i, j)]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| c * v).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,g")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.time_of(i), v)?;
        }
        Ok(())
    }
}

fn sparse_table(v: &[f64]) -> Vec<Vec<u32>> {
    let n = v.len();
    let mut table = vec![(0..n as u32).collect::<Vec<u32>>()];
    let mut k = 1;
    while (1 << k) <= n {
        let prev = &table[k - 1];
        let half = 1 << (k - 1);
        let row = (0..=n - (1 << k))
            .map(|i| {
                let (x, y) = (prev[i], prev[i + half]);
                if v[y as usize] < v[x as usize] {
                    y
                } else {
                    x
                }
            })
            .collect();
        table.push(row);
        k += 1;
    }
    table
}

/// Normalized excursion on `N` steps: the Vervaat transform of a Brownian
/// bridge sampled on the grid. The bridge minimum inside each cell is drawn
/// from its exact conditional law given the endpoint values, and the path
/// is rotated to the cell holding the overall minimum and shifted by it;
/// only the sub-cell position of the minimum is discarded.
pub fn sample_excursion<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Excursion> {
    if n < 2 {
        return Err(invalid("grid size must be >= 2"));
    }
    let var = (n as f64).recip();
    let sd = var.sqrt();
    let mut walk = vec![0.0; n + 1];
    for k in 1..=n {
        let z: f64 = rng.sample(StandardNormal);
        walk[k] = walk[k - 1] + sd * z;
    }
    let end = walk[n];
    for (k, w) in walk.iter_mut().enumerate() {
        *w -= end * k as f64 / n as f64;
    }
    // P(min < y | a, b) = exp(-2 (a - y)(b - y) / var)
    let mut cell = 0;
    let mut base = f64::INFINITY;
    for k in 0..n {
        let (a, b) = (walk[k], walk[k + 1]);
        let u: f64 = 1.0 - rng.random::<f64>();
        let low = 0.5 * (a + b - ((a - b).powi(2) - 2.0 * var * u.ln()).sqrt());
        if low < base {
            base = low;
            cell = k;
        }
    }
    let m = cell + 1;
    let mut values: Vec<f64> = (0..=n).map(|i| (walk[(m + i) % n] - base).max(0.0)).collect();
    values[0] = 0.0;
    values[n] = 0.0;
    Excursion::new(values)
}

/// Normalized excursion on `N` steps as the norm of a three-dimensional
/// Brownian bridge; exact in law at the grid points.
pub fn sample_excursion_bessel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Excursion> {
    if n < 2 {
        return Err(invalid("grid size must be >= 2"));
    }
    let sd = (n as f64).sqrt().recip();
    let mut coords = [vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]];
    for c in coords.iter_mut() {
        for k in 1..=n {
            let z: f64 = rng.sample(StandardNormal);
            c[k] = c[k - 1] + sd * z;
        }
        let end = c[n];
        for (k, w) in c.iter_mut().enumerate() {
            *w -= end * k as f64 / n as f64;
        }
    }
    let mut values: Vec<f64> = (0..=n)
        .map(|i| (coords[0][i].powi(2) + coords[1][i].powi(2) + coords[2][i].powi(2)).sqrt())
        .collect();
    values[0] = 0.0;
    values[n] = 0.0;
    Excursion::new(values)
}

/// Real tree coded by an excursion `g`:
/// `d_g(s, t) = g(s) + g(t) - 2 m_g(s, t)`, rooted at the class of 0.
#[derive(Debug, Clone)]
pub struct CodedTree {
    excursion: Excursion,
}

impl CodedTree {
    pub fn new(excursion: Excursion) -> Self {
        Self { excursion }
    }

    pub fn excursion(&self) -> &Excursion {
        &self.excursion
    }

    pub fn steps(&self) -> usize {
        self.excursion.steps()
    }

    /// Distance between grid indices.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let g = &self.excursion;
        (g.value(i) + g.value(j) - 2.0 * g.min_between(i, j)).max(0.0)
    }

    pub fn root_distance(&self, i: usize) -> f64 {
        self.excursion.value(i)
    }

    /// Representative of each grid index's class: the first index `j <= i`
    /// with `d_g(j, i) = 0`.
    pub fn class_representatives(&self) -> Vec<usize> {
        let v = self.excursion.values();
        let mut rep = vec![0usize; v.len()];
        let mut stack: Vec<usize> = Vec::new();
        for i in 0..v.len() {
            while let Some(&top) = stack.last() {
                if v[top] > v[i] {
                    stack.pop();
                } else {
                    break;
                }
            }
            rep[i] = match stack.last() {
                Some(&top) if v[top] == v[i] => rep[top],
                _ => i,
            };
            stack.push(i);
        }
        rep
    }

    /// Image of the uniform measure on the grid cells `[i/N, (i+1)/N)`,
    /// `i < N`, as `(representative, mass)` pairs.
    pub fn mass_measure(&self) -> Vec<(usize, f64)> {
        let rep = self.class_representatives();
        let n = self.steps();
        let mut mass = vec![0.0; n + 1];
        for &r in rep.iter().take(n) {
            mass[r] += 1.0 / n as f64;
        }
        (0..=n).filter(|&i| mass[i] > 0.0).map(|i| (i, mass[i])).collect()
    }

    /// Mass of the closed ball of radius `r` around grid index `c`.
    pub fn ball_mass(&self, c: usize, r: f64) -> f64 {
        self.mass_measure()
            .into_iter()
            .filter(|&(i, _)| self.distance(i, c) <= r)
            .map(|(_, m)| m)
            .sum()
    }
}

/// `d_g(s, u)` for times in `[0, 1]`, each rounded to the nearest grid point.
pub fn tree_distance(t: &CodedTree, s: f64, u: f64) -> Result<f64> {
    let i = t.excursion.index_of(s)?;
    let j = t.excursion.index_of(u)?;
    Ok(t.distance(i, j))
}
