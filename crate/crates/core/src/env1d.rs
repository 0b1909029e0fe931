//! One-dimensional random environments on a finite window of ℤ.
//!
//! The walk at site `z` steps left with probability `ω⁻_z` and right with
//! `ω⁺_z = 1 - ω⁻_z`. Everything is stored through `log ρ_z = log(ω⁻_z/ω⁺_z)`,
//! which keeps extreme environments finite.

use std::io::{BufRead, Write};

use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chain::BirthDeathChain;
use crate::error::{invalid, parse_err, Error, Result};

fn check_window(lo: i64, hi: i64) -> Result<()> {
    if lo > 0 || hi < 0 {
        return Err(invalid(format!("window [{lo}, {hi}] must contain 0")));
    }
    Ok(())
}

/// Law of the i.i.d. environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentLaw {
    /// `log ρ ~ N(0, σ²)`.
    LogNormal { sigma: f64 },
    /// `ω⁻ ∈ {ω, 1-ω}` with probability one half each.
    TwoPoint { omega: f64 },
    /// `ω⁻ ~ Beta(a, a)`.
    Beta { a: f64 },
}

impl EnvironmentLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EnvironmentLaw::LogNormal { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                Err(invalid("log-normal sigma must be finite and >= 0"))
            }
            EnvironmentLaw::TwoPoint { omega } if !(omega > 0.0 && omega < 1.0) => {
                Err(invalid("two-point omega must lie in (0, 1)"))
            }
            EnvironmentLaw::Beta { a } if !(a > 0.0 && a.is_finite()) => {
                Err(invalid("beta parameter must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Variance of `log ρ`.
    pub fn sigma2(&self) -> f64 {
        match *self {
            EnvironmentLaw::LogNormal { sigma } => sigma * sigma,
            EnvironmentLaw::TwoPoint { omega } => (omega / (1.0 - omega)).ln().powi(2),
            EnvironmentLaw::Beta { a } => 2.0 * trigamma(a),
        }
    }

    fn sample_log_rho<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EnvironmentLaw::LogNormal { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * z
            }
            EnvironmentLaw::TwoPoint { omega } => {
                let l = (omega / (1.0 - omega)).ln();
                if rng.random::<bool>() {
                    l
                } else {
                    -l
                }
            }
            EnvironmentLaw::Beta { a } => {
                let b = Beta::new(a, a).expect("validated");
                // resample the measure-zero endpoints
                loop {
                    let w: f64 = b.sample(rng);
                    if w > 0.0 && w < 1.0 {
                        return log_rho_from_omega(w);
                    }
                }
            }
        }
    }
}

/// Trigamma function by upward recurrence and the asymptotic series.
pub(crate) fn trigamma(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < 15.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + 1.0 / x
        + x2 / 2.0
        + (1.0 / x) * x2 * (1.0 / 6.0 - x2 * (1.0 / 30.0 - x2 * (1.0 / 42.0 - x2 / 30.0)))
}

fn log_rho_from_omega(omega_minus: f64) -> f64 {
    omega_minus.ln() - (-omega_minus).ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment1D {
    lo: i64,
    hi: i64,
    log_rho: Vec<f64>,
    flatten_index: u64,
    sigma2: Option<f64>,
}

impl Environment1D {
    /// Environment from left-step probabilities on `[lo, hi]`.
    pub fn from_omega_minus(lo: i64, hi: i64, omega_minus: &[f64]) -> Result<Self> {
        check_window(lo, hi)?;
        if omega_minus.len() as i64 != hi - lo + 1 {
            return Err(invalid("omega_minus length does not match the window"));
        }
        if let Some(w) = omega_minus.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
            return Err(invalid(format!("omega_minus = {w} outside (0, 1)")));
        }
        Ok(Self {
            lo,
            hi,
            log_rho: omega_minus.iter().map(|&w| log_rho_from_omega(w)).collect(),
            flatten_index: 1,
            sigma2: None,
        })
    }

    /// Environment from `log ρ` values on `[lo, hi]`.
    pub fn from_log_rho(lo: i64, hi: i64, log_rho: Vec<f64>) -> Result<Self> {
        check_window(lo, hi)?;
        if log_rho.len() as i64 != hi - lo + 1 {
            return Err(invalid("log_rho length does not match the window"));
        }
        if log_rho.iter().any(|l| !l.is_finite()) {
            return Err(invalid("log_rho must be finite"));
        }
        Ok(Self {
            lo,
            hi,
            log_rho,
            flatten_index: 1,
            sigma2: None,
        })
    }

    /// I.i.d. environment on `[lo, hi]`.
    pub fn sample<R: Rng + ?Sized>(law: &EnvironmentLaw, lo: i64, hi: i64, rng: &mut R) -> Result<Self> {
        law.validate()?;
        check_window(lo, hi)?;
        let log_rho = (lo..=hi).map(|_| law.sample_log_rho(rng)).collect();
        Ok(Self {
            lo,
            hi,
            log_rho,
            flatten_index: 1,
            sigma2: Some(law.sigma2()),
        })
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Self {
        self.sigma2 = Some(sigma2);
        self
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn flatten_index(&self) -> u64 {
        self.flatten_index
    }

    /// Variance of `log ρ` under the generating law, if known.
    pub fn sigma2(&self) -> Option<f64> {
        self.sigma2
    }

    /// Empirical variance of `log ρ` over the window.
    pub fn estimate_sigma2(&self) -> f64 {
        crate::stats::mean_var(&self.log_rho).1
    }

    fn idx(&self, z: i64) -> Result<usize> {
        if z < self.lo || z > self.hi {
            return Err(Error::OutOfRange {
                site: z,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok((z - self.lo) as usize)
    }

    pub fn log_rho(&self, z: i64) -> Result<f64> {
        Ok(self.log_rho[self.idx(z)?])
    }

    pub fn log_rho_slice(&self) -> &[f64] {
        &self.log_rho
    }

    pub fn omega_minus(&self, z: i64) -> Result<f64> {
        Ok(1.0 / (1.0 + (-self.log_rho(z)?).exp()))
    }

    pub fn omega_plus(&self, z: i64) -> Result<f64> {
        Ok(1.0 / (1.0 + self.log_rho(z)?.exp()))
    }

    /// Sampler for the discrete-time walk.
    pub fn walk_kernel(&self) -> WalkKernel {
        WalkKernel {
            lo: self.lo,
            thresholds: self
                .log_rho
                .iter()
                .map(|l| {
                    let p = 1.0 / (1.0 + l.exp());
                    (p * 18_446_744_073_709_551_616.0) as u64
                })
                .collect(),
        }
    }

    /// The walk run in continuous time with unit-rate steps sped up by
    /// `m²` and positions divided by `m`: rates `m² ω±` on the mesh `1/m`.
    pub fn poissonized_chain(&self, m: f64) -> Result<BirthDeathChain> {
        if !(m > 0.0) {
            return Err(invalid("scale must be positive"));
        }
        let speed = m * m;
        let up = self.log_rho.iter().map(|l| speed / (1.0 + l.exp())).collect();
        let down = self.log_rho.iter().map(|l| speed / (1.0 + (-l).exp())).collect();
        BirthDeathChain::new((-self.lo) as usize, 1.0 / m, up, down)
    }
}

/// Replaces `ρ_z` by `ρ_z^{m^{-1/2}}`.
pub fn flatten(env: &Environment1D, m: u64) -> Result<Environment1D> {
    if m == 0 {
        return Err(invalid("flatten index must be >= 1"));
    }
    if m == 1 {
        return Ok(env.clone());
    }
    let s = (m as f64).sqrt();
    Ok(Environment1D {
        lo: env.lo,
        hi: env.hi,
        log_rho: env.log_rho.iter().map(|l| l / s).collect(),
        flatten_index: env.flatten_index * m,
        sigma2: env.sigma2.map(|v| v / m as f64),
    })
}

/// Walk sampler with precomputed integer thresholds.
#[derive(Debug, Clone)]
pub struct WalkKernel {
    lo: i64,
    thresholds: Vec<u64>,
}

impl WalkKernel {
    fn hi(&self) -> i64 {
        self.lo + self.thresholds.len() as i64 - 1
    }

    fn exit(&self, steps: u64) -> Error {
        Error::WindowExit {
            lo: self.lo,
            hi: self.hi(),
            steps,
        }
    }

    /// Position after `steps` steps from `start`.
    pub fn run<R: RngCore + ?Sized>(&self, start: i64, steps: u64, rng: &mut R) -> Result<i64> {
        if start < self.lo || start > self.hi() {
            return Err(Error::OutOfRange {
                site: start,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        let last = self.thresholds.len() - 1;
        let mut i = (start - self.lo) as usize;
        for k in 0..steps {
            if rng.next_u64() < self.thresholds[i] {
                if i == last {
                    return Err(self.exit(k + 1));
                }
                i += 1;
            } else {
                if i == 0 {
                    return Err(self.exit(k + 1));
                }
                i -= 1;
            }
        }
        Ok(i as i64 + self.lo)
    }

    /// Positions at times `0, every, 2·every, …, steps`.
    pub fn run_path<R: RngCore + ?Sized>(
        &self,
        start: i64,
        steps: u64,
        every: u64,
        rng: &mut R,
    ) -> Result<Vec<(u64, i64)>> {
        if every == 0 {
            return Err(invalid("recording interval must be positive"));
        }
        let mut out = vec![(0, start)];
        let mut x = start;
        let mut t = 0;
        while t < steps {
            let chunk = every.min(steps - t);
            x = self.run(x, chunk, rng)?;
            t += chunk;
            out.push((t, x));
        }
        Ok(out)
    }
}

/// Potential on a window: `V(0) = 0` and `V(x) - V(x-1) = log ρ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential1D {
    lo: i64,
    values: Vec<f64>,
    sigma2: Option<f64>,
}

impl Potential1D {
    pub fn from_values(lo: i64, values: Vec<f64>, sigma2: Option<f64>) -> Result<Self> {
        let hi = lo + values.len() as i64 - 1;
        check_window(lo, hi)?;
        if values[(-lo) as usize] != 0.0 {
            return Err(invalid("potential must vanish at the origin"));
        }
        Ok(Self { lo, values, sigma2 })
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.values.len() as i64 - 1)
    }

    pub fn sigma2(&self) -> Option<f64> {
        self.sigma2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn idx(&self, x: i64) -> Result<usize> {
        let (lo, hi) = self.window();
        if x < lo || x > hi {
            return Err(Error::OutOfRange { site: x, lo, hi });
        }
        Ok((x - lo) as usize)
    }

    pub fn value(&self, x: i64) -> Result<f64> {
        Ok(self.values[self.idx(x)?])
    }

    /// Probability of a right step at `x` for the walk with conductances
    /// `c(x-1, x) = e^{-V(x-1)}`.
    pub fn rightward_probability(&self, x: i64) -> Result<f64> {
        let (a, b) = (self.value(x)?, self.value(x - 1)?);
        Ok(1.0 / (1.0 + (a - b).exp()))
    }

    /// Scale function `S(x) = r(0, x)` with sign, on the whole window.
    pub fn scale_function(&self) -> Vec<f64> {
        let o = (-self.lo) as usize;
        let mut s = vec![0.0; self.values.len()];
        for i in o + 1..s.len() {
            s[i] = s[i - 1] + self.values[i - 1].exp();
        }
        for i in (0..o).rev() {
            s[i] = s[i + 1] - self.values[i].exp();
        }
        s
    }
}

pub fn potential1d(env: &Environment1D) -> Potential1D {
    let o = (-env.lo) as usize;
    let mut v = vec![0.0; env.log_rho.len()];
    for i in o + 1..v.len() {
        v[i] = v[i - 1] + env.log_rho[i];
    }
    for i in (0..o).rev() {
        v[i] = v[i + 1] - env.log_rho[i + 1];
    }
    Potential1D {
        lo: env.lo,
        values: v,
        sigma2: env.sigma2,
    }
}

/// `r(x, y) = Σ_{z=x}^{y-1} e^{V_z}` for `x < y`, symmetric.
pub fn resistance1d(v: &Potential1D, x: i64, y: i64) -> Result<f64> {
    let (a, b) = (x.min(y), x.max(y));
    let (ia, ib) = (v.idx(a)?, v.idx(b)?);
    Ok(v.values[ia..ib].iter().map(|w| w.exp()).sum())
}

/// `ν(x) = e^{-V_x} + e^{-V_{x-1}}`.
pub fn invariant1d(v: &Potential1D, x: i64) -> Result<f64> {
    Ok((-v.value(x)?).exp() + (-v.value(x - 1)?).exp())
}

/// Effective resistance in the metric `scale · r` from 0 to the set of
/// sites at distance `>= radius`: the two one-sided resistances in
/// parallel.
pub fn ball_escape_resistance(v: &Potential1D, scale: f64, radius: f64) -> Result<f64> {
    if !(scale > 0.0 && radius > 0.0) {
        return Err(invalid("scale and radius must be positive"));
    }
    let (lo, hi) = v.window();
    let s = v.scale_function();
    let o = (-lo) as usize;
    let right = (o..s.len())
        .map(|i| scale * s[i])
        .find(|&d| d >= radius)
        .ok_or_else(|| Error::Domain(format!("ball of radius {radius} reaches the right end {hi}")))?;
    let left = (0..=o)
        .rev()
        .map(|i| -scale * s[i])
        .find(|&d| d >= radius)
        .ok_or_else(|| Error::Domain(format!("ball of radius {radius} reaches the left end {lo}")))?;
    Ok(left * right / (left + right))
}

/// Writes `site,omega_minus,V` rows.
pub fn write_columns<W: Write>(env: &Environment1D, v: &Potential1D, mut w: W) -> Result<()> {
    if env.window() != v.window() {
        return Err(Error::Consistency("environment and potential windows differ".into()));
    }
    writeln!(w, "site,omega_minus,V")?;
    for z in env.lo..=env.hi {
        writeln!(w, "{},{},{}", z, env.omega_minus(z)?, v.value(z)?)?;
    }
    Ok(())
}

/// Reads the format written by [`write_columns`].
pub fn read_columns<R: BufRead>(r: R) -> Result<(Environment1D, Potential1D)> {
    let mut sites = Vec::new();
    let mut omegas = Vec::new();
    let mut values = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim() != "site,omega_minus,V" {
                return Err(parse_err(1, "expected header site,omega_minus,V"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(k + 1, "expected three fields"));
        }
        let site: i64 = f[0].trim().parse().map_err(|_| parse_err(k + 1, "bad site"))?;
        if let Some(&prev) = sites.last() {
            if site != prev + 1 {
                return Err(parse_err(k + 1, "sites must be consecutive"));
            }
        }
        sites.push(site);
        omegas.push(f[1].trim().parse::<f64>().map_err(|_| parse_err(k + 1, "bad omega"))?);
        values.push(f[2].trim().parse::<f64>().map_err(|_| parse_err(k + 1, "bad V"))?);
    }
    let (&lo, &hi) = match (sites.first(), sites.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EmptyInput("environment table")),
    };
    let env = Environment1D::from_omega_minus(lo, hi, &omegas)?;
    let v = Potential1D::from_values(lo, values, None)?;
    Ok((env, v))
}

/// Bernoulli barrier environment: marked sites push right with
/// probability `p`, unmarked sites are fair.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierEnvironment {
    success_prob: f64,
    p: f64,
    lo: i64,
    xi: Vec<bool>,
    beta: Vec<i64>,
}

impl BarrierEnvironment {
    pub fn from_marks(success_prob: f64, p: f64, lo: i64, xi: Vec<bool>) -> Result<Self> {
        if !(success_prob > 0.0 && success_prob <= 1.0) {
            return Err(invalid("success probability must lie in (0, 1]"));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("barrier bias p must lie in (0, 1)"));
        }
        let hi = lo + xi.len() as i64 - 1;
        check_window(lo, hi)?;
        let o = (-lo) as usize;
        let mut beta = vec![0i64; xi.len()];
        for i in o + 1..xi.len() {
            beta[i] = beta[i - 1] + xi[i] as i64;
        }
        // the mark at site z is the increment β(z) - β(z-1) on both sides
        for i in (0..o).rev() {
            beta[i] = beta[i + 1] - xi[i + 1] as i64;
        }
        Ok(Self {
            success_prob,
            p,
            lo,
            xi,
            beta,
        })
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.xi.len() as i64 - 1)
    }

    fn idx(&self, z: i64) -> Result<usize> {
        let (lo, hi) = self.window();
        if z < lo || z > hi {
            return Err(Error::OutOfRange { site: z, lo, hi });
        }
        Ok((z - lo) as usize)
    }

    pub fn xi(&self, z: i64) -> Result<bool> {
        Ok(self.xi[self.idx(z)?])
    }

    pub fn beta(&self, z: i64) -> Result<i64> {
        Ok(self.beta[self.idx(z)?])
    }

    /// The walk environment: `(ω⁻, ω⁺) = (q, p)` at marks, `(½, ½)` elsewhere.
    pub fn to_environment(&self) -> Environment1D {
        let l = (self.q() / self.p).ln();
        let log_rho = self.xi.iter().map(|&m| if m { l } else { 0.0 }).collect();
        let a = self.success_prob;
        Environment1D {
            lo: self.lo,
            hi: self.window().1,
            log_rho,
            flatten_index: 1,
            sigma2: Some(a * (1.0 - a) * l * l),
        }
    }
}

pub fn barrier_env<R: Rng + ?Sized>(
    success_prob: f64,
    p: f64,
    lo: i64,
    hi: i64,
    rng: &mut R,
) -> Result<BarrierEnvironment> {
    if !(success_prob > 0.0 && success_prob <= 1.0) {
        return Err(invalid("success probability must lie in (0, 1]"));
    }
    check_window(lo, hi)?;
    let xi = (lo..=hi).map(|_| rng.random::<f64>() < success_prob).collect();
    BarrierEnvironment::from_marks(success_prob, p, lo, xi)
}

/// `V(z) = log(q/p) · β(z)`.
pub fn barrier_potential(benv: &BarrierEnvironment) -> Potential1D {
    let l = (benv.q() / benv.p).ln();
    let a = benv.success_prob;
    Potential1D {
        lo: benv.lo,
        values: benv.beta.iter().map(|&b| l * b as f64).collect(),
        sigma2: Some(a * (1.0 - a) * l * l),
    }
}
