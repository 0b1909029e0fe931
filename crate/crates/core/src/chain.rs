//! Continuous-time birth–death chains on a finite one-dimensional grid.
//!
//! Node `i` sits at position `(i - origin) * mesh`. `up[i]` is the rate of
//! the jump `i -> i+1` and `down[i]` the rate of `i -> i-1`; the outward
//! rates at the two end nodes are exit rates. Simulation aborts on exit,
//! the law solver books the escaped mass separately.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct BirthDeathChain {
    origin: usize,
    mesh: f64,
    up: Vec<f64>,
    down: Vec<f64>,
}

/// Law of the chain at a fixed time.
#[derive(Debug, Clone)]
pub struct Law1D {
    pub positions: Vec<f64>,
    pub probs: Vec<f64>,
    /// Mass that left through the end nodes.
    pub lost_mass: f64,
}

impl BirthDeathChain {
    pub fn new(origin: usize, mesh: f64, up: Vec<f64>, down: Vec<f64>) -> Result<Self> {
        if up.len() != down.len() || up.len() < 2 {
            return Err(invalid("rate vectors must have equal length >= 2"));
        }
        if origin >= up.len() {
            return Err(invalid("origin outside the grid"));
        }
        if !(mesh > 0.0) {
            return Err(invalid("mesh must be positive"));
        }
        if up.iter().chain(&down).any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(invalid("rates must be finite and nonnegative"));
        }
        Ok(Self {
            origin,
            mesh,
            up,
            down,
        })
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn position(&self, i: usize) -> f64 {
        (i as f64 - self.origin as f64) * self.mesh
    }

    pub fn up(&self, i: usize) -> f64 {
        self.up[i]
    }

    pub fn down(&self, i: usize) -> f64 {
        self.down[i]
    }

    pub fn total_rate(&self, i: usize) -> f64 {
        self.up[i] + self.down[i]
    }

    fn exit(&self, jumps: u64) -> Error {
        Error::WindowExit {
            lo: -(self.origin as i64),
            hi: (self.len() - 1 - self.origin) as i64,
            steps: jumps,
        }
    }

    /// Runs the chain from node `start` up to time `horizon`, calling
    /// `record(t, node)` at time 0 and after every jump. Returns the node
    /// occupied at `horizon`.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        start: usize,
        horizon: f64,
        rng: &mut R,
        mut record: impl FnMut(f64, usize),
    ) -> Result<usize> {
        if start >= self.len() {
            return Err(invalid("start node outside the grid"));
        }
        if !(horizon >= 0.0) {
            return Err(invalid("horizon must be nonnegative"));
        }
        let mut t = 0.0;
        let mut i = start;
        let mut jumps = 0u64;
        record(t, i);
        loop {
            let rate = self.up[i] + self.down[i];
            if rate <= 0.0 {
                return Ok(i);
            }
            let hold: f64 = rng.sample::<f64, _>(Exp1) / rate;
            if t + hold > horizon {
                return Ok(i);
            }
            t += hold;
            jumps += 1;
            if rng.random::<f64>() * rate < self.up[i] {
                if i + 1 == self.len() {
                    return Err(self.exit(jumps));
                }
                i += 1;
            } else {
                if i == 0 {
                    return Err(self.exit(jumps));
                }
                i -= 1;
            }
            record(t, i);
        }
    }

    /// Node occupied at `horizon`, without recording the path.
    pub fn endpoint<R: Rng + ?Sized>(&self, start: usize, horizon: f64, rng: &mut R) -> Result<usize> {
        self.simulate(start, horizon, rng, |_, _| {})
    }

    /// Law at time `time` of the chain started at `start`, by the forward
    /// equation: Crank–Nicolson with `steps` steps, the first two replaced
    /// by four implicit Euler half steps to damp the initial point mass.
    pub fn law_at(&self, start: usize, time: f64, steps: usize) -> Result<Law1D> {
        if start >= self.len() {
            return Err(invalid("start node outside the grid"));
        }
        if !(time > 0.0) || steps < 2 {
            return Err(invalid("need time > 0 and at least two steps"));
        }
        let n = self.len();
        let dt = time / steps as f64;
        let mut p = vec![0.0; n];
        p[start] = 1.0;
        let mut work = Tridiagonal::new(n);
        for _ in 0..4 {
            self.implicit_step(&mut p, 0.5 * dt, 1.0, &mut work)?;
        }
        for _ in 2..steps {
            self.implicit_step(&mut p, dt, 0.5, &mut work)?;
        }
        let kept: f64 = p.iter().sum();
        Ok(Law1D {
            positions: (0..n).map(|i| self.position(i)).collect(),
            probs: p,
            lost_mass: (1.0 - kept).max(0.0),
        })
    }

    /// One theta-scheme step of `p' = A p`.
    fn implicit_step(&self, p: &mut [f64], dt: f64, theta: f64, w: &mut Tridiagonal) -> Result<()> {
        let n = p.len();
        let explicit = (1.0 - theta) * dt;
        for i in 0..n {
            let mut ap = -(self.up[i] + self.down[i]) * p[i];
            if i > 0 {
                ap += self.up[i - 1] * p[i - 1];
            }
            if i + 1 < n {
                ap += self.down[i + 1] * p[i + 1];
            }
            w.rhs[i] = p[i] + explicit * ap;
            w.diag[i] = 1.0 + theta * dt * (self.up[i] + self.down[i]);
            w.sub[i] = if i > 0 { -theta * dt * self.up[i - 1] } else { 0.0 };
            w.sup[i] = if i + 1 < n { -theta * dt * self.down[i + 1] } else { 0.0 };
        }
        w.solve_into(p)
    }
}

struct Tridiagonal {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize) -> Self {
        Self {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    /// Thomas algorithm. Stable here because the matrix is column
    /// diagonally dominant.
    fn solve_into(&mut self, out: &mut [f64]) -> Result<()> {
        let n = self.diag.len();
        let c = &mut self.scratch;
        let mut denom = self.diag[0];
        c[0] = self.sup[0] / denom;
        out[0] = self.rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - self.sub[i] * c[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Numerical("singular tridiagonal system".into()));
            }
            c[i] = self.sup[i] / denom;
            out[i] = (self.rhs[i] - self.sub[i] * out[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            out[i] -= c[i] * out[i + 1];
        }
        Ok(())
    }
}
