use std::io::Write;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{invalid, Result};

/// Tree grown by gluing the segments `[C_{i-1}, C_i]` of a rate-`t`
/// Poisson process, each at a uniform point of the length built so far.
#[derive(Debug, Clone, PartialEq)]
pub struct StickBreakTree {
    cuts: Vec<f64>,
    /// Segment and offset where segment `i` is glued; segment 0 hangs
    /// from the root.
    attach: Vec<Option<(usize, f64)>>,
    base_depth: Vec<f64>,
}

impl StickBreakTree {
    pub fn segments(&self) -> usize {
        self.cuts.len()
    }

    /// `C_1, …, C_K`.
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn total_length(&self) -> f64 {
        *self.cuts.last().expect("at least one segment")
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.cuts[i] - if i == 0 { 0.0 } else { self.cuts[i - 1] }
    }

    pub fn attachment(&self, i: usize) -> Option<(usize, f64)> {
        self.attach[i]
    }

    /// Distance from the root to the far end of segment `i`.
    pub fn tip_depth(&self, i: usize) -> f64 {
        self.base_depth[i] + self.segment_length(i)
    }

    /// Writes `id,length,parent,offset` rows (`parent = -1` for the first).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "id,length,parent,offset")?;
        for i in 0..self.segments() {
            match self.attach[i] {
                Some((p, o)) => writeln!(w, "{},{},{},{}", i, self.segment_length(i), p, o)?,
                None => writeln!(w, "{},{},-1,0", i, self.segment_length(i))?,
            }
        }
        Ok(())
    }
}

pub fn stick_breaking<R: Rng + ?Sized>(rng: &mut R, segments: usize) -> Result<StickBreakTree> {
    if segments == 0 {
        return Err(invalid("need at least one segment"));
    }
    let mut cuts = Vec::with_capacity(segments);
    let mut c = 0.0f64;
    for _ in 0..segments {
        let e: f64 = rng.sample(Exp1);
        // P(C_{i+1} > u | C_i) = exp(-(u² - C_i²)/2)
        c = (c * c + 2.0 * e).sqrt();
        cuts.push(c);
    }
    let mut attach = vec![None];
    let mut base_depth = vec![0.0];
    for i in 1..segments {
        let x = rng.random::<f64>() * cuts[i - 1];
        let j = cuts[..i].partition_point(|&b| b <= x).min(i - 1);
        let offset = x - if j == 0 { 0.0 } else { cuts[j - 1] };
        attach.push(Some((j, offset)));
        base_depth.push(base_depth[j] + offset);
    }
    Ok(StickBreakTree {
        cuts,
        attach,
        base_depth,
    })
}
