use serde::{Deserialize, Serialize};

use super::AtlasError;

/// A closed box `prod_d [lo_d, hi_d]` with `lo_d < hi_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, AtlasError> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(AtlasError::InvalidParams(format!("box bounds have lengths {} and {}", lo.len(), hi.len())));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(AtlasError::InvalidParams(format!("box needs lo < hi, got {lo:?} / {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self, AtlasError> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Maps `u in [0,1)^n` affinely onto the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.lo.iter().zip(&self.hi)).map(|(t, (a, b))| a + t * (b - a)).collect()
    }

    /// The `2^n` corners, lowest coordinate varying fastest.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| (0..n).map(|d| if mask >> d & 1 == 1 { self.hi[d] } else { self.lo[d] }).collect())
            .collect()
    }

    /// Max-norm diameter.
    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    /// Cell centers of a `res^n` grid, dimension 0 varying fastest.
    pub fn cell_centers(&self, res: usize) -> Vec<Vec<f64>> {
        self.lattice(res, |c| (c as f64 + 0.5) / res as f64)
    }

    /// `res^n` nodes including the faces, dimension 0 varying fastest.
    pub fn grid_nodes(&self, res: usize) -> Vec<Vec<f64>> {
        if res < 2 {
            return vec![self.from_unit(&vec![0.5; self.dim()])];
        }
        self.lattice(res, |c| c as f64 / (res - 1) as f64)
    }

    fn lattice(&self, res: usize, unit: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
        let n = self.dim();
        let total = res.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let u: Vec<f64> = (0..n)
                    .map(|_| {
                        let c = idx % res;
                        idx /= res;
                        unit(c)
                    })
                    .collect();
                self.from_unit(&u)
            })
            .collect()
    }

    /// Flat index of the grid cell containing `x`, matching [`Domain::cell_centers`].
    pub fn cell_index(&self, res: usize, x: &[f64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0;
        let mut stride = 1;
        for d in 0..self.dim() {
            let t = (x[d] - self.lo[d]) / (self.hi[d] - self.lo[d]);
            let c = ((t * res as f64).floor() as usize).min(res - 1);
            idx += c * stride;
            stride *= res;
        }
        Some(idx)
    }

    /// Width of one grid cell along dimension `d`.
    pub fn cell_width(&self, res: usize, d: usize) -> f64 {
        (self.hi[d] - self.lo[d]) / res as f64
    }

    /// The sub-box with dimension `d` restricted to `[lo, hi]`.
    pub fn restrict(&self, d: usize, lo: f64, hi: f64) -> Result<Self, AtlasError> {
        let mut out = self.clone();
        out.lo[d] = lo.max(self.lo[d]);
        out.hi[d] = hi.min(self.hi[d]);
        Self::new(out.lo, out.hi)
    }
}
