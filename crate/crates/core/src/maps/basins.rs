use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{euclid, AtlasError, Domain, MapFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinConfig {
    pub grid_res: usize,
    pub max_iter: usize,
    pub ball_radius: f64,
}

impl Default for BasinConfig {
    fn default() -> Self {
        Self { grid_res: 200, max_iter: 10_000, ball_radius: 1e-3 }
    }
}

/// Attractor labels on the `grid_res^n` cell centers of the domain,
/// dimension 0 varying fastest. `None` is UNRESOLVED.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinGrid {
    pub res: usize,
    pub domain: Domain,
    pub attractors: usize,
    /// Radius actually used: the configured one, shrunk to a quarter of the
    /// closest attractor spacing when that is smaller.
    pub ball_radius: f64,
    pub labels: Vec<Option<usize>>,
    pub unresolved_fraction: f64,
}

impl BasinGrid {
    pub fn label_at(&self, x: &[f64]) -> Option<Option<usize>> {
        self.domain.cell_index(self.res, x).map(|c| self.labels[c])
    }

    /// Plain PGM: gray `j + 1` for attractor `j`, `0` for UNRESOLVED. Rows run
    /// from the top of dimension 1 down, columns along dimension 0.
    pub fn to_pgm(&self) -> Result<String, AtlasError> {
        let (w, h) = match self.domain.dim() {
            1 => (self.res, 1),
            2 => (self.res, self.res),
            n => return Err(AtlasError::InvalidParams(format!("cannot draw a {n}-dimensional basin grid"))),
        };
        let mut out = format!("P2\n{w} {h}\n{}\n", self.attractors.max(1));
        for row in (0..h).rev() {
            let line: Vec<String> =
                (0..w).map(|col| self.labels[row * w + col].map_or(0, |j| j + 1).to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        Ok(out)
    }
}

/// Index of the first ball (in attractor order) that the orbit of `x`
/// enters within `max_iter` steps, checking the start point too.
pub(crate) fn capture(
    family: &dyn MapFamily,
    i: usize,
    x: &[f64],
    attractors: &[Vec<f64>],
    radius: f64,
    max_iter: usize,
) -> Option<usize> {
    let mut cur = x.to_vec();
    let mut next = vec![0.0; x.len()];
    for step in 0..=max_iter {
        if let Some(j) = attractors.iter().position(|a| euclid(a, &cur) < radius) {
            return Some(j);
        }
        if step < max_iter {
            family.apply(i, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    None
}

pub(crate) fn effective_radius(attractors: &[Vec<f64>], radius: f64) -> f64 {
    let mut r = radius;
    for (a, p) in attractors.iter().enumerate() {
        for q in &attractors[a + 1..] {
            r = r.min(0.25 * euclid(p, q));
        }
    }
    r
}

/// Labels each grid cell of `f_i` by the stable point whose ball its
/// forward orbit enters first.
pub fn estimate_basins(
    family: &dyn MapFamily,
    i: usize,
    attractors: &[Vec<f64>],
    cfg: &BasinConfig,
) -> Result<BasinGrid, AtlasError> {
    if attractors.is_empty() {
        return Err(AtlasError::NoStablePoints { map: i });
    }
    if cfg.grid_res == 0 {
        return Err(AtlasError::InvalidParams("grid_res must be positive".into()));
    }
    let radius = effective_radius(attractors, cfg.ball_radius);
    let domain = family.domain().clone();
    let labels: Vec<Option<usize>> = domain
        .cell_centers(cfg.grid_res)
        .par_iter()
        .map(|c| capture(family, i, c, attractors, radius, cfg.max_iter))
        .collect();
    let unresolved = labels.iter().filter(|l| l.is_none()).count();
    let unresolved_fraction = unresolved as f64 / labels.len() as f64;
    Ok(BasinGrid { res: cfg.grid_res, domain, attractors: attractors.len(), ball_radius: radius, labels, unresolved_fraction })
}
