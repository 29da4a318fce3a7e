use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{euclid, AtlasError, Domain, MapFamily, TransitionTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonConfig {
    pub pairs: usize,
    pub cap: usize,
    pub seed: u64,
}

impl Default for HorizonConfig {
    fn default() -> Self {
        Self { pairs: 1000, cap: 10_000, seed: 0 }
    }
}

fn sample_ball(rng: &mut ChaCha8Rng, center: &[f64], radius: f64, domain: &Domain) -> Vec<f64> {
    let n = center.len();
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let r2: f64 = u.iter().map(|v| v * v).sum();
        if r2 > 1.0 || r2 == 0.0 {
            continue;
        }
        let x: Vec<f64> = center.iter().zip(&u).map(|(c, v)| c + radius * v).collect();
        if domain.contains(&x) {
            return x;
        }
    }
}

/// Smallest `n` such that `f_i^n` contracts every sampled pair in the
/// Euclidean `radius`-ball around `center` by less than `rho` and keeps
/// every sampled point inside the ball.
pub fn contraction_horizon(
    family: &dyn MapFamily,
    i: usize,
    center: &[f64],
    rho: f64,
    radius: f64,
    cfg: &HorizonConfig,
) -> Result<usize, AtlasError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(AtlasError::InvalidParams(format!("rho = {rho} outside (0, 1)")));
    }
    if !(radius > 0.0) || cfg.pairs == 0 {
        return Err(AtlasError::InvalidParams("need a positive radius and at least one pair".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let domain = family.domain();
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(cfg.pairs);
    let mut b: Vec<Vec<f64>> = Vec::with_capacity(cfg.pairs);
    while a.len() < cfg.pairs {
        let p = sample_ball(&mut rng, center, radius, domain);
        let q = sample_ball(&mut rng, center, radius, domain);
        if euclid(&p, &q) > 0.0 {
            a.push(p);
            b.push(q);
        }
    }
    let initial: Vec<f64> = a.iter().zip(&b).map(|(p, q)| euclid(p, q)).collect();
    let mut scratch = vec![0.0; center.len()];
    for n in 1..=cfg.cap {
        for x in a.iter_mut().chain(b.iter_mut()) {
            family.apply(i, x, &mut scratch);
            x.copy_from_slice(&scratch);
        }
        let contracts = a.iter().zip(&b).zip(&initial).all(|((p, q), d0)| euclid(p, q) / d0 < rho);
        let inside = a.iter().chain(b.iter()).all(|x| euclid(x, center) <= radius);
        if contracts && inside {
            return Ok(n);
        }
    }
    Err(AtlasError::HorizonExceeded { cap: cfg.cap })
}

/// Target set used by [`estimate_mmin`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunnelCriterion {
    /// Within Euclidean distance `eps` of `center`.
    IntoBall { center: Vec<f64>, eps: f64 },
    /// Coordinate `axis` strictly below `level`.
    BelowLevel { axis: usize, level: f64 },
}

impl FunnelCriterion {
    pub fn holds(&self, x: &[f64]) -> bool {
        match self {
            Self::IntoBall { center, eps } => euclid(x, center) < *eps,
            Self::BelowLevel { axis, level } => x[*axis] < *level,
        }
    }
}

/// Smallest `m >= 0` with `f_i^m` of every `grid_res^n` node of `region`
/// satisfying `criterion` simultaneously.
pub fn estimate_mmin(
    family: &dyn MapFamily,
    i: usize,
    region: &Domain,
    criterion: &FunnelCriterion,
    grid_res: usize,
    cap: usize,
) -> Result<usize, AtlasError> {
    if region.dim() != family.dim() {
        return Err(AtlasError::Dimension { expected: family.dim(), got: region.dim() });
    }
    if let FunnelCriterion::BelowLevel { axis, .. } = criterion {
        if *axis >= family.dim() {
            return Err(AtlasError::InvalidParams(format!("axis {axis} out of range")));
        }
    }
    let mut points = region.grid_nodes(grid_res);
    for m in 0..=cap {
        if points.par_iter().all(|x| criterion.holds(x)) {
            return Ok(m);
        }
        if m < cap {
            points.par_iter_mut().for_each(|x| {
                let mut out = vec![0.0; x.len()];
                family.apply(i, x, &mut out);
                *x = out;
            });
        }
    }
    Err(AtlasError::NotFunneling { cap })
}

/// Per map `k`, the smallest `m` such that `f_k^m` carries the corners and
/// center of the max-norm `eps`-box around every stable point `x_i^j` to
/// within `eps` of `x_k^{P(i,j,k)}`.
pub fn attractor_tracking_mmin(
    family: &dyn MapFamily,
    stable: &[Vec<Vec<f64>>],
    table: &TransitionTable,
    eps: f64,
    cap: usize,
) -> Result<Vec<usize>, AtlasError> {
    let mut out = Vec::with_capacity(family.alphabet_size());
    for k in 0..family.alphabet_size() {
        let mut worst = 0;
        for (i, points) in stable.iter().enumerate() {
            for (j, x) in points.iter().enumerate() {
                let target = &stable[k][table.get(i, j, k)?];
                let local = Domain::new(x.iter().map(|v| v - eps).collect(), x.iter().map(|v| v + eps).collect())?;
                let mut probes = local.corners();
                probes.push(x.clone());
                probes.retain(|p| family.domain().contains(p));
                let crit = FunnelCriterion::IntoBall { center: target.clone(), eps };
                let m = estimate_probe_set(family, k, probes, &crit, cap).map_err(|_| AtlasError::NotFunneling { cap })?;
                worst = worst.max(m);
            }
        }
        out.push(worst);
    }
    Ok(out)
}

fn estimate_probe_set(
    family: &dyn MapFamily,
    i: usize,
    mut points: Vec<Vec<f64>>,
    criterion: &FunnelCriterion,
    cap: usize,
) -> Result<usize, AtlasError> {
    let mut scratch = vec![0.0; family.dim()];
    for m in 0..=cap {
        if points.iter().all(|x| criterion.holds(x)) {
            return Ok(m);
        }
        for x in points.iter_mut() {
            family.apply(i, x, &mut scratch);
            x.copy_from_slice(&scratch);
        }
    }
    Err(AtlasError::NotFunneling { cap })
}
