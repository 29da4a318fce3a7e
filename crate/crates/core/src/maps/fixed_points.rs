use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{euclid, AtlasError, MapFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StabilityKind {
    Stable,
    Saddle,
    Unstable,
    Nonhyperbolic,
}

impl StabilityKind {
    /// Classifies by eigenvalue moduli against `1 +- tol`.
    pub fn classify(moduli: &[f64], tol: f64) -> Self {
        if moduli.iter().any(|m| (m - 1.0).abs() <= tol) {
            Self::Nonhyperbolic
        } else if moduli.iter().all(|&m| m < 1.0) {
            Self::Stable
        } else if moduli.iter().all(|&m| m > 1.0) {
            Self::Unstable
        } else {
            Self::Saddle
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: Vec<f64>,
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub kind: StabilityKind,
    pub residual: f64,
}

impl FixedPoint {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|(re, im)| re.hypot(*im)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointConfig {
    pub seeds_per_dim: usize,
    pub fp_tol: f64,
    pub hyperbolicity_tol: f64,
    pub newton_max_iter: usize,
    pub fallback_iter: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self { seeds_per_dim: 21, fp_tol: 1e-10, hyperbolicity_tol: 1e-6, newton_max_iter: 60, fallback_iter: 20_000 }
    }
}

/// Deduplicated fixed points, sorted lexicographically by location, plus
/// the number of seeds that converged nowhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSearch {
    pub points: Vec<FixedPoint>,
    pub failures: usize,
}

impl FixedPointSearch {
    pub fn stable(&self) -> Vec<&FixedPoint> {
        self.points.iter().filter(|p| p.kind == StabilityKind::Stable).collect()
    }

    pub fn of_kind(&self, kind: StabilityKind) -> Vec<&FixedPoint> {
        self.points.iter().filter(|p| p.kind == kind).collect()
    }
}

fn residual(family: &dyn MapFamily, i: usize, x: &[f64], buf: &mut [f64]) -> f64 {
    family.apply(i, x, buf);
    euclid(buf, x)
}

/// Newton on `g(x) = f(x) - x`. `None` when a step leaves the domain, the
/// linear system is singular or the iteration does not settle.
fn newton(family: &dyn MapFamily, i: usize, start: &[f64], cfg: &FixedPointConfig) -> Option<Vec<f64>> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut fx = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    for _ in 0..cfg.newton_max_iter {
        family.apply(i, &x, &mut fx);
        let g = DVector::from_iterator(n, fx.iter().zip(&x).map(|(a, b)| a - b));
        if g.norm() < 0.1 * cfg.fp_tol {
            return Some(x);
        }
        family.jacobian_into(i, &x, &mut jac);
        let mut a = DMatrix::from_row_slice(n, n, &jac);
        for d in 0..n {
            a[(d, d)] -= 1.0;
        }
        let step = a.lu().solve(&g)?;
        for d in 0..n {
            x[d] -= step[d];
        }
        if !family.domain().contains(&x) || x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        if step.norm() < 1e-3 * cfg.fp_tol {
            break;
        }
    }
    let r = residual(family, i, &x, &mut fx);
    (r < cfg.fp_tol).then_some(x)
}

/// Plain iteration from the seed followed by a Newton polish.
fn iterate_then_polish(family: &dyn MapFamily, i: usize, start: &[f64], cfg: &FixedPointConfig) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    let mut next = vec![0.0; x.len()];
    for _ in 0..cfg.fallback_iter {
        family.apply(i, &x, &mut next);
        let moved = euclid(&next, &x);
        std::mem::swap(&mut x, &mut next);
        if moved < 1e-3 * cfg.fp_tol {
            break;
        }
    }
    newton(family, i, &x, cfg).or_else(|| (residual(family, i, &x, &mut next) < cfg.fp_tol).then_some(x))
}

fn lexicographic(a: &[f64], b: &[f64], tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > tol {
            return x.partial_cmp(y).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

pub(crate) fn classify_point(family: &dyn MapFamily, i: usize, x: Vec<f64>, cfg: &FixedPointConfig) -> FixedPoint {
    let n = x.len();
    let mut jac = vec![0.0; n * n];
    family.jacobian_into(i, &x, &mut jac);
    let m = DMatrix::from_row_slice(n, n, &jac);
    let eigenvalues: Vec<(f64, f64)> = m.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    let moduli: Vec<f64> = eigenvalues.iter().map(|(re, im)| re.hypot(*im)).collect();
    let mut buf = vec![0.0; n];
    let residual = residual(family, i, &x, &mut buf);
    FixedPoint { location: x, eigenvalues, kind: StabilityKind::classify(&moduli, cfg.hyperbolicity_tol), residual }
}

/// Locates the fixed points of `f_i` from a regular grid of
/// `seeds_per_dim^n` seeds over the domain (faces included).
pub fn find_fixed_points(family: &dyn MapFamily, i: usize, cfg: &FixedPointConfig) -> Result<FixedPointSearch, AtlasError> {
    if cfg.seeds_per_dim < 2 {
        return Err(AtlasError::InvalidParams("seeds_per_dim must be at least 2".into()));
    }
    if i >= family.alphabet_size() {
        return Err(AtlasError::UnknownSymbol { symbol: i, alphabet: family.alphabet_size() });
    }
    let seeds = family.domain().grid_nodes(cfg.seeds_per_dim);
    let found: Vec<Option<Vec<f64>>> = seeds
        .par_iter()
        .map(|s| newton(family, i, s, cfg).or_else(|| iterate_then_polish(family, i, s, cfg)))
        .collect();

    let radius = 10.0 * cfg.fp_tol;
    let mut failures = 0;
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for x in found {
        match x {
            None => failures += 1,
            Some(x) => {
                if !kept.iter().any(|k| euclid(k, &x) <= radius) {
                    kept.push(x);
                }
            }
        }
    }
    kept.sort_by(|a, b| lexicographic(a, b, radius));
    let points = kept.into_iter().map(|x| classify_point(family, i, x, cfg)).collect();
    Ok(FixedPointSearch { points, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{AffineFamily, DiabolicFamily, Domain, EsnFamily, EsnParams};

    /// Roots of `x = tanh(a x + b)` on `[-1, 1]` by sign scan and bisection.
    fn scalar_roots(a: f64, b: f64) -> Vec<f64> {
        let g = |x: f64| (a * x + b).tanh() - x;
        let n = 20000;
        let mut roots = Vec::new();
        for k in 0..n {
            let (mut lo, mut hi) = (-1.0 + 2.0 * k as f64 / n as f64, -1.0 + 2.0 * (k + 1) as f64 / n as f64);
            if g(lo) == 0.0 {
                roots.push(lo);
                continue;
            }
            if g(lo).signum() == g(hi).signum() {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid).signum() == g(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        roots
    }

    #[test]
    fn esn_f0_two_stable_one_saddle() {
        let f = EsnFamily::esn2d();
        let cfg = FixedPointConfig::default();
        let s = find_fixed_points(&f, 0, &cfg).unwrap();
        assert_eq!(s.points.len(), 3);
        assert_eq!(s.stable().len(), 2);
        assert_eq!(s.of_kind(StabilityKind::Saddle).len(), 1);
        let x1 = scalar_roots(0.5, 0.25);
        assert_eq!(x1.len(), 1);
        let x2 = scalar_roots(1.75, 0.05);
        assert_eq!(x2.len(), 3);
        for (p, want) in s.points.iter().zip(&x2) {
            assert!((p.location[0] - x1[0]).abs() < 1e-10);
            assert!((p.location[1] - want).abs() < 1e-10);
            assert!(p.residual < 1e-10);
        }
        // sorted by second coordinate: down, saddle, up
        assert_eq!(s.points[1].kind, StabilityKind::Saddle);
    }

    #[test]
    fn esn_f1_single_negative_attractor() {
        let f = EsnFamily::esn2d();
        let s = find_fixed_points(&f, 1, &FixedPointConfig::default()).unwrap();
        assert_eq!(s.points.len(), 1);
        let p = &s.points[0];
        assert_eq!(p.kind, StabilityKind::Stable);
        assert!(p.location.iter().all(|&v| v < 0.0));
        let x1 = scalar_roots(0.5, -0.25);
        let x2 = scalar_roots(1.75, -0.5);
        assert_eq!((x1.len(), x2.len()), (1, 1));
        assert!((p.location[0] - x1[0]).abs() < 1e-10 && (p.location[1] - x2[0]).abs() < 1e-10);
    }

    #[test]
    fn esn_fixed_points_do_not_depend_on_leak() {
        let cfg = FixedPointConfig::default();
        let reference = find_fixed_points(&EsnFamily::esn2d(), 0, &cfg).unwrap();
        for alpha in [0.1, 0.25, 1.0] {
            let params = EsnParams { alpha, ..EsnParams::esn2d() };
            let f = EsnFamily::new("leak", params).unwrap();
            for i in 0..2 {
                let s = find_fixed_points(&f, i, &cfg).unwrap();
                let r = find_fixed_points(&EsnFamily::esn2d(), i, &cfg).unwrap();
                assert_eq!(s.points.len(), r.points.len());
                for (a, b) in s.points.iter().zip(&r.points) {
                    assert!(euclid(&a.location, &b.location) < 10.0 * cfg.fp_tol);
                }
            }
        }
        assert_eq!(reference.points.len(), 3);
    }

    #[test]
    fn doubling_seed_density_is_stable() {
        let f = EsnFamily::esn2d();
        let cfg = FixedPointConfig { seeds_per_dim: 11, ..Default::default() };
        let dense = FixedPointConfig { seeds_per_dim: 22, ..cfg.clone() };
        for i in 0..2 {
            let a = find_fixed_points(&f, i, &cfg).unwrap();
            let b = find_fixed_points(&f, i, &dense).unwrap();
            assert_eq!(a.points.len(), b.points.len());
            for (p, q) in a.points.iter().zip(&b.points) {
                assert!(euclid(&p.location, &q.location) < 10.0 * cfg.fp_tol);
                assert_eq!(p.kind, q.kind);
            }
        }
    }

    #[test]
    fn stable_points_have_small_moduli() {
        let f = EsnFamily::esn2d();
        let cfg = FixedPointConfig::default();
        for i in 0..2 {
            for p in find_fixed_points(&f, i, &cfg).unwrap().stable() {
                assert!(p.spectral_radius() < 1.0 - cfg.hyperbolicity_tol);
            }
        }
    }

    #[test]
    fn diabolic_pair_each_unique() {
        let f = DiabolicFamily::new();
        let cfg = FixedPointConfig { seeds_per_dim: 401, ..Default::default() };
        let s0 = find_fixed_points(&f, 0, &cfg).unwrap();
        assert_eq!(s0.points.len(), 1);
        assert_eq!(s0.points[0].kind, StabilityKind::Stable);
        assert!((s0.points[0].location[0] - 3.0).abs() < 1e-10);
        let s1 = find_fixed_points(&f, 1, &cfg).unwrap();
        assert_eq!(s1.points.len(), 1);
        assert_eq!(s1.points[0].kind, StabilityKind::Stable);
        assert!((s1.points[0].location[0] + 2.0).abs() < 1e-10);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(StabilityKind::classify(&[0.5, 0.9], 1e-6), StabilityKind::Stable);
        assert_eq!(StabilityKind::classify(&[0.5, 1.2], 1e-6), StabilityKind::Saddle);
        assert_eq!(StabilityKind::classify(&[1.5, 1.2], 1e-6), StabilityKind::Unstable);
        assert_eq!(StabilityKind::classify(&[0.5, 1.0 + 1e-7], 1e-6), StabilityKind::Nonhyperbolic);
    }

    #[test]
    fn linear_contraction_origin() {
        let f = AffineFamily::new("half", Domain::cube(2, -1.0, 1.0).unwrap(), vec![(vec![0.5, 0.0, 0.0, 0.5], vec![0.0, 0.0])])
            .unwrap();
        let s = find_fixed_points(&f, 0, &FixedPointConfig { seeds_per_dim: 2, ..Default::default() }).unwrap();
        assert_eq!(s.points.len(), 1);
        assert!(s.points[0].location.iter().all(|v| v.abs() < 1e-12));
        assert!(find_fixed_points(&f, 0, &FixedPointConfig { seeds_per_dim: 1, ..Default::default() }).is_err());
    }
}
