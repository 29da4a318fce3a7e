//! The switched system driven by an input window: cocycle iteration,
//! pullback clouds and a numerical echo state property test.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_points, max_norm, Clustering};
use crate::maps::{AtlasError, Domain, MapFamily};
use crate::seeding::uniform_point;
use crate::symbolic::SymbolSequence;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("window [{first}, {end}) does not cover [{from}, {to})")]
    WindowExhausted { from: i64, to: i64, first: i64, end: i64 },
    #[error("empty point set")]
    EmptySet,
    #[error(transparent)]
    Map(#[from] AtlasError),
}

fn require_cover(v: &SymbolSequence, from: i64, to: i64) -> Result<(), SimError> {
    if v.covers(from, to) || from == to {
        Ok(())
    } else {
        Err(SimError::WindowExhausted { from, to, first: v.first_index(), end: v.end_index() })
    }
}

fn check_start(family: &dyn MapFamily, v: &SymbolSequence, x0: &[f64]) -> Result<(), SimError> {
    if x0.len() != family.dim() {
        return Err(AtlasError::Dimension { expected: family.dim(), got: x0.len() }.into());
    }
    if !family.domain().contains(x0) {
        return Err(AtlasError::OutOfDomain { point: x0.to_vec() }.into());
    }
    if v.alphabet() > family.alphabet_size() {
        return Err(AtlasError::UnknownSymbol { symbol: v.alphabet() - 1, alphabet: family.alphabet_size() }.into());
    }
    Ok(())
}

/// `x[k+1] = f_{v[k]}(x[k])` for `k` in `[from, from + steps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start_index: i64,
    /// The symbols applied, one per step.
    pub symbols: Vec<u8>,
    /// `steps + 1` states, starting with `x0`.
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds x0")
    }

    /// Columns `k,symbol,x_1..x_n`; the final state has an empty symbol.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, Vec::len);
        let mut out = String::from("k,symbol");
        for d in 1..=n {
            let _ = write!(out, ",x_{d}");
        }
        out.push('\n');
        for (s, x) in self.states.iter().enumerate() {
            let _ = write!(out, "{},", self.start_index + s as i64);
            if let Some(sym) = self.symbols.get(s) {
                let _ = write!(out, "{sym}");
            }
            for v in x {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Applies the cocycle in place: `steps` maps starting at index `from`.
/// Trusts the caller for coverage and bounds.
fn advance(family: &dyn MapFamily, symbols: &[u8], x: &mut Vec<f64>, scratch: &mut Vec<f64>) {
    for &s in symbols {
        family.apply(s as usize, x, scratch);
        std::mem::swap(x, scratch);
    }
}

pub fn iterate_cocycle(
    family: &dyn MapFamily,
    v: &SymbolSequence,
    x0: &[f64],
    from: i64,
    steps: usize,
) -> Result<Trajectory, SimError> {
    check_start(family, v, x0)?;
    let to = from + steps as i64;
    require_cover(v, from, to)?;
    let symbols = v.slice(from, to).unwrap_or(&[]).to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    let mut scratch = vec![0.0; x.len()];
    for &s in &symbols {
        family.apply(s as usize, &x, &mut scratch);
        std::mem::swap(&mut x, &mut scratch);
        states.push(x.clone());
    }
    Ok(Trajectory { start_index: from, symbols, states })
}

/// Final point of [`iterate_cocycle`] without storing the path.
pub fn cocycle_map(
    family: &dyn MapFamily,
    v: &SymbolSequence,
    x0: &[f64],
    from: i64,
    steps: usize,
) -> Result<Vec<f64>, SimError> {
    check_start(family, v, x0)?;
    let to = from + steps as i64;
    require_cover(v, from, to)?;
    let mut x = x0.to_vec();
    let mut scratch = vec![0.0; x.len()];
    advance(family, v.slice(from, to).unwrap_or(&[]), &mut x, &mut scratch);
    Ok(x)
}

/// A finite stand-in for the whole state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    /// Number of random points, excluding corners.
    pub count: usize,
    pub sampling_box: Domain,
    pub with_corners: bool,
}

impl Ensemble {
    /// `count` counter-seeded uniform points, followed by the `2^n` box
    /// corners when `with_corners` is set.
    pub fn seeded_uniform(domain: &Domain, count: usize, seed: u64, with_corners: bool) -> Self {
        let mut points: Vec<Vec<f64>> = (0..count as u64).map(|j| uniform_point(domain, seed, j)).collect();
        if with_corners {
            points.extend(domain.corners());
        }
        Self { points, seed, count, sampling_box: domain.clone(), with_corners }
    }

    pub fn from_points(points: Vec<Vec<f64>>, domain: &Domain) -> Self {
        Self { count: points.len(), points, seed: 0, sampling_box: domain.clone(), with_corners: false }
    }
}

/// Max pairwise max-norm distance; `0` for fewer than two points.
pub fn diameter(points: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for (a, p) in points.iter().enumerate() {
        for q in &points[a + 1..] {
            d = d.max(max_norm(p, q));
        }
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub tol: f64,
    pub sizes: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub cloud: Vec<Vec<f64>>,
    pub diameter: f64,
    pub steps: usize,
    pub hausdorff_to_reference: Option<f64>,
    pub clusters: Option<ClusterSummary>,
}

impl PullbackReport {
    pub fn with_clusters(mut self, tol: f64) -> Self {
        let c = cluster_points(&self.cloud, tol);
        self.clusters = Some(ClusterSummary { tol, sizes: c.sizes, centers: c.centers });
        self
    }

    pub fn with_reference(mut self, reference: &[Vec<f64>]) -> Result<Self, SimError> {
        self.hausdorff_to_reference = Some(hausdorff_semidistance(&self.cloud, reference)?);
        Ok(self)
    }

    /// Summary without the raw cloud.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "steps": self.steps,
            "diameter": self.diameter,
            "points": self.cloud.len(),
            "hausdorff_to_reference": self.hausdorff_to_reference,
            "clusters": self.clusters,
        }))
        .expect("report serializes")
    }
}

/// Pushes the ensemble from time `-n` to time `0` along `v`.
pub fn pullback_cloud(
    family: &dyn MapFamily,
    v: &SymbolSequence,
    n: usize,
    ensemble: &Ensemble,
) -> Result<PullbackReport, SimError> {
    if ensemble.points.is_empty() {
        return Err(SimError::EmptySet);
    }
    for p in &ensemble.points {
        check_start(family, v, p)?;
    }
    let from = -(n as i64);
    require_cover(v, from, 0)?;
    let symbols = v.slice(from, 0).unwrap_or(&[]);
    let cloud: Vec<Vec<f64>> = ensemble
        .points
        .par_iter()
        .map(|p| {
            let mut x = p.clone();
            let mut scratch = vec![0.0; x.len()];
            advance(family, symbols, &mut x, &mut scratch);
            x
        })
        .collect();
    let diameter = diameter(&cloud);
    Ok(PullbackReport { cloud, diameter, steps: n, hausdorff_to_reference: None, clusters: None })
}

/// `sup_{a in A} inf_{b in B} |a - b|` in the Euclidean metric.
pub fn hausdorff_semidistance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, SimError> {
    if a.is_empty() || b.is_empty() {
        return Err(SimError::EmptySet);
    }
    let euclid = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    Ok(a.iter().map(|p| b.iter().map(|q| euclid(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EspVerdict {
    Esp,
    NotEsp,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EspReport {
    pub verdict: EspVerdict,
    pub steps: usize,
    pub eps: f64,
    pub diameter: f64,
    /// Diameter and cluster count after `2n` steps, when checked.
    pub doubled: Option<(f64, usize)>,
    pub clusters: usize,
    pub min_separation: Option<f64>,
}

/// Clusters at `eps` of at least two members each, each narrower than `eps`
/// and pairwise more than `100 eps` apart. Returns the centers and the
/// closest separation.
fn separated_clusters(cloud: &[Vec<f64>], eps: f64) -> Option<(Vec<Vec<f64>>, f64)> {
    let c: Clustering = cluster_points(cloud, eps);
    if c.count() < 2 || !c.flagged.is_empty() || c.sizes.iter().any(|&s| s < 2) {
        return None;
    }
    for l in 0..c.count() {
        let members: Vec<Vec<f64>> = cloud.iter().zip(&c.labels).filter(|(_, &m)| m == l).map(|(p, _)| p.clone()).collect();
        if diameter(&members) >= eps {
            return None;
        }
    }
    let mut sep = f64::INFINITY;
    for a in 0..cloud.len() {
        for b in a + 1..cloud.len() {
            if c.labels[a] != c.labels[b] {
                sep = sep.min(max_norm(&cloud[a], &cloud[b]));
            }
        }
    }
    (sep > 100.0 * eps).then_some((c.centers, sep))
}

/// ESP when the pullback cloud after `n` steps is narrower than `eps`;
/// NOT_ESP when it splits into tight, well separated clusters and the same
/// clusters (centers within `10 eps`) are seen after `2n` steps; otherwise
/// UNDECIDED.
pub fn esp_test(
    family: &dyn MapFamily,
    v: &SymbolSequence,
    n: usize,
    eps: f64,
    ensemble_size: usize,
    seed: u64,
) -> Result<EspReport, SimError> {
    let ensemble = Ensemble::seeded_uniform(family.domain(), ensemble_size, seed, true);
    let report = pullback_cloud(family, v, n, &ensemble)?;
    let mut out = EspReport {
        verdict: EspVerdict::Undecided,
        steps: n,
        eps,
        diameter: report.diameter,
        doubled: None,
        clusters: 1,
        min_separation: None,
    };
    if report.diameter < eps {
        out.verdict = EspVerdict::Esp;
        return Ok(out);
    }
    let Some((centers, sep)) = separated_clusters(&report.cloud, eps) else {
        out.clusters = cluster_points(&report.cloud, eps).count();
        return Ok(out);
    };
    out.clusters = centers.len();
    out.min_separation = Some(sep);
    if !v.covers(-2 * n as i64, 0) {
        return Ok(out);
    }
    let doubled = pullback_cloud(family, v, 2 * n, &ensemble)?;
    let again = separated_clusters(&doubled.cloud, eps);
    out.doubled = Some((doubled.diameter, again.as_ref().map_or(0, |(c, _)| c.len())));
    if let Some((later, _)) = again {
        let persists = later.len() == centers.len()
            && hausdorff_semidistance(&later, &centers)? <= 10.0 * eps
            && hausdorff_semidistance(&centers, &later)? <= 10.0 * eps;
        if persists {
            out.verdict = EspVerdict::NotEsp;
        }
    }
    Ok(out)
}
