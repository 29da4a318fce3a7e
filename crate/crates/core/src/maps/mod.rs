//! Finite families of self-maps of a box and their attractor atlas.
//!
//! Each symbol `i` selects a map `f_i: X -> X`. The atlas records the
//! fixed points of every map, their linear stability, basin labels on a
//! grid and the table `P(i, j, k)` naming which attractor of `f_k` captures
//! the `j`-th attractor of `f_i`.

mod affine;
mod atlas;
mod basins;
mod composite;
mod contraction;
mod diabolic;
mod domain;
mod esn;
mod fixed_points;
mod transitions;

pub use affine::AffineFamily;
pub use atlas::{AtlasConfig, AttractorAtlas, MapEntry};
pub use basins::{estimate_basins, BasinConfig, BasinGrid};
pub use composite::{ComposeOrder, CompositeMap};
pub use contraction::{
    attractor_tracking_mmin, contraction_horizon, estimate_mmin, FunnelCriterion, HorizonConfig,
};
pub use diabolic::{diabolic_base, diabolic_base_derivative, DiabolicFamily};
pub use domain::Domain;
pub use esn::{EsnFamily, EsnParams};
pub use fixed_points::{find_fixed_points, FixedPoint, FixedPointConfig, FixedPointSearch, StabilityKind};
pub use transitions::{
    count_attractor_sequences, forward_attractor_sequence, transition_table, AttractorSequence, SequenceCount,
    TransitionTable,
};

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AtlasError {
    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    UnknownSymbol { symbol: usize, alphabet: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("map {map} has no stable fixed points")]
    NoStablePoints { map: usize },
    #[error("orbit of attractor {attractor} of map {from} under map {to} reached no attractor ball")]
    BoundaryStraddle { from: usize, attractor: usize, to: usize },
    #[error("attractor index {index} invalid for map {map}")]
    InvalidSeed { map: usize, index: usize },
    #[error("contraction horizon exceeded cap {cap}")]
    HorizonExceeded { cap: usize },
    #[error("region did not funnel within {cap} steps")]
    NotFunneling { cap: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
}

/// `M` maps of a box into itself, selected by symbol.
///
/// Implementations are immutable and shared freely across threads.
pub trait MapFamily: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn alphabet_size(&self) -> usize;
    fn domain(&self) -> &Domain;

    /// Writes `f_i(x)` to `out`. No domain or bounds checks.
    fn apply(&self, i: usize, x: &[f64], out: &mut [f64]);

    /// Writes the Jacobian of `f_i` at `x` to `out`, row-major `n x n`.
    fn jacobian_into(&self, i: usize, x: &[f64], out: &mut [f64]);

    /// Parameters for provenance records.
    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name() })
    }
}

fn check_call(family: &dyn MapFamily, i: usize, x: &[f64]) -> Result<(), AtlasError> {
    if i >= family.alphabet_size() {
        return Err(AtlasError::UnknownSymbol { symbol: i, alphabet: family.alphabet_size() });
    }
    if x.len() != family.dim() {
        return Err(AtlasError::Dimension { expected: family.dim(), got: x.len() });
    }
    if !family.domain().contains(x) {
        return Err(AtlasError::OutOfDomain { point: x.to_vec() });
    }
    Ok(())
}

/// `f_i(x)`, rejecting points outside the domain. Never clamps.
pub fn evaluate(family: &dyn MapFamily, i: usize, x: &[f64]) -> Result<Vec<f64>, AtlasError> {
    check_call(family, i, x)?;
    let mut out = vec![0.0; x.len()];
    family.apply(i, x, &mut out);
    Ok(out)
}

pub fn jacobian(family: &dyn MapFamily, i: usize, x: &[f64]) -> Result<DMatrix<f64>, AtlasError> {
    check_call(family, i, x)?;
    let n = x.len();
    let mut buf = vec![0.0; n * n];
    family.jacobian_into(i, x, &mut buf);
    Ok(DMatrix::from_row_slice(n, n, &buf))
}

/// Central finite-difference Jacobian, used as an independent check.
pub fn finite_difference_jacobian(family: &dyn MapFamily, i: usize, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for c in 0..n {
        xp[c] = x[c] + h;
        xm[c] = x[c] - h;
        family.apply(i, &xp, &mut fp);
        family.apply(i, &xm, &mut fm);
        for r in 0..n {
            jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
        xp[c] = x[c];
        xm[c] = x[c];
    }
    jac
}

/// Builds a named preset family.
pub fn preset(name: &str) -> Result<Box<dyn MapFamily>, AtlasError> {
    match name {
        "esn2d" => Ok(Box::new(EsnFamily::esn2d())),
        "diabolic" => Ok(Box::new(DiabolicFamily::new())),
        other => Err(AtlasError::UnknownPreset(other.to_string())),
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
