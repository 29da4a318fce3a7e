//! Echo index estimation: evolve a seeded uniform ensemble along an input
//! window and count the clusters of final states.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::cluster_points;
use crate::maps::{AtlasError, MapFamily};
use crate::seeding::{mix_seed, uniform_point};
use crate::symbolic::{generate_sequence, RepeatSpec, StartRule, SymbolSequence, SymbolicError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EchoError {
    #[error("window has {available} steps from time 0, need {needed}")]
    WindowTooShort { needed: usize, available: usize },
    #[error("invalid echo configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Map(#[from] AtlasError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EchoConfig {
    pub n_ic: usize,
    #[serde(alias = "T")]
    pub steps: usize,
    pub cluster_tol: f64,
    pub seed: u64,
}

impl Default for EchoConfig {
    fn default() -> Self {
        Self { n_ic: 50, steps: 2000, cluster_tol: 1e-3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoEstimate {
    pub index: usize,
    pub cluster_centers: Vec<Vec<f64>>,
    pub cluster_sizes: Vec<usize>,
    /// Initial conditions counted in a cluster they only reach within `10 tol`.
    pub flagged: usize,
    #[serde(rename = "T")]
    pub steps: usize,
    pub n_ic: usize,
    pub seed: u64,
    pub cluster_tol: f64,
    /// Largest max-norm distance from a final state to its cluster center.
    pub max_spread: f64,
}

impl EchoEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    pub const CSV_HEADER: &'static str = "index,T,n_ic,seed,cluster_tol,flagged,cluster_sizes";

    /// One row matching [`EchoEstimate::CSV_HEADER`]; sizes are `;`-separated.
    pub fn csv_row(&self) -> String {
        let sizes: Vec<String> = self.cluster_sizes.iter().map(usize::to_string).collect();
        let mut row = String::new();
        let _ = write!(
            row,
            "{},{},{},{},{:e},{},{}",
            self.index,
            self.steps,
            self.n_ic,
            self.seed,
            self.cluster_tol,
            self.flagged,
            sizes.join(";")
        );
        row
    }
}

/// Final states of the ensemble after `cfg.steps` steps from time 0.
pub fn evolve_ensemble(
    family: &dyn MapFamily,
    v: &SymbolSequence,
    cfg: &EchoConfig,
) -> Result<Vec<Vec<f64>>, EchoError> {
    if cfg.n_ic == 0 {
        return Err(EchoError::InvalidConfig("n_ic must be positive".into()));
    }
    if !(cfg.cluster_tol > 0.0) {
        return Err(EchoError::InvalidConfig("cluster_tol must be positive".into()));
    }
    if v.alphabet() > family.alphabet_size() {
        return Err(AtlasError::UnknownSymbol { symbol: v.alphabet() - 1, alphabet: family.alphabet_size() }.into());
    }
    let available = v.end_index().max(0) as usize;
    if available < cfg.steps {
        return Err(EchoError::WindowTooShort { needed: cfg.steps, available });
    }
    let symbols = v.slice(0, cfg.steps as i64).unwrap_or(&[]);
    let domain = family.domain();
    Ok((0..cfg.n_ic as u64)
        .into_par_iter()
        .map(|j| {
            let mut x = uniform_point(domain, cfg.seed, j);
            let mut scratch = vec![0.0; x.len()];
            for &s in symbols {
                family.apply(s as usize, &x, &mut scratch);
                std::mem::swap(&mut x, &mut scratch);
            }
            x
        })
        .collect())
}

pub fn estimate_echo_index(
    family: &dyn MapFamily,
    v: &SymbolSequence,
    cfg: &EchoConfig,
) -> Result<EchoEstimate, EchoError> {
    let finals = evolve_ensemble(family, v, cfg)?;
    let c = cluster_points(&finals, cfg.cluster_tol);
    Ok(EchoEstimate {
        index: c.count(),
        cluster_centers: c.centers,
        cluster_sizes: c.sizes,
        flagged: c.flagged.len(),
        steps: cfg.steps,
        n_ic: cfg.n_ic,
        seed: cfg.seed,
        cluster_tol: cfg.cluster_tol,
        max_spread: c.max_spread,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Observed index -> number of realizations.
    pub indices: BTreeMap<usize, usize>,
    pub consistent: bool,
    /// `(sequence seed, index)` per realization.
    pub runs: Vec<(u64, usize)>,
}

/// Estimates the index on `realizations` independent sequences drawn from
/// `spec`. Realization `r` uses sequence seed `mix(base, r, 0)` and ensemble
/// seed `mix(base, r, 1)`.
pub fn consistency_scan(
    family: &dyn MapFamily,
    spec: &RepeatSpec,
    realizations: usize,
    cfg: &EchoConfig,
    base_seed: u64,
) -> Result<ConsistencyReport, EchoError> {
    if realizations < 2 {
        return Err(EchoError::InvalidConfig("need at least two realizations".into()));
    }
    let mut runs = Vec::with_capacity(realizations);
    for r in 0..realizations as u64 {
        let seq_seed = mix_seed(&[base_seed, r, 0]);
        let v = generate_sequence(spec, cfg.steps.max(1), seq_seed, StartRule::Uniform)?;
        let est = estimate_echo_index(family, &v, &EchoConfig { seed: mix_seed(&[base_seed, r, 1]), ..cfg.clone() })?;
        runs.push((seq_seed, est.index));
    }
    let mut indices = BTreeMap::new();
    for &(_, i) in &runs {
        *indices.entry(i).or_insert(0) += 1;
    }
    Ok(ConsistencyReport { consistent: indices.len() == 1, indices, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockScanConfig {
    pub max_block: usize,
    /// Random sequences per block length.
    pub realizations: usize,
    /// Extension probability for the random sequences.
    pub p: f64,
    /// Periodic words `0^a 1^b` with `L <= a, b <= L + periodic_span` are tested too.
    pub periodic_span: usize,
    pub echo: EchoConfig,
    pub base_seed: u64,
}

impl Default for BlockScanConfig {
    fn default() -> Self {
        Self { max_block: 6, realizations: 5, p: 0.5, periodic_span: 1, echo: EchoConfig::default(), base_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCase {
    /// `"random"` or the periodic word, e.g. `"0011"`.
    pub label: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScanReport {
    /// Block length `L` and the cases tested with every run at least `L`.
    pub per_length: Vec<(usize, Vec<BlockCase>)>,
    /// Smallest `L` for which every tested case had index one.
    pub minimum: Option<usize>,
}

fn periodic_word(a: usize, b: usize) -> Vec<u8> {
    std::iter::repeat_n(0, a).chain(std::iter::repeat_n(1, b)).collect()
}

/// For `L = 1..=max_block`, estimates the index for binary inputs whose runs
/// all have length at least `L`: random min-max sequences and periodic
/// block words.
pub fn min_block_length_for_index_one(
    family: &dyn MapFamily,
    cfg: &BlockScanConfig,
) -> Result<BlockScanReport, EchoError> {
    if family.alphabet_size() != 2 {
        return Err(EchoError::InvalidConfig("block scan needs a two-map family".into()));
    }
    let mut per_length = Vec::new();
    let mut minimum = None;
    for l in 1..=cfg.max_block {
        let mut cases = Vec::new();
        let spec = RepeatSpec::binary(l as u32, None, l as u32, None)?.with_probabilities(vec![cfg.p, cfg.p])?;
        for r in 0..cfg.realizations as u64 {
            let v = generate_sequence(&spec, cfg.echo.steps, mix_seed(&[cfg.base_seed, l as u64, r]), StartRule::Uniform)?;
            let est = estimate_echo_index(family, &v, &cfg.echo)?;
            cases.push(BlockCase { label: "random".into(), index: est.index });
        }
        for a in l..=l + cfg.periodic_span {
            for b in l..=l + cfg.periodic_span {
                let word = periodic_word(a, b);
                let v = SymbolSequence::periodic(2, &word, cfg.echo.steps.max(1))?;
                let est = estimate_echo_index(family, &v, &cfg.echo)?;
                let label: String = word.iter().map(|s| char::from(b'0' + s)).collect();
                cases.push(BlockCase { label, index: est.index });
            }
        }
        if minimum.is_none() && cases.iter().all(|c| c.index == 1) {
            minimum = Some(l);
        }
        per_length.push((l, cases));
    }
    Ok(BlockScanReport { per_length, minimum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{find_fixed_points, AffineFamily, EsnFamily, FixedPointConfig};

    fn constant(sym: u8, len: usize) -> SymbolSequence {
        SymbolSequence::forward(2, vec![sym; len]).unwrap()
    }

    #[test]
    fn esn_constant_zero_has_two_responses() {
        let f = EsnFamily::esn2d();
        let est = estimate_echo_index(&f, &constant(0, 2000), &EchoConfig::default()).unwrap();
        assert_eq!(est.index, 2);
        assert_eq!(est.cluster_sizes.iter().sum::<usize>(), 50);
        let stable = find_fixed_points(&f, 0, &FixedPointConfig::default()).unwrap();
        for p in stable.stable() {
            let near = est
                .cluster_centers
                .iter()
                .any(|c| c.iter().zip(&p.location).all(|(a, b)| (a - b).abs() < 1e-4));
            assert!(near);
        }
    }

    #[test]
    fn esn_constant_one_has_one_response() {
        let f = EsnFamily::esn2d();
        let est = estimate_echo_index(&f, &constant(1, 2000), &EchoConfig::default()).unwrap();
        assert_eq!(est.index, 1);
    }

    #[test]
    fn contraction_collapses_to_origin() {
        let f = AffineFamily::scalar_contraction(0.5);
        let v = SymbolSequence::forward(1, vec![0; 60]).unwrap();
        let est = estimate_echo_index(&f, &v, &EchoConfig { steps: 60, ..Default::default() }).unwrap();
        assert_eq!(est.index, 1);
        assert!(est.cluster_centers[0][0].abs() < 1e-12);
    }

    #[test]
    fn short_window_is_rejected() {
        let f = EsnFamily::esn2d();
        let err = estimate_echo_index(&f, &constant(0, 100), &EchoConfig::default()).unwrap_err();
        assert_eq!(err, EchoError::WindowTooShort { needed: 2000, available: 100 });
    }

    #[test]
    fn deterministic_in_seed() {
        let f = EsnFamily::esn2d();
        let v = SymbolSequence::periodic(2, &[0, 0, 0, 1], 500).unwrap();
        let cfg = EchoConfig { steps: 500, seed: 12, ..Default::default() };
        assert_eq!(estimate_echo_index(&f, &v, &cfg).unwrap(), estimate_echo_index(&f, &v, &cfg).unwrap());
    }

    #[test]
    fn spread_shrinks_with_time() {
        let f = EsnFamily::esn2d();
        let v = constant(0, 2000);
        let spreads: Vec<f64> = [100, 500, 2000]
            .iter()
            .map(|&t| estimate_echo_index(&f, &v, &EchoConfig { steps: t, ..Default::default() }).unwrap().max_spread)
            .collect();
        assert!(spreads.windows(2).all(|w| w[1] <= w[0]), "{spreads:?}");
    }

    #[test]
    fn json_and_csv() {
        let f = EsnFamily::esn2d();
        let est = estimate_echo_index(&f, &constant(1, 200), &EchoConfig { steps: 200, ..Default::default() }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&est.to_json()).unwrap();
        assert_eq!(v["T"], 200);
        assert_eq!(v["index"], 1);
        assert_eq!(est.csv_row(), "1,200,50,0,1e-3,0,50");
    }

    #[test]
    fn periodic_scan_is_consistent() {
        let f = EsnFamily::esn2d();
        let spec = RepeatSpec::binary(3, Some(3), 4, Some(4)).unwrap().with_probabilities(vec![0.0, 1.0]).unwrap();
        let cfg = EchoConfig { steps: 400, ..Default::default() };
        let r = consistency_scan(&f, &spec, 5, &cfg, 7).unwrap();
        assert!(r.consistent, "{r:?}");
        assert!(consistency_scan(&f, &spec, 1, &cfg, 7).is_err());
    }

    #[test]
    fn long_one_blocks_force_index_one() {
        let f = EsnFamily::esn2d();
        let spec = RepeatSpec::binary(1, Some(40), 35, Some(60)).unwrap().with_probabilities(vec![0.9, 0.95]).unwrap();
        let r = consistency_scan(&f, &spec, 5, &EchoConfig::default(), 3).unwrap();
        assert!(r.consistent);
        assert_eq!(r.indices.keys().copied().collect::<Vec<_>>(), vec![1]);
    }
}
