//! Parallel `(m0_minus, m1_plus)` sweeps of the echo index over repeat-Markov
//! inputs, with CSV, PGM and JSON output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::echo::{estimate_echo_index, EchoConfig};
use crate::maps::{preset, AtlasError, EsnFamily, EsnParams, MapFamily};
use crate::seeding::mix_seed;
use crate::symbolic::{generate_sequence, RepeatSpec, StartRule};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Map(#[from] AtlasError),
    #[error("could not build thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Inclusive integer range `{"start": a, "end": b}` or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridAxis {
    Range { start: u32, end: u32 },
    List(Vec<u32>),
}

impl GridAxis {
    /// Sorted, deduplicated values.
    pub fn values(&self) -> Vec<u32> {
        let mut v: Vec<u32> = match self {
            Self::Range { start, end } => (*start..=*end).collect(),
            Self::List(v) => v.clone(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl Default for GridAxis {
    fn default() -> Self {
        Self::Range { start: 1, end: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub preset: String,
    /// Custom network; overrides `preset` when present.
    pub esn: Option<EsnParams>,
    pub m0_minus: GridAxis,
    pub m1_plus: GridAxis,
    /// `null` leaves 0-runs unbounded.
    pub m0_plus: Option<u32>,
    pub m1_minus: u32,
    pub p0: f64,
    pub p1: f64,
    #[serde(alias = "T")]
    pub steps: usize,
    pub n_ic: usize,
    pub cluster_tol: f64,
    pub base_seed: u64,
    pub threads: Option<usize>,
    pub realizations: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            preset: "esn2d".into(),
            esn: None,
            m0_minus: GridAxis::default(),
            m1_plus: GridAxis::default(),
            m0_plus: Some(40),
            m1_minus: 1,
            p0: 0.9,
            p1: 0.95,
            steps: 2000,
            n_ic: 50,
            cluster_tol: 1e-3,
            base_seed: 0,
            threads: None,
            realizations: 1,
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self, SweepError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| SweepError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::InvalidConfig(m.to_string()));
        if self.m0_minus.values().is_empty() || self.m1_plus.values().is_empty() {
            return bad("grid ranges must be nonempty");
        }
        if self.steps == 0 {
            return bad("T must be at least 1");
        }
        if self.n_ic == 0 {
            return bad("n_ic must be at least 1");
        }
        if !(self.cluster_tol > 0.0) {
            return bad("cluster_tol must be positive");
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.p0) || !(0.0..=1.0).contains(&self.p1) {
            return bad("p0 and p1 must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn family(&self) -> Result<Box<dyn MapFamily>, SweepError> {
        match &self.esn {
            Some(params) => Ok(Box::new(EsnFamily::new("custom", params.clone())?)),
            None => Ok(preset(&self.preset)?),
        }
    }

    /// Both 0-runs and 1-runs have fixed length.
    pub fn is_periodic(&self) -> bool {
        self.p0 == 0.0 && self.p1 == 1.0
    }

    /// Seed of realization `r` of cell `(m0_minus, m1_plus)`; realization 0
    /// depends on the coordinates and base seed only.
    pub fn cell_seed(&self, m0_minus: u32, m1_plus: u32, r: usize) -> u64 {
        if r == 0 {
            mix_seed(&[self.base_seed, m0_minus as u64, m1_plus as u64])
        } else {
            mix_seed(&[self.base_seed, m0_minus as u64, m1_plus as u64, r as u64])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub m0_minus: u32,
    pub m1_plus: u32,
    pub seed: u64,
    /// One index per realization; empty on error.
    pub indices: Vec<usize>,
    /// Cluster sizes of the first realization.
    pub cluster_sizes: Vec<usize>,
    pub flagged: usize,
    pub error: Option<String>,
}

impl SweepCell {
    /// Mean index over realizations.
    pub fn index(&self) -> Option<f64> {
        (!self.indices.is_empty()).then(|| self.indices.iter().sum::<usize>() as f64 / self.indices.len() as f64)
    }
}

/// Index other than one above an `m1_plus` where the column already had index one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityWarning {
    pub m0_minus: u32,
    pub m1_plus: u32,
    pub index: f64,
    pub first_one_at: u32,
}

impl std::fmt::Display for MonotonicityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "m0_minus {}: index {} at m1_plus {} after index 1 at m1_plus {}",
            self.m0_minus, self.index, self.m1_plus, self.first_one_at
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub family: serde_json::Value,
    /// Ordered by `(m0_minus, m1_plus)`.
    pub cells: Vec<SweepCell>,
    pub warnings: Vec<MonotonicityWarning>,
}

impl SweepResult {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn cell(&self, m0_minus: u32, m1_plus: u32) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.m0_minus == m0_minus && c.m1_plus == m1_plus)
    }

    /// Number of `m0_minus` columns with at least one monotonicity warning.
    pub fn columns_with_warnings(&self) -> usize {
        let mut cols: Vec<u32> = self.warnings.iter().map(|w| w.m0_minus).collect();
        cols.dedup();
        cols.len()
    }
}

fn run_cell(family: &dyn MapFamily, cfg: &SweepConfig, m0_minus: u32, m1_plus: u32) -> SweepCell {
    let seed = cfg.cell_seed(m0_minus, m1_plus, 0);
    let mut cell =
        SweepCell { m0_minus, m1_plus, seed, indices: Vec::new(), cluster_sizes: Vec::new(), flagged: 0, error: None };
    let spec = RepeatSpec::binary(m0_minus, cfg.m0_plus, cfg.m1_minus, Some(m1_plus))
        .and_then(|s| s.with_probabilities(vec![cfg.p0, cfg.p1]));
    let spec = match spec {
        Ok(s) => s,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    for r in 0..cfg.realizations {
        let s = cfg.cell_seed(m0_minus, m1_plus, r);
        let outcome = generate_sequence(&spec, cfg.steps, s, StartRule::Uniform)
            .map_err(|e| e.to_string())
            .and_then(|v| {
                let echo = EchoConfig { n_ic: cfg.n_ic, steps: cfg.steps, cluster_tol: cfg.cluster_tol, seed: mix_seed(&[s, 1]) };
                estimate_echo_index(family, &v, &echo).map_err(|e| e.to_string())
            });
        match outcome {
            Ok(est) => {
                if r == 0 {
                    cell.cluster_sizes = est.cluster_sizes;
                    cell.flagged = est.flagged;
                }
                cell.indices.push(est.index);
            }
            Err(e) => {
                cell.indices.clear();
                cell.error = Some(e);
                break;
            }
        }
    }
    cell
}

/// For each `m0_minus` column: once the index reaches one with growing
/// `m1_plus` it should stay one.
fn monotonicity_warnings(cells: &[SweepCell]) -> Vec<MonotonicityWarning> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < cells.len() {
        let m0 = cells[start].m0_minus;
        let end = start + cells[start..].iter().take_while(|c| c.m0_minus == m0).count();
        let mut reached: Option<u32> = None;
        for c in &cells[start..end] {
            match (c.index(), reached) {
                (Some(i), None) if i == 1.0 => reached = Some(c.m1_plus),
                (Some(i), Some(at)) if i != 1.0 => {
                    out.push(MonotonicityWarning { m0_minus: m0, m1_plus: c.m1_plus, index: i, first_one_at: at })
                }
                _ => {}
            }
        }
        start = end;
    }
    out
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    let family = cfg.family()?;
    if family.alphabet_size() != 2 {
        return Err(SweepError::InvalidConfig("sweeps need a two-map family".into()));
    }
    let grid: Vec<(u32, u32)> = cfg
        .m0_minus
        .values()
        .into_iter()
        .flat_map(|a| cfg.m1_plus.values().into_iter().map(move |b| (a, b)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| SweepError::Pool(e.to_string()))?;
    let fam: &dyn MapFamily = family.as_ref();
    let cells: Vec<SweepCell> = pool.install(|| grid.par_iter().map(|&(a, b)| run_cell(fam, cfg, a, b)).collect());
    let warnings = if cfg.is_periodic() { monotonicity_warnings(&cells) } else { Vec::new() };
    Ok(SweepResult { config: cfg.clone(), family: family.metadata(), cells, warnings })
}

pub const CSV_HEADER: &str = "m0_minus,m1_plus,index,seed,n_clusters_flagged";

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for c in &result.cells {
        let index = c.index().map_or_else(|| "NA".to_string(), |i| i.to_string());
        let _ = writeln!(out, "{},{},{},{},{}", c.m0_minus, c.m1_plus, index, c.seed, c.flagged);
    }
    out
}

/// Plain PGM; row `m1_plus` descending, column `m0_minus` ascending, gray
/// level the rounded index and `0` for failed cells.
pub fn to_pgm(result: &SweepResult) -> String {
    let mut cols: Vec<u32> = result.cells.iter().map(|c| c.m0_minus).collect();
    cols.sort_unstable();
    cols.dedup();
    let mut rows: Vec<u32> = result.cells.iter().map(|c| c.m1_plus).collect();
    rows.sort_unstable();
    rows.dedup();
    rows.reverse();
    let level = |c: Option<&SweepCell>| c.and_then(SweepCell::index).map_or(0, |i| i.round() as usize);
    let maxval = result.cells.iter().map(|c| level(Some(c))).max().unwrap_or(0).max(1);
    let mut out = format!("P2\n{} {}\n{maxval}\n", cols.len(), rows.len());
    for &r in &rows {
        let line: Vec<String> = cols.iter().map(|&c| level(result.cell(c, r)).to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn metadata_json(result: &SweepResult) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": result.config,
        "family": result.family,
        "cell_seed": "mix_seed([base_seed, m0_minus, m1_plus]) for realization 0, with the realization appended otherwise; ensemble seed mix_seed([cell_seed, 1])",
        "cells": result.cells.len(),
        "failed_cells": result.failed_cells(),
        "warnings": result.warnings.iter().map(ToString::to_string).collect::<Vec<_>>(),
    }))
    .expect("metadata serializes")
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub pgm: PathBuf,
    pub meta: PathBuf,
}

/// Writes `sweep.csv`, `sweep.pgm` and `sweep.meta.json` into `dir`.
pub fn emit_outputs(result: &SweepResult, dir: &Path) -> Result<OutputPaths, SweepError> {
    std::fs::create_dir_all(dir)?;
    let paths = OutputPaths { csv: dir.join("sweep.csv"), pgm: dir.join("sweep.pgm"), meta: dir.join("sweep.meta.json") };
    std::fs::write(&paths.csv, to_csv(result))?;
    std::fs::write(&paths.pgm, to_pgm(result))?;
    std::fs::write(&paths.meta, metadata_json(result))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(m0: Vec<u32>, m1: Vec<u32>) -> SweepConfig {
        SweepConfig { m0_minus: GridAxis::List(m0), m1_plus: GridAxis::List(m1), steps: 300, n_ic: 20, ..Default::default() }
    }

    fn cell(m0: u32, m1: u32, index: usize) -> SweepCell {
        SweepCell { m0_minus: m0, m1_plus: m1, seed: 7, indices: vec![index], cluster_sizes: vec![], flagged: 0, error: None }
    }

    #[test]
    fn config_defaults_from_empty_json() {
        let cfg = SweepConfig::from_json("{}").unwrap();
        assert_eq!(cfg, SweepConfig::default());
        assert_eq!(cfg.m0_minus.values(), (1..=40).collect::<Vec<_>>());
        let cfg = SweepConfig::from_json(r#"{"T": 100, "m1_plus": [3, 35], "m0_plus": null}"#).unwrap();
        assert_eq!((cfg.steps, cfg.m1_plus.values(), cfg.m0_plus), (100, vec![3, 35], None));
        assert!(SweepConfig::from_json(r#"{"T": 0}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"m1_plus": []}"#).is_err());
        assert!(SweepConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn two_by_two_outputs() {
        let result = SweepResult {
            config: small(vec![1, 2], vec![1, 2]),
            family: serde_json::json!({}),
            cells: vec![cell(1, 1, 1), cell(1, 2, 1), cell(2, 1, 1), cell(2, 2, 2)],
            warnings: vec![],
        };
        let csv = to_csv(&result);
        assert_eq!(csv.lines().count(), 5);
        assert_eq!(csv.lines().nth(4).unwrap(), "2,2,2,7,0");
        // top row is m1_plus = 2
        assert_eq!(to_pgm(&result), "P2\n2 2\n2\n1 2\n1 1\n");
    }

    #[test]
    fn single_cell_matches_direct_estimate() {
        let cfg = small(vec![20], vec![3]);
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.cells.len(), 1);
        let c = &result.cells[0];
        let spec = RepeatSpec::binary(20, Some(40), 1, Some(3)).unwrap().with_probabilities(vec![0.9, 0.95]).unwrap();
        let v = generate_sequence(&spec, 300, c.seed, StartRule::Uniform).unwrap();
        let est = estimate_echo_index(
            cfg.family().unwrap().as_ref(),
            &v,
            &EchoConfig { n_ic: 20, steps: 300, cluster_tol: 1e-3, seed: mix_seed(&[c.seed, 1]) },
        )
        .unwrap();
        assert_eq!(c.indices, vec![est.index]);
        assert_eq!(c.cluster_sizes, est.cluster_sizes);
    }

    #[test]
    fn bad_cells_do_not_abort() {
        let cfg = SweepConfig { m0_plus: Some(5), ..small(vec![3, 10], vec![2]) };
        let result = run_sweep(&cfg).unwrap();
        assert_eq!(result.failed_cells(), 1);
        assert!(result.cell(10, 2).unwrap().error.is_some());
        assert!(to_csv(&result).contains("10,2,NA,"));
    }

    #[test]
    fn cells_are_isolated_and_schedule_independent() {
        let a = run_sweep(&SweepConfig { threads: Some(1), ..small(vec![2, 5, 9], vec![3, 31]) }).unwrap();
        let b = run_sweep(&SweepConfig { threads: Some(4), ..small(vec![5, 9], vec![31, 3]) }).unwrap();
        for c in &b.cells {
            assert_eq!(Some(c), a.cell(c.m0_minus, c.m1_plus));
        }
        let c = run_sweep(&SweepConfig { threads: Some(3), ..small(vec![2, 5, 9], vec![3, 31]) }).unwrap();
        assert_eq!(to_csv(&a), to_csv(&c));
    }

    #[test]
    fn monotonicity_is_reported() {
        let cells = vec![cell(1, 1, 2), cell(1, 2, 1), cell(1, 3, 2), cell(2, 1, 2), cell(2, 2, 1)];
        let w = monotonicity_warnings(&cells);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].to_string(), "m0_minus 1: index 2 at m1_plus 3 after index 1 at m1_plus 2");
        let result = SweepResult { config: SweepConfig::default(), family: serde_json::json!({}), cells, warnings: w };
        assert_eq!(result.columns_with_warnings(), 1);
    }

    #[test]
    fn emits_three_files() {
        let result = run_sweep(&small(vec![4], vec![2, 33])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_outputs(&result, dir.path()).unwrap();
        let csv = std::fs::read_to_string(&paths.csv).unwrap();
        assert!(csv.starts_with(CSV_HEADER));
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&paths.meta).unwrap()).unwrap();
        assert_eq!(meta["config"]["n_ic"], 20);
        assert!(std::fs::read_to_string(&paths.pgm).unwrap().starts_with("P2\n1 2\n"));
    }
}
