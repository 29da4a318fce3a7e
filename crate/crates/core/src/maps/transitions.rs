use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::basins::{capture, effective_radius};
use super::{AtlasError, BasinConfig, MapFamily};
use crate::symbolic::SymbolSequence;

/// `P(i, j, k)`: the attractor of `f_k` whose ball the `f_k`-orbit of the
/// `j`-th stable point of `f_i` enters first. `None` marks a straddle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    /// `L(i)`, the number of stable points of each map.
    pub counts: Vec<usize>,
    /// Indexed `[i][j][k]`.
    pub entries: Vec<Vec<Vec<Option<usize>>>>,
    pub straddles: Vec<(usize, usize, usize)>,
}

impl TransitionTable {
    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Result<usize, AtlasError> {
        if i >= self.counts.len() || k >= self.counts.len() {
            return Err(AtlasError::UnknownSymbol { symbol: i.max(k), alphabet: self.counts.len() });
        }
        if j >= self.counts[i] {
            return Err(AtlasError::InvalidSeed { map: i, index: j });
        }
        self.entries[i][j][k].ok_or(AtlasError::BoundaryStraddle { from: i, attractor: j, to: k })
    }

    pub fn is_complete(&self) -> bool {
        self.straddles.is_empty()
    }
}

/// Builds `P` from the stable points of every map.
pub fn transition_table(
    family: &dyn MapFamily,
    stable: &[Vec<Vec<f64>>],
    cfg: &BasinConfig,
) -> Result<TransitionTable, AtlasError> {
    let m = family.alphabet_size();
    if stable.len() != m {
        return Err(AtlasError::InvalidParams(format!("{} stable-point lists for {m} maps", stable.len())));
    }
    if let Some(i) = stable.iter().position(|s| s.is_empty()) {
        return Err(AtlasError::NoStablePoints { map: i });
    }
    let radii: Vec<f64> = stable.iter().map(|s| effective_radius(s, cfg.ball_radius)).collect();
    let mut straddles = Vec::new();
    let mut entries = Vec::with_capacity(m);
    for (i, points) in stable.iter().enumerate() {
        let mut per_point = Vec::with_capacity(points.len());
        for (j, x) in points.iter().enumerate() {
            let mut row = Vec::with_capacity(m);
            for k in 0..m {
                let hit = capture(family, k, x, &stable[k], radii[k], cfg.max_iter);
                if hit.is_none() {
                    straddles.push((i, j, k));
                }
                row.push(hit);
            }
            per_point.push(row);
        }
        entries.push(per_point);
    }
    Ok(TransitionTable { counts: stable.iter().map(Vec::len).collect(), entries, straddles })
}

/// `A[k]` over the window of a sequence, aligned to its indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttractorSequence {
    pub first_index: i64,
    pub indices: Vec<usize>,
}

/// Applies `A[k] = P(v[k-1], A[k-1], v[k])` from `A[first] = a0`.
pub fn forward_attractor_sequence(
    table: &TransitionTable,
    v: &SymbolSequence,
    a0: usize,
) -> Result<AttractorSequence, AtlasError> {
    let symbols = v.symbols();
    let Some(&first) = symbols.first() else {
        return Ok(AttractorSequence { first_index: v.first_index(), indices: Vec::new() });
    };
    let first = first as usize;
    if first >= table.alphabet_size() {
        return Err(AtlasError::UnknownSymbol { symbol: first, alphabet: table.alphabet_size() });
    }
    if a0 >= table.counts[first] {
        return Err(AtlasError::InvalidSeed { map: first, index: a0 });
    }
    let mut indices = Vec::with_capacity(symbols.len());
    indices.push(a0);
    for w in symbols.windows(2) {
        let prev = *indices.last().unwrap();
        indices.push(table.get(w[0] as usize, prev, w[1] as usize)?);
    }
    Ok(AttractorSequence { first_index: v.first_index(), indices })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceCount {
    pub e_window: usize,
    pub e_tail: usize,
}

/// Seeds every attractor of the first map and counts distinct sequences
/// and distinct final indices.
pub fn count_attractor_sequences(table: &TransitionTable, v: &SymbolSequence) -> Result<SequenceCount, AtlasError> {
    let Some(&first) = v.symbols().first() else {
        return Ok(SequenceCount { e_window: 0, e_tail: 0 });
    };
    let seeds = table.counts.get(first as usize).copied().unwrap_or(0);
    let mut windows = BTreeSet::new();
    let mut tails = BTreeSet::new();
    for a0 in 0..seeds {
        let seq = forward_attractor_sequence(table, v, a0)?;
        tails.insert(*seq.indices.last().unwrap());
        windows.insert(seq.indices);
    }
    Ok(SequenceCount { e_window: windows.len(), e_tail: tails.len() })
}
