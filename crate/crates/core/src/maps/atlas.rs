use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    estimate_basins, find_fixed_points, transition_table, AtlasError, BasinConfig, BasinGrid, FixedPoint,
    FixedPointConfig, MapFamily, StabilityKind, TransitionTable,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AtlasConfig {
    pub fixed_points: FixedPointConfig,
    pub basins: BasinConfig,
    pub compute_basins: bool,
    /// Largest UNRESOLVED fraction for which the atlas counts as accepted.
    pub max_unresolved: f64,
}

impl Default for AtlasConfig {
    fn default() -> Self {
        Self {
            fixed_points: FixedPointConfig::default(),
            basins: BasinConfig::default(),
            compute_basins: true,
            max_unresolved: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEntry {
    /// `x_i^0 .. x_i^{L(i)-1}`, sorted lexicographically.
    pub stable: Vec<FixedPoint>,
    pub other: Vec<FixedPoint>,
    pub newton_failures: usize,
    #[serde(skip)]
    pub basins: Option<BasinGrid>,
    pub unresolved_fraction: Option<f64>,
}

/// Fixed points, basins and transition table of a whole family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorAtlas {
    pub family: serde_json::Value,
    pub maps: Vec<MapEntry>,
    pub table: TransitionTable,
    pub accepted: bool,
}

impl AttractorAtlas {
    pub fn build(family: &dyn MapFamily, cfg: &AtlasConfig) -> Result<Self, AtlasError> {
        let mut maps = Vec::with_capacity(family.alphabet_size());
        for i in 0..family.alphabet_size() {
            let search = find_fixed_points(family, i, &cfg.fixed_points)?;
            let (stable, other): (Vec<_>, Vec<_>) =
                search.points.into_iter().partition(|p| p.kind == StabilityKind::Stable);
            if stable.is_empty() {
                return Err(AtlasError::NoStablePoints { map: i });
            }
            let basins = if cfg.compute_basins {
                let locs: Vec<Vec<f64>> = stable.iter().map(|p| p.location.clone()).collect();
                Some(estimate_basins(family, i, &locs, &cfg.basins)?)
            } else {
                None
            };
            let unresolved_fraction = basins.as_ref().map(|b| b.unresolved_fraction);
            maps.push(MapEntry { stable, other, newton_failures: search.failures, basins, unresolved_fraction });
        }
        let stable: Vec<Vec<Vec<f64>>> =
            maps.iter().map(|m| m.stable.iter().map(|p| p.location.clone()).collect()).collect();
        let table = transition_table(family, &stable, &cfg.basins)?;
        let accepted = table.is_complete() && maps.iter().all(|m| m.unresolved_fraction.is_none_or(|u| u < cfg.max_unresolved));
        Ok(Self { family: family.metadata(), maps, table, accepted })
    }

    pub fn stable_points(&self) -> Vec<Vec<Vec<f64>>> {
        self.maps.iter().map(|m| m.stable.iter().map(|p| p.location.clone()).collect()).collect()
    }

    /// `L(i)` for every map.
    pub fn attractor_counts(&self) -> Vec<usize> {
        self.maps.iter().map(|m| m.stable.len()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("atlas serializes")
    }

    /// Writes `basin_<i>.pgm` for every map with a basin grid; returns the paths.
    pub fn write_basin_pgms(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for (i, m) in self.maps.iter().enumerate() {
            if let Some(grid) = &m.basins {
                let text = grid.to_pgm().map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
                let path = dir.join(format!("basin_{i}.pgm"));
                std::fs::write(&path, text)?;
                paths.push(path);
            }
        }
        Ok(paths)
    }
}
