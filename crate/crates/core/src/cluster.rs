//! Single-linkage clustering in the max norm.

use serde::{Deserialize, Serialize};

pub(crate) fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller root so labels follow first appearance
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Cluster label per point; clusters are numbered by first member.
pub fn single_linkage(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let n = points.len();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if max_norm(&points[a], &points[b]) <= tol {
                uf.union(a, b);
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|p| {
            let r = uf.find(p);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            label_of_root[r]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    /// Points reassigned from a singleton to a nearby cluster.
    pub flagged: Vec<usize>,
    /// Largest max-norm distance from a member to its cluster center.
    pub max_spread: f64,
}

impl Clustering {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

/// Single linkage at `tol`; afterwards each singleton whose nearest point in
/// a larger cluster lies within `10 tol` joins that cluster and is flagged.
pub fn cluster_points(points: &[Vec<f64>], tol: f64) -> Clustering {
    let mut labels = single_linkage(points, tol);
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    let mut flagged = Vec::new();
    for p in 0..points.len() {
        if sizes[labels[p]] != 1 {
            continue;
        }
        let nearest = (0..points.len())
            .filter(|&q| sizes[labels[q]] > 1)
            .map(|q| (max_norm(&points[p], &points[q]), q))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((d, q)) = nearest {
            if d <= 10.0 * tol {
                flagged.push(p);
                labels[p] = labels[q];
            }
        }
    }
    // renumber by first appearance after reassignment
    let mut remap = vec![usize::MAX; k];
    let mut next = 0;
    for l in labels.iter_mut() {
        if remap[*l] == usize::MAX {
            remap[*l] = next;
            next += 1;
        }
        *l = remap[*l];
    }
    let dim = points.first().map_or(0, Vec::len);
    let mut centers = vec![vec![0.0; dim]; next];
    let mut sizes = vec![0usize; next];
    for (p, &l) in points.iter().zip(&labels) {
        sizes[l] += 1;
        for (c, v) in centers[l].iter_mut().zip(p) {
            *c += v;
        }
    }
    for (c, &s) in centers.iter_mut().zip(&sizes) {
        c.iter_mut().for_each(|v| *v /= s as f64);
    }
    let max_spread = points.iter().zip(&labels).map(|(p, &l)| max_norm(p, &centers[l])).fold(0.0, f64::max);
    Clustering { labels, centers, sizes, flagged, max_spread }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn chains_link_transitively() {
        let labels = single_linkage(&pts(&[0.0, 0.9, 1.8, 5.0]), 1.0);
        assert_eq!(labels, vec![0, 0, 0, 1]);
    }

    #[test]
    fn max_norm_threshold() {
        let p = vec![vec![0.0, 0.0], vec![0.5, 0.9], vec![0.0, 1.2]];
        assert_eq!(single_linkage(&p, 1.0), vec![0, 0, 0]);
        assert_eq!(single_linkage(&p, 0.8), vec![0, 1, 1]);
    }

    #[test]
    fn stragglers_join_and_are_flagged() {
        let c = cluster_points(&pts(&[0.0, 0.0005, 0.005, 1.0, 1.0001, 3.0]), 1e-3);
        assert_eq!(c.count(), 3);
        assert_eq!(c.sizes, vec![3, 2, 1]);
        assert_eq!(c.flagged, vec![2]);
        assert_eq!(c.labels, vec![0, 0, 0, 1, 1, 2]);
        assert!((c.centers[1][0] - 1.00005).abs() < 1e-12);
    }

    #[test]
    fn isolated_pairs_stay_apart() {
        let c = cluster_points(&pts(&[0.0, 0.004]), 1e-3);
        assert_eq!(c.count(), 2);
        assert!(c.flagged.is_empty());
    }

    #[test]
    fn empty_input() {
        let c = cluster_points(&[], 1e-3);
        assert_eq!(c.count(), 0);
        assert_eq!(c.max_spread, 0.0);
    }
}
