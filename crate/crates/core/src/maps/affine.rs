use super::{AtlasError, Domain, MapFamily};

/// Maps `f_i(x) = A_i x + b_i` on a box. Invariance of the box is the
/// caller's responsibility.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    name: String,
    dim: usize,
    /// Row-major `n x n`.
    matrices: Vec<Vec<f64>>,
    offsets: Vec<Vec<f64>>,
    domain: Domain,
}

impl AffineFamily {
    pub fn new(name: impl Into<String>, domain: Domain, maps: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self, AtlasError> {
        let n = domain.dim();
        if maps.is_empty() {
            return Err(AtlasError::InvalidParams("need at least one map".into()));
        }
        for (a, b) in &maps {
            if a.len() != n * n || b.len() != n {
                return Err(AtlasError::InvalidParams(format!("affine map shapes {}/{} for dimension {n}", a.len(), b.len())));
            }
        }
        let (matrices, offsets) = maps.into_iter().unzip();
        Ok(Self { name: name.into(), dim: n, matrices, offsets, domain })
    }

    /// One scalar map `x -> factor * x` on `[-1, 1]`.
    pub fn scalar_contraction(factor: f64) -> Self {
        Self::new("contraction", Domain::cube(1, -1.0, 1.0).unwrap(), vec![(vec![factor], vec![0.0])]).unwrap()
    }
}

impl MapFamily for AffineFamily {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn alphabet_size(&self) -> usize {
        self.matrices.len()
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn apply(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let n = self.dim;
        let a = &self.matrices[i];
        for r in 0..n {
            out[r] = self.offsets[i][r] + (0..n).map(|c| a[r * n + c] * x[c]).sum::<f64>();
        }
    }

    fn jacobian_into(&self, i: usize, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.matrices[i]);
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name, "kind": "affine", "matrices": self.matrices, "offsets": self.offsets })
    }
}
