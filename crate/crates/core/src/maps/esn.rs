use serde::{Deserialize, Serialize};

use super::{AtlasError, Domain, MapFamily};

/// Configuration of a leaky echo state network without output feedback.
///
/// Matrices are row-major: `W_r` is `r x r`, `W_in` is `r x p`, and each
/// entry of `inputs` is a `p`-vector; one map per input value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsnParams {
    #[serde(rename = "W_r")]
    pub w_r: Vec<f64>,
    #[serde(rename = "W_in")]
    pub w_in: Vec<f64>,
    pub alpha: f64,
    pub inputs: Vec<Vec<f64>>,
}

impl EsnParams {
    /// The two-neuron network with `W_r = diag(1/2, 7/4)`, `W_in = I`,
    /// leak `1/4` and inputs `(1/4, 1/20)`, `(-1/4, -1/2)`.
    pub fn esn2d() -> Self {
        Self {
            w_r: vec![0.5, 0.0, 0.0, 1.75],
            w_in: vec![1.0, 0.0, 0.0, 1.0],
            alpha: 0.25,
            inputs: vec![vec![0.25, 0.05], vec![-0.25, -0.5]],
        }
    }
}

/// Maps `f_i(x) = (1 - alpha) x + alpha tanh(W_r x + W_in u_i)` on `[-1, 1]^r`.
#[derive(Debug, Clone)]
pub struct EsnFamily {
    name: String,
    params: EsnParams,
    dim: usize,
    /// `W_in u_i` per input.
    drive: Vec<Vec<f64>>,
    domain: Domain,
}

impl EsnFamily {
    pub fn new(name: impl Into<String>, params: EsnParams) -> Result<Self, AtlasError> {
        let r = (params.w_r.len() as f64).sqrt().round() as usize;
        if r == 0 || r * r != params.w_r.len() {
            return Err(AtlasError::InvalidParams(format!("W_r has {} entries, not a square", params.w_r.len())));
        }
        if !(params.alpha > 0.0 && params.alpha <= 1.0) {
            return Err(AtlasError::InvalidParams(format!("alpha = {} outside (0, 1]", params.alpha)));
        }
        if params.inputs.is_empty() {
            return Err(AtlasError::InvalidParams("at least one input value is required".into()));
        }
        let p = params.inputs[0].len();
        if params.inputs.iter().any(|u| u.len() != p) {
            return Err(AtlasError::InvalidParams("inputs have differing lengths".into()));
        }
        if params.w_in.len() != r * p {
            return Err(AtlasError::InvalidParams(format!("W_in has {} entries, expected {r} x {p}", params.w_in.len())));
        }
        let drive = params
            .inputs
            .iter()
            .map(|u| (0..r).map(|row| (0..p).map(|c| params.w_in[row * p + c] * u[c]).sum()).collect())
            .collect();
        Ok(Self { name: name.into(), params, dim: r, drive, domain: Domain::cube(r, -1.0, 1.0)? })
    }

    pub fn esn2d() -> Self {
        Self::new("esn2d", EsnParams::esn2d()).expect("preset parameters are valid")
    }

    pub fn params(&self) -> &EsnParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    fn preactivation(&self, i: usize, x: &[f64], row: usize) -> f64 {
        let n = self.dim;
        let w = &self.params.w_r[row * n..(row + 1) * n];
        w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.drive[i][row]
    }
}

impl MapFamily for EsnFamily {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn alphabet_size(&self) -> usize {
        self.drive.len()
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn apply(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let a = self.params.alpha;
        for row in 0..self.dim {
            out[row] = (1.0 - a) * x[row] + a * self.preactivation(i, x, row).tanh();
        }
    }

    fn jacobian_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let a = self.params.alpha;
        let n = self.dim;
        for row in 0..n {
            let t = self.preactivation(i, x, row).tanh();
            let slope = a * (1.0 - t * t);
            for c in 0..n {
                let leak = if row == c { 1.0 - a } else { 0.0 };
                out[row * n + c] = leak + slope * self.params.w_r[row * n + c];
            }
        }
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name, "kind": "esn", "params": self.params })
    }
}
