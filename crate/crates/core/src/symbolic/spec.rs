use serde::{Deserialize, Serialize};

use super::{SymbolicError, MAX_ALPHABET};

/// Per-symbol run-length bounds plus optional repeat probabilities.
///
/// `m_plus[i] == None` means the run length of symbol `i` is unbounded
/// (serialized as JSON `null`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatSpec {
    pub alphabet: usize,
    pub m_minus: Vec<u32>,
    pub m_plus: Vec<Option<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

impl RepeatSpec {
    pub fn new(m_minus: Vec<u32>, m_plus: Vec<Option<u32>>) -> Result<Self, SymbolicError> {
        let spec = Self { alphabet: m_minus.len(), m_minus, m_plus, p: None };
        spec.validate()?;
        Ok(spec)
    }

    /// Two-symbol spec `(m0-, m0+, m1-, m1+)`.
    pub fn binary(m0_minus: u32, m0_plus: Option<u32>, m1_minus: u32, m1_plus: Option<u32>) -> Result<Self, SymbolicError> {
        Self::new(vec![m0_minus, m1_minus], vec![m0_plus, m1_plus])
    }

    /// The full shift on `alphabet` symbols.
    pub fn unconstrained(alphabet: usize) -> Result<Self, SymbolicError> {
        Self::new(vec![1; alphabet], vec![None; alphabet])
    }

    pub fn with_probabilities(mut self, p: Vec<f64>) -> Result<Self, SymbolicError> {
        self.p = Some(p);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SymbolicError> {
        let m = self.alphabet;
        if !(2..=MAX_ALPHABET).contains(&m) {
            return Err(SymbolicError::InvalidSpec(format!("alphabet size {m} not in [2, {MAX_ALPHABET}]")));
        }
        if self.m_minus.len() != m || self.m_plus.len() != m {
            return Err(SymbolicError::InvalidSpec(format!(
                "expected {m} bounds per side, got {} and {}",
                self.m_minus.len(),
                self.m_plus.len()
            )));
        }
        for i in 0..m {
            let lo = self.m_minus[i];
            if lo < 1 {
                return Err(SymbolicError::InvalidSpec(format!("m_minus[{i}] must be >= 1")));
            }
            if let Some(hi) = self.m_plus[i] {
                if hi < lo {
                    return Err(SymbolicError::InvalidSpec(format!("m_plus[{i}] = {hi} < m_minus[{i}] = {lo}")));
                }
            }
        }
        if let Some(p) = &self.p {
            if p.len() != m {
                return Err(SymbolicError::InvalidSpec(format!("expected {m} probabilities, got {}", p.len())));
            }
            for (i, &pi) in p.iter().enumerate() {
                if !(0.0..=1.0).contains(&pi) {
                    return Err(SymbolicError::InvalidSpec(format!("p[{i}] = {pi} outside [0, 1]")));
                }
                if pi == 1.0 && self.m_plus[i].is_none() {
                    return Err(SymbolicError::InvalidSpec(format!("p[{i}] = 1 requires a finite m_plus[{i}]")));
                }
            }
        }
        Ok(())
    }

    /// Expected length of a run of `symbol` under the repeat-Markov law.
    pub fn mean_run_length(&self, symbol: usize) -> Option<f64> {
        let p = self.p.as_ref()?[symbol];
        let lo = self.m_minus[symbol] as f64;
        Some(match self.m_plus[symbol] {
            None => lo + p / (1.0 - p),
            Some(hi) => {
                // sum_{j=1}^{span} P(len >= lo + j) = sum p^j
                let span = (hi - self.m_minus[symbol]) as i32;
                lo + (1..=span).map(|j| p.powi(j)).sum::<f64>()
            }
        })
    }

    pub fn from_json(text: &str) -> Result<Self, SymbolicError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| SymbolicError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}
