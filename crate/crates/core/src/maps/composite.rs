use std::sync::Arc;

use super::{AtlasError, Domain, MapFamily};

/// How a symbol word is read when composing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeOrder {
    /// `[a, b]` means apply `f_a` first, then `f_b`.
    #[default]
    ApplyLeftFirst,
    /// `[a, b]` means `f_a o f_b`, so `f_b` acts first.
    Function,
}

/// A single map `f_{w_last} o ... o f_{w_first}` built from a word over a
/// family, restricted to a sub-box that it maps into itself.
#[derive(Clone)]
pub struct CompositeMap {
    base: Arc<dyn MapFamily>,
    /// Symbols in application order.
    steps: Vec<usize>,
    domain: Domain,
    name: String,
}

impl CompositeMap {
    pub fn new(base: Arc<dyn MapFamily>, word: &[usize], order: ComposeOrder, domain: Domain) -> Result<Self, AtlasError> {
        if word.is_empty() {
            return Err(AtlasError::InvalidParams("empty composition word".into()));
        }
        if let Some(&s) = word.iter().find(|&&s| s >= base.alphabet_size()) {
            return Err(AtlasError::UnknownSymbol { symbol: s, alphabet: base.alphabet_size() });
        }
        if domain.dim() != base.dim() {
            return Err(AtlasError::Dimension { expected: base.dim(), got: domain.dim() });
        }
        let mut steps = word.to_vec();
        if order == ComposeOrder::Function {
            steps.reverse();
        }
        let name = format!(
            "{}[{}]",
            base.name(),
            steps.iter().rev().map(|s| format!("f{s}")).collect::<Vec<_>>().join("o")
        );
        Ok(Self { base, steps, domain, name })
    }

    /// Symbols in the order they act.
    pub fn steps(&self) -> &[usize] {
        &self.steps
    }
}

impl MapFamily for CompositeMap {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn alphabet_size(&self) -> usize {
        1
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn apply(&self, _i: usize, x: &[f64], out: &mut [f64]) {
        let mut cur = x.to_vec();
        for &s in &self.steps {
            self.base.apply(s, &cur, out);
            cur.copy_from_slice(out);
        }
    }

    fn jacobian_into(&self, _i: usize, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let mut cur = x.to_vec();
        let mut next = vec![0.0; n];
        let mut acc = vec![0.0; n * n];
        for d in 0..n {
            acc[d * n + d] = 1.0;
        }
        let mut step = vec![0.0; n * n];
        for &s in &self.steps {
            self.base.jacobian_into(s, &cur, &mut step);
            for r in 0..n {
                for c in 0..n {
                    out[r * n + c] = (0..n).map(|m| step[r * n + m] * acc[m * n + c]).sum();
                }
            }
            acc.copy_from_slice(&out[..n * n]);
            self.base.apply(s, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({ "name": self.name, "base": self.base.metadata(), "steps": self.steps, "domain": self.domain })
    }
}
