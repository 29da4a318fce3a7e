use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{RepeatSpec, Symbol, SymbolSequence, SymbolicError};

/// How the first run of a generated sequence is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartRule {
    /// Uniform over the alphabet, drawn from the seeded stream.
    #[default]
    Uniform,
    Symbol(Symbol),
}

/// Seeded stream of `(symbol, run length)` pairs of the repeat-Markov
/// measure: each run has its minimum length, then extends one step at a
/// time with probability `p[i]` until its maximum.
#[derive(Debug, Clone)]
pub struct RunSampler {
    spec: RepeatSpec,
    probs: Vec<f64>,
    rng: ChaCha8Rng,
    next_symbol: Symbol,
}

impl RunSampler {
    pub fn new(spec: &RepeatSpec, seed: u64, start: StartRule) -> Result<Self, SymbolicError> {
        spec.validate()?;
        let probs = spec.p.clone().ok_or(SymbolicError::MissingProbabilities)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let next_symbol = match start {
            StartRule::Uniform => rng.random_range(0..spec.alphabet) as Symbol,
            StartRule::Symbol(s) if (s as usize) < spec.alphabet => s,
            StartRule::Symbol(s) => return Err(SymbolicError::SymbolOutOfRange { symbol: s as usize, alphabet: spec.alphabet }),
        };
        Ok(Self { spec: spec.clone(), probs, rng, next_symbol })
    }

    fn run_length(&mut self, i: usize) -> usize {
        let p = self.probs[i];
        let mut len = self.spec.m_minus[i] as usize;
        match self.spec.m_plus[i] {
            Some(hi) => {
                while len < hi as usize && self.rng.random::<f64>() < p {
                    len += 1;
                }
            }
            None => {
                while self.rng.random::<f64>() < p {
                    len += 1;
                }
            }
        }
        len
    }
}

impl Iterator for RunSampler {
    type Item = (Symbol, usize);

    fn next(&mut self) -> Option<Self::Item> {
        let sym = self.next_symbol;
        let len = self.run_length(sym as usize);
        let m = self.spec.alphabet;
        self.next_symbol = if m == 2 {
            1 - sym
        } else {
            let r = self.rng.random_range(0..m - 1) as Symbol;
            if r >= sym {
                r + 1
            } else {
                r
            }
        };
        Some((sym, len))
    }
}

/// A length-`len` window (origin at its first symbol) sampled from the
/// repeat-Markov measure of `spec`. The window starts on a run boundary.
pub fn generate_sequence(spec: &RepeatSpec, len: usize, seed: u64, start: StartRule) -> Result<SymbolSequence, SymbolicError> {
    if len == 0 {
        return Err(SymbolicError::Empty);
    }
    let mut symbols = Vec::with_capacity(len);
    for (sym, run) in RunSampler::new(spec, seed, start)? {
        let take = run.min(len - symbols.len());
        symbols.extend(std::iter::repeat_n(sym, take));
        if symbols.len() == len {
            break;
        }
    }
    SymbolSequence::forward(spec.alphabet, symbols)
}
