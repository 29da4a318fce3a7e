use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Symbol, SymbolicError};

/// A finite window onto a bi-infinite symbol sequence.
///
/// `symbols[origin]` is the symbol at time `k = 0`; time `k` lives at
/// storage index `origin + k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSequence {
    alphabet: usize,
    symbols: Vec<Symbol>,
    origin: usize,
}

impl SymbolSequence {
    pub fn new(alphabet: usize, symbols: Vec<Symbol>, origin: usize) -> Result<Self, SymbolicError> {
        if symbols.is_empty() {
            return Err(SymbolicError::Empty);
        }
        if origin >= symbols.len() {
            return Err(SymbolicError::OriginOutOfBounds { origin: origin as i64, len: symbols.len() });
        }
        if let Some(&s) = symbols.iter().find(|&&s| s as usize >= alphabet) {
            return Err(SymbolicError::SymbolOutOfRange { symbol: s as usize, alphabet });
        }
        Ok(Self { alphabet, symbols, origin })
    }

    /// Window starting at `k = 0`.
    pub fn forward(alphabet: usize, symbols: Vec<Symbol>) -> Result<Self, SymbolicError> {
        Self::new(alphabet, symbols, 0)
    }

    /// Parses a digit string such as `"000111100"` with origin at the first symbol.
    pub fn from_digits(alphabet: usize, digits: &str) -> Result<Self, SymbolicError> {
        let symbols = parse_digits(digits)?;
        Self::forward(alphabet, symbols)
    }

    /// `word` repeated until `len` symbols, origin at the start.
    pub fn periodic(alphabet: usize, word: &[Symbol], len: usize) -> Result<Self, SymbolicError> {
        if word.is_empty() {
            return Err(SymbolicError::Empty);
        }
        Self::forward(alphabet, word.iter().copied().cycle().take(len).collect())
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Smallest time index in the window.
    pub fn first_index(&self) -> i64 {
        -(self.origin as i64)
    }

    /// One past the largest time index in the window.
    pub fn end_index(&self) -> i64 {
        (self.symbols.len() - self.origin) as i64
    }

    pub fn at(&self, k: i64) -> Option<Symbol> {
        let idx = k + self.origin as i64;
        if idx < 0 {
            return None;
        }
        self.symbols.get(idx as usize).copied()
    }

    pub fn covers(&self, from: i64, to_exclusive: i64) -> bool {
        from >= self.first_index() && to_exclusive <= self.end_index()
    }

    /// Symbols for times `from..to_exclusive`, if the window covers them.
    pub fn slice(&self, from: i64, to_exclusive: i64) -> Option<&[Symbol]> {
        if from > to_exclusive || !self.covers(from, to_exclusive) {
            return None;
        }
        let a = (from + self.origin as i64) as usize;
        let b = (to_exclusive + self.origin as i64) as usize;
        Some(&self.symbols[a..b])
    }

    /// The shift `sigma^n`: the same symbols with the origin moved `n` places right.
    pub fn shifted(&self, n: i64) -> Result<Self, SymbolicError> {
        let origin = self.origin as i64 + n;
        if origin < 0 || origin >= self.symbols.len() as i64 {
            return Err(SymbolicError::OriginOutOfBounds { origin, len: self.symbols.len() });
        }
        Ok(Self { alphabet: self.alphabet, symbols: self.symbols.clone(), origin: origin as usize })
    }

    /// Plain-text form: a `#origin=<k>` header and one digit per symbol.
    pub fn to_text(&self) -> Result<String, SymbolicError> {
        if self.alphabet > 10 {
            return Err(SymbolicError::Parse(format!("text form needs alphabet <= 10, got {}", self.alphabet)));
        }
        let mut out = String::with_capacity(self.symbols.len() + 16);
        writeln!(out, "#origin={}", self.origin).unwrap();
        out.extend(self.symbols.iter().map(|&s| char::from(b'0' + s)));
        out.push('\n');
        Ok(out)
    }

    /// Parses the text form. Lines starting with `#` other than the origin
    /// header are ignored, as is whitespace between digits.
    pub fn from_text(alphabet: usize, text: &str) -> Result<Self, SymbolicError> {
        let mut origin = 0usize;
        let mut body = String::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(value) = rest.trim().strip_prefix("origin=") {
                    origin = value.trim().parse().map_err(|_| SymbolicError::Parse(format!("bad origin header {line:?}")))?;
                }
                continue;
            }
            body.push_str(line);
        }
        let symbols = parse_digits(&body)?;
        Self::new(alphabet, symbols, origin)
    }
}

fn parse_digits(text: &str) -> Result<Vec<Symbol>, SymbolicError> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or_else(|| SymbolicError::Parse(format!("unexpected character {c:?}"))))
        .collect()
}

/// A maximal run of one symbol inside a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub symbol: Symbol,
    pub length: usize,
    /// True when the run touches either edge of the window, so its true
    /// length may be larger.
    pub is_boundary: bool,
}

pub fn run_lengths(seq: &SymbolSequence) -> Vec<Run> {
    let s = seq.symbols();
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=s.len() {
        if i == s.len() || s[i] != s[start] {
            runs.push(Run { symbol: s[start], length: i - start, is_boundary: start == 0 || i == s.len() });
            start = i;
        }
    }
    runs
}

/// `d(u, v) = sum_k d_U(u[k], v[k]) / 2^|k|` over the shared window, with
/// the discrete metric on symbols.
pub fn sequence_metric(u: &SymbolSequence, v: &SymbolSequence) -> Result<f64, SymbolicError> {
    if u.alphabet() != v.alphabet() {
        return Err(SymbolicError::AlphabetMismatch { left: u.alphabet(), right: v.alphabet() });
    }
    let from = u.first_index().max(v.first_index());
    let to = u.end_index().min(v.end_index());
    if from >= to {
        return Err(SymbolicError::EmptyOverlap);
    }
    let mut total = 0.0;
    for k in from..to {
        if u.at(k) != v.at(k) {
            total += 0.5f64.powi(k.unsigned_abs().min(2000) as i32);
        }
    }
    Ok(total)
}
