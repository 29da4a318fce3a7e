use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{RepeatSpec, Symbol, SymbolSequence, SymbolicError, MAX_ALPHABET};

/// A nonempty finite string of symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self, SymbolicError> {
        if symbols.is_empty() {
            return Err(SymbolicError::Empty);
        }
        Ok(Self(symbols))
    }

    pub fn from_digits(digits: &str) -> Result<Self, SymbolicError> {
        let symbols = digits
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or_else(|| SymbolicError::Parse(format!("unexpected character {c:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True if `other` occurs as a contiguous subword of `self`.
    pub fn contains(&self, other: &Word) -> bool {
        other.len() <= self.len() && self.0.windows(other.len()).any(|w| w == other.symbols())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            if s < 10 {
                write!(f, "{s}")?;
            } else {
                write!(f, "<{s}>")?;
            }
        }
        Ok(())
    }
}

/// A minimal set of forbidden words over `{0, .., alphabet-1}`.
///
/// Construction discards every word that contains another member as a
/// subword, since such a word forbids nothing new.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenWordSet {
    alphabet: usize,
    words: BTreeSet<Word>,
}

impl ForbiddenWordSet {
    pub fn new(alphabet: usize, words: impl IntoIterator<Item = Word>) -> Result<Self, SymbolicError> {
        if !(2..=MAX_ALPHABET).contains(&alphabet) {
            return Err(SymbolicError::InvalidSpec(format!("alphabet size {alphabet} not in [2, {MAX_ALPHABET}]")));
        }
        let all: BTreeSet<Word> = words.into_iter().collect();
        for w in &all {
            if let Some(&s) = w.symbols().iter().find(|&&s| s as usize >= alphabet) {
                return Err(SymbolicError::SymbolOutOfRange { symbol: s as usize, alphabet });
            }
        }
        let words = all.iter().filter(|w| !all.iter().any(|o| o != *w && w.contains(o))).cloned().collect();
        Ok(Self { alphabet, words })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn words(&self) -> &BTreeSet<Word> {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Longest forbidden word; `0` for the full shift.
    pub fn max_word_len(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }
}

/// Words `j i^m k` for every `m < m_minus[i]` and `j, k != i`, plus
/// `i^(m_plus[i]+1)` for every finite maximum.
pub fn build_forbidden_set(spec: &RepeatSpec) -> ForbiddenWordSet {
    let m = spec.alphabet;
    let mut words = Vec::new();
    for i in 0..m {
        let s = i as Symbol;
        for run in 1..spec.m_minus[i] as usize {
            for j in (0..m).filter(|&j| j != i) {
                for k in (0..m).filter(|&k| k != i) {
                    let mut w = Vec::with_capacity(run + 2);
                    w.push(j as Symbol);
                    w.extend(std::iter::repeat_n(s, run));
                    w.push(k as Symbol);
                    words.push(Word(w));
                }
            }
        }
        if let Some(hi) = spec.m_plus[i] {
            words.push(Word(vec![s; hi as usize + 1]));
        }
    }
    ForbiddenWordSet::new(m, words).expect("spec words are within the alphabet")
}

/// Recovers the min-max bounds encoded by a forbidden word set.
pub fn infer_minmax(fws: &ForbiddenWordSet) -> Result<RepeatSpec, SymbolicError> {
    let m = fws.alphabet();
    let mut longest_short_run = vec![0u32; m];
    let mut m_plus: Vec<Option<u32>> = vec![None; m];

    for w in fws.words() {
        let s = w.symbols();
        let first = s[0];
        if s.iter().all(|&c| c == first) {
            let i = first as usize;
            if s.len() < 2 {
                return Err(SymbolicError::NotMinMaxForm(format!("single-symbol word {w} forbids symbol {first} outright")));
            }
            if m_plus[i].is_some() {
                return Err(SymbolicError::NotMinMaxForm(format!("two maximum words for symbol {first}")));
            }
            m_plus[i] = Some(s.len() as u32 - 1);
            continue;
        }
        let n = s.len();
        let inner = &s[1..n.saturating_sub(1)];
        let is_short_run = n >= 3
            && inner.iter().all(|&c| c == inner[0])
            && s[0] != inner[0]
            && s[n - 1] != inner[0];
        if !is_short_run {
            return Err(SymbolicError::NotMinMaxForm(format!("word {w} is neither i^n nor j i^m k")));
        }
        let i = inner[0] as usize;
        longest_short_run[i] = longest_short_run[i].max(inner.len() as u32);
    }

    let m_minus = longest_short_run.iter().map(|&r| r + 1).collect();
    let spec = RepeatSpec { alphabet: m, m_minus, m_plus, p: None };
    spec.validate().map_err(|e| SymbolicError::NotMinMaxForm(e.to_string()))?;
    if build_forbidden_set(&spec) != *fws {
        return Err(SymbolicError::NotMinMaxForm("word set differs from the one its bounds generate".into()));
    }
    Ok(spec)
}

/// One occurrence of a forbidden word inside a window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Time index (relative to the window origin) of the word's first symbol.
    pub position: i64,
    pub word: Word,
}

/// Every occurrence of a forbidden word as a subword of the window.
///
/// Runs cut by the window edge never match a short-run word `j i^m k`
/// because the bracketing symbol is missing, so truncated runs are exempt
/// from minimum-length checks automatically. Maximum-length words match
/// anywhere.
pub fn validate_sequence(seq: &SymbolSequence, fws: &ForbiddenWordSet) -> Result<Vec<Violation>, SymbolicError> {
    if seq.alphabet() != fws.alphabet() {
        return Err(SymbolicError::AlphabetMismatch { left: seq.alphabet(), right: fws.alphabet() });
    }
    let s = seq.symbols();
    let mut out = Vec::new();
    for start in 0..s.len() {
        for w in fws.words() {
            if s[start..].starts_with(w.symbols()) {
                out.push(Violation { position: start as i64 - seq.origin() as i64, word: w.clone() });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(list: &[&str]) -> BTreeSet<Word> {
        list.iter().map(|d| Word::from_digits(d).unwrap()).collect()
    }

    fn worked_spec() -> RepeatSpec {
        RepeatSpec::binary(3, None, 4, Some(6)).unwrap()
    }

    #[test]
    fn worked_example_words() {
        let fws = build_forbidden_set(&worked_spec());
        assert_eq!(*fws.words(), words(&["010", "0110", "01110", "1111111", "101", "1001"]));
    }

    #[test]
    fn full_shift_is_empty() {
        assert!(build_forbidden_set(&RepeatSpec::unconstrained(2).unwrap()).is_empty());
    }

    #[test]
    fn no_double_zero() {
        let fws = build_forbidden_set(&RepeatSpec::binary(1, Some(1), 1, None).unwrap());
        assert_eq!(*fws.words(), words(&["00"]));
    }

    #[test]
    fn three_symbol_short_runs_cover_all_brackets() {
        let spec = RepeatSpec::new(vec![2, 1, 1], vec![None, None, None]).unwrap();
        let fws = build_forbidden_set(&spec);
        assert_eq!(*fws.words(), words(&["101", "102", "201", "202"]));
        assert_eq!(infer_minmax(&fws).unwrap(), spec);
    }

    /// Minimal inadmissible words found by enumerating every word up to
    /// `max_len` and applying the run-length definition directly.
    fn brute_force_minimal(spec: &RepeatSpec, max_len: usize) -> BTreeSet<Word> {
        let inadmissible = |w: &[Symbol]| -> bool {
            let mut start = 0;
            for i in 1..=w.len() {
                if i == w.len() || w[i] != w[start] {
                    let sym = w[start] as usize;
                    let len = (i - start) as u32;
                    let interior = start > 0 && i < w.len();
                    if interior && len < spec.m_minus[sym] {
                        return true;
                    }
                    if spec.m_plus[sym].is_some_and(|hi| len > hi) {
                        return true;
                    }
                    start = i;
                }
            }
            false
        };
        let m = spec.alphabet;
        let mut found = BTreeSet::new();
        for len in 1..=max_len {
            for code in 0..m.pow(len as u32) {
                let mut c = code;
                let w: Vec<Symbol> = (0..len)
                    .map(|_| {
                        let s = (c % m) as Symbol;
                        c /= m;
                        s
                    })
                    .collect();
                let proper_sub_bad = (1..len).any(|l| w.windows(l).any(&inadmissible));
                if inadmissible(&w) && !proper_sub_bad {
                    found.insert(Word(w));
                }
            }
        }
        found
    }

    #[test]
    fn matches_brute_force_definition() {
        assert_eq!(brute_force_minimal(&RepeatSpec::binary(1, Some(1), 1, None).unwrap(), 3), words(&["00"]));
        let specs = [
            RepeatSpec::binary(3, None, 4, Some(6)).unwrap(),
            RepeatSpec::binary(2, Some(2), 1, None).unwrap(),
            RepeatSpec::binary(2, Some(3), 3, Some(4)).unwrap(),
            RepeatSpec::new(vec![2, 1, 3], vec![Some(3), Some(1), None]).unwrap(),
        ];
        for spec in &specs {
            let built = build_forbidden_set(spec);
            let len = built.max_word_len() + 1;
            assert_eq!(*built.words(), brute_force_minimal(spec, len), "spec {spec:?}");
        }
    }

    #[test]
    fn minimality_reduction_drops_superwords() {
        let fws = ForbiddenWordSet::new(2, words(&["00", "100", "0110"])).unwrap();
        assert_eq!(*fws.words(), words(&["00", "0110"]));
    }

    #[test]
    fn infer_worked_example() {
        let fws = ForbiddenWordSet::new(2, words(&["010", "0110", "01110", "1111111", "101", "1001"])).unwrap();
        assert_eq!(infer_minmax(&fws).unwrap(), worked_spec());
    }

    #[test]
    fn infer_empty_is_full_shift() {
        let fws = ForbiddenWordSet::new(2, []).unwrap();
        assert_eq!(infer_minmax(&fws).unwrap(), RepeatSpec::unconstrained(2).unwrap());
    }

    #[test]
    fn infer_rejects_non_run_words() {
        let fws = ForbiddenWordSet::new(2, words(&["0101"])).unwrap();
        assert!(matches!(infer_minmax(&fws), Err(SymbolicError::NotMinMaxForm(_))));
        // incomplete short-run family: 0110 without 010
        let fws = ForbiddenWordSet::new(2, words(&["0110"])).unwrap();
        assert!(matches!(infer_minmax(&fws), Err(SymbolicError::NotMinMaxForm(_))));
        let fws = ForbiddenWordSet::new(2, words(&["1"])).unwrap();
        assert!(matches!(infer_minmax(&fws), Err(SymbolicError::NotMinMaxForm(_))));
    }

    /// Exhaustive oracle: no spec with bounds up to 6 generates `{0101}`.
    #[test]
    fn no_small_spec_generates_0101() {
        let target = ForbiddenWordSet::new(2, words(&["0101"])).unwrap();
        let bounds: Vec<Option<u32>> = (1..=6).map(Some).chain([None]).collect();
        for a in 1..=6 {
            for b in 1..=6 {
                for &ap in &bounds {
                    for &bp in &bounds {
                        if let Ok(spec) = RepeatSpec::binary(a, ap, b, bp) {
                            assert_ne!(build_forbidden_set(&spec), target);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn round_trip_all_small_specs() {
        let bounds: Vec<Option<u32>> = (1..=8).map(Some).chain([None]).collect();
        for a in 1..=8 {
            for b in 1..=8 {
                for &ap in &bounds {
                    for &bp in &bounds {
                        let Ok(spec) = RepeatSpec::binary(a, ap, b, bp) else { continue };
                        let fws = build_forbidden_set(&spec);
                        assert_eq!(infer_minmax(&fws).unwrap(), spec, "spec {spec:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn validate_examples() {
        let fws = build_forbidden_set(&worked_spec());
        let ok = SymbolSequence::from_digits(2, "000111100").unwrap();
        assert!(validate_sequence(&ok, &fws).unwrap().is_empty());

        let short = SymbolSequence::from_digits(2, "0001100").unwrap();
        let v = validate_sequence(&short, &fws).unwrap();
        assert_eq!(v, vec![Violation { position: 2, word: Word::from_digits("0110").unwrap() }]);

        let long = SymbolSequence::from_digits(2, "1111111").unwrap();
        let v = validate_sequence(&long, &fws).unwrap();
        assert_eq!(v, vec![Violation { position: 0, word: Word::from_digits("1111111").unwrap() }]);
    }

    #[test]
    fn validate_reports_origin_relative_positions() {
        let fws = build_forbidden_set(&worked_spec());
        let seq = SymbolSequence::new(2, vec![0, 0, 0, 1, 0, 0, 0], 3).unwrap();
        let v = validate_sequence(&seq, &fws).unwrap();
        assert_eq!(v, vec![Violation { position: -1, word: Word::from_digits("010").unwrap() }]);
    }

    #[test]
    fn validate_checks_alphabet() {
        let fws = build_forbidden_set(&worked_spec());
        let seq = SymbolSequence::from_digits(3, "012").unwrap();
        assert!(matches!(validate_sequence(&seq, &fws), Err(SymbolicError::AlphabetMismatch { .. })));
    }
}
