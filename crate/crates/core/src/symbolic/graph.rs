use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{RepeatSpec, Symbol};

/// A vertex: the current symbol and how many copies of it have been
/// emitted in the current run (capped at `m_minus` for unbounded symbols).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraphState {
    pub symbol: Symbol,
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    /// Symbol emitted when the edge is traversed.
    pub label: Symbol,
    pub probability: Option<f64>,
}

/// Run-progress presentation of a min-max subshift.
///
/// Walks emit exactly the admissible words. When the spec carries repeat
/// probabilities, every out-edge is weighted: before the minimum the run
/// continues with probability one, afterwards it continues with `p[i]`
/// and otherwise switches uniformly to one of the other symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateGraph {
    pub states: Vec<GraphState>,
    pub edges: Vec<GraphEdge>,
    #[serde(skip)]
    outgoing: Vec<Vec<usize>>,
}

impl StateGraph {
    pub fn out_edges(&self, state: usize) -> impl Iterator<Item = &GraphEdge> {
        self.outgoing[state].iter().map(move |&e| &self.edges[e])
    }

    pub fn state_index(&self, state: GraphState) -> Option<usize> {
        self.states.iter().position(|&s| s == state)
    }

    /// All label words of walks with `len` edges, from any start vertex.
    pub fn walk_words(&self, len: usize) -> BTreeSet<Vec<Symbol>> {
        let mut frontier: BTreeSet<(usize, Vec<Symbol>)> = (0..self.states.len()).map(|v| (v, Vec::new())).collect();
        for _ in 0..len {
            let mut next = BTreeSet::new();
            for (v, word) in &frontier {
                for e in self.out_edges(*v) {
                    let mut w = word.clone();
                    w.push(e.label);
                    next.insert((e.to, w));
                }
            }
            frontier = next;
        }
        frontier.into_iter().map(|(_, w)| w).collect()
    }

    /// Largest deviation of any vertex's out-probabilities from summing to one.
    pub fn probability_defect(&self) -> Option<f64> {
        let mut worst = 0.0f64;
        for v in 0..self.states.len() {
            let mut sum = 0.0;
            for e in self.out_edges(v) {
                sum += e.probability?;
            }
            worst = worst.max((sum - 1.0).abs());
        }
        Some(worst)
    }

    pub fn min_out_degree(&self) -> usize {
        self.outgoing.iter().map(Vec::len).min().unwrap_or(0)
    }
}

pub fn build_state_graph(spec: &RepeatSpec) -> StateGraph {
    let m = spec.alphabet;
    let mut states = Vec::new();
    let mut first_state = vec![0usize; m];
    for i in 0..m {
        first_state[i] = states.len();
        let top = spec.m_plus[i].unwrap_or(spec.m_minus[i]);
        for count in 1..=top {
            states.push(GraphState { symbol: i as Symbol, count });
        }
    }

    let mut edges = Vec::new();
    for (from, st) in states.iter().enumerate() {
        let i = st.symbol as usize;
        let lo = spec.m_minus[i];
        let p = spec.p.as_ref().map(|p| p[i]);
        let switch_weight = |stay: Option<f64>| stay.map(|s| (1.0 - s) / (m - 1) as f64);

        if st.count < lo {
            edges.push(GraphEdge { from, to: from + 1, label: st.symbol, probability: p.map(|_| 1.0) });
            continue;
        }
        let stay = match spec.m_plus[i] {
            Some(hi) if st.count >= hi => None,
            Some(_) => Some(from + 1),
            // unbounded: the last counting state loops on itself
            None => Some(from),
        };
        if let Some(to) = stay {
            edges.push(GraphEdge { from, to, label: st.symbol, probability: p });
        }
        let leave_prob = if stay.is_some() { switch_weight(p) } else { p.map(|_| 1.0 / (m - 1) as f64) };
        for j in (0..m).filter(|&j| j != i) {
            edges.push(GraphEdge { from, to: first_state[j], label: j as Symbol, probability: leave_prob });
        }
    }

    let mut outgoing = vec![Vec::new(); states.len()];
    for (e, edge) in edges.iter().enumerate() {
        outgoing[edge.from].push(e);
    }
    StateGraph { states, edges, outgoing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{build_forbidden_set, run_lengths, validate_sequence, SymbolSequence};

    #[test]
    fn worked_example_shape() {
        let spec = RepeatSpec::binary(3, None, 4, Some(6)).unwrap();
        let g = build_state_graph(&spec);
        let zeros = g.states.iter().filter(|s| s.symbol == 0).count();
        let ones = g.states.iter().filter(|s| s.symbol == 1).count();
        assert_eq!((zeros, ones), (3, 6));
        // 0-run: 0_1 -> 0_2 -> 0_3, 0_3 loops and may leave to 1_1
        let z3 = g.state_index(GraphState { symbol: 0, count: 3 }).unwrap();
        let targets: Vec<_> = g.out_edges(z3).map(|e| g.states[e.to]).collect();
        assert_eq!(targets, vec![GraphState { symbol: 0, count: 3 }, GraphState { symbol: 1, count: 1 }]);
        // 1_6 must leave
        let o6 = g.state_index(GraphState { symbol: 1, count: 6 }).unwrap();
        let targets: Vec<_> = g.out_edges(o6).map(|e| g.states[e.to]).collect();
        assert_eq!(targets, vec![GraphState { symbol: 0, count: 1 }]);
        assert!(g.min_out_degree() >= 1);
    }

    #[test]
    fn forced_alternation() {
        let spec = RepeatSpec::binary(1, Some(1), 1, Some(1)).unwrap();
        let g = build_state_graph(&spec);
        assert_eq!(g.states.len(), 2);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.walk_words(4), [vec![0, 1, 0, 1], vec![1, 0, 1, 0]].into_iter().collect());
    }

    #[test]
    fn exact_two_runs_of_zero() {
        let spec = RepeatSpec::binary(2, Some(2), 1, None).unwrap();
        let g = build_state_graph(&spec);
        for w in g.walk_words(8) {
            let seq = SymbolSequence::forward(2, w).unwrap();
            for run in run_lengths(&seq).into_iter().filter(|r| !r.is_boundary && r.symbol == 0) {
                assert_eq!(run.length, 2);
            }
        }
    }

    #[test]
    fn walks_are_exactly_the_admissible_words() {
        let specs = [
            RepeatSpec::binary(3, None, 4, Some(6)).unwrap(),
            RepeatSpec::binary(2, Some(2), 1, None).unwrap(),
            RepeatSpec::new(vec![2, 1, 1], vec![Some(3), Some(2), None]).unwrap(),
        ];
        for spec in &specs {
            let g = build_state_graph(spec);
            let fws = build_forbidden_set(spec);
            let m = spec.alphabet;
            for len in 1..=9usize {
                let walks = g.walk_words(len);
                let mut admissible = BTreeSet::new();
                for code in 0..m.pow(len as u32) {
                    let mut c = code;
                    let w: Vec<Symbol> = (0..len)
                        .map(|_| {
                            let s = (c % m) as Symbol;
                            c /= m;
                            s
                        })
                        .collect();
                    let seq = SymbolSequence::forward(m, w.clone()).unwrap();
                    if validate_sequence(&seq, &fws).unwrap().is_empty() {
                        admissible.insert(w);
                    }
                }
                assert_eq!(walks, admissible, "spec {spec:?} len {len}");
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let spec = RepeatSpec::new(vec![3, 4, 1], vec![None, Some(6), Some(2)])
            .unwrap()
            .with_probabilities(vec![0.9, 0.95, 0.3])
            .unwrap();
        let g = build_state_graph(&spec);
        assert!(g.probability_defect().unwrap() < 1e-12);
        assert!(build_state_graph(&RepeatSpec::unconstrained(2).unwrap()).probability_defect().is_none());
    }
}
