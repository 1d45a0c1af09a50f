//! Compilation of call-order patterns into minimal deterministic automata.
//!
//! The pipeline is the classical one: Thompson construction to an ε-NFA,
//! subset construction to a partial DFA, Moore partition refinement, and a
//! canonical breadth-first renumbering. The renumbering makes compilation of
//! equal patterns produce identical (not merely isomorphic) automata.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::pattern::OrderPattern;

pub type StateId = usize;

/// Deterministic automaton over event labels. Transitions are partial: a
/// missing transition means the call is not allowed in that state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypestateAutomaton {
    states: usize,
    initial: StateId,
    accepting: BTreeSet<StateId>,
    transitions: BTreeMap<(StateId, String), StateId>,
}

impl TypestateAutomaton {
    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn is_accepting(&self, s: StateId) -> bool {
        self.accepting.contains(&s)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, &str, StateId)> + '_ {
        self.transitions
            .iter()
            .map(|((from, label), to)| (*from, label.as_str(), *to))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn step(&self, state: StateId, label: &str) -> Option<StateId> {
        self.transitions.get(&(state, label.to_string())).copied()
    }

    /// Labels with a transition out of `state`, sorted.
    pub fn outgoing(&self, state: StateId) -> Vec<&str> {
        self.transitions
            .range((state, String::new())..)
            .take_while(|((s, _), _)| *s == state)
            .map(|((_, l), _)| l.as_str())
            .collect()
    }

    pub fn run<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Option<StateId> {
        let mut s = self.initial;
        for l in labels {
            s = self.step(s, l)?;
        }
        Some(s)
    }

    pub fn accepts<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> bool {
        self.run(labels).is_some_and(|s| self.is_accepting(s))
    }

    /// States reachable from the initial state using only labels accepted by
    /// `allowed`.
    pub fn reachable_with(&self, allowed: impl Fn(&str) -> bool) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([self.initial]);
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            for l in self.outgoing(s) {
                if !allowed(l) {
                    continue;
                }
                let t = self.step(s, l).unwrap();
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }
}

// ---- Thompson construction ------------------------------------------------

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(usize, usize)>>, // (symbol index, target)
}

impl Nfa {
    fn add_state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns (start, end) of the fragment.
    fn build(&mut self, p: &OrderPattern, alphabet: &BTreeMap<String, usize>) -> (usize, usize) {
        match p {
            OrderPattern::Event(l) => {
                let (s, e) = (self.add_state(), self.add_state());
                self.edges[s].push((alphabet[l], e));
                (s, e)
            }
            OrderPattern::Seq(ps) => {
                let mut frags = ps.iter().map(|q| self.build(q, alphabet)).collect::<Vec<_>>();
                for w in 0..frags.len().saturating_sub(1) {
                    let (end, next) = (frags[w].1, frags[w + 1].0);
                    self.eps[end].push(next);
                }
                let first = frags.first().map(|f| f.0);
                let last = frags.pop().map(|f| f.1);
                match (first, last) {
                    (Some(f), Some(l)) => (f, l),
                    _ => {
                        let s = self.add_state();
                        (s, s)
                    }
                }
            }
            OrderPattern::Alt(ps) => {
                let (s, e) = (self.add_state(), self.add_state());
                for q in ps {
                    let (qs, qe) = self.build(q, alphabet);
                    self.eps[s].push(qs);
                    self.eps[qe].push(e);
                }
                (s, e)
            }
            OrderPattern::Opt(q) => {
                let (s, e) = (self.add_state(), self.add_state());
                let (qs, qe) = self.build(q, alphabet);
                self.eps[s].extend([qs, e]);
                self.eps[qe].push(e);
                (s, e)
            }
            OrderPattern::Star(q) => {
                let (s, e) = (self.add_state(), self.add_state());
                let (qs, qe) = self.build(q, alphabet);
                self.eps[s].extend([qs, e]);
                self.eps[qe].extend([qs, e]);
                (s, e)
            }
            OrderPattern::Plus(q) => {
                let (s, e) = (self.add_state(), self.add_state());
                let (qs, qe) = self.build(q, alphabet);
                self.eps[s].push(qs);
                self.eps[qe].extend([qs, e]);
                (s, e)
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }
}

/// Compile a pattern into a minimal deterministic automaton accepting
/// exactly the pattern's language.
pub fn compile_order(pattern: &OrderPattern) -> TypestateAutomaton {
    let labels: Vec<String> = pattern.labels().into_iter().collect();
    let alphabet: BTreeMap<String, usize> =
        labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();

    let mut nfa = Nfa::default();
    let (start, end) = nfa.build(pattern, &alphabet);

    // subset construction
    let mut start_set = BTreeSet::from([start]);
    nfa.closure(&mut start_set);
    let mut sets = vec![start_set.clone()];
    let mut index = BTreeMap::from([(start_set, 0usize)]);
    let mut delta: Vec<Vec<Option<usize>>> = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let mut row = vec![None; labels.len()];
        for (sym, slot) in row.iter_mut().enumerate() {
            let mut next = BTreeSet::new();
            for &s in &sets[i] {
                for &(a, t) in &nfa.edges[s] {
                    if a == sym {
                        next.insert(t);
                    }
                }
            }
            if next.is_empty() {
                continue;
            }
            nfa.closure(&mut next);
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    sets.push(next.clone());
                    index.insert(next, sets.len() - 1);
                    sets.len() - 1
                }
            };
            *slot = Some(id);
        }
        delta.push(row);
        i += 1;
    }
    let accepting: Vec<bool> = sets.iter().map(|s| s.contains(&end)).collect();

    minimize(&delta, &accepting, &labels)
}

/// Moore refinement on the DFA completed with an explicit sink, followed by
/// removal of the sink class and canonical BFS renumbering.
fn minimize(delta: &[Vec<Option<usize>>], accepting: &[bool], labels: &[String]) -> TypestateAutomaton {
    let n = delta.len();
    let sink = n;
    let succ = |s: usize, a: usize| -> usize {
        if s == sink {
            sink
        } else {
            delta[s][a].unwrap_or(sink)
        }
    };

    let mut class: Vec<usize> = (0..=n)
        .map(|s| usize::from(s < n && accepting[s]))
        .collect();
    loop {
        let mut sigs: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let mut next = vec![0; n + 1];
        for s in 0..=n {
            let sig = (
                class[s],
                (0..labels.len()).map(|a| class[succ(s, a)]).collect::<Vec<_>>(),
            );
            let fresh = sigs.len();
            next[s] = *sigs.entry(sig).or_insert(fresh);
        }
        let before = class.iter().collect::<BTreeSet<_>>().len();
        let after = sigs.len();
        class = next;
        if before == after {
            break;
        }
    }

    let dead = class[sink];
    let mut canon: BTreeMap<usize, StateId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut transitions = BTreeMap::new();
    let mut accept = BTreeSet::new();
    let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
    for (s, c) in class.iter().enumerate().take(n) {
        rep.entry(*c).or_insert(s);
    }

    canon.insert(class[0], 0);
    queue.push_back(class[0]);
    while let Some(c) = queue.pop_front() {
        let from = canon[&c];
        let r = rep[&c];
        if accepting[r] {
            accept.insert(from);
        }
        for (a, label) in labels.iter().enumerate() {
            let tc = class[succ(r, a)];
            if tc == dead {
                continue;
            }
            let fresh = canon.len();
            let to = *canon.entry(tc).or_insert_with(|| {
                queue.push_back(tc);
                fresh
            });
            transitions.insert((from, label.clone()), to);
        }
    }

    TypestateAutomaton {
        states: canon.len(),
        initial: 0,
        accepting: accept,
        transitions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compile(src: &str) -> TypestateAutomaton {
        compile_order(&OrderPattern::parse(src).unwrap())
    }

    // Independent recursive matcher: the set of suffix positions reachable
    // after matching `p` starting at `i`.
    fn ends(p: &OrderPattern, w: &[&str], i: usize) -> BTreeSet<usize> {
        match p {
            OrderPattern::Event(l) => {
                if w.get(i) == Some(&l.as_str()) {
                    BTreeSet::from([i + 1])
                } else {
                    BTreeSet::new()
                }
            }
            OrderPattern::Seq(ps) => ps.iter().fold(BTreeSet::from([i]), |acc, q| {
                acc.iter().flat_map(|&j| ends(q, w, j)).collect()
            }),
            OrderPattern::Alt(ps) => ps.iter().flat_map(|q| ends(q, w, i)).collect(),
            OrderPattern::Opt(q) => {
                let mut s = ends(q, w, i);
                s.insert(i);
                s
            }
            OrderPattern::Star(q) | OrderPattern::Plus(q) => {
                let mut reached = BTreeSet::new();
                let mut frontier = ends(q, w, i);
                if matches!(p, OrderPattern::Star(_)) {
                    reached.insert(i);
                }
                while let Some(j) = frontier.iter().next().copied() {
                    frontier.remove(&j);
                    if reached.insert(j) {
                        frontier.extend(ends(q, w, j));
                    }
                }
                reached
            }
        }
    }

    fn matches(p: &OrderPattern, w: &[&str]) -> bool {
        ends(p, w, 0).contains(&w.len())
    }

    fn words(alpha: &[&'static str], max: usize) -> Vec<Vec<&'static str>> {
        let mut all = vec![vec![]];
        let mut layer = vec![vec![]];
        for _ in 0..max {
            let mut next = Vec::new();
            for w in &layer {
                for a in alpha {
                    let mut v: Vec<&str> = w.clone();
                    v.push(a);
                    next.push(v);
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all
    }

    #[test]
    fn single_event_has_two_states() {
        let a = compile("a");
        assert_eq!(a.state_count(), 2);
        assert!(a.accepts(["a"]));
        assert!(!a.accepts([]));
        assert!(!a.accepts(["a", "a"]));
    }

    #[test]
    fn optional_suffix() {
        let a = compile("a b?");
        assert!(a.accepts(["a"]));
        assert!(a.accepts(["a", "b"]));
        assert!(!a.accepts(["b"]));
        assert!(!a.accepts(["a", "b", "b"]));
    }

    #[test]
    fn digest_sequence_has_three_states() {
        let a = compile("getInstance update* digest");
        assert_eq!(a.state_count(), 3);
        assert_eq!(a.accepting().len(), 1);
        assert!(a.accepts(["getInstance", "digest"]));
        assert!(a.accepts(["getInstance", "update", "update", "digest"]));
        assert!(!a.accepts(["getInstance", "update"]));
    }

    #[test]
    fn signature_requires_update_before_sign() {
        let a = compile("getInstance (initSign update+ sign)+");
        assert!(!a.accepts(["getInstance", "initSign", "sign"]));
        assert!(!a.accepts(["getInstance", "initSign", "update"]));
        assert!(a.accepts(["getInstance", "initSign", "update", "sign"]));
        assert!(a.accepts([
            "getInstance", "initSign", "update", "sign", "initSign", "update", "update", "sign"
        ]));
        let s = a.run(["getInstance", "initSign", "update"]).unwrap();
        assert_eq!(a.outgoing(s), vec!["sign", "update"]);
    }

    #[test]
    fn a_bstar_c_matches_brute_force_up_to_length_four() {
        let p = OrderPattern::parse("a b* c").unwrap();
        let dfa = compile_order(&p);
        for w in words(&["a", "b", "c"], 4) {
            assert_eq!(dfa.accepts(w.iter().copied()), matches(&p, &w), "{w:?}");
        }
    }

    #[test]
    fn compilation_is_deterministic() {
        for src in ["a (b | c)* d", "(a | a b)+ c?", "x* y* x*"] {
            assert_eq!(compile(src), compile(src));
        }
    }

    #[test]
    fn equivalent_patterns_compile_identically() {
        assert_eq!(compile("a a*"), compile("a+"));
        assert_eq!(compile("(a | b)*"), compile("(a* b*)*"));
    }

    #[test]
    fn every_state_reachable_and_live() {
        let a = compile("a (b c | b d)* e?");
        assert_eq!(a.reachable_with(|_| true).len(), a.state_count());
        for s in 0..a.state_count() {
            let live = a.is_accepting(s) || !a.outgoing(s).is_empty();
            assert!(live, "state {s} is dead");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pattern() -> impl Strategy<Value = OrderPattern> {
            let leaf = prop::sample::select(vec!["a", "b", "c", "d", "e"]).prop_map(OrderPattern::event);
            leaf.prop_recursive(4, 24, 3, |inner| {
                prop_oneof![
                    prop::collection::vec(inner.clone(), 2..4).prop_map(OrderPattern::Seq),
                    prop::collection::vec(inner.clone(), 2..4).prop_map(OrderPattern::Alt),
                    inner.clone().prop_map(|p| OrderPattern::Opt(Box::new(p))),
                    inner.clone().prop_map(|p| OrderPattern::Star(Box::new(p))),
                    inner.prop_map(|p| OrderPattern::Plus(Box::new(p))),
                ]
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn dfa_agrees_with_recursive_matcher(p in pattern()) {
                let dfa = compile_order(&p);
                let alpha: Vec<&'static str> = vec!["a", "b", "c", "d", "e"];
                for w in words(&alpha, 4) {
                    prop_assert_eq!(dfa.accepts(w.iter().copied()), matches(&p, &w));
                }
            }

            #[test]
            fn recompilation_is_identical(p in pattern()) {
                prop_assert_eq!(compile_order(&p), compile_order(&p));
            }
        }
    }
}
