//! Bounded enumeration of maximal CFG paths. Each loop body runs zero or
//! one times; loops are found from back edges (target dominates source), so
//! IR loaded from JSON does not need accurate `loopHeader` flags.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::{BlockId, MethodIR};

/// Default limit on maximal paths per method.
pub const PATH_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgPath {
    pub blocks: Vec<BlockId>,
    /// Ends in an exit block (return or fall-through), not a `throw`.
    pub normal_exit: bool,
}

#[derive(Debug, Clone)]
pub struct LoopInfo {
    /// Header -> blocks of its natural loop, header excluded.
    pub bodies: BTreeMap<BlockId, BTreeSet<BlockId>>,
}

impl LoopInfo {
    pub fn compute(m: &MethodIR) -> LoopInfo {
        let ids: Vec<BlockId> = m.blocks.iter().map(|b| b.id).collect();
        let succ = |b: BlockId| -> &[BlockId] {
            m.block(b).map(|b| b.successors.as_slice()).unwrap_or(&[])
        };
        let mut preds: BTreeMap<BlockId, Vec<BlockId>> = ids.iter().map(|b| (*b, vec![])).collect();
        for b in &m.blocks {
            for s in &b.successors {
                preds.entry(*s).or_default().push(b.id);
            }
        }
        // iterative dominator sets; graphs are tiny
        let all: BTreeSet<BlockId> = ids.iter().copied().collect();
        let mut dom: BTreeMap<BlockId, BTreeSet<BlockId>> = ids
            .iter()
            .map(|b| {
                if *b == m.entry {
                    (*b, BTreeSet::from([*b]))
                } else {
                    (*b, all.clone())
                }
            })
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for b in &ids {
                if *b == m.entry {
                    continue;
                }
                let mut new: Option<BTreeSet<BlockId>> = None;
                for p in &preds[b] {
                    new = Some(match new {
                        None => dom[p].clone(),
                        Some(acc) => acc.intersection(&dom[p]).copied().collect(),
                    });
                }
                let mut new = new.unwrap_or_default();
                new.insert(*b);
                if new != dom[b] {
                    dom.insert(*b, new);
                    changed = true;
                }
            }
        }
        let mut bodies: BTreeMap<BlockId, BTreeSet<BlockId>> = BTreeMap::new();
        for t in &ids {
            for h in succ(*t) {
                if dom[t].contains(h) {
                    let body = bodies.entry(*h).or_default();
                    let mut stack = vec![*t];
                    while let Some(n) = stack.pop() {
                        if n == *h || !body.insert(n) {
                            continue;
                        }
                        stack.extend(preds[&n].iter().copied());
                    }
                }
            }
        }
        LoopInfo { bodies }
    }

    pub fn is_header(&self, b: BlockId) -> bool {
        self.bodies.contains_key(&b)
    }

    /// Whether `b` lies inside some loop body.
    pub fn in_body(&self, b: BlockId) -> bool {
        self.bodies.values().any(|s| s.contains(&b))
    }
}

/// Enumerate maximal paths from the entry, at most `budget` of them. The flag
/// is true when more paths exist than were returned.
pub fn enumerate_paths(m: &MethodIR, loops: &LoopInfo, budget: usize) -> (Vec<CfgPath>, bool) {
    let mut st = Dfs {
        m,
        loops,
        budget,
        visits: BTreeMap::new(),
        path: Vec::new(),
        out: Vec::new(),
        truncated: false,
    };
    if m.block(m.entry).is_some() {
        st.go(m.entry);
    }
    (st.out, st.truncated)
}

struct Dfs<'a> {
    m: &'a MethodIR,
    loops: &'a LoopInfo,
    budget: usize,
    visits: BTreeMap<BlockId, u8>,
    path: Vec<BlockId>,
    out: Vec<CfgPath>,
    truncated: bool,
}

impl Dfs<'_> {
    fn go(&mut self, b: BlockId) {
        if self.truncated {
            return;
        }
        let n = {
            let v = self.visits.entry(b).or_insert(0);
            *v += 1;
            *v
        };
        self.path.push(b);
        let block = self.m.block(b).expect("validated CFG");
        let body = self.loops.bodies.get(&b);
        let next: Vec<BlockId> = block
            .successors
            .iter()
            .copied()
            .filter(|s| {
                // second visit of a header: only leave the loop
                if n >= 2 && body.is_some_and(|body| body.contains(s)) {
                    return false;
                }
                self.visits.get(s).copied().unwrap_or(0) < 2
            })
            .collect();
        if next.is_empty() {
            if self.out.len() >= self.budget {
                self.truncated = true;
            } else {
                self.out.push(CfgPath {
                    blocks: self.path.clone(),
                    normal_exit: self.m.exits.contains(&b),
                });
            }
        } else {
            for s in next {
                self.go(s);
            }
        }
        self.path.pop();
        *self.visits.get_mut(&b).expect("visited") -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_java;

    fn method(body: &str) -> MethodIR {
        let src = format!("class T {{ void f(boolean c) {{ {body} }} }}");
        parse_java(&src, "T.java").unwrap().methods.remove(0)
    }

    fn count(body: &str) -> usize {
        let m = method(body);
        let l = LoopInfo::compute(&m);
        enumerate_paths(&m, &l, PATH_BUDGET).0.len()
    }

    #[test]
    fn straight_line_has_one_path() {
        assert_eq!(count("int a = 1; a = 2;"), 1);
    }

    #[test]
    fn branches_multiply() {
        assert_eq!(count("if (c) { a(); } else { b(); } if (c) { a(); }"), 4);
    }

    #[test]
    fn loops_run_zero_or_one_times() {
        let m = method("while (c) { a(); } b();");
        let l = LoopInfo::compute(&m);
        let (paths, truncated) = enumerate_paths(&m, &l, PATH_BUDGET);
        assert!(!truncated);
        assert_eq!(paths.len(), 2);
        let header = *l.bodies.keys().next().unwrap();
        assert!(m.block(header).unwrap().loop_header);
        let lens: Vec<usize> = paths.iter().map(|p| p.blocks.len()).collect();
        assert_eq!(lens, vec![5, 3]);
    }

    #[test]
    fn nested_loops_terminate() {
        assert_eq!(count("for (int i = 0; i < 2; i++) { while (c) { a(); } } b();"), 3);
    }

    #[test]
    fn throw_is_not_a_normal_exit() {
        let m = method("if (c) { throw new RuntimeException(); } a();");
        let l = LoopInfo::compute(&m);
        let (paths, _) = enumerate_paths(&m, &l, PATH_BUDGET);
        let normal: Vec<bool> = paths.iter().map(|p| p.normal_exit).collect();
        assert_eq!(normal, vec![false, true]);
    }

    #[test]
    fn budget_truncates() {
        let body = "if (c) { a(); } ".repeat(7);
        let m = method(&body);
        let l = LoopInfo::compute(&m);
        let (paths, truncated) = enumerate_paths(&m, &l, PATH_BUDGET);
        assert!(truncated);
        assert_eq!(paths.len(), PATH_BUDGET);
    }
}
