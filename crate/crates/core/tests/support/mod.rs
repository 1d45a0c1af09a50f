//! Random program and pattern generators with brute-force oracles that share
//! no code with the analyzer.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::RngExt;

pub fn fixtures() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

// ---------------------------------------------------------------------------
// Random methods

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    DeclAlg(&'static str),
    AssignAlg(&'static str),
    AllocMd,
    Update,
    Digest,
    DigestData,
    DeclKb,
    AllocRnd,
    NextBytes,
    SetSeed,
    AllocKs,
    Return,
    Throw,
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Simple(Op, u32),
    If(Vec<Stmt>, Vec<Stmt>),
    While(Vec<Stmt>),
}

#[derive(Debug, Clone)]
pub struct Program {
    pub body: Vec<Stmt>,
}

const ALGS: [&str; 3] = ["SHA-256", "MD5", "SHA-1"];
const SECURE_ALGS: [&str; 1] = ["SHA-256"];

pub const MAX_STATEMENTS: usize = 8;
pub const MAX_BRANCHES: usize = 2;
pub const MAX_LOOPS: usize = 1;

struct Gen<'a> {
    rng: &'a mut StdRng,
    budget: usize,
    branches: usize,
    loops: usize,
    /// declarations still to emit at top level, in dependency order
    pending: Vec<Op>,
    declared: BTreeSet<&'static str>,
}

fn name(op: Op) -> &'static str {
    match op {
        Op::DeclAlg(_) => "alg",
        Op::AllocMd => "md",
        Op::DeclKb => "kb",
        Op::AllocRnd => "rnd",
        Op::AllocKs => "ks",
        _ => "",
    }
}

impl Gen<'_> {
    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.rng.random_range(0..xs.len())]
    }

    fn ops(&self) -> Vec<Op> {
        let d = |n| self.declared.contains(n);
        let mut v = Vec::new();
        if d("alg") {
            v.extend(ALGS.iter().map(|a| Op::AssignAlg(a)));
        }
        if d("md") {
            v.extend([Op::Update, Op::Update, Op::Digest, Op::DigestData]);
        }
        if d("rnd") && d("kb") {
            v.extend([Op::NextBytes, Op::NextBytes]);
        }
        if d("rnd") {
            v.push(Op::SetSeed);
        }
        v
    }

    fn block(&mut self, top: bool, depth: usize) -> Vec<Stmt> {
        let mut out = Vec::new();
        loop {
            // keep room for the declarations still owed at top level
            let needed = self.pending.len();
            if self.budget <= needed {
                break;
            }
            if top && !self.pending.is_empty() && self.rng.random_bool(0.45) {
                let op = self.pending.remove(0);
                self.declared.insert(name(op));
                self.budget -= 1;
                out.push(Stmt::Simple(op, 0));
                continue;
            }
            let stop = if top { 0.15 } else { 0.35 };
            if self.rng.random_bool(stop) {
                break;
            }
            let r = self.rng.random_range(0..10);
            if r < 2 && self.branches < MAX_BRANCHES && depth < 2 {
                self.branches += 1;
                let a = self.block(false, depth + 1);
                let b = if self.rng.random_bool(0.5) {
                    self.block(false, depth + 1)
                } else {
                    Vec::new()
                };
                let (a, b) = (self.maybe_exit(a), self.maybe_exit(b));
                out.push(Stmt::If(a, b));
            } else if r < 3 && self.loops < MAX_LOOPS && depth < 2 {
                self.loops += 1;
                let body = self.block(false, depth + 1);
                out.push(Stmt::While(body));
            } else {
                let ops = self.ops();
                if ops.is_empty() {
                    if top && !self.pending.is_empty() {
                        continue;
                    }
                    break;
                }
                let op = self.pick(&ops);
                self.budget -= 1;
                out.push(Stmt::Simple(op, 0));
            }
        }
        if top {
            for op in std::mem::take(&mut self.pending) {
                self.declared.insert(name(op));
                out.push(Stmt::Simple(op, 0));
            }
        }
        out
    }

    fn maybe_exit(&mut self, mut b: Vec<Stmt>) -> Vec<Stmt> {
        // leave room for the declarations still owed at top level
        if self.budget > self.pending.len() && self.rng.random_bool(0.25) {
            self.budget -= 1;
            b.push(Stmt::Simple(self.pick(&[Op::Return, Op::Throw]), 0));
        }
        b
    }
}

/// A method with at most 8 simple statements, 2 branches and 1 loop.
pub fn random_program(rng: &mut StdRng) -> Program {
    let scenario = rng.random_range(0..3);
    let mut pending = Vec::new();
    if scenario != 1 {
        let a = ALGS[rng.random_range(0..ALGS.len())];
        pending.extend([Op::DeclAlg(a), Op::AllocMd]);
    }
    if scenario != 0 {
        // kb and rnd in either order, ks last
        if rng.random_bool(0.5) {
            pending.extend([Op::DeclKb, Op::AllocRnd]);
        } else {
            pending.extend([Op::AllocRnd, Op::DeclKb]);
        }
        pending.push(Op::AllocKs);
    }
    let mut g = Gen {
        rng,
        budget: MAX_STATEMENTS,
        branches: 0,
        loops: 0,
        pending,
        declared: BTreeSet::new(),
    };
    let body = g.block(true, 0);
    Program { body }
}

fn op_text(op: Op) -> String {
    match op {
        Op::DeclAlg(a) => format!("String alg = \"{a}\";"),
        Op::AssignAlg(a) => format!("alg = \"{a}\";"),
        Op::AllocMd => "MessageDigest md = MessageDigest.getInstance(alg);".into(),
        Op::Update => "md.update(data);".into(),
        Op::Digest => "md.digest();".into(),
        Op::DigestData => "md.digest(data);".into(),
        Op::DeclKb => "byte[] kb = new byte[16];".into(),
        Op::AllocRnd => "SecureRandom rnd = new SecureRandom();".into(),
        Op::NextBytes => "rnd.nextBytes(kb);".into(),
        Op::SetSeed => "rnd.setSeed(data);".into(),
        Op::AllocKs => "SecretKeySpec ks = new SecretKeySpec(kb, \"AES\");".into(),
        Op::Return => "return;".into(),
        Op::Throw => "throw new IllegalStateException();".into(),
    }
}

pub const HEADER: &str = "import java.security.MessageDigest;
import java.security.SecureRandom;
import javax.crypto.spec.SecretKeySpec;

class Gen {
  void f(byte[] data, boolean c0, boolean c1, boolean c2) throws Exception {
";

/// Java source for the program; assigns each simple statement its line.
pub fn render(p: &mut Program) -> String {
    fn go(b: &mut [Stmt], out: &mut String, line: &mut u32, indent: usize, cond: &mut usize) {
        let pad = " ".repeat(indent);
        for s in b {
            match s {
                Stmt::Simple(op, l) => {
                    *l = *line;
                    out.push_str(&format!("{pad}{}\n", op_text(*op)));
                    *line += 1;
                }
                Stmt::If(a, e) => {
                    out.push_str(&format!("{pad}if (c{cond}) {{\n"));
                    *cond += 1;
                    *line += 1;
                    go(a, out, line, indent + 2, cond);
                    if !e.is_empty() {
                        out.push_str(&format!("{pad}}} else {{\n"));
                        *line += 1;
                        go(e, out, line, indent + 2, cond);
                    }
                    out.push_str(&format!("{pad}}}\n"));
                    *line += 1;
                }
                Stmt::While(body) => {
                    out.push_str(&format!("{pad}while (c{cond}) {{\n"));
                    *cond += 1;
                    *line += 1;
                    go(body, out, line, indent + 2, cond);
                    out.push_str(&format!("{pad}}}\n"));
                    *line += 1;
                }
            }
        }
    }
    let mut out = HEADER.to_string();
    let mut line = HEADER.lines().count() as u32 + 1;
    let mut cond = 0;
    go(&mut p.body, &mut out, &mut line, 4, &mut cond);
    out.push_str("  }\n}\n");
    out
}

pub fn count(p: &Program) -> (usize, usize, usize) {
    fn go(b: &[Stmt], acc: &mut (usize, usize, usize)) {
        for s in b {
            match s {
                Stmt::Simple(..) => acc.0 += 1,
                Stmt::If(a, e) => {
                    acc.1 += 1;
                    go(a, acc);
                    go(e, acc);
                }
                Stmt::While(body) => {
                    acc.2 += 1;
                    go(body, acc);
                }
            }
        }
    }
    let mut acc = (0, 0, 0);
    go(&p.body, &mut acc);
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    Normal,
    Thrown,
}

/// Every maximal path as the executed simple statements; loops run zero or
/// one time.
type Trace = Vec<(Op, u32)>;

fn paths(p: &Program) -> Vec<(Trace, End)> {
    // continuation-passing enumeration: (prefix, Some(end)) once terminated
    fn block(b: &[Stmt], prefixes: Vec<(Trace, Option<End>)>) -> Vec<(Trace, Option<End>)> {
        let mut cur = prefixes;
        for s in b {
            let mut next = Vec::new();
            for (pre, end) in cur {
                if end.is_some() {
                    next.push((pre, end));
                    continue;
                }
                match s {
                    Stmt::Simple(op, l) => {
                        let mut p = pre.clone();
                        p.push((*op, *l));
                        let e = match op {
                            Op::Return => Some(End::Normal),
                            Op::Throw => Some(End::Thrown),
                            _ => None,
                        };
                        next.push((p, e));
                    }
                    Stmt::If(a, e) => {
                        next.extend(block(a, vec![(pre.clone(), None)]));
                        next.extend(block(e, vec![(pre, None)]));
                    }
                    Stmt::While(body) => {
                        next.push((pre.clone(), None));
                        next.extend(block(body, vec![(pre, None)]));
                    }
                }
            }
            cur = next;
        }
        cur
    }
    block(&p.body, vec![(Vec::new(), None)])
        .into_iter()
        .map(|(p, e)| (p, e.unwrap_or(End::Normal)))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Md {
    Created,
    Updated,
    Done,
}

/// Expected `(error type, line)` pairs, computed by replaying each path.
pub fn oracle(p: &Program) -> BTreeSet<(&'static str, u32)> {
    let mut out = BTreeSet::new();
    let all = paths(p);

    let mut md_values: BTreeSet<&'static str> = BTreeSet::new();
    let mut md_line = None;
    let mut seeded_paths = false;
    let mut seed_lines = BTreeSet::new();
    let mut ks_unsatisfied: Vec<(u32, bool /* had nextBytes */)> = Vec::new();

    for (path, end) in &all {
        let mut alg = "";
        let mut md: Option<Md> = None;
        let mut md_last = 0;
        let mut md_dead = false;
        let mut randomized = false;
        for &(op, line) in path {
            match op {
                Op::DeclAlg(a) | Op::AssignAlg(a) => alg = a,
                Op::AllocMd => {
                    md = Some(Md::Created);
                    md_last = line;
                    md_line = Some(line);
                    md_values.insert(alg);
                }
                Op::Update | Op::Digest | Op::DigestData if !md_dead => {
                    let s = md.expect("md used before allocation");
                    let next = match (s, op) {
                        (_, Op::Update) => Some(Md::Updated),
                        (Md::Updated, Op::Digest) => Some(Md::Done),
                        (Md::Created | Md::Done, Op::DigestData) => Some(Md::Done),
                        _ => None,
                    };
                    match next {
                        Some(n) => {
                            md = Some(n);
                            md_last = line;
                        }
                        None => {
                            out.insert(("TS", line));
                            md_dead = true;
                        }
                    }
                }
                Op::NextBytes => randomized = true,
                Op::SetSeed => {
                    seeded_paths = true;
                    seed_lines.insert(line);
                }
                Op::AllocKs => ks_unsatisfied.push((line, randomized)),
                _ => {}
            }
        }
        if let Some(s) = md {
            if !md_dead && s != Md::Done && *end == End::Normal {
                out.insert(("IO", md_last));
            }
        }
    }
    if let Some(l) = md_line {
        if md_values.len() == 1 {
            let v = md_values.iter().next().unwrap();
            if !SECURE_ALGS.contains(v) {
                out.insert(("C", l));
            }
        }
    }
    for l in seed_lines {
        out.insert(("RP", l));
    }
    // a seeded generator's predicates are untrusted everywhere
    for (line, randomized) in ks_unsatisfied {
        if !randomized || seeded_paths {
            out.insert(("RP", line));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random ORDER patterns

#[derive(Debug, Clone)]
pub enum Pat {
    Label(u8),
    Seq(Vec<Pat>),
    Alt(Vec<Pat>),
    Opt(Box<Pat>),
    Star(Box<Pat>),
    Plus(Box<Pat>),
}

pub const ALPHABET: [&str; 5] = ["a", "b", "c", "d", "e"];

pub fn random_pattern(rng: &mut StdRng, depth: usize) -> Pat {
    if depth == 0 || rng.random_bool(0.3) {
        return Pat::Label(rng.random_range(0..ALPHABET.len() as u8));
    }
    let n = rng.random_range(2..4);
    match rng.random_range(0..5) {
        0 => Pat::Seq((0..n).map(|_| random_pattern(rng, depth - 1)).collect()),
        1 => Pat::Alt((0..n).map(|_| random_pattern(rng, depth - 1)).collect()),
        2 => Pat::Opt(Box::new(random_pattern(rng, depth - 1))),
        3 => Pat::Star(Box::new(random_pattern(rng, depth - 1))),
        _ => Pat::Plus(Box::new(random_pattern(rng, depth - 1))),
    }
}

pub fn pattern_text(p: &Pat) -> String {
    match p {
        Pat::Label(i) => ALPHABET[*i as usize].to_string(),
        Pat::Seq(v) => format!("({})", v.iter().map(pattern_text).collect::<Vec<_>>().join(" ")),
        Pat::Alt(v) => format!("({})", v.iter().map(pattern_text).collect::<Vec<_>>().join(" | ")),
        Pat::Opt(q) => format!("({})?", pattern_text(q)),
        Pat::Star(q) => format!("({})*", pattern_text(q)),
        Pat::Plus(q) => format!("({})+", pattern_text(q)),
    }
}

pub type Word = Vec<u8>;

/// The pattern's language cut off at words of length `max`.
pub fn language(p: &Pat, max: usize) -> BTreeSet<Word> {
    fn concat(a: &BTreeSet<Word>, b: &BTreeSet<Word>, max: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        for x in a {
            for y in b {
                if x.len() + y.len() <= max {
                    let mut w = x.clone();
                    w.extend(y);
                    out.insert(w);
                }
            }
        }
        out
    }
    fn closure(base: &BTreeSet<Word>, max: usize) -> BTreeSet<Word> {
        let mut acc = base.clone();
        loop {
            let more = concat(&acc, base, max);
            let before = acc.len();
            acc.extend(more);
            if acc.len() == before {
                return acc;
            }
        }
    }
    match p {
        Pat::Label(i) => BTreeSet::from([vec![*i]]),
        Pat::Seq(v) => v
            .iter()
            .fold(BTreeSet::from([Vec::new()]), |acc, q| concat(&acc, &language(q, max), max)),
        Pat::Alt(v) => v.iter().flat_map(|q| language(q, max)).collect(),
        Pat::Opt(q) => {
            let mut s = language(q, max);
            s.insert(Vec::new());
            s
        }
        Pat::Plus(q) => closure(&language(q, max), max),
        Pat::Star(q) => {
            let mut s = closure(&language(q, max), max);
            s.insert(Vec::new());
            s
        }
    }
}

pub fn all_words(max: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 0..ALPHABET.len() as u8 {
                let mut x: Word = w.clone();
                x.push(i);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
