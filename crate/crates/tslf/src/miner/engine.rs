//! Size-increasing candidate enumeration over bitvector signatures.
//!
//! Every candidate's truth value at every sample position is a bitvector;
//! semantically identical candidates are deduplicated, keeping the first (and
//! therefore smallest) representative in enumeration order.

use std::collections::{HashMap, HashSet};

use crate::logic::ast::{Formula, PredicateAtom, Term};
use crate::logic::trace::Trace;
use crate::miner::MineMode;

pub(crate) type Sig = Vec<u64>;

/// Position layout of a sample: positives' positions first, then negatives'.
pub(crate) struct SampleIndex {
    pub spans: Vec<(usize, usize)>, // (start, len) per trace
    pub n_pos: usize,
    pub total: usize,
    pub blocks: usize,
    pub full_mask: Sig,
    pub final_mask: Sig,
}

impl SampleIndex {
    pub fn new(positives: &[Trace], negatives: &[Trace]) -> Self {
        let mut spans = Vec::with_capacity(positives.len() + negatives.len());
        let mut total = 0;
        for t in positives.iter().chain(negatives) {
            spans.push((total, t.len()));
            total += t.len();
        }
        let blocks = total.div_ceil(64).max(1);
        let mut full_mask = vec![0u64; blocks];
        for p in 0..total {
            full_mask[p / 64] |= 1 << (p % 64);
        }
        let mut final_mask = vec![0u64; blocks];
        for &(start, len) in &spans {
            let p = start + len - 1;
            final_mask[p / 64] |= 1 << (p % 64);
        }
        SampleIndex {
            spans,
            n_pos: positives.len(),
            total,
            blocks,
            full_mask,
            final_mask,
        }
    }

    pub fn zero(&self) -> Sig {
        vec![0u64; self.blocks]
    }

    fn get(sig: &Sig, p: usize) -> bool {
        sig[p / 64] >> (p % 64) & 1 == 1
    }

    fn set(sig: &mut Sig, p: usize) {
        sig[p / 64] |= 1 << (p % 64);
    }

    pub fn not(&self, a: &Sig) -> Sig {
        a.iter()
            .zip(&self.full_mask)
            .map(|(x, m)| !x & m)
            .collect()
    }

    pub fn and(&self, a: &Sig, b: &Sig) -> Sig {
        a.iter().zip(b).map(|(x, y)| x & y).collect()
    }

    pub fn or(&self, a: &Sig, b: &Sig) -> Sig {
        a.iter().zip(b).map(|(x, y)| x | y).collect()
    }

    pub fn implies(&self, a: &Sig, b: &Sig) -> Sig {
        a.iter()
            .zip(b)
            .zip(&self.full_mask)
            .map(|((x, y), m)| (!x | y) & m)
            .collect()
    }

    pub fn iff(&self, a: &Sig, b: &Sig) -> Sig {
        a.iter()
            .zip(b)
            .zip(&self.full_mask)
            .map(|((x, y), m)| !(x ^ y) & m)
            .collect()
    }

    /// Strong next: truth shifts down one position within each trace; false at
    /// every final position.
    pub fn next(&self, a: &Sig) -> Sig {
        let mut out = self.zero();
        for i in 0..self.blocks {
            let hi = if i + 1 < self.blocks { a[i + 1] << 63 } else { 0 };
            out[i] = (a[i] >> 1) | hi;
        }
        for (o, f) in out.iter_mut().zip(&self.final_mask) {
            *o &= !f;
        }
        out
    }

    /// Eventually: suffix-disjunction within each trace.
    pub fn eventually(&self, a: &Sig) -> Sig {
        let mut out = self.zero();
        for &(start, len) in &self.spans {
            let mut run = false;
            for p in (start..start + len).rev() {
                run |= Self::get(a, p);
                if run {
                    Self::set(&mut out, p);
                }
            }
        }
        out
    }

    /// Per-trace truth of the wrapped candidate at position 0.
    pub fn wrapped_truth(&self, sig: &Sig, mode: MineMode) -> Vec<bool> {
        self.spans
            .iter()
            .map(|&(start, len)| match mode {
                MineMode::Plain => Self::get(sig, start),
                MineMode::Liveness => (start..start + len).any(|p| Self::get(sig, p)),
                MineMode::Safety => (start..start + len).all(|p| Self::get(sig, p)),
            })
            .collect()
    }

    /// True iff the F-wrap of the candidate holds on every positive trace.
    pub fn holds_somewhere_on_all_positives(&self, sig: &Sig) -> bool {
        self.spans[..self.n_pos]
            .iter()
            .all(|&(start, len)| (start..start + len).any(|p| Self::get(sig, p)))
    }

    /// Bit signature of an atom across all sample positions.
    pub fn atom_sig(&self, atom: &Term, positives: &[Trace], negatives: &[Trace]) -> Sig {
        let mut sig = self.zero();
        for (trace, &(start, len)) in positives.iter().chain(negatives).zip(&self.spans) {
            for (i, p) in (start..start + len).enumerate() {
                let on = match atom {
                    Term::Pred(PredicateAtom::End) => i == len - 1,
                    other => trace.step(i).contains(other),
                };
                if on {
                    Self::set(&mut sig, p);
                }
            }
        }
        sig
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Expr {
    Atom(u32),
    Not(u32),
    Next(u32),
    Ev(u32),
    And(u32, u32),
    Or(u32, u32),
    Implies(u32, u32),
    Iff(u32, u32),
}

pub(crate) struct Node {
    pub expr: Expr,
    pub sig: Sig,
    pub size: u32,
}

/// Deduplicated candidates, generated level by level in a fixed order.
pub(crate) struct Enumerator<'a> {
    pub idx: &'a SampleIndex,
    pub atoms: &'a [Term],
    pub mode: MineMode,
    pub nodes: Vec<Node>,
    pub levels: Vec<Vec<u32>>,
    seen: HashSet<Sig>,
    pub max_nodes: usize,
    /// Set when the node cap stopped enumeration, so callers can report an
    /// exhausted bound honestly.
    pub truncated: bool,
}

impl<'a> Enumerator<'a> {
    pub fn new(
        idx: &'a SampleIndex,
        atoms: &'a [Term],
        atom_sigs: Vec<Sig>,
        mode: MineMode,
        max_nodes: usize,
    ) -> Self {
        let mut e = Enumerator {
            idx,
            atoms,
            mode,
            nodes: Vec::new(),
            levels: Vec::new(),
            seen: HashSet::new(),
            max_nodes,
            truncated: false,
        };
        let mut level = Vec::new();
        for (i, sig) in atom_sigs.into_iter().enumerate() {
            e.push(Expr::Atom(i as u32), sig, 1, &mut level);
        }
        e.levels.push(level);
        e
    }

    fn push(&mut self, expr: Expr, sig: Sig, size: u32, level: &mut Vec<u32>) {
        if self.nodes.len() >= self.max_nodes {
            self.truncated = true;
            return;
        }
        // Liveness candidates compose only via conjunction and F, which are
        // monotone: anything containing a subformula whose F-wrap fails on
        // some positive also fails, so it can be dropped outright.
        if self.mode == MineMode::Liveness && !self.idx.holds_somewhere_on_all_positives(&sig) {
            return;
        }
        if self.seen.insert(sig.clone()) {
            self.nodes.push(Node { expr, sig, size });
            level.push(self.nodes.len() as u32 - 1);
        }
    }

    /// Generates the next size level. Returns the ids of its nodes.
    pub fn grow(&mut self) -> &[u32] {
        let size = self.levels.len() + 1;
        let mut level = Vec::new();
        let unary_src: Vec<u32> = self.levels[size - 2].clone();
        match self.mode {
            MineMode::Safety | MineMode::Plain => {
                for &n in &unary_src {
                    let sig = self.idx.not(&self.nodes[n as usize].sig);
                    self.push(Expr::Not(n), sig, size as u32, &mut level);
                }
                for &n in &unary_src {
                    let sig = self.idx.next(&self.nodes[n as usize].sig);
                    self.push(Expr::Next(n), sig, size as u32, &mut level);
                }
                if self.mode == MineMode::Plain {
                    for &n in &unary_src {
                        let sig = self.idx.eventually(&self.nodes[n as usize].sig);
                        self.push(Expr::Ev(n), sig, size as u32, &mut level);
                    }
                }
            }
            MineMode::Liveness => {
                for &n in &unary_src {
                    let sig = self.idx.eventually(&self.nodes[n as usize].sig);
                    self.push(Expr::Ev(n), sig, size as u32, &mut level);
                }
            }
        }
        if size >= 3 {
            self.grow_binary(size, &mut level);
        }
        self.levels.push(level);
        self.levels.last().unwrap()
    }

    fn grow_binary(&mut self, size: usize, level: &mut Vec<u32>) {
        #[derive(Clone, Copy, PartialEq)]
        enum B {
            And,
            Or,
            Implies,
            Iff,
        }
        let ops: &[B] = match self.mode {
            MineMode::Liveness => &[B::And],
            MineMode::Safety | MineMode::Plain => &[B::And, B::Or, B::Implies, B::Iff],
        };
        for &op in ops {
            let symmetric = op != B::Implies;
            for ls in 1..=size - 2 {
                let rs = size - 1 - ls;
                if symmetric && ls > rs {
                    continue;
                }
                let left: Vec<u32> = self.levels[ls - 1].clone();
                let right: Vec<u32> = self.levels[rs - 1].clone();
                for (li, &l) in left.iter().enumerate() {
                    let rstart = if symmetric && ls == rs { li } else { 0 };
                    for &r in &right[rstart..] {
                        let (a, b) = (&self.nodes[l as usize].sig, &self.nodes[r as usize].sig);
                        let (expr, sig) = match op {
                            B::And => (Expr::And(l, r), self.idx.and(a, b)),
                            B::Or => (Expr::Or(l, r), self.idx.or(a, b)),
                            B::Implies => (Expr::Implies(l, r), self.idx.implies(a, b)),
                            B::Iff => (Expr::Iff(l, r), self.idx.iff(a, b)),
                        };
                        self.push(expr, sig, size as u32, level);
                        if self.nodes.len() >= self.max_nodes {
                            return;
                        }
                    }
                }
            }
        }
    }

    /// Rebuilds the formula tree for a node.
    pub fn formula(&self, node: u32) -> Formula {
        let mut cache: HashMap<u32, Formula> = HashMap::new();
        self.formula_memo(node, &mut cache)
    }

    fn formula_memo(&self, node: u32, cache: &mut HashMap<u32, Formula>) -> Formula {
        if let Some(f) = cache.get(&node) {
            return f.clone();
        }
        let f = match self.nodes[node as usize].expr {
            Expr::Atom(i) => Formula::Atom(self.atoms[i as usize].clone()),
            Expr::Not(a) => Formula::not(self.formula_memo(a, cache)),
            Expr::Next(a) => Formula::next(self.formula_memo(a, cache)),
            Expr::Ev(a) => Formula::eventually(self.formula_memo(a, cache)),
            Expr::And(a, b) => {
                Formula::and(self.formula_memo(a, cache), self.formula_memo(b, cache))
            }
            Expr::Or(a, b) => {
                Formula::or(self.formula_memo(a, cache), self.formula_memo(b, cache))
            }
            Expr::Implies(a, b) => {
                Formula::implies(self.formula_memo(a, cache), self.formula_memo(b, cache))
            }
            Expr::Iff(a, b) => {
                Formula::iff(self.formula_memo(a, cache), self.formula_memo(b, cache))
            }
        };
        cache.insert(node, f.clone());
        f
    }
}
