//! Finite-trace satisfaction.

use std::collections::HashMap;

use thiserror::Error;

use crate::logic::ast::{Formula, PredicateAtom, Term};
use crate::logic::trace::Trace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("position {position} out of range for trace of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
}

/// Formulas at least this large are evaluated with memoization on
/// (subformula, position); smaller ones recurse directly.
const MEMO_THRESHOLD: usize = 16;

/// Truth of `formula` at `position` of `trace` under finite-trace semantics:
/// `X` is false at the last position, `U` needs a witness inside the trace,
/// and END holds exactly at the last position.
pub fn evaluate(trace: &Trace, position: usize, formula: &Formula) -> Result<bool, EvalError> {
    if position >= trace.len() {
        return Err(EvalError::PositionOutOfRange {
            position,
            len: trace.len(),
        });
    }
    if formula.size() >= MEMO_THRESHOLD {
        let mut memo = HashMap::new();
        Ok(eval_memo(trace, position, formula, &mut memo))
    } else {
        Ok(eval_rec(trace, position, formula))
    }
}

/// Trace satisfaction: truth at position 0.
pub fn satisfies(trace: &Trace, formula: &Formula) -> Result<bool, EvalError> {
    evaluate(trace, 0, formula)
}

fn eval_atom(trace: &Trace, i: usize, t: &Term) -> bool {
    match t {
        Term::Pred(PredicateAtom::End) => i == trace.len() - 1,
        other => trace.step(i).contains(other),
    }
}

fn eval_rec(trace: &Trace, i: usize, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(t) => eval_atom(trace, i, t),
        Formula::Not(a) => !eval_rec(trace, i, a),
        Formula::And(a, b) => eval_rec(trace, i, a) && eval_rec(trace, i, b),
        Formula::Or(a, b) => eval_rec(trace, i, a) || eval_rec(trace, i, b),
        Formula::Implies(a, b) => !eval_rec(trace, i, a) || eval_rec(trace, i, b),
        Formula::Iff(a, b) => eval_rec(trace, i, a) == eval_rec(trace, i, b),
        Formula::Next(a) => i + 1 < trace.len() && eval_rec(trace, i + 1, a),
        Formula::Until(a, b) => (i..trace.len())
            .any(|j| eval_rec(trace, j, b) && (i..j).all(|k| eval_rec(trace, k, a))),
        Formula::Eventually(a) => (i..trace.len()).any(|j| eval_rec(trace, j, a)),
        Formula::Always(a) => (i..trace.len()).all(|j| eval_rec(trace, j, a)),
    }
}

fn eval_memo(
    trace: &Trace,
    i: usize,
    f: &Formula,
    memo: &mut HashMap<(usize, usize), bool>,
) -> bool {
    let key = (f as *const Formula as usize, i);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let v = match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(t) => eval_atom(trace, i, t),
        Formula::Not(a) => !eval_memo(trace, i, a, memo),
        Formula::And(a, b) => eval_memo(trace, i, a, memo) && eval_memo(trace, i, b, memo),
        Formula::Or(a, b) => eval_memo(trace, i, a, memo) || eval_memo(trace, i, b, memo),
        Formula::Implies(a, b) => !eval_memo(trace, i, a, memo) || eval_memo(trace, i, b, memo),
        Formula::Iff(a, b) => eval_memo(trace, i, a, memo) == eval_memo(trace, i, b, memo),
        Formula::Next(a) => i + 1 < trace.len() && eval_memo(trace, i + 1, a, memo),
        Formula::Until(a, b) => (i..trace.len())
            .any(|j| eval_memo(trace, j, b, memo) && (i..j).all(|k| eval_memo(trace, k, a, memo))),
        Formula::Eventually(a) => (i..trace.len()).any(|j| eval_memo(trace, j, a, memo)),
        Formula::Always(a) => (i..trace.len()).all(|j| eval_memo(trace, j, a, memo)),
    };
    memo.insert(key, v);
    v
}
