//! Finite traces of term sets and well-formedness checking.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::logic::ast::{PredicateAtom, Signature, Term, VarId};

/// One trace position: the set of update and predicate terms holding there.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    terms: BTreeSet<Term>,
}

impl Step {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        Step {
            terms: terms.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, t: impl Into<Term>) {
        self.terms.insert(t.into());
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.terms.contains(t)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter()
    }

    pub fn updates(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().filter(|t| t.is_update())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A finite, nonempty sequence of term sets. Well-formedness is a checkable
/// property, not a construction-time guarantee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    steps: Vec<Step>,
}

impl Trace {
    pub fn new(steps: Vec<Step>) -> Self {
        assert!(!steps.is_empty(), "traces are nonempty");
        Trace { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self, i: usize) -> &Step {
        &self.steps[i]
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WfConstraint {
    /// Every update-bearing stream variable is uniquely updated at each
    /// non-final position.
    UniqueUpdate,
    /// No updates hold at the final position.
    NoFinalUpdate,
    /// END holds exactly at the final position.
    EndPlacement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: WfConstraint,
    pub position: usize,
    pub variable: Option<VarId>,
}

/// Reports every well-formedness violation; an empty list means well-formed.
pub fn check_well_formed(trace: &Trace, sig: &Signature) -> Vec<Violation> {
    let mut out = Vec::new();
    let last = trace.len() - 1;
    for (i, step) in trace.steps().iter().enumerate() {
        if i < last {
            for v in sig.vars() {
                let n = step.updates().filter(|t| t.update_target() == Some(v)).count();
                let breached = if sig.update_bearing(v) { n != 1 } else { n > 1 };
                if breached {
                    out.push(Violation {
                        constraint: WfConstraint::UniqueUpdate,
                        position: i,
                        variable: Some(v),
                    });
                }
            }
        } else {
            for t in step.updates() {
                out.push(Violation {
                    constraint: WfConstraint::NoFinalUpdate,
                    position: i,
                    variable: t.update_target(),
                });
            }
        }
        let has_end = step.contains(&Term::Pred(PredicateAtom::End));
        if has_end != (i == last) {
            out.push(Violation {
                constraint: WfConstraint::EndPlacement,
                position: i,
                variable: None,
            });
        }
    }
    out
}
