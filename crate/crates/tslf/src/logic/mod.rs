//! The TSL_f object language: variables, terms, formulas, traces, finite-trace
//! evaluation, well-formedness checking and the textual formula format.

pub mod ast;
pub mod eval;
pub mod parse;
pub mod trace;

pub use ast::{
    CmpOp, FnId, Formula, NamedFunction, PredicateAtom, Signature, SignatureError, Sort,
    StreamVariable, Term, UpdateTerm, VarId,
};
pub use eval::{evaluate, satisfies, EvalError};
pub use parse::{format_formula, format_term, parse_formula, ParseError};
pub use trace::{check_well_formed, Step, Trace, Violation, WfConstraint};
