//! Stream variables, signatures, terms and formulas.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::FunctionTerm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Bool,
}

/// Index of a stream variable within its [`Signature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub u32);

/// Index of a named function within its [`Signature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FnId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamVariable {
    pub name: String,
    pub sort: Sort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedFunction {
    pub name: String,
    pub term: FunctionTerm,
    pub arity: usize,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("function {name} has arity {arity}, got {given} inputs")]
    ArityMismatch {
        name: String,
        arity: usize,
        given: usize,
    },
}

/// The vocabulary a set of traces and formulas is written over: an ordered
/// list of typed stream variables, the discovered named functions, and the
/// fixed predicate symbols (eq/lt/lte/gte plus the distinguished END).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    variables: Vec<StreamVariable>,
    functions: Vec<NamedFunction>,
    constants: BTreeSet<VarId>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: &str, sort: Sort) -> Result<VarId, SignatureError> {
        if self.var(name).is_some() {
            return Err(SignatureError::DuplicateVariable(name.to_string()));
        }
        self.variables.push(StreamVariable {
            name: name.to_string(),
            sort,
        });
        Ok(VarId(self.variables.len() as u32 - 1))
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    pub fn require_var(&self, name: &str) -> Result<VarId, SignatureError> {
        self.var(name)
            .ok_or_else(|| SignatureError::UnknownVariable(name.to_string()))
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.variables[v.0 as usize].name
    }

    pub fn sort(&self, v: VarId) -> Sort {
        self.variables[v.0 as usize].sort
    }

    pub fn len_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.variables.len()).map(|i| VarId(i as u32))
    }

    pub fn int_vars(&self) -> Vec<VarId> {
        self.vars().filter(|&v| self.sort(v) == Sort::Int).collect()
    }

    pub fn bool_vars(&self) -> Vec<VarId> {
        self.vars()
            .filter(|&v| self.sort(v) == Sort::Bool)
            .collect()
    }

    /// Marks a variable as constant over the corpus: it carries an implicit
    /// self-update and is exempt from explicit update terms.
    pub fn mark_constant(&mut self, v: VarId) {
        self.constants.insert(v);
    }

    pub fn is_constant(&self, v: VarId) -> bool {
        self.constants.contains(&v)
    }

    pub fn constant_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.constants.iter().copied()
    }

    /// Variables that must carry exactly one explicit update per non-final
    /// position of a well-formed trace.
    pub fn update_bearing(&self, v: VarId) -> bool {
        self.sort(v) == Sort::Int && !self.is_constant(v)
    }

    pub fn update_targets(&self) -> Vec<VarId> {
        self.vars().filter(|&v| self.update_bearing(v)).collect()
    }

    /// Registers a function, deduplicating on (term, arity). Without an
    /// explicit name a readable one is derived from the term's behavior.
    pub fn add_function(&mut self, name: Option<&str>, term: FunctionTerm, arity: usize) -> FnId {
        if let Some(id) = self.fn_by_term(&term, arity) {
            return id;
        }
        let base = match name {
            Some(n) => n.to_string(),
            None => default_function_name(&term, arity),
        };
        let mut candidate = base.clone();
        let mut suffix = 2;
        while self.fn_by_name(&candidate).is_some() {
            candidate = format!("{base}_{suffix}");
            suffix += 1;
        }
        self.functions.push(NamedFunction {
            name: candidate,
            term,
            arity,
        });
        FnId(self.functions.len() as u32 - 1)
    }

    pub fn function(&self, id: FnId) -> &NamedFunction {
        &self.functions[id.0 as usize]
    }

    pub fn fn_by_name(&self, name: &str) -> Option<FnId> {
        self.functions
            .iter()
            .position(|f| f.name == name)
            .map(|i| FnId(i as u32))
    }

    pub fn fn_by_term(&self, term: &FunctionTerm, arity: usize) -> Option<FnId> {
        self.functions
            .iter()
            .position(|f| &f.term == term && f.arity == arity)
            .map(|i| FnId(i as u32))
    }

    pub fn functions(&self) -> impl Iterator<Item = (FnId, &NamedFunction)> + '_ {
        self.functions
            .iter()
            .enumerate()
            .map(|(i, f)| (FnId(i as u32), f))
    }

    /// Builds an update term, checking the function arity.
    pub fn update(
        &self,
        target: VarId,
        function: FnId,
        inputs: Vec<VarId>,
    ) -> Result<UpdateTerm, SignatureError> {
        let f = self.function(function);
        if f.arity != inputs.len() {
            return Err(SignatureError::ArityMismatch {
                name: f.name.clone(),
                arity: f.arity,
                given: inputs.len(),
            });
        }
        Ok(UpdateTerm {
            target,
            function,
            inputs,
        })
    }
}

/// Derives a stable readable name for a discovered function.
fn default_function_name(term: &FunctionTerm, arity: usize) -> String {
    if arity == 1 {
        let probe: Vec<i64> = vec![-23, -5, 0, 1, 7, 19];
        let outs: Option<Vec<i64>> = probe.iter().map(|&x| term.eval(&[x]).ok()).collect();
        if let Some(outs) = outs {
            if outs.iter().zip(&probe) .all(|(o, x)| o == x) {
                return "id".to_string();
            }
            if let Some(&c) = outs.first() {
                if outs.iter().all(|&o| o == c) {
                    return if c < 0 {
                        format!("const_m{}", -c)
                    } else {
                        format!("const{c}")
                    };
                }
                let d = c - probe[0];
                if outs.iter().zip(&probe).all(|(o, x)| o - x == d) {
                    return match d.signum() {
                        1 => format!("add{d}"),
                        -1 => format!("sub{}", -d),
                        _ => "id".to_string(),
                    };
                }
            }
        }
    }
    format!("fn_{}", term.to_expr_string_compact())
}

impl FunctionTerm {
    /// Identifier-safe rendering used for fallback function names.
    fn to_expr_string_compact(&self) -> String {
        match self {
            FunctionTerm::Slot(k) => format!("x{k}"),
            FunctionTerm::Const(c) if *c < 0 => format!("m{}", -c),
            FunctionTerm::Const(c) => c.to_string(),
            FunctionTerm::Add(a, b) => format!(
                "add_{}_{}",
                a.to_expr_string_compact(),
                b.to_expr_string_compact()
            ),
            FunctionTerm::Sub(a, b) => format!(
                "sub_{}_{}",
                a.to_expr_string_compact(),
                b.to_expr_string_compact()
            ),
            FunctionTerm::Neg(a) => format!("neg_{}", a.to_expr_string_compact()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Lt,
    Lte,
    Gte,
}

impl CmpOp {
    pub fn name(self) -> &'static str {
        match self {
            CmpOp::Eq => "eq",
            CmpOp::Lt => "lt",
            CmpOp::Lte => "lte",
            CmpOp::Gte => "gte",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "eq" => Some(CmpOp::Eq),
            "lt" => Some(CmpOp::Lt),
            "lte" => Some(CmpOp::Lte),
            "gte" => Some(CmpOp::Gte),
            _ => None,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Lt => a < b,
            CmpOp::Lte => a <= b,
            CmpOp::Gte => a >= b,
        }
    }
}

/// A predicate term, true of the current valuation: a comparison between two
/// integer streams, a bare Boolean stream, or the distinguished END marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PredicateAtom {
    End,
    Bare(VarId),
    Cmp { op: CmpOp, lhs: VarId, rhs: VarId },
}

impl PredicateAtom {
    pub fn cmp(op: CmpOp, lhs: VarId, rhs: VarId) -> Self {
        PredicateAtom::Cmp { op, lhs, rhs }
    }

    pub fn eq(lhs: VarId, rhs: VarId) -> Self {
        Self::cmp(CmpOp::Eq, lhs, rhs)
    }

    pub fn lt(lhs: VarId, rhs: VarId) -> Self {
        Self::cmp(CmpOp::Lt, lhs, rhs)
    }
}

/// `[target <- f(inputs...)]`: target takes, at the next step, the value of
/// `f` applied to the inputs' current values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UpdateTerm {
    pub target: VarId,
    pub function: FnId,
    pub inputs: Vec<VarId>,
}

/// A trace-alphabet element: an update term or a predicate atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Update(UpdateTerm),
    Pred(PredicateAtom),
}

impl Term {
    pub fn is_update(&self) -> bool {
        matches!(self, Term::Update(_))
    }

    pub fn update_target(&self) -> Option<VarId> {
        match self {
            Term::Update(u) => Some(u.target),
            Term::Pred(_) => None,
        }
    }
}

impl From<UpdateTerm> for Term {
    fn from(u: UpdateTerm) -> Self {
        Term::Update(u)
    }
}

impl From<PredicateAtom> for Term {
    fn from(p: PredicateAtom) -> Self {
        Term::Pred(p)
    }
}

/// Formulas over terms. `Or`, `Implies`, `Iff`, `Eventually` and `Always` are
/// derived operators; each node counts once toward the size metric.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Atom(Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(t: impl Into<Term>) -> Self {
        Formula::Atom(t.into())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    /// Conjunction of a nonempty list, left-associated.
    pub fn and_all(mut fs: Vec<Formula>) -> Formula {
        let first = if fs.is_empty() {
            return Formula::True;
        } else {
            fs.remove(0)
        };
        fs.into_iter().fold(first, Formula::and)
    }

    /// Disjunction of a nonempty list, left-associated.
    pub fn or_all(mut fs: Vec<Formula>) -> Formula {
        let first = if fs.is_empty() {
            return Formula::False;
        } else {
            fs.remove(0)
        };
        fs.into_iter().fold(first, Formula::or)
    }

    /// AST node count; atoms (and True/False) count as 1, derived operators
    /// count as single nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::Eventually(a)
            | Formula::Always(a) => 1 + a.size(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b)
            | Formula::Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// All atoms occurring in the formula, in syntactic order.
    pub fn atoms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(t) => out.push(t),
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::Eventually(a)
            | Formula::Always(a) => a.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b)
            | Formula::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}
