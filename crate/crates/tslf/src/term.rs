//! Integer function terms: the expression language over input slots,
//! constants, addition, subtraction and negation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An expression tree denoting an integer function of `n` input slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FunctionTerm {
    Slot(usize),
    Const(i64),
    Add(Box<FunctionTerm>, Box<FunctionTerm>),
    Sub(Box<FunctionTerm>, Box<FunctionTerm>),
    Neg(Box<FunctionTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("input slot {slot} out of range for {given} inputs")]
    SlotOutOfRange { slot: usize, given: usize },
    #[error("integer overflow while evaluating term")]
    Overflow,
}

impl FunctionTerm {
    pub fn slot(k: usize) -> Self {
        FunctionTerm::Slot(k)
    }

    pub fn constant(c: i64) -> Self {
        FunctionTerm::Const(c)
    }

    pub fn add(a: FunctionTerm, b: FunctionTerm) -> Self {
        FunctionTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: FunctionTerm, b: FunctionTerm) -> Self {
        FunctionTerm::Sub(Box::new(a), Box::new(b))
    }

    pub fn neg(a: FunctionTerm) -> Self {
        FunctionTerm::Neg(Box::new(a))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            FunctionTerm::Slot(_) | FunctionTerm::Const(_) => 1,
            FunctionTerm::Add(a, b) | FunctionTerm::Sub(a, b) => 1 + a.size() + b.size(),
            FunctionTerm::Neg(a) => 1 + a.size(),
        }
    }

    /// Smallest arity this term can be applied at (1 + highest slot index used).
    pub fn min_arity(&self) -> usize {
        match self {
            FunctionTerm::Slot(k) => k + 1,
            FunctionTerm::Const(_) => 0,
            FunctionTerm::Add(a, b) | FunctionTerm::Sub(a, b) => a.min_arity().max(b.min_arity()),
            FunctionTerm::Neg(a) => a.min_arity(),
        }
    }

    /// Checked evaluation over the given inputs.
    pub fn eval(&self, inputs: &[i64]) -> Result<i64, TermError> {
        match self {
            FunctionTerm::Slot(k) => inputs.get(*k).copied().ok_or(TermError::SlotOutOfRange {
                slot: *k,
                given: inputs.len(),
            }),
            FunctionTerm::Const(c) => Ok(*c),
            FunctionTerm::Add(a, b) => a
                .eval(inputs)?
                .checked_add(b.eval(inputs)?)
                .ok_or(TermError::Overflow),
            FunctionTerm::Sub(a, b) => a
                .eval(inputs)?
                .checked_sub(b.eval(inputs)?)
                .ok_or(TermError::Overflow),
            FunctionTerm::Neg(a) => a.eval(inputs)?.checked_neg().ok_or(TermError::Overflow),
        }
    }

    /// Renders the term with the given argument names in slot order,
    /// e.g. `(x + 1)` for `Add(Slot(0), Const(1))` with args `["x"]`.
    pub fn render(&self, args: &[&str]) -> String {
        match self {
            FunctionTerm::Slot(k) => args.get(*k).copied().unwrap_or("?").to_string(),
            FunctionTerm::Const(c) => c.to_string(),
            FunctionTerm::Add(a, b) => format!("({} + {})", a.render(args), b.render(args)),
            FunctionTerm::Sub(a, b) => format!("({} - {})", a.render(args), b.render(args)),
            FunctionTerm::Neg(a) => format!("(- {})", a.render(args)),
        }
    }

    /// Compact prefix form with slots named `x0`, `x1`, ... Used in artifacts.
    pub fn to_expr_string(&self) -> String {
        match self {
            FunctionTerm::Slot(k) => format!("x{k}"),
            FunctionTerm::Const(c) => c.to_string(),
            FunctionTerm::Add(a, b) => {
                format!("(+ {} {})", a.to_expr_string(), b.to_expr_string())
            }
            FunctionTerm::Sub(a, b) => {
                format!("(- {} {})", a.to_expr_string(), b.to_expr_string())
            }
            FunctionTerm::Neg(a) => format!("(neg {})", a.to_expr_string()),
        }
    }

    /// Parses the output of [`FunctionTerm::to_expr_string`].
    pub fn from_expr_string(text: &str) -> Result<Self, String> {
        let spaced = text.replace('(', " ( ").replace(')', " ) ");
        let tokens: Vec<&str> = spaced.split_whitespace().collect();
        let mut pos = 0;
        let term = parse_expr(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(format!("trailing tokens after term: {:?}", &tokens[pos..]));
        }
        Ok(term)
    }
}

fn parse_expr(tokens: &[&str], pos: &mut usize) -> Result<FunctionTerm, String> {
    let tok = *tokens.get(*pos).ok_or("unexpected end of term")?;
    *pos += 1;
    if tok == "(" {
        let op = *tokens.get(*pos).ok_or("missing operator")?;
        *pos += 1;
        let a = parse_expr(tokens, pos)?;
        let term = match op {
            "neg" => FunctionTerm::neg(a),
            "+" => FunctionTerm::add(a, parse_expr(tokens, pos)?),
            "-" => FunctionTerm::sub(a, parse_expr(tokens, pos)?),
            other => return Err(format!("unknown operator {other:?}")),
        };
        match tokens.get(*pos) {
            Some(&")") => {
                *pos += 1;
                Ok(term)
            }
            _ => Err("missing closing paren".into()),
        }
    } else if let Some(k) = tok.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
        Ok(FunctionTerm::Slot(k))
    } else if let Ok(c) = tok.parse::<i64>() {
        Ok(FunctionTerm::Const(c))
    } else {
        Err(format!("unexpected token {tok:?}"))
    }
}

/// True iff both terms produce the same value on every sample input vector.
/// Evaluation errors on a sample count as disagreement.
pub fn equivalent_on_samples(t1: &FunctionTerm, t2: &FunctionTerm, samples: &[Vec<i64>]) -> bool {
    samples.iter().all(|s| match (t1.eval(s), t2.eval(s)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    })
}
