//! Text format for formulas: prefix predicates, infix Boolean connectives,
//! temporal `X`/`U`/`F`/`G`, updates in square brackets.
//!
//! Examples: `F ((eq x goalx) && (eq y goaly))`, `G ! [x <- sub1 x]`.

use thiserror::Error;

use crate::logic::ast::{CmpOp, Formula, PredicateAtom, Signature, Term, UpdateTerm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Assign, // <-
    AndAnd,
    OrOr,
    Implies,
    Iff, // <->
    Bang,
}

struct Lexer {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                tokens.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, i));
                i += 1;
            }
            '[' => {
                tokens.push((Tok::LBracket, i));
                i += 1;
            }
            ']' => {
                tokens.push((Tok::RBracket, i));
                i += 1;
            }
            '!' => {
                tokens.push((Tok::Bang, i));
                i += 1;
            }
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    tokens.push((Tok::AndAnd, i));
                    i += 2;
                } else {
                    return Err(ParseError {
                        message: "expected '&&'".into(),
                        offset: i,
                    });
                }
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    tokens.push((Tok::OrOr, i));
                    i += 2;
                } else {
                    return Err(ParseError {
                        message: "expected '||'".into(),
                        offset: i,
                    });
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    tokens.push((Tok::Implies, i));
                    i += 2;
                } else {
                    return Err(ParseError {
                        message: "expected '->'".into(),
                        offset: i,
                    });
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'-') {
                    if bytes.get(i + 2) == Some(&b'>') {
                        tokens.push((Tok::Iff, i));
                        i += 3;
                    } else {
                        tokens.push((Tok::Assign, i));
                        i += 2;
                    }
                } else {
                    return Err(ParseError {
                        message: "expected '<-' or '<->'".into(),
                        offset: i,
                    });
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Tok::Ident(text[start..i].to_string()), start));
            }
            other => {
                return Err(ParseError {
                    message: format!("unexpected character {other:?}"),
                    offset: i,
                });
            }
        }
    }
    Ok(Lexer {
        tokens,
        pos: 0,
        end: text.len(),
    })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, o)| o)
            .unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let offset = self.offset();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            _ => Err(ParseError {
                message: format!("expected {what}"),
                offset,
            }),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let offset = self.offset();
        match self.next() {
            Some(Tok::Ident(s)) => Ok((s, offset)),
            _ => Err(ParseError {
                message: format!("expected {what}"),
                offset,
            }),
        }
    }
}

/// Parses a formula against the given signature.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut lx = lex(text)?;
    let f = parse_iff(&mut lx, sig)?;
    if lx.peek().is_some() {
        return Err(ParseError {
            message: "trailing input after formula".into(),
            offset: lx.offset(),
        });
    }
    Ok(f)
}

fn parse_iff(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    let mut f = parse_implies(lx, sig)?;
    while lx.peek() == Some(&Tok::Iff) {
        lx.next();
        f = Formula::iff(f, parse_implies(lx, sig)?);
    }
    Ok(f)
}

fn parse_implies(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    let f = parse_or(lx, sig)?;
    if lx.peek() == Some(&Tok::Implies) {
        lx.next();
        return Ok(Formula::implies(f, parse_implies(lx, sig)?));
    }
    Ok(f)
}

fn parse_or(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    let mut f = parse_and(lx, sig)?;
    while lx.peek() == Some(&Tok::OrOr) {
        lx.next();
        f = Formula::or(f, parse_and(lx, sig)?);
    }
    Ok(f)
}

fn parse_and(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    let mut f = parse_until(lx, sig)?;
    while lx.peek() == Some(&Tok::AndAnd) {
        lx.next();
        f = Formula::and(f, parse_until(lx, sig)?);
    }
    Ok(f)
}

fn parse_until(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    let f = parse_unary(lx, sig)?;
    if let Some(Tok::Ident(s)) = lx.peek() {
        if s == "U" {
            lx.next();
            return Ok(Formula::until(f, parse_until(lx, sig)?));
        }
    }
    Ok(f)
}

fn parse_unary(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    match lx.peek() {
        Some(Tok::Bang) => {
            lx.next();
            Ok(Formula::not(parse_unary(lx, sig)?))
        }
        Some(Tok::Ident(s)) if matches!(s.as_str(), "X" | "F" | "G") => {
            let op = s.clone();
            lx.next();
            let inner = parse_unary(lx, sig)?;
            Ok(match op.as_str() {
                "X" => Formula::next(inner),
                "F" => Formula::eventually(inner),
                _ => Formula::always(inner),
            })
        }
        _ => parse_primary(lx, sig),
    }
}

fn parse_primary(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    let offset = lx.offset();
    match lx.peek() {
        Some(Tok::LParen) => {
            // `(eq x y)` is a predicate atom; anything else is grouping.
            if let Some(Tok::Ident(s)) = lx.peek2() {
                if CmpOp::from_name(s).is_some() {
                    return parse_pred_atom(lx, sig);
                }
            }
            lx.next();
            let f = parse_iff(lx, sig)?;
            lx.expect(Tok::RParen, "')'")?;
            Ok(f)
        }
        Some(Tok::LBracket) => parse_update(lx, sig),
        Some(Tok::Ident(_)) => {
            let (name, offset) = lx.ident("atom")?;
            match name.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                "END" => Ok(Formula::atom(PredicateAtom::End)),
                _ => {
                    let v = sig.var(&name).ok_or_else(|| ParseError {
                        message: format!("unknown variable {name:?}"),
                        offset,
                    })?;
                    Ok(Formula::atom(PredicateAtom::Bare(v)))
                }
            }
        }
        _ => Err(ParseError {
            message: "expected a formula".into(),
            offset,
        }),
    }
}

fn parse_pred_atom(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    lx.expect(Tok::LParen, "'('")?;
    let (op_name, op_offset) = lx.ident("predicate name")?;
    let op = CmpOp::from_name(&op_name).ok_or_else(|| ParseError {
        message: format!("unknown predicate {op_name:?}"),
        offset: op_offset,
    })?;
    let lhs = parse_var(lx, sig)?;
    let rhs = parse_var(lx, sig)?;
    lx.expect(Tok::RParen, "')'")?;
    Ok(Formula::atom(PredicateAtom::cmp(op, lhs, rhs)))
}

fn parse_var(lx: &mut Lexer, sig: &Signature) -> Result<crate::logic::ast::VarId, ParseError> {
    let (name, offset) = lx.ident("variable name")?;
    sig.var(&name).ok_or_else(|| ParseError {
        message: format!("unknown variable {name:?}"),
        offset,
    })
}

fn parse_update(lx: &mut Lexer, sig: &Signature) -> Result<Formula, ParseError> {
    lx.expect(Tok::LBracket, "'['")?;
    let target = parse_var(lx, sig)?;
    lx.expect(Tok::Assign, "'<-'")?;
    let (fname, f_offset) = lx.ident("function name")?;
    let function = sig.fn_by_name(&fname).ok_or_else(|| ParseError {
        message: format!("unknown function {fname:?}"),
        offset: f_offset,
    })?;
    let mut inputs = Vec::new();
    while lx.peek() != Some(&Tok::RBracket) {
        inputs.push(parse_var(lx, sig)?);
    }
    lx.expect(Tok::RBracket, "']'")?;
    let arity = sig.function(function).arity;
    if inputs.len() != arity {
        return Err(ParseError {
            message: format!("function {fname:?} expects {arity} inputs, got {}", inputs.len()),
            offset: f_offset,
        });
    }
    Ok(Formula::atom(UpdateTerm {
        target,
        function,
        inputs,
    }))
}

/// Formats a term; inverse of the atom syntax accepted by [`parse_formula`].
pub fn format_term(t: &Term, sig: &Signature) -> String {
    match t {
        Term::Pred(PredicateAtom::End) => "END".to_string(),
        Term::Pred(PredicateAtom::Bare(v)) => sig.var_name(*v).to_string(),
        Term::Pred(PredicateAtom::Cmp { op, lhs, rhs }) => format!(
            "({} {} {})",
            op.name(),
            sig.var_name(*lhs),
            sig.var_name(*rhs)
        ),
        Term::Update(u) => {
            let inputs: Vec<&str> = u.inputs.iter().map(|v| sig.var_name(*v)).collect();
            format!(
                "[{} <- {} {}]",
                sig.var_name(u.target),
                sig.function(u.function).name,
                inputs.join(" ")
            )
        }
    }
}

/// Formats a formula; `parse_formula(format_formula(f)) == f` structurally.
pub fn format_formula(f: &Formula, sig: &Signature) -> String {
    match f {
        Formula::True => "true".to_string(),
        Formula::False => "false".to_string(),
        Formula::Atom(t) => format_term(t, sig),
        Formula::Not(a) => format!("! {}", format_formula(a, sig)),
        Formula::Next(a) => format!("X {}", format_formula(a, sig)),
        Formula::Eventually(a) => format!("F {}", format_formula(a, sig)),
        Formula::Always(a) => format!("G {}", format_formula(a, sig)),
        Formula::And(a, b) => binary(a, "&&", b, sig),
        Formula::Or(a, b) => binary(a, "||", b, sig),
        Formula::Implies(a, b) => binary(a, "->", b, sig),
        Formula::Iff(a, b) => binary(a, "<->", b, sig),
        Formula::Until(a, b) => binary(a, "U", b, sig),
    }
}

fn binary(a: &Formula, op: &str, b: &Formula, sig: &Signature) -> String {
    format!("({} {} {})", format_formula(a, sig), op, format_formula(b, sig))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::ast::Sort;
    use crate::term::FunctionTerm;

    fn demo_sig() -> Signature {
        let mut sig = Signature::new();
        for name in ["p", "g", "x", "y", "goalx", "goaly"] {
            sig.add_var(name, Sort::Int).unwrap();
        }
        sig.add_var("stood", Sort::Bool).unwrap();
        sig.add_function(
            Some("add1"),
            FunctionTerm::add(FunctionTerm::Slot(0), FunctionTerm::Const(1)),
            1,
        );
        sig.add_function(
            Some("dec"),
            FunctionTerm::sub(FunctionTerm::Slot(0), FunctionTerm::Const(1)),
            1,
        );
        sig
    }

    #[test]
    fn motivating_liveness_shape() {
        let sig = demo_sig();
        let f = parse_formula("F (eq p g)", &sig).unwrap();
        let p = sig.var("p").unwrap();
        let g = sig.var("g").unwrap();
        assert_eq!(
            f,
            Formula::eventually(Formula::atom(PredicateAtom::eq(p, g)))
        );
    }

    #[test]
    fn update_atom_with_negation() {
        let sig = demo_sig();
        let f = parse_formula("G !([x <- dec x])", &sig).unwrap();
        let x = sig.var("x").unwrap();
        let dec = sig.fn_by_name("dec").unwrap();
        assert_eq!(
            f,
            Formula::always(Formula::not(Formula::atom(UpdateTerm {
                target: x,
                function: dec,
                inputs: vec![x],
            })))
        );
    }

    #[test]
    fn roundtrip_on_published_shapes() {
        let sig = demo_sig();
        let corpus = [
            "F ((eq x goalx) && (eq y goaly))",
            "G ! ((eq x goalx) && (eq y goaly))",
            "G (((eq x goalx) && (eq y goaly)) <-> ((eq x goaly) && (eq y goalx)))",
            "G ((eq x goaly) || ((eq y goaly) -> (eq x goalx)))",
            "F (((eq x goalx) && (eq y goaly)) && F ((eq x goaly) && (eq y goalx)))",
            "G ! ((lt x goalx) <-> X stood)",
            "G ((lt x goaly) || X ((eq x goaly) <-> [x <- add1 x]))",
            "((eq p g) U END)",
            "X F G ! stood",
            "true",
            "[x <- add1 x]",
        ];
        for text in corpus {
            let f = parse_formula(text, &sig).unwrap();
            let printed = format_formula(&f, &sig);
            let reparsed = parse_formula(&printed, &sig).unwrap();
            assert_eq!(f, reparsed, "{text} -> {printed}");
            // format is a fixpoint of parse . format
            assert_eq!(printed, format_formula(&reparsed, &sig));
        }
    }

    #[test]
    fn errors_carry_positions() {
        let sig = demo_sig();
        let err = parse_formula("F (eq nope g)", &sig).unwrap_err();
        assert!(err.message.contains("nope"));
        assert_eq!(err.offset, 6);
        assert!(parse_formula("F (", &sig).is_err());
        assert!(parse_formula("(zz x y)", &sig).is_err());
    }
}
