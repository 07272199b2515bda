//! Lifting raw logs into well-formed term traces.
//!
//! Rankings score every (function, input tuple) pair per variable by how
//! often it validly explains a step across the corpus; trace construction
//! picks, per step and variable, the highest-ranked valid update plus all
//! true predicate atoms. Bit-blasting provides the propositional baseline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::{Log, LogValue, ResolvedLog};
use crate::logic::ast::{FnId, PredicateAtom, Signature, Sort, Term, VarId};
use crate::logic::trace::{Step, Trace};

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("log {log}, variable {var:?}, step {t}: no valid update among ranked pairs")]
    NoValidUpdate { log: usize, var: String, t: usize },
    #[error("value {value} of {var:?} not representable in {width} bits")]
    BitWidth { var: String, value: i64, width: u32 },
    #[error(transparent)]
    Log(#[from] crate::log::LogError),
}

/// Lifting options: which comparison predicates are emitted and at what bit
/// width the propositional baseline encodes integers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftingConfig {
    /// Emit `lte`/`gte` atoms for pairs involving corpus-constant variables.
    pub bounds_predicates: bool,
    pub bit_width: u32,
}

impl Default for LiftingConfig {
    fn default() -> Self {
        LiftingConfig {
            bounds_predicates: false,
            bit_width: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub function: FnId,
    pub inputs: Vec<VarId>,
    pub count: usize,
}

/// Per-variable candidate update pairs, sorted by corpus-wide validity count
/// descending, ties broken by arity, term size, then input tuple.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTable {
    pub per_var: BTreeMap<VarId, Vec<RankEntry>>,
}

fn input_tuples(vars: &[VarId], arity: usize) -> Vec<Vec<VarId>> {
    let mut out: Vec<Vec<VarId>> = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                vars.iter().map(move |&v| {
                    let mut t2 = t.clone();
                    t2.push(v);
                    t2
                })
            })
            .collect();
    }
    out
}

/// Counts, for every integer variable and (function, inputs) pair, the
/// corpus steps where applying the function to the inputs' values yields the
/// variable's next value. Zero-count pairs are dropped. Entries for constant
/// variables are informational; trace construction skips those targets.
///
/// Input tuples range over the non-constant integer variables plus the target
/// itself; constant parameters never act as update sources.
pub fn compute_rankings(logs: &[ResolvedLog], sig: &Signature) -> RankTable {
    let mut table = RankTable::default();
    for v in sig.int_vars() {
        let mut pool: Vec<VarId> = sig
            .int_vars()
            .into_iter()
            .filter(|&w| w == v || !sig.is_constant(w))
            .collect();
        pool.sort();
        let mut entries: Vec<RankEntry> = Vec::new();
        for (fid, f) in sig.functions() {
            for inputs in input_tuples(&pool, f.arity) {
                let mut count = 0usize;
                for log in logs {
                    for t in 0..log.len().saturating_sub(1) {
                        let vals: Vec<i64> = inputs.iter().map(|&w| log.value(t, w)).collect();
                        if f.term.eval(&vals) == Ok(log.value(t + 1, v)) {
                            count += 1;
                        }
                    }
                }
                if count > 0 {
                    entries.push(RankEntry {
                        function: fid,
                        inputs,
                        count,
                    });
                }
            }
        }
        sort_entries(&mut entries, sig);
        table.per_var.insert(v, entries);
    }
    table
}

fn sort_entries(entries: &mut [RankEntry], sig: &Signature) {
    entries.sort_by(|a, b| {
        let fa = sig.function(a.function);
        let fb = sig.function(b.function);
        b.count
            .cmp(&a.count)
            .then(fa.arity.cmp(&fb.arity))
            .then(fa.term.size().cmp(&fb.term.size()))
            .then(a.inputs.cmp(&b.inputs))
            .then(fa.term.cmp(&fb.term))
    });
}

/// All true predicate atoms of the valuation at `row`: per unordered pair of
/// integer variables, `eq` on equality or `lt` in the true direction; bounds
/// atoms against constant variables when configured; bare atoms for true
/// Booleans.
pub fn apply_predicates(
    log: &ResolvedLog,
    row: usize,
    sig: &Signature,
    cfg: &LiftingConfig,
) -> Vec<Term> {
    let mut out = Vec::new();
    let int_vars = sig.int_vars();
    for (i, &a) in int_vars.iter().enumerate() {
        for &b in int_vars.iter().skip(i + 1) {
            let va = log.value(row, a);
            let vb = log.value(row, b);
            if va == vb {
                out.push(Term::Pred(PredicateAtom::eq(a, b)));
            } else if va < vb {
                out.push(Term::Pred(PredicateAtom::lt(a, b)));
            } else {
                out.push(Term::Pred(PredicateAtom::lt(b, a)));
            }
        }
    }
    if cfg.bounds_predicates {
        for &x in &int_vars {
            if sig.is_constant(x) {
                continue;
            }
            for &c in &int_vars {
                if !sig.is_constant(c) {
                    continue;
                }
                let vx = log.value(row, x);
                let vc = log.value(row, c);
                if vx >= vc {
                    out.push(Term::Pred(PredicateAtom::cmp(
                        crate::logic::ast::CmpOp::Gte,
                        x,
                        c,
                    )));
                }
                if vx <= vc {
                    out.push(Term::Pred(PredicateAtom::cmp(
                        crate::logic::ast::CmpOp::Lte,
                        x,
                        c,
                    )));
                }
            }
        }
    }
    for v in sig.bool_vars() {
        if log.value(row, v) != 0 {
            out.push(Term::Pred(PredicateAtom::Bare(v)));
        }
    }
    out
}

/// Builds the update set for one transition `row -> row + 1`: per
/// update-bearing variable the highest-ranked valid pair. In lenient mode a
/// variable without a valid ranked pair is skipped instead of failing.
pub fn lift_step(
    log: &ResolvedLog,
    row: usize,
    sig: &Signature,
    rank: &RankTable,
    lenient: bool,
    log_idx: usize,
) -> Result<Vec<Term>, LiftError> {
    let mut out = Vec::new();
    for v in sig.update_targets() {
        let next = log.value(row + 1, v);
        let mut chosen = None;
        for entry in rank.per_var.get(&v).map(|e| e.as_slice()).unwrap_or(&[]) {
            let f = sig.function(entry.function);
            let vals: Vec<i64> = entry.inputs.iter().map(|&w| log.value(row, w)).collect();
            if f.term.eval(&vals) == Ok(next) {
                chosen = Some(Term::Update(
                    sig.update(v, entry.function, entry.inputs.clone())
                        .expect("rank entries respect arity"),
                ));
                break;
            }
        }
        match chosen {
            Some(u) => out.push(u),
            None if lenient => {}
            None => {
                return Err(LiftError::NoValidUpdate {
                    log: log_idx,
                    var: sig.var_name(v).to_string(),
                    t: row,
                })
            }
        }
    }
    Ok(out)
}

/// Lifts every log into a trace of equal length: one update per variable plus
/// all true predicates at non-final positions, predicates and END at the end.
pub fn construct_traces(
    logs: &[ResolvedLog],
    sig: &Signature,
    rank: &RankTable,
    cfg: &LiftingConfig,
) -> Result<Vec<Trace>, LiftError> {
    logs.iter()
        .enumerate()
        .map(|(idx, log)| construct_trace(log, sig, rank, cfg, false, idx))
        .collect()
}

pub fn construct_trace(
    log: &ResolvedLog,
    sig: &Signature,
    rank: &RankTable,
    cfg: &LiftingConfig,
    lenient: bool,
    log_idx: usize,
) -> Result<Trace, LiftError> {
    let n = log.len();
    let mut steps = Vec::with_capacity(n);
    for row in 0..n {
        let mut step = Step::new();
        if row + 1 < n {
            for u in lift_step(log, row, sig, rank, lenient, log_idx)? {
                step.insert(u);
            }
        } else {
            step.insert(PredicateAtom::End);
        }
        for p in apply_predicates(log, row, sig, cfg) {
            step.insert(p);
        }
        steps.push(step);
    }
    Ok(Trace::new(steps))
}

/// Replays a lifted trace's updates from the source log's initial valuation.
/// Update-bearing variables evolve by the trace's update terms; exempt
/// variables (constants, Booleans) are carried over from the source log. The
/// result must reproduce the raw log exactly for lifting to be faithful.
pub fn replay(log: &ResolvedLog, trace: &Trace, sig: &Signature) -> Result<ResolvedLog, LiftError> {
    let mut values = vec![log.values[0].clone()];
    for row in 0..log.len() - 1 {
        let mut next = log.values[row + 1].clone();
        for v in sig.update_targets() {
            let u = trace.step(row).updates().find_map(|t| match t {
                Term::Update(u) if u.target == v => Some(u),
                _ => None,
            });
            match u {
                Some(u) => {
                    let f = sig.function(u.function);
                    let vals: Vec<i64> = u
                        .inputs
                        .iter()
                        .map(|&w| values[row][w.0 as usize])
                        .collect();
                    next[v.0 as usize] = f.term.eval(&vals).unwrap_or(i64::MIN);
                }
                None => next[v.0 as usize] = i64::MIN,
            }
        }
        values.push(next);
    }
    Ok(ResolvedLog { values })
}

/// Encodes integer variables as per-bit Boolean atoms `<var>_b<k>`. Returns
/// the propositional signature and one trace per log; positions carry only
/// bit atoms (plus END at the last).
pub fn bit_blast(logs: &[Log], width: u32) -> Result<(Signature, Vec<Trace>), LiftError> {
    let first = logs.first().ok_or(crate::log::LogError::Empty)?;
    let mut sig = Signature::new();
    let mut columns: Vec<(String, Option<u32>)> = Vec::new(); // (key, bit) — None = Boolean passthrough
    for (key, value) in first.steps.first().ok_or(crate::log::LogError::Empty)? {
        match value {
            LogValue::Int(_) => {
                for k in 0..width {
                    sig.add_var(&format!("{key}_b{k}"), Sort::Bool)
                        .expect("bit names are unique");
                    columns.push((key.clone(), Some(k)));
                }
            }
            LogValue::Bool(_) => {
                sig.add_var(key, Sort::Bool).expect("log keys are unique");
                columns.push((key.clone(), None));
            }
        }
    }
    let mut traces = Vec::with_capacity(logs.len());
    for log in logs {
        let mut steps = Vec::with_capacity(log.len());
        for (row_idx, row) in log.steps.iter().enumerate() {
            let mut step = Step::new();
            for (var_idx, (key, bit)) in columns.iter().enumerate() {
                let value = row
                    .iter()
                    .find(|(k, _)| k == key)
                    .map(|&(_, v)| v)
                    .ok_or_else(|| crate::log::LogError::MissingVariable(key.clone()))?;
                let on = match (value, bit) {
                    (LogValue::Int(i), Some(k)) => {
                        if i < 0 || (width < 63 && i >= (1i64 << width)) {
                            return Err(LiftError::BitWidth {
                                var: key.clone(),
                                value: i,
                                width,
                            });
                        }
                        (i >> k) & 1 == 1
                    }
                    (LogValue::Bool(b), None) => b,
                    _ => false,
                };
                if on {
                    step.insert(PredicateAtom::Bare(VarId(var_idx as u32)));
                }
            }
            if row_idx == log.len() - 1 {
                step.insert(PredicateAtom::End);
            }
            steps.push(step);
        }
        traces.push(Trace::new(steps));
    }
    Ok((sig, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::signature_from_corpus;
    use crate::logic::ast::CmpOp;
    use crate::logic::parse::format_term;
    use crate::logic::trace::check_well_formed;
    use crate::term::FunctionTerm;

    fn fixture(corpus: &[&str], functions: &[(&str, FunctionTerm)]) -> (Vec<ResolvedLog>, Signature) {
        let logs: Vec<Log> = corpus.iter().map(|t| Log::from_jsonl(t).unwrap()).collect();
        let mut sig = signature_from_corpus(&logs).unwrap();
        for (name, term) in functions {
            sig.add_function(Some(name), term.clone(), 1);
        }
        let resolved = logs
            .iter()
            .map(|l| ResolvedLog::resolve(l, &sig).unwrap())
            .collect();
        (resolved, sig)
    }

    fn id() -> FunctionTerm {
        FunctionTerm::Slot(0)
    }

    fn add1() -> FunctionTerm {
        FunctionTerm::add(FunctionTerm::Slot(0), FunctionTerm::Const(1))
    }

    const FIG_LOG: &str = r#"{"x": 0, "y": 0, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1, "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2}
{"x": 1, "y": 0, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1, "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2}
{"x": 2, "y": 0, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1, "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2}
{"x": 2, "y": 1, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1, "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2}
{"x": 2, "y": 2, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1, "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2}
{"x": 2, "y": 3, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1, "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2}
{"x": 3, "y": 3, "goalx": 3, "goaly": 3, "h0x": 1, "h0y": 1, "h1x": 3, "h1y": 1, "h2x": 3, "h2y": 2}
"#;

    #[test]
    fn identity_outranks_increment_for_mostly_constant_variable() {
        let (logs, sig) = fixture(&[FIG_LOG], &[("id", id()), ("add1", add1())]);
        let rank = compute_rankings(&logs, &sig);
        let y = sig.var("y").unwrap();
        let first = &rank.per_var[&y][0];
        assert_eq!(sig.function(first.function).term, id());
        assert_eq!(first.inputs, vec![y]);
    }

    #[test]
    fn never_changing_variable_ranks_self_identity_first() {
        let (logs, sig) = fixture(
            &["{\"v\": 6, \"w\": 1}\n{\"v\": 6, \"w\": 2}\n{\"v\": 6, \"w\": 3}"],
            &[("id", id()), ("add1", add1())],
        );
        let rank = compute_rankings(&logs, &sig);
        let v = sig.var("v").unwrap();
        let first = &rank.per_var[&v][0];
        assert_eq!(sig.function(first.function).term, id());
        assert_eq!(first.inputs, vec![v]);
        assert_eq!(first.count, 2);
    }

    #[test]
    fn counts_order_candidate_pairs() {
        // w follows v+1 at 3 steps; w follows w (identity) at 1 step.
        let (logs, sig) = fixture(
            &["{\"v\": 0, \"w\": 1}\n{\"v\": 1, \"w\": 1}\n{\"v\": 2, \"w\": 2}\n{\"v\": 3, \"w\": 3}\n{\"v\": 4, \"w\": 4}"],
            &[("id", id()), ("add1", add1())],
        );
        let rank = compute_rankings(&logs, &sig);
        let v = sig.var("v").unwrap();
        let w = sig.var("w").unwrap();
        // brute-force the expected counts
        let mut expected: Vec<(String, usize)> = Vec::new();
        for (_, f) in sig.functions() {
            for inputs in [vec![v], vec![w]] {
                let mut c = 0;
                for t in 0..logs[0].len() - 1 {
                    let val = logs[0].value(t, inputs[0]);
                    if f.term.eval(&[val]) == Ok(logs[0].value(t + 1, w)) {
                        c += 1;
                    }
                }
                if c > 0 {
                    expected.push((format!("{} {:?}", f.name, inputs), c));
                }
            }
        }
        expected.sort_by(|a, b| b.1.cmp(&a.1));
        let got: Vec<usize> = rank.per_var[&w].iter().map(|e| e.count).collect();
        let mut sorted = got.clone();
        sorted.sort_by(|a, b| b.cmp(a));
        assert_eq!(got, sorted);
        assert_eq!(got.len(), expected.len());
        assert_eq!(got[0], expected[0].1);
    }

    #[test]
    fn fig_trace_picks_identity_over_cross_increment_at_step_four() {
        let (logs, sig) = fixture(&[FIG_LOG], &[("id", id()), ("add1", add1())]);
        let rank = compute_rankings(&logs, &sig);
        let traces = construct_traces(&logs, &sig, &rank, &LiftingConfig::default()).unwrap();
        assert_eq!(traces.len(), 1);
        let trace = &traces[0];
        assert_eq!(trace.len(), 7);
        // At position 4 (y: 2 -> 3 ... wait, y moves), x stays: [x <- id x].
        // The published ambiguity: y at the step where x+1 would also match.
        let y = sig.var("y").unwrap();
        let x = sig.var("x").unwrap();
        // position 1: y stays 0 while x moves 1 -> 2; both [y <- y] and
        // [y <- add1 ...] could raise ambiguity; identity must win by count.
        let upd: Vec<String> = trace
            .step(1)
            .updates()
            .map(|t| format_term(t, &sig))
            .collect();
        assert!(upd.contains(&"[y <- id y]".to_string()), "{upd:?}");
        assert!(upd.contains(&"[x <- add1 x]".to_string()), "{upd:?}");
        let _ = (x, y);
        // every non-final position has exactly one update per variable
        assert!(check_well_formed(trace, &sig).is_empty());
    }

    #[test]
    fn constant_two_step_log_lifts_to_identity_plus_end() {
        // x never changes but is not designated constant, so it carries an
        // explicit self-identity update; k is a designated constant.
        let mut sig = Signature::new();
        let x = sig.add_var("x", Sort::Int).unwrap();
        let k = sig.add_var("k", Sort::Int).unwrap();
        sig.mark_constant(k);
        sig.add_function(Some("id"), id(), 1);
        let log = Log::from_jsonl("{\"x\": 2, \"k\": 2}\n{\"x\": 2, \"k\": 2}").unwrap();
        let logs = vec![ResolvedLog::resolve(&log, &sig).unwrap()];
        let rank = compute_rankings(&logs, &sig);
        let traces = construct_traces(&logs, &sig, &rank, &LiftingConfig::default()).unwrap();
        let t = &traces[0];
        let s0: Vec<String> = t.step(0).terms().map(|t| format_term(t, &sig)).collect();
        assert!(s0.contains(&"[x <- id x]".to_string()), "{s0:?}");
        assert!(s0.contains(&"(eq x k)".to_string()));
        let s1: Vec<String> = t.step(1).terms().map(|t| format_term(t, &sig)).collect();
        assert!(s1.contains(&"END".to_string()));
        assert!(t.step(1).updates().next().is_none());
        let _ = x;
    }

    #[test]
    fn missing_function_reports_lift_error() {
        let (logs, sig) = fixture(&["{\"x\": 0}\n{\"x\": 5}"], &[("id", id())]);
        let rank = compute_rankings(&logs, &sig);
        let err = construct_traces(&logs, &sig, &rank, &LiftingConfig::default()).unwrap_err();
        assert!(matches!(
            err,
            LiftError::NoValidUpdate { log: 0, ref var, t: 0 } if var == "x"
        ));
    }

    #[test]
    fn predicates_cover_equality_ordering_and_bounds() {
        let (logs, sig) = fixture(
            &["{\"x\": 3, \"goalx\": 3, \"c\": 11, \"sThresh\": 17, \"stood\": true}\n{\"x\": 2, \"goalx\": 3, \"c\": 15, \"sThresh\": 17, \"stood\": true}"],
            &[("id", id())],
        );
        let cfg = LiftingConfig {
            bounds_predicates: true,
            ..Default::default()
        };
        let atoms = apply_predicates(&logs[0], 0, &sig, &cfg);
        let x = sig.var("x").unwrap();
        let goalx = sig.var("goalx").unwrap();
        let c = sig.var("c").unwrap();
        let st = sig.var("sThresh").unwrap();
        let stood = sig.var("stood").unwrap();
        assert!(atoms.contains(&Term::Pred(PredicateAtom::eq(x, goalx))));
        assert!(atoms.contains(&Term::Pred(PredicateAtom::lt(c, st))));
        assert!(atoms.contains(&Term::Pred(PredicateAtom::cmp(CmpOp::Lte, c, st))));
        assert!(atoms.contains(&Term::Pred(PredicateAtom::Bare(stood))));
        // soundness: every emitted atom is true under the valuation
        for a in &atoms {
            if let Term::Pred(PredicateAtom::Cmp { op, lhs, rhs }) = a {
                assert!(op.holds(logs[0].value(0, *lhs), logs[0].value(0, *rhs)));
            }
        }
    }

    #[test]
    fn gte_lte_against_designated_constants() {
        let (logs, sig) = fixture(
            &["{\"dealer\": 5, \"lo\": 2, \"med\": 6}\n{\"dealer\": 7, \"lo\": 2, \"med\": 6}"],
            &[("id", id())],
        );
        let cfg = LiftingConfig {
            bounds_predicates: true,
            ..Default::default()
        };
        let atoms = apply_predicates(&logs[0], 0, &sig, &cfg);
        let dealer = sig.var("dealer").unwrap();
        let lo = sig.var("lo").unwrap();
        let med = sig.var("med").unwrap();
        assert!(atoms.contains(&Term::Pred(PredicateAtom::cmp(CmpOp::Gte, dealer, lo))));
        assert!(atoms.contains(&Term::Pred(PredicateAtom::cmp(CmpOp::Lte, dealer, med))));
    }

    #[test]
    fn replay_reproduces_the_log() {
        let (logs, sig) = fixture(&[FIG_LOG], &[("id", id()), ("add1", add1())]);
        let rank = compute_rankings(&logs, &sig);
        let traces = construct_traces(&logs, &sig, &rank, &LiftingConfig::default()).unwrap();
        let replayed = replay(&logs[0], &traces[0], &sig).unwrap();
        assert_eq!(replayed.values, logs[0].values);
    }

    #[test]
    fn bit_blast_encodes_values_and_end() {
        let log = Log::from_jsonl("{\"x\": 3, \"goalX\": 3}\n{\"x\": 0, \"goalX\": 3}").unwrap();
        let (sig, traces) = bit_blast(&[log], 4).unwrap();
        let t = &traces[0];
        let x0 = sig.var("x_b0").unwrap();
        let x1 = sig.var("x_b1").unwrap();
        let x2 = sig.var("x_b2").unwrap();
        assert!(t.step(0).contains(&Term::Pred(PredicateAtom::Bare(x0))));
        assert!(t.step(0).contains(&Term::Pred(PredicateAtom::Bare(x1))));
        assert!(!t.step(0).contains(&Term::Pred(PredicateAtom::Bare(x2))));
        // x = 0: no x bits set
        assert!(!t.step(1).contains(&Term::Pred(PredicateAtom::Bare(x0))));
        // goalX bits present at every step
        let g0 = sig.var("goalX_b0").unwrap();
        assert!(t.step(0).contains(&Term::Pred(PredicateAtom::Bare(g0))));
        assert!(t.step(1).contains(&Term::Pred(PredicateAtom::Bare(g0))));
        assert!(t.step(1).contains(&Term::Pred(PredicateAtom::End)));
        // no updates anywhere; well-formed with the all-Boolean signature
        assert!(check_well_formed(t, &sig).is_empty());
    }

    #[test]
    fn bit_blast_rejects_out_of_range() {
        let log = Log::from_jsonl("{\"x\": 19}").unwrap();
        assert!(matches!(
            bit_blast(&[log], 4),
            Err(LiftError::BitWidth { .. })
        ));
    }
}
