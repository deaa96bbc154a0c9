//! Direct evaluation of sentences on finite structures, model verification
//! and a brute-force satisfiability oracle for tiny problems.

mod brute;
mod compiled;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use brute::{brute_force_sat, BruteError, BruteOptions, BruteOutcome};
pub use compiled::Model;
pub(crate) use compiled::all_indices;

use crate::ast::{Formula, Problem, QuantKind, Term, Vocabulary};
use crate::lifter::LiftedSentence;
use crate::structures::{ConcreteStructure, LiftedStructure, Value};
use compiled::{Compiler, Val, CF};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("exact division {0} / {1} is not integral")]
    InexactDivision(i64, i64),
    #[error("integer overflow")]
    Overflow,
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("variable `{0}` ranges over an infinite type")]
    InfiniteRange(String),
    #[error("bad structure: {0}")]
    Structure(String),
}

/// Values for the free variables of an expression.
pub type Assignment = BTreeMap<String, Value>;

fn compile_free<'a>(
    model: &'a Model,
    vocab: &'a Vocabulary,
    assignment: &Assignment,
) -> Result<(Compiler<'a>, Vec<Val>), EvalError> {
    let mut c = Compiler::new(model, vocab);
    let mut env = Vec::new();
    for (name, v) in assignment {
        let slot = c.bind(name);
        let val = model
            .value_to_val(v)
            .ok_or_else(|| EvalError::Structure(format!("unknown element `{v}`")))?;
        compiled::ensure_slot(&mut env, slot);
        env[slot] = val;
    }
    Ok((c, env))
}

pub fn evaluate_formula(
    f: &Formula,
    model: &Model,
    vocab: &Vocabulary,
    assignment: &Assignment,
) -> Result<bool, EvalError> {
    let (mut c, mut env) = compile_free(model, vocab, assignment)?;
    let cf = c.formula(f)?;
    model.formula(&cf, &mut env)
}

pub fn evaluate_term(
    t: &Term,
    model: &Model,
    vocab: &Vocabulary,
    assignment: &Assignment,
) -> Result<Value, EvalError> {
    let (mut c, mut env) = compile_free(model, vocab, assignment)?;
    let ct = c.term(t)?;
    Ok(model.val_to_value(model.term(&ct, &mut env)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Valid,
    /// `sentence` indexes the problem's sentences; `witness` is the
    /// lexicographically first failing assignment of the leading universal
    /// quantifiers (empty when the sentence has none).
    Invalid {
        sentence: usize,
        witness: Vec<(String, String)>,
    },
    CardinalityMismatch {
        ty: String,
        expected: u64,
        found: u64,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// First failing assignment of the leading `∀` block(s) of a false sentence.
fn failing_witness(
    model: &Model,
    f: &CF,
    env: &mut Vec<Val>,
    names: &[String],
    out: &mut Vec<(String, String)>,
) -> Result<(), EvalError> {
    let CF::Quant(QuantKind::Forall, bs, body) = f else {
        return Ok(());
    };
    let mut found = None;
    model.for_each(bs, env, &mut |env| {
        if model.formula(body, env)? {
            Ok(true)
        } else {
            found = Some(bs.iter().map(|&(s, _)| (s, env[s])).collect::<Vec<_>>());
            Ok(false)
        }
    })?;
    if let Some(vals) = found {
        for (s, v) in vals {
            env[s] = v;
            out.push((names[s].clone(), model.val_to_value(v).to_string()));
        }
        failing_witness(model, body, env, names, out)?;
    }
    Ok(())
}

/// Checks a concrete structure against the original problem: fixed
/// cardinalities first, then every sentence in order.
pub fn verify_model(problem: &Problem, s: &ConcreteStructure) -> Result<Verdict, EvalError> {
    let vocab = &problem.vocabulary;
    for t in &vocab.types {
        if let Some(n) = problem.fixed_size(t) {
            let found = s.domains.get(t).map_or(0, |d| d.len() as u64);
            if found != n {
                return Ok(Verdict::CardinalityMismatch {
                    ty: t.clone(),
                    expected: n,
                    found,
                });
            }
        }
    }
    let model = Model::from_concrete(vocab, s)?;
    for (k, f) in problem.sentences.iter().enumerate() {
        let mut c = Compiler::new(&model, vocab);
        let cf = c.formula(f)?;
        let mut env = Vec::new();
        if !model.formula(&cf, &mut env)? {
            let mut witness = Vec::new();
            failing_witness(&model, &cf, &mut env, &c.slot_names, &mut witness)?;
            return Ok(Verdict::Invalid { sentence: k, witness });
        }
    }
    Ok(Verdict::Valid)
}

/// Evaluates every labeled sentence of a translation on a lifted structure
/// (`mul`, `lcm`, `exactdiv` interpreted). Returns the first false label.
pub fn check_lifted(ls: &LiftedSentence, l: &LiftedStructure) -> Result<Option<String>, EvalError> {
    let vocab = &ls.problem.vocabulary;
    let model = Model::from_lifted(vocab, l)?;
    for s in &ls.sentences {
        let mut c = Compiler::new(&model, vocab);
        let cf = c.formula(&s.formula)?;
        if !model.formula(&cf, &mut Vec::new())? {
            return Ok(Some(s.label.clone()));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UsedCounts {
    pub per_type: BTreeMap<String, u64>,
    pub total: u64,
}

/// Lifted elements with positive multiplicity.
pub fn used_counts(l: &LiftedStructure) -> UsedCounts {
    let per_type: BTreeMap<String, u64> = l
        .domains
        .iter()
        .map(|(t, es)| (t.clone(), es.iter().filter(|e| l.mul_of(e) > 0).count() as u64))
        .collect();
    let total = per_type.values().sum();
    UsedCounts { per_type, total }
}
