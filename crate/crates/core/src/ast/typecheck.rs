use std::fmt;

use thiserror::Error;

use super::{Formula, Pos, Problem, Sort, Term, Var, Vocabulary};

/// One type error: the sentence it occurs in and a structural description of
/// the offending subterm.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: sentence {sentence}: {msg}")]
pub struct TypeError {
    pub pos: Pos,
    pub sentence: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeErrors(pub Vec<TypeError>);

impl fmt::Display for TypeErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for TypeErrors {}

/// Checks sorts throughout the problem. Returns the problem unchanged when it
/// is well-typed (sorts are recoverable from variables and signatures).
pub fn typecheck(problem: &Problem) -> Result<Problem, TypeErrors> {
    let mut errors = Vec::new();
    for (i, s) in problem.sentences.iter().enumerate() {
        let mut cx = Checker {
            vocab: &problem.vocabulary,
            msgs: Vec::new(),
        };
        cx.formula(s, "sentence");
        if !s.is_sentence() {
            let names: Vec<_> = s.free_vars().into_iter().map(|v| v.name).collect();
            cx.msgs.push(format!("free variable(s) {}", names.join(", ")));
        }
        errors.extend(cx.msgs.into_iter().map(|msg| TypeError {
            pos: problem.sentence_pos(i),
            sentence: i,
            msg,
        }));
    }
    if errors.is_empty() {
        Ok(problem.clone())
    } else {
        Err(TypeErrors(errors))
    }
}

struct Checker<'a> {
    vocab: &'a Vocabulary,
    msgs: Vec<String>,
}

impl Checker<'_> {
    fn binders(&mut self, vars: &[Var], what: &str) {
        for v in vars {
            match &v.sort {
                Sort::Int => self.msgs.push(format!(
                    "{what} binds `{}`: quantification over infinite type Int",
                    v.name
                )),
                Sort::Named(t) if !self.vocab.has_type(t) => {
                    self.msgs.push(format!("{what} binds `{}` over unknown type `{t}`", v.name))
                }
                Sort::Named(_) => {}
            }
        }
    }

    fn expect_int(&mut self, t: &Term, at: &str) {
        if let Some(s) = self.term(t, at) {
            if !s.is_int() {
                self.msgs.push(format!("{at}: expected Int, found {s}"));
            }
        }
    }

    fn args(&mut self, name: &str, args: &[Term], decl: &[String]) {
        for (k, (a, want)) in args.iter().zip(decl).enumerate() {
            let at = format!("argument {} of `{name}`", k + 1);
            if let Some(s) = self.term(a, &at) {
                if s.type_name() != Some(want.as_str()) {
                    self.msgs.push(format!("{at}: expected {want}, found {s}"));
                }
            }
        }
    }

    fn term(&mut self, t: &Term, at: &str) -> Option<Sort> {
        match t {
            Term::Var(v) => Some(v.sort.clone()),
            Term::Int(_) => Some(Sort::Int),
            Term::App(name, args) => {
                let Some(decl) = self.vocab.function(name) else {
                    self.msgs.push(format!("{at}: unknown function `{name}`"));
                    return None;
                };
                let decl = decl.clone();
                if decl.args.len() != args.len() {
                    self.msgs.push(format!(
                        "{at}: `{name}` expects {} argument(s), found {}",
                        decl.args.len(),
                        args.len()
                    ));
                }
                self.args(name, args, &decl.args);
                Some(decl.result)
            }
            Term::Arith(op, l, r) => {
                self.expect_int(l, &format!("left operand of `{op}`"));
                self.expect_int(r, &format!("right operand of `{op}`"));
                Some(Sort::Int)
            }
            Term::Sum(agg) => {
                self.binders(&agg.vars, "sum aggregate");
                self.formula(&agg.filter, "sum filter");
                if let Some(s) = self.term(&agg.body, "sum body") {
                    if !s.is_int() {
                        self.msgs
                            .push(format!("sum body: aggregate term must be Int, found {s}"));
                    }
                }
                Some(Sort::Int)
            }
            Term::Count(vars, filter) => {
                self.binders(vars, "cardinality aggregate");
                self.formula(filter, "cardinality filter");
                Some(Sort::Int)
            }
            Term::Mul(inner) => {
                if let Some(s) = self.term(inner, "argument of `mul`") {
                    if s.is_int() {
                        self.msgs
                            .push("argument of `mul`: expected a domain term, found Int".into());
                    }
                }
                Some(Sort::Int)
            }
            Term::Lcm(a, b) | Term::ExactDiv(a, b) => {
                self.expect_int(a, "meta-term operand");
                self.expect_int(b, "meta-term operand");
                Some(Sort::Int)
            }
        }
    }

    fn formula(&mut self, f: &Formula, at: &str) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Pred(name, args) => match self.vocab.predicate(name) {
                Some(decl) => {
                    let decl = decl.args.clone();
                    if decl.len() != args.len() {
                        self.msgs.push(format!(
                            "{at}: `{name}` expects {} argument(s), found {}",
                            decl.len(),
                            args.len()
                        ));
                    }
                    self.args(name, args, &decl);
                }
                None => self.msgs.push(format!("{at}: unknown predicate `{name}`")),
            },
            Formula::Cmp(op, l, r) => {
                let ls = self.term(l, &format!("left side of `{op}`"));
                let rs = self.term(r, &format!("right side of `{op}`"));
                if let (Some(ls), Some(rs)) = (ls, rs) {
                    if ls != rs {
                        self.msgs
                            .push(format!("comparison `{op}` between {ls} and {rs}"));
                    } else if op.is_ordering() && !ls.is_int() {
                        self.msgs
                            .push(format!("ordering `{op}` on non-integer type {ls}"));
                    }
                }
            }
            Formula::Conn(_, l, r) => {
                self.formula(l, at);
                self.formula(r, at);
            }
            Formula::Not(g) => self.formula(g, at),
            Formula::Quant(_, vars, body) => {
                self.binders(vars, "quantifier");
                self.formula(body, at);
            }
            Formula::TypeExtent(t, _) => {
                if !self.vocab.has_type(t) {
                    self.msgs.push(format!("extent of unknown type `{t}`"));
                }
            }
            Formula::Divides(d, n) => {
                self.expect_int(d, "divisor");
                self.expect_int(n, "dividend");
            }
        }
    }
}
