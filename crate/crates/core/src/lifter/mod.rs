//! Translation of a problem into a lifted sentence over a compressed domain.
//!
//! Each source sentence φ becomes χ(φ); every predicate (or domain equality)
//! atom translated by the plain atom rule contributes a regularity condition,
//! every function contributes tuple-regularity and image-divisibility
//! sentences, and every fixed type contributes a multiplicity sum.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::ast::{
    eligible_atom_split, normalize_problem, split_leading_conjunct, typecheck, Aggregate, ArithOp,
    CmpOp, Connective, Formula, Pos, Problem, QuantKind, Sort, SpecialAtom, Term, TypeErrors, Var,
    Vocabulary,
};

/// Which rules the translation may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TranslationMode {
    /// Full lifted translation.
    Lifted,
    /// Multiplicities restricted to {0, 1} act as "used" flags: general
    /// rules only, no regularity conditions. Used by the concrete baselines.
    Concrete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SentenceKind {
    Theory,
    Extent(String),
    AtomRegularity,
    FunctionTuples(String),
    FunctionImage(String),
}

/// One emitted conjunct of the lifted sentence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledSentence {
    pub label: String,
    pub kind: SentenceKind,
    /// Descriptive names of the rules used, in first-use order.
    pub rules: Vec<&'static str>,
    /// Index of the source sentence this conjunct came from, if any.
    pub source: Option<usize>,
    pub pos: Option<Pos>,
    pub formula: Formula,
}

impl LabeledSentence {
    /// Types whose domains appear in this conjunct: quantified/aggregated
    /// variable types, or the extent type.
    pub fn types(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let SentenceKind::Extent(t) = &self.kind {
            out.insert(t.clone());
        }
        collect_bound_types(&self.formula, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedSentence {
    pub mode: TranslationMode,
    pub problem: Problem,
    pub sentences: Vec<LabeledSentence>,
    /// Regularity conditions over at most one variable: valid, so not emitted.
    pub elided_conditions: usize,
}

impl LiftedSentence {
    pub fn by_label(&self, label: &str) -> Option<&LabeledSentence> {
        self.sentences.iter().find(|s| s.label == label)
    }

    pub fn count_kind(&self, pred: impl Fn(&SentenceKind) -> bool) -> usize {
        self.sentences.iter().filter(|s| pred(&s.kind)).count()
    }
}

impl fmt::Display for LiftedSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "// lifted vocabulary: source symbols plus builtin mul/lcm")?;
        self.problem
            .vocabulary
            .write_declarations(f, |t| self.problem.cardinality(t))?;
        writeln!(f, "theory {{")?;
        for s in &self.sentences {
            write!(f, "  // rule: {}; label: {}", s.rules.join(", "), s.label)?;
            if let Some(i) = s.source {
                write!(f, "; source: sentence {}", i + 1)?;
            }
            if let Some(p) = s.pos {
                write!(f, " at {p}")?;
            }
            writeln!(f)?;
            writeln!(f, "  {}.", s.formula)?;
        }
        if self.elided_conditions > 0 {
            writeln!(
                f,
                "  // {} regularity condition(s) over at most one variable omitted (valid)",
                self.elided_conditions
            )?;
        }
        writeln!(f, "}}")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TranslateError {
    #[error("{0}")]
    Type(#[from] TypeErrors),
}

fn collect_bound_types(f: &Formula, out: &mut BTreeSet<String>) {
    fn term(t: &Term, out: &mut BTreeSet<String>) {
        match t {
            Term::Var(_) | Term::Int(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| term(a, out)),
            Term::Arith(_, l, r) | Term::Lcm(l, r) | Term::ExactDiv(l, r) => {
                term(l, out);
                term(r, out);
            }
            Term::Mul(x) => term(x, out),
            Term::Sum(agg) => {
                binders(&agg.vars, out);
                collect_bound_types(&agg.filter, out);
                term(&agg.body, out);
            }
            Term::Count(vs, filter) => {
                binders(vs, out);
                collect_bound_types(filter, out);
            }
        }
    }
    fn binders(vs: &[Var], out: &mut BTreeSet<String>) {
        out.extend(vs.iter().filter_map(|v| v.sort.type_name().map(str::to_string)));
    }
    match f {
        Formula::True | Formula::False => {}
        Formula::TypeExtent(t, _) => {
            out.insert(t.clone());
        }
        Formula::Pred(_, args) => args.iter().for_each(|a| term(a, out)),
        Formula::Cmp(_, l, r) | Formula::Divides(l, r) => {
            term(l, out);
            term(r, out);
        }
        Formula::Conn(_, l, r) => {
            collect_bound_types(l, out);
            collect_bound_types(r, out);
        }
        Formula::Not(g) => collect_bound_types(g, out),
        Formula::Quant(_, vs, body) => {
            binders(vs, out);
            collect_bound_types(body, out);
        }
    }
}

fn mul_term(t: &Term) -> Term {
    Term::mul_of(t.clone())
}

fn times(a: Term, b: Term) -> Term {
    match (&a, &b) {
        (Term::Int(1), _) => b,
        (_, Term::Int(1)) => a,
        _ => Term::arith(ArithOp::Mul, a, b),
    }
}

/// `Mul(t̄)`: product of `mul(tᵢ)` over domain-typed terms; integer-typed
/// terms contribute 1, the empty product is 1.
pub fn mul_meta(terms: &[Term], vocab: &Vocabulary) -> Term {
    terms
        .iter()
        .filter(|t| !matches!(t.sort(vocab), Some(Sort::Int)))
        .map(mul_term)
        .fold(Term::Int(1), times)
}

/// `Lcm(t̄)`: nested binary lcm of `mul(tᵢ)`; one term gives `mul(t)`.
pub fn lcm_meta(terms: &[Term], vocab: &Vocabulary) -> Term {
    let muls: Vec<Term> = terms
        .iter()
        .filter(|t| !matches!(t.sort(vocab), Some(Sort::Int)))
        .map(mul_term)
        .collect();
    let mut it = muls.into_iter();
    match it.next() {
        None => Term::Int(1),
        Some(first) => it.fold(first, |acc, m| Term::Lcm(Box::new(acc), Box::new(m))),
    }
}

fn var_terms(vars: &[Var]) -> Vec<Term> {
    vars.iter().map(Term::var).collect()
}

fn positive(t: Term) -> Formula {
    Formula::Cmp(CmpOp::Lt, Term::Int(0), t)
}

/// Regularity condition of a translated atom, as a closed formula:
/// `∀x̄: atom ⇒ Mul(x̄) = Lcm(x̄) ∨ Mul(t̄) = Lcm(t̄)` with `x̄` the atom's
/// variables. When `t̄` is exactly `x̄` the two disjuncts coincide and one is
/// kept; a closed atom gives `true`.
pub fn rc_for_atom(atom: &Formula, vocab: &Vocabulary) -> Formula {
    let args: Vec<Term> = match atom {
        Formula::Pred(_, args) => args.clone(),
        Formula::Cmp(_, l, r) => vec![l.clone(), r.clone()],
        _ => return Formula::True,
    };
    let xs = atom.free_vars();
    if xs.is_empty() {
        return Formula::True;
    }
    let xt = var_terms(&xs);
    let on_vars = Formula::eq(mul_meta(&xt, vocab), lcm_meta(&xt, vocab));
    let on_args = Formula::eq(mul_meta(&args, vocab), lcm_meta(&args, vocab));
    let cond = if args == xt {
        on_vars
    } else {
        Formula::or(on_vars, on_args)
    };
    Formula::forall(xs, Formula::implies(atom.clone(), cond))
}

/// Translates a problem. The problem is type-checked, desugared and
/// normalized first.
pub fn translate(problem: &Problem, mode: TranslationMode) -> Result<LiftedSentence, TranslateError> {
    let checked = typecheck(problem)?;
    let normal = normalize_problem(&checked);
    let vocab = &normal.vocabulary;
    let mut out = Vec::new();
    let mut conditions: Vec<(usize, Formula)> = Vec::new();
    let mut elided = 0;

    for (i, s) in normal.sentences.iter().enumerate() {
        let mut tr = Translator {
            vocab,
            mode,
            rules: Vec::new(),
            conditions: Vec::new(),
        };
        let formula = tr.formula(s);
        for rc in tr.conditions {
            conditions.push((i, rc));
        }
        out.push(LabeledSentence {
            label: format!("s{i}"),
            kind: SentenceKind::Theory,
            rules: tr.rules,
            source: Some(i),
            pos: Some(normal.sentence_pos(i)),
            formula,
        });
    }

    for t in &vocab.types {
        if let Some(n) = normal.fixed_size(t) {
            let x = Var::new(&format!("x_{}", t.to_lowercase()), Sort::named(t));
            let sum = Term::Sum(Aggregate {
                vars: vec![x.clone()],
                filter: Box::new(Formula::True),
                body: Box::new(mul_term(&Term::var(&x))),
            });
            out.push(LabeledSentence {
                label: format!("ext_{t}"),
                kind: SentenceKind::Extent(t.clone()),
                rules: vec!["type-extent"],
                source: None,
                pos: None,
                formula: Formula::eq(sum, Term::Int(n as i64)),
            });
        }
    }

    let mut k = 0;
    for (i, atom) in conditions {
        if atom.free_vars().len() <= 1 {
            elided += 1;
            continue;
        }
        out.push(LabeledSentence {
            label: format!("rc{k}"),
            kind: SentenceKind::AtomRegularity,
            rules: vec!["atom-regularity"],
            source: Some(i),
            pos: Some(normal.sentence_pos(i)),
            formula: rc_for_atom(&atom, vocab),
        });
        k += 1;
    }

    for f in &vocab.functions {
        let xs: Vec<Var> = f
            .args
            .iter()
            .enumerate()
            .map(|(j, t)| Var::new(&format!("a{}_{}", j + 1, f.name), Sort::named(t)))
            .collect();
        let xt = var_terms(&xs);
        let quantify = |body: Formula| {
            if xs.is_empty() {
                body
            } else {
                Formula::forall(xs.clone(), body)
            }
        };
        if mode == TranslationMode::Lifted {
            out.push(LabeledSentence {
                label: format!("f1_{}", f.name),
                kind: SentenceKind::FunctionTuples(f.name.clone()),
                rules: vec!["function-tuple-regularity"],
                source: None,
                pos: None,
                formula: quantify(Formula::eq(mul_meta(&xt, vocab), lcm_meta(&xt, vocab))),
            });
        }
        if let Sort::Named(_) = f.result {
            let image = Term::App(f.name.clone(), xt.clone());
            out.push(LabeledSentence {
                label: format!("f2_{}", f.name),
                kind: SentenceKind::FunctionImage(f.name.clone()),
                rules: vec!["function-image-divides"],
                source: None,
                pos: None,
                formula: quantify(Formula::Divides(mul_term(&image), mul_meta(&xt, vocab))),
            });
        }
    }

    Ok(LiftedSentence {
        mode,
        problem: normal,
        sentences: out,
        elided_conditions: elided,
    })
}

struct Translator<'a> {
    vocab: &'a Vocabulary,
    mode: TranslationMode,
    rules: Vec<&'static str>,
    /// Translated atoms needing a regularity condition.
    conditions: Vec<Formula>,
}

impl Translator<'_> {
    fn rule(&mut self, name: &'static str) {
        if !self.rules.contains(&name) {
            self.rules.push(name);
        }
    }

    fn lifted(&self) -> bool {
        self.mode == TranslationMode::Lifted
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(_) | Term::Int(_) => t.clone(),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| self.term(a)).collect()),
            Term::Arith(op, l, r) => Term::arith(*op, self.term(l), self.term(r)),
            Term::Count(vs, filter) => self.sum(&Aggregate {
                vars: vs.clone(),
                filter: filter.clone(),
                body: Box::new(Term::Int(1)),
            }),
            Term::Sum(agg) => self.sum(agg),
            Term::Mul(x) => Term::mul_of(self.term(x)),
            Term::Lcm(a, b) => Term::Lcm(Box::new(self.term(a)), Box::new(self.term(b))),
            Term::ExactDiv(a, b) => Term::ExactDiv(Box::new(self.term(a)), Box::new(self.term(b))),
        }
    }

    fn guard(&self, vars: &[Var]) -> Formula {
        positive(mul_meta(&var_terms(vars), self.vocab))
    }

    fn special(&self, f: &Formula, vars: &[Var]) -> Option<(Formula, Option<Formula>, SpecialAtom)> {
        if !self.lifted() {
            return None;
        }
        let (lead, rest) = split_leading_conjunct(f);
        let sp = eligible_atom_split(&lead, vars, self.vocab)?;
        Some((lead, rest, sp))
    }

    fn sum(&mut self, agg: &Aggregate) -> Term {
        let guard = self.guard(&agg.vars);
        let body = self.term(&agg.body);
        if let Some((lead, rest, sp)) = self.special(&agg.filter, &agg.vars) {
            let atom = self.atom_no_rc(&lead);
            let mut parts = vec![guard, atom];
            if let Some(r) = rest {
                parts.push(self.formula(&r));
            }
            let inner: Vec<Term> = sp.inner.iter().map(|t| self.term(t)).collect();
            let outer = self.term(&sp.outer);
            let factor = if sp.is_equality {
                self.rule("sum-specialized-equality");
                self.decompression(&agg.vars, &[], &[mul_term(&outer)])
            } else {
                self.rule("sum-specialized");
                let mut all = inner.clone();
                all.push(outer.clone());
                let lcm_all = lcm_meta(&all, self.vocab);
                let lcm_inner = lcm_meta(&inner, self.vocab);
                self.decompression(&agg.vars, &[lcm_all], &[lcm_inner, mul_term(&outer)])
            };
            return Term::Sum(Aggregate {
                vars: agg.vars.clone(),
                filter: Box::new(Formula::conjunction(parts)),
                body: Box::new(times(factor, body)),
            });
        }
        self.rule("sum-general");
        let filter = Formula::and(guard, self.formula(&agg.filter));
        let factor = mul_meta(&var_terms(&agg.vars), self.vocab);
        Term::Sum(Aggregate {
            vars: agg.vars.clone(),
            filter: Box::new(filter),
            body: Box::new(times(factor, body)),
        })
    }

    /// `Mul(x̄) · num / den`, cancelling `mul(x)` factors of bound variables
    /// that occur on both sides (they are positive under the guard).
    fn decompression(&self, vars: &[Var], num: &[Term], den: &[Term]) -> Term {
        let mut num_factors: Vec<Term> = vars.iter().map(|v| mul_term(&Term::var(v))).collect();
        num_factors.extend(num.iter().cloned());
        let mut den_factors = Vec::new();
        for d in den {
            if let Some(k) = num_factors.iter().position(|n| n == d && is_bound_mul(n, vars)) {
                num_factors.remove(k);
            } else if *d != Term::Int(1) {
                den_factors.push(d.clone());
            }
        }
        let num = num_factors.into_iter().fold(Term::Int(1), times);
        if den_factors.is_empty() {
            return num;
        }
        let den = den_factors.into_iter().fold(Term::Int(1), times);
        Term::ExactDiv(Box::new(num), Box::new(den))
    }

    fn atom_no_rc(&mut self, atom: &Formula) -> Formula {
        match atom {
            Formula::Pred(n, args) => Formula::Pred(n.clone(), args.iter().map(|a| self.term(a)).collect()),
            Formula::Cmp(op, l, r) => Formula::Cmp(*op, self.term(l), self.term(r)),
            other => self.formula(other),
        }
    }

    fn is_domain(&self, t: &Term) -> bool {
        matches!(t.sort(self.vocab), Some(Sort::Named(_)))
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Pred(_, args) if args.is_empty() => {
                self.rule("propositional-atom");
                f.clone()
            }
            Formula::Pred(..) => {
                self.rule("atom");
                let atom = self.atom_no_rc(f);
                if self.lifted() {
                    self.conditions.push(atom.clone());
                }
                atom
            }
            Formula::Cmp(op @ (CmpOp::Eq | CmpOp::Ne), l, r) if self.is_domain(l) => {
                self.rule("atom");
                let (l, r) = (self.term(l), self.term(r));
                if self.lifted() {
                    self.conditions.push(Formula::eq(l.clone(), r.clone()));
                }
                Formula::Cmp(*op, l, r)
            }
            Formula::Cmp(op, l, r) => {
                self.rule("comparison");
                Formula::Cmp(*op, self.term(l), self.term(r))
            }
            Formula::Divides(l, r) => Formula::Divides(self.term(l), self.term(r)),
            Formula::Conn(c, l, r) => {
                Formula::Conn(*c, Box::new(self.formula(l)), Box::new(self.formula(r)))
            }
            Formula::Not(g) => Formula::not(self.formula(g)),
            Formula::TypeExtent(t, n) => {
                self.rule("type-extent");
                let x = Var::new("x_ext", Sort::named(t));
                Formula::eq(
                    Term::Sum(Aggregate {
                        vars: vec![x.clone()],
                        filter: Box::new(Formula::True),
                        body: Box::new(mul_term(&Term::var(&x))),
                    }),
                    Term::Int(*n as i64),
                )
            }
            Formula::Quant(QuantKind::Forall, vars, body) => {
                let guard = self.guard(vars);
                if let Formula::Conn(Connective::Implies, a, phi) = &**body {
                    if let Some((lead, rest, _)) = self.special(a, vars) {
                        self.rule("forall-specialized");
                        let mut parts = vec![guard, self.atom_no_rc(&lead)];
                        if let Some(r) = rest {
                            parts.push(self.formula(&r));
                        }
                        let phi = self.formula(phi);
                        return Formula::forall(
                            vars.clone(),
                            Formula::implies(Formula::conjunction(parts), phi),
                        );
                    }
                }
                self.rule("forall-general");
                let phi = self.formula(body);
                Formula::forall(vars.clone(), Formula::implies(guard, phi))
            }
            Formula::Quant(QuantKind::Exists, vars, body) => {
                let guard = self.guard(vars);
                if let Some((lead, rest, _)) = self.special(body, vars) {
                    self.rule("exists-specialized");
                    let mut parts = vec![guard, self.atom_no_rc(&lead)];
                    if let Some(r) = rest {
                        parts.push(self.formula(&r));
                    }
                    return Formula::exists(vars.clone(), Formula::conjunction(parts));
                }
                self.rule("exists-general");
                let phi = self.formula(body);
                Formula::exists(vars.clone(), Formula::and(guard, phi))
            }
        }
    }
}

fn is_bound_mul(t: &Term, vars: &[Var]) -> bool {
    matches!(t, Term::Mul(x) if matches!(&**x, Term::Var(v) if vars.contains(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_problem;

    const PIGEONS: &str = "type Pigeon size 10\ntype Hole size 5\npred isIn(Pigeon, Hole)\n\
        theory { !h in Hole: #{p in Pigeon : isIn(p, h)} =< 2. }";

    #[test]
    fn pigeonhole_capacity_translation() {
        let p = parse_problem(PIGEONS).unwrap();
        let l = translate(&p, TranslationMode::Lifted).unwrap();
        assert_eq!(
            l.sentences[0].formula.to_string(),
            "!h in Hole: 0 < mul(h) => sum{{ p in Pigeon : 0 < mul(p) & isIn(p, h) : \
             exactdiv(lcm(mul(p), mul(h)), mul(h)) }} =< 2"
        );
        assert_eq!(l.sentences[0].rules, vec!["forall-general", "comparison", "sum-specialized"]);
        assert_eq!(l.count_kind(|k| *k == SentenceKind::AtomRegularity), 0);
        assert_eq!(
            l.by_label("ext_Pigeon").unwrap().formula.to_string(),
            "sum{{ x_pigeon in Pigeon : true : mul(x_pigeon) }} = 10"
        );
    }

    #[test]
    fn propositional_atom_is_copied() {
        let p = parse_problem("pred q\ntheory { q. }").unwrap();
        let l = translate(&p, TranslationMode::Lifted).unwrap();
        assert_eq!(l.sentences[0].formula, Formula::Pred("q".into(), vec![]));
        assert_eq!(l.sentences.len(), 1);
    }

    #[test]
    fn function_regularity_sentences() {
        let p = parse_problem(
            "type Pigeon size 2\ntype Hole size 1\nfunc holeOf(Pigeon) -> Hole\ntheory { true. }",
        )
        .unwrap();
        let l = translate(&p, TranslationMode::Lifted).unwrap();
        assert_eq!(
            l.by_label("f1_holeOf").unwrap().formula.to_string(),
            "!a1_holeOf in Pigeon: mul(a1_holeOf) = mul(a1_holeOf)"
        );
        assert_eq!(
            l.by_label("f2_holeOf").unwrap().formula.to_string(),
            "!a1_holeOf in Pigeon: divides(mul(holeOf(a1_holeOf)), mul(a1_holeOf))"
        );
    }

    #[test]
    fn equality_special_case_has_no_lcm() {
        let p = parse_problem(
            "type Pigeon size 10\ntype Hole size 5\nfunc holeOf(Pigeon) -> Hole\n\
             theory { !h in Hole: #{p in Pigeon : holeOf(p) = h} =< 2. }",
        )
        .unwrap();
        let l = translate(&p, TranslationMode::Lifted).unwrap();
        let s = l.sentences[0].formula.to_string();
        assert!(s.contains("exactdiv(mul(p), mul(h))"), "{s}");
        assert!(!s.contains("lcm"), "{s}");
    }

    #[test]
    fn rc_shapes() {
        let p = parse_problem(
            "type T size 2\npred q(T, T)\nconst c -> T\nfunc f(T) -> T\ntheory { true. }",
        )
        .unwrap();
        let v = &p.vocabulary;
        let x = Var::new("x", Sort::named("T"));
        let y = Var::new("y", Sort::named("T"));
        let q = Formula::Pred("q".into(), vec![Term::var(&x), Term::var(&y)]);
        assert_eq!(
            rc_for_atom(&q, v).to_string(),
            "!x in T, y in T: q(x, y) => mul(x) * mul(y) = lcm(mul(x), mul(y))"
        );
        let q2 = Formula::Pred(
            "q".into(),
            vec![Term::app("f", vec![Term::var(&x)]), Term::app("c", vec![])],
        );
        assert_eq!(
            rc_for_atom(&q2, v).to_string(),
            "!x in T: q(f(x), c) => mul(x) = mul(x) | mul(f(x)) * mul(c) = lcm(mul(f(x)), mul(c))"
        );
        let closed = Formula::Pred("q".into(), vec![Term::app("c", vec![]), Term::app("c", vec![])]);
        assert_eq!(rc_for_atom(&closed, v), Formula::True);
    }

    #[test]
    fn meta_terms() {
        let p = parse_problem("type T size 2\ntheory { true. }").unwrap();
        let v = &p.vocabulary;
        let x = Term::var(&Var::new("x", Sort::named("T")));
        let y = Term::var(&Var::new("y", Sort::named("T")));
        assert_eq!(mul_meta(&[x.clone(), y], v).to_string(), "mul(x) * mul(y)");
        assert_eq!(lcm_meta(&[x], v).to_string(), "mul(x)");
        assert_eq!(mul_meta(&[], v), Term::Int(1));
    }

    #[test]
    fn binary_atom_gets_regularity_condition() {
        let p = parse_problem("type T size 3\npred q(T, T)\ntheory { !x in T, y in T: q(x, y) | q(y, x). }")
            .unwrap();
        let l = translate(&p, TranslationMode::Lifted).unwrap();
        assert_eq!(l.count_kind(|k| *k == SentenceKind::AtomRegularity), 2);
        let c = translate(&p, TranslationMode::Concrete).unwrap();
        assert_eq!(c.count_kind(|k| *k == SentenceKind::AtomRegularity), 0);
    }
}
