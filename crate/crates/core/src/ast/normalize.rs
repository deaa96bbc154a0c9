//! Equivalence-preserving rewrites applied before translation.

use super::{
    Aggregate, CmpOp, Connective, Formula, Problem, QuantKind, Sort, Term, Var, Vocabulary,
};

/// Replaces every `#{x̄ : φ}` by `sum{{x̄ : φ : 1}}`, innermost first.
pub fn desugar_cardinality(f: &Formula) -> Formula {
    map_formula(f, &mut |t| match t {
        Term::Count(vars, filter) => Some(Term::Sum(Aggregate {
            vars: vars.clone(),
            filter: Box::new(desugar_cardinality(filter)),
            body: Box::new(Term::Int(1)),
        })),
        _ => None,
    })
}

pub fn desugar_problem(p: &Problem) -> Problem {
    Problem {
        sentences: p.sentences.iter().map(desugar_cardinality).collect(),
        ..p.clone()
    }
}

/// Desugars and normalizes every sentence.
pub fn normalize_problem(p: &Problem) -> Problem {
    Problem {
        sentences: p
            .sentences
            .iter()
            .map(|s| normalize_for_special_rules(&desugar_cardinality(s), &p.vocabulary))
            .collect(),
        ..p.clone()
    }
}

/// Structural term rewrite: `pre` may replace a term outright; otherwise
/// children are rewritten.
fn map_formula(f: &Formula, pre: &mut dyn FnMut(&Term) -> Option<Term>) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::TypeExtent(..) => f.clone(),
        Formula::Pred(n, args) => {
            Formula::Pred(n.clone(), args.iter().map(|a| map_term(a, pre)).collect())
        }
        Formula::Cmp(op, l, r) => Formula::Cmp(*op, map_term(l, pre), map_term(r, pre)),
        Formula::Divides(l, r) => Formula::Divides(map_term(l, pre), map_term(r, pre)),
        Formula::Conn(c, l, r) => Formula::Conn(
            *c,
            Box::new(map_formula(l, pre)),
            Box::new(map_formula(r, pre)),
        ),
        Formula::Not(g) => Formula::not(map_formula(g, pre)),
        Formula::Quant(k, vs, b) => Formula::Quant(*k, vs.clone(), Box::new(map_formula(b, pre))),
    }
}

fn map_term(t: &Term, pre: &mut dyn FnMut(&Term) -> Option<Term>) -> Term {
    if let Some(r) = pre(t) {
        return r;
    }
    let bx = |t: &Term, pre: &mut dyn FnMut(&Term) -> Option<Term>| Box::new(map_term(t, pre));
    match t {
        Term::Var(_) | Term::Int(_) => t.clone(),
        Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| map_term(a, pre)).collect()),
        Term::Arith(op, l, r) => Term::Arith(*op, bx(l, pre), bx(r, pre)),
        Term::Sum(agg) => Term::Sum(Aggregate {
            vars: agg.vars.clone(),
            filter: Box::new(map_formula(&agg.filter, pre)),
            body: bx(&agg.body, pre),
        }),
        Term::Count(vs, filter) => Term::Count(vs.clone(), Box::new(map_formula(filter, pre))),
        Term::Mul(x) => Term::Mul(bx(x, pre)),
        Term::Lcm(a, b) => Term::Lcm(bx(a, pre), bx(b, pre)),
        Term::ExactDiv(a, b) => Term::ExactDiv(bx(a, pre), bx(b, pre)),
    }
}

/// An atom `p(t̄, s)` (or `t = s`) whose non-`s` arguments only use the bound
/// variables and whose `s` argument uses none of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialAtom {
    /// The atom as it appears in the formula.
    pub atom: Formula,
    /// Arguments other than `s`, in order.
    pub inner: Vec<Term>,
    pub outer: Term,
    pub is_equality: bool,
}

fn vars_within(t: &Term, bound: &[Var]) -> bool {
    t.free_vars().iter().all(|v| bound.contains(v))
}

fn vars_disjoint(t: &Term, bound: &[Var]) -> bool {
    t.free_vars().iter().all(|v| !bound.contains(v))
}

fn is_domain_term(t: &Term, vocab: &Vocabulary) -> bool {
    matches!(t.sort(vocab), Some(Sort::Named(_)))
}

/// Decides whether `atom` matches a specialized rule for the bound variables
/// `bound`. The last qualifying argument position is taken as `s`; for
/// equalities the right-hand side is preferred.
pub fn eligible_atom_split(atom: &Formula, bound: &[Var], vocab: &Vocabulary) -> Option<SpecialAtom> {
    match atom {
        Formula::Pred(_, args) => {
            for k in (0..args.len()).rev() {
                let ok_s = vars_disjoint(&args[k], bound);
                let ok_rest = args
                    .iter()
                    .enumerate()
                    .all(|(i, a)| i == k || vars_within(a, bound));
                if ok_s && ok_rest {
                    let inner = args
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != k)
                        .map(|(_, a)| a.clone())
                        .collect();
                    return Some(SpecialAtom {
                        atom: atom.clone(),
                        inner,
                        outer: args[k].clone(),
                        is_equality: false,
                    });
                }
            }
            None
        }
        Formula::Cmp(CmpOp::Eq, l, r) if is_domain_term(l, vocab) => {
            for (t, s) in [(l, r), (r, l)] {
                if vars_disjoint(s, bound) && vars_within(t, bound) {
                    return Some(SpecialAtom {
                        atom: atom.clone(),
                        inner: vec![t.clone()],
                        outer: s.clone(),
                        is_equality: true,
                    });
                }
            }
            None
        }
        _ => None,
    }
}

fn flatten_and(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::Conn(Connective::And, l, r) => {
            flatten_and(l, out);
            flatten_and(r, out);
        }
        other => out.push(other.clone()),
    }
}

/// Leftmost leaf of a conjunction chain.
pub fn leading_conjunct(f: &Formula) -> &Formula {
    match f {
        Formula::Conn(Connective::And, l, _) => leading_conjunct(l),
        other => other,
    }
}

/// Splits `a & rest` into `a` and the remaining conjuncts (if any).
pub fn split_leading_conjunct(f: &Formula) -> (Formula, Option<Formula>) {
    let mut parts = Vec::new();
    flatten_and(f, &mut parts);
    let first = parts.remove(0);
    let rest = if parts.is_empty() {
        None
    } else {
        Some(Formula::conjunction(parts))
    };
    (first, rest)
}

/// Moves the first eligible conjunct of `f` to the front. Returns `None` when
/// no conjunct is eligible.
fn hoist_eligible(f: &Formula, bound: &[Var], vocab: &Vocabulary) -> Option<Formula> {
    let mut parts = Vec::new();
    flatten_and(f, &mut parts);
    let k = parts
        .iter()
        .position(|c| eligible_atom_split(c, bound, vocab).is_some())?;
    if k == 0 {
        // Keep the original association when the atom already leads.
        return Some(f.clone());
    }
    let atom = parts.remove(k);
    parts.insert(0, atom);
    Some(Formula::conjunction(parts))
}

/// Commutes conjuncts so that the specialized quantifier and sum rules apply
/// wherever an eligible atom exists, and pushes negations through guarded
/// quantifiers using the usual dualities. The result is logically equivalent.
pub fn normalize_for_special_rules(f: &Formula, vocab: &Vocabulary) -> Formula {
    Normalizer { vocab }.formula(f)
}

struct Normalizer<'a> {
    vocab: &'a Vocabulary,
}

impl Normalizer<'_> {
    fn formula(&self, f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False | Formula::TypeExtent(..) => f.clone(),
            Formula::Pred(n, args) => {
                Formula::Pred(n.clone(), args.iter().map(|a| self.term(a)).collect())
            }
            Formula::Cmp(op, l, r) => Formula::Cmp(*op, self.term(l), self.term(r)),
            Formula::Divides(l, r) => Formula::Divides(self.term(l), self.term(r)),
            Formula::Conn(c, l, r) => {
                Formula::Conn(*c, Box::new(self.formula(l)), Box::new(self.formula(r)))
            }
            Formula::Not(g) => self.negation(self.formula(g)),
            Formula::Quant(kind, vars, body) => self.quant(*kind, vars, self.formula(body)),
        }
    }

    fn quant(&self, kind: QuantKind, vars: &[Var], body: Formula) -> Formula {
        let body = match (kind, &body) {
            (QuantKind::Exists, _) => hoist_eligible(&body, vars, self.vocab).unwrap_or(body),
            (QuantKind::Forall, Formula::Conn(Connective::Implies, a, phi)) => {
                match hoist_eligible(a, vars, self.vocab) {
                    Some(a) => Formula::implies(a, (**phi).clone()),
                    None => body,
                }
            }
            (QuantKind::Forall, _) => body,
        };
        Formula::Quant(kind, vars.to_vec(), Box::new(body))
    }

    /// `g` is already normalized.
    fn negation(&self, g: Formula) -> Formula {
        match &g {
            Formula::Quant(QuantKind::Exists, vars, body)
                if eligible_atom_split(leading_conjunct(body), vars, self.vocab).is_some() =>
            {
                let (atom, rest) = split_leading_conjunct(body);
                let consequent = match rest {
                    Some(r) => self.negation(r),
                    None => Formula::False,
                };
                Formula::forall(vars.clone(), Formula::implies(atom, consequent))
            }
            Formula::Quant(QuantKind::Forall, vars, body) => match &**body {
                Formula::Conn(Connective::Implies, a, phi)
                    if eligible_atom_split(leading_conjunct(a), vars, self.vocab).is_some() =>
                {
                    let mut parts = Vec::new();
                    flatten_and(a, &mut parts);
                    parts.push(self.negation((**phi).clone()));
                    Formula::exists(vars.clone(), Formula::conjunction(parts))
                }
                _ => Formula::not(g),
            },
            _ => Formula::not(g),
        }
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(_) | Term::Int(_) => t.clone(),
            Term::App(n, args) => Term::App(n.clone(), args.iter().map(|a| self.term(a)).collect()),
            Term::Arith(op, l, r) => Term::arith(*op, self.term(l), self.term(r)),
            Term::Sum(agg) => {
                let filter = self.formula(&agg.filter);
                let filter = hoist_eligible(&filter, &agg.vars, self.vocab).unwrap_or(filter);
                Term::Sum(Aggregate {
                    vars: agg.vars.clone(),
                    filter: Box::new(filter),
                    body: Box::new(self.term(&agg.body)),
                })
            }
            Term::Count(vs, filter) => {
                let filter = self.formula(filter);
                let filter = hoist_eligible(&filter, vs, self.vocab).unwrap_or(filter);
                Term::Count(vs.clone(), Box::new(filter))
            }
            Term::Mul(x) => Term::mul_of(self.term(x)),
            Term::Lcm(a, b) => Term::Lcm(Box::new(self.term(a)), Box::new(self.term(b))),
            Term::ExactDiv(a, b) => Term::ExactDiv(Box::new(self.term(a)), Box::new(self.term(b))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_problem;

    fn sentence(decls: &str, s: &str) -> (Formula, Vocabulary) {
        let p = parse_problem(&format!("{decls}\ntheory {{ {s}. }}")).unwrap();
        (p.sentences[0].clone(), p.vocabulary)
    }

    const PIGEONS: &str =
        "type Pigeon size 4\ntype Hole size 2\npred isIn(Pigeon, Hole)\npred q(Pigeon)\npred r(Pigeon)";

    #[test]
    fn cardinality_becomes_unit_sum() {
        let (f, _) = sentence(PIGEONS, "!h in Hole: #{p in Pigeon : isIn(p, h)} =< 2");
        assert_eq!(
            desugar_cardinality(&f).to_string(),
            "!h in Hole: sum{{ p in Pigeon : isIn(p, h) : 1 }} =< 2"
        );
        let (g, _) = sentence(PIGEONS, "!p in Pigeon: q(p)");
        assert_eq!(desugar_cardinality(&g), g);
    }

    #[test]
    fn nested_cardinality() {
        let (f, _) = sentence(
            PIGEONS,
            "sum{{ h in Hole : true : #{p in Pigeon : isIn(p, h)} }} = 4",
        );
        let d = desugar_cardinality(&f).to_string();
        assert_eq!(d, "sum{{ h in Hole : true : sum{{ p in Pigeon : isIn(p, h) : 1 }} }} = 4");
    }

    #[test]
    fn eligible_atom_moves_left() {
        let (f, v) = sentence(PIGEONS, "!h in Hole: ?p in Pigeon: q(p) & isIn(p, h)");
        let n = normalize_for_special_rules(&f, &v);
        assert_eq!(n.to_string(), "!h in Hole: ?p in Pigeon: isIn(p, h) & q(p)");
        assert_eq!(normalize_for_special_rules(&n, &v), n);
    }

    #[test]
    fn no_eligible_atom_is_untouched() {
        let (f, v) = sentence(PIGEONS, "!p in Pigeon: q(p) | r(p)");
        assert_eq!(normalize_for_special_rules(&f, &v), f);
    }

    #[test]
    fn negated_existential_becomes_guarded_universal() {
        let (f, v) = sentence(PIGEONS, "!h in Hole: ~(?p in Pigeon: q(p) & isIn(p, h))");
        let n = normalize_for_special_rules(&f, &v);
        assert_eq!(n.to_string(), "!h in Hole: !p in Pigeon: isIn(p, h) => ~q(p)");
        assert_eq!(normalize_for_special_rules(&n, &v), n);
    }

    #[test]
    fn negated_guarded_universal_becomes_existential() {
        let (f, v) = sentence(PIGEONS, "!h in Hole: ~(!p in Pigeon: isIn(p, h) => q(p))");
        let n = normalize_for_special_rules(&f, &v);
        assert_eq!(n.to_string(), "!h in Hole: ?p in Pigeon: isIn(p, h) & ~q(p)");
    }

    #[test]
    fn equality_split_prefers_right_side() {
        let (f, v) = sentence(
            "type P size 2\ntype H size 2\nfunc holeOf(P) -> H",
            "!h in H: #{p in P : holeOf(p) = h} =< 1",
        );
        let Formula::Quant(_, _, body) = desugar_cardinality(&f) else { unreachable!() };
        let Formula::Cmp(_, Term::Sum(agg), _) = *body else { unreachable!() };
        let sp = eligible_atom_split(&agg.filter, &agg.vars, &v).unwrap();
        assert!(sp.is_equality);
        assert_eq!(sp.outer.to_string(), "h");
    }
}
