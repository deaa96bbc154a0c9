//! Typed first-order syntax with sum and cardinality aggregates.
//!
//! Problems are parsed from the surface language (see [`parse_problem`]),
//! checked with [`typecheck`], and rewritten by [`desugar_cardinality`] and
//! [`normalize_for_special_rules`] before translation. Bound variables are
//! renamed to problem-wide unique names by the parser, so substitution never
//! needs capture avoidance.

mod normalize;
mod parser;
mod printer;
mod typecheck;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use normalize::{
    desugar_cardinality, desugar_problem, eligible_atom_split, leading_conjunct,
    normalize_for_special_rules, normalize_problem, split_leading_conjunct, SpecialAtom,
};
pub use parser::{parse_problem, ParseError};
pub use typecheck::{typecheck, TypeError, TypeErrors};

/// Name of the built-in integer sort in the surface language.
pub const INT_SORT_NAME: &str = "Int";

/// Words that may not be used as symbol, type or variable names.
pub const RESERVED: &[&str] = &[
    "type", "size", "pred", "func", "const", "theory", "in", "sum", "true", "false", "Int", "Nat",
    "mul", "lcm", "exactdiv", "divides",
];

/// Line/column position in a source file, both 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Semantic type of a term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sort {
    Int,
    Named(String),
}

impl Sort {
    pub fn named(name: &str) -> Self {
        Sort::Named(name.to_string())
    }

    pub fn type_name(&self) -> Option<&str> {
        match self {
            Sort::Int => None,
            Sort::Named(n) => Some(n),
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self, Sort::Int)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str(INT_SORT_NAME),
            Sort::Named(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub args: Vec<String>,
}

/// Function signature. Arity-0 functions are constants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDecl {
    pub name: String,
    pub args: Vec<String>,
    pub result: Sort,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub types: Vec<String>,
    pub predicates: Vec<PredicateDecl>,
    pub functions: Vec<FunctionDecl>,
}

impl Vocabulary {
    pub fn has_type(&self, name: &str) -> bool {
        self.types.iter().any(|t| t == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t == name)
    }
}

/// A (bound) variable together with the type it ranges over.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Self {
        Var { name: name.to_string(), sort }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connective {
    And,
    Or,
    Implies,
    Iff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuantKind {
    Forall,
    Exists,
}

/// `sum{{ vars : filter : body }}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Aggregate {
    pub vars: Vec<Var>,
    pub filter: Box<Formula>,
    pub body: Box<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(Var),
    /// Function application; constants have no arguments.
    App(String, Vec<Term>),
    Int(i64),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Sum(Aggregate),
    /// `#{vars : filter}`; removed by [`desugar_cardinality`].
    Count(Vec<Var>, Box<Formula>),
    /// Multiplicity of the element denoted by a domain-typed term.
    Mul(Box<Term>),
    /// Least common multiple of two integer terms (0 if either is 0).
    Lcm(Box<Term>, Box<Term>),
    /// Division that is known to be exact whenever it is evaluated; `x / 0 = 0`.
    ExactDiv(Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Pred(String, Vec<Term>),
    Cmp(CmpOp, Term, Term),
    Conn(Connective, Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Quant(QuantKind, Vec<Var>, Box<Formula>),
    /// The interpretation of the type has exactly `n` elements.
    TypeExtent(String, u64),
    /// `divides(d, n)`: there is a natural `k` with `n = k * d`.
    Divides(Term, Term),
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    pub fn arith(op: ArithOp, l: Term, r: Term) -> Term {
        Term::Arith(op, Box::new(l), Box::new(r))
    }

    pub fn mul_of(t: Term) -> Term {
        Term::Mul(Box::new(t))
    }

    /// Sort of the term, given the vocabulary the term was resolved against.
    pub fn sort(&self, vocab: &Vocabulary) -> Option<Sort> {
        match self {
            Term::Var(v) => Some(v.sort.clone()),
            Term::App(name, _) => vocab.function(name).map(|f| f.result.clone()),
            Term::Int(_)
            | Term::Arith(..)
            | Term::Sum(_)
            | Term::Count(..)
            | Term::Mul(_)
            | Term::Lcm(..)
            | Term::ExactDiv(..) => Some(Sort::Int),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        collect_term_vars(self, &mut Vec::new(), &mut out);
        out
    }
}

impl Formula {
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::Conn(Connective::And, Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Conn(Connective::Or, Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Conn(Connective::Implies, Box::new(l), Box::new(r))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn eq(l: Term, r: Term) -> Formula {
        Formula::Cmp(CmpOp::Eq, l, r)
    }

    pub fn forall(vars: Vec<Var>, body: Formula) -> Formula {
        Formula::Quant(QuantKind::Forall, vars, Box::new(body))
    }

    pub fn exists(vars: Vec<Var>, body: Formula) -> Formula {
        Formula::Quant(QuantKind::Exists, vars, Box::new(body))
    }

    /// Left-associated conjunction; empty input gives `true`.
    pub fn conjunction(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        collect_formula_vars(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }
}

fn push_unique(out: &mut Vec<Var>, v: &Var) {
    if !out.contains(v) {
        out.push(v.clone());
    }
}

fn collect_term_vars(t: &Term, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
    match t {
        Term::Var(v) => {
            if !bound.contains(v) {
                push_unique(out, v);
            }
        }
        Term::App(_, args) => args.iter().for_each(|a| collect_term_vars(a, bound, out)),
        Term::Int(_) => {}
        Term::Arith(_, l, r) | Term::Lcm(l, r) | Term::ExactDiv(l, r) => {
            collect_term_vars(l, bound, out);
            collect_term_vars(r, bound, out);
        }
        Term::Mul(t) => collect_term_vars(t, bound, out),
        Term::Sum(agg) => {
            let n = bound.len();
            bound.extend(agg.vars.iter().cloned());
            collect_formula_vars(&agg.filter, bound, out);
            collect_term_vars(&agg.body, bound, out);
            bound.truncate(n);
        }
        Term::Count(vars, filter) => {
            let n = bound.len();
            bound.extend(vars.iter().cloned());
            collect_formula_vars(filter, bound, out);
            bound.truncate(n);
        }
    }
}

fn collect_formula_vars(f: &Formula, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
    match f {
        Formula::True | Formula::False | Formula::TypeExtent(..) => {}
        Formula::Pred(_, args) => args.iter().for_each(|a| collect_term_vars(a, bound, out)),
        Formula::Cmp(_, l, r) | Formula::Divides(l, r) => {
            collect_term_vars(l, bound, out);
            collect_term_vars(r, bound, out);
        }
        Formula::Conn(_, l, r) => {
            collect_formula_vars(l, bound, out);
            collect_formula_vars(r, bound, out);
        }
        Formula::Not(g) => collect_formula_vars(g, bound, out),
        Formula::Quant(_, vars, body) => {
            let n = bound.len();
            bound.extend(vars.iter().cloned());
            collect_formula_vars(body, bound, out);
            bound.truncate(n);
        }
    }
}

/// Size of a type's interpretation: known in advance, or to be discovered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cardinality {
    Fixed(u64),
    Generative,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub vocabulary: Vocabulary,
    pub sentences: Vec<Formula>,
    pub cardinalities: BTreeMap<String, Cardinality>,
    /// Source position of each sentence, parallel to `sentences`.
    #[serde(default)]
    pub sentence_positions: Vec<Pos>,
}

impl Problem {
    pub fn cardinality(&self, ty: &str) -> Cardinality {
        self.cardinalities
            .get(ty)
            .copied()
            .unwrap_or(Cardinality::Generative)
    }

    pub fn fixed_size(&self, ty: &str) -> Option<u64> {
        match self.cardinality(ty) {
            Cardinality::Fixed(n) => Some(n),
            Cardinality::Generative => None,
        }
    }

    pub fn generative_types(&self) -> Vec<String> {
        self.vocabulary
            .types
            .iter()
            .filter(|t| self.fixed_size(t).is_none())
            .cloned()
            .collect()
    }

    /// One `TypeExtent` formula per fixed-size type, in declaration order.
    pub fn extent_formulas(&self) -> Vec<Formula> {
        self.vocabulary
            .types
            .iter()
            .filter_map(|t| self.fixed_size(t).map(|n| Formula::TypeExtent(t.clone(), n)))
            .collect()
    }

    pub fn sentence_pos(&self, index: usize) -> Pos {
        self.sentence_positions.get(index).copied().unwrap_or_default()
    }
}
