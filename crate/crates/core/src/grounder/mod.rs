//! Grounding a translated sentence over a finite lifted domain into an
//! SMT-LIB script over integer multiplicities and boolean atoms.

mod expr;
mod solver;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use num_integer::Integer;
use thiserror::Error;

pub use expr::G;
pub use solver::{parse_sexps, run_solver, CheckResult, Sexp, SolverConfig, SolverError, SolverRun};

use crate::ast::{ArithOp, CmpOp, Connective, Formula, QuantKind, Sort, Term};
use crate::lifter::{LiftedSentence, SentenceKind, TranslationMode};
use crate::structures::{LiftedStructure, Value};
use expr::*;

/// Candidate lifted elements per type, in vocabulary type order. Elements
/// listed in `fixed_mul` get a constant multiplicity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LiftedDomain {
    pub elements: BTreeMap<String, Vec<String>>,
    pub fixed_mul: BTreeMap<String, u64>,
}

impl LiftedDomain {
    pub fn sizes(&self) -> BTreeMap<String, usize> {
        self.elements.iter().map(|(t, es)| (t.clone(), es.len())).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcmEncoding {
    /// Ground lookup table for arguments up to the bound; arguments are
    /// constrained to the bound under the label `lcm_bound`.
    Table { bound: u64 },
    /// Exact gcd witnesses (`a = g·u`, `b = g·v`, `s·u + t·v = 1`).
    Witness,
}

pub const LCM_BOUND_LABEL: &str = "lcm_bound";

/// Slot-based symmetry restriction: within each slot at most one (or
/// exactly one) of the listed elements is used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotypeSlots {
    pub slots: Vec<Vec<String>>,
    pub exactly_one: bool,
}

#[derive(Clone, Debug)]
pub struct GroundOptions {
    pub lcm: LcmEncoding,
    pub max_mul: u64,
    pub monotype: Option<MonotypeSlots>,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            lcm: LcmEncoding::Table { bound: 64 },
            max_mul: (1u64 << 31) - 1,
            monotype: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("quantification over infinite type in `{0}`")]
    InfiniteRange(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("ill-sorted ground term in sentence `{0}`")]
    IllSorted(String),
}

#[derive(Clone, Debug)]
pub struct AtomVar {
    pub pred: String,
    pub tuple: Vec<String>,
    pub sym: String,
}

#[derive(Clone, Debug)]
pub struct FuncCell {
    pub func: String,
    pub tuple: Vec<String>,
    pub sym: String,
    /// Codomain elements (selector values index this list); `None` for
    /// integer-valued functions.
    pub codomain: Option<Vec<String>>,
}

/// A ground problem ready to be sent to a solver.
#[derive(Clone, Debug)]
pub struct GroundedProblem {
    pub mode: TranslationMode,
    pub domain: LiftedDomain,
    /// Declarations and assertions, without `check-sat`.
    pub script: String,
    /// `script` without the `lcm_bound` assertion, when the table encoding
    /// is in use. Out-of-table `lcm_tab` values are unconstrained there, so
    /// its unsat cores are still sound but its models must be re-checked.
    pub unbounded_script: Option<String>,
    pub labels: Vec<String>,
    /// Types each label speaks about, for mapping unsat cores to types.
    pub label_types: BTreeMap<String, BTreeSet<String>>,
    pub mul_vars: Vec<(String, String)>,
    pub atoms: Vec<AtomVar>,
    pub cells: Vec<FuncCell>,
}

impl GroundedProblem {
    /// Terms whose values decode a model.
    pub fn model_terms(&self) -> Vec<String> {
        self.mul_vars
            .iter()
            .map(|(_, v)| v.clone())
            .chain(self.atoms.iter().map(|a| a.sym.clone()))
            .chain(self.cells.iter().map(|c| c.sym.clone()))
            .collect()
    }

    pub fn full_script(&self) -> String {
        format!("{}(check-sat)\n", self.script)
    }

    /// Decodes solver values into a lifted structure over all candidate
    /// elements (unused elements have multiplicity 0).
    pub fn decode(
        &self,
        ls: &LiftedSentence,
        values: &[(String, Sexp)],
    ) -> Result<LiftedStructure, SolverError> {
        let vals: HashMap<&str, &Sexp> = values.iter().map(|(n, v)| (n.as_str(), v)).collect();
        let get = |sym: &str| {
            vals.get(sym)
                .copied()
                .ok_or_else(|| SolverError::Protocol(format!("no value for {sym}")))
        };
        let mut l = LiftedStructure::empty(&ls.problem.vocabulary);
        for (t, es) in &self.domain.elements {
            l.domains.entry(t.clone()).or_default().extend(es.iter().cloned());
        }
        for e in self.domain.elements.values().flatten() {
            if let Some(&m) = self.domain.fixed_mul.get(e) {
                l.mul.insert(e.clone(), m);
            }
        }
        for (e, sym) in &self.mul_vars {
            let m = get(sym)?
                .as_int()
                .ok_or_else(|| SolverError::Protocol(format!("non-integer value for {sym}")))?;
            l.mul.insert(e.clone(), m.max(0) as u64);
        }
        for a in &self.atoms {
            if get(&a.sym)?.as_bool() == Some(true) {
                l.predicates.entry(a.pred.clone()).or_default().insert(a.tuple.clone());
            }
        }
        for c in &self.cells {
            let v = get(&c.sym)?
                .as_int()
                .ok_or_else(|| SolverError::Protocol(format!("non-integer value for {}", c.sym)))?;
            let value = match &c.codomain {
                None => Value::Int(v as i64),
                Some(es) => Value::Elem(
                    es.get(v as usize)
                        .ok_or_else(|| SolverError::Protocol(format!("selector {} out of range", c.sym)))?
                        .clone(),
                ),
            };
            l.functions.entry(c.func.clone()).or_default().insert(c.tuple.clone(), value);
        }
        Ok(l)
    }
}

#[derive(Clone, Debug)]
enum GVal {
    /// Index into the lifted elements of a type, possibly symbolic.
    Dom(usize, G),
    Int(G),
}

struct Ctx<'a> {
    ls: &'a LiftedSentence,
    opts: &'a GroundOptions,
    types: Vec<String>,
    elems: Vec<Vec<String>>,
    muls: Vec<Vec<G>>,
    atoms: HashMap<(usize, Vec<u32>), G>,
    atom_list: Vec<AtomVar>,
    cells: HashMap<(usize, Vec<u32>), G>,
    env: Vec<(String, GVal)>,
    path: Vec<G>,
    side: Vec<G>,
    decls: String,
    background: Vec<G>,
    fresh: usize,
    lcm_cache: HashMap<(G, G), G>,
    lcm_table_used: bool,
    lcm_bounds: Vec<G>,
    sentence: String,
}

fn quote(s: &str) -> String {
    format!("|{}|", s.replace(['|', '\\'], "_"))
}

impl<'a> Ctx<'a> {
    fn type_id(&self, name: &str) -> Result<usize, GroundError> {
        self.types
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| GroundError::UnknownSymbol(name.to_string()))
    }

    fn fresh(&mut self, prefix: &str) -> G {
        let name = format!("{prefix}!{}", self.fresh);
        self.fresh += 1;
        let _ = writeln!(self.decls, "(declare-const {name} Int)");
        G::sym(name)
    }

    fn path_cond(&self) -> G {
        and(self.path.clone())
    }

    fn side_condition(&mut self, cond: G) {
        let c = implies(self.path_cond(), cond);
        if c != G::B(true) {
            self.side.push(c);
        }
    }

    fn elem_choices(&self, v: &GVal) -> Vec<(G, u32)> {
        match v {
            GVal::Dom(_, G::I(k)) => vec![(G::B(true), *k as u32)],
            GVal::Dom(t, e) => (0..self.elems[*t].len() as u32)
                .map(|k| (eq(e.clone(), G::I(k as i128)), k))
                .collect(),
            GVal::Int(_) => Vec::new(),
        }
    }

    /// All concrete index tuples an argument list may denote, with their
    /// conditions.
    fn combos(&self, args: &[GVal]) -> Vec<(G, Vec<u32>)> {
        let mut out = vec![(G::B(true), Vec::new())];
        for a in args {
            let ch = self.elem_choices(a);
            let mut next = Vec::with_capacity(out.len() * ch.len());
            for (c, idx) in &out {
                for (c2, k) in &ch {
                    let mut i = idx.clone();
                    i.push(*k);
                    next.push((and(vec![c.clone(), c2.clone()]), i));
                }
            }
            out = next;
        }
        out
    }

    fn tuple_names(&self, tys: &[usize], idx: &[u32]) -> Vec<String> {
        tys.iter()
            .zip(idx)
            .map(|(&t, &i)| self.elems[t][i as usize].clone())
            .collect()
    }

    fn atom(&mut self, p: usize, idx: Vec<u32>) -> G {
        if let Some(g) = self.atoms.get(&(p, idx.clone())) {
            return g.clone();
        }
        let decl = &self.ls.problem.vocabulary.predicates[p];
        let tys: Vec<usize> = decl.args.iter().map(|a| self.type_id(a).unwrap()).collect();
        let tuple = self.tuple_names(&tys, &idx);
        let sym = quote(&format!("{}({})", decl.name, tuple.join(",")));
        let _ = writeln!(self.decls, "(declare-const {sym} Bool)");
        self.atom_list.push(AtomVar {
            pred: decl.name.clone(),
            tuple,
            sym: sym.clone(),
        });
        let g = G::sym(sym);
        self.atoms.insert((p, idx), g.clone());
        g
    }

    fn lcm(&mut self, a: G, b: G) -> G {
        match (&a, &b) {
            (G::I(x), G::I(y)) => return G::I(if *x == 0 || *y == 0 { 0 } else { x.lcm(y) }),
            (G::I(1), _) => return b,
            (_, G::I(1)) => return a,
            _ if a == b => return a,
            _ => {}
        }
        let key = if a.smt() <= b.smt() { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if let Some(g) = self.lcm_cache.get(&key) {
            return g.clone();
        }
        let zero = or(vec![eq(a.clone(), G::I(0)), eq(b.clone(), G::I(0))]);
        let g = match self.opts.lcm {
            LcmEncoding::Table { bound } => {
                self.lcm_table_used = true;
                for x in [&a, &b] {
                    if x.as_int().is_none() {
                        self.lcm_bounds.push(le(x.clone(), G::I(bound as i128)));
                    }
                }
                ite(zero, G::I(0), G::Op("lcm_tab", vec![a.clone(), b.clone()]))
            }
            LcmEncoding::Witness => {
                let l = self.fresh("lcm");
                let gg = self.fresh("gcd");
                let u = self.fresh("lcm_u");
                let v = self.fresh("lcm_v");
                let s = self.fresh("lcm_s");
                let t = self.fresh("lcm_t");
                self.background.push(implies(zero.clone(), eq(l.clone(), G::I(0))));
                self.background.push(implies(
                    not(zero),
                    and(vec![
                        lt(G::I(0), gg.clone()),
                        eq(a.clone(), mul(vec![gg.clone(), u.clone()])),
                        eq(b.clone(), mul(vec![gg.clone(), v.clone()])),
                        eq(add(vec![mul(vec![s, u.clone()]), mul(vec![t, v.clone()])]), G::I(1)),
                        eq(l.clone(), mul(vec![gg, u, v])),
                    ]),
                ));
                l
            }
        };
        self.lcm_cache.insert(key, g.clone());
        g
    }

    fn exact_div(&mut self, n: G, d: G) -> G {
        match (&n, &d) {
            (_, G::I(0)) => return G::I(0),
            (G::I(x), G::I(y)) if x % y == 0 => return G::I(x / y),
            (_, G::I(1)) => return n,
            _ if n == d => return ite(eq(d, G::I(0)), G::I(0), G::I(1)),
            _ => {}
        }
        let k = self.fresh("q");
        self.background.push(implies(eq(d.clone(), G::I(0)), eq(k.clone(), G::I(0))));
        self.side_condition(implies(
            ne(d.clone(), G::I(0)),
            eq(mul(vec![k.clone(), d]), n),
        ));
        k
    }

    fn mul_of(&self, v: &GVal) -> G {
        match v {
            GVal::Int(_) => G::I(1),
            GVal::Dom(t, G::I(k)) => self.muls[*t][*k as usize].clone(),
            GVal::Dom(t, e) => {
                let n = self.elems[*t].len();
                if n == 0 {
                    return G::I(0);
                }
                let mut acc = self.muls[*t][n - 1].clone();
                for k in (0..n - 1).rev() {
                    acc = ite(eq(e.clone(), G::I(k as i128)), self.muls[*t][k].clone(), acc);
                }
                acc
            }
        }
    }

    fn int(&mut self, t: &Term) -> Result<G, GroundError> {
        match self.term(t)? {
            GVal::Int(g) => Ok(g),
            GVal::Dom(..) => Err(GroundError::IllSorted(self.sentence.clone())),
        }
    }

    fn binders(&self, vars: &[crate::ast::Var]) -> Result<Vec<(String, usize)>, GroundError> {
        vars.iter()
            .map(|v| match &v.sort {
                Sort::Named(t) => Ok((v.name.clone(), self.type_id(t)?)),
                Sort::Int => Err(GroundError::InfiniteRange(self.sentence.clone())),
            })
            .collect()
    }

    /// Calls `f` once per assignment of the binders, with the variables bound.
    fn instances<T>(
        &mut self,
        bs: &[(String, usize)],
        f: &mut dyn FnMut(&mut Self) -> Result<T, GroundError>,
    ) -> Result<Vec<T>, GroundError> {
        let dims: Vec<usize> = bs.iter().map(|(_, t)| self.elems[*t].len()).collect();
        let mut out = Vec::new();
        if dims.contains(&0) {
            return Ok(out);
        }
        let depth = self.env.len();
        let mut idx = vec![0usize; bs.len()];
        loop {
            for (k, (name, t)) in bs.iter().enumerate() {
                self.env.push((name.clone(), GVal::Dom(*t, G::I(idx[k] as i128))));
            }
            let r = f(self);
            self.env.truncate(depth);
            out.push(r?);
            let mut k = bs.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn term(&mut self, t: &Term) -> Result<GVal, GroundError> {
        Ok(match t {
            Term::Var(v) => self
                .env
                .iter()
                .rev()
                .find(|(n, _)| *n == v.name)
                .map(|(_, g)| g.clone())
                .ok_or_else(|| GroundError::UnknownSymbol(v.name.clone()))?,
            Term::Int(n) => GVal::Int(G::I(*n as i128)),
            Term::App(name, args) => {
                let vocab = &self.ls.problem.vocabulary;
                let fid = vocab
                    .functions
                    .iter()
                    .position(|f| &f.name == name)
                    .ok_or_else(|| GroundError::UnknownSymbol(name.clone()))?;
                let result = match &vocab.functions[fid].result {
                    Sort::Int => None,
                    Sort::Named(r) => Some(self.type_id(r)?),
                };
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                let combos = self.combos(&args);
                let mut acc: Option<G> = None;
                for (cond, idx) in combos.into_iter().rev() {
                    let cell = self.cells[&(fid, idx)].clone();
                    acc = Some(match acc {
                        None => cell,
                        Some(rest) => ite(cond, cell, rest),
                    });
                }
                let g = acc.unwrap_or(G::I(0));
                match result {
                    Some(r) => GVal::Dom(r, g),
                    None => GVal::Int(g),
                }
            }
            Term::Arith(op, l, r) => {
                let a = self.int(l)?;
                let b = self.int(r)?;
                GVal::Int(match op {
                    ArithOp::Add => add(vec![a, b]),
                    ArithOp::Sub => sub(a, b),
                    ArithOp::Mul => mul(vec![a, b]),
                    ArithOp::Div => {
                        self.side_condition(ne(b.clone(), G::I(0)));
                        div(a, b)
                    }
                })
            }
            Term::Sum(agg) => {
                let bs = self.binders(&agg.vars)?;
                let parts = self.instances(&bs, &mut |c| {
                    let f = c.formula(&agg.filter)?;
                    if f == G::B(false) {
                        return Ok(G::I(0));
                    }
                    c.path.push(f.clone());
                    let body = c.int(&agg.body);
                    c.path.pop();
                    Ok(ite(f, body?, G::I(0)))
                })?;
                GVal::Int(add(parts))
            }
            Term::Count(vars, filter) => {
                let bs = self.binders(vars)?;
                let parts = self.instances(&bs, &mut |c| {
                    let f = c.formula(filter)?;
                    Ok(ite(f, G::I(1), G::I(0)))
                })?;
                GVal::Int(add(parts))
            }
            Term::Mul(x) => {
                let v = self.term(x)?;
                GVal::Int(self.mul_of(&v))
            }
            Term::Lcm(a, b) => {
                let a = self.int(a)?;
                let b = self.int(b)?;
                GVal::Int(self.lcm(a, b))
            }
            Term::ExactDiv(a, b) => {
                let a = self.int(a)?;
                let b = self.int(b)?;
                GVal::Int(self.exact_div(a, b))
            }
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<G, GroundError> {
        Ok(match f {
            Formula::True => G::B(true),
            Formula::False => G::B(false),
            Formula::Pred(name, args) => {
                let pid = self
                    .ls
                    .problem
                    .vocabulary
                    .predicates
                    .iter()
                    .position(|p| &p.name == name)
                    .ok_or_else(|| GroundError::UnknownSymbol(name.clone()))?;
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                let combos = self.combos(&args);
                let parts = combos
                    .into_iter()
                    .map(|(c, idx)| {
                        let a = self.atom(pid, idx);
                        and(vec![c, a])
                    })
                    .collect();
                or(parts)
            }
            Formula::Cmp(op, l, r) => {
                let a = self.term(l)?;
                let b = self.term(r)?;
                let (a, b) = match (a, b) {
                    (GVal::Int(a), GVal::Int(b)) | (GVal::Dom(_, a), GVal::Dom(_, b)) => (a, b),
                    _ => return Err(GroundError::IllSorted(self.sentence.clone())),
                };
                match op {
                    CmpOp::Eq => eq(a, b),
                    CmpOp::Ne => ne(a, b),
                    CmpOp::Lt => lt(a, b),
                    CmpOp::Le => le(a, b),
                    CmpOp::Gt => lt(b, a),
                    CmpOp::Ge => le(b, a),
                }
            }
            Formula::Conn(c, l, r) => {
                let a = self.formula(l)?;
                match c {
                    Connective::And => {
                        if a == G::B(false) {
                            return Ok(a);
                        }
                        self.path.push(a.clone());
                        let b = self.formula(r);
                        self.path.pop();
                        and(vec![a, b?])
                    }
                    Connective::Or => {
                        if a == G::B(true) {
                            return Ok(a);
                        }
                        self.path.push(not(a.clone()));
                        let b = self.formula(r);
                        self.path.pop();
                        or(vec![a, b?])
                    }
                    Connective::Implies => {
                        if a == G::B(false) {
                            return Ok(G::B(true));
                        }
                        self.path.push(a.clone());
                        let b = self.formula(r);
                        self.path.pop();
                        implies(a, b?)
                    }
                    Connective::Iff => {
                        let b = self.formula(r)?;
                        iff(a, b)
                    }
                }
            }
            Formula::Not(g) => not(self.formula(g)?),
            Formula::Quant(kind, vars, body) => {
                let bs = self.binders(vars)?;
                let parts = self.instances(&bs, &mut |c| c.formula(body))?;
                match kind {
                    QuantKind::Forall => and(parts),
                    QuantKind::Exists => or(parts),
                }
            }
            Formula::TypeExtent(t, n) => {
                let ty = self.type_id(t)?;
                eq(add(self.muls[ty].clone()), G::I(*n as i128))
            }
            Formula::Divides(d, n) => {
                let d = self.int(d)?;
                let n = self.int(n)?;
                divides(d, n)
            }
        })
    }
}

fn types_of_function(ls: &LiftedSentence, name: &str) -> BTreeSet<String> {
    let f = ls.problem.vocabulary.function(name).expect("declared function");
    let mut s: BTreeSet<String> = f.args.iter().cloned().collect();
    if let Sort::Named(r) = &f.result {
        s.insert(r.clone());
    }
    s
}

fn label_types(ls: &LiftedSentence, kind: &SentenceKind, types: BTreeSet<String>) -> BTreeSet<String> {
    match kind {
        SentenceKind::FunctionTuples(f) | SentenceKind::FunctionImage(f) => types_of_function(ls, f),
        _ => types,
    }
}

/// Grounds every labeled sentence over the domain. Each sentence becomes one
/// named assertion; multiplicity ranges, function selector ranges
/// (`dom_<f>`) and monotype slots (`mono_<k>`) are added as well.
pub fn ground(
    ls: &LiftedSentence,
    domain: &LiftedDomain,
    opts: &GroundOptions,
) -> Result<GroundedProblem, GroundError> {
    let vocab = &ls.problem.vocabulary;
    let types = vocab.types.clone();
    let elems: Vec<Vec<String>> = types
        .iter()
        .map(|t| domain.elements.get(t).cloned().unwrap_or_default())
        .collect();
    let mut decls = String::new();
    let mut background = Vec::new();
    let mut mul_vars = Vec::new();
    let upper = match ls.mode {
        TranslationMode::Lifted => opts.max_mul as i128,
        TranslationMode::Concrete => 1,
    };
    let muls: Vec<Vec<G>> = elems
        .iter()
        .map(|es| {
            es.iter()
                .map(|e| match domain.fixed_mul.get(e) {
                    Some(&m) => G::I(m as i128),
                    None => {
                        let sym = quote(&format!("mul_{e}"));
                        let _ = writeln!(decls, "(declare-const {sym} Int)");
                        let g = G::sym(sym.clone());
                        background.push(and(vec![le(G::I(0), g.clone()), le(g.clone(), G::I(upper))]));
                        mul_vars.push((e.clone(), sym));
                        g
                    }
                })
                .collect()
        })
        .collect();

    let mut ctx = Ctx {
        ls,
        opts,
        types,
        elems,
        muls,
        atoms: HashMap::new(),
        atom_list: Vec::new(),
        cells: HashMap::new(),
        env: Vec::new(),
        path: Vec::new(),
        side: Vec::new(),
        decls,
        background,
        fresh: 0,
        lcm_cache: HashMap::new(),
        lcm_table_used: false,
        lcm_bounds: Vec::new(),
        sentence: String::new(),
    };

    let mut labeled: Vec<(String, G)> = Vec::new();
    let mut label_types_map = BTreeMap::new();
    let mut cells = Vec::new();

    // Function selectors for every argument tuple.
    for (fid, f) in vocab.functions.iter().enumerate() {
        let tys: Vec<usize> = f.args.iter().map(|a| ctx.type_id(a)).collect::<Result<_, _>>()?;
        let dims: Vec<usize> = tys.iter().map(|&t| ctx.elems[t].len()).collect();
        let codomain = match &f.result {
            Sort::Int => None,
            Sort::Named(r) => Some(ctx.type_id(r)?),
        };
        let mut range = Vec::new();
        for idx in crate::eval::all_indices(&dims) {
            let tuple = ctx.tuple_names(&tys, &idx);
            let sym = quote(&format!("{}({})", f.name, tuple.join(",")));
            let _ = writeln!(ctx.decls, "(declare-const {sym} Int)");
            let g = G::sym(sym.clone());
            if let Some(r) = codomain {
                range.push(and(vec![
                    le(G::I(0), g.clone()),
                    lt(g.clone(), G::I(ctx.elems[r].len() as i128)),
                ]));
            }
            cells.push(FuncCell {
                func: f.name.clone(),
                tuple,
                sym,
                codomain: codomain.map(|r| ctx.elems[r].clone()),
            });
            ctx.cells.insert((fid, idx), g);
        }
        if let Some(r) = codomain {
            let label = format!("dom_{}", f.name);
            // An empty codomain is what makes a range assertion fail.
            label_types_map.insert(label.clone(), [ctx.types[r].clone()].into());
            labeled.push((label, and(range)));
        }
    }

    for s in &ls.sentences {
        ctx.sentence = s.label.clone();
        ctx.side.clear();
        let g = ctx.formula(&s.formula)?;
        let mut parts = vec![g];
        parts.append(&mut ctx.side);
        labeled.push((s.label.clone(), and(parts)));
        label_types_map.insert(s.label.clone(), label_types(ls, &s.kind, s.types()));
    }

    if let Some(mono) = &opts.monotype {
        for (k, slot) in mono.slots.iter().enumerate() {
            let used: Vec<G> = slot
                .iter()
                .filter_map(|e| {
                    let t = ctx.elems.iter().position(|es| es.contains(e))?;
                    let i = ctx.elems[t].iter().position(|x| x == e)?;
                    Some(lt(G::I(0), ctx.muls[t][i].clone()))
                })
                .collect();
            let mut pairs = Vec::new();
            for i in 0..used.len() {
                for j in i + 1..used.len() {
                    pairs.push(not(and(vec![used[i].clone(), used[j].clone()])));
                }
            }
            if mono.exactly_one {
                pairs.push(or(used.clone()));
            }
            let label = format!("mono_{k}");
            let tys: BTreeSet<String> = slot
                .iter()
                .filter_map(|e| {
                    ctx.elems
                        .iter()
                        .position(|es| es.contains(e))
                        .map(|t| ctx.types[t].clone())
                })
                .collect();
            label_types_map.insert(label.clone(), tys);
            labeled.push((label, and(pairs)));
        }
    }

    let mut script = String::new();
    script.push_str("(set-option :produce-unsat-cores true)\n(set-option :produce-models true)\n");
    if ctx.lcm_table_used {
        script.push_str("(set-logic QF_UFNIA)\n(declare-fun lcm_tab (Int Int) Int)\n");
    } else {
        script.push_str("(set-logic QF_NIA)\n");
    }
    script.push_str(&ctx.decls);
    if let (true, LcmEncoding::Table { bound }) = (ctx.lcm_table_used, opts.lcm) {
        for i in 1..=bound {
            for j in 1..=bound {
                let _ = writeln!(script, "(assert (= (lcm_tab {i} {j}) {}))", i.lcm(&j));
            }
        }
        labeled.push((LCM_BOUND_LABEL.to_string(), and(std::mem::take(&mut ctx.lcm_bounds))));
        label_types_map.insert(LCM_BOUND_LABEL.to_string(), BTreeSet::new());
    }
    for b in &ctx.background {
        if *b != G::B(true) {
            let _ = writeln!(script, "(assert {})", b.smt());
        }
    }
    let mut labels = Vec::new();
    let mut unbounded = ctx.lcm_table_used.then(|| script.clone());
    for (label, g) in &labeled {
        let line = format!("(assert (! {} :named {}))\n", g.smt(), label);
        script.push_str(&line);
        if let Some(u) = unbounded.as_mut().filter(|_| label != LCM_BOUND_LABEL) {
            u.push_str(&line);
        }
        labels.push(label.clone());
    }

    Ok(GroundedProblem {
        mode: ls.mode,
        domain: domain.clone(),
        script,
        unbounded_script: unbounded,
        labels,
        label_types: label_types_map,
        mul_vars,
        atoms: ctx.atom_list,
        cells,
    })
}
