//! Interned structures and a slot-addressed formula IR for fast evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_integer::Integer;
use smallvec::SmallVec;

use super::EvalError;
use crate::ast::{ArithOp, CmpOp, Connective, Formula, QuantKind, Sort, Term, Vocabulary};
use crate::structures::{ConcreteStructure, LiftedStructure, Value};

pub type Ty = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Val {
    Int(i128),
    Elem(Ty, u32),
}

/// Tables up to this many cells are stored densely.
const DENSE_LIMIT: usize = 1 << 27;

#[derive(Clone, Debug)]
enum PredRepr {
    Dense(Vec<u64>),
    Sparse(HashSet<Vec<u32>>),
}

#[derive(Clone, Debug)]
pub struct PredTable {
    pub arg_types: Vec<Ty>,
    strides: Vec<usize>,
    cells: usize,
    repr: PredRepr,
}

#[derive(Clone, Debug)]
enum FuncRepr {
    Dense(Vec<Option<Val>>),
    Sparse(HashMap<Vec<u32>, Val>),
}

#[derive(Clone, Debug)]
pub struct FuncTable {
    pub arg_types: Vec<Ty>,
    /// `None` for integer-valued functions.
    pub result: Option<Ty>,
    strides: Vec<usize>,
    cells: usize,
    repr: FuncRepr,
}

fn strides(dims: &[usize]) -> (Vec<usize>, usize) {
    let mut s = vec![0; dims.len()];
    let mut acc: usize = 1;
    for i in (0..dims.len()).rev() {
        s[i] = acc;
        acc = acc.saturating_mul(dims[i]);
    }
    (s, acc)
}

impl PredTable {
    fn new(arg_types: Vec<Ty>, dims: &[usize]) -> Self {
        let (strides, cells) = strides(dims);
        let repr = if cells <= DENSE_LIMIT {
            PredRepr::Dense(vec![0; cells.div_ceil(64).max(1)])
        } else {
            PredRepr::Sparse(HashSet::new())
        };
        PredTable { arg_types, strides, cells, repr }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    fn offset(&self, idx: &[u32]) -> usize {
        idx.iter().zip(&self.strides).map(|(&i, &s)| i as usize * s).sum()
    }

    pub fn get(&self, idx: &[u32]) -> bool {
        match &self.repr {
            PredRepr::Dense(bits) => {
                let o = self.offset(idx);
                bits[o / 64] >> (o % 64) & 1 == 1
            }
            PredRepr::Sparse(s) => s.contains(idx),
        }
    }

    pub fn set(&mut self, idx: &[u32], value: bool) {
        let o = self.offset(idx);
        match &mut self.repr {
            PredRepr::Dense(bits) => {
                if value {
                    bits[o / 64] |= 1 << (o % 64);
                } else {
                    bits[o / 64] &= !(1 << (o % 64));
                }
            }
            PredRepr::Sparse(s) => {
                if value {
                    s.insert(idx.to_vec());
                } else {
                    s.remove(idx);
                }
            }
        }
    }

    /// Dense cell `o` (only meaningful for dense tables).
    pub fn set_cell(&mut self, o: usize, value: bool) {
        if let PredRepr::Dense(bits) = &mut self.repr {
            if value {
                bits[o / 64] |= 1 << (o % 64);
            } else {
                bits[o / 64] &= !(1 << (o % 64));
            }
        }
    }

    fn true_tuples(&self, dims: &[usize]) -> Vec<Vec<u32>> {
        match &self.repr {
            PredRepr::Sparse(s) => {
                let mut v: Vec<_> = s.iter().cloned().collect();
                v.sort();
                v
            }
            PredRepr::Dense(_) => all_indices(dims).into_iter().filter(|i| self.get(i)).collect(),
        }
    }
}

impl FuncTable {
    fn new(arg_types: Vec<Ty>, result: Option<Ty>, dims: &[usize]) -> Self {
        let (strides, cells) = strides(dims);
        let repr = if cells <= DENSE_LIMIT {
            FuncRepr::Dense(vec![None; cells])
        } else {
            FuncRepr::Sparse(HashMap::new())
        };
        FuncTable { arg_types, result, strides, cells, repr }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    fn offset(&self, idx: &[u32]) -> usize {
        idx.iter().zip(&self.strides).map(|(&i, &s)| i as usize * s).sum()
    }

    pub fn get(&self, idx: &[u32]) -> Option<Val> {
        match &self.repr {
            FuncRepr::Dense(v) => v[self.offset(idx)],
            FuncRepr::Sparse(m) => m.get(idx).copied(),
        }
    }

    pub fn set(&mut self, idx: &[u32], value: Val) {
        let o = self.offset(idx);
        match &mut self.repr {
            FuncRepr::Dense(v) => v[o] = Some(value),
            FuncRepr::Sparse(m) => {
                m.insert(idx.to_vec(), value);
            }
        }
    }

    pub fn set_cell(&mut self, o: usize, value: Val) {
        if let FuncRepr::Dense(v) = &mut self.repr {
            v[o] = Some(value);
        }
    }
}

/// All index tuples over the given dimensions, lexicographic.
pub fn all_indices(dims: &[usize]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &d in dims {
        let mut next = Vec::with_capacity(out.len() * d);
        for p in &out {
            for i in 0..d as u32 {
                let mut t = p.clone();
                t.push(i);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// A structure with interned elements. Multiplicities are all 1 for
/// concrete structures.
#[derive(Clone, Debug)]
pub struct Model {
    pub type_names: Vec<String>,
    pub elems: Vec<Vec<String>>,
    index: HashMap<String, (Ty, u32)>,
    pub mul: Vec<Vec<u64>>,
    pub preds: Vec<PredTable>,
    pred_ids: HashMap<String, usize>,
    pub funcs: Vec<FuncTable>,
    func_ids: HashMap<String, usize>,
}

impl Model {
    /// Empty tables over the given element lists (in vocabulary type order).
    pub fn with_elements(vocab: &Vocabulary, elems: Vec<Vec<String>>) -> Result<Model, EvalError> {
        let mut index = HashMap::new();
        for (t, es) in elems.iter().enumerate() {
            for (i, e) in es.iter().enumerate() {
                if index.insert(e.clone(), (t as Ty, i as u32)).is_some() {
                    return Err(EvalError::Structure(format!("element `{e}` occurs twice")));
                }
            }
        }
        let ty = |name: &str| -> Result<Ty, EvalError> {
            vocab
                .type_index(name)
                .map(|i| i as Ty)
                .ok_or_else(|| EvalError::Structure(format!("unknown type `{name}`")))
        };
        let mut preds = Vec::new();
        let mut pred_ids = HashMap::new();
        for p in &vocab.predicates {
            let tys = p.args.iter().map(|a| ty(a)).collect::<Result<Vec<_>, _>>()?;
            let dims: Vec<usize> = tys.iter().map(|&t| elems[t as usize].len()).collect();
            pred_ids.insert(p.name.clone(), preds.len());
            preds.push(PredTable::new(tys, &dims));
        }
        let mut funcs = Vec::new();
        let mut func_ids = HashMap::new();
        for f in &vocab.functions {
            let tys = f.args.iter().map(|a| ty(a)).collect::<Result<Vec<_>, _>>()?;
            let dims: Vec<usize> = tys.iter().map(|&t| elems[t as usize].len()).collect();
            let result = match &f.result {
                Sort::Int => None,
                Sort::Named(n) => Some(ty(n)?),
            };
            func_ids.insert(f.name.clone(), funcs.len());
            funcs.push(FuncTable::new(tys, result, &dims));
        }
        let mul = elems.iter().map(|es| vec![1; es.len()]).collect();
        Ok(Model {
            type_names: vocab.types.clone(),
            elems,
            index,
            mul,
            preds,
            pred_ids,
            funcs,
            func_ids,
        })
    }

    fn fill(
        vocab: &Vocabulary,
        domains: &BTreeMap<String, BTreeSet<String>>,
        predicates: &BTreeMap<String, BTreeSet<Vec<String>>>,
        functions: &BTreeMap<String, BTreeMap<Vec<String>, Value>>,
    ) -> Result<Model, EvalError> {
        let elems = vocab
            .types
            .iter()
            .map(|t| {
                domains
                    .get(t)
                    .map(|s| s.iter().cloned().collect())
                    .ok_or_else(|| EvalError::Structure(format!("missing type `{t}`")))
            })
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        let mut m = Model::with_elements(vocab, elems)?;
        for (name, tuples) in predicates {
            let Some(&pid) = m.pred_ids.get(name) else { continue };
            for t in tuples {
                let idx = m.intern_tuple(t, &m.preds[pid].arg_types.clone(), name)?;
                m.preds[pid].set(&idx, true);
            }
        }
        for f in &vocab.functions {
            let fid = m.func_ids[&f.name];
            let graph = functions
                .get(&f.name)
                .ok_or_else(|| EvalError::Structure(format!("missing function `{}`", f.name)))?;
            let mut count = 0usize;
            for (args, v) in graph {
                let idx = m.intern_tuple(args, &m.funcs[fid].arg_types.clone(), &f.name)?;
                let val = match (v, m.funcs[fid].result) {
                    (Value::Int(i), None) => Val::Int(*i as i128),
                    (Value::Elem(e), Some(t)) => match m.index.get(e) {
                        Some(&(et, ei)) if et == t => Val::Elem(et, ei),
                        _ => {
                            return Err(EvalError::Structure(format!(
                                "ill-typed value `{e}` for `{}`",
                                f.name
                            )))
                        }
                    },
                    _ => {
                        return Err(EvalError::Structure(format!(
                            "ill-typed value {v} for `{}`",
                            f.name
                        )))
                    }
                };
                m.funcs[fid].set(&idx, val);
                count += 1;
            }
            if count != m.funcs[fid].cells {
                return Err(EvalError::Structure(format!(
                    "function `{}` is not total ({count} of {} tuples)",
                    f.name, m.funcs[fid].cells
                )));
            }
        }
        Ok(m)
    }

    fn intern_tuple(&self, t: &[String], tys: &[Ty], sym: &str) -> Result<Vec<u32>, EvalError> {
        if t.len() != tys.len() {
            return Err(EvalError::Structure(format!("wrong arity tuple in `{sym}`")));
        }
        t.iter()
            .zip(tys)
            .map(|(e, &ty)| match self.index.get(e) {
                Some(&(et, i)) if et == ty => Ok(i),
                _ => Err(EvalError::Structure(format!("ill-typed element `{e}` in `{sym}`"))),
            })
            .collect()
    }

    pub fn from_concrete(vocab: &Vocabulary, s: &ConcreteStructure) -> Result<Model, EvalError> {
        Model::fill(vocab, &s.domains, &s.predicates, &s.functions)
    }

    pub fn from_lifted(vocab: &Vocabulary, l: &LiftedStructure) -> Result<Model, EvalError> {
        let mut m = Model::fill(vocab, &l.domains, &l.predicates, &l.functions)?;
        for (t, es) in m.elems.iter().enumerate() {
            for (i, e) in es.iter().enumerate() {
                m.mul[t][i] = l.mul_of(e);
            }
        }
        Ok(m)
    }

    pub fn pred_id(&self, name: &str) -> Option<usize> {
        self.pred_ids.get(name).copied()
    }

    pub fn func_id(&self, name: &str) -> Option<usize> {
        self.func_ids.get(name).copied()
    }

    pub fn elem_name(&self, t: Ty, i: u32) -> &str {
        &self.elems[t as usize][i as usize]
    }

    pub fn val_to_value(&self, v: Val) -> Value {
        match v {
            Val::Int(i) => Value::Int(i as i64),
            Val::Elem(t, i) => Value::Elem(self.elem_name(t, i).to_string()),
        }
    }

    pub fn value_to_val(&self, v: &Value) -> Option<Val> {
        match v {
            Value::Int(i) => Some(Val::Int(*i as i128)),
            Value::Elem(e) => self.index.get(e).map(|&(t, i)| Val::Elem(t, i)),
        }
    }

    pub fn to_concrete(&self, vocab: &Vocabulary) -> ConcreteStructure {
        let mut s = ConcreteStructure::empty(vocab);
        for (t, name) in self.type_names.iter().enumerate() {
            s.domains.insert(name.clone(), self.elems[t].iter().cloned().collect());
        }
        let dims_of = |tys: &[Ty]| tys.iter().map(|&t| self.elems[t as usize].len()).collect::<Vec<_>>();
        for p in &vocab.predicates {
            let tab = &self.preds[self.pred_ids[&p.name]];
            let tuples = tab
                .true_tuples(&dims_of(&tab.arg_types))
                .into_iter()
                .map(|idx| {
                    idx.iter()
                        .zip(&tab.arg_types)
                        .map(|(&i, &t)| self.elem_name(t, i).to_string())
                        .collect()
                })
                .collect();
            s.predicates.insert(p.name.clone(), tuples);
        }
        for f in &vocab.functions {
            let tab = &self.funcs[self.func_ids[&f.name]];
            let mut g = BTreeMap::new();
            for idx in all_indices(&dims_of(&tab.arg_types)) {
                if let Some(v) = tab.get(&idx) {
                    let args = idx
                        .iter()
                        .zip(&tab.arg_types)
                        .map(|(&i, &t)| self.elem_name(t, i).to_string())
                        .collect();
                    g.insert(args, self.val_to_value(v));
                }
            }
            s.functions.insert(f.name.clone(), g);
        }
        s
    }

    fn mul_of(&self, v: Val) -> u64 {
        match v {
            Val::Int(_) => 1,
            Val::Elem(t, i) => self.mul[t as usize][i as usize],
        }
    }
}

#[derive(Clone, Debug)]
pub enum CT {
    Var(usize),
    Int(i128),
    App(usize, Vec<CT>),
    Arith(ArithOp, Box<CT>, Box<CT>),
    Sum(Vec<(usize, Ty)>, Box<CF>, Box<CT>),
    Mul(Box<CT>),
    Lcm(Box<CT>, Box<CT>),
    ExactDiv(Box<CT>, Box<CT>),
}

#[derive(Clone, Debug)]
pub enum CF {
    True,
    False,
    Pred(usize, Vec<CT>),
    Cmp(CmpOp, CT, CT),
    Conn(Connective, Box<CF>, Box<CF>),
    Not(Box<CF>),
    Quant(QuantKind, Vec<(usize, Ty)>, Box<CF>),
    Extent(Ty, u64),
    Divides(CT, CT),
}

/// Resolves names to slots and table ids.
pub struct Compiler<'a> {
    model: &'a Model,
    vocab: &'a Vocabulary,
    scope: Vec<(String, usize)>,
    pub slot_names: Vec<String>,
}

impl<'a> Compiler<'a> {
    pub fn new(model: &'a Model, vocab: &'a Vocabulary) -> Self {
        Compiler {
            model,
            vocab,
            scope: Vec::new(),
            slot_names: Vec::new(),
        }
    }

    /// Declares a free variable; returns its slot.
    pub fn bind(&mut self, name: &str) -> usize {
        let slot = self.slot_names.len();
        self.slot_names.push(name.to_string());
        self.scope.push((name.to_string(), slot));
        slot
    }

    fn binders(&mut self, vars: &[crate::ast::Var]) -> Result<Vec<(usize, Ty)>, EvalError> {
        vars.iter()
            .map(|v| {
                let t = match &v.sort {
                    Sort::Named(t) => self
                        .vocab
                        .type_index(t)
                        .ok_or_else(|| EvalError::Structure(format!("unknown type `{t}`")))?,
                    Sort::Int => return Err(EvalError::InfiniteRange(v.name.clone())),
                };
                Ok((self.bind(&v.name), t as Ty))
            })
            .collect()
    }

    pub fn term(&mut self, t: &Term) -> Result<CT, EvalError> {
        Ok(match t {
            Term::Var(v) => {
                let slot = self
                    .scope
                    .iter()
                    .rev()
                    .find(|(n, _)| *n == v.name)
                    .map(|(_, s)| *s)
                    .ok_or_else(|| EvalError::Unassigned(v.name.clone()))?;
                CT::Var(slot)
            }
            Term::Int(n) => CT::Int(*n as i128),
            Term::App(name, args) => {
                let id = self
                    .model
                    .func_id(name)
                    .ok_or_else(|| EvalError::Structure(format!("unknown function `{name}`")))?;
                CT::App(id, args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?)
            }
            Term::Arith(op, l, r) => CT::Arith(*op, Box::new(self.term(l)?), Box::new(self.term(r)?)),
            Term::Sum(agg) => {
                let depth = self.scope.len();
                let bs = self.binders(&agg.vars)?;
                let f = self.formula(&agg.filter)?;
                let b = self.term(&agg.body)?;
                self.scope.truncate(depth);
                CT::Sum(bs, Box::new(f), Box::new(b))
            }
            Term::Count(vars, filter) => {
                let depth = self.scope.len();
                let bs = self.binders(vars)?;
                let f = self.formula(filter)?;
                self.scope.truncate(depth);
                CT::Sum(bs, Box::new(f), Box::new(CT::Int(1)))
            }
            Term::Mul(x) => CT::Mul(Box::new(self.term(x)?)),
            Term::Lcm(a, b) => CT::Lcm(Box::new(self.term(a)?), Box::new(self.term(b)?)),
            Term::ExactDiv(a, b) => CT::ExactDiv(Box::new(self.term(a)?), Box::new(self.term(b)?)),
        })
    }

    pub fn formula(&mut self, f: &Formula) -> Result<CF, EvalError> {
        Ok(match f {
            Formula::True => CF::True,
            Formula::False => CF::False,
            Formula::Pred(name, args) => {
                let id = self
                    .model
                    .pred_id(name)
                    .ok_or_else(|| EvalError::Structure(format!("unknown predicate `{name}`")))?;
                CF::Pred(id, args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?)
            }
            Formula::Cmp(op, l, r) => CF::Cmp(*op, self.term(l)?, self.term(r)?),
            Formula::Conn(c, l, r) => CF::Conn(*c, Box::new(self.formula(l)?), Box::new(self.formula(r)?)),
            Formula::Not(g) => CF::Not(Box::new(self.formula(g)?)),
            Formula::Quant(k, vars, body) => {
                let depth = self.scope.len();
                let bs = self.binders(vars)?;
                let b = self.formula(body)?;
                self.scope.truncate(depth);
                CF::Quant(*k, bs, Box::new(b))
            }
            Formula::TypeExtent(t, n) => {
                let ty = self
                    .vocab
                    .type_index(t)
                    .ok_or_else(|| EvalError::Structure(format!("unknown type `{t}`")))?;
                CF::Extent(ty as Ty, *n)
            }
            Formula::Divides(d, n) => CF::Divides(self.term(d)?, self.term(n)?),
        })
    }
}

fn int(v: Val) -> Result<i128, EvalError> {
    match v {
        Val::Int(i) => Ok(i),
        Val::Elem(..) => Err(EvalError::Structure("domain element used as a number".into())),
    }
}

fn ovf<T>(x: Option<T>) -> Result<T, EvalError> {
    x.ok_or(EvalError::Overflow)
}

impl Model {
    /// Calls `body` once per assignment of the binders (lexicographic);
    /// stops early when it returns `Ok(false)`. Returns whether it ran to
    /// completion.
    pub fn for_each(
        &self,
        binders: &[(usize, Ty)],
        env: &mut Vec<Val>,
        body: &mut dyn FnMut(&mut Vec<Val>) -> Result<bool, EvalError>,
    ) -> Result<bool, EvalError> {
        let dims: Vec<u32> = binders
            .iter()
            .map(|&(_, t)| self.elems[t as usize].len() as u32)
            .collect();
        if dims.contains(&0) {
            return Ok(true);
        }
        let mut idx = vec![0u32; binders.len()];
        for (k, &(slot, t)) in binders.iter().enumerate() {
            ensure_slot(env, slot);
            env[slot] = Val::Elem(t, idx[k]);
        }
        loop {
            if !body(env)? {
                return Ok(false);
            }
            let mut k = binders.len();
            loop {
                if k == 0 {
                    return Ok(true);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < dims[k] {
                    env[binders[k].0] = Val::Elem(binders[k].1, idx[k]);
                    break;
                }
                idx[k] = 0;
                env[binders[k].0] = Val::Elem(binders[k].1, 0);
            }
        }
    }

    pub fn term(&self, t: &CT, env: &mut Vec<Val>) -> Result<Val, EvalError> {
        Ok(match t {
            CT::Var(s) => *env.get(*s).ok_or(EvalError::Unassigned(format!("slot {s}")))?,
            CT::Int(n) => Val::Int(*n),
            CT::App(f, args) => {
                let mut idx: SmallVec<[u32; 4]> = SmallVec::new();
                for a in args {
                    match self.term(a, env)? {
                        Val::Elem(_, i) => idx.push(i),
                        Val::Int(_) => {
                            return Err(EvalError::Structure("integer used as a domain argument".into()))
                        }
                    }
                }
                self.funcs[*f]
                    .get(&idx)
                    .ok_or_else(|| EvalError::Structure("function table is not total".into()))?
            }
            CT::Arith(op, l, r) => {
                let a = int(self.term(l, env)?)?;
                let b = int(self.term(r, env)?)?;
                Val::Int(match op {
                    ArithOp::Add => ovf(a.checked_add(b))?,
                    ArithOp::Sub => ovf(a.checked_sub(b))?,
                    ArithOp::Mul => ovf(a.checked_mul(b))?,
                    ArithOp::Div => {
                        if b == 0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        a.div_euclid(b)
                    }
                })
            }
            CT::Sum(bs, filter, body) => {
                if let (CT::Int(k), [(slot, _)]) = (body.as_ref(), bs.as_slice()) {
                    if let Some(n) = self.count_atom(*slot, filter, env) {
                        return Ok(Val::Int(ovf((n as i128).checked_mul(*k))?));
                    }
                }
                let mut total: i128 = 0;
                self.for_each(bs, env, &mut |env| {
                    if self.formula(filter, env)? {
                        total = ovf(total.checked_add(int(self.term(body, env)?)?))?;
                    }
                    Ok(true)
                })?;
                Val::Int(total)
            }
            CT::Mul(x) => {
                let v = self.term(x, env)?;
                Val::Int(self.mul_of(v) as i128)
            }
            CT::Lcm(a, b) => {
                let a = int(self.term(a, env)?)?;
                let b = int(self.term(b, env)?)?;
                Val::Int(if a == 0 || b == 0 { 0 } else { a.lcm(&b) })
            }
            CT::ExactDiv(a, b) => {
                let a = int(self.term(a, env)?)?;
                let b = int(self.term(b, env)?)?;
                if b == 0 {
                    Val::Int(0)
                } else if a % b != 0 {
                    return Err(EvalError::InexactDivision(a as i64, b as i64));
                } else {
                    Val::Int(a / b)
                }
            }
        })
    }

    /// Fast count of the values of `slot` satisfying an atom whose
    /// arguments are all variables, `slot` occurring exactly once:
    /// `p(.., x, ..)` or `f(.., x, ..) = y`. `None` when not applicable.
    fn count_atom(&self, slot: usize, filter: &CF, env: &[Val]) -> Option<u64> {
        let args_of = |args: &[CT]| -> Option<(SmallVec<[u32; 4]>, usize)> {
            let mut idx = SmallVec::new();
            let mut pos = None;
            for (k, a) in args.iter().enumerate() {
                let CT::Var(s) = a else { return None };
                if *s == slot {
                    if pos.is_some() {
                        return None;
                    }
                    pos = Some(k);
                    idx.push(0);
                } else {
                    match env.get(*s)? {
                        Val::Elem(_, i) => idx.push(*i),
                        Val::Int(_) => return None,
                    }
                }
            }
            Some((idx, pos?))
        };
        match filter {
            CF::Pred(p, args) => {
                let (mut idx, pos) = args_of(args)?;
                let tab = &self.preds[*p];
                let n = self.elems[tab.arg_types[pos] as usize].len() as u32;
                let mut c = 0;
                for i in 0..n {
                    idx[pos] = i;
                    c += u64::from(tab.get(&idx));
                }
                Some(c)
            }
            CF::Cmp(CmpOp::Eq, l, r) => {
                let (app, other) = match (l, r) {
                    (CT::App(..), CT::Var(_)) => (l, r),
                    (CT::Var(_), CT::App(..)) => (r, l),
                    _ => return None,
                };
                let (CT::App(f, args), CT::Var(o)) = (app, other) else { return None };
                if *o == slot {
                    return None;
                }
                let target = *env.get(*o)?;
                let (mut idx, pos) = args_of(args)?;
                let tab = &self.funcs[*f];
                let n = self.elems[tab.arg_types[pos] as usize].len() as u32;
                let mut c = 0;
                for i in 0..n {
                    idx[pos] = i;
                    c += u64::from(tab.get(&idx)? == target);
                }
                Some(c)
            }
            _ => None,
        }
    }

    pub fn formula(&self, f: &CF, env: &mut Vec<Val>) -> Result<bool, EvalError> {
        Ok(match f {
            CF::True => true,
            CF::False => false,
            CF::Pred(p, args) => {
                let mut idx: SmallVec<[u32; 4]> = SmallVec::new();
                for a in args {
                    match self.term(a, env)? {
                        Val::Elem(_, i) => idx.push(i),
                        Val::Int(_) => {
                            return Err(EvalError::Structure("integer used as a domain argument".into()))
                        }
                    }
                }
                self.preds[*p].get(&idx)
            }
            CF::Cmp(op, l, r) => {
                let a = self.term(l, env)?;
                let b = self.term(r, env)?;
                match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => int(a)? < int(b)?,
                    CmpOp::Gt => int(a)? > int(b)?,
                    CmpOp::Le => int(a)? <= int(b)?,
                    CmpOp::Ge => int(a)? >= int(b)?,
                }
            }
            CF::Conn(c, l, r) => match c {
                Connective::And => self.formula(l, env)? && self.formula(r, env)?,
                Connective::Or => self.formula(l, env)? || self.formula(r, env)?,
                Connective::Implies => !self.formula(l, env)? || self.formula(r, env)?,
                Connective::Iff => self.formula(l, env)? == self.formula(r, env)?,
            },
            CF::Not(g) => !self.formula(g, env)?,
            CF::Quant(QuantKind::Forall, bs, body) => {
                self.for_each(bs, env, &mut |env| self.formula(body, env))?
            }
            CF::Quant(QuantKind::Exists, bs, body) => {
                !self.for_each(bs, env, &mut |env| Ok(!self.formula(body, env)?))?
            }
            CF::Extent(t, n) => self.elems[*t as usize].len() as u64 == *n,
            CF::Divides(d, n) => {
                let d = int(self.term(d, env)?)?;
                let n = int(self.term(n, env)?)?;
                if d == 0 {
                    n == 0
                } else {
                    n % d == 0
                }
            }
        })
    }
}

pub fn ensure_slot(env: &mut Vec<Val>, slot: usize) {
    if env.len() <= slot {
        env.resize(slot + 1, Val::Int(0));
    }
}
