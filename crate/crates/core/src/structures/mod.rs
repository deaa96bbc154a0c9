//! Concrete and lifted structures, domain permutations, regularity and
//! expansion.

mod expansion;
mod permutation;
mod regularity;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use expansion::{
    expand_structure, expanded_name, expansion_permutation, is_automorphism, is_backbone,
    lift_along, lift_trivial, transform_structure, ExpansionError,
};
pub use permutation::{CyclePermutation, PermutationError};
pub use regularity::{
    check_function_regularity, expand_lifted_tuple, expand_tuple, is_regular_tuple, lcm_of,
    mul_product, FunctionRegularity, IrregularReason, RegularityMode,
};

use crate::ast::{Sort, Vocabulary};

/// A domain element or an integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Elem(String),
}

impl Value {
    pub fn elem(name: &str) -> Value {
        Value::Elem(name.to_string())
    }

    pub fn as_elem(&self) -> Option<&str> {
        match self {
            Value::Elem(e) => Some(e),
            Value::Int(_) => None,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Elem(e) => f.write_str(e),
        }
    }
}

pub type Tuple = Vec<String>;
pub type FunctionGraph = BTreeMap<Tuple, Value>;

/// Function tables serialize as `{"f": [[["a","b"], "c"], ...]}` since JSON
/// object keys must be strings.
mod graph_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<String, FunctionGraph>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let flat: BTreeMap<&String, Vec<(&Tuple, &Value)>> =
            m.iter().map(|(k, g)| (k, g.iter().collect())).collect();
        flat.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, FunctionGraph>, D::Error> {
        let flat: BTreeMap<String, Vec<(Tuple, Value)>> = BTreeMap::deserialize(d)?;
        Ok(flat
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect())
    }
}

/// A structure over a finite domain. Types are disjoint element sets;
/// predicates are tuple sets; functions are total graphs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcreteStructure {
    pub domains: BTreeMap<String, BTreeSet<String>>,
    pub predicates: BTreeMap<String, BTreeSet<Tuple>>,
    #[serde(with = "graph_serde")]
    pub functions: BTreeMap<String, FunctionGraph>,
}

/// A structure over a lifted domain, where each element stands for `mul`
/// concrete elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedStructure {
    pub domains: BTreeMap<String, BTreeSet<String>>,
    pub mul: BTreeMap<String, u64>,
    pub predicates: BTreeMap<String, BTreeSet<Tuple>>,
    #[serde(with = "graph_serde")]
    pub functions: BTreeMap<String, FunctionGraph>,
}

fn type_index(domains: &BTreeMap<String, BTreeSet<String>>) -> BTreeMap<&str, &str> {
    domains
        .iter()
        .flat_map(|(t, es)| es.iter().map(move |e| (e.as_str(), t.as_str())))
        .collect()
}

/// All tuples over the given element lists, in lexicographic order.
pub fn cross_product<'a>(lists: &[&'a BTreeSet<String>]) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::with_capacity(out.len() * l.len());
        for prefix in &out {
            for e in l.iter() {
                let mut t = prefix.clone();
                t.push(e.as_str());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Checks shape against a vocabulary: every type present, disjoint domains,
/// tuples drawn from the declared argument types, functions total.
fn check_shape(
    vocab: &Vocabulary,
    domains: &BTreeMap<String, BTreeSet<String>>,
    predicates: &BTreeMap<String, BTreeSet<Tuple>>,
    functions: &BTreeMap<String, FunctionGraph>,
) -> Result<(), String> {
    let owner = type_index(domains);
    let total: usize = domains.values().map(BTreeSet::len).sum();
    if owner.len() != total {
        return Err("type interpretations are not disjoint".into());
    }
    for t in &vocab.types {
        if !domains.contains_key(t) {
            return Err(format!("missing interpretation of type `{t}`"));
        }
    }
    let in_type = |e: &str, t: &str| owner.get(e).is_some_and(|o| *o == t);
    for p in &vocab.predicates {
        for tuple in predicates.get(&p.name).into_iter().flatten() {
            if tuple.len() != p.args.len() || !tuple.iter().zip(&p.args).all(|(e, t)| in_type(e, t)) {
                return Err(format!("ill-typed tuple {tuple:?} in `{}`", p.name));
            }
        }
    }
    for f in &vocab.functions {
        let graph = functions
            .get(&f.name)
            .ok_or_else(|| format!("missing interpretation of `{}`", f.name))?;
        let expected: usize = f
            .args
            .iter()
            .map(|t| domains.get(t).map_or(0, BTreeSet::len))
            .product();
        if graph.len() != expected {
            return Err(format!(
                "`{}` is not total: {} of {expected} argument tuples mapped",
                f.name,
                graph.len()
            ));
        }
        for (args, v) in graph {
            if args.len() != f.args.len() || !args.iter().zip(&f.args).all(|(e, t)| in_type(e, t)) {
                return Err(format!("ill-typed argument tuple {args:?} in `{}`", f.name));
            }
            let ok = match (&f.result, v) {
                (Sort::Int, Value::Int(_)) => true,
                (Sort::Named(t), Value::Elem(e)) => in_type(e, t),
                _ => false,
            };
            if !ok {
                return Err(format!("ill-typed value {v} for `{}`", f.name));
            }
        }
    }
    Ok(())
}

impl ConcreteStructure {
    /// Empty interpretations for every symbol of the vocabulary.
    pub fn empty(vocab: &Vocabulary) -> Self {
        ConcreteStructure {
            domains: vocab.types.iter().map(|t| (t.clone(), BTreeSet::new())).collect(),
            predicates: vocab
                .predicates
                .iter()
                .map(|p| (p.name.clone(), BTreeSet::new()))
                .collect(),
            functions: vocab
                .functions
                .iter()
                .map(|f| (f.name.clone(), BTreeMap::new()))
                .collect(),
        }
    }

    pub fn type_of(&self, elem: &str) -> Option<&str> {
        self.domains
            .iter()
            .find(|(_, es)| es.contains(elem))
            .map(|(t, _)| t.as_str())
    }

    pub fn size(&self) -> usize {
        self.domains.values().map(BTreeSet::len).sum()
    }

    pub fn check_shape(&self, vocab: &Vocabulary) -> Result<(), String> {
        check_shape(vocab, &self.domains, &self.predicates, &self.functions)
    }

    pub fn holds(&self, pred: &str, args: &[&str]) -> bool {
        self.predicates
            .get(pred)
            .is_some_and(|s| s.iter().any(|t| t.iter().map(String::as_str).eq(args.iter().copied())))
    }
}

impl LiftedStructure {
    pub fn empty(vocab: &Vocabulary) -> Self {
        let c = ConcreteStructure::empty(vocab);
        LiftedStructure {
            domains: c.domains,
            mul: BTreeMap::new(),
            predicates: c.predicates,
            functions: c.functions,
        }
    }

    /// Multiplicity of an element; unknown elements count as 1, matching the
    /// convention for integers.
    pub fn mul_of(&self, elem: &str) -> u64 {
        self.mul.get(elem).copied().unwrap_or(1)
    }

    pub fn value_mul(&self, v: &Value) -> u64 {
        match v {
            Value::Int(_) => 1,
            Value::Elem(e) => self.mul_of(e),
        }
    }

    pub fn type_of(&self, elem: &str) -> Option<&str> {
        self.domains
            .iter()
            .find(|(_, es)| es.contains(elem))
            .map(|(t, _)| t.as_str())
    }

    pub fn check_shape(&self, vocab: &Vocabulary) -> Result<(), String> {
        check_shape(vocab, &self.domains, &self.predicates, &self.functions)
    }

    /// Sum of multiplicities per type.
    pub fn concrete_sizes(&self) -> BTreeMap<String, u64> {
        self.domains
            .iter()
            .map(|(t, es)| (t.clone(), es.iter().map(|e| self.mul_of(e)).sum()))
            .collect()
    }

    /// Applies an element renaming everywhere.
    pub fn rename(&self, f: impl Fn(&str) -> String) -> LiftedStructure {
        let rn_tuple = |t: &Tuple| t.iter().map(|e| f(e)).collect::<Tuple>();
        LiftedStructure {
            domains: self
                .domains
                .iter()
                .map(|(t, es)| (t.clone(), es.iter().map(|e| f(e)).collect()))
                .collect(),
            mul: self.mul.iter().map(|(e, m)| (f(e), *m)).collect(),
            predicates: self
                .predicates
                .iter()
                .map(|(p, ts)| (p.clone(), ts.iter().map(rn_tuple).collect()))
                .collect(),
            functions: self
                .functions
                .iter()
                .map(|(n, g)| {
                    let g = g
                        .iter()
                        .map(|(a, v)| {
                            let v = match v {
                                Value::Elem(e) => Value::Elem(f(e)),
                                Value::Int(i) => Value::Int(*i),
                            };
                            (rn_tuple(a), v)
                        })
                        .collect();
                    (n.clone(), g)
                })
                .collect(),
        }
    }
}
