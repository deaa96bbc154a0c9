use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use thiserror::Error;

use super::{
    check_function_regularity, expand_lifted_tuple, lcm_of, mul_product, type_index,
    ConcreteStructure, CyclePermutation, FunctionGraph, IrregularReason, LiftedStructure,
    FunctionRegularity, RegularityMode, Tuple, Value,
};
use crate::ast::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpansionError {
    #[error("malformed structure: {0}")]
    Malformed(String),
    #[error("function `{name}` is not regular at {witness:?}: {reason:?}")]
    IrregularFunction {
        name: String,
        witness: Tuple,
        reason: IrregularReason,
    },
    #[error("permutation moves `{0}` outside its type")]
    CrossesTypes(String),
}

/// Name of the `j`-th concrete copy of a lifted element (`j` from 1).
pub fn expanded_name(lifted: &str, j: u64) -> String {
    format!("{lifted}#{j}")
}

/// Cycles `(l#1 l#2 … l#mul(l))` for every lifted element with positive
/// multiplicity.
pub fn expansion_permutation(l: &LiftedStructure) -> CyclePermutation {
    let cycles = l
        .domains
        .values()
        .flatten()
        .filter(|e| l.mul_of(e) > 0)
        .map(|e| (1..=l.mul_of(e)).map(|j| expanded_name(e, j)).collect())
        .collect();
    CyclePermutation::new(cycles).expect("lifted element names are unique")
}

/// Expands a regular lifted structure. Function regularity is checked first
/// (exact mode); an irregular function refuses the expansion.
pub fn expand_structure(
    l: &LiftedStructure,
    vocab: &Vocabulary,
) -> Result<(ConcreteStructure, CyclePermutation), ExpansionError> {
    l.check_shape(vocab).map_err(ExpansionError::Malformed)?;
    for f in &vocab.functions {
        if let FunctionRegularity::Irregular { witness, reason } =
            check_function_regularity(&l.functions[&f.name], |e| l.mul_of(e), RegularityMode::Exact)
        {
            return Err(ExpansionError::IrregularFunction {
                name: f.name.clone(),
                witness,
                reason,
            });
        }
    }
    let mut out = ConcreteStructure::empty(vocab);
    for (t, es) in &l.domains {
        let d = out.domains.entry(t.clone()).or_default();
        for e in es {
            d.extend((1..=l.mul_of(e)).map(|j| expanded_name(e, j)));
        }
    }
    for (p, tuples) in &l.predicates {
        let target = out.predicates.entry(p.clone()).or_default();
        for tuple in tuples {
            target.extend(expand_lifted_tuple(tuple, |e| l.mul_of(e)));
        }
    }
    for (name, graph) in &l.functions {
        let target = out.functions.entry(name.clone()).or_default();
        for (args, v) in graph {
            let muls: Vec<u64> = args.iter().map(|e| l.mul_of(e)).collect();
            let vm = l.value_mul(v);
            if mul_product(&muls) == 0 || vm == 0 {
                continue;
            }
            let steps = lcm_of(&muls).lcm(&vm);
            for i in 0..steps {
                let key = args
                    .iter()
                    .zip(&muls)
                    .map(|(e, &m)| expanded_name(e, i % m + 1))
                    .collect();
                let img = match v {
                    Value::Int(_) => v.clone(),
                    Value::Elem(e) => Value::Elem(expanded_name(e, i % vm + 1)),
                };
                target.insert(key, img);
            }
        }
    }
    Ok((out, expansion_permutation(l)))
}

fn check_within_types(i: &ConcreteStructure, pi: &CyclePermutation) -> Result<(), ExpansionError> {
    let owner = type_index(&i.domains);
    for cycle in pi.cycles() {
        let t = owner.get(cycle[0].as_str());
        if t.is_none() || cycle.iter().any(|e| owner.get(e.as_str()) != t) {
            let bad = cycle
                .iter()
                .find(|e| owner.get(e.as_str()) != t || t.is_none())
                .unwrap_or(&cycle[0]);
            return Err(ExpansionError::CrossesTypes(bad.clone()));
        }
    }
    Ok(())
}

/// `π(I)`: every tuple and graph entry mapped through `π`.
pub fn transform_structure(
    i: &ConcreteStructure,
    pi: &CyclePermutation,
) -> Result<ConcreteStructure, ExpansionError> {
    check_within_types(i, pi)?;
    Ok(ConcreteStructure {
        domains: i.domains.clone(),
        predicates: i
            .predicates
            .iter()
            .map(|(p, ts)| (p.clone(), ts.iter().map(|t| pi.apply_tuple(t)).collect()))
            .collect(),
        functions: i
            .functions
            .iter()
            .map(|(f, g)| {
                let g = g
                    .iter()
                    .map(|(a, v)| (pi.apply_tuple(a), pi.apply_value(v)))
                    .collect();
                (f.clone(), g)
            })
            .collect(),
    })
}

pub fn is_automorphism(i: &ConcreteStructure, pi: &CyclePermutation) -> bool {
    transform_structure(i, pi).is_ok_and(|t| t == *i)
}

fn in_backbone(s: &BTreeSet<String>, v: &Value) -> bool {
    match v {
        Value::Int(_) => true,
        Value::Elem(e) => s.contains(e),
    }
}

/// One element of `S` per cycle, and every interpretation recoverable as the
/// union of orbits of its `S`-restricted part.
pub fn is_backbone(i: &ConcreteStructure, pi: &CyclePermutation, s: &BTreeSet<String>) -> bool {
    let all: BTreeSet<&String> = i.domains.values().flatten().collect();
    if !s.iter().all(|e| all.contains(e)) {
        return false;
    }
    for e in &all {
        let hits = match pi.cycle_of(e) {
            Some(c) => c.iter().filter(|x| s.contains(*x)).count(),
            None => usize::from(s.contains(*e)),
        };
        if hits != 1 {
            return false;
        }
    }
    for tuples in i.predicates.values() {
        let mut rebuilt = BTreeSet::new();
        for t in tuples.iter().filter(|t| t.iter().all(|e| s.contains(e))) {
            rebuilt.extend(pi.orbit(t));
        }
        if &rebuilt != tuples {
            return false;
        }
    }
    for graph in i.functions.values() {
        let mut rebuilt: BTreeSet<(Tuple, Value)> = BTreeSet::new();
        for (args, v) in graph {
            if !(args.iter().all(|e| s.contains(e)) && in_backbone(s, v)) {
                continue;
            }
            let vlen = match v {
                Value::Int(_) => 1,
                Value::Elem(e) => pi.cycle_len(e) as u64,
            };
            let steps = pi.tuple_orbit_len(args).lcm(&vlen) as i64;
            for k in 0..steps {
                let a = args.iter().map(|e| pi.apply_pow(e, k).to_string()).collect();
                let img = match v {
                    Value::Int(_) => v.clone(),
                    Value::Elem(e) => Value::Elem(pi.apply_pow(e, k).to_string()),
                };
                rebuilt.insert((a, img));
            }
        }
        let original: BTreeSet<(Tuple, Value)> =
            graph.iter().map(|(a, v)| (a.clone(), v.clone())).collect();
        if rebuilt != original {
            return false;
        }
    }
    true
}

/// The lifted structure derived from `I` along `π` with backbone `S`:
/// interpretations restricted to `S`, multiplicity = orbit size.
pub fn lift_along(
    i: &ConcreteStructure,
    pi: &CyclePermutation,
    s: &BTreeSet<String>,
) -> LiftedStructure {
    let domains: BTreeMap<String, BTreeSet<String>> = i
        .domains
        .iter()
        .map(|(t, es)| (t.clone(), es.intersection(s).cloned().collect()))
        .collect();
    let mul = domains
        .values()
        .flatten()
        .map(|e| (e.clone(), pi.cycle_len(e) as u64))
        .collect();
    LiftedStructure {
        domains,
        mul,
        predicates: i
            .predicates
            .iter()
            .map(|(p, ts)| {
                let kept = ts
                    .iter()
                    .filter(|t| t.iter().all(|e| s.contains(e)))
                    .cloned()
                    .collect();
                (p.clone(), kept)
            })
            .collect(),
        functions: i
            .functions
            .iter()
            .map(|(f, g)| {
                let kept: FunctionGraph = g
                    .iter()
                    .filter(|(a, v)| a.iter().all(|e| s.contains(e)) && in_backbone(s, v))
                    .map(|(a, v)| (a.clone(), v.clone()))
                    .collect();
                (f.clone(), kept)
            })
            .collect(),
    }
}

/// Same interpretations, every multiplicity 1.
pub fn lift_trivial(i: &ConcreteStructure) -> LiftedStructure {
    LiftedStructure {
        domains: i.domains.clone(),
        mul: i.domains.values().flatten().map(|e| (e.clone(), 1)).collect(),
        predicates: i.predicates.clone(),
        functions: i.functions.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_problem;

    fn pigeon_vocab() -> Vocabulary {
        parse_problem(
            "type Pigeon size 10\ntype Hole size 5\npred isIn(Pigeon, Hole)\ntheory { true. }",
        )
        .unwrap()
        .vocabulary
    }

    fn pigeon_lifted() -> LiftedStructure {
        let mut l = LiftedStructure::empty(&pigeon_vocab());
        l.domains.get_mut("Pigeon").unwrap().insert("p1".into());
        l.domains.get_mut("Hole").unwrap().insert("h1".into());
        l.mul.insert("p1".into(), 10);
        l.mul.insert("h1".into(), 5);
        l.predicates
            .get_mut("isIn")
            .unwrap()
            .insert(vec!["p1".into(), "h1".into()]);
        l
    }

    #[test]
    fn pigeonhole_expansion() {
        let (i, pi) = expand_structure(&pigeon_lifted(), &pigeon_vocab()).unwrap();
        assert_eq!(i.size(), 15);
        assert_eq!(i.predicates["isIn"].len(), 10);
        // each hole holds two pigeons
        for h in &i.domains["Hole"] {
            let n = i.predicates["isIn"].iter().filter(|t| &t[1] == h).count();
            assert_eq!(n, 2);
        }
        assert!(is_automorphism(&i, &pi));
        let s: BTreeSet<String> = ["p1#1".to_string(), "h1#1".to_string()].into();
        assert!(is_backbone(&i, &pi, &s));
        let s2: BTreeSet<String> = ["p1#2".to_string(), "h1#2".to_string()].into();
        assert!(is_backbone(&i, &pi, &s2));
    }

    #[test]
    fn zero_multiplicity_has_empty_expansion() {
        let mut l = pigeon_lifted();
        l.mul.insert("h1".into(), 0);
        let (i, _) = expand_structure(&l, &pigeon_vocab()).unwrap();
        assert!(i.domains["Hole"].is_empty());
        assert!(i.predicates["isIn"].is_empty());
    }
}
