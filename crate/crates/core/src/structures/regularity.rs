use std::collections::{BTreeSet, HashMap};

use num_integer::Integer;
use serde::Serialize;

use super::{expanded_name, CyclePermutation, FunctionGraph, Tuple, Value};

/// Product of multiplicities; 1 for the empty tuple. Saturates.
pub fn mul_product(muls: &[u64]) -> u64 {
    muls.iter().fold(1u64, |a, &m| a.saturating_mul(m))
}

/// Least common multiple; 1 for the empty tuple, 0 if any entry is 0.
pub fn lcm_of(muls: &[u64]) -> u64 {
    if muls.contains(&0) {
        return 0;
    }
    muls.iter().fold(1u64, |a, &m| a.lcm(&m))
}

/// A tuple is regular when its expansion is the cross product of its
/// elements' expansions: some multiplicity is 0, or `Lcm = Mul`.
pub fn is_regular_tuple(muls: &[u64]) -> bool {
    muls.contains(&0) || lcm_of(muls) == mul_product(muls)
}

/// The π-orbit of a concrete tuple.
pub fn expand_tuple(tuple: &[String], pi: &CyclePermutation) -> BTreeSet<Tuple> {
    pi.orbit(tuple).into_iter().collect()
}

/// Expansion of a lifted tuple under the canonical expansion permutation,
/// computed arithmetically: step `i` maps `l` to `l#((i mod mul(l)) + 1)`.
/// Empty when any multiplicity is 0.
pub fn expand_lifted_tuple(tuple: &[String], mul: impl Fn(&str) -> u64) -> Vec<Tuple> {
    let muls: Vec<u64> = tuple.iter().map(|e| mul(e)).collect();
    let n = lcm_of(&muls);
    (0..n)
        .map(|i| {
            tuple
                .iter()
                .zip(&muls)
                .map(|(e, &m)| expanded_name(e, i % m + 1))
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularityMode {
    /// Only the per-tuple sufficient condition.
    Sufficient,
    /// The sufficient condition, then a check that the expanded graph is a
    /// total function.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum IrregularReason {
    /// `Lcm(l̄) ≠ Mul(l̄)` with all multiplicities positive.
    TupleNotRegular,
    /// The image multiplicity does not divide `Mul(l̄)`.
    ImageMulNotDividing { image_mul: u64, tuple_mul: u64 },
    /// A concrete argument tuple received no image.
    MissingImage(Tuple),
    /// A concrete argument tuple received two different images.
    ConflictingImages(Tuple, Value, Value),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FunctionRegularity {
    Regular,
    Irregular {
        witness: Tuple,
        reason: IrregularReason,
    },
}

impl FunctionRegularity {
    pub fn is_regular(&self) -> bool {
        matches!(self, FunctionRegularity::Regular)
    }
}

/// Checks a lifted function graph. The witness is the first lifted argument
/// tuple (in graph order) that fails.
pub fn check_function_regularity(
    graph: &FunctionGraph,
    mul: impl Fn(&str) -> u64,
    mode: RegularityMode,
) -> FunctionRegularity {
    let value_mul = |v: &Value| match v {
        Value::Int(_) => 1,
        Value::Elem(e) => mul(e),
    };
    let mut first_failure = None;
    for (args, v) in graph {
        let muls: Vec<u64> = args.iter().map(|e| mul(e)).collect();
        let tuple_mul = mul_product(&muls);
        let image_mul = value_mul(v);
        let reason = if !is_regular_tuple(&muls) {
            Some(IrregularReason::TupleNotRegular)
        } else if !divides(image_mul, tuple_mul) {
            Some(IrregularReason::ImageMulNotDividing { image_mul, tuple_mul })
        } else {
            None
        };
        if let Some(reason) = reason {
            first_failure = Some(FunctionRegularity::Irregular {
                witness: args.clone(),
                reason,
            });
            break;
        }
    }
    if mode == RegularityMode::Sufficient {
        return first_failure.unwrap_or(FunctionRegularity::Regular);
    }

    // Exact: expand the graph. Expansions of distinct lifted elements are
    // disjoint, so the expanded domain is covered iff every lifted tuple's
    // orbit pairs cover its own cross product.
    let mut images: HashMap<Tuple, Value> = HashMap::new();
    let mut exact_failure = None;
    for (args, v) in graph {
        let muls: Vec<u64> = args.iter().map(|e| mul(e)).collect();
        let arg_count = mul_product(&muls);
        if arg_count == 0 {
            continue;
        }
        let vm = value_mul(v);
        let mut row_keys = 0u64;
        if vm > 0 {
            let steps = lcm_of(&muls).lcm(&vm);
            for i in 0..steps {
                let key: Tuple = args
                    .iter()
                    .zip(&muls)
                    .map(|(e, &m)| expanded_name(e, i % m + 1))
                    .collect();
                let img = match v {
                    Value::Int(_) => v.clone(),
                    Value::Elem(e) => Value::Elem(expanded_name(e, i % vm + 1)),
                };
                match images.get(&key) {
                    Some(prev) if *prev != img => {
                        exact_failure = Some(FunctionRegularity::Irregular {
                            witness: args.clone(),
                            reason: IrregularReason::ConflictingImages(key, prev.clone(), img),
                        });
                        break;
                    }
                    Some(_) => {}
                    None => {
                        images.insert(key, img);
                        row_keys += 1;
                    }
                }
            }
        }
        if exact_failure.is_some() {
            break;
        }
        if row_keys < arg_count {
            let missing = first_missing(args, &muls, &images);
            exact_failure = Some(FunctionRegularity::Irregular {
                witness: args.clone(),
                reason: IrregularReason::MissingImage(missing),
            });
            break;
        }
    }
    // Report the exact failure when there is one: it names the concrete
    // tuple that breaks totality.
    exact_failure
        .or(first_failure)
        .unwrap_or(FunctionRegularity::Regular)
}

fn divides(d: u64, n: u64) -> bool {
    if d == 0 {
        n == 0
    } else {
        n % d == 0
    }
}

fn first_missing(args: &[String], muls: &[u64], images: &HashMap<Tuple, Value>) -> Tuple {
    let mut idx = vec![1u64; args.len()];
    loop {
        let key: Tuple = args
            .iter()
            .zip(&idx)
            .map(|(e, &j)| expanded_name(e, j))
            .collect();
        if !images.contains_key(&key) {
            return key;
        }
        // odometer increment
        let mut k = args.len();
        loop {
            if k == 0 {
                unreachable!("caller established a missing tuple");
            }
            k -= 1;
            if idx[k] < muls[k] {
                idx[k] += 1;
                break;
            }
            idx[k] = 1;
        }
    }
}
