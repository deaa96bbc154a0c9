use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Tuple, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermutationError {
    #[error("empty cycle")]
    EmptyCycle,
    #[error("element `{0}` occurs in more than one cycle position")]
    NotDisjoint(String),
}

/// A permutation of domain elements in disjoint-cycle form. Elements not
/// listed (and all integers) are fixpoints.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<String>>", into = "Vec<Vec<String>>")]
pub struct CyclePermutation {
    cycles: Vec<Vec<String>>,
    /// element -> (cycle, position)
    index: HashMap<String, (usize, usize)>,
}

impl PartialEq for CyclePermutation {
    /// Equal as functions: the same non-trivial cycles up to rotation and order.
    fn eq(&self, other: &Self) -> bool {
        let moved = |p: &CyclePermutation| {
            p.index
                .keys()
                .filter(|e| p.apply(e) != e.as_str())
                .count()
        };
        moved(self) == moved(other)
            && self
                .index
                .keys()
                .all(|e| self.apply(e) == other.apply(e))
    }
}

impl Eq for CyclePermutation {}

impl TryFrom<Vec<Vec<String>>> for CyclePermutation {
    type Error = PermutationError;

    fn try_from(cycles: Vec<Vec<String>>) -> Result<Self, Self::Error> {
        CyclePermutation::new(cycles)
    }
}

impl From<CyclePermutation> for Vec<Vec<String>> {
    fn from(p: CyclePermutation) -> Self {
        p.cycles
    }
}

impl CyclePermutation {
    pub fn new(cycles: Vec<Vec<String>>) -> Result<Self, PermutationError> {
        let mut index = HashMap::new();
        for (c, cycle) in cycles.iter().enumerate() {
            if cycle.is_empty() {
                return Err(PermutationError::EmptyCycle);
            }
            for (k, e) in cycle.iter().enumerate() {
                if index.insert(e.clone(), (c, k)).is_some() {
                    return Err(PermutationError::NotDisjoint(e.clone()));
                }
            }
        }
        Ok(CyclePermutation { cycles, index })
    }

    pub fn identity() -> Self {
        CyclePermutation::default()
    }

    pub fn cycles(&self) -> &[Vec<String>] {
        &self.cycles
    }

    /// Elements listed in some cycle (including listed fixpoints).
    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.cycles.iter().flatten().map(String::as_str)
    }

    pub fn cycle_len(&self, e: &str) -> usize {
        self.index.get(e).map_or(1, |&(c, _)| self.cycles[c].len())
    }

    pub fn cycle_of(&self, e: &str) -> Option<&[String]> {
        self.index.get(e).map(|&(c, _)| self.cycles[c].as_slice())
    }

    pub fn apply<'a>(&'a self, e: &'a str) -> &'a str {
        self.apply_pow(e, 1)
    }

    /// `π^k(e)`; negative powers go backwards.
    pub fn apply_pow<'a>(&'a self, e: &'a str, k: i64) -> &'a str {
        match self.index.get(e) {
            None => e,
            Some(&(c, pos)) => {
                let len = self.cycles[c].len() as i64;
                let j = (pos as i64 + k).rem_euclid(len) as usize;
                &self.cycles[c][j]
            }
        }
    }

    pub fn apply_value(&self, v: &Value) -> Value {
        match v {
            Value::Int(_) => v.clone(),
            Value::Elem(e) => Value::Elem(self.apply(e).to_string()),
        }
    }

    pub fn apply_tuple(&self, t: &[String]) -> Tuple {
        t.iter().map(|e| self.apply(e).to_string()).collect()
    }

    pub fn inverse(&self) -> CyclePermutation {
        let cycles = self
            .cycles
            .iter()
            .map(|c| {
                let mut r = c.clone();
                r[1..].reverse();
                r
            })
            .collect();
        CyclePermutation::new(cycles).expect("inverse of a valid permutation")
    }

    /// Order of the permutation: lcm of the cycle lengths.
    pub fn order(&self) -> u64 {
        self.cycles
            .iter()
            .fold(1u64, |acc, c| acc.lcm(&(c.len() as u64)))
    }

    /// Orbit size of a tuple: lcm of its elements' cycle lengths.
    pub fn tuple_orbit_len(&self, t: &[String]) -> u64 {
        t.iter()
            .fold(1u64, |acc, e| acc.lcm(&(self.cycle_len(e) as u64)))
    }

    /// The orbit `{π^i(t) | i ∈ ℕ}` in order of increasing `i`.
    pub fn orbit(&self, t: &[String]) -> Vec<Tuple> {
        let n = self.tuple_orbit_len(t) as i64;
        (0..n)
            .map(|i| t.iter().map(|e| self.apply_pow(e, i).to_string()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perm(cycles: &[&[&str]]) -> CyclePermutation {
        CyclePermutation::new(
            cycles
                .iter()
                .map(|c| c.iter().map(|s| s.to_string()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn apply_and_fixpoints() {
        let p = perm(&[&["a", "b", "c"], &["d", "e"]]);
        assert_eq!(p.apply("a"), "b");
        assert_eq!(p.apply("c"), "a");
        assert_eq!(p.apply("z"), "z");
        assert_eq!(p.apply_pow("a", -1), "c");
        assert_eq!(p.order(), 6);
        assert_eq!(p.apply_value(&Value::Int(7)), Value::Int(7));
    }

    #[test]
    fn rejects_overlap() {
        let err = CyclePermutation::new(vec![vec!["a".into()], vec!["a".into(), "b".into()]]);
        assert_eq!(err.unwrap_err(), PermutationError::NotDisjoint("a".into()));
    }

    #[test]
    fn orbit_of_pair() {
        let p = perm(&[&["a1", "a2"], &["b1", "b2", "b3", "b4"]]);
        let o = p.orbit(&["a1".into(), "b1".into()]);
        assert_eq!(o.len(), 4);
        assert!(!o.contains(&vec!["a1".to_string(), "b2".to_string()]));
    }

    proptest! {
        #[test]
        fn cycle_power_is_identity(lens in proptest::collection::vec(1usize..7, 1..5)) {
            let mut k = 0;
            let cycles: Vec<Vec<String>> = lens
                .iter()
                .map(|&l| (0..l).map(|_| { k += 1; format!("e{k}") }).collect())
                .collect();
            let p = CyclePermutation::new(cycles.clone()).unwrap();
            for c in &cycles {
                for e in c {
                    prop_assert_eq!(p.apply_pow(e, c.len() as i64), e.as_str());
                    let inv = p.inverse();
                    prop_assert_eq!(inv.apply(p.apply(e)), e.as_str());
                }
            }
            let order = p.order();
            prop_assert!(cycles.iter().all(|c| order % c.len() as u64 == 0));
        }
    }
}
