mod common;

use std::collections::BTreeSet;

use common::{random_regular_lifted, RANDOM_VOCAB};
use liftsat_core::ast::parse_problem;
use liftsat_core::structures::{
    check_function_regularity, expand_lifted_tuple, expand_structure, expand_tuple, expanded_name,
    expansion_permutation, is_automorphism, is_backbone, is_regular_tuple, lcm_of, lift_along,
    lift_trivial, mul_product, LiftedStructure, RegularityMode,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn strip_base(l: &LiftedStructure) -> LiftedStructure {
    l.rename(|e| e.strip_suffix("#1").unwrap_or(e).to_string())
}

fn lifted_with_muls(muls: &[u64]) -> (LiftedStructure, Vec<String>) {
    let mut l = LiftedStructure::default();
    let names: Vec<String> = (0..muls.len()).map(|i| format!("e{i}")).collect();
    for (n, &m) in names.iter().zip(muls) {
        l.domains.entry(format!("T{n}")).or_default().insert(n.clone());
        l.mul.insert(n.clone(), m);
    }
    (l, names)
}

#[test]
fn regular_iff_cross_product() {
    // all multiplicity tuples with entries up to 6 and arity up to 3
    let mut stack: Vec<Vec<u64>> = (0..=6).map(|m| vec![m]).collect();
    while let Some(muls) = stack.pop() {
        if muls.len() < 3 {
            stack.extend((0..=6).map(|m| [muls.clone(), vec![m]].concat()));
        }
        let (l, names) = lifted_with_muls(&muls);
        let pi = expansion_permutation(&l);
        let base: Vec<String> = names.iter().map(|n| expanded_name(n, 1)).collect();
        let orbit = if muls.contains(&0) { BTreeSet::new() } else { expand_tuple(&base, &pi) };
        let mut cross: BTreeSet<Vec<String>> = BTreeSet::from([vec![]]);
        for (n, &m) in names.iter().zip(&muls) {
            cross = cross
                .into_iter()
                .flat_map(|t| (1..=m).map(move |j| [t.clone(), vec![expanded_name(n, j)]].concat()))
                .collect();
        }
        assert_eq!(is_regular_tuple(&muls), orbit == cross, "{muls:?}");
        let arith: BTreeSet<Vec<String>> = expand_lifted_tuple(&names, |e| l.mul_of(e)).into_iter().collect();
        assert_eq!(arith, orbit, "{muls:?}");
        if !muls.contains(&0) {
            assert_eq!(orbit.len() as u64, lcm_of(&muls));
        }
        assert!(orbit.len() as u64 <= mul_product(&muls));
    }
}

#[test]
fn random_structures_round_trip() {
    let vocab = parse_problem(RANDOM_VOCAB).unwrap().vocabulary;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let l = random_regular_lifted(&mut rng);
        let (i, pi) = expand_structure(&l, &vocab).unwrap();
        assert_eq!(i.size() as u64, l.mul.values().sum::<u64>());
        assert!(is_automorphism(&i, &pi));
        let s: BTreeSet<String> = l.mul.keys().map(|e| expanded_name(e, 1)).collect();
        assert!(is_backbone(&i, &pi, &s));
        assert_eq!(strip_base(&lift_along(&i, &pi, &s)), l);
    }
}

#[test]
fn trivial_lifting_inverts_expansion() {
    let vocab = parse_problem(RANDOM_VOCAB).unwrap().vocabulary;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let (i, _) = expand_structure(&random_regular_lifted(&mut rng), &vocab).unwrap();
        let (back, pi) = expand_structure(&lift_trivial(&i), &vocab).unwrap();
        assert_eq!(strip_base(&lift_trivial(&back)), lift_trivial(&i));
        assert_eq!(pi.order(), 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sufficient_condition_implies_exact(img in 1u64..=6, a in 1u64..=6, b in 1u64..=6) {
        let mut l = LiftedStructure::default();
        for (e, m) in [("x", a), ("y", b), ("v", img)] {
            l.mul.insert(e.into(), m);
        }
        let graph = [(vec!["x".to_string(), "y".to_string()], liftsat_core::structures::Value::elem("v"))]
            .into_iter()
            .collect();
        let mul = |e: &str| l.mul_of(e);
        let suff = check_function_regularity(&graph, mul, RegularityMode::Sufficient);
        let exact = check_function_regularity(&graph, mul, RegularityMode::Exact);
        if suff.is_regular() {
            prop_assert!(exact.is_regular());
        }
    }

    #[test]
    fn expansion_orbit_size(muls in proptest::collection::vec(1u64..=6, 1..=3)) {
        let (l, names) = lifted_with_muls(&muls);
        prop_assert_eq!(expand_lifted_tuple(&names, |e| l.mul_of(e)).len() as u64, lcm_of(&muls));
    }
}
