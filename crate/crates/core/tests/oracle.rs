//! The lifted search against exhaustive enumeration on small random problems.

mod common;

use common::{random_tiny_problem, run_oracle_case};
use liftsat_core::ast::parse_problem;
use liftsat_core::corpus::{bapa, pigeonhole};
use liftsat_core::eval::{brute_force_sat, BruteOptions, BruteOutcome};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn lifted_search_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..25 {
        let src = random_tiny_problem(&mut rng);
        let c = run_oracle_case(&src);
        assert_eq!(c.lifted_sat, c.brute_sat, "{src}");
        assert!(c.expansion_valid, "{src}");
        assert!(c.trivial_lift_ok, "{src}");
    }
}

#[test]
fn hand_written_cases() {
    for (src, sat) in [
        (pigeonhole(3, 2, 2), true),
        (pigeonhole(3, 1, 2), false),
        ("type T size 2\ntype U size 3\nfunc f(T) -> U\ntheory {\n  !x in T, x2 in T: f(x) = f(x2) => x = x2.\n}\n".into(), true),
        ("type T size 3\ntype U size 2\nfunc f(T) -> U\ntheory {\n  !x in T, x2 in T: f(x) = f(x2) => x = x2.\n}\n".into(), false),
        ("type T size 3\npred p(T)\ntheory {\n  sum{{x in T : p(x) : 2}} = 4.\n}\n".into(), true),
        ("type T size 3\npred p(T)\ntheory {\n  sum{{x in T : p(x) : 2}} = 3.\n}\n".into(), false),
        ("type T size 0\npred p(T)\ntheory {\n  ?x in T: p(x).\n}\n".into(), false),
        ("type T size 0\ntype U size 1\nfunc f(T) -> U\ntheory {\n  !x in T: f(x) = f(x).\n}\n".into(), true),
    ] {
        let c = run_oracle_case(&src);
        assert_eq!(c.brute_sat, sat, "{src}");
        assert_eq!(c.lifted_sat, sat, "{src}");
        assert!(c.expansion_valid && c.trivial_lift_ok, "{src}");
    }
}

#[test]
fn smallest_bapa_model_has_two_elements() {
    let p = parse_problem(&bapa()).unwrap();
    let BruteOutcome::Sat(m) = brute_force_sat(&p, &BruteOptions::default()).unwrap() else {
        panic!("bapa unsat");
    };
    assert_eq!(m.domains["D"].len(), 2);
    assert_eq!(m.predicates["A"].len(), 2);
}
