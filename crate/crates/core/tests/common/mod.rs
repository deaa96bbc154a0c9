#![allow(dead_code)]

use std::collections::BTreeSet;

use liftsat_core::ast::{parse_problem, Problem};
use liftsat_core::eval::{brute_force_sat, check_lifted, verify_model, BruteOptions, BruteOutcome};
use liftsat_core::lifter::{translate, TranslationMode};
use liftsat_core::search::{solve_iterative, MethodConfig, SearchOptions, SearchOutcome};
use liftsat_core::structures::{lift_trivial, ConcreteStructure, LiftedStructure, Value};
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const CMP: [&str; 6] = ["=", "~=", "<", ">", "=<", ">="];

#[derive(Clone, Debug)]
enum Sym {
    Pred(String, Vec<usize>),
    /// Domain-valued function: argument types, codomain type.
    Func(String, Vec<usize>, usize),
}

/// A random problem over at most two fixed-size types (sizes up to 3), at
/// most two symbols of arity up to 2 and at most two sentences, each with a
/// single quantifier block or a single aggregate.
pub fn random_tiny_problem(rng: &mut ChaCha8Rng) -> String {
    let ntypes = rng.gen_range(1..=2);
    let types: Vec<String> = ["T", "U"][..ntypes].iter().map(|s| s.to_string()).collect();
    let sizes: Vec<u64> = (0..ntypes).map(|_| rng.gen_range(0..=3)).collect();
    let nsyms = rng.gen_range(1..=2);
    let mut syms = Vec::new();
    for k in 0..nsyms {
        let arity = rng.gen_range(1..=2);
        let args: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..ntypes)).collect();
        if rng.gen_bool(0.3) {
            syms.push(Sym::Func(format!("f{k}"), args[..1].to_vec(), rng.gen_range(0..ntypes)));
        } else {
            syms.push(Sym::Pred(format!("p{k}"), args));
        }
    }
    let mut src = String::new();
    for (t, n) in types.iter().zip(&sizes) {
        src += &format!("type {t} size {n}\n");
    }
    for s in &syms {
        match s {
            Sym::Pred(p, args) => {
                let a: Vec<&str> = args.iter().map(|&i| types[i].as_str()).collect();
                src += &format!("pred {p}({})\n", a.join(", "));
            }
            Sym::Func(f, args, c) => {
                let a: Vec<&str> = args.iter().map(|&i| types[i].as_str()).collect();
                src += &format!("func {f}({}) -> {}\n", a.join(", "), types[*c]);
            }
        }
    }
    src += "theory {\n";
    for _ in 0..rng.gen_range(1..=2) {
        let s = syms.choose(rng).unwrap();
        src += &format!("  {}.\n", random_sentence(rng, s, &types));
    }
    src += "}\n";
    src
}

fn binders(args: &[usize], types: &[String], names: &[&str]) -> String {
    args.iter()
        .zip(names)
        .map(|(&t, x)| format!("{x} in {}", types[t]))
        .collect::<Vec<_>>()
        .join(", ")
}

fn random_sentence(rng: &mut ChaCha8Rng, s: &Sym, types: &[String]) -> String {
    let cmp = CMP.choose(rng).unwrap();
    let k: u64 = rng.gen_range(0..=4);
    match s {
        Sym::Pred(p, args) => {
            let names = ["x", "y"];
            let vars = names[..args.len()].join(", ");
            let b = binders(args, types, &names);
            let atom = format!("{p}({vars})");
            match rng.gen_range(0..6) {
                0 => format!("!{b}: {atom}"),
                1 => format!("!{b}: ~{atom}"),
                2 => format!("?{b}: {atom}"),
                3 => format!("#{{{b} : {atom}}} {cmp} {k}"),
                4 => format!("sum{{{{{b} : {atom} : 2}}}} {cmp} {k}"),
                _ if args.len() == 2 && args[0] == args[1] => format!("!{b}: {atom} => x = y"),
                _ => format!("?{b}: ~{atom}"),
            }
        }
        Sym::Func(f, args, c) => {
            let b1 = binders(args, types, &["x"]);
            match rng.gen_range(0..4) {
                0 => format!("!{b1}, x2 in {}: {f}(x) = {f}(x2) => x = x2", types[args[0]]),
                1 => format!("#{{{b1}, y in {} : {f}(x) = y}} {cmp} {k}", types[*c]),
                2 if args[0] == *c => format!("!{b1}: {f}(x) ~= x"),
                _ => format!("?{b1}, y in {}: {f}(x) = y", types[*c]),
            }
        }
    }
}

/// Agreement check on one problem source.
#[derive(Debug)]
pub struct OracleCase {
    pub source: String,
    pub lifted_sat: bool,
    pub brute_sat: bool,
    /// The brute-force model, if any.
    pub brute_model: Option<ConcreteStructure>,
    /// Problems found with the lifted search that failed to verify.
    pub expansion_valid: bool,
    /// The trivial lifting of the brute-force model satisfies the lifted
    /// sentence (true when there is no such model).
    pub trivial_lift_ok: bool,
}

pub fn run_oracle_case(source: &str) -> OracleCase {
    let problem = parse_problem(source).unwrap_or_else(|e| panic!("{e}\n{source}"));
    let mut m = MethodConfig::named("lt1").unwrap();
    m.max_iterations = 200;
    let outcome = solve_iterative(&problem, &SearchOptions::new(m)).unwrap_or_else(|e| panic!("{e}\n{source}"));
    let (lifted_sat, expansion_valid) = match &outcome {
        SearchOutcome::Sat(sol) => (true, verify_model(&problem, &sol.concrete).unwrap().is_valid()),
        SearchOutcome::Exhausted { .. } => (false, true),
    };
    let brute = brute_force_sat(&problem, &BruteOptions::default()).unwrap();
    let brute_model = match brute {
        BruteOutcome::Sat(c) => Some(c),
        BruteOutcome::Unsat => None,
    };
    let trivial_lift_ok = brute_model.as_ref().is_none_or(|c| trivial_lift_satisfies(&problem, c));
    OracleCase {
        source: source.to_string(),
        lifted_sat,
        brute_sat: brute_model.is_some(),
        brute_model,
        expansion_valid,
        trivial_lift_ok,
    }
}

/// Every multiplicity set to 1 gives a model of the lifted sentence.
pub fn trivial_lift_satisfies(problem: &Problem, model: &ConcreteStructure) -> bool {
    let ls = translate(problem, TranslationMode::Lifted).unwrap();
    matches!(check_lifted(&ls, &lift_trivial(model)), Ok(None))
}

/// A random lifted structure whose functions are regular: arity up to 2,
/// multiplicities 1..=6. Vocabulary: types A, B; `p(A)`, `q(A, B)`,
/// `f(A) -> B`, `g(A, B) -> A`, `h(B) -> Int`.
pub const RANDOM_VOCAB: &str = "type A\ntype B\npred p(A)\npred q(A, B)\nfunc f(A) -> B\nfunc g(A, B) -> A\nfunc h(B) -> Int\ntheory { true. }";

pub fn random_regular_lifted(rng: &mut ChaCha8Rng) -> LiftedStructure {
    let vocab = parse_problem(RANDOM_VOCAB).unwrap().vocabulary;
    loop {
        let mut l = LiftedStructure::empty(&vocab);
        for (t, prefix) in [("A", "a"), ("B", "b")] {
            for i in 0..rng.gen_range(1..=3) {
                let e = format!("{prefix}{i}");
                l.domains.get_mut(t).unwrap().insert(e.clone());
                l.mul.insert(e, rng.gen_range(1..=6));
            }
        }
        let a: Vec<String> = l.domains["A"].iter().cloned().collect();
        let b: Vec<String> = l.domains["B"].iter().cloned().collect();
        let mul = |e: &String| l.mul[e];
        let mut preds_p = BTreeSet::new();
        for x in &a {
            if rng.gen_bool(0.5) {
                preds_p.insert(vec![x.clone()]);
            }
        }
        let mut preds_q = BTreeSet::new();
        for x in &a {
            for y in &b {
                if rng.gen_bool(0.4) {
                    preds_q.insert(vec![x.clone(), y.clone()]);
                }
            }
        }
        // Images must have a multiplicity dividing the argument tuple's.
        let pick = |rng: &mut ChaCha8Rng, m: u64, cands: &[String]| -> Option<String> {
            let ok: Vec<&String> = cands.iter().filter(|c| m % mul(c) == 0).collect();
            ok.choose(rng).map(|s| (*s).clone())
        };
        let mut f = Vec::new();
        for x in &a {
            f.push((vec![x.clone()], pick(rng, mul(x), &b)));
        }
        let mut g = Vec::new();
        for x in &a {
            for y in &b {
                let (mx, my) = (mul(x), mul(y));
                let img = if mx.gcd(&my) == 1 { pick(rng, mx * my, &a) } else { None };
                g.push((vec![x.clone(), y.clone()], img));
            }
        }
        if f.iter().chain(&g).any(|(_, v)| v.is_none()) {
            continue;
        }
        l.predicates.insert("p".into(), preds_p);
        l.predicates.insert("q".into(), preds_q);
        l.functions.insert(
            "f".into(),
            f.into_iter().map(|(k, v)| (k, Value::Elem(v.unwrap()))).collect(),
        );
        l.functions.insert(
            "g".into(),
            g.into_iter().map(|(k, v)| (k, Value::Elem(v.unwrap()))).collect(),
        );
        l.functions.insert(
            "h".into(),
            b.iter().map(|y| (vec![y.clone()], Value::Int(rng.gen_range(-3..=3)))).collect(),
        );
        return l;
    }
}
