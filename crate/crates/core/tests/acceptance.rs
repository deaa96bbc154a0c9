//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use common::{random_regular_lifted, random_tiny_problem, run_oracle_case, OracleCase, RANDOM_VOCAB};
use liftsat_core::ast::{parse_problem, Problem};
use liftsat_core::corpus::{bapa, pigeonhole, rack_abcd};
use liftsat_core::eval::{brute_force_sat, verify_model, BruteOptions, BruteOutcome};
use liftsat_core::lifter::{translate, SentenceKind, TranslationMode};
use liftsat_core::search::{solve_iterative, MethodConfig, SearchOptions, SearchOutcome, Solution};
use liftsat_core::structures::{
    check_function_regularity, expand_lifted_tuple, expand_structure, expanded_name, is_automorphism,
    is_backbone, is_regular_tuple, lift_along, ConcreteStructure, FunctionGraph, IrregularReason,
    LiftedStructure, RegularityMode, Value,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solve(src: &str, method: &str) -> Result<(Problem, Box<Solution>, Duration), String> {
    let p = parse_problem(src).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let out = solve_iterative(&p, &SearchOptions::new(MethodConfig::named(method).unwrap())).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    match out {
        SearchOutcome::Sat(s) => Ok((p, s, dt)),
        SearchOutcome::Exhausted { reason, .. } => Err(format!("{method} exhausted: {reason:?}")),
    }
}

fn sizes_per_iteration(s: &Solution) -> Vec<Vec<usize>> {
    s.trace.iterations.iter().map(|r| r.sizes.values().copied().collect()).collect()
}

fn pigeonhole_canonical() -> Check {
    let (p, s, dt) = solve(&pigeonhole(10, 5, 2), "lt1")?;
    ensure(s.used.total == 2, || format!("{} lifted elements used", s.used.total))?;
    let mut muls: Vec<u64> = s.lifted.mul.values().copied().filter(|&m| m > 0).collect();
    muls.sort();
    ensure(muls == [5, 10], || format!("multiplicities {muls:?}"))?;
    let (c, _) = expand_structure(&s.lifted, &p.vocabulary).map_err(|e| e.to_string())?;
    ensure(c.size() == 15, || format!("{} expanded elements", c.size()))?;
    ensure(c.predicates["isIn"].len() == 10, || format!("{} isIn pairs", c.predicates["isIn"].len()))?;
    let v = verify_model(&p, &c).map_err(|e| e.to_string())?;
    ensure(v.is_valid(), || format!("{v:?}"))?;
    ensure(dt < Duration::from_secs(5), || format!("took {dt:?}"))?;
    Ok(format!("2 lifted elements, muls {{10, 5}}, 15 elements, 10 pairs, valid, {dt:.2?}"))
}

fn scale_invariance() -> Check {
    let (_, small, _) = solve(&pigeonhole(10, 5, 2), "lt1")?;
    let t = Instant::now();
    let (p, big, _) = solve(&pigeonhole(10000, 5000, 2), "lt1")?;
    let (c, _) = expand_structure(&big.lifted, &p.vocabulary).map_err(|e| e.to_string())?;
    let v = verify_model(&p, &c).map_err(|e| e.to_string())?;
    let dt = t.elapsed();
    ensure(v.is_valid(), || format!("{v:?}"))?;
    let (a, b) = (sizes_per_iteration(&small), sizes_per_iteration(&big));
    ensure(a == b, || format!("lifted domain sizes differ: {a:?} vs {b:?}"))?;
    ensure(c.size() == 15000, || format!("{} expanded elements", c.size()))?;
    ensure(dt < Duration::from_secs(30), || format!("took {dt:?}"))?;
    Ok(format!("{} iterations with sizes {b:?} at both scales, {dt:.2?} total", b.len()))
}

fn median_time(src: &str, method: &str) -> Result<Duration, String> {
    let mut ts = Vec::new();
    for _ in 0..3 {
        ts.push(solve(src, method)?.2);
    }
    ts.sort();
    Ok(ts[1])
}

fn baseline_contrast() -> Check {
    let src = pigeonhole(30, 15, 2);
    let lifted = median_time(&src, "lt1")?;
    let concrete = median_time(&src, "m1")?;
    ensure(concrete > lifted, || format!("m1 {concrete:.2?} not slower than lt1 {lifted:.2?}"))?;
    Ok(format!("m1 {concrete:.2?} > lt1 {lifted:.2?} (median of 3)"))
}

fn oracle_cases(n: usize) -> (Vec<OracleCase>, Duration) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sources: Vec<String> = (0..n).map(|_| random_tiny_problem(&mut rng)).collect();
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::new());
    let t = Instant::now();
    std::thread::scope(|s| {
        for _ in 0..4 {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(src) = sources.get(i) else { break };
                let c = run_oracle_case(src);
                out.lock().unwrap().push((i, c));
            });
        }
    });
    let mut cases = out.into_inner().unwrap();
    cases.sort_by_key(|(i, _)| *i);
    (cases.into_iter().map(|(_, c)| c).collect(), t.elapsed())
}

fn oracle_agreement(cases: &[OracleCase], dt: Duration) -> Check {
    let bad: Vec<&OracleCase> = cases.iter().filter(|c| c.lifted_sat != c.brute_sat).collect();
    ensure(bad.is_empty(), || format!("{} disagreements, first:\n{}", bad.len(), bad[0].source))?;
    let unverified = cases.iter().filter(|c| !c.expansion_valid).count();
    ensure(unverified == 0, || format!("{unverified} expansions failed to verify"))?;
    ensure(dt < Duration::from_secs(600), || format!("took {dt:?}"))?;
    let sat = cases.iter().filter(|c| c.brute_sat).count();
    Ok(format!("{} problems ({sat} sat, {} unsat), 0 disagreements, {dt:.1?}", cases.len(), cases.len() - sat))
}

fn trivial_lifting(cases: &[OracleCase]) -> Check {
    let models = cases.iter().filter(|c| c.brute_model.is_some()).count();
    let failed = cases.iter().filter(|c| !c.trivial_lift_ok).count();
    ensure(failed == 0, || format!("{failed} of {models} trivial liftings fail the lifted sentence"))?;
    Ok(format!("{models} brute-force models, all trivial liftings satisfy the lifted sentence"))
}

fn el(e: &str, j: u64) -> String {
    expanded_name(e, j)
}

fn regularity_golden() -> Check {
    let mul23 = |e: &str| if e == "a" { 2 } else { 3 };
    let ab = ["a".to_string(), "b".to_string()];
    let got = expand_lifted_tuple(&ab, mul23);
    let listed: Vec<Vec<String>> = [(1, 1), (2, 2), (1, 3), (2, 1), (1, 2), (2, 3)]
        .iter()
        .map(|&(i, j)| vec![el("a", i), el("b", j)])
        .collect();
    ensure(got == listed, || format!("(2,3) expansion {got:?}"))?;
    ensure(is_regular_tuple(&[2, 3]) && !is_regular_tuple(&[2, 4]), || "tuple regularity".into())?;
    let got24 = expand_lifted_tuple(&ab, |e| if e == "a" { 2 } else { 4 });
    ensure(
        got24.len() == 4 && !got24.contains(&vec![el("a", 1), el("b", 2)]),
        || format!("(2,4) expansion {got24:?}"),
    )?;
    ensure(expand_lifted_tuple(&ab, |e| if e == "a" { 2 } else { 0 }).is_empty(), || {
        "zero multiplicity expansion not empty".into()
    })?;

    // f: A×A→B with f(a,a)=b and mul(a)=mul(b)=2 has no image for (a¹,a²)
    let vocab = parse_problem("type A\ntype B\nfunc f(A, A) -> B\ntheory { true. }").unwrap().vocabulary;
    let mut l = LiftedStructure::empty(&vocab);
    l.domains.get_mut("A").unwrap().insert("a".into());
    l.domains.get_mut("B").unwrap().insert("b".into());
    l.mul.extend([("a".to_string(), 2), ("b".to_string(), 2)]);
    let aa = vec!["a".to_string(), "a".to_string()];
    let g: FunctionGraph = [(aa.clone(), Value::elem("b"))].into_iter().collect();
    l.functions.insert("f".into(), g.clone());
    let verdict = check_function_regularity(&g, |e| l.mul_of(e), RegularityMode::Exact);
    ensure(
        matches!(&verdict, liftsat_core::structures::FunctionRegularity::Irregular { witness, .. } if *witness == aa),
        || format!("A×A→B verdict {verdict:?}"),
    )?;
    let images = expand_lifted_tuple(&[aa[0].clone(), aa[1].clone(), "b".into()], |e| l.mul_of(e));
    ensure(
        !images.iter().any(|t| t[0] == el("a", 1) && t[1] == el("a", 2)),
        || "(a¹,a²) received an image".into(),
    )?;
    ensure(expand_structure(&l, &vocab).is_err(), || "A×A→B expansion accepted".into())?;

    // f: A→B with f(a)=b, mul(a)=1, mul(b)=2 gives a¹ two images
    let vocab = parse_problem("type A\ntype B\nfunc f(A) -> B\ntheory { true. }").unwrap().vocabulary;
    let mut l = LiftedStructure::empty(&vocab);
    l.domains.get_mut("A").unwrap().insert("a".into());
    l.domains.get_mut("B").unwrap().insert("b".into());
    l.mul.extend([("a".to_string(), 1), ("b".to_string(), 2)]);
    let g: FunctionGraph = [(vec!["a".to_string()], Value::elem("b"))].into_iter().collect();
    l.functions.insert("f".into(), g.clone());
    let pairs = expand_lifted_tuple(&["a".into(), "b".into()], |e| l.mul_of(e));
    ensure(
        pairs == vec![vec![el("a", 1), el("b", 1)], vec![el("a", 1), el("b", 2)]],
        || format!("A→B pairs {pairs:?}"),
    )?;
    let verdict = check_function_regularity(&g, |e| l.mul_of(e), RegularityMode::Exact);
    ensure(
        matches!(
            &verdict,
            liftsat_core::structures::FunctionRegularity::Irregular {
                reason: IrregularReason::ImageMulNotDividing { .. } | IrregularReason::ConflictingImages(..),
                ..
            }
        ),
        || format!("A→B verdict {verdict:?}"),
    )?;
    ensure(expand_structure(&l, &vocab).is_err(), || "A→B expansion accepted".into())?;
    Ok("(2,3) six-tuple expansion, (2,4) irregular, A×A→B not total, A→B not functional".into())
}

fn lossless_round_trip() -> Check {
    let vocab = parse_problem(RANDOM_VOCAB).unwrap().vocabulary;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for k in 0..100 {
        let l = random_regular_lifted(&mut rng);
        let (i, pi) = expand_structure(&l, &vocab).map_err(|e| format!("structure {k}: {e}"))?;
        let s: BTreeSet<String> = l.mul.keys().map(|e| el(e, 1)).collect();
        ensure(is_automorphism(&i, &pi), || format!("structure {k}: not an automorphism"))?;
        ensure(is_backbone(&i, &pi, &s), || format!("structure {k}: not a backbone"))?;
        let back = lift_along(&i, &pi, &s).rename(|e| e.strip_suffix("#1").unwrap_or(e).to_string());
        ensure(back == l, || format!("structure {k}: re-lifting differs"))?;
    }
    Ok("100 random regular structures re-lift to themselves; automorphism and backbone hold".into())
}

fn generative_scaling() -> Check {
    let mut counts = Vec::new();
    let mut times = Vec::new();
    for m in [4, 8, 20] {
        let (_, s, dt) = solve(&rack_abcd(m), "lt1")?;
        ensure(dt < Duration::from_secs(60), || format!("m={m} took {dt:?}"))?;
        counts.push(s.used.total);
        times.push(format!("{dt:.2?}"));
    }
    ensure(counts.windows(2).all(|w| w[0] == w[1]), || format!("used counts {counts:?}"))?;
    Ok(format!("used count {} at m = 4, 8, 20 ({})", counts[0], times.join(", ")))
}

fn set_sizes(c: &ConcreteStructure) -> (usize, usize) {
    let a = c.predicates["A"].len();
    let bc = c.predicates["B"].intersection(&c.predicates["C"]).count();
    (a, bc)
}

fn bapa_sample() -> Check {
    let p = parse_problem(&bapa()).map_err(|e| e.to_string())?;
    let ls = translate(&p, TranslationMode::Lifted).map_err(|e| e.to_string())?;
    let rc = ls.count_kind(|k| {
        matches!(k, SentenceKind::AtomRegularity | SentenceKind::FunctionTuples(_) | SentenceKind::FunctionImage(_))
    });
    ensure(rc == 0, || format!("{rc} regularity sentences"))?;
    let (_, s, _) = solve(&bapa(), "lt1")?;
    let (a, bc) = set_sizes(&s.concrete);
    ensure(a >= 2 && bc <= 2, || format!("lifted model |A|={a}, |B∩C|={bc}"))?;
    let BruteOutcome::Sat(m) = brute_force_sat(&p, &BruteOptions::default()).map_err(|e| e.to_string())? else {
        return Err("no brute-force model".into());
    };
    let v = verify_model(&p, &m).map_err(|e| e.to_string())?;
    let (ma, mbc) = set_sizes(&m);
    ensure(v.is_valid() && ma >= 2 && mbc <= 2, || format!("minimal model |A|={ma}, |B∩C|={mbc}"))?;
    Ok(format!(
        "no regularity sentences; lifted model |A|={a}, |B∩C|={bc}; minimal model |D|={}, |A|={ma}, |B∩C|={mbc}",
        m.size()
    ))
}

fn main() {
    let mut failed = 0;
    let mut report = |name: &str, r: Check| match r {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("FAIL  {name}: {why}");
        }
    };
    report("pigeonhole canonical", pigeonhole_canonical());
    report("scale invariance", scale_invariance());
    report("baseline contrast", baseline_contrast());
    let (cases, dt) = oracle_cases(240);
    report("oracle equisatisfiability", oracle_agreement(&cases, dt));
    report("regularity golden examples", regularity_golden());
    report("lossless round trip", lossless_round_trip());
    report("trivial lifting", trivial_lifting(&cases));
    report("generative scaling", generative_scaling());
    report("set-cardinality sample", bapa_sample());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
