//! Iterative domain growth: ground, solve, grow the types named by the
//! unsat core, repeat until a verified model is found.

mod portfolio;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;
use tracing::{debug, info};

pub use portfolio::{solve_portfolio, PortfolioOutcome, PORTFOLIO_METHODS};

use crate::ast::{Cardinality, Problem};
use crate::eval::{check_lifted, used_counts, verify_model, EvalError, UsedCounts, Verdict};
use crate::grounder::{
    ground, run_solver, CheckResult, GroundError, GroundOptions, LcmEncoding, LiftedDomain, MonotypeSlots,
    SolverConfig, SolverError, SolverRun, LCM_BOUND_LABEL,
};
use crate::lifter::{translate, LiftedSentence, TranslateError, TranslationMode};
use crate::structures::{
    expand_structure, lift_trivial, ConcreteStructure, ExpansionError, LiftedStructure,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Plus1,
    Times1_5,
}

impl Growth {
    pub fn next(self, old: usize) -> usize {
        match self {
            Growth::Plus1 => old + 1,
            Growth::Times1_5 => (old + 1).max((3 * old).div_ceil(2)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MethodConfig {
    pub lifted: bool,
    /// Typed growth guided by unsat cores; otherwise a single pool of slots.
    pub typed: bool,
    pub growth: Growth,
    pub max_iterations: usize,
    #[serde(skip)]
    pub timeout: Option<Duration>,
}

pub const METHOD_NAMES: [&str; 8] = ["m1", "m2", "t1", "t2", "lm1", "lm2", "lt1", "lt2"];

impl MethodConfig {
    pub fn named(name: &str) -> Option<MethodConfig> {
        let (lifted, rest) = match name.strip_prefix('l') {
            Some(r) => (true, r),
            None => (false, name),
        };
        let typed = match rest.chars().next()? {
            't' => true,
            'm' => false,
            _ => return None,
        };
        let growth = match &rest[1..] {
            "1" => Growth::Plus1,
            "2" => Growth::Times1_5,
            _ => return None,
        };
        Some(MethodConfig {
            lifted,
            typed,
            growth,
            max_iterations: 50,
            timeout: None,
        })
    }

    pub fn name(&self) -> String {
        format!(
            "{}{}{}",
            if self.lifted { "l" } else { "" },
            if self.typed { "t" } else { "m" },
            match self.growth {
                Growth::Plus1 => "1",
                Growth::Times1_5 => "2",
            }
        )
    }

    fn mode(&self) -> TranslationMode {
        if self.lifted {
            TranslationMode::Lifted
        } else {
            TranslationMode::Concrete
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub method: MethodConfig,
    pub solver: SolverConfig,
    pub ground: GroundOptions,
    /// Directory receiving one SMT-LIB script per iteration.
    pub dump_smt: Option<PathBuf>,
    pub cancel: Option<Arc<AtomicBool>>,
}

impl SearchOptions {
    pub fn new(method: MethodConfig) -> Self {
        SearchOptions {
            method,
            solver: SolverConfig::default(),
            ground: GroundOptions::default(),
            dump_smt: None,
            cancel: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub sizes: BTreeMap<String, usize>,
    pub verdict: String,
    pub core: Vec<String>,
    pub grown: Vec<String>,
    pub ground_ms: f64,
    pub solve_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchTrace {
    pub method: String,
    pub iterations: Vec<IterationRecord>,
    pub total_ms: f64,
    pub outcome: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExhaustReason {
    IterationLimit,
    /// Unsat with no type left to grow.
    DomainSaturated,
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Used elements only. For concrete methods every multiplicity is 1.
    pub lifted: LiftedStructure,
    pub concrete: ConcreteStructure,
    pub used: UsedCounts,
    pub trace: SearchTrace,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Sat(Box<Solution>),
    Exhausted { reason: ExhaustReason, trace: SearchTrace },
}

impl SearchOutcome {
    pub fn trace(&self) -> &SearchTrace {
        match self {
            SearchOutcome::Sat(s) => &s.trace,
            SearchOutcome::Exhausted { trace, .. } => trace,
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("lcm table bound {0} too small for this problem (use a larger --lcm-bound or the witness encoding)")]
    LcmBoundExceeded(u64),
    #[error("solver model violates lifted sentence `{0}`")]
    LiftedCheckFailed(String),
    #[error("expansion failed: {0}")]
    Expansion(#[from] ExpansionError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("expanded model does not satisfy the problem: {0:?}")]
    VerificationFailed(Verdict),
    #[error("could not write SMT dump: {0}")]
    Dump(#[from] std::io::Error),
}

/// Fresh deterministic names `<T>_<k>`, `k` from 1.
pub fn element_name(ty: &str, k: usize) -> String {
    format!("{ty}_{k}")
}

/// Grows the named types of a typed domain. Elements with fixed
/// multiplicities are kept.
pub fn grow_domain(domain: &LiftedDomain, types: &BTreeSet<String>, growth: Growth) -> LiftedDomain {
    let mut d = domain.clone();
    for t in types {
        let es = d.elements.entry(t.clone()).or_default();
        let target = growth.next(es.len());
        for k in es.len() + 1..=target {
            es.push(element_name(t, k));
        }
    }
    d
}

/// Types mentioned by the core labels, sorted by name.
pub fn core_to_types(core: &[String], label_types: &BTreeMap<String, BTreeSet<String>>) -> BTreeSet<String> {
    core.iter()
        .filter_map(|l| label_types.get(l))
        .flatten()
        .cloned()
        .collect()
}

/// Domain-growth state for one search.
struct DomainState {
    typed: bool,
    growth: Growth,
    /// Types whose candidate element count may still increase, with caps.
    caps: BTreeMap<String, Option<usize>>,
    generative: BTreeSet<String>,
    domain: LiftedDomain,
    /// Monotype: slot count and pooled types.
    slots: usize,
    pooled: Vec<String>,
    exactly_one: bool,
}

impl DomainState {
    fn new(problem: &Problem, m: &MethodConfig) -> DomainState {
        let vocab = &problem.vocabulary;
        let mut domain = LiftedDomain::default();
        let mut caps = BTreeMap::new();
        let mut generative = BTreeSet::new();
        let mut pooled = Vec::new();
        for t in &vocab.types {
            domain.elements.insert(t.clone(), Vec::new());
            match problem.cardinality(t) {
                Cardinality::Generative => {
                    generative.insert(t.clone());
                    caps.insert(t.clone(), None);
                    pooled.push(t.clone());
                }
                Cardinality::Fixed(n) if m.lifted => {
                    caps.insert(t.clone(), Some(n as usize));
                    if n > 0 {
                        pooled.push(t.clone());
                    }
                }
                Cardinality::Fixed(n) => {
                    let es: Vec<String> = (1..=n as usize).map(|k| element_name(t, k)).collect();
                    for e in &es {
                        domain.fixed_mul.insert(e.clone(), 1);
                    }
                    domain.elements.insert(t.clone(), es);
                }
            }
        }
        DomainState {
            typed: m.typed,
            growth: m.growth,
            caps,
            generative,
            domain,
            slots: 0,
            pooled,
            exactly_one: m.growth == Growth::Plus1,
        }
    }

    fn growable(&self, t: &str) -> bool {
        match self.caps.get(t) {
            None => false,
            Some(None) => true,
            Some(Some(cap)) => self.domain.elements[t].len() < *cap,
        }
    }

    fn monotype(&self) -> Option<MonotypeSlots> {
        if self.typed || self.pooled.is_empty() {
            return None;
        }
        let slots = (1..=self.slots)
            .map(|k| self.pooled.iter().map(|t| element_name(t, k)).collect())
            .collect();
        Some(MonotypeSlots {
            slots,
            exactly_one: self.exactly_one,
        })
    }

    /// Grows by core types; returns the grown types or `None` when nothing
    /// can grow.
    fn grow(&mut self, core_types: Option<&BTreeSet<String>>) -> Option<Vec<String>> {
        if !self.typed {
            if self.pooled.is_empty() {
                return None;
            }
            let new = self.growth.next(self.slots);
            self.slots = new;
            for t in &self.pooled {
                let es = self.domain.elements.get_mut(t).unwrap();
                for k in es.len() + 1..=new {
                    es.push(element_name(t, k));
                }
            }
            return Some(self.pooled.clone());
        }
        let growable: BTreeSet<String> = self
            .caps
            .keys()
            .filter(|t| self.growable(t))
            .cloned()
            .collect();
        let pick = |s: BTreeSet<String>| (!s.is_empty()).then_some(s);
        let chosen = core_types
            .and_then(|c| pick(c.intersection(&growable).cloned().collect()))
            .or_else(|| pick(self.generative.intersection(&growable).cloned().collect()))
            .or_else(|| pick(growable.clone()))?;
        let mut d = grow_domain(&self.domain, &chosen, self.growth);
        for t in &chosen {
            if let Some(Some(cap)) = self.caps.get(t) {
                d.elements.get_mut(t).unwrap().truncate(*cap);
            }
        }
        self.domain = d;
        Some(chosen.into_iter().collect())
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Drops elements with multiplicity 0 and every tuple mentioning one.
pub fn prune_unused(l: &LiftedStructure) -> LiftedStructure {
    let used = |e: &String| l.mul_of(e) > 0;
    let keep_val = |v: &crate::structures::Value| v.as_elem().is_none_or(|e| l.mul_of(e) > 0);
    LiftedStructure {
        domains: l
            .domains
            .iter()
            .map(|(t, es)| (t.clone(), es.iter().filter(|e| used(e)).cloned().collect()))
            .collect(),
        mul: l.mul.iter().filter(|(e, _)| used(e)).map(|(e, m)| (e.clone(), *m)).collect(),
        predicates: l
            .predicates
            .iter()
            .map(|(p, ts)| (p.clone(), ts.iter().filter(|t| t.iter().all(used)).cloned().collect()))
            .collect(),
        functions: l
            .functions
            .iter()
            .map(|(f, g)| {
                let g = g
                    .iter()
                    .filter(|(a, v)| a.iter().all(used) && keep_val(v))
                    .map(|(a, v)| (a.clone(), v.clone()))
                    .collect();
                (f.clone(), g)
            })
            .collect(),
    }
}

/// Decodes, checks and verifies a solver model. Failures here indicate a
/// bug and are reported as errors.
fn certify(
    problem: &Problem,
    ls: &LiftedSentence,
    decoded: &LiftedStructure,
    lifted_mode: bool,
) -> Result<(LiftedStructure, ConcreteStructure), SearchError> {
    if let Some(label) = check_lifted(ls, decoded)? {
        return Err(SearchError::LiftedCheckFailed(label));
    }
    let pruned = prune_unused(decoded);
    let concrete = if lifted_mode {
        expand_structure(&pruned, &problem.vocabulary)?.0
    } else {
        ConcreteStructure {
            domains: pruned.domains.clone(),
            predicates: pruned.predicates.clone(),
            functions: pruned.functions.clone(),
        }
    };
    let verdict = verify_model(problem, &concrete)?;
    if !verdict.is_valid() {
        return Err(SearchError::VerificationFailed(verdict));
    }
    let lifted = if lifted_mode { pruned } else { lift_trivial(&concrete) };
    Ok((lifted, concrete))
}

/// Runs the iterative search with the configured method.
pub fn solve_iterative(problem: &Problem, opts: &SearchOptions) -> Result<SearchOutcome, SearchError> {
    let start = Instant::now();
    let m = &opts.method;
    let ls = translate(problem, m.mode())?;
    let mut state = DomainState::new(&ls.problem, m);
    let mut trace = SearchTrace {
        method: m.name(),
        iterations: Vec::new(),
        total_ms: 0.0,
        outcome: String::new(),
    };
    let mut solver = opts.solver.clone();
    if m.timeout.is_some() {
        solver.timeout = m.timeout;
    }
    if let Some(dir) = &opts.dump_smt {
        std::fs::create_dir_all(dir)?;
    }
    let finish = |mut trace: SearchTrace, outcome: &str| {
        trace.total_ms = ms(start.elapsed());
        trace.outcome = outcome.to_string();
        trace
    };

    for it in 1..=m.max_iterations {
        let ground_opts = GroundOptions {
            monotype: state.monotype(),
            ..opts.ground.clone()
        };
        let t0 = Instant::now();
        let g = ground(&ls, &state.domain, &ground_opts)?;
        let ground_ms = ms(t0.elapsed());
        if let Some(dir) = &opts.dump_smt {
            std::fs::write(dir.join(format!("{}_iter{it}.smt2", m.name())), g.full_script())?;
        }
        let mut run = run_solver(&solver, &g.script, &g.model_terms(), opts.cancel.clone())?;
        let mut relaxed = false;
        if let (CheckResult::Unsat(core), Some(unbounded)) = (&run.result, &g.unbounded_script) {
            // The table bound may only be an artifact of the core; retry
            // without it before giving up.
            if core.iter().any(|l| l == LCM_BOUND_LABEL) {
                let again = run_solver(&solver, unbounded, &g.model_terms(), opts.cancel.clone())?;
                run = SolverRun {
                    result: again.result,
                    elapsed: run.elapsed + again.elapsed,
                };
                relaxed = true;
            }
        }
        let mut rec = IterationRecord {
            iteration: it,
            sizes: state.domain.sizes(),
            verdict: String::new(),
            core: Vec::new(),
            grown: Vec::new(),
            ground_ms,
            solve_ms: ms(run.elapsed),
        };
        debug!(method = %m.name(), iteration = it, sizes = ?rec.sizes, "solved");
        match run.result {
            CheckResult::Sat(values) => {
                rec.verdict = "sat".into();
                trace.iterations.push(rec);
                let decoded = g.decode(&ls, &values)?;
                let certified = certify(problem, &ls, &decoded, m.lifted);
                let (lifted, concrete) = match (certified, opts.ground.lcm) {
                    (Err(_), LcmEncoding::Table { bound }) if relaxed => {
                        return Err(SearchError::LcmBoundExceeded(bound));
                    }
                    (r, _) => r?,
                };
                let used = if m.lifted {
                    used_counts(&lifted)
                } else {
                    used_counts(&lift_trivial(&concrete))
                };
                info!(method = %m.name(), iterations = it, used = used.total, "model found");
                return Ok(SearchOutcome::Sat(Box::new(Solution {
                    lifted,
                    concrete,
                    used,
                    trace: finish(trace, "sat"),
                })));
            }
            CheckResult::Unsat(core) => {
                rec.verdict = "unsat".into();
                let types = core_to_types(&core, &g.label_types);
                rec.core = core.clone();
                let grown = state.grow(Some(&types));
                match grown {
                    Some(g) => rec.grown = g,
                    None => {
                        trace.iterations.push(rec);
                        return Ok(SearchOutcome::Exhausted {
                            reason: ExhaustReason::DomainSaturated,
                            trace: finish(trace, "exhausted"),
                        });
                    }
                }
                trace.iterations.push(rec);
            }
            CheckResult::Unknown(_) if relaxed => {
                trace.iterations.push(rec);
                let LcmEncoding::Table { bound } = opts.ground.lcm else { unreachable!() };
                return Err(SearchError::LcmBoundExceeded(bound));
            }
            CheckResult::Unknown(reason) => {
                rec.verdict = format!("unknown: {reason}");
                match state.grow(None) {
                    Some(g) => rec.grown = g,
                    None => {
                        trace.iterations.push(rec);
                        return Ok(SearchOutcome::Exhausted {
                            reason: ExhaustReason::DomainSaturated,
                            trace: finish(trace, "exhausted"),
                        });
                    }
                }
                trace.iterations.push(rec);
            }
        }
    }
    Ok(SearchOutcome::Exhausted {
        reason: ExhaustReason::IterationLimit,
        trace: finish(trace, "exhausted"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_problem;

    #[test]
    fn method_names_round_trip() {
        for n in METHOD_NAMES {
            assert_eq!(MethodConfig::named(n).unwrap().name(), n);
        }
        assert!(MethodConfig::named("x1").is_none());
        assert!(MethodConfig::named("lt3").is_none());
    }

    #[test]
    fn growth_policies() {
        assert_eq!(Growth::Plus1.next(1), 2);
        assert_eq!(Growth::Times1_5.next(4), 6);
        assert_eq!(Growth::Times1_5.next(1), 2);
        assert_eq!(Growth::Times1_5.next(0), 1);
        assert_eq!(Growth::Times1_5.next(3), 5);
    }

    #[test]
    fn core_labels_map_to_types() {
        let lt: BTreeMap<String, BTreeSet<String>> = [
            ("ext_Pigeon".to_string(), ["Pigeon".to_string()].into()),
            ("s0".to_string(), ["Module".to_string()].into()),
        ]
        .into();
        assert_eq!(core_to_types(&["ext_Pigeon".into()], &lt), ["Pigeon".to_string()].into());
        assert_eq!(core_to_types(&["s0".into()], &lt), ["Module".to_string()].into());
        assert!(core_to_types(&[], &lt).is_empty());
    }

    #[test]
    fn grow_domain_names_are_fresh() {
        let d = LiftedDomain {
            elements: [("T".to_string(), vec!["T_1".to_string()])].into(),
            fixed_mul: BTreeMap::new(),
        };
        let g = grow_domain(&d, &["T".to_string()].into(), Growth::Plus1);
        assert_eq!(g.elements["T"], vec!["T_1".to_string(), "T_2".to_string()]);
    }

    #[test]
    fn contradiction_exhausts() {
        let p = parse_problem("type T\ntheory { #{x in T : true} = 3. #{x in T : true} = 2. }").unwrap();
        let mut m = MethodConfig::named("lt1").unwrap();
        m.max_iterations = 5;
        match solve_iterative(&p, &SearchOptions::new(m)).unwrap() {
            SearchOutcome::Exhausted { reason, trace } => {
                assert_eq!(reason, ExhaustReason::IterationLimit);
                assert_eq!(trace.iterations.len(), 5);
            }
            SearchOutcome::Sat(_) => panic!("contradiction solved"),
        }
    }

    #[test]
    fn fixed_size_contradiction_saturates() {
        let p = parse_problem("type T size 2\ntheory { #{x in T : true} = 3. }").unwrap();
        let mut m = MethodConfig::named("lt1").unwrap();
        m.max_iterations = 5;
        let out = solve_iterative(&p, &SearchOptions::new(m)).unwrap();
        assert!(matches!(out, SearchOutcome::Exhausted { .. }));
        assert!(out.trace().iterations.len() <= 5);
    }
}
