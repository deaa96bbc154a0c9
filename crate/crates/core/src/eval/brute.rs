use thiserror::Error;

use super::compiled::{Compiler, Model, Val, CF};
use super::EvalError;
use crate::ast::{Cardinality, Problem};
use crate::structures::ConcreteStructure;

#[derive(Debug, Clone)]
pub struct BruteOptions {
    /// Largest size tried for each generative type.
    pub max_generative: u64,
    /// Inclusive range enumerated for integer-valued functions.
    pub int_range: (i64, i64),
    /// Maximum number of candidate interpretations evaluated overall.
    pub budget: u64,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions {
            max_generative: 3,
            int_range: (0, 3),
            budget: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOutcome {
    Sat(ConcreteStructure),
    /// No model within the enumerated sizes and integer range.
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteError {
    #[error("search space of {0} interpretations exceeds the budget")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Generative size vectors ordered by total size, then lexicographically.
fn size_vectors(n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut all = vec![Vec::new()];
    for _ in 0..n {
        all = all
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                (0..=max).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    all.sort_by_key(|v| (v.iter().sum::<u64>(), v.clone()));
    all
}

enum Cell {
    Func { f: usize, offset: usize, range: Vec<Val> },
    Pred { p: usize, offset: usize },
}

/// Exhaustive model search. Element names are `<Type>_<i>` from 1.
/// Interpretations are enumerated as an odometer whose most significant
/// digits are function cells (declaration order, then argument tuples in
/// lexicographic order), followed by predicate cells; types are taken in
/// declaration order. The first model found is returned.
pub fn brute_force_sat(problem: &Problem, opts: &BruteOptions) -> Result<BruteOutcome, BruteError> {
    let vocab = &problem.vocabulary;
    let generative: Vec<usize> = vocab
        .types
        .iter()
        .enumerate()
        .filter(|(_, t)| problem.cardinality(t) == Cardinality::Generative)
        .map(|(i, _)| i)
        .collect();
    let mut spent: u64 = 0;
    for sizes in size_vectors(generative.len(), opts.max_generative) {
        let elems: Vec<Vec<String>> = vocab
            .types
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let n = match generative.iter().position(|&g| g == i) {
                    Some(k) => sizes[k],
                    None => problem.fixed_size(t).unwrap_or(0),
                };
                (1..=n).map(|j| format!("{t}_{j}")).collect()
            })
            .collect();
        let mut model = Model::with_elements(vocab, elems)?;

        let mut cells = Vec::new();
        let mut empty_codomain = false;
        for (f, tab) in model.funcs.iter().enumerate() {
            let range: Vec<Val> = match tab.result {
                Some(t) => (0..model.elems[t as usize].len() as u32)
                    .map(|i| Val::Elem(t, i))
                    .collect(),
                None => (opts.int_range.0..=opts.int_range.1)
                    .map(|i| Val::Int(i as i128))
                    .collect(),
            };
            if range.is_empty() && tab.cells() > 0 {
                empty_codomain = true;
            }
            for offset in 0..tab.cells() {
                cells.push(Cell::Func { f, offset, range: range.clone() });
            }
        }
        if empty_codomain {
            continue;
        }
        for (p, tab) in model.preds.iter().enumerate() {
            for offset in 0..tab.cells() {
                cells.push(Cell::Pred { p, offset });
            }
        }
        let radix: Vec<u64> = cells
            .iter()
            .map(|c| match c {
                Cell::Func { range, .. } => range.len() as u64,
                Cell::Pred { .. } => 2,
            })
            .collect();
        let combos = radix.iter().fold(1u64, |a, &r| a.saturating_mul(r));
        spent = spent.saturating_add(combos);
        if spent > opts.budget {
            return Err(BruteError::BudgetExceeded(spent));
        }

        let compiled: Vec<CF> = {
            let mut out = Vec::new();
            for f in &problem.sentences {
                let mut c = Compiler::new(&model, vocab);
                out.push(c.formula(f)?);
            }
            out
        };
        let set = |model: &mut Model, k: usize, digit: u64| match &cells[k] {
            Cell::Func { f, offset, range } => model.funcs[*f].set_cell(*offset, range[digit as usize]),
            Cell::Pred { p, offset } => model.preds[*p].set_cell(*offset, digit == 1),
        };
        let mut digits = vec![0u64; cells.len()];
        for k in 0..cells.len() {
            set(&mut model, k, 0);
        }
        let mut env = Vec::new();
        loop {
            let mut ok = true;
            for cf in &compiled {
                if !model.formula(cf, &mut env)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(BruteOutcome::Sat(model.to_concrete(vocab)));
            }
            // odometer: last cell varies fastest
            let mut k = cells.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                digits[k] += 1;
                if digits[k] < radix[k] {
                    set(&mut model, k, digits[k]);
                    break;
                }
                digits[k] = 0;
                set(&mut model, k, 0);
            }
            if k == 0 && digits.iter().all(|&d| d == 0) {
                break;
            }
        }
    }
    Ok(BruteOutcome::Unsat)
}
