use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};

use super::{solve_iterative, MethodConfig, SearchError, SearchOptions, SearchOutcome};
use crate::ast::Problem;
use crate::grounder::SolverError;

/// The concrete baselines raced by the portfolio.
pub const PORTFOLIO_METHODS: [&str; 4] = ["m1", "m2", "t1", "t2"];

#[derive(Debug)]
pub struct PortfolioOutcome {
    /// Method that produced `outcome`.
    pub method: String,
    pub outcome: SearchOutcome,
}

/// Runs the four concrete methods concurrently; the first model wins and
/// the others are cancelled. When none finds a model, the first exhausted
/// outcome (in method order) is returned.
pub fn solve_portfolio(problem: &Problem, base: &SearchOptions) -> Result<PortfolioOutcome, SearchError> {
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|s| {
        for name in PORTFOLIO_METHODS {
            let tx = tx.clone();
            let mut opts = base.clone();
            let mut m = MethodConfig::named(name).expect("portfolio method");
            m.max_iterations = base.method.max_iterations;
            m.timeout = base.method.timeout;
            opts.method = m;
            opts.cancel = Some(cancel.clone());
            s.spawn(move || {
                let r = solve_iterative(problem, &opts);
                let _ = tx.send((name, r));
            });
        }
        drop(tx);
        let mut finished = Vec::new();
        let mut winner = None;
        for (name, r) in rx.iter() {
            match r {
                Ok(SearchOutcome::Sat(sol)) if winner.is_none() => {
                    cancel.store(true, Ordering::Relaxed);
                    winner = Some(Ok(PortfolioOutcome {
                        method: name.to_string(),
                        outcome: SearchOutcome::Sat(sol),
                    }));
                }
                Err(SearchError::Solver(SolverError::Cancelled)) => {}
                other => finished.push((name, other)),
            }
        }
        if let Some(w) = winner {
            return w;
        }
        finished.sort_by_key(|(n, _)| PORTFOLIO_METHODS.iter().position(|m| m == n));
        let (name, r) = finished.into_iter().next().expect("at least one portfolio result");
        r.map(|outcome| PortfolioOutcome {
            method: name.to_string(),
            outcome,
        })
    })
}
