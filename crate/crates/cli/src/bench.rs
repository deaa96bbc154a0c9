use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use liftsat_core::ast::parse_problem;
use liftsat_core::grounder::SolverError;
use liftsat_core::search::{solve_iterative, SearchError, SearchOptions, SearchOutcome};

/// One (problem, method) measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub problem: String,
    pub method: String,
    pub seconds: f64,
    pub verdict: RowVerdict,
    pub lifted_used: Option<u64>,
    pub concrete_used: Option<u64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowVerdict {
    Sat,
    Exhausted,
    Timeout,
    Error(String),
}

impl RowVerdict {
    pub fn cell(&self) -> String {
        match self {
            RowVerdict::Sat => "sat".into(),
            RowVerdict::Exhausted => "exhausted".into(),
            RowVerdict::Timeout => "T".into(),
            RowVerdict::Error(e) => format!("error: {e}"),
        }
    }
}

impl BenchRow {
    /// The time column; timeouts print as `T`.
    pub fn time_cell(&self) -> String {
        match self.verdict {
            RowVerdict::Timeout => "T".into(),
            _ => format!("{:.3}", self.seconds),
        }
    }
}

/// `*.lp` files of `dir`, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("cannot read corpus directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lp"))
        .collect();
    files.sort();
    Ok(files)
}

fn problem_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Sets `flag` after `limit` unless dropped first.
struct Deadline {
    done: Arc<(Mutex<bool>, Condvar)>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl Deadline {
    fn start(limit: Duration, flag: Arc<AtomicBool>) -> Deadline {
        let done = Arc::new((Mutex::new(false), Condvar::new()));
        let d = done.clone();
        let handle = std::thread::spawn(move || {
            let (lock, cv) = &*d;
            let guard = lock.lock().unwrap();
            let (guard, res) = cv.wait_timeout_while(guard, limit, |finished| !*finished).unwrap();
            if res.timed_out() && !*guard {
                flag.store(true, Ordering::Relaxed);
            }
        });
        Deadline {
            done,
            handle: Some(handle),
        }
    }
}

impl Drop for Deadline {
    fn drop(&mut self) {
        let (lock, cv) = &*self.done;
        *lock.lock().unwrap() = true;
        cv.notify_all();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub fn run_row(path: &Path, method: &str, base: &SearchOptions, limit: Duration) -> BenchRow {
    let mut row = BenchRow {
        problem: problem_name(path),
        method: method.to_string(),
        seconds: 0.0,
        verdict: RowVerdict::Error(String::new()),
        lifted_used: None,
        concrete_used: None,
        iterations: 0,
    };
    let problem = match std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|s| parse_problem(&s).map_err(|e| e.to_string()))
    {
        Ok(p) => p,
        Err(e) => {
            row.verdict = RowVerdict::Error(e);
            return row;
        }
    };
    let mut opts = base.clone();
    let Some(mut m) = liftsat_core::search::MethodConfig::named(method) else {
        row.verdict = RowVerdict::Error(format!("unknown method {method}"));
        return row;
    };
    m.max_iterations = base.method.max_iterations;
    m.timeout = Some(limit);
    opts.method = m;
    let cancel = Arc::new(AtomicBool::new(false));
    opts.cancel = Some(cancel.clone());

    let start = Instant::now();
    let result = {
        let _deadline = Deadline::start(limit, cancel);
        solve_iterative(&problem, &opts)
    };
    row.seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(SearchOutcome::Sat(sol)) => {
            row.verdict = RowVerdict::Sat;
            row.iterations = sol.trace.iterations.len();
            row.lifted_used = Some(sol.used.total);
            row.concrete_used = Some(sol.concrete.size() as u64);
        }
        Ok(SearchOutcome::Exhausted { trace, .. }) => {
            row.verdict = RowVerdict::Exhausted;
            row.iterations = trace.iterations.len();
        }
        Err(SearchError::Solver(SolverError::Cancelled)) => row.verdict = RowVerdict::Timeout,
        Err(e) => row.verdict = RowVerdict::Error(e.to_string()),
    }
    if row.seconds >= limit.as_secs_f64() && row.verdict != RowVerdict::Sat {
        row.verdict = RowVerdict::Timeout;
    }
    row
}

/// Runs every method on every file, up to `jobs` rows at a time. Rows come
/// back in (file, method) order regardless of completion order.
pub fn run_bench(files: &[PathBuf], methods: &[String], base: &SearchOptions, limit: Duration, jobs: usize) -> Vec<BenchRow> {
    let work: Vec<(&PathBuf, &String)> = files.iter().flat_map(|f| methods.iter().map(move |m| (f, m))).collect();
    let slots: Vec<Mutex<Option<BenchRow>>> = work.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(work.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((f, m)) = work.get(i) else { break };
                let row = run_row(f, m, base, limit);
                *slots[i].lock().unwrap() = Some(row);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().unwrap().expect("row computed")).collect()
}

const HEADER: [&str; 7] = ["problem", "method", "time_s", "verdict", "lifted_used", "concrete_used", "iterations"];

fn cells(r: &BenchRow) -> [String; 7] {
    let opt = |x: Option<u64>| x.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
    [
        r.problem.clone(),
        r.method.clone(),
        r.time_cell(),
        r.verdict.cell(),
        opt(r.lifted_used),
        opt(r.concrete_used),
        r.iterations.to_string(),
    ]
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let body: Vec<[String; 7]> = rows.iter().map(cells).collect();
    let mut width: Vec<usize> = HEADER.iter().map(|h| h.len()).collect();
    for r in &body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cs: Vec<&str>| {
        cs.iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
            + "\n"
    };
    let mut out = line(HEADER.to_vec());
    for r in &body {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = HEADER.join(",") + "\n";
    for r in rows {
        out += &cells(r).iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(verdict: RowVerdict) -> BenchRow {
        BenchRow {
            problem: "p".into(),
            method: "lt1".into(),
            seconds: 1.5,
            verdict,
            lifted_used: None,
            concrete_used: None,
            iterations: 0,
        }
    }

    #[test]
    fn timeouts_render_as_t() {
        let r = row(RowVerdict::Timeout);
        assert_eq!(r.time_cell(), "T");
        assert_eq!(render_csv(&[r]).lines().nth(1).unwrap(), "p,lt1,T,T,-,-,0");
    }

    #[test]
    fn csv_quotes_errors() {
        let r = row(RowVerdict::Error("a, \"b\"".into()));
        assert!(render_csv(&[r]).contains("\"error: a, \"\"b\"\"\""));
    }

    #[test]
    fn empty_table_has_header_only() {
        assert_eq!(render_csv(&[]).lines().count(), 1);
        assert_eq!(render_table(&[]).lines().count(), 1);
    }
}
