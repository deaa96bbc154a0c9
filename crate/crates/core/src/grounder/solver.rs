//! Running an external SMT-LIB solver and reading its answers.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Program and arguments; the script is written to its stdin.
    pub command: Vec<String>,
    pub timeout: Option<Duration>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            command: vec!["z3".into(), "-in".into(), "-smt2".into()],
            timeout: None,
        }
    }
}

impl SolverConfig {
    /// Splits a command line on whitespace.
    pub fn from_command_line(cmd: &str) -> SolverConfig {
        SolverConfig {
            command: cmd.split_whitespace().map(str::to_string).collect(),
            timeout: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("could not start solver `{0}`: {1}")]
    Spawn(String, std::io::Error),
    #[error("solver i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("unexpected solver output: {0}")]
    Protocol(String),
    #[error("solver was cancelled")]
    Cancelled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(l) => Some(l),
            Sexp::Atom(_) => None,
        }
    }

    /// Integer literal, including `(- n)`.
    pub fn as_int(&self) -> Option<i128> {
        match self {
            Sexp::Atom(a) => a.parse().ok(),
            Sexp::List(l) if l.len() == 2 && l[0].atom() == Some("-") => l[1].as_int().map(|n| -n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.atom() {
            Some("true") => Some(true),
            Some("false") => Some(false),
            _ => None,
        }
    }
}

/// Parses a sequence of s-expressions. `|quoted|` symbols keep their bars;
/// string literals keep their quotes.
pub fn parse_sexps(src: &str) -> Result<Vec<Sexp>, String> {
    let bytes: Vec<char> = src.chars().collect();
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            c if c.is_whitespace() => i += 1,
            ';' => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                let done = stack.pop().ok_or("unbalanced `)`")?;
                stack
                    .last_mut()
                    .ok_or("unbalanced `)`")?
                    .push(Sexp::List(done));
                i += 1;
            }
            '|' | '"' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != c {
                    i += 1;
                }
                if i == bytes.len() {
                    return Err("unterminated quoted token".into());
                }
                i += 1;
                let tok: String = bytes[start..i].iter().collect();
                stack.last_mut().unwrap().push(Sexp::Atom(tok));
            }
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_whitespace() && !"()|\";".contains(bytes[i]) {
                    i += 1;
                }
                let tok: String = bytes[start..i].iter().collect();
                stack.last_mut().unwrap().push(Sexp::Atom(tok));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().unwrap())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Sat(Vec<(String, Sexp)>),
    Unsat(Vec<String>),
    Unknown(String),
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub result: CheckResult,
    pub elapsed: Duration,
}

/// Runs `script` (declarations and assertions, no `check-sat`) and asks for
/// the values of `terms` on sat, the unsat core on unsat and the reason on
/// unknown. `cancel` aborts the run when set.
pub fn run_solver(
    config: &SolverConfig,
    script: &str,
    terms: &[String],
    cancel: Option<Arc<AtomicBool>>,
) -> Result<SolverRun, SolverError> {
    let start = Instant::now();
    let mut full = String::with_capacity(script.len() + 256);
    if let Some(t) = config.timeout {
        full.push_str(&format!("(set-option :timeout {})\n", t.as_millis().max(1)));
    }
    full.push_str(script);
    full.push_str("(check-sat)\n");
    if terms.is_empty() {
        full.push_str("(get-value (0))\n");
    } else {
        full.push_str("(get-value (");
        full.push_str(&terms.join(" "));
        full.push_str("))\n");
    }
    full.push_str("(get-unsat-core)\n(get-info :reason-unknown)\n(exit)\n");

    let (prog, args) = config
        .command
        .split_first()
        .ok_or_else(|| SolverError::Protocol("empty solver command".into()))?;
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SolverError::Spawn(config.command.join(" "), e))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(full.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });

    // Watchdog: the solver's own timeout normally fires first; the margin
    // covers solvers that ignore it.
    let deadline = config.timeout.map(|t| start + t + Duration::from_secs(2) + t / 10);
    let mut cancelled = false;
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed)) {
            let _ = child.kill();
            cancelled = true;
            break;
        }
        if deadline.is_some_and(|d| Instant::now() > d) {
            let _ = child.kill();
            break;
        }
        std::thread::sleep(Duration::from_millis(2));
    }
    let _ = child.wait();
    let _ = writer.join();
    let output = reader.join().unwrap_or_default();
    let elapsed = start.elapsed();
    if cancelled {
        return Err(SolverError::Cancelled);
    }
    let sexps = parse_sexps(&output).map_err(SolverError::Protocol)?;
    let result = interpret(&sexps, &output)?;
    Ok(SolverRun { result, elapsed })
}

fn is_error(s: &Sexp) -> bool {
    s.list().and_then(|l| l.first()).and_then(Sexp::atom) == Some("error")
}

fn interpret(sexps: &[Sexp], raw: &str) -> Result<CheckResult, SolverError> {
    let mut it = sexps.iter().filter(|s| !is_error(s));
    let Some(first) = it.next() else {
        return Ok(CheckResult::Unknown("no answer (timeout or crash)".into()));
    };
    match first.atom() {
        Some("sat") => {
            let vals = it
                .next()
                .and_then(Sexp::list)
                .ok_or_else(|| SolverError::Protocol(format!("missing model values in {raw:?}")))?;
            let mut out = Vec::new();
            for pair in vals {
                match pair.list() {
                    Some([Sexp::Atom(name), v]) => out.push((name.clone(), v.clone())),
                    Some([_, _]) => {}
                    _ => return Err(SolverError::Protocol(format!("bad value pair {pair:?}"))),
                }
            }
            Ok(CheckResult::Sat(out))
        }
        Some("unsat") => {
            let core = it
                .next()
                .and_then(Sexp::list)
                .ok_or_else(|| SolverError::Protocol(format!("missing unsat core in {raw:?}")))?;
            Ok(CheckResult::Unsat(
                core.iter()
                    .filter_map(Sexp::atom)
                    .map(|a| a.trim_matches('|').to_string())
                    .collect(),
            ))
        }
        Some("unknown") => {
            let reason = it
                .find_map(|s| {
                    let l = s.list()?;
                    (l.first()?.atom()? == ":reason-unknown").then(|| {
                        l.get(1)
                            .and_then(Sexp::atom)
                            .unwrap_or("unknown")
                            .trim_matches('"')
                            .to_string()
                    })
                })
                .unwrap_or_else(|| "unknown".into());
            Ok(CheckResult::Unknown(reason))
        }
        _ => Err(SolverError::Protocol(format!("unexpected answer {first:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_negatives() {
        let s = parse_sexps("sat\n((x 3) (|p(a,b)| true) (y (- 4)))").unwrap();
        assert_eq!(s[0].atom(), Some("sat"));
        let pairs = s[1].list().unwrap();
        assert_eq!(pairs[1].list().unwrap()[0].atom(), Some("|p(a,b)|"));
        assert_eq!(pairs[2].list().unwrap()[1].as_int(), Some(-4));
    }

    #[test]
    fn interprets_unsat_core_after_error() {
        let s = parse_sexps("unsat\n(error \"line 3: model is not available\")\n(s0 |ext_T|)").unwrap();
        assert_eq!(
            interpret(&s, "").unwrap(),
            CheckResult::Unsat(vec!["s0".into(), "ext_T".into()])
        );
    }

    #[test]
    fn empty_output_is_unknown() {
        assert!(matches!(interpret(&[], "").unwrap(), CheckResult::Unknown(_)));
    }
}
