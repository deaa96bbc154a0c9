mod bench;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use liftsat_core::ast::{parse_problem, typecheck, Problem};
use liftsat_core::corpus::reference_corpus;
use liftsat_core::eval::{verify_model, Verdict};
use liftsat_core::grounder::{GroundOptions, LcmEncoding, SolverConfig};
use liftsat_core::lifter::{translate, TranslationMode};
use liftsat_core::search::{
    solve_iterative, solve_portfolio, MethodConfig, SearchOptions, SearchOutcome, Solution, METHOD_NAMES,
};
use liftsat_core::structures::{expand_structure, ConcreteStructure, LiftedStructure};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "liftsat", version, about = "Lifted model finder for typed first-order logic with aggregates")]
struct Cli {
    /// Log filter, e.g. `info` or `liftsat_core=debug`.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and typecheck a problem, then print it back.
    Parse { file: PathBuf },
    /// Print the lifted (or concrete) translation.
    Translate {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Lifted)]
        mode: Mode,
    },
    /// Search for a model.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Where the model and trace JSON files go.
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        #[arg(long)]
        trace_json: Option<PathBuf>,
    },
    /// Expand a lifted model JSON into a concrete one.
    Expand {
        file: PathBuf,
        lifted: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a concrete model JSON against a problem.
    Verify { file: PathBuf, model: PathBuf },
    /// Run methods over a corpus directory and tabulate the results.
    Bench {
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "lt1,m1")]
        methods: Vec<String>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
        /// Rows run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write the reference corpus as `.lp` files.
    GenCorpus {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Lifted,
    Concrete,
}

#[derive(Clone, Copy, ValueEnum)]
enum LcmArg {
    Table,
    Witness,
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// lt1, lt2, lm1, lm2, t1, t2, m1, m2 or portfolio.
    #[arg(long, default_value = "lt1")]
    method: String,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    /// Seconds; per solver call for `solve`, per row for `bench`.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, value_enum, default_value_t = LcmArg::Table)]
    lcm_encoding: LcmArg,
    #[arg(long, default_value_t = 64)]
    lcm_bound: u64,
    #[arg(long, default_value_t = (1u64 << 31) - 1)]
    max_mul: u64,
    #[arg(long)]
    dump_smt: Option<PathBuf>,
    #[arg(long, env = "LIFTSAT_SOLVER", default_value = "z3 -in -smt2")]
    solver_cmd: String,
}

impl SearchArgs {
    fn options(&self, method: &str) -> Result<SearchOptions> {
        let mut m = MethodConfig::named(method)
            .with_context(|| format!("unknown method `{method}` (expected one of {}, portfolio)", METHOD_NAMES.join(", ")))?;
        m.max_iterations = self.max_iters;
        m.timeout = self.timeout_duration()?;
        let mut o = SearchOptions::new(m);
        o.solver = SolverConfig::from_command_line(&self.solver_cmd);
        if o.solver.command.is_empty() {
            bail!("empty solver command");
        }
        o.ground = GroundOptions {
            lcm: match self.lcm_encoding {
                LcmArg::Table => LcmEncoding::Table { bound: self.lcm_bound },
                LcmArg::Witness => LcmEncoding::Witness,
            },
            max_mul: self.max_mul,
            monotype: None,
        };
        o.dump_smt = self.dump_smt.clone();
        Ok(o)
    }

    fn timeout_duration(&self) -> Result<Option<Duration>> {
        match self.timeout {
            Some(t) if !(t > 0.0 && t.is_finite()) => bail!("--timeout must be a positive number of seconds"),
            t => Ok(t.map(Duration::from_secs_f64)),
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => anyhow::anyhow!("file not found: {}", path.display()),
        _ => anyhow::anyhow!("cannot read {}: {e}", path.display()),
    })
}

fn load_problem(path: &Path) -> Result<Problem> {
    let src = read_file(path)?;
    let p = parse_problem(&src).map_err(|e| anyhow::anyhow!("parse error in {}: {e}", path.display()))?;
    typecheck(&p).map_err(|e| anyhow::anyhow!("type error in {}: {e}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let s = read_file(path)?;
    serde_json::from_str(&s).with_context(|| format!("malformed structure JSON in {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    std::fs::write(path, s + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into())
}

fn report_verdict(v: &Verdict, problem: &Problem) -> String {
    match v {
        Verdict::Valid => "valid".into(),
        Verdict::Invalid { sentence, witness } => {
            let pos = problem.sentence_pos(*sentence);
            let w: Vec<String> = witness.iter().map(|(x, e)| format!("{x}={e}")).collect();
            if w.is_empty() {
                format!("invalid: sentence {} ({pos}) is false", sentence + 1)
            } else {
                format!("invalid: sentence {} ({pos}) is false for {}", sentence + 1, w.join(", "))
            }
        }
        Verdict::CardinalityMismatch { ty, expected, found } => {
            format!("invalid: type {ty} has {found} elements, expected {expected}")
        }
    }
}

fn cmd_solve(file: &Path, search: &SearchArgs, output_dir: &Path, trace_json: Option<&Path>) -> Result<ExitCode> {
    let problem = load_problem(file)?;
    let (method, outcome) = if search.method == "portfolio" {
        let base = search.options("m1")?;
        let r = solve_portfolio(&problem, &base)?;
        (r.method, r.outcome)
    } else {
        let o = search.options(&search.method)?;
        (search.method.clone(), solve_iterative(&problem, &o)?)
    };
    std::fs::create_dir_all(output_dir).with_context(|| format!("cannot create {}", output_dir.display()))?;
    let name = stem(file);
    let trace = match &outcome {
        SearchOutcome::Sat(sol) => &sol.trace,
        SearchOutcome::Exhausted { trace, .. } => trace,
    };
    let trace_path = trace_json
        .map(Path::to_path_buf)
        .unwrap_or_else(|| output_dir.join(format!("{name}.trace.json")));
    write_json(&trace_path, trace)?;
    match &outcome {
        SearchOutcome::Sat(sol) => {
            let Solution { lifted, concrete, used, .. } = sol.as_ref();
            write_json(&output_dir.join(format!("{name}.lifted.json")), lifted)?;
            write_json(&output_dir.join(format!("{name}.expanded.json")), concrete)?;
            println!("sat (verified) method={method} iterations={}", sol.trace.iterations.len());
            let per: Vec<String> = used.per_type.iter().map(|(t, n)| format!("{t}={n}")).collect();
            println!("lifted used: {} ({})", used.total, per.join(", "));
            println!("concrete used: {}", concrete.size());
            Ok(ExitCode::SUCCESS)
        }
        SearchOutcome::Exhausted { reason, trace } => {
            println!("exhausted ({reason:?}) method={method} iterations={}", trace.iterations.len());
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_bench(corpus: &Path, methods: &[String], search: &SearchArgs, output_dir: &Path, jobs: usize) -> Result<()> {
    let files = bench::corpus_files(corpus)?;
    let base = search.options("lt1")?;
    let limit = search.timeout_duration()?.unwrap_or(Duration::from_secs(200));
    for m in methods {
        if MethodConfig::named(m).is_none() {
            bail!("unknown method `{m}`");
        }
    }
    let rows = bench::run_bench(&files, methods, &base, limit, jobs);
    print!("{}", bench::render_table(&rows));
    std::fs::create_dir_all(output_dir)?;
    let csv = output_dir.join("bench.csv");
    std::fs::write(&csv, bench::render_csv(&rows)).with_context(|| format!("cannot write {}", csv.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Parse { file } => {
            let p = load_problem(&file)?;
            print!("{p}");
            eprintln!(
                "{} types, {} predicates, {} functions, {} sentences",
                p.vocabulary.types.len(),
                p.vocabulary.predicates.len(),
                p.vocabulary.functions.len(),
                p.sentences.len()
            );
        }
        Command::Translate { file, mode } => {
            let p = load_problem(&file)?;
            let mode = match mode {
                Mode::Lifted => TranslationMode::Lifted,
                Mode::Concrete => TranslationMode::Concrete,
            };
            print!("{}", translate(&p, mode)?);
        }
        Command::Solve {
            file,
            search,
            output_dir,
            trace_json,
        } => return cmd_solve(&file, &search, &output_dir, trace_json.as_deref()),
        Command::Expand { file, lifted, output } => {
            let p = load_problem(&file)?;
            let l: LiftedStructure = read_json(&lifted)?;
            let (c, _) = expand_structure(&l, &p.vocabulary)?;
            match output {
                Some(o) => write_json(&o, &c)?,
                None => println!("{}", serde_json::to_string_pretty(&c)?),
            }
        }
        Command::Verify { file, model } => {
            let p = load_problem(&file)?;
            let c: ConcreteStructure = read_json(&model)?;
            let v = verify_model(&p, &c)?;
            println!("{}", report_verdict(&v, &p));
            if !v.is_valid() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Bench {
            corpus,
            methods,
            search,
            output_dir,
            jobs,
        } => cmd_bench(&corpus, &methods, &search, &output_dir, jobs)?,
        Command::GenCorpus { dir } => {
            std::fs::create_dir_all(&dir)?;
            for e in reference_corpus() {
                std::fs::write(dir.join(format!("{}.lp", e.name)), &e.source)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_new(&cli.log).unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
