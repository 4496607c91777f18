use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use regval::engine::emit;
use regval::enumerator::Pruning;
use regval::model::format_conditions_ascii;
use regval::orchestrator::{run, AcceptFirst, Answer, GroundTruth, Mode, Oracle, Outcome, Phase, Question, Status, SynthOptions};
use regval::solver::{SmtLibConfig, SolverChoice};
use regval::{parse_benchmark, RegexValidation};
use regval_bench::{default_corpus_dir, load_corpus, render_table, run_suite, to_csv, BenchMode, SuiteConfig};
use regval_service::ServiceConfig;

const EXIT_FAILED: u8 = 2;
const EXIT_BEST_EFFORT: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 66;

/// Environment variable naming the solver when `--solver` is absent.
const SOLVER_ENV: &str = "REGVAL_SOLVER";

#[derive(Parser)]
#[command(name = "regval", version, about = "Synthesize regex validations from examples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a validation for one example file.
    Synth(SynthArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
    /// Run the benchmark corpus.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Multitree,
    Ktree,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// `native`, `z3`, or a solver command line reading SMT-LIB on stdin.
    #[arg(long)]
    solver: Option<String>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Limit in seconds for a single solver call; a shape whose call runs
    /// out is skipped.
    #[arg(long)]
    check_timeout: Option<u64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Example file: `++` valid, `--` invalid and `+-` conditional-invalid sections.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "multitree")]
    mode: ModeArg,
    #[arg(long)]
    no_pruning: bool,
    #[arg(long)]
    no_split: bool,
    /// `tty`, `oracle:<validation file>` or `accept-first`.
    #[arg(long, default_value = "tty")]
    interaction: String,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, default_value_t = 20)]
    max_questions: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 64)]
    max_sessions: usize,
    /// Origin allowed by CORS (any when omitted).
    #[arg(long)]
    allow_origin: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    /// Corpus directory (defaults to the bundled one).
    #[arg(long)]
    cases: Option<PathBuf>,
    /// Only these cases.
    #[arg(long = "case")]
    only: Vec<String>,
    /// Comma-separated: multitree, ktree, no-pruning, dynamic-only.
    #[arg(long, default_value = "multitree")]
    modes: String,
    /// Keep at most V valid and I invalid examples per case, as `V,I`.
    #[arg(long)]
    subsample: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 60)]
    max_questions: usize,
    /// Also write the report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        let (msg, code) = match self {
            CliError::Usage(m) => (m, EXIT_USAGE),
            CliError::Io(m) => (m, EXIT_IO),
        };
        eprintln!("regval: {msg}");
        ExitCode::from(code)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn solver(arg: &Option<String>) -> SolverChoice {
    match arg.clone().or_else(|| std::env::var(SOLVER_ENV).ok()).as_deref() {
        None | Some("native") | Some("") => SolverChoice::Native,
        Some(cmd) => SolverChoice::SmtLib(SmtLibConfig::from_command(cmd)),
    }
}

fn base_options(common: &Common) -> SynthOptions {
    let mut o = SynthOptions { solver: solver(&common.solver), ..Default::default() };
    if let Some(t) = common.timeout {
        o.timeout = Duration::from_secs(t);
    }
    if let Some(t) = common.check_timeout {
        o.check_timeout = Duration::from_secs(t);
    }
    o
}

/// Asks on the terminal: the question goes to stderr, the answer is read
/// from stdin. End of input aborts.
struct Tty;

impl Oracle for Tty {
    fn ask(&mut self, q: &Question) -> Answer {
        let label = match q.phase {
            Phase::Regex => "pattern question",
            Phase::Captures => "value question",
        };
        let stdin = io::stdin();
        loop {
            eprint!("[{label}] is \"{}\" valid? [y/n] ", q.text);
            let _ = io::stderr().flush();
            let mut line = String::new();
            match stdin.lock().read_line(&mut line) {
                Ok(0) | Err(_) => return Answer::Abort,
                Ok(_) => {}
            }
            match line.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => return Answer::Valid,
                "n" | "no" => return Answer::Invalid,
                _ => eprintln!("please answer y or n"),
            }
        }
    }
}

fn oracle(spec: &str) -> Result<Box<dyn Oracle>, CliError> {
    match spec {
        "tty" => Ok(Box::new(Tty)),
        "accept-first" => Ok(Box::new(AcceptFirst)),
        _ => match spec.strip_prefix("oracle:") {
            Some(path) => {
                let text = read(Path::new(path))?;
                let truth = RegexValidation::parse(&text).map_err(|e| CliError::Usage(format!("{path}: {e}")))?;
                Ok(Box::new(GroundTruth(truth)))
            }
            None => Err(CliError::Usage(format!("unknown interaction {spec:?}"))),
        },
    }
}

fn print_outcome(out: &Outcome, format: Format) {
    let regex = out.result.as_ref().map(|r| emit(&r.regex));
    let conditions: Vec<String> =
        out.result.as_ref().map(|r| r.conditions.iter().map(ToString::to_string).collect()).unwrap_or_default();
    match format {
        Format::Json => {
            let status = match &out.status {
                Status::Done => "done",
                Status::BestEffort(_) => "best_effort",
                Status::Failed(_) => "failed",
            };
            let v = json!({
                "regex": regex,
                "conditions": conditions,
                "stats": {
                    "programs_enumerated": out.stats.programs_enumerated,
                    "questions": out.stats.questions,
                    "seconds": out.stats.seconds,
                },
                "transcript": out.transcript,
                "status": status,
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("json values serialize"));
        }
        Format::Text => {
            match &out.status {
                Status::Done => {}
                Status::BestEffort(m) => eprintln!("warning: {m}; showing the best result found"),
                Status::Failed(m) => eprintln!("synthesis failed: {m}"),
            }
            if let Some(r) = &regex {
                println!("regex: {r}");
                let conds = out.result.as_ref().map(|r| format_conditions_ascii(&r.conditions)).unwrap_or_default();
                println!("conditions: {}", if conds.is_empty() { "none" } else { &conds });
            }
            println!(
                "programs enumerated: {}\nquestions: {}\nseconds: {:.2}",
                out.stats.programs_enumerated, out.stats.questions, out.stats.seconds
            );
            if !out.transcript.is_empty() {
                println!("transcript:");
                for t in &out.transcript {
                    let phase = match t.phase {
                        Phase::Regex => "pattern",
                        Phase::Captures => "value",
                    };
                    println!("  {:?} ({phase}): {}", t.question, if t.valid { "valid" } else { "invalid" });
                }
            }
        }
    }
}

fn synth(args: SynthArgs) -> Result<ExitCode, CliError> {
    let text = read(&args.input)?;
    let examples =
        parse_benchmark(&text).map_err(|e| CliError::Usage(format!("{}: {e}", args.input.display())))?;
    let mut opts = base_options(&args.common);
    opts.mode = match args.mode {
        ModeArg::Multitree => Mode::Multitree,
        ModeArg::Ktree => Mode::Ktree,
    };
    if args.no_pruning {
        opts.pruning = Pruning::none();
    }
    opts.split = !args.no_split;
    opts.max_questions = args.max_questions;
    let mut oracle = oracle(&args.interaction)?;
    let out = run(examples, &opts, oracle.as_mut());
    print_outcome(&out, args.format);
    Ok(match out.status {
        Status::Done => ExitCode::SUCCESS,
        Status::BestEffort(_) => ExitCode::from(EXIT_BEST_EFFORT),
        Status::Failed(_) => ExitCode::from(EXIT_FAILED),
    })
}

fn serve(args: ServeArgs) -> Result<ExitCode, CliError> {
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("bad address {}:{}: {e}", args.host, args.port)))?;
    let config = ServiceConfig {
        max_sessions: args.max_sessions,
        synth: base_options(&args.common),
        allowed_origin: args.allow_origin,
        ..Default::default()
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    eprintln!("serving on http://{addr}");
    rt.block_on(regval_service::serve(addr, config)).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode, CliError> {
    let dir = args.cases.unwrap_or_else(default_corpus_dir);
    let mut cases = load_corpus(&dir).map_err(|e| CliError::Io(e.to_string()))?;
    if !args.only.is_empty() {
        cases.retain(|c| args.only.contains(&c.name));
        if cases.is_empty() {
            return Err(CliError::Usage("no case matches --case".into()));
        }
    }
    let modes = args
        .modes
        .split(',')
        .map(|m| BenchMode::parse(m.trim()).ok_or_else(|| CliError::Usage(format!("unknown mode {m:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let subsample = match &args.subsample {
        None => None,
        Some(s) => {
            let bad = || CliError::Usage(format!("--subsample expects V,I, got {s:?}"));
            let (v, i) = s.split_once(',').ok_or_else(bad)?;
            Some((v.trim().parse().map_err(|_| bad())?, i.trim().parse().map_err(|_| bad())?))
        }
    };
    let mut cfg = SuiteConfig { modes, subsample, seed: args.seed, jobs: args.jobs, ..Default::default() };
    cfg.synth.solver = solver(&args.common.solver);
    cfg.synth.max_questions = args.max_questions;
    if let Some(t) = args.common.timeout {
        cfg.synth.timeout = Duration::from_secs(t);
    }
    let rows = run_suite(&cases, &cfg);
    print!("{}", render_table(&rows, cfg.synth.timeout));
    if let Some(path) = args.csv {
        std::fs::write(&path, to_csv(&rows)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Serve(a) => serve(a),
        Command::Bench(a) => bench(a),
    };
    result.unwrap_or_else(CliError::report)
}
