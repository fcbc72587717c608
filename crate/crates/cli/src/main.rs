use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use amekit::ame::{
    code_from_state, random_uniform_state, state_from_code, verify_ame_combinatorial,
    verify_ame_partial_trace,
};
use amekit::bounds::{conditional_n_upper_prime_power, BoundReport, BoundsEngine, BoundsError};
use amekit::codes::is_mds;
use amekit::existence::{ame_minimal_exists, construct_ame_state, Answer};
use amekit::field::prime_power;
use amekit::io::{
    parse_code, parse_hypercubes, parse_state, to_json, CodeDocument, HypercubeSetDocument,
    StateDocument,
};
use amekit::latin::{code_to_hypercubes, hypercubes_to_code, is_latin, mols_check};
use amekit::rs::{repetition_code, rs_code, Extension, RsParams};
use amekit::search::{orthogonal_pair_exists, SearchOptions, Verdict};

#[derive(Parser)]
#[command(
    name = "amekit",
    version,
    about = "Minimal-support AME states, MDS codes and orthogonal latin hypercubes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code or a state.
    #[command(subcommand)]
    Construct(Construct),
    /// Translate between codes, states and hypercube sets.
    #[command(subcommand)]
    Convert(Convert),
    /// Check a property; exit 0 if it holds, 1 if not.
    #[command(subcommand)]
    Verify(Verify),
    #[command(subcommand)]
    Search(Search),
    /// Lower and upper bounds on N(d), the largest n with a minimal-support AME(n, d).
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct Input {
    /// Input file, or `-` for standard input.
    #[arg(long = "in", default_value = "-")]
    input: String,
}

#[derive(Args)]
struct Output {
    /// Output file, or `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Subcommand)]
enum Construct {
    /// Reed–Solomon code over GF(d), as a code document.
    Rs {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "single")]
        extended: Extension,
        #[command(flatten)]
        output: Output,
    },
    /// GHZ state: the n-site repetition code as a state.
    Ghz {
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Minimal-support AME(n, d) state from a known construction.
    Ame {
        #[arg(long)]
        d: u32,
        /// Defaults to d + 1 for a prime power d >= 3, and to 3 otherwise.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Uniform superposition of d^floor(n/2) random basis kets.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum Convert {
    CodeToState {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    StateToCode {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    CodeToCubes {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    CubesToCode {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Comb,
    Trace,
}

#[derive(Subcommand)]
enum Verify {
    /// Is the code MDS?
    Mds {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Is the state AME?
    Ame {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "comb")]
        method: MethodArg,
        #[command(flatten)]
        output: Output,
    },
    /// Is every hypercube latin?
    Latin {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Are the hypercubes mutually orthogonal latin hypercubes?
    Mols {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum Search {
    /// Does a pair of orthogonal latin squares of the given order exist?
    Mate {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        /// Also write the certificate to this file.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Examine every reduced square even after a mate is found.
        #[arg(long)]
        exhaustive: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Does a minimal-support AME(n, d) state exist?
    AmeExists {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// Alphabet size; without it a table for d = 2..=10 is printed.
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    assume_mds_conjecture: bool,
    /// Include every candidate fact and the full derivation trace.
    #[arg(long)]
    trace: bool,
    /// Fact file replacing the built-in one.
    #[arg(long)]
    facts: Option<PathBuf>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[command(flatten)]
    output: Output,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        Failure {
            kind,
            message: message.to_string(),
        }
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::new("invalid-input", e)
}

fn precondition(e: impl ToString) -> Failure {
    Failure::new("precondition", e)
}

struct Outcome {
    payload: String,
    affirmative: bool,
}

impl Outcome {
    fn ok(payload: String) -> Self {
        Outcome {
            payload,
            affirmative: true,
        }
    }

    fn verdict(payload: String, affirmative: bool) -> Self {
        Outcome { payload, affirmative }
    }
}

fn read_input(input: &Input) -> Result<String, Failure> {
    let mut text = String::new();
    if input.input == "-" {
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::new("io", format!("standard input: {e}")))?;
    } else {
        text = fs::read_to_string(&input.input)
            .map_err(|e| Failure::new("io", format!("{}: {e}", input.input)))?;
    }
    Ok(text)
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), Failure> {
    fs::write(path, format!("{text}\n"))
        .map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn emit(output: &Output, payload: &str) -> Result<(), Failure> {
    if output.out == "-" {
        let mut stdout = io::stdout().lock();
        writeln!(stdout, "{payload}").map_err(|e| Failure::new("io", e))?;
        stdout.flush().map_err(|e| Failure::new("io", e))
    } else {
        write_file(&PathBuf::from(&output.out), payload)
    }
}

fn construct(cmd: Construct) -> Result<(Outcome, Output), Failure> {
    Ok(match cmd {
        Construct::Rs { d, k, extended, output } => {
            let params = RsParams::new(d, k, extended).map_err(precondition)?;
            let code = rs_code(&params).map_err(precondition)?;
            let doc = CodeDocument::new(&code, Some(&params.field));
            (Outcome::ok(to_json(&doc)), output)
        }
        Construct::Ghz { d, n, output } => {
            let code = repetition_code(n, d).map_err(precondition)?;
            let state = state_from_code(&code).map_err(precondition)?;
            (Outcome::ok(to_json(&StateDocument::new(&state))), output)
        }
        Construct::Ame { d, n, output } => {
            let n = n.unwrap_or(match prime_power(d) {
                Some(_) if d >= 3 => d as usize + 1,
                _ => 3,
            });
            let (state, how) = construct_ame_state(n, d)
                .map_err(precondition)?
                .ok_or_else(|| precondition(format!("no known construction for AME({n},{d})")))?;
            eprintln!("{how}");
            (Outcome::ok(to_json(&StateDocument::new(&state))), output)
        }
        Construct::Random { n, d, seed, output } => {
            let state = random_uniform_state(n, d, seed).map_err(precondition)?;
            eprintln!("seed {seed}");
            (Outcome::ok(to_json(&StateDocument::new(&state))), output)
        }
    })
}

fn convert(cmd: Convert) -> Result<(Outcome, Output), Failure> {
    Ok(match cmd {
        Convert::CodeToState { input, output } => {
            let (code, _) = parse_code(&read_input(&input)?).map_err(invalid)?;
            let state = state_from_code(&code).map_err(precondition)?;
            (Outcome::ok(to_json(&StateDocument::new(&state))), output)
        }
        Convert::StateToCode { input, output } => {
            let state = parse_state(&read_input(&input)?).map_err(invalid)?;
            let code = code_from_state(&state);
            (Outcome::ok(to_json(&CodeDocument::new(&code, None))), output)
        }
        Convert::CodeToCubes { input, output } => {
            let (code, _) = parse_code(&read_input(&input)?).map_err(invalid)?;
            let set = code_to_hypercubes(&code).map_err(precondition)?;
            (Outcome::ok(to_json(&HypercubeSetDocument::new(&set))), output)
        }
        Convert::CubesToCode { input, output } => {
            let set = parse_hypercubes(&read_input(&input)?).map_err(invalid)?;
            let code = hypercubes_to_code(&set).map_err(precondition)?;
            (Outcome::ok(to_json(&CodeDocument::new(&code, None))), output)
        }
    })
}

fn verify(cmd: Verify) -> Result<(Outcome, Output), Failure> {
    Ok(match cmd {
        Verify::Mds { input, output } => {
            let (code, _) = parse_code(&read_input(&input)?).map_err(invalid)?;
            let report = is_mds(&code).map_err(precondition)?;
            (Outcome::verdict(to_json(&report), report.is_mds), output)
        }
        Verify::Ame { input, method, output } => {
            let state = parse_state(&read_input(&input)?).map_err(invalid)?;
            let verdict = match method {
                MethodArg::Comb => verify_ame_combinatorial(&state),
                MethodArg::Trace => verify_ame_partial_trace(&state),
            }
            .map_err(precondition)?;
            (Outcome::verdict(to_json(&verdict), verdict.is_ame), output)
        }
        Verify::Latin { input, output } => {
            let set = parse_hypercubes(&read_input(&input)?).map_err(invalid)?;
            let latin: Vec<bool> = set.cubes.iter().map(is_latin).collect();
            let all = latin.iter().all(|&b| b);
            let payload = json!({"k": set.k, "d": set.d, "latin": latin, "all_latin": all});
            (Outcome::verdict(payload.to_string(), all), output)
        }
        Verify::Mols { input, output } => {
            let set = parse_hypercubes(&read_input(&input)?).map_err(invalid)?;
            let ok = mols_check(&set).map_err(precondition)?;
            let payload = json!({"k": set.k, "d": set.d, "cubes": set.len(), "is_mols": ok});
            (Outcome::verdict(payload.to_string(), ok), output)
        }
    })
}

fn progress_options(workers: usize) -> SearchOptions {
    let mut opts = SearchOptions::workers(workers.max(1));
    opts.progress = Some(Arc::new(|done, total| {
        eprintln!("search: {done}/{total} second rows finished");
    }));
    opts
}

fn search(cmd: Search) -> Result<(Outcome, Output), Failure> {
    Ok(match cmd {
        Search::Mate {
            order,
            workers,
            certificate,
            exhaustive,
            output,
        } => {
            let mut opts = progress_options(workers);
            opts.exhaustive = exhaustive;
            let cert = orthogonal_pair_exists(order, &opts).map_err(precondition)?;
            let payload = to_json(&cert);
            if let Some(path) = &certificate {
                write_file(path, &payload)?;
            }
            (Outcome::verdict(payload, cert.verdict == Verdict::Exists), output)
        }
        Search::AmeExists {
            n,
            d,
            workers,
            certificate,
            output,
        } => {
            let mut engine = BoundsEngine::with_default_facts();
            engine.set_search_workers(workers.max(1));
            let found = ame_minimal_exists(n, d, &engine).map_err(precondition)?;
            if let (Some(path), Some(cert)) = (&certificate, &found.certificate) {
                write_file(path, &to_json(cert))?;
            }
            let mut payload = serde_json::to_value(&found).expect("serializable");
            if let Some(state) = &found.state {
                payload["state"] = serde_json::to_value(StateDocument::new(state)).expect("serializable");
            }
            (Outcome::verdict(payload.to_string(), found.answer == Answer::True), output)
        }
    })
}

fn bounds_row(
    engine: &BoundsEngine,
    d: u32,
    args: &BoundsArgs,
) -> Result<Value, Failure> {
    let report: BoundReport = engine.n_report(d).map_err(precondition)?;
    let mut row = json!({
        "d": d,
        "lower": report.lower.as_ref().map(|f| f.value),
        "upper": report.upper.as_ref().map(|f| f.value),
        "exact": report.exact,
        "lower_fact": report.lower,
        "upper_fact": report.upper,
    });
    if args.trace {
        row["candidates"] = json!(report.candidates);
        row["trace"] = json!(report.trace);
    }
    if args.assume_mds_conjecture {
        row["conditional"] = match conditional_n_upper_prime_power(engine, d, true) {
            Ok(fact) => json!(fact),
            Err(BoundsError::NotApplicable(_)) => Value::Null,
            Err(e) => return Err(precondition(e)),
        };
    }
    Ok(row)
}

fn bounds(args: BoundsArgs) -> Result<(Outcome, Output), Failure> {
    let mut engine = match &args.facts {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
            BoundsEngine::from_json(&text).map_err(invalid)?
        }
        None => BoundsEngine::with_default_facts(),
    };
    engine.set_search_workers(args.workers.max(1));
    let payload = match args.d {
        Some(d) => bounds_row(&engine, d, &args)?,
        None => {
            let rows = (2..=10)
                .map(|d| bounds_row(&engine, d, &args))
                .collect::<Result<Vec<_>, _>>()?;
            json!({ "table": rows })
        }
    };
    let output = Output { out: args.output.out.clone() };
    Ok((Outcome::ok(payload.to_string()), output))
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (outcome, output) = match cli.command {
        Command::Construct(c) => construct(c)?,
        Command::Convert(c) => convert(c)?,
        Command::Verify(c) => verify(c)?,
        Command::Search(c) => search(c)?,
        Command::Bounds(b) => bounds(b)?,
    };
    emit(&output, &outcome.payload)?;
    Ok(outcome.affirmative)
}

fn fail(f: Failure) -> ExitCode {
    println!("{}", json!({"error": {"kind": f.kind, "message": f.message}}));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("usage error");
            let first = first.trim_start_matches("error: ").to_string();
            return fail(Failure::new("usage", first));
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => fail(f),
    }
}
