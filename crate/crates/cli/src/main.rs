//! `buchi`: maximal Büchi sequence lengths modulo odd prime powers.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or input error,
//! 3 resource cap exceeded.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use buchi_core::arith::{square_table, Limits, PrimePowerModulus};
use buchi_core::formulas::Fault;
use buchi_core::polyspace::{is_square_poly_direct, QuadPoly};
use buchi_core::record::{self, LengthRecord, OutputRecord};
use buchi_core::search::{self, buchi_length, F2Selection, SweepOptions};
use buchi_core::verify::{self, GridSpec};
use buchi_core::Error;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(name = "buchi", version, about = "Non-trivial Büchi sequences of quadratic polynomials modulo p^s")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Length of the Büchi sequence of one polynomial, and whether it is trivial.
    Length {
        #[command(flatten)]
        modulus: ModulusArgs,
        #[arg(long, allow_negative_numbers = true)]
        f2: i64,
        #[arg(long, allow_negative_numbers = true)]
        f1: i64,
        #[arg(long, allow_negative_numbers = true)]
        f0: i64,
    },
    /// opt(p^s, f2) by closed form, exhaustive search, or both.
    Opt {
        #[command(flatten)]
        modulus: ModulusArgs,
        #[arg(long, allow_negative_numbers = true)]
        f2: i64,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, env = "BUCHI_JOBS")]
        jobs: Option<usize>,
    },
    /// One record per leading coefficient class.
    #[command(group(ArgGroup::new("selection").args(["all", "representatives"])))]
    Sweep {
        #[command(flatten)]
        modulus: ModulusArgs,
        /// Every f2 in [0, p^s).
        #[arg(long)]
        all: bool,
        /// One f2 per (order, character) pair, plus zero.
        #[arg(long)]
        representatives: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "BUCHI_JOBS")]
        jobs: Option<usize>,
        /// Fill the elapsed_ms column (makes output run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// Compare closed form with exhaustive search and run the property suite.
    Verify {
        /// `default`, or a JSON file listing {p, s, mode} objects.
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "BUCHI_JOBS")]
        jobs: Option<usize>,
        /// Skip the property suite.
        #[arg(long)]
        no_lemmas: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(clap::Args)]
struct ModulusArgs {
    /// Odd prime.
    #[arg(long)]
    p: u64,
    /// Exponent, at least 1.
    #[arg(long)]
    s: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Formula,
    Brute,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } | Error::BudgetExceeded { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("buchi: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // only fails if the global pool was already built
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn modulus(args: &ModulusArgs, limits: &Limits) -> Result<PrimePowerModulus, Failure> {
    Ok(PrimePowerModulus::with_cap(args.p, args.s, limits.max_modulus)?)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let limits = Limits::from_env();
    match cli.command {
        Command::Length { modulus: m, f2, f1, f0 } => {
            let start = Instant::now();
            let modulus = modulus(&m, &limits)?;
            let squares = square_table(modulus, &limits)?;
            let f = QuadPoly::new(modulus, f2, f1, f0);
            let [f2, f1, f0] = f.coefficients();
            let rec = LengthRecord {
                p: modulus.p(),
                s: modulus.s(),
                modulus: modulus.modulus(),
                f2,
                f1,
                f0,
                length: buchi_length(&f, &squares)?,
                trivial: is_square_poly_direct(&f),
                elapsed_ms: Some(start.elapsed().as_millis() as u64),
            };
            println!("{}", serde_json::to_string(&rec).expect("record serializes"));
            Ok(0)
        }
        Command::Opt {
            modulus: m,
            f2,
            method,
            format,
            jobs,
        } => {
            configure_jobs(jobs);
            let modulus = modulus(&m, &limits)?;
            let options = SweepOptions {
                brute: matches!(method, Method::Brute | Method::Both),
                formula: matches!(method, Method::Formula | Method::Both),
                timings: true,
            };
            let rec = search::opt_record(modulus, modulus.residue(f2), None, options, &limits)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string(&rec).expect("record serializes")),
                Format::Csv => print!("{}", record::to_csv(std::slice::from_ref(&rec))),
            }
            Ok(if rec.disagrees() { EXIT_MISMATCH } else { 0 })
        }
        Command::Sweep {
            modulus: m,
            all: _,
            representatives,
            format,
            out,
            jobs,
            timings,
        } => {
            configure_jobs(jobs);
            let modulus = modulus(&m, &limits)?;
            let selection = if representatives {
                F2Selection::Representatives
            } else {
                F2Selection::All
            };
            let options = SweepOptions {
                timings,
                ..SweepOptions::both()
            };
            let records = search::sweep(modulus, selection, options, &limits)?;
            let text = render(&records, format);
            emit(out.as_deref(), &text)?;
            Ok(if records.iter().any(OutputRecord::disagrees) {
                EXIT_MISMATCH
            } else {
                0
            })
        }
        Command::Verify {
            grid,
            format,
            out,
            jobs,
            no_lemmas,
            inject_fault,
        } => {
            let mut spec = if grid == "default" {
                GridSpec::default_grid()
            } else {
                let text = fs::read_to_string(&grid).map_err(|e| Failure {
                    code: EXIT_USAGE,
                    message: format!("{grid}: {e}"),
                })?;
                GridSpec::from_json(&text)?
            };
            spec.limits = limits;
            spec.jobs = jobs;
            if inject_fault {
                spec.fault = Some(Fault::OddOrderOffByOne);
            }
            let report = if no_lemmas {
                verify::verify_main(&spec)
            } else {
                verify::verify(&spec)
            };
            match format {
                ReportFormat::Json => {
                    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
                    emit(out.as_deref(), &json)?;
                    eprint!("{}", report.summary());
                }
                ReportFormat::Text => emit(out.as_deref(), &report.summary())?,
            }
            Ok(if report.passed() { 0 } else { EXIT_MISMATCH })
        }
    }
}

fn render(records: &[OutputRecord], format: Format) -> String {
    match format {
        Format::Csv => record::to_csv(records),
        Format::Json => serde_json::to_string_pretty(records).expect("records serialize") + "\n",
    }
}

/// Writes to stdout, or atomically to `path` via a sibling temp file.
fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        None => io::stdout().lock().write_all(text.as_bytes()),
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.persist(path).map_err(|e| e.error)?;
            Ok(())
        }
    }
}
