//! Command-line front end: read a problem document, evaluate it, and write
//! a JSON result document.
//!
//! The input is one problem object or an array of them (a batch, evaluated
//! concurrently). See [`document::ProblemDocument`] for the fields.

pub mod document;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Parser;
use hgm_core::{evaluate_in, EvalOptions, Rat, TableProblem};
use serde_json::Value;

use crate::document::ProblemDocument;
use crate::error::CliError;
use crate::output::{build_document, Extras, Render};

#[derive(Debug, Parser)]
#[command(name = "hgm", version, about = "Normalizing constant, expectations and their gradients for two-way contingency tables")]
pub struct Cli {
    /// Problem document (JSON); `-` reads standard input.
    pub input: PathBuf,

    /// Write the result here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Cross-check Z and the expectations against brute-force enumeration.
    #[arg(long)]
    pub oracle: bool,

    /// Use binary64 arithmetic instead of exact rationals.
    #[arg(long)]
    pub float: bool,

    /// Include the connection matrices Psi_ij at the target parameters.
    #[arg(long)]
    pub emit_pfaffian: bool,

    /// Include the contiguity matrix c_i at the target parameters.
    #[arg(long, value_name = "I")]
    pub emit_contiguity: Option<usize>,

    /// Significant digits of z_decimal.
    #[arg(long, default_value_t = 15, value_name = "N")]
    pub digits: usize,

    /// Do not print the summary line on standard error.
    #[arg(short, long)]
    pub quiet: bool,
}

/// Runs the tool with the process's standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdin.lock(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the tool against the given streams and returns the exit code.
pub fn run_with<I, S>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (value, code) = match read_input(&cli, stdin) {
        Ok(input) => process(&cli, input, stderr),
        Err(e) => (e.to_json(), e.exit_code()),
    };
    let text = serde_json::to_string_pretty(&value).expect("JSON values always serialize") + "\n";
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "hgm: cannot write output: {e}");
        return 2;
    }
    code
}

fn read_input(cli: &Cli, stdin: &mut dyn Read) -> Result<Value, CliError> {
    let path = cli.input.display().to_string();
    let mut text = String::new();
    if path == "-" {
        stdin.read_to_string(&mut text)
    } else {
        std::fs::File::open(&cli.input).and_then(|mut f| f.read_to_string(&mut text))
    }
    .map_err(|e| CliError::Io {
        path: path.clone(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        location: format!("{path}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Evaluates a single document or a batch; returns the output value and
/// the exit code (the largest over a batch).
fn process(cli: &Cli, input: Value, stderr: &mut dyn Write) -> (Value, i32) {
    match input {
        Value::Array(items) => {
            let n = items.len();
            let results: Vec<Mutex<Option<(Value, i32, String)>>> = (0..n).map(|_| Mutex::new(None)).collect();
            let next = AtomicUsize::new(0);
            let workers = std::thread::available_parallelism().map_or(1, |v| v.get()).min(n.max(1));
            std::thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(|| loop {
                        let a = next.fetch_add(1, Ordering::Relaxed);
                        if a >= n {
                            break;
                        }
                        let out = evaluate_one(cli, items[a].clone(), &format!("[{a}]."));
                        *results[a].lock().expect("no panics while holding the lock") = Some(out);
                    });
                }
            });
            let mut code = 0;
            let mut values = Vec::with_capacity(n);
            for (a, slot) in results.into_iter().enumerate() {
                let (v, c, summary) = slot.into_inner().expect("lock").expect("every item evaluated");
                if !cli.quiet {
                    let _ = writeln!(stderr, "[{a}] {summary}");
                }
                code = code.max(c);
                values.push(v);
            }
            (Value::Array(values), code)
        }
        single => {
            let (v, c, summary) = evaluate_one(cli, single, "");
            if !cli.quiet {
                let _ = writeln!(stderr, "{summary}");
            }
            (v, c)
        }
    }
}

fn evaluate_one(cli: &Cli, value: Value, location: &str) -> (Value, i32, String) {
    let outcome = ProblemDocument::from_value(value, location)
        .and_then(|doc| doc.to_problem(location))
        .and_then(|problem| {
            if cli.float {
                evaluate_document::<f64>(cli, &problem)
            } else {
                evaluate_document::<Rat>(cli, &problem)
            }
        });
    match outcome {
        Ok((v, summary)) => (v, 0, summary),
        Err(e) => {
            let summary = format!("error: {e}");
            (e.to_json(), e.exit_code(), summary)
        }
    }
}

fn evaluate_document<T: Render>(cli: &Cli, problem: &TableProblem) -> Result<(Value, String), CliError> {
    let result = evaluate_in::<T>(
        problem,
        EvalOptions {
            oracle: cli.oracle,
            skip_gradients: false,
        },
    )?;
    let doc = build_document(
        &result,
        Extras {
            digits: cli.digits,
            pfaffian: cli.emit_pfaffian,
            contiguity: cli.emit_contiguity,
        },
    )?;
    let summary = format!(
        "Z = {} (e = {}, {} ms)",
        doc.z_decimal, doc.diagnostics.e, doc.diagnostics.millis
    );
    let value = serde_json::to_value(&doc).expect("result documents always serialize");
    Ok((value, summary))
}
