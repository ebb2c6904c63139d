//! Command surface: the text format ([`parse`]) and the verification suites.

pub mod parse;
pub mod suites;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use parse::{parse_document, Document, InputError};
pub use suites::{run_suite, Check, Report, SuiteError, SuiteOptions, SUITES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Runs the verification suites; with only `--input`, parses and prints the document in normal form.
#[derive(Debug, Parser)]
#[command(name = "sketchlab", version)]
pub struct Args {
    /// Suite to run (`all` runs every suite).
    #[arg(long)]
    pub suite: Option<String>,
    /// Source document in the block grammar.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest carrier of enumerated spaces.
    #[arg(long)]
    pub max_space: Option<usize>,
    /// Largest directed index set.
    #[arg(long)]
    pub max_directed: Option<usize>,
    /// Largest carrier of enumerated models and algebras.
    #[arg(long)]
    pub max_model: Option<usize>,
    /// Largest test set for copreorder checks.
    #[arg(long)]
    pub test_bound: Option<usize>,
    /// Explicit carrier sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Generic size bound for suites without a more specific flag.
    #[arg(long)]
    pub max: Option<usize>,
    /// Resource guard: bounds above this are refused.
    #[arg(long, default_value_t = 4)]
    pub ceiling: usize,
    /// Run sweeps on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// List the suites and exit.
    #[arg(long)]
    pub list: bool,
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

/// Executes the command; returns the process exit code and the text to print.
pub fn execute(args: &Args) -> (i32, String) {
    if args.list {
        let mut out = String::new();
        for (name, about) in SUITES {
            let _ = writeln!(out, "{name:<22} {about}");
        }
        return (EXIT_PASS, out);
    }
    let doc = match &args.input {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_document(&text) {
                Ok(d) => Some(d),
                Err(e) => return (EXIT_INPUT, format!("{}: {e}\n", path.display())),
            },
            Err(e) => return (EXIT_INPUT, format!("{}: {e}\n", path.display())),
        },
        None => None,
    };
    let Some(suite) = &args.suite else {
        return match doc {
            Some(d) => (EXIT_PASS, d.print()),
            None => (EXIT_INPUT, "nothing to do: pass --suite or --input (see --help)\n".into()),
        };
    };
    let opts = SuiteOptions {
        max_space: args.max_space,
        max_directed: args.max_directed,
        max_model: args.max_model,
        test_bound: args.test_bound,
        sizes: args.sizes.clone(),
        max: args.max,
        ceiling: args.ceiling,
        exec: if args.sequential { crate::Exec::Sequential } else { crate::Exec::default() },
    };
    let names: Vec<&str> = if suite == "all" { SUITES.iter().map(|s| s.0).collect() } else { vec![suite.as_str()] };
    let mut out = String::new();
    let mut code = EXIT_PASS;
    for name in names {
        match run_suite(name, &opts, doc.as_ref()) {
            Ok(report) => {
                out.push_str(&match args.format {
                    Format::Text => report.to_text(),
                    Format::Json => report.to_json() + "\n",
                });
                if !report.passed {
                    code = EXIT_FAIL;
                }
            }
            Err(e) => {
                let _ = writeln!(out, "{name}: {e}");
                return (
                    match e {
                        SuiteError::ResourceGuard { .. } => EXIT_GUARD,
                        _ => EXIT_INPUT,
                    },
                    out,
                );
            }
        }
    }
    (code, out)
}
