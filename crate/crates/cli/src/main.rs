//! `coarse`: query a workspace of coarse spaces.
//!
//! Exit status: 0 In, 1 Out, 2 Unknown, 3 domain error, 4 input error.

mod query;
mod workspace;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use coarse_core::CoarseError;
use serde_json::{json, Value};

use query::{Query, Settings};
use workspace::Workspace;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resolve error: {0}")]
    Resolve(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{0}")]
    Domain(#[from] CoarseError),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 3,
            _ => 4,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Parse(_) => "ParseError".into(),
            CliError::Resolve(_) => "ResolveError".into(),
            CliError::Io(_) => "IoError".into(),
            CliError::Domain(e) => format!("{e:?}").split('(').next().unwrap_or("DomainError").to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "coarse", version, about = "Decide membership, coarseness and universal constructions for discrete coarse spaces")]
struct Cli {
    /// Workspace JSON file; `-` reads stdin.
    #[arg(long, global = true)]
    workspace: Option<String>,
    /// Word length for generated-structure searches.
    #[arg(long, global = true, default_value_t = 3)]
    depth: usize,
    /// Index bound for enumerated samples in reports.
    #[arg(long, global = true, default_value_t = 64)]
    window: u64,
    /// Generator budget for comparisons.
    #[arg(long, global = true, default_value_t = 8)]
    budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    query: Query,
}

/// One line of a `run` batch.
#[derive(Parser, Debug)]
#[command(no_binary_name = true)]
struct Line {
    #[command(subcommand)]
    query: Query,
}

/// Write errors (a closed pipe) are ignored.
fn emit(format: Format, report: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(report).expect("json")),
        Format::Text => {
            let obj = report.as_object().expect("object");
            let mut r = writeln!(out, "{}: {}", obj["query"].as_str().unwrap_or(""), obj["verdict"].as_str().unwrap_or(""));
            for (k, v) in obj {
                if r.is_ok() && !matches!(k.as_str(), "query" | "verdict" | "timings") {
                    r = writeln!(out, "  {k}: {}", serde_json::to_string(v).expect("json"));
                }
            }
            r
        }
    };
}

fn run_one(ws: &mut Workspace, settings: &Settings, q: &Query, text: String, format: Format) -> u8 {
    let start = Instant::now();
    let out = query::run(ws, settings, q);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    match out {
        Ok(mut report) => {
            let code = match report["verdict"].as_str() {
                Some("In") => 0,
                Some("Out") => 1,
                _ => 2,
            };
            report["query"] = json!(text);
            report["timings"] = json!({ "total_ms": ms });
            emit(format, &report);
            code
        }
        Err(e) => {
            let report = json!({ "query": text, "verdict": "Error", "error": { "kind": e.kind(), "message": e.to_string() }, "timings": { "total_ms": ms } });
            emit(format, &report);
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = Settings { depth: cli.depth, window: cli.window, budget: cli.budget, seed: cli.seed };
    let mut ws = match &cli.workspace {
        Some(path) => match Workspace::load(path) {
            Ok(ws) => ws,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.code());
            }
        },
        None => Workspace::default(),
    };
    let code = match &cli.query {
        Query::Run { queries } => {
            let mut code = 0;
            for text in queries {
                let words: Vec<&str> = text.split_whitespace().collect();
                code = match Line::try_parse_from(&words) {
                    Ok(line) => run_one(&mut ws, &settings, &line.query, text.clone(), cli.format),
                    Err(e) => {
                        eprintln!("error: bad query `{text}`: {e}");
                        4
                    }
                };
                if code > 2 {
                    break;
                }
            }
            code
        }
        q => run_one(&mut ws, &settings, q, std::env::args().skip(1).collect::<Vec<_>>().join(" "), cli.format),
    };
    ExitCode::from(code)
}
