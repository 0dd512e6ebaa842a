use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const PASS: u8 = 0;
pub const CHECK_FAILED: u8 = 1;
pub const INPUT_ERROR: u8 = 2;
pub const RUNTIME_ERROR: u8 = 3;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, malformed or invalid input; the message names the location.
    #[error("input error: {0}")]
    Input(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => INPUT_ERROR,
            Self::Runtime(_) => RUNTIME_ERROR,
        }
    }
}

/// What a command produces before it is wrapped and written.
#[derive(Debug)]
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
    /// CSV series as `(file name, contents)`.
    pub series: Vec<(String, String)>,
    /// Bytes of every file read, in order; they enter the config hash.
    pub consumed: Vec<Vec<u8>>,
}

/// Reads an input file, keeping its bytes for hashing.
pub fn read_input(path: &Path) -> Result<(String, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((text, bytes))
}

/// Parses JSON, reporting syntax and schema failures with line and column.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of everything that determines the report: command, tolerances,
/// budgets, seed and the bytes of every input. Output location and worker
/// count are left out because they do not change the results.
pub fn config_hash(config: &RunConfig, consumed: &[Vec<u8>]) -> String {
    let canonical = json!({
        "command": config.command,
        "inputs": consumed.iter().map(|b| sha256_hex(b)).collect::<Vec<_>>(),
        "samples": config.samples,
        "seed": config.seed,
        "tol": config.tol,
    });
    sha256_hex(canonical.to_string().as_bytes())
}

pub fn envelope(config: &RunConfig, outcome: &Outcome) -> Value {
    json!({
        "tool": "parachern",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command,
        "configHash": config_hash(config, &outcome.consumed),
        "seed": config.seed,
        "pass": outcome.pass,
        "report": outcome.report,
    })
}

/// Writes `<command>.json` and the CSV series under `--out`, or prints the
/// report when no directory is given.
pub fn emit(config: &RunConfig, outcome: &Outcome) -> Result<u8, CliError> {
    let doc = envelope(config, outcome);
    let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
    match &config.out {
        Some(dir) => {
            let write = |name: &str, body: &str| {
                std::fs::write(dir.join(name), body).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.join(name).display())))
            };
            std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
            write(&format!("{}.json", config.command), &text)?;
            for (name, body) in &outcome.series {
                write(name, body)?;
            }
            println!("{}: {}", config.command, if outcome.pass { "PASS" } else { "FAIL" });
        }
        None => {
            print!("{text}");
            if !outcome.series.is_empty() {
                log::info!("{} CSV series skipped; pass --out to keep them", outcome.series.len());
            }
        }
    }
    Ok(if outcome.pass { PASS } else { CHECK_FAILED })
}

/// Serializes rows to CSV with a header.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

/// One row of an identity table.
#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), pass, detail: None }
    }

    pub fn with(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: Some(detail.into()) }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
