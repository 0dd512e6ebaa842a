use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::report::{self, emit, envelope, read_input, CliError, Outcome, RunConfig, PASS};

mod chern;
mod kawamata;
mod masolve;
mod para;
mod pushforward;

/// An input document with the name it is reported under.
pub struct Input {
    pub path: PathBuf,
    pub text: String,
    pub bytes: Vec<u8>,
}

impl Input {
    fn load(path: &Path) -> Result<Self, CliError> {
        let (text, bytes) = read_input(path)?;
        Ok(Self { path: path.to_path_buf(), text, bytes })
    }

    fn builtin(name: &str, text: &str) -> Self {
        Self { path: PathBuf::from(format!("<builtin>/{name}")), text: text.to_string(), bytes: text.as_bytes().to_vec() }
    }

    /// Directory that relative references inside the document resolve against.
    pub fn base(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }
}

type Runner = fn(&[Input], &RunConfig) -> Result<Outcome, CliError>;

fn runner(command: &str) -> Option<Runner> {
    Some(match command {
        "pardeg" => para::pardeg,
        "ops" => para::ops,
        "admissible" => kawamata::admissible,
        "chern" => chern::chern,
        "pushforward" => pushforward::pushforward,
        "masolve" => masolve::masolve,
        _ => return None,
    })
}

pub fn run(config: &RunConfig) -> Result<u8, CliError> {
    if config.command == "all" {
        return run_all(config);
    }
    let run = runner(&config.command).ok_or_else(|| CliError::Input(format!("unknown command {}", config.command)))?;
    if config.inputs.is_empty() {
        return Err(CliError::Input(format!("{} needs --input", config.command)));
    }
    let inputs = config.inputs.iter().map(|p| Input::load(p)).collect::<Result<Vec<_>, _>>()?;
    let outcome = run(&inputs, config)?;
    emit(config, &outcome)
}

const BUILTIN: [(&str, &str, &str); 6] = [
    ("pardeg", "half_half.json", include_str!("../../fixtures/half_half.json")),
    ("ops", "three_points.json", include_str!("../../fixtures/three_points.json")),
    ("admissible", "admissible_round_trip.json", include_str!("../../fixtures/admissible_round_trip.json")),
    ("chern", "curvature_rank2.json", include_str!("../../fixtures/curvature_rank2.json")),
    ("pushforward", "pushforward_12.json", include_str!("../../fixtures/pushforward_12.json")),
    ("masolve", "ma_he_rank2.json", include_str!("../../fixtures/ma_he_rank2.json")),
];

/// Runs every command on its built-in fixture. The exit code is the worst
/// of the individual codes.
fn run_all(config: &RunConfig) -> Result<u8, CliError> {
    let mut runs: Vec<Value> = Vec::new();
    let mut worst = PASS;
    let mut consumed = Vec::new();
    let mut series = Vec::new();
    for (command, name, text) in BUILTIN {
        let input = Input::builtin(name, text);
        let sub = RunConfig { command: command.to_string(), inputs: vec![input.path.clone()], ..config.clone() };
        let run = runner(command).expect("built-in command");
        consumed.push(input.bytes.clone());
        match run(std::slice::from_ref(&input), &sub) {
            Ok(outcome) => {
                if !outcome.pass {
                    worst = worst.max(report::CHECK_FAILED);
                }
                let doc = envelope(&sub, &outcome);
                let text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))? + "\n";
                series.push((format!("{command}.json"), text));
                series.extend(outcome.series);
                runs.push(doc);
            }
            Err(e) => {
                worst = worst.max(e.exit_code());
                runs.push(json!({ "command": command, "error": e.to_string(), "exitCode": e.exit_code() }));
            }
        }
    }
    let outcome = Outcome { report: json!({ "runs": runs }), pass: worst == PASS, series, consumed };
    let code = emit(config, &outcome)?;
    Ok(code.max(worst))
}
