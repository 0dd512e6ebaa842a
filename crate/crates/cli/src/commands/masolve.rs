use parachern::ma::{normalize_problem, read_problem, solution_csv, solve, verify_conclusion, MaError, ProblemSpec, SolverConfig};
use serde::Serialize;
use serde_json::json;

use super::Input;
use crate::report::{parse_json, to_csv, CliError, Outcome, RunConfig};

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct NewtonRow {
    iteration: usize,
    residual: f64,
    damping: Option<f64>,
    min_eigenvalue: f64,
    linear_iterations: Option<usize>,
}

fn classify(e: MaError) -> CliError {
    match e {
        MaError::Input(_) | MaError::Shape(_) | MaError::GridSize(_) | MaError::NotReal(_) | MaError::NotClosed(_) | MaError::Io(_) => {
            CliError::Input(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

pub fn masolve(inputs: &[Input], config: &RunConfig) -> Result<Outcome, CliError> {
    let [input] = inputs else {
        return Err(CliError::Input(format!("{} takes one --input", config.command)));
    };
    let spec: ProblemSpec = parse_json(&input.text, &input.path)?;
    let mut consumed = vec![input.bytes.clone()];
    if let Some(f) = &spec.fields {
        let path = input.base().join(f);
        consumed.push(std::fs::read(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?);
    }
    let raw = read_problem(&spec, &input.base()).map_err(|e| match e {
        MaError::Input(m) => CliError::Input(m),
        other => classify(other),
    })?;
    let (problem, normalization) = normalize_problem(&raw).map_err(classify)?;
    let tol = config.tol.unwrap_or(1e-8);
    let solver = SolverConfig { tol, ..SolverConfig::default() };
    let sol = solve(&problem, &solver).map_err(classify)?;
    let conclusion = verify_conclusion(&sol.phi, &problem);
    let d = &sol.diagnostics;
    let residual = d.residuals.last().copied().unwrap_or(f64::NAN);
    // a line bundle has no second Chern form, so only the other two can be positive
    let positive = if problem.rank() == 1 { conclusion.c1_positive && conclusion.difference_positive } else { conclusion.all_positive() };
    let pass = residual < tol && positive && conclusion.target_deviation <= tol + 1e-12;
    let rows: Vec<NewtonRow> = (0..d.residuals.len())
        .map(|k| NewtonRow {
            iteration: k,
            residual: d.residuals[k],
            damping: k.checked_sub(1).map(|j| d.damping[j]),
            min_eigenvalue: d.min_eigenvalues[k],
            linear_iterations: k.checked_sub(1).map(|j| d.linear_iterations[j]),
        })
        .collect();
    let report = json!({
        "inputs": spec,
        "tol": tol,
        "normalization": normalization,
        "diagnostics": d,
        "residual": residual,
        "conclusion": conclusion,
        "pass": pass,
    });
    let series = vec![("masolve_newton.csv".into(), to_csv(&rows)?), ("masolve_solution.csv".into(), solution_csv(&problem, &sol).map_err(classify)?)];
    Ok(Outcome { report, pass, series, consumed })
}
