use std::f64::consts::PI;

use num_complex::Complex64;
use parachern::forms::{chern_forms, segre_forms, CurvatureMatrix, FormValue};
use parachern::pushforward::{monte_carlo_scalar, scalar_fiber_integral, symbolic_pushforward, MonteCarloConfig, QuadratureConfig};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Input;
use crate::report::{parse_json, to_csv, CliError, Outcome, RunConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PushforwardSpec {
    /// Positive fiber parameters, one per line summand.
    c: Vec<f64>,
    /// Base dimension of the curvature used for the coefficient comparison.
    #[serde(default = "default_dim")]
    dim: usize,
}

fn default_dim() -> usize {
    2
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SeriesRow {
    points: usize,
    value: f64,
    error_estimate: f64,
    relative_error: f64,
    cells: usize,
}

pub fn pushforward(inputs: &[Input], config: &RunConfig) -> Result<Outcome, CliError> {
    let [input] = inputs else {
        return Err(CliError::Input(format!("{} takes one --input", config.command)));
    };
    let spec: PushforwardSpec = parse_json(&input.text, &input.path)?;
    let bad = |e: String| CliError::Input(format!("{}: {e}", input.path.display()));
    let r = spec.c.len();
    if !(1..=4).contains(&r) || !(1..=3).contains(&spec.dim) {
        return Err(bad(format!("need 1 to 4 parameters and dimension 1 to 3, got {r} and {}", spec.dim)));
    }
    if let Some(x) = spec.c.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(bad(format!("parameters must be positive, got {x}")));
    }
    let runtime = |e: parachern::pushforward::PushforwardError| CliError::Runtime(e.to_string());
    let tol = config.tol.unwrap_or(1e-6);
    let product: f64 = spec.c.iter().product();
    let closed = 1.0 / product;
    let quad_cfg = QuadratureConfig { tolerance: tol, ..QuadratureConfig::default() };
    let quad = scalar_fiber_integral(&spec.c, &quad_cfg).map_err(runtime)?;
    let mut series = Vec::new();
    for points in [2, 4, quad_cfg.points] {
        let q = scalar_fiber_integral(&spec.c, &QuadratureConfig { points, tolerance: f64::INFINITY, ..quad_cfg }).map_err(runtime)?;
        series.push(SeriesRow { points, value: q.value, error_estimate: q.error_estimate, relative_error: (q.value * product - 1.0).abs(), cells: q.cells });
    }
    let mc_cfg = MonteCarloConfig { samples: config.samples.unwrap_or(100_000), seed: config.seed, target_stderr: None };
    let mc = monte_carlo_scalar(&spec.c, &mc_cfg).map_err(runtime)?;
    // (i/2π)Θ = diag(c) ⊗ Σ i dz ∧ dz̄
    let n = spec.dim;
    let theta = CurvatureMatrix::from_raw(r, n, |a, b, i, j| if a == b && i == j { Complex64::new(2.0 * PI * spec.c[a], 0.0) } else { Complex64::default() });
    let pushed = symbolic_pushforward(&theta).map_err(runtime)?;
    let segre = segre_forms(&chern_forms(&theta), n);
    let max_dev = pushed
        .iter()
        .zip(&segre)
        .map(|(p, s): (&FormValue<Complex64>, _)| p.sub(s).max_abs() / s.max_abs().max(1.0))
        .fold(0.0, f64::max);
    let relative_error = (quad.value * product - 1.0).abs();
    let sigma = (mc.mean - closed).abs() / mc.stderr;
    let pass = relative_error < tol && mc.agrees_with(closed, 3.0) && max_dev < 1e-10;
    let report = json!({
        "inputs": { "c": spec.c, "dim": n, "tol": tol, "samples": mc_cfg.samples, "seed": config.seed },
        "closedForm": closed,
        "quadrature": {
            "value": quad.value,
            "errorEstimate": quad.error_estimate,
            "tailBound": quad.tail_bound,
            "truncation": quad.truncation,
            "cells": quad.cells,
            "relativeError": relative_error,
        },
        "monteCarlo": { "mean": mc.mean, "stderr": mc.stderr, "samples": mc.samples, "sigmas": sigma },
        "maxCoeffDeviation": max_dev,
        "pass": pass,
    });
    Ok(Outcome { report, pass, series: vec![("pushforward_quadrature.csv".into(), to_csv(&series)?)], consumed: vec![input.bytes.clone()] })
}
