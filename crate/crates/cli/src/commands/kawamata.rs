use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use parachern::kawamata::{
    admissibility_check, descend_metric, random_invariant_metric, rebase_cover, AdmissibilityConfig, ChartConfig, LocalChart,
    LocalMetricField, MatrixFn,
};
use parachern::para::Weight;
use serde::Deserialize;
use serde_json::json;

use super::Input;
use crate::report::{parse_json, CliError, Outcome, RunConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct AdmissibleSpec {
    weights: Vec<String>,
    cover_degree: u32,
    #[serde(default = "default_dim")]
    dim: usize,
    metric: MetricSpec,
    #[serde(default)]
    rebase: Vec<u32>,
    #[serde(default = "default_expect")]
    expect_admissible: bool,
}

fn default_dim() -> usize {
    2
}

fn default_expect() -> bool {
    true
}

/// Where the metric comes from: a smooth metric on the cover that gets
/// descended, or a metric given directly below.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum MetricSpec {
    RandomInvariant {
        #[serde(default)]
        seed: Option<u64>,
    },
    IdentityLift,
    Gaussian,
    IdentityBelow,
}

fn identity(r: usize) -> MatrixFn {
    Arc::new(move |_: &[Complex64]| DMatrix::identity(r, r))
}

pub fn admissible(inputs: &[Input], config: &RunConfig) -> Result<Outcome, CliError> {
    let [input] = inputs else {
        return Err(CliError::Input(format!("{} takes one --input", config.command)));
    };
    let spec: AdmissibleSpec = parse_json(&input.text, &input.path)?;
    let bad = |e: String| CliError::Input(format!("{}: {e}", input.path.display()));
    let weights: Vec<Weight> = spec.weights.iter().map(|w| w.parse::<Weight>().map_err(|e| bad(e.to_string()))).collect::<Result<_, _>>()?;
    if weights.is_empty() {
        return Err(bad("at least one weight is needed".into()));
    }
    let chart = LocalChart::new(ChartConfig { dim: spec.dim, cover_degree: spec.cover_degree, ..ChartConfig::default() }).map_err(|e| bad(e.to_string()))?;
    let r = weights.len();
    let tol = config.tol.unwrap_or(1e-10);
    let runtime = |e: parachern::kawamata::KawamataError| CliError::Runtime(e.to_string());
    let lift: Option<MatrixFn> = match spec.metric {
        MetricSpec::RandomInvariant { seed } => {
            Some(random_invariant_metric(&weights, spec.cover_degree, seed.unwrap_or(config.seed)).map_err(|e| bad(e.to_string()))?)
        }
        MetricSpec::IdentityLift => Some(identity(r)),
        MetricSpec::Gaussian => Some(Arc::new(move |w: &[Complex64]| {
            DMatrix::identity(r, r) * Complex64::from((-w.iter().map(|x| x.norm_sqr()).sum::<f64>()).exp())
        })),
        MetricSpec::IdentityBelow => None,
    };
    let field = match &lift {
        Some(h) => descend_metric(h.clone(), &weights, &chart, 1e-8).map_err(runtime)?,
        None => LocalMetricField::from_function(chart.clone(), weights.clone(), identity(r)).map_err(runtime)?,
    };
    let acfg = AdmissibilityConfig::default();
    let rep = admissibility_check(&field, &acfg).map_err(runtime)?;
    let round_trip = lift.as_ref().map(|h| field.round_trip_deviation(h));
    let mut rebased = Vec::new();
    for &u in &spec.rebase {
        let again = rebase_cover(&field, u, &acfg).map_err(runtime)?;
        rebased.push(json!({ "u": u, "coverDegree": again.cover_degree, "admissible": again.admissible }));
    }
    let rebase_ok = |want: bool| rebased.iter().all(|v| v["admissible"].as_bool() == Some(want));
    let pass = if spec.expect_admissible {
        rep.admissible && round_trip.is_none_or(|d| d < tol) && rebase_ok(true)
    } else {
        !rep.admissible && rebase_ok(false)
    };
    let report = json!({
        "inputs": {
            "weights": weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "coverDegree": spec.cover_degree,
            "dim": spec.dim,
            "expectAdmissible": spec.expect_admissible,
            "tol": tol,
        },
        "admissible": rep.admissible,
        "bounded": rep.bounded,
        "positive": rep.positive,
        "cutConsistent": rep.cut_consistent,
        "limitEigenvalue": rep.limit_eigenvalue,
        "roundTripDeviation": round_trip,
        "rebase": rebased,
    });
    let field_json = serde_json::to_string(&field.to_json()).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(Outcome {
        report,
        pass,
        series: vec![("admissible_annuli.csv".into(), rep.to_csv()), ("admissible_field.json".into(), field_json + "\n")],
        consumed: vec![input.bytes.clone()],
    })
}
