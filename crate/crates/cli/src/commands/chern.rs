use num_complex::Complex64;
use parachern::forms::{
    chern_forms, griffiths_test, kobayashi_lubke_rhs, nakano_test, segre_forms, Coeff, CurvatureMatrix, ExactCoeff, FormValue,
    SamplingConfig, Verdict,
};
use serde::Deserialize;
use serde_json::{json, Value};

use super::Input;
use crate::report::{all_pass, parse_json, Check, CliError, Outcome, RunConfig};

/// Curvature matrix file: `entries` lists the `r²` forms row by row.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurvatureSpec {
    rank: usize,
    dim: usize,
    #[serde(default)]
    exact: bool,
    entries: Vec<Value>,
    /// Hermitian metric row by row as `[re, im]`; the identity when absent.
    #[serde(default)]
    metric: Option<Vec<[f64; 2]>>,
}

pub fn chern(inputs: &[Input], config: &RunConfig) -> Result<Outcome, CliError> {
    let [input] = inputs else {
        return Err(CliError::Input(format!("{} takes one --input", config.command)));
    };
    let spec: CurvatureSpec = parse_json(&input.text, &input.path)?;
    let (report, pass) = if spec.exact { analyse::<ExactCoeff>(&spec, input, config)? } else { analyse::<Complex64>(&spec, input, config)? };
    Ok(Outcome { report, pass, series: Vec::new(), consumed: vec![input.bytes.clone()] })
}

fn analyse<C: Coeff>(spec: &CurvatureSpec, input: &Input, config: &RunConfig) -> Result<(Value, bool), CliError> {
    let bad = |e: String| CliError::Input(format!("{}: {e}", input.path.display()));
    let (r, n) = (spec.rank, spec.dim);
    if r == 0 || n == 0 || spec.entries.len() != r * r {
        return Err(bad(format!("rank {r} and dimension {n} need {} entries, found {}", r * r, spec.entries.len())));
    }
    let entries = spec
        .entries
        .iter()
        .enumerate()
        .map(|(k, v)| FormValue::<C>::from_json(n, v).map_err(|e| bad(format!("entry {}: {e}", k + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    let theta = CurvatureMatrix::new(r, entries).map_err(|e| bad(e.to_string()))?;
    let h: Option<Vec<Complex64>> = match &spec.metric {
        Some(m) if m.len() != r * r => return Err(bad(format!("metric needs {} entries, found {}", r * r, m.len()))),
        Some(m) => Some(m.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()),
        None => None,
    };
    let tol = config.tol.unwrap_or(1e-10);
    let c = chern_forms(&theta);
    let s = segre_forms(&c, n);
    let mut checks = Vec::new();
    let defect = theta.hermitian_defect(h.as_deref());
    checks.push(Check::with("curvature is Hermitian", defect <= tol, format!("defect {defect:e}")));
    let inverse_defect = (1..=n)
        .map(|k| (0..=k).fold(FormValue::<C>::zero(n), |acc, i| acc.add(&c.c(i).wedge(&s[k - i]))).max_abs())
        .fold(0.0, f64::max);
    checks.push(Check::with("Segre forms invert Chern forms", inverse_defect <= tol, format!("defect {inverse_defect:e}")));
    let real_defect = (0..=r).map(|k| c.c(k).sub(&c.c(k).conj_form()).max_abs()).fold(0.0, f64::max);
    checks.push(Check::with("Chern forms are real", real_defect <= tol, format!("defect {real_defect:e}")));
    let sampling = SamplingConfig { samples: config.samples.unwrap_or(2000), seed: config.seed, tol };
    let griffiths = griffiths_test(&theta, h.as_deref(), &sampling).map_err(|e| CliError::Runtime(e.to_string()))?;
    let nakano = nakano_test(&theta, h.as_deref(), tol).map_err(|e| CliError::Runtime(e.to_string()))?;
    let nakano_positive = nakano.verdict == Verdict::Positive;
    let griffiths_positive = griffiths.verdict == Verdict::Positive;
    checks.push(Check::new("Nakano positivity implies Griffiths positivity", !nakano_positive || griffiths_positive));
    let kl = if n == 2 { Some(kobayashi_lubke_rhs(&c, r).map_err(|e| CliError::Runtime(e.to_string()))?.to_json()) } else { None };
    let report = json!({
        "inputs": { "rank": r, "dim": n, "exact": spec.exact, "metric": spec.metric.is_some() },
        "chern": (0..=r).map(|k| c.c(k).to_json()).collect::<Vec<_>>(),
        "segre": s.iter().map(FormValue::to_json).collect::<Vec<_>>(),
        "kobayashiLubke": kl,
        "griffiths": { "verdict": griffiths.verdict, "margin": griffiths.margin },
        "nakano": { "verdict": nakano.verdict, "margin": nakano.margin },
        "checks": checks,
    });
    Ok((report, all_pass(&checks)))
}
