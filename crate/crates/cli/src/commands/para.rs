use num_rational::Rational64;
use parachern::para::{
    check_filtration_properties, det, direct_sum, dual, par_degree, par_degree_integral_form, par_degree_sum_form, slope, tensor,
    ModelReadError, ParabolicModel,
};
use serde_json::json;

use super::Input;
use crate::report::{all_pass, Check, CliError, Outcome, RunConfig};

const FILTRATION_PROPERTIES: [&str; 6] =
    ["decreasing", "left continuous", "periodic under twisting", "starts at the bundle", "finitely many jumps", "jumps at the weights"];

fn read_model(input: &Input) -> Result<ParabolicModel, CliError> {
    ParabolicModel::from_json_str(&input.text).map_err(|e| match e {
        ModelReadError::Json(j) => CliError::Input(format!("{}:{}:{}: {j}", input.path.display(), j.line(), j.column())),
        ModelReadError::Invalid(p) => CliError::Input(format!("{}: invalid model: {p}", input.path.display())),
    })
}

fn structural_checks(name: &str, m: &ParabolicModel) -> Vec<Check> {
    let (sum, integral) = (par_degree_sum_form(m), par_degree_integral_form(m));
    let mut out = vec![Check::with(format!("{name}: sum form equals integral form"), sum == integral, format!("{sum} vs {integral}"))];
    let filt = check_filtration_properties(m, 2);
    for (label, ok) in FILTRATION_PROPERTIES.iter().zip(filt.as_array()) {
        out.push(Check::new(format!("{name}: filtration {label}"), ok));
    }
    out
}

pub fn pardeg(inputs: &[Input], config: &RunConfig) -> Result<Outcome, CliError> {
    let [input] = inputs else {
        return Err(CliError::Input(format!("{} takes one --input", config.command)));
    };
    let m = read_model(input)?;
    let checks = structural_checks("model", &m);
    let report = json!({
        "inputs": m.to_json_value(),
        "parDegree": par_degree(&m).to_string(),
        "sumForm": par_degree_sum_form(&m).to_string(),
        "integralForm": par_degree_integral_form(&m).to_string(),
        "slope": slope(&m).to_string(),
        "coverDegree": m.cover_degree(),
        "checks": checks,
    });
    Ok(Outcome { report, pass: all_pass(&checks), series: Vec::new(), consumed: vec![input.bytes.clone()] })
}

fn identity(name: &str, lhs: Rational64, rhs: Rational64) -> Check {
    Check::with(name, lhs == rhs, format!("{lhs} vs {rhs}"))
}

/// Operations on one model, or on a pair when two inputs are given.
pub fn ops(inputs: &[Input], config: &RunConfig) -> Result<Outcome, CliError> {
    let (a, b) = match inputs {
        [a] => (read_model(a)?, read_model(a)?),
        [a, b] => (read_model(a)?, read_model(b)?),
        _ => return Err(CliError::Input(format!("{} takes one or two --input files", config.command))),
    };
    let incompatible = |e: parachern::para::ParabolicError| CliError::Input(e.to_string());
    let d = dual(&a);
    let dd = dual(&d);
    let de = det(&a);
    let t = tensor(&a, &b).map_err(incompatible)?;
    let s = direct_sum(&a, &b).map_err(incompatible)?;
    let (pa, pb) = (par_degree(&a), par_degree(&b));
    let (ra, rb) = (Rational64::from(a.rank() as i64), Rational64::from(b.rank() as i64));
    let mut checks = vec![
        identity("dual negates the parabolic degree", par_degree(&d), -pa),
        Check::new("dual is an involution", dd == a),
        identity("determinant keeps the parabolic degree", par_degree(&de), pa),
        identity("tensor product follows the bilinear rule", par_degree(&t), rb * pa + ra * pb),
        identity("direct sum adds parabolic degrees", par_degree(&s), pa + pb),
    ];
    for (name, m) in [("first", &a), ("second", &b), ("dual", &d), ("determinant", &de), ("tensor", &t), ("sum", &s)] {
        checks.extend(structural_checks(name, m));
    }
    let report = json!({
        "inputs": [a.to_json_value(), b.to_json_value()],
        "results": {
            "dual": d.to_json_value(),
            "determinant": de.to_json_value(),
            "tensor": t.to_json_value(),
            "directSum": s.to_json_value(),
        },
        "parDegrees": {
            "first": pa.to_string(),
            "second": pb.to_string(),
            "dual": par_degree(&d).to_string(),
            "determinant": par_degree(&de).to_string(),
            "tensor": par_degree(&t).to_string(),
            "directSum": par_degree(&s).to_string(),
        },
        "checks": checks,
    });
    let consumed = inputs.iter().map(|i| i.bytes.clone()).collect();
    Ok(Outcome { report, pass: all_pass(&checks), series: Vec::new(), consumed })
}
