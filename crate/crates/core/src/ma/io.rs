//! Problem files: a JSON header naming either a built-in data set or a CSV
//! grid file.
//!
//! Grid files hold one row per node with columns `i,j,eta` followed by
//! `t<a><b><p><q>_re,t<a><b><p><q>_im` for every curvature entry, where `a,b`
//! run over the bundle frame and `p,q` over the two coordinates, all from 1.
//! The curvature entry is the coefficient of `dz_p ∧ dz̄_q` in `Θ_ab`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::problem::{constant_fixture, he_rank2_fixture, perturbed_fixture, MaProblem};
use super::solver::MaSolution;
use super::{MaError, TorusGrid};
use crate::forms::CurvatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub rank: usize,
    pub grid: usize,
    /// `constant`, `perturbed` or `he-rank2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Amplitude of the cosine in the `perturbed` data set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Grid file, relative to the JSON file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<String>,
}

fn columns(rank: usize) -> Vec<String> {
    let mut cols = vec!["i".to_string(), "j".into(), "eta".into()];
    for a in 1..=rank {
        for b in 1..=rank {
            for p in 1..=2 {
                for q in 1..=2 {
                    cols.push(format!("t{a}{b}{p}{q}_re"));
                    cols.push(format!("t{a}{b}{p}{q}_im"));
                }
            }
        }
    }
    cols
}

/// Builds the problem an input file describes; `base` resolves relative grid files.
pub fn read_problem(spec: &ProblemSpec, base: &Path) -> Result<MaProblem, MaError> {
    match (&spec.builtin, &spec.fields) {
        (Some(name), None) => match name.as_str() {
            "constant" => constant_fixture(spec.rank, spec.grid),
            "perturbed" => perturbed_fixture(spec.rank, spec.grid, spec.epsilon.unwrap_or(0.1)),
            "he-rank2" if spec.rank == 2 => he_rank2_fixture(spec.grid),
            "he-rank2" => Err(MaError::Input(format!("builtin he-rank2 has rank 2, not {}", spec.rank))),
            other => Err(MaError::Input(format!("unknown builtin data set {other:?}"))),
        },
        (None, Some(file)) => read_grid_file(spec.rank, spec.grid, &base.join(file)),
        _ => Err(MaError::Input("exactly one of `builtin` and `fields` must be given".into())),
    }
}

fn read_grid_file(rank: usize, m: usize, path: &Path) -> Result<MaProblem, MaError> {
    let grid = TorusGrid::new(m)?;
    let mut rdr = csv::Reader::from_path(path).map_err(|e| MaError::Input(format!("{}: {e}", path.display())))?;
    let expected = columns(rank);
    let header: Vec<String> = rdr.headers().map_err(|e| MaError::Input(e.to_string()))?.iter().map(str::to_string).collect();
    if header != expected {
        return Err(MaError::Input(format!("{}: header should be {}", path.display(), expected.join(","))));
    }
    let n = grid.len();
    let mut eta = vec![f64::NAN; n];
    let mut theta: Vec<Option<CurvatureMatrix<Complex64>>> = vec![None; n];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| MaError::Input(e.to_string()))?;
        let at = |c: usize| -> Result<f64, MaError> {
            rec[c].trim().parse::<f64>().map_err(|e| MaError::Input(format!("{}: row {}, column {}: {e}", path.display(), line + 2, expected[c])))
        };
        let (i, j) = (at(0)? as usize, at(1)? as usize);
        if i >= m || j >= m {
            return Err(MaError::Input(format!("{}: row {}: node ({i}, {j}) outside the grid", path.display(), line + 2)));
        }
        let k = i * m + j;
        if theta[k].is_some() {
            return Err(MaError::Input(format!("{}: row {}: node ({i}, {j}) repeated", path.display(), line + 2)));
        }
        eta[k] = at(2)?;
        let mut raw = Vec::with_capacity(rank * rank * 4);
        for c in 0..rank * rank * 4 {
            raw.push(Complex64::new(at(3 + 2 * c)?, at(4 + 2 * c)?));
        }
        theta[k] = Some(CurvatureMatrix::from_raw(rank, 2, |a, b, p, q| raw[((a * rank + b) * 2 + p) * 2 + q]));
    }
    let theta: Option<Vec<_>> = theta.into_iter().collect();
    let theta = theta.ok_or_else(|| MaError::Input(format!("{}: not every node of the {m}×{m} grid is present", path.display())))?;
    MaProblem::new(rank, grid, theta, eta)
}

/// Writes a problem as a grid file that [`read_problem`] reads back.
pub fn write_problem_csv<W: std::io::Write>(problem: &MaProblem, out: W) -> Result<(), MaError> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| MaError::Input(e.to_string());
    let r = problem.rank();
    w.write_record(columns(r)).map_err(csv_err)?;
    let m = problem.grid().size();
    for (k, t) in problem.theta().iter().enumerate() {
        let mut row = vec![(k / m).to_string(), (k % m).to_string(), problem.raw_eta()[k].to_string()];
        for a in 0..r {
            for b in 0..r {
                for p in 0..2 {
                    for q in 0..2 {
                        let c = t.raw(a, b, p, q);
                        row.push(c.re.to_string());
                        row.push(c.im.to_string());
                    }
                }
            }
        }
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SolutionRow {
    i: usize,
    j: usize,
    x1: f64,
    x2: f64,
    phi: f64,
    residual: f64,
    min_eigenvalue: f64,
}

/// One row per node: `i,j,x1,x2,phi,residual,min_eigenvalue`.
pub fn solution_csv(problem: &MaProblem, sol: &MaSolution) -> Result<String, MaError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let m = problem.grid().size();
    for k in 0..problem.grid().len() {
        let (x1, x2) = problem.grid().coords(k);
        w.serialize(SolutionRow {
            i: k / m,
            j: k % m,
            x1,
            x2,
            phi: sol.phi[k],
            residual: sol.residual[k],
            min_eigenvalue: sol.omega[k].min_eigenvalue(),
        })
        .map_err(|e| MaError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| MaError::Input(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| MaError::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_files_round_trip() {
        let p = he_rank2_fixture(8).unwrap();
        let dir = std::env::temp_dir().join(format!("ma-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("fields.csv");
        write_problem_csv(&p, std::fs::File::create(&path).unwrap()).unwrap();
        let spec = ProblemSpec { rank: 2, grid: 8, builtin: None, epsilon: None, fields: Some("fields.csv".into()) };
        let q = read_problem(&spec, &dir).unwrap();
        assert_eq!(q.raw_eta(), p.raw_eta());
        assert_eq!(q.theta(), p.theta());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn spec_needs_one_source() {
        let spec = ProblemSpec { rank: 1, grid: 8, builtin: None, epsilon: None, fields: None };
        assert!(read_problem(&spec, Path::new(".")).is_err());
        let spec: ProblemSpec = serde_json::from_str(r#"{"rank":2,"grid":8,"builtin":"he-rank2"}"#).unwrap();
        assert!(read_problem(&spec, Path::new(".")).is_ok());
    }
}
