use std::collections::BTreeMap;

use num_rational::Rational64;

use super::filtration::my_filtration;
use super::model::{ParabolicModel, PointData};
use super::weight::Weight;
use super::ParabolicError;

/// `deg E + Σ a` over all weights.
pub fn par_degree_sum_form(model: &ParabolicModel) -> Rational64 {
    Rational64::from_integer(model.degree()) + model.weight_total()
}

/// `r·#points + ∫_0^1 deg(E_t) dt`, evaluated on the filtration.
pub fn par_degree_integral_form(model: &ParabolicModel) -> Rational64 {
    let ff = my_filtration(model);
    Rational64::from_integer((model.rank() * model.points().len()) as i64) + ff.integral_of_degree()
}

/// Parabolic degree. Both closed forms are evaluated and must agree.
pub fn par_degree(model: &ParabolicModel) -> Rational64 {
    let sum = par_degree_sum_form(model);
    let integral = par_degree_integral_form(model);
    assert_eq!(sum, integral, "parabolic degree forms disagree for {model:?}");
    sum
}

fn same_labels(a: &ParabolicModel, b: &ParabolicModel) -> Result<(), ParabolicError> {
    if a.points().keys().ne(b.points().keys()) {
        return Err(ParabolicError::IncompatibleDivisors(a.labels(), b.labels()));
    }
    Ok(())
}

/// The dual parabolic bundle. Nonzero weights go to `1 - a`; the underlying
/// bundle is `(E_{ε-1})^*`, whose degree picks up one for each nonzero weight.
pub fn dual(model: &ParabolicModel) -> ParabolicModel {
    let mut nonzero = 0i64;
    let points: BTreeMap<String, PointData> = model
        .points()
        .iter()
        .map(|(label, p)| {
            nonzero += (p.len() - p.zero_count()) as i64;
            (label.clone(), PointData::new(p.weights().iter().map(|w| w.dual()).collect()))
        })
        .collect();
    ParabolicModel::from_parts(model.rank(), -model.degree() - nonzero, points)
}

/// Tensor product. Weights add modulo one; every wrap-around lowers the
/// filtration by one step and so raises the underlying degree by one.
pub fn tensor(a: &ParabolicModel, b: &ParabolicModel) -> Result<ParabolicModel, ParabolicError> {
    same_labels(a, b)?;
    let mut wraps = 0i64;
    let mut points = BTreeMap::new();
    for (label, pa) in a.points() {
        let pb = &b.points()[label];
        let mut ws = Vec::with_capacity(pa.len() * pb.len());
        for x in pa.weights() {
            for y in pb.weights() {
                let s = x.value() + y.value();
                if s >= Rational64::from_integer(1) {
                    wraps += 1;
                }
                ws.push(Weight::fract_of(s));
            }
        }
        points.insert(label.clone(), PointData::new(ws));
    }
    let (ra, rb) = (a.rank() as i64, b.rank() as i64);
    let degree = rb * a.degree() + ra * b.degree() + wraps;
    Ok(ParabolicModel::from_parts(a.rank() * b.rank(), degree, points))
}

pub fn direct_sum(a: &ParabolicModel, b: &ParabolicModel) -> Result<ParabolicModel, ParabolicError> {
    same_labels(a, b)?;
    let points = a
        .points()
        .iter()
        .map(|(label, pa)| {
            let mut ws = pa.weights().to_vec();
            ws.extend_from_slice(b.points()[label].weights());
            (label.clone(), PointData::new(ws))
        })
        .collect();
    Ok(ParabolicModel::from_parts(a.rank() + b.rank(), a.degree() + b.degree(), points))
}

/// Determinant line: weight `Σ a mod 1` at each point.
pub fn det(model: &ParabolicModel) -> ParabolicModel {
    let mut degree = model.degree();
    let points = model
        .points()
        .iter()
        .map(|(label, p)| {
            let s = p.weight_sum();
            degree += s.floor().to_integer();
            (label.clone(), PointData::new(vec![Weight::fract_of(s)]))
        })
        .collect();
    ParabolicModel::from_parts(1, degree, points)
}
