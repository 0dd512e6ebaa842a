use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::weight::{lcm_of_denominators, Weight};
use super::ParabolicError;

/// Weights at one divisor point, sorted nondecreasingly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointData {
    weights: Vec<Weight>,
}

impl PointData {
    pub fn new(mut weights: Vec<Weight>) -> Self {
        weights.sort();
        Self { weights }
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Distinct weights with their multiplicities, in increasing order.
    pub fn multiplicities(&self) -> Vec<(Weight, usize)> {
        let mut out: Vec<(Weight, usize)> = Vec::new();
        for &w in &self.weights {
            match out.last_mut() {
                Some((last, m)) if *last == w => *m += 1,
                _ => out.push((w, 1)),
            }
        }
        out
    }

    /// Ranks of the flag steps `F_j`: the number of weights `>= a_j` for each distinct `a_j`.
    pub fn flag_ranks(&self) -> Vec<usize> {
        let mut remaining = self.weights.len();
        let mut ranks = Vec::new();
        for (_, m) in self.multiplicities() {
            ranks.push(remaining);
            remaining -= m;
        }
        ranks
    }

    pub fn weight_sum(&self) -> Rational64 {
        self.weights.iter().map(|w| w.value()).fold(Rational64::zero(), |a, b| a + b)
    }

    pub fn zero_count(&self) -> usize {
        self.weights.iter().filter(|w| w.is_zero()).count()
    }
}

/// A parabolic bundle on a curve: rank, degree of the underlying bundle and
/// weights at each marked point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParabolicModel {
    rank: usize,
    degree: i64,
    points: BTreeMap<String, PointData>,
    cover_degree: u64,
}

impl ParabolicModel {
    pub fn new<L: Into<String>>(
        rank: usize,
        degree: i64,
        points: impl IntoIterator<Item = (L, Vec<Weight>)>,
    ) -> Result<Self, ParabolicError> {
        if rank == 0 {
            return Err(ParabolicError::ZeroRank);
        }
        let mut map = BTreeMap::new();
        for (label, weights) in points {
            let label = label.into();
            if weights.len() != rank {
                return Err(ParabolicError::WrongWeightCount { label, found: weights.len(), rank });
            }
            map.insert(label, PointData::new(weights));
        }
        let cover_degree = lcm_of_denominators(map.values().flat_map(|p| p.weights.iter()));
        Ok(Self { rank, degree, points: map, cover_degree })
    }

    /// Shorthand for tests and fixtures: weights given as `(num, den)` pairs.
    pub fn from_fractions(
        rank: usize,
        degree: i64,
        points: &[(&str, &[(i64, i64)])],
    ) -> Result<Self, ParabolicError> {
        let mut parsed = Vec::with_capacity(points.len());
        for (label, ws) in points {
            let ws = ws
                .iter()
                .map(|&(a, b)| Weight::from_fraction(a, b))
                .collect::<Result<Vec<_>, _>>()?;
            parsed.push((label.to_string(), ws));
        }
        Self::new(rank, degree, parsed)
    }

    /// A bundle without marked points.
    pub fn plain(rank: usize, degree: i64) -> Result<Self, ParabolicError> {
        Self::new::<String>(rank, degree, [])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn points(&self) -> &BTreeMap<String, PointData> {
        &self.points
    }

    pub fn cover_degree(&self) -> u64 {
        self.cover_degree
    }

    pub fn labels(&self) -> Vec<String> {
        self.points.keys().cloned().collect()
    }

    /// True when some weight is nonzero. Models with only zero weights carry the
    /// trivial parabolic structure.
    pub fn is_parabolic(&self) -> bool {
        self.points.values().any(|p| p.weights.iter().any(|w| !w.is_zero()))
    }

    pub fn weight_total(&self) -> Rational64 {
        self.points.values().map(PointData::weight_sum).fold(Rational64::zero(), |a, b| a + b)
    }

    pub(crate) fn from_parts(rank: usize, degree: i64, points: BTreeMap<String, PointData>) -> Self {
        let cover_degree = lcm_of_denominators(points.values().flat_map(|p| p.weights.iter()));
        Self { rank, degree, points, cover_degree }
    }

    pub fn from_json_str(s: &str) -> Result<Self, ModelReadError> {
        let raw: ModelJson = serde_json::from_str(s).map_err(ModelReadError::Json)?;
        Self::try_from(raw).map_err(ModelReadError::Invalid)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(ModelJson::from(self)).expect("model serializes")
    }
}

/// Failure reading a model: either malformed JSON (with line/column) or a
/// well-formed document describing an invalid model.
#[derive(Debug, thiserror::Error)]
pub enum ModelReadError {
    #[error("malformed JSON: {0}")]
    Json(serde_json::Error),
    #[error("invalid model: {0}")]
    Invalid(ParabolicError),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub rank: usize,
    pub degree: i64,
    #[serde(default)]
    pub points: BTreeMap<String, Vec<String>>,
    #[serde(rename = "coverDegree", default, skip_serializing_if = "Option::is_none")]
    pub cover_degree: Option<u64>,
}

impl From<&ParabolicModel> for ModelJson {
    fn from(m: &ParabolicModel) -> Self {
        Self {
            rank: m.rank,
            degree: m.degree,
            points: m
                .points
                .iter()
                .map(|(k, p)| (k.clone(), p.weights.iter().map(Weight::to_string).collect()))
                .collect(),
            cover_degree: Some(m.cover_degree),
        }
    }
}

impl TryFrom<ModelJson> for ParabolicModel {
    type Error = ParabolicError;

    fn try_from(raw: ModelJson) -> Result<Self, Self::Error> {
        let mut pts = Vec::with_capacity(raw.points.len());
        for (label, ws) in raw.points {
            let ws = ws.iter().map(|s| s.parse::<Weight>()).collect::<Result<Vec<_>, _>>()?;
            pts.push((label, ws));
        }
        let model = ParabolicModel::new(raw.rank, raw.degree, pts)?;
        if let Some(given) = raw.cover_degree {
            if given != model.cover_degree {
                return Err(ParabolicError::CoverDegreeMismatch { given, expected: model.cover_degree });
            }
        }
        Ok(model)
    }
}

impl Serialize for ParabolicModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParabolicModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = ModelJson::deserialize(d)?;
        ParabolicModel::try_from(raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let src = r#"{"rank":2,"degree":1,"points":{"p":["1/4","3/4"],"q":["0","1/2"]},"coverDegree":4}"#;
        let m = ParabolicModel::from_json_str(src).unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(m.cover_degree(), 4);
        let back: ParabolicModel = serde_json::from_value(m.to_json_value()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn json_errors() {
        let bad_weight = r#"{"rank":1,"degree":0,"points":{"p":["3/2"]},"coverDegree":2}"#;
        assert!(matches!(
            ParabolicModel::from_json_str(bad_weight),
            Err(ModelReadError::Invalid(ParabolicError::WeightOutOfRange(_)))
        ));
        let bad_cover = r#"{"rank":1,"degree":0,"points":{"p":["1/2"]},"coverDegree":4}"#;
        assert!(matches!(
            ParabolicModel::from_json_str(bad_cover),
            Err(ModelReadError::Invalid(ParabolicError::CoverDegreeMismatch { .. }))
        ));
        let bad_count = r#"{"rank":2,"degree":0,"points":{"p":["1/2"]}}"#;
        assert!(matches!(
            ParabolicModel::from_json_str(bad_count),
            Err(ModelReadError::Invalid(ParabolicError::WrongWeightCount { .. }))
        ));
        let truncated = "{\"rank\":2,\n\"degree\":";
        match ParabolicModel::from_json_str(truncated) {
            Err(e @ ModelReadError::Json(_)) => assert!(e.to_string().contains("line 2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn flag_ranks_from_multiplicities() {
        let m = ParabolicModel::from_fractions(3, 0, &[("p", &[(1, 3), (0, 1), (1, 3)])]).unwrap();
        let p = &m.points()["p"];
        assert_eq!(p.multiplicities().len(), 2);
        assert_eq!(p.flag_ranks(), vec![3, 2]);
        assert!(m.is_parabolic());
        let trivial = ParabolicModel::from_fractions(2, 0, &[("p", &[(0, 1), (0, 1)])]).unwrap();
        assert!(!trivial.is_parabolic());
    }
}
