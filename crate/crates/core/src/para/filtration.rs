use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::{One, Zero};

use super::model::ParabolicModel;
use super::weight::Weight;

/// A jump of the filtration at `t`: `E_{t+}` has colength `rank_drop` in `E_t`
/// and degree `degree_after`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jump {
    pub t: Rational64,
    pub rank_drop: usize,
    pub degree_after: i64,
}

/// The decreasing, left-continuous filtration `E_t` attached to a parabolic
/// model, with `E_{t+1} = E_t(-D)`.
///
/// Locally at a marked point the sheaf `E_t` is spanned by `z^{e_i(t)} v_i` in a
/// frame adapted to the flag, with `e_i(t) = ceil(t - a_i)`. Away from the
/// points it equals `E(-floor(t) D)` up to the same rule with zero weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterFunction {
    rank: usize,
    base_degree: i64,
    weights: Vec<Weight>,
    point_count: usize,
    jumps: Vec<Jump>,
}

fn ceil(x: Rational64) -> i64 {
    x.ceil().to_integer()
}

fn floor(x: Rational64) -> i64 {
    x.floor().to_integer()
}

impl FilterFunction {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn base_degree(&self) -> i64 {
        self.base_degree
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    /// Jumps in `[0, 1)`, in increasing order of `t`.
    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Vanishing orders of the adapted frame in `E_t`, one per (point, weight).
    pub fn exponents_at(&self, t: Rational64) -> Vec<i64> {
        self.weights.iter().map(|w| ceil(t - w.value())).collect()
    }

    /// Vanishing orders in `E_{t+}`, the limit from the right.
    pub fn right_exponents_at(&self, t: Rational64) -> Vec<i64> {
        self.weights.iter().map(|w| floor(t - w.value()) + 1).collect()
    }

    pub fn degree_at(&self, t: Rational64) -> i64 {
        self.base_degree - self.exponents_at(t).iter().sum::<i64>()
    }

    pub fn degree_right_of(&self, t: Rational64) -> i64 {
        self.base_degree - self.right_exponents_at(t).iter().sum::<i64>()
    }

    /// Whether `E_s` is contained in `E_t`.
    pub fn is_contained(&self, s: Rational64, t: Rational64) -> bool {
        self.exponents_at(s).iter().zip(self.exponents_at(t)).all(|(a, b)| *a >= b)
    }

    /// Whether `E_{t+}` is strictly smaller than `E_t`.
    pub fn is_jump(&self, t: Rational64) -> bool {
        self.exponents_at(t) != self.right_exponents_at(t)
    }

    /// `∫_0^1 deg(E_t) dt`, integrating the step function interval by interval.
    pub fn integral_of_degree(&self) -> Rational64 {
        let mut cuts: BTreeSet<Rational64> = self.jumps.iter().map(|j| j.t).collect();
        cuts.insert(Rational64::zero());
        cuts.insert(Rational64::one());
        let cuts: Vec<Rational64> = cuts.into_iter().collect();
        cuts.windows(2)
            .map(|w| (w[1] - w[0]) * Rational64::from_integer(self.degree_at(w[1])))
            .fold(Rational64::zero(), |a, b| a + b)
    }

    /// A step size strictly smaller than every gap between jumps.
    pub fn resolution(&self) -> Rational64 {
        let n = self.weights.iter().fold(1i64, |acc, w| num_integer::lcm(acc, w.denom()));
        Rational64::new(1, 4 * n)
    }
}

/// The filtration `E_t` of a model.
pub fn my_filtration(model: &ParabolicModel) -> FilterFunction {
    let weights: Vec<Weight> = model.points().values().flat_map(|p| p.weights().iter().copied()).collect();
    let mut ff = FilterFunction {
        rank: model.rank(),
        base_degree: model.degree(),
        weights,
        point_count: model.points().len(),
        jumps: Vec::new(),
    };
    let mut locations: Vec<(Weight, usize)> = Vec::new();
    for w in ff.weights.iter().copied().collect::<BTreeSet<_>>() {
        let m = ff.weights.iter().filter(|x| **x == w).count();
        locations.push((w, m));
    }
    ff.jumps = locations
        .into_iter()
        .map(|(w, m)| Jump { t: w.value(), rank_drop: m, degree_after: ff.degree_right_of(w.value()) })
        .collect();
    ff
}

/// Outcome of checking the six defining properties of a parabolic filtration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiltrationReport {
    pub decreasing: bool,
    pub left_continuous: bool,
    pub periodic: bool,
    pub starts_at_bundle: bool,
    pub finitely_many_jumps: bool,
    pub jumps_at_weights: bool,
}

impl FiltrationReport {
    pub fn all(&self) -> bool {
        self.decreasing
            && self.left_continuous
            && self.periodic
            && self.starts_at_bundle
            && self.finitely_many_jumps
            && self.jumps_at_weights
    }

    pub fn as_array(&self) -> [bool; 6] {
        [
            self.decreasing,
            self.left_continuous,
            self.periodic,
            self.starts_at_bundle,
            self.finitely_many_jumps,
            self.jumps_at_weights,
        ]
    }
}

/// Checks the filtration properties on a grid covering `[-periods, periods]`.
pub fn check_filtration_properties(model: &ParabolicModel, periods: i64) -> FiltrationReport {
    let ff = my_filtration(model);
    let h = ff.resolution();
    let steps = (Rational64::one() / h).to_integer();
    let grid: Vec<Rational64> =
        (-periods * steps..=periods * steps).map(|k| h * Rational64::from_integer(k)).collect();
    let weight_set: BTreeSet<Weight> = ff.weights.iter().copied().collect();
    let zero_exponents = vec![0i64; ff.weights.len()];

    let decreasing = grid.windows(2).all(|w| ff.is_contained(w[1], w[0]));
    let tiny = h / Rational64::from_integer(1_000_003);
    let left_continuous = grid.iter().all(|&t| {
        let e = ff.exponents_at(t);
        e == ff.exponents_at(t - h / Rational64::from_integer(2)) && e == ff.exponents_at(t - tiny)
    });
    let periodic = grid.iter().all(|&t| {
        let e = ff.exponents_at(t);
        let e1 = ff.exponents_at(t + Rational64::one());
        e.iter().zip(&e1).all(|(a, b)| *b == a + 1)
    });
    let starts_at_bundle = ff.exponents_at(Rational64::zero()) == zero_exponents
        && ff.degree_at(Rational64::zero()) == model.degree();
    let finitely_many_jumps = (-periods..periods).all(|k| {
        let count = (0..steps)
            .filter(|&j| ff.is_jump(Rational64::from_integer(k) + h * Rational64::from_integer(j)))
            .count();
        count == ff.jumps.len() && count <= ff.weights.len()
    }) && ff.jumps.iter().map(|j| j.rank_drop).sum::<usize>() == ff.weights.len();
    let jumps_at_weights = grid
        .iter()
        .all(|&t| ff.is_jump(t) == weight_set.contains(&Weight::fract_of(t)))
        && ff.jumps.iter().all(|j| ff.is_jump(j.t));

    FiltrationReport { decreasing, left_continuous, periodic, starts_at_bundle, finitely_many_jumps, jumps_at_weights }
}
