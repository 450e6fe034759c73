//! Ready-made instances: the step map on `{1, 2, 3, 4}` under the
//! squared-difference b-metric, and a decaying chain whose orbit exercises
//! the asymptotic ratio diagnostics.

use crate::contraction::{ContractionProblem, Potential, SelfMap};
use crate::relation::BinaryRelation;
use crate::simulation::SimulationFunction;
use crate::space::{BMetricSpace, Metric, PointId};

/// Points 1, 2, 3, 4 (ids 0..4) with `d(x, y) = (x − y)²` and `s = 2`.
pub fn step_space() -> BMetricSpace {
    BMetricSpace::new(vec![1.0, 2.0, 3.0, 4.0], Metric::SquaredDifference, 2.0)
        .expect("valid carrier")
}

/// Every pair whose first point is 1, 2 or 3.
pub fn step_relation() -> BinaryRelation {
    BinaryRelation::from_fn(4, |a, _| a.0 < 3)
}

/// `F = 1 on [1, 2]`, `2 on (2, 3]`, `3 on (3, 4]`.
pub fn step_map() -> SelfMap {
    SelfMap::from_indices(vec![0, 0, 1, 2]).expect("total map")
}

/// `φ(x) = 3x`.
pub fn step_potential() -> Potential {
    Potential::new(vec![3.0, 6.0, 9.0, 12.0]).expect("nonnegative")
}

pub fn step_problem(lambda: f64) -> ContractionProblem {
    ContractionProblem::new(
        step_space(),
        step_relation(),
        step_map(),
        step_potential(),
        SimulationFunction::linear(lambda).expect("lambda in (0, 1)"),
    )
    .expect("consistent components")
}

/// Number of points on the decaying chain.
pub const CHAIN_LEN: usize = 20;

/// Chain `x_0 > x_1 > … > x_19 = 0` with gaps `x_k − x_{k+1} = 1/(k+1)!`,
/// the map `x_k ↦ x_{k+1}` fixing `x_19`, the order relation
/// `{(x_i, x_j) : i <= j}` and `φ(x_k) = 3(19 − k)`, under the
/// squared-difference b-metric with `s = 2`.
pub fn decaying_chain(lambda: f64) -> ContractionProblem {
    let values = chain_values();
    let n = values.len();
    let space = BMetricSpace::new(values, Metric::SquaredDifference, 2.0).expect("distinct points");
    let relation = BinaryRelation::from_fn(n, |a, b| a.0 <= b.0);
    let map = SelfMap::from_indices((0..n).map(|k| (k + 1).min(n - 1)).collect()).expect("total");
    let potential = Potential::new((0..n).map(|k| 3.0 * (n - 1 - k) as f64).collect()).expect("nonnegative");
    ContractionProblem::new(
        space,
        relation,
        map,
        potential,
        SimulationFunction::linear(lambda).expect("lambda in (0, 1)"),
    )
    .expect("consistent components")
}

pub fn chain_values() -> Vec<f64> {
    let gaps: Vec<f64> = (0..CHAIN_LEN - 1)
        .scan(1.0f64, |fact, k| {
            *fact *= (k + 1) as f64;
            Some(1.0 / *fact)
        })
        .collect();
    let mut values = vec![0.0; CHAIN_LEN];
    for k in (0..CHAIN_LEN - 1).rev() {
        values[k] = values[k + 1] + gaps[k];
    }
    values
}

pub fn point_at(problem: &ContractionProblem, value: f64) -> PointId {
    problem.space.find_value(value).expect("point on the carrier")
}
