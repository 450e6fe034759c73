//! Random finite problem instances with transitive, map-closed relations,
//! for property suites and benchmarks.

use rand::seq::index::sample;
use rand::Rng;

use crate::contraction::{compute_mfr, verify_all_hypotheses, ContractionProblem, Potential, SelfMap};
use crate::par::{self, Strategy};
use crate::relation::{find_path, BinaryRelation};
use crate::simulation::SimulationFunction;
use crate::solver::{enumerate_fixed_points, picard_iterate, SolverOptions};
use crate::space::{BMetricSpace, Metric, PointId};

/// Map with `F(i) <= i` half the time, uniform otherwise.
pub fn random_map<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SelfMap {
    let descending = rng.gen_bool(0.5);
    let image = (0..n)
        .map(|i| if descending { rng.gen_range(0..=i) } else { rng.gen_range(0..n) })
        .collect();
    SelfMap::from_indices(image).expect("images in range")
}

/// Random seed pairs (plus one pair `(x, Fx)`), closed under the map and
/// transitivity.
pub fn random_closed_relation<R: Rng + ?Sized>(rng: &mut R, map: &SelfMap) -> BinaryRelation {
    let n = map.len();
    let density = rng.gen_range(0.0..0.35);
    let bits: Vec<bool> = (0..n * n).map(|_| rng.gen_bool(density)).collect();
    let mut seed = BinaryRelation::from_fn(n, |a, b| bits[a.0 * n + b.0]);
    let anchor = PointId(rng.gen_range(0..n));
    seed.insert(anchor, map.apply(anchor)).expect("in range");
    seed.closure_under(map)
}

pub fn random_problem<R: Rng + ?Sized>(rng: &mut R, max_points: usize) -> ContractionProblem {
    let n = rng.gen_range(1..=max_points.max(1));
    let mut values: Vec<f64> = sample(rng, 4 * n, n).into_iter().map(|v| v as f64).collect();
    values.sort_by(f64::total_cmp);
    let (metric, s) = if rng.gen_bool(0.5) {
        (Metric::SquaredDifference, 2.0)
    } else {
        (Metric::AbsoluteDifference, 1.0)
    };
    let space = BMetricSpace::new(values, metric, s).expect("distinct finite points");
    let map = random_map(rng, n);
    let relation = random_closed_relation(rng, &map);
    let potential = if rng.gen_bool(0.5) {
        // steep potential increasing with the index, favouring descending maps
        let slope = rng.gen_range(1.0..200.0);
        (0..n).map(|i| slope * i as f64 + rng.gen_range(0.0..1.0)).collect()
    } else {
        (0..n).map(|_| rng.gen_range(0.0..20.0)).collect()
    };
    let lambda = rng.gen_range(0.01..0.99);
    ContractionProblem::new(
        space,
        relation,
        map,
        Potential::new(potential).expect("nonnegative"),
        SimulationFunction::linear(lambda).expect("lambda in (0, 1)"),
    )
    .expect("consistent components")
}

/// Summary of the oracle comparison on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub hypotheses_ok: bool,
    pub starts: usize,
    pub traces_reach_fixed_points: bool,
    pub traces_preserving: bool,
    pub fixed_points: usize,
    pub fixed_points_connected: bool,
}

pub fn evaluate_instance(problem: &ContractionProblem) -> InstanceOutcome {
    let hypotheses_ok = verify_all_hypotheses(problem).all_hypotheses_ok;
    let fixed = enumerate_fixed_points(&problem.space, &problem.map);
    let starts = compute_mfr(&problem.relation, &problem.map);
    let mut traces_reach_fixed_points = true;
    let mut traces_preserving = true;
    for &start in &starts {
        match picard_iterate(problem, start, &SolverOptions::default()) {
            Ok(trace) => {
                traces_reach_fixed_points &= fixed.contains(&trace.final_point());
                traces_preserving &= trace
                    .orbit
                    .windows(2)
                    .all(|w| problem.relation.related(w[0], w[1]));
            }
            Err(_) => {
                traces_reach_fixed_points = false;
                traces_preserving = false;
            }
        }
    }
    let n = problem.space.len();
    let fixed_points_connected = fixed.iter().all(|&a| {
        fixed
            .iter()
            .all(|&b| a == b || find_path(&problem.relation, a, b, n).is_some())
    });
    InstanceOutcome {
        hypotheses_ok,
        starts: starts.len(),
        traces_reach_fixed_points,
        traces_preserving,
        fixed_points: fixed.len(),
        fixed_points_connected,
    }
}

pub fn evaluate_batch(problems: &[ContractionProblem], strategy: Strategy) -> Vec<InstanceOutcome> {
    par::map_slice(strategy, problems, evaluate_instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::{is_f_closed, is_transitive};
    use rand::SeedableRng;

    #[test]
    fn generated_relations_are_closed() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let problem = random_problem(&mut rng, 8);
            assert!(is_transitive(&problem.relation).holds);
            assert!(is_f_closed(&problem.relation, &problem.map).holds);
            assert!(!compute_mfr(&problem.relation, &problem.map).is_empty());
        }
    }

    #[test]
    fn batch_strategies_agree() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let problems: Vec<_> = (0..40).map(|_| random_problem(&mut rng, 6)).collect();
        assert_eq!(
            evaluate_batch(&problems, Strategy::Sequential),
            evaluate_batch(&problems, Strategy::default())
        );
    }
}
