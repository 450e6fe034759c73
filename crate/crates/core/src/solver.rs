//! Relation-preserving Picard iteration with the step/ratio/potential
//! diagnostics that drive the existence argument, plus a brute-force fixed
//! point oracle and the uniqueness certificate.

use serde::Serialize;

use crate::contraction::{
    compute_mfr, verify_contraction, verify_uniqueness_condition, ContractionProblem, Potential,
    RowVerdict, SelfMap, UniquenessCheck,
};
use crate::error::{Error, Result};
use crate::par::{self, Strategy};
use crate::relation::Path;
use crate::space::{BMetricSpace, PointId};

/// Tolerance used by the ratio diagnostics.
pub const DIAGNOSTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ExactFixedPoint,
    Tolerance,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stop once a step is at most this long. Zero means exact equality only.
    pub tol: f64,
    /// Defaults to ten times the number of points.
    pub max_iter: Option<usize>,
    /// Accept a start outside the admissible set and record relation
    /// violations instead of aborting.
    pub allow_inadmissible_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 0.0,
            max_iter: None,
            allow_inadmissible_start: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEntry {
    /// `n` in `C_{n+1} / C_n`.
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub start: PointId,
    pub start_admissible: bool,
    /// `σ_0, σ_1 = Fσ_0, …, σ_N`.
    pub orbit: Vec<PointId>,
    pub orbit_values: Vec<f64>,
    /// `steps[n − 1] = C_n = d(σ_{n−1}, σ_n)`.
    pub steps: Vec<f64>,
    /// `C_{n+1} / C_n` for every `n` with `C_n > 0` and a recorded `C_{n+1}`.
    pub ratios: Vec<RatioEntry>,
    pub phi_values: Vec<f64>,
    /// Final potential value; the limit is attained on terminating orbits.
    pub phi_limit_estimate: f64,
    /// Largest ratio over the last half of the ratio entries.
    pub rho: Option<f64>,
    /// First `n` from which every ratio is at most `rho`.
    pub n0: Option<usize>,
    /// `d(σ_N, Fσ_N)`.
    pub residual: f64,
    pub terminated_by: Termination,
    /// Steps `n` with `(σ_n, σ_{n+1})` unrelated; only populated when an
    /// inadmissible start was explicitly allowed.
    pub relation_violations: Vec<usize>,
}

impl IterationTrace {
    pub fn final_point(&self) -> PointId {
        *self.orbit.last().expect("orbit holds the start")
    }

    pub fn positive_steps(&self) -> usize {
        self.steps.iter().filter(|&&c| c > 0.0).count()
    }
}

pub fn picard_iterate(problem: &ContractionProblem, start: PointId, options: &SolverOptions) -> Result<IterationTrace> {
    let space = &problem.space;
    let start_point = space.point(start)?;
    let map = &problem.map;
    let relation = &problem.relation;
    let start_admissible = relation.related(start, map.apply(start));
    if !start_admissible && !options.allow_inadmissible_start {
        return Err(Error::StartNotAdmissible {
            id: start.0,
            value: start_point.value,
        });
    }
    let max_iter = options.max_iter.unwrap_or(10 * space.len()).max(1);

    let mut orbit = vec![start];
    let mut steps = Vec::new();
    let mut relation_violations = Vec::new();
    let mut terminated_by = Termination::MaxIterations;
    let mut current = start;
    for n in 0..max_iter {
        let next = map.apply(current);
        if !relation.related(current, next) {
            if options.allow_inadmissible_start {
                relation_violations.push(n);
            } else {
                return Err(Error::OrbitLeftRelation {
                    step: n,
                    from: space.value(current),
                    to: space.value(next),
                });
            }
        }
        let step = problem.d(current, next);
        orbit.push(next);
        steps.push(step);
        if next == current {
            terminated_by = Termination::ExactFixedPoint;
            break;
        }
        if step <= options.tol {
            terminated_by = Termination::Tolerance;
            break;
        }
        current = next;
    }

    let ratios: Vec<RatioEntry> = steps
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > 0.0)
        .map(|(i, w)| RatioEntry {
            n: i + 1,
            value: w[1] / w[0],
        })
        .collect();
    let (rho, n0) = estimate_rho(&ratios);
    let phi_values: Vec<f64> = orbit.iter().map(|&p| problem.potential.at(p)).collect();
    let last = *orbit.last().expect("non-empty orbit");
    Ok(IterationTrace {
        start,
        start_admissible,
        orbit_values: orbit.iter().map(|&p| space.value(p)).collect(),
        residual: problem.d(last, map.apply(last)),
        phi_limit_estimate: *phi_values.last().expect("non-empty orbit"),
        orbit,
        steps,
        ratios,
        phi_values,
        rho,
        n0,
        terminated_by,
        relation_violations,
    })
}

fn estimate_rho(ratios: &[RatioEntry]) -> (Option<f64>, Option<usize>) {
    if ratios.is_empty() {
        return (None, None);
    }
    let tail = &ratios[ratios.len() / 2..];
    let rho = tail.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let mut n0 = tail[0].n;
    for r in ratios.iter().rev() {
        if r.value > rho {
            break;
        }
        n0 = r.n;
    }
    (Some(rho), Some(n0))
}

/// Iterate from every given start, one trace per start.
pub fn solve_from_each(
    problem: &ContractionProblem,
    starts: &[PointId],
    options: &SolverOptions,
    strategy: Strategy,
) -> Vec<Result<IterationTrace>> {
    par::map_slice(strategy, starts, |&s| picard_iterate(problem, s, options))
}

/// Smallest admissible start, the CLI default.
pub fn default_start(problem: &ContractionProblem) -> Result<PointId> {
    compute_mfr(&problem.relation, &problem.map)
        .first()
        .copied()
        .ok_or(Error::NoAdmissibleStart)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioBound {
    pub n: usize,
    pub ratio: f64,
    /// `φ(σ_{n−1}) − φ(σ_n)`.
    pub phi_drop: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSum {
    pub n: usize,
    pub sum: f64,
    /// `φ(σ_0) − φ(σ_n)`.
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCheck {
    pub exercised: bool,
    pub reason: Option<String>,
    pub positive_steps: usize,
    pub rho: Option<f64>,
    pub n0: Option<usize>,
    /// Indices `n >= n0` with `C_{n+1} > rho·C_n + tol`.
    pub violations: Vec<usize>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioDiagnostics {
    pub tol: f64,
    pub ratio_bounds: Vec<RatioBound>,
    pub ratio_bound_ok: bool,
    pub partial_sums: Vec<PartialSum>,
    pub ratio_sum: f64,
    /// `φ(σ_0) − 𝔞` with `𝔞` the final potential value.
    pub telescoping_bound: f64,
    pub telescoping_ok: bool,
    /// Potential strictly decreases across every positive step.
    pub phi_descent_ok: bool,
    pub decay: DecayCheck,
}

impl RatioDiagnostics {
    pub fn all_ok(&self) -> bool {
        self.ratio_bound_ok && self.telescoping_ok && self.phi_descent_ok && (!self.decay.exercised || self.decay.holds)
    }
}

pub fn ratio_diagnostics(trace: &IterationTrace, tol: f64) -> RatioDiagnostics {
    let phi = &trace.phi_values;
    let ratio_bounds: Vec<RatioBound> = trace
        .ratios
        .iter()
        .map(|r| {
            let phi_drop = phi[r.n - 1] - phi[r.n];
            RatioBound {
                n: r.n,
                ratio: r.value,
                phi_drop,
                holds: r.value <= phi_drop + tol,
            }
        })
        .collect();

    let mut sum = 0.0;
    let partial_sums: Vec<PartialSum> = trace
        .ratios
        .iter()
        .map(|r| {
            sum += r.value;
            let bound = phi[0] - phi[r.n];
            PartialSum {
                n: r.n,
                sum,
                bound,
                holds: sum <= bound + tol,
            }
        })
        .collect();
    let telescoping_bound = phi[0] - trace.phi_limit_estimate;
    let telescoping_ok = partial_sums.iter().all(|p| p.holds) && sum <= telescoping_bound + tol;

    let phi_descent_ok = trace
        .steps
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0.0)
        .all(|(i, _)| phi[i + 1] < phi[i]);

    let positive_steps = trace.positive_steps();
    let decay = if positive_steps < 3 {
        DecayCheck {
            exercised: false,
            reason: Some(format!(
                "orbit terminated after {positive_steps} positive step(s); at least 3 are needed"
            )),
            positive_steps,
            rho: trace.rho,
            n0: trace.n0,
            violations: Vec::new(),
            holds: true,
        }
    } else {
        let rho = trace.rho.expect("ratios exist with three positive steps");
        let n0 = trace.n0.expect("set with rho");
        let violations: Vec<usize> = trace
            .ratios
            .iter()
            .filter(|r| r.n >= n0)
            .filter(|r| trace.steps[r.n] > rho * trace.steps[r.n - 1] + tol)
            .map(|r| r.n)
            .collect();
        DecayCheck {
            exercised: true,
            reason: None,
            positive_steps,
            rho: Some(rho),
            n0: Some(n0),
            holds: rho < 1.0 && violations.is_empty(),
            violations,
        }
    };

    RatioDiagnostics {
        tol,
        ratio_bound_ok: ratio_bounds.iter().all(|b| b.holds),
        ratio_bounds,
        partial_sums,
        ratio_sum: sum,
        telescoping_bound,
        telescoping_ok,
        phi_descent_ok,
        decay,
    }
}

/// Exhaustive scan for points with `Fx = x`.
pub fn enumerate_fixed_points(space: &BMetricSpace, map: &SelfMap) -> Vec<PointId> {
    space.ids().filter(|&p| map.apply(p) == p).collect()
}

/// Two fixed points joined by a path while the contraction verdict passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contradiction {
    pub from: PointId,
    pub to: PointId,
    pub path: Path,
    /// The contraction row for `(from, to)` exists and is vacuous because
    /// `from` does not move.
    pub row_vacuous: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointCertificate {
    pub fixed_points: Vec<PointId>,
    pub solver_result: PointId,
    pub residual: f64,
    pub unique: bool,
    pub contraction_holds: bool,
    /// Path queries between every ordered pair of distinct fixed points.
    pub connections: Vec<UniquenessCheck>,
    pub contradictions: Vec<Contradiction>,
}

impl FixedPointCertificate {
    pub fn ok(&self) -> bool {
        self.unique && self.contradictions.is_empty()
    }
}

pub fn certify(problem: &ContractionProblem, trace: &IterationTrace) -> Result<FixedPointCertificate> {
    let fixed_points = enumerate_fixed_points(&problem.space, &problem.map);
    let solver_result = trace.final_point();
    if !fixed_points.contains(&solver_result) {
        return Err(Error::NotAFixedPoint {
            value: problem.space.value(solver_result),
            residual: trace.residual,
        });
    }
    let ledger = verify_contraction(problem, problem.default_tol());
    let mut connections = Vec::new();
    let mut contradictions = Vec::new();
    for &a in &fixed_points {
        for &b in fixed_points.iter().filter(|&&b| b != a) {
            let check = verify_uniqueness_condition(problem, a, b);
            if let (true, Some(path)) = (ledger.holds, &check.path) {
                let row_vacuous = ledger
                    .rows
                    .iter()
                    .any(|r| r.sigma == a && r.rho == b && r.verdict == RowVerdict::Vacuous);
                contradictions.push(Contradiction {
                    from: a,
                    to: b,
                    path: path.clone(),
                    row_vacuous,
                    note: "distinct fixed points are joined by a relation path although the \
                           contraction verdict passes; the condition is vacuous at a fixed first \
                           point, so it cannot separate them"
                        .into(),
                });
            }
            connections.push(check);
        }
    }
    Ok(FixedPointCertificate {
        unique: fixed_points.len() == 1,
        fixed_points,
        solver_result,
        residual: trace.residual,
        contraction_holds: ledger.holds,
        connections,
        contradictions,
    })
}

/// Certificate over the potential, exposed so callers can check potential
/// descent without a trace.
pub fn potential_descends_along(potential: &Potential, orbit: &[PointId]) -> bool {
    orbit.windows(2).all(|w| w[0] == w[1] || potential.at(w[1]) < potential.at(w[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::BinaryRelation;
    use crate::samples;
    use crate::simulation::SimulationFunction;
    use crate::space::Metric;

    fn p(i: usize) -> PointId {
        PointId(i)
    }

    fn solve(problem: &ContractionProblem, start: usize) -> IterationTrace {
        picard_iterate(problem, p(start), &SolverOptions::default()).unwrap()
    }

    #[test]
    fn orbit_from_three() {
        let problem = samples::step_problem(0.9);
        let trace = solve(&problem, 2);
        assert_eq!(trace.orbit_values, vec![3.0, 2.0, 1.0, 1.0]);
        assert_eq!(trace.steps, vec![1.0, 1.0, 0.0]);
        assert_eq!(trace.residual, 0.0);
        assert_eq!(trace.terminated_by, Termination::ExactFixedPoint);
        assert_eq!(trace.phi_values, vec![9.0, 6.0, 3.0, 3.0]);
        assert_eq!(trace.phi_limit_estimate, 3.0);
    }

    #[test]
    fn orbit_from_fixed_and_from_two() {
        let problem = samples::step_problem(0.9);
        let fixed = solve(&problem, 0);
        assert_eq!(fixed.orbit_values, vec![1.0, 1.0]);
        assert_eq!(fixed.positive_steps(), 0);
        let two = solve(&problem, 1);
        assert_eq!(two.orbit_values, vec![2.0, 1.0, 1.0]);
        assert_eq!(two.steps[0], 1.0);
    }

    #[test]
    fn inadmissible_start_is_rejected_unless_allowed() {
        let problem = samples::step_problem(0.9);
        // (4, F4) = (4, 3) is not related
        let err = picard_iterate(&problem, p(3), &SolverOptions::default()).unwrap_err();
        assert_eq!(err, Error::StartNotAdmissible { id: 3, value: 4.0 });
        let options = SolverOptions {
            allow_inadmissible_start: true,
            ..SolverOptions::default()
        };
        let trace = picard_iterate(&problem, p(3), &options).unwrap();
        assert!(!trace.start_admissible);
        assert_eq!(trace.relation_violations, vec![0]);
        assert_eq!(trace.orbit_values, vec![4.0, 3.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn orbit_leaving_the_relation_aborts() {
        let base = samples::step_problem(0.9);
        // admissible start 3, but (2, 1) missing
        let relation = BinaryRelation::from_pairs(4, [(p(2), p(1))]).unwrap();
        let problem = ContractionProblem { relation, ..base };
        let err = picard_iterate(&problem, p(2), &SolverOptions::default()).unwrap_err();
        assert_eq!(err, Error::OrbitLeftRelation { step: 1, from: 2.0, to: 1.0 });
    }

    #[test]
    fn diagnostics_on_the_step_orbit() {
        let problem = samples::step_problem(0.9);
        let trace = solve(&problem, 2);
        let diag = ratio_diagnostics(&trace, DIAGNOSTIC_TOL);
        assert_eq!(diag.ratio_bounds[0].ratio, 1.0);
        assert_eq!(diag.ratio_bounds[0].phi_drop, 3.0);
        assert!(diag.ratio_bound_ok);
        assert_eq!(diag.ratio_sum, 1.0);
        assert_eq!(diag.telescoping_bound, 6.0);
        assert!(diag.telescoping_ok);
        assert!(!diag.decay.exercised);
        assert!(diag.all_ok());
    }

    #[test]
    fn single_step_trace_skips_asymptotics() {
        let problem = samples::step_problem(0.9);
        let trace = solve(&problem, 0);
        let diag = ratio_diagnostics(&trace, DIAGNOSTIC_TOL);
        assert!(!diag.decay.exercised);
        assert!(diag.decay.reason.is_some());
        assert!(diag.ratio_bounds.is_empty());
    }

    #[test]
    fn tolerance_and_max_iterations() {
        let problem = samples::decaying_chain(0.9);
        let loose = SolverOptions {
            tol: 1e-6,
            ..SolverOptions::default()
        };
        let trace = picard_iterate(&problem, p(0), &loose).unwrap();
        assert_eq!(trace.terminated_by, Termination::Tolerance);
        assert!(trace.residual > 0.0);
        assert!(matches!(certify(&problem, &trace), Err(Error::NotAFixedPoint { .. })));

        let short = SolverOptions {
            max_iter: Some(3),
            ..SolverOptions::default()
        };
        let trace = picard_iterate(&problem, p(0), &short).unwrap();
        assert_eq!(trace.terminated_by, Termination::MaxIterations);
        assert_eq!(trace.steps.len(), 3);
    }

    #[test]
    fn fixed_point_oracle() {
        let problem = samples::step_problem(0.9);
        assert_eq!(enumerate_fixed_points(&problem.space, &problem.map), vec![p(0)]);
        assert_eq!(
            enumerate_fixed_points(&problem.space, &SelfMap::identity(4)),
            vec![p(0), p(1), p(2), p(3)]
        );
        // the step map restricted to {2, 3, 4} sends 2 outside the carrier
        let restricted = crate::space::BMetricSpace::new(vec![2.0, 3.0, 4.0], Metric::SquaredDifference, 2.0).unwrap();
        assert!(SelfMap::new(vec![p(3), p(0), p(1)], &restricted).is_err());
    }

    #[test]
    fn certificate_for_the_step_map() {
        let problem = samples::step_problem(0.9);
        let trace = solve(&problem, 2);
        let cert = certify(&problem, &trace).unwrap();
        assert!(cert.unique);
        assert_eq!(cert.fixed_points, vec![p(0)]);
        assert_eq!(cert.solver_result, p(0));
        assert!(cert.ok());
    }

    #[test]
    fn identity_map_without_paths_claims_nothing() {
        let base = samples::step_problem(0.9);
        let problem = ContractionProblem {
            map: SelfMap::identity(4),
            relation: BinaryRelation::from_fn(4, |a, b| a == b),
            ..base
        };
        let trace = solve(&problem, 1);
        let cert = certify(&problem, &trace).unwrap();
        assert!(!cert.unique);
        assert!(cert.contradictions.is_empty());
        assert_eq!(cert.connections.len(), 12);
    }

    #[test]
    fn connected_fixed_points_produce_a_contradiction_record() {
        // Two fixed points, full relation: every hypothesis passes vacuously.
        let space = crate::space::BMetricSpace::new(vec![0.0, 1.0], Metric::AbsoluteDifference, 1.0).unwrap();
        let problem = ContractionProblem::new(
            space,
            BinaryRelation::full(2),
            SelfMap::identity(2),
            Potential::new(vec![0.0, 0.0]).unwrap(),
            SimulationFunction::linear(0.5).unwrap(),
        )
        .unwrap();
        assert!(crate::contraction::verify_all_hypotheses(&problem).all_hypotheses_ok);
        let trace = solve(&problem, 0);
        let cert = certify(&problem, &trace).unwrap();
        assert!(!cert.unique);
        assert_eq!(cert.contradictions.len(), 2);
        assert!(cert.contradictions.iter().all(|c| c.row_vacuous));
        assert!(!cert.ok());
    }

    #[test]
    fn chain_exercises_the_decay_check() {
        let problem = samples::decaying_chain(0.9);
        let trace = solve(&problem, 0);
        assert_eq!(trace.terminated_by, Termination::ExactFixedPoint);
        assert_eq!(trace.positive_steps(), samples::CHAIN_LEN - 1);
        let diag = ratio_diagnostics(&trace, DIAGNOSTIC_TOL);
        assert!(diag.decay.exercised);
        assert!(diag.all_ok(), "{diag:#?}");
        assert!(diag.decay.rho.unwrap() < 1.0);
        assert!(potential_descends_along(&problem.potential, &trace.orbit));
    }

    #[test]
    fn multi_start_matches_single_runs() {
        let problem = samples::decaying_chain(0.9);
        let starts: Vec<PointId> = problem.space.ids().collect();
        let batch = solve_from_each(&problem, &starts, &SolverOptions::default(), Strategy::default());
        for (s, trace) in starts.iter().zip(batch) {
            assert_eq!(trace.unwrap(), solve(&problem, s.0));
        }
        assert_eq!(default_start(&problem).unwrap(), p(0));
    }
}
