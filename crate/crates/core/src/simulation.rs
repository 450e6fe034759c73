//! Simulation functions `ζ : [0, ∞)² → ℝ` and sampled checks of their
//! axioms:
//!
//! * ζ1: `ζ(0, 0) = 0`, checked exactly;
//! * ζ2: `ζ(t, s) < s − t` for `t, s > 0`, checked on a grid;
//! * ζ3: `limsup ζ(t_n, s_n) < 0` whenever `t_n, s_n` share a positive
//!   limit, checked on constant and converging sequence families.
//!
//! Sampled verdicts are evidence relative to the recorded [`SampleSpec`],
//! not proofs.

// Negated comparisons below are deliberate: a NaN value counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Strategy};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum SimulationFunction {
    /// `ζ(t, s) = λ·s − t`, `0 < λ < 1`.
    Linear { lambda: f64 },
    /// `ζ(t, s) = λ·s − μ·t`, `0 < λ < μ`. Not a simulation function for
    /// every parameter choice; kept for experiments with the checker.
    Scaled { lambda: f64, mu: f64 },
    /// Explicit values on finitely many `(t, s)` arguments.
    CustomTable { entries: Vec<TableEntry> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableEntry {
    pub t: f64,
    pub s: f64,
    pub value: f64,
}

impl SimulationFunction {
    pub fn linear(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidZeta(format!("linear family needs 0 < λ < 1, got {lambda}")));
        }
        Ok(SimulationFunction::Linear { lambda })
    }

    pub fn scaled(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite() && lambda > 0.0 && lambda < mu) {
            return Err(Error::InvalidZeta(format!(
                "scaled family needs 0 < λ < μ, got λ = {lambda}, μ = {mu}"
            )));
        }
        Ok(SimulationFunction::Scaled { lambda, mu })
    }

    pub fn custom_table(entries: Vec<TableEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if !(e.t.is_finite() && e.s.is_finite() && e.value.is_finite()) {
                return Err(Error::InvalidZeta(format!("table entry {i} is not finite")));
            }
            if e.t < 0.0 || e.s < 0.0 {
                return Err(Error::InvalidZeta(format!(
                    "table entry ({}, {}) has a negative argument",
                    e.t, e.s
                )));
            }
            if entries[..i].iter().any(|o| o.t == e.t && o.s == e.s) {
                return Err(Error::InvalidZeta(format!("duplicate table entry ({}, {})", e.t, e.s)));
            }
        }
        Ok(SimulationFunction::CustomTable { entries })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            SimulationFunction::Linear { .. } => "linear",
            SimulationFunction::Scaled { .. } => "scaled",
            SimulationFunction::CustomTable { .. } => "custom-table",
        }
    }

    pub fn evaluate(&self, t: f64, s: f64) -> Result<f64> {
        if !(t >= 0.0 && s >= 0.0) {
            return Err(Error::ZetaDomain { t, s });
        }
        match self {
            SimulationFunction::Linear { lambda } => Ok(lambda * s - t),
            SimulationFunction::Scaled { lambda, mu } => Ok(lambda * s - mu * t),
            SimulationFunction::CustomTable { entries } => entries
                .iter()
                .find(|e| e.t == t && e.s == s)
                .map(|e| e.value)
                .ok_or(Error::ZetaUndefined { t, s }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSpec {
    /// Argument grid for ζ2 and limits for the ζ3 sequence families.
    pub grid: Vec<f64>,
    /// Terms generated per converging sequence.
    pub sequence_terms: usize,
    /// The limsup is estimated as the maximum over terms `n >= tail_start`.
    pub tail_start: usize,
    pub description: String,
}

impl SampleSpec {
    pub const DEFAULT_GRID: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0];

    pub fn with_grid(grid: Vec<f64>) -> Self {
        let sequence_terms = 10_000;
        Self {
            description: format!(
                "ζ2 on every grid pair with t, s > 0; ζ3 on constant sequences t_n = s_n = c and on \
                 t_n = L(1 + 1/n), s_n = L(1 − 1/(2n)) for grid values c, L > 0, limsup taken as \
                 the maximum over n in [{}, {sequence_terms}]; custom tables are sampled at their \
                 own entries",
                sequence_terms / 2
            ),
            grid,
            sequence_terms,
            tail_start: sequence_terms / 2,
        }
    }
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self::with_grid(Self::DEFAULT_GRID.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaSample {
    pub t: f64,
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceWitness {
    /// `constant` or `converging`.
    pub family: &'static str,
    pub limit: f64,
    pub limsup_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaAxiomReport {
    pub family: &'static str,
    pub zeta1_ok: bool,
    pub zeta1_value: Option<f64>,
    pub zeta2_ok: bool,
    pub zeta2_samples: usize,
    pub zeta2_violations: Vec<ZetaSample>,
    pub zeta3_ok: bool,
    pub zeta3_sequences: usize,
    pub zeta3_violations: Vec<SequenceWitness>,
    /// Sequence families the sample could not evaluate.
    pub zeta3_not_exercised: Vec<String>,
    pub sample_spec: SampleSpec,
    pub sampled: bool,
}

impl ZetaAxiomReport {
    pub fn all_ok(&self) -> bool {
        self.zeta1_ok && self.zeta2_ok && self.zeta3_ok
    }
}

pub fn check_zeta_axioms(zeta: &SimulationFunction, spec: &SampleSpec) -> ZetaAxiomReport {
    check_zeta_axioms_with(zeta, spec, Strategy::default())
}

pub fn check_zeta_axioms_with(zeta: &SimulationFunction, spec: &SampleSpec, strategy: Strategy) -> ZetaAxiomReport {
    let zeta1_value = zeta.evaluate(0.0, 0.0).ok();
    let zeta1_ok = zeta1_value == Some(0.0);

    let positive: Vec<f64> = spec.grid.iter().copied().filter(|&g| g > 0.0).collect();
    let pairs: Vec<(f64, f64)> = match zeta {
        SimulationFunction::CustomTable { entries } => entries
            .iter()
            .filter(|e| e.t > 0.0 && e.s > 0.0)
            .map(|e| (e.t, e.s))
            .collect(),
        _ => positive
            .iter()
            .flat_map(|&t| positive.iter().map(move |&s| (t, s)))
            .collect(),
    };
    let zeta2_violations: Vec<ZetaSample> = par::map_slice(strategy, &pairs, |&(t, s)| {
        zeta.evaluate(t, s)
            .ok()
            .filter(|&value| !(value < s - t))
            .map(|value| ZetaSample { t, s, value })
    })
    .into_iter()
    .flatten()
    .collect();

    let limits: Vec<f64> = match zeta {
        SimulationFunction::CustomTable { entries } => {
            let mut cs: Vec<f64> = entries
                .iter()
                .filter(|e| e.t > 0.0 && e.t == e.s)
                .map(|e| e.t)
                .collect();
            cs.sort_by(f64::total_cmp);
            cs
        }
        _ => positive.clone(),
    };
    let mut zeta3_violations = Vec::new();
    let mut zeta3_sequences = 0;
    let mut zeta3_not_exercised = Vec::new();
    for &c in &limits {
        zeta3_sequences += 1;
        if let Ok(v) = zeta.evaluate(c, c) {
            if !(v < 0.0) {
                zeta3_violations.push(SequenceWitness {
                    family: "constant",
                    limit: c,
                    limsup_estimate: v,
                });
            }
        }
    }
    if matches!(zeta, SimulationFunction::CustomTable { .. }) {
        zeta3_not_exercised.push(
            "converging sequences: a table is undefined off its entries; only constant sequences at \
             diagonal entries were checked"
                .to_string(),
        );
    } else {
        let estimates = par::map_slice(strategy, &positive, |&limit| {
            let mut sup = f64::NEG_INFINITY;
            for n in spec.tail_start.max(1)..=spec.sequence_terms {
                let n = n as f64;
                let t = limit * (1.0 + 1.0 / n);
                let s = limit * (1.0 - 1.0 / (2.0 * n));
                if let Ok(v) = zeta.evaluate(t, s) {
                    sup = sup.max(v);
                }
            }
            (limit, sup)
        });
        for (limit, sup) in estimates {
            zeta3_sequences += 1;
            if !(sup < 0.0) {
                zeta3_violations.push(SequenceWitness {
                    family: "converging",
                    limit,
                    limsup_estimate: sup,
                });
            }
        }
    }

    ZetaAxiomReport {
        family: zeta.family_name(),
        zeta1_ok,
        zeta1_value,
        zeta2_ok: zeta2_violations.is_empty(),
        zeta2_samples: pairs.len(),
        zeta2_violations,
        zeta3_ok: zeta3_violations.is_empty(),
        zeta3_sequences,
        zeta3_violations,
        zeta3_not_exercised,
        sample_spec: spec.clone(),
        sampled: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Negative
        } else if x > 0.0 {
            Sign::Positive
        } else {
            Sign::Zero
        }
    }
}

/// The b-simulation bound at one argument pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BSimulationCheck {
    pub t: f64,
    pub s_arg: f64,
    pub s_coeff: f64,
    /// `s_arg − s_coeff·t`, the strict upper bound a b-simulation function
    /// places on `ζ(s_coeff·t, s_arg)`.
    pub bound: f64,
    pub sign: Sign,
    /// `ζ(s_coeff·t, s_arg)` when the function is defined there.
    pub zeta_value: Option<f64>,
    /// A negative bound makes `ζ(s_coeff·t, s_arg) >= 0` impossible for
    /// any b-simulation function.
    pub nonnegative_value_impossible: bool,
}

pub fn check_b_simulation_inequality(
    zeta: &SimulationFunction,
    t: f64,
    s_arg: f64,
    s_coeff: f64,
) -> Result<BSimulationCheck> {
    if !(t >= 0.0 && s_arg >= 0.0) {
        return Err(Error::ZetaDomain { t, s: s_arg });
    }
    if !(s_coeff >= 1.0) {
        return Err(Error::InvalidSpace(format!("s >= 1 required, got {s_coeff}")));
    }
    let bound = s_arg - s_coeff * t;
    Ok(BSimulationCheck {
        t,
        s_arg,
        s_coeff,
        bound,
        sign: Sign::of(bound),
        zeta_value: zeta.evaluate(s_coeff * t, s_arg).ok(),
        nonnegative_value_impossible: bound < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let z = SimulationFunction::linear(0.9).unwrap();
        assert!((z.evaluate(2.0, 3.0).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(z.evaluate(0.0, 0.0).unwrap(), 0.0);
        let half = SimulationFunction::linear(0.5).unwrap();
        assert_eq!(half.evaluate(2.0, 3.0).unwrap(), -0.5);
        assert_eq!(z.evaluate(-1.0, 1.0), Err(Error::ZetaDomain { t: -1.0, s: 1.0 }));
        assert!(z.evaluate(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn construction_guards() {
        assert!(SimulationFunction::linear(1.0).is_err());
        assert!(SimulationFunction::linear(0.0).is_err());
        assert!(SimulationFunction::linear(f64::NAN).is_err());
        assert!(SimulationFunction::scaled(2.0, 1.0).is_err());
        let dup = vec![
            TableEntry { t: 1.0, s: 1.0, value: 0.0 },
            TableEntry { t: 1.0, s: 1.0, value: -1.0 },
        ];
        assert!(SimulationFunction::custom_table(dup).is_err());
    }

    #[test]
    fn linear_family_passes_default_sample() {
        let z = SimulationFunction::linear(0.9).unwrap();
        let report = check_zeta_axioms(&z, &SampleSpec::default());
        assert!(report.all_ok(), "{report:?}");
        assert_eq!(report.zeta2_samples, 36);
        assert!(report.sampled);
        // constant sequences: ζ(c, c) = −0.1c
        assert!((z.evaluate(8.0, 8.0).unwrap() + 0.8).abs() < 1e-12);
    }

    #[test]
    fn table_with_positive_diagonal_fails_zeta2() {
        let z = SimulationFunction::custom_table(vec![
            TableEntry { t: 0.0, s: 0.0, value: 0.0 },
            TableEntry { t: 1.0, s: 1.0, value: 0.5 },
            TableEntry { t: 1.0, s: 2.0, value: 0.2 },
        ])
        .unwrap();
        let spec = SampleSpec::with_grid(vec![1.0, 2.0]);
        let report = check_zeta_axioms(&z, &spec);
        assert!(report.zeta1_ok);
        assert!(!report.zeta2_ok);
        assert_eq!(report.zeta2_violations, vec![ZetaSample { t: 1.0, s: 1.0, value: 0.5 }]);
        assert!(!report.zeta3_ok);
        assert_eq!(report.zeta3_not_exercised.len(), 1);
    }

    #[test]
    fn table_without_origin_fails_zeta1() {
        let z = SimulationFunction::custom_table(vec![TableEntry { t: 1.0, s: 1.0, value: -1.0 }]).unwrap();
        let report = check_zeta_axioms(&z, &SampleSpec::default());
        assert!(!report.zeta1_ok);
        assert_eq!(report.zeta1_value, None);
    }

    #[test]
    fn scaled_family_with_large_lambda_breaks_zeta2() {
        let z = SimulationFunction::scaled(2.0, 3.0).unwrap();
        let report = check_zeta_axioms(&z, &SampleSpec::default());
        assert!(report.zeta1_ok);
        assert!(report.zeta3_ok);
        assert!(!report.zeta2_ok);
        // 2s − 3t < s − t fails exactly when s >= 2t
        assert!(report.zeta2_violations.iter().all(|v| v.s >= 2.0 * v.t));
    }

    #[test]
    fn b_simulation_examples() {
        let z = SimulationFunction::linear(0.9).unwrap();
        let c = check_b_simulation_inequality(&z, 4.0, 4.0, 2.0).unwrap();
        assert_eq!(c.bound, -4.0);
        assert_eq!(c.sign, Sign::Negative);
        assert!(c.nonnegative_value_impossible);
        let zero = check_b_simulation_inequality(&z, 0.0, 0.0, 3.0).unwrap();
        assert_eq!(zero.bound, 0.0);
        assert_eq!(zero.sign, Sign::Zero);
        let pos = check_b_simulation_inequality(&z, 1.0, 4.0, 2.0).unwrap();
        assert_eq!(pos.bound, 2.0);
        assert_eq!(pos.sign, Sign::Positive);
        assert!(check_b_simulation_inequality(&z, 1.0, 1.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn linear_family_never_violates_zeta2(lambda in 0.001f64..0.999, t in 0.001f64..1e3, s in 0.001f64..1e3) {
            let z = SimulationFunction::linear(lambda).unwrap();
            prop_assert!(z.evaluate(t, s).unwrap() < s - t);
            prop_assert_eq!(z.evaluate(0.0, 0.0).unwrap(), 0.0);
            let c = t;
            prop_assert!(z.evaluate(c, c).unwrap() < 0.0);
        }

        #[test]
        fn linear_family_passes_any_positive_grid(lambda in 0.001f64..0.999, grid in proptest::collection::vec(0.01f64..100.0, 1..6)) {
            let z = SimulationFunction::linear(lambda).unwrap();
            let report = check_zeta_axioms(&z, &SampleSpec::with_grid(grid));
            prop_assert!(report.all_ok());
        }

        #[test]
        fn b_simulation_bound_at_unit_coefficient(t in 0.0f64..100.0, s in 0.0f64..100.0) {
            let z = SimulationFunction::linear(0.5).unwrap();
            prop_assert_eq!(check_b_simulation_inequality(&z, t, s, 1.0).unwrap().bound, s - t);
        }
    }
}
