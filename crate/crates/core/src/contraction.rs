//! The relational Caristi-Banach contraction condition and the aggregated
//! hypothesis report for the existence and uniqueness theorems.
//!
//! For every related pair `(σ, ρ)` whose first point moves (`d(σ, Fσ) > 0`)
//! the condition requires
//!
//! ```text
//! ζ( s·d(Fσ, Fρ), (φ(σ) − φ(Fσ))·d(σ, ρ) ) >= 0
//! ```
//!
//! The second argument is read as the product of the potential drop and the
//! pair distance. Pairs whose first point is fixed are recorded as vacuous.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Strategy};
use crate::relation::{
    check_bd_self_closed, find_path, is_f_closed, is_transitive, BinaryRelation, PairCheck, Path,
    SelfClosedness, TripleCheck,
};
use crate::simulation::{check_zeta_axioms, SampleSpec, SimulationFunction, ZetaAxiomReport};
use crate::space::{verify_bmetric_axioms, AxiomReport, BMetricSpace, PointId};

/// Contraction tolerance for formula metrics.
pub const FORMULA_CONTRACTION_TOL: f64 = 1e-9;

/// A total self-map stored as an image table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelfMap {
    image: Vec<PointId>,
    r_continuous: bool,
}

impl SelfMap {
    pub fn new(image: Vec<PointId>, space: &BMetricSpace) -> Result<Self> {
        if image.len() != space.len() {
            return Err(Error::InvalidMap(format!(
                "map is not total: {} images for {} points",
                image.len(),
                space.len()
            )));
        }
        Self::from_indices(image.into_iter().map(PointId::index).collect())
    }

    pub fn from_indices(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if let Some((i, &t)) = image.iter().enumerate().find(|(_, &t)| t >= n) {
            return Err(Error::InvalidMap(format!(
                "image of point #{i} is #{t}, outside the space"
            )));
        }
        Ok(Self {
            image: image.into_iter().map(PointId).collect(),
            r_continuous: false,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).map(PointId).collect(),
            r_continuous: false,
        }
    }

    /// Record the user's assertion that the map is continuous along
    /// relation-preserving sequences. It is trusted, never verified.
    pub fn with_r_continuous(mut self, flag: bool) -> Self {
        self.r_continuous = flag;
        self
    }

    pub fn r_continuous(&self) -> bool {
        self.r_continuous
    }

    #[inline]
    pub fn apply(&self, p: PointId) -> PointId {
        self.image[p.0]
    }

    pub fn image(&self) -> &[PointId] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }
}

/// Nonnegative potential, one value per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Potential {
    values: Vec<f64>,
}

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidPotential(format!(
                "value {v} at point #{i} is outside the codomain [0, ∞)"
            )));
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn at(&self, p: PointId) -> f64 {
        self.values[p.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionProblem {
    pub space: BMetricSpace,
    pub relation: BinaryRelation,
    pub map: SelfMap,
    pub potential: Potential,
    pub zeta: SimulationFunction,
}

impl ContractionProblem {
    pub fn new(
        space: BMetricSpace,
        relation: BinaryRelation,
        map: SelfMap,
        potential: Potential,
        zeta: SimulationFunction,
    ) -> Result<Self> {
        let n = space.len();
        if relation.universe() != n {
            return Err(Error::InvalidRelation(format!(
                "relation is over {} points, space has {n}",
                relation.universe()
            )));
        }
        if map.len() != n {
            return Err(Error::InvalidMap(format!(
                "map is not total: {} images for {n} points",
                map.len()
            )));
        }
        if potential.values.len() != n {
            return Err(Error::InvalidPotential(format!(
                "{} potential values for {n} points",
                potential.values.len()
            )));
        }
        Ok(Self {
            space,
            relation,
            map,
            potential,
            zeta,
        })
    }

    pub fn with_zeta(&self, zeta: SimulationFunction) -> Self {
        Self { zeta, ..self.clone() }
    }

    pub fn with_potential(&self, potential: Potential) -> Result<Self> {
        Self::new(
            self.space.clone(),
            self.relation.clone(),
            self.map.clone(),
            potential,
            self.zeta.clone(),
        )
    }

    /// Verification tolerance: exact for tables, [`FORMULA_CONTRACTION_TOL`]
    /// for formula metrics.
    pub fn default_tol(&self) -> f64 {
        if self.space.metric().is_exact() {
            0.0
        } else {
            FORMULA_CONTRACTION_TOL
        }
    }

    pub fn d(&self, a: PointId, b: PointId) -> f64 {
        self.space.d(a.0, b.0)
    }
}

/// Points related to their own image.
pub fn compute_mfr(relation: &BinaryRelation, map: &SelfMap) -> Vec<PointId> {
    (0..map.len())
        .map(PointId)
        .filter(|&p| relation.related(p, map.apply(p)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowVerdict {
    Pass,
    Fail,
    /// `d(σ, Fσ) = 0`: the guard is false.
    Vacuous,
    /// ζ is undefined at the row's arguments (custom tables only).
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub sigma: PointId,
    pub rho: PointId,
    /// `d(σ, Fσ)`.
    pub displacement: f64,
    /// `d(σ, ρ)`.
    pub pair_distance: f64,
    /// `d(Fσ, Fρ)`.
    pub image_distance: f64,
    /// First ζ argument, `s·d(Fσ, Fρ)`.
    pub t_arg: f64,
    /// `φ(σ) − φ(Fσ)`.
    pub potential_drop: f64,
    /// Second ζ argument, `(φ(σ) − φ(Fσ))·d(σ, ρ)`.
    pub s_arg: f64,
    pub zeta: Option<f64>,
    pub verdict: RowVerdict,
    /// Active row with `s_arg = 0 < t_arg`: the outcome hinges on whether
    /// such pairs are meant to be covered by the condition at all.
    pub definition_sensitive: bool,
}

impl LedgerRow {
    pub fn is_active(&self) -> bool {
        self.verdict != RowVerdict::Vacuous
    }
}

/// Smallest `λ` for which the linear family `ζ = λ·s − t` satisfies every
/// active row, i.e. `max t_arg / s_arg`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearThreshold {
    /// `None` when some active row has `s_arg = 0 < t_arg`.
    pub lambda: Option<f64>,
    pub binding: Vec<(PointId, PointId)>,
    /// Some `λ < 1` works.
    pub feasible: bool,
}

/// Largest `d(Fσ, Fρ) / d(σ, ρ)` over related pairs of distinct points; a
/// value of 1 or more rules out an ordinary Banach contraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageRatio {
    pub sigma: PointId,
    pub rho: PointId,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionLedger {
    pub tol: f64,
    pub holds: bool,
    pub active: usize,
    pub vacuous: usize,
    pub failures: Vec<(PointId, PointId)>,
    pub definition_sensitive: Vec<(PointId, PointId)>,
    pub linear_threshold: LinearThreshold,
    pub max_image_ratio: Option<ImageRatio>,
    pub rows: Vec<LedgerRow>,
}

pub fn verify_contraction(problem: &ContractionProblem, tol: f64) -> ContractionLedger {
    verify_contraction_with(problem, tol, Strategy::default())
}

pub fn verify_contraction_with(problem: &ContractionProblem, tol: f64, strategy: Strategy) -> ContractionLedger {
    let pairs: Vec<(PointId, PointId)> = problem.relation.pairs().collect();
    let s = problem.space.coefficient();
    let rows = par::map_slice(strategy, &pairs, |&(sigma, rho)| {
        let f_sigma = problem.map.apply(sigma);
        let f_rho = problem.map.apply(rho);
        let displacement = problem.d(sigma, f_sigma);
        let pair_distance = problem.d(sigma, rho);
        let image_distance = problem.d(f_sigma, f_rho);
        let t_arg = s * image_distance;
        let potential_drop = problem.potential.at(sigma) - problem.potential.at(f_sigma);
        let s_arg = potential_drop * pair_distance;
        let active = displacement > 0.0;
        let (zeta, verdict) = if !active {
            (None, RowVerdict::Vacuous)
        } else if s_arg < 0.0 {
            // ζ lives on [0, ∞)²; a negative second argument cannot satisfy the condition
            (None, RowVerdict::Fail)
        } else {
            match problem.zeta.evaluate(t_arg, s_arg) {
                Ok(z) if z >= -tol => (Some(z), RowVerdict::Pass),
                Ok(z) => (Some(z), RowVerdict::Fail),
                Err(_) => (None, RowVerdict::Undefined),
            }
        };
        LedgerRow {
            sigma,
            rho,
            displacement,
            pair_distance,
            image_distance,
            t_arg,
            potential_drop,
            s_arg,
            zeta,
            verdict,
            definition_sensitive: active && s_arg == 0.0 && t_arg > 0.0,
        }
    });

    let active = rows.iter().filter(|r| r.is_active()).count();
    let failures: Vec<_> = rows
        .iter()
        .filter(|r| matches!(r.verdict, RowVerdict::Fail | RowVerdict::Undefined))
        .map(|r| (r.sigma, r.rho))
        .collect();
    let definition_sensitive = rows
        .iter()
        .filter(|r| r.definition_sensitive)
        .map(|r| (r.sigma, r.rho))
        .collect();

    ContractionLedger {
        tol,
        holds: failures.is_empty(),
        active,
        vacuous: rows.len() - active,
        failures,
        definition_sensitive,
        linear_threshold: linear_threshold(&rows),
        max_image_ratio: max_image_ratio(&rows),
        rows,
    }
}

fn linear_threshold(rows: &[LedgerRow]) -> LinearThreshold {
    let mut lambda = 0.0f64;
    let mut binding = Vec::new();
    for row in rows.iter().filter(|r| r.is_active()) {
        if row.s_arg <= 0.0 {
            if row.t_arg > 0.0 || row.s_arg < 0.0 {
                return LinearThreshold {
                    lambda: None,
                    binding: vec![(row.sigma, row.rho)],
                    feasible: false,
                };
            }
            continue;
        }
        let ratio = row.t_arg / row.s_arg;
        if ratio > lambda {
            lambda = ratio;
            binding.clear();
        }
        if ratio == lambda && ratio > 0.0 {
            binding.push((row.sigma, row.rho));
        }
    }
    LinearThreshold {
        lambda: Some(lambda),
        binding,
        feasible: lambda < 1.0,
    }
}

fn max_image_ratio(rows: &[LedgerRow]) -> Option<ImageRatio> {
    let mut best: Option<ImageRatio> = None;
    for row in rows.iter().filter(|r| r.pair_distance > 0.0) {
        let ratio = row.image_distance / row.pair_distance;
        if best.as_ref().is_none_or(|b| ratio > b.ratio) {
            best = Some(ImageRatio {
                sigma: row.sigma,
                rho: row.rho,
                ratio,
            });
        }
    }
    best
}

/// How the third hypothesis was discharged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionIii {
    BdSelfClosedVerified,
    RContinuousDeclared,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub contraction_tol: f64,
    pub axiom_tol: f64,
    pub sample_spec: SampleSpec,
}

impl VerifyOptions {
    pub fn defaults_for(problem: &ContractionProblem) -> Self {
        Self {
            contraction_tol: problem.default_tol(),
            axiom_tol: problem.space.default_axiom_tol(),
            sample_spec: SampleSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub bmetric_axioms: AxiomReport,
    /// Declared, never computed.
    pub complete_declared: bool,
    pub zeta_axioms: ZetaAxiomReport,
    pub mfr_nonempty: bool,
    pub mfr: Vec<PointId>,
    pub f_closed: PairCheck,
    pub transitive: TripleCheck,
    pub condition_iii: ConditionIii,
    pub bd_self_closed: SelfClosedness,
    pub contraction: ContractionLedger,
    pub caveats: Vec<String>,
    pub all_hypotheses_ok: bool,
}

pub fn verify_all_hypotheses(problem: &ContractionProblem) -> HypothesisReport {
    verify_all_hypotheses_with(problem, &VerifyOptions::defaults_for(problem))
}

pub fn verify_all_hypotheses_with(problem: &ContractionProblem, options: &VerifyOptions) -> HypothesisReport {
    let bmetric_axioms = verify_bmetric_axioms(&problem.space, options.axiom_tol);
    let zeta_axioms = check_zeta_axioms(&problem.zeta, &options.sample_spec);
    let mfr = compute_mfr(&problem.relation, &problem.map);
    let f_closed = is_f_closed(&problem.relation, &problem.map);
    let transitive = is_transitive(&problem.relation);
    let bd_self_closed = check_bd_self_closed(&problem.space, &problem.relation);
    let condition_iii = if bd_self_closed.holds() {
        ConditionIii::BdSelfClosedVerified
    } else if problem.map.r_continuous() {
        ConditionIii::RContinuousDeclared
    } else {
        ConditionIii::Neither
    };
    let contraction = verify_contraction(problem, options.contraction_tol);

    let mut caveats = vec![
        "completeness of the space is a declared assumption".to_string(),
        "simulation-function axioms ζ2 and ζ3 are sampled, not proved".to_string(),
    ];
    if condition_iii == ConditionIii::RContinuousDeclared {
        caveats.push("continuity of the map is declared by the user, not verified".into());
    }
    if !contraction.definition_sensitive.is_empty() {
        caveats.push(format!(
            "{} active pair(s) have a zero second ζ argument with a positive first argument",
            contraction.definition_sensitive.len()
        ));
    }

    let complete_declared = problem.space.complete_flag();
    let mfr_nonempty = !mfr.is_empty();
    let all_hypotheses_ok = bmetric_axioms.all_ok()
        && complete_declared
        && zeta_axioms.all_ok()
        && mfr_nonempty
        && f_closed.holds
        && transitive.holds
        && condition_iii != ConditionIii::Neither
        && contraction.holds;
    HypothesisReport {
        bmetric_axioms,
        complete_declared,
        zeta_axioms,
        mfr_nonempty,
        mfr,
        f_closed,
        transitive,
        condition_iii,
        bd_self_closed,
        contraction,
        caveats,
        all_hypotheses_ok,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCheck {
    pub from: PointId,
    pub to: PointId,
    pub holds: bool,
    pub path: Option<Path>,
    /// With a transitive relation every path collapses to its endpoints.
    pub collapsed_pair: Option<(PointId, PointId)>,
}

pub fn verify_uniqueness_condition(problem: &ContractionProblem, a: PointId, b: PointId) -> UniquenessCheck {
    let path = find_path(&problem.relation, a, b, problem.space.len());
    let collapsed_pair = match &path {
        Some(p) if is_transitive(&problem.relation).holds => {
            debug_assert!(problem.relation.related(p.source(), p.target()));
            Some((p.source(), p.target()))
        }
        _ => None,
    };
    UniquenessCheck {
        from: a,
        to: b,
        holds: path.is_some(),
        path,
        collapsed_pair,
    }
}
