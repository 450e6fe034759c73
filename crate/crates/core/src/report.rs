//! Command dispatch and report emission.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::contraction::{verify_all_hypotheses_with, ContractionProblem, HypothesisReport, VerifyOptions};
use crate::error::{Error, Result};
use crate::problem::{fmt_num, BuiltProblem, ProblemFile};
use crate::relation::{relation_report, RelationReport, SelfClosedness};
use crate::simulation::{check_b_simulation_inequality, check_zeta_axioms, BSimulationCheck, ZetaAxiomReport};
use crate::solver::{
    certify, default_start, picard_iterate, ratio_diagnostics, FixedPointCertificate, IterationTrace,
    RatioDiagnostics, SolverOptions, Termination, DIAGNOSTIC_TOL,
};
use crate::space::{verify_bmetric_axioms, AxiomReport, AxiomWitness, PointId};

/// Bumped whenever the JSON layout of [`Report`] changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// b-metric and simulation-function axioms.
    Axioms,
    /// Every hypothesis of the existence and uniqueness theorems.
    Verify,
    /// Picard iteration with its diagnostics.
    Solve,
    /// Iteration plus the exhaustive fixed-point certificate.
    Certify,
    /// All of the above.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Axioms => "axioms",
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Certify => "certify",
            Command::Report => "report",
        }
    }

    fn runs(self, part: Command) -> bool {
        self == part || self == Command::Report
    }
}

/// Command-line overrides; unset fields fall back to the problem file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Solver stopping tolerance.
    pub tol: Option<f64>,
    /// Start point, by coordinate.
    pub start: Option<f64>,
    pub max_iter: Option<usize>,
    /// Replaces the coefficient `s` of the space.
    pub s: Option<f64>,
    pub allow_inadmissible_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: Command,
    /// SHA-256 of the canonical problem text.
    pub input_digest: String,
}

/// The two distances a probe compares plus the b-simulation bound they
/// induce with `t = d(Fσ, Fρ)` and `s_arg = d(σ, ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub sigma: PointId,
    pub rho: PointId,
    pub pair_distance: f64,
    pub image_distance: f64,
    /// `d(Fσ, Fρ) / d(σ, ρ)`; `None` for coincident points.
    pub ratio: Option<f64>,
    pub b_simulation: BSimulationCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// Names of the failed checks, in report order.
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub header: ReportHeader,
    /// Coordinate of every point id used below.
    pub points: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<ZetaAxiomReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<RelationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesisReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<IterationTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<RatioDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<FixedPointCertificate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<ProbeReport>,
    pub verdict: Verdict,
}

impl Report {
    /// 0 when every requested verdict passes, 1 otherwise.
    pub fn exit_status(&self) -> u8 {
        if self.verdict.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        render_text(self)
    }
}

pub fn input_digest(file: &ProblemFile) -> String {
    let digest = Sha256::digest(file.to_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Run `command` on a parsed problem. Input errors and solver aborts are
/// returned as errors; see [`Error::exit_code`] for their exit statuses.
pub fn run_command(command: Command, file: &ProblemFile, options: &RunOptions) -> Result<Report> {
    let mut file = file.clone();
    if let Some(s) = options.s {
        file.space.s = s;
    }
    let BuiltProblem {
        problem,
        sample_spec,
        start,
        tol,
        max_iter,
        probes,
    } = file.build()?;
    let verify_options = VerifyOptions {
        sample_spec,
        ..VerifyOptions::defaults_for(&problem)
    };
    let mut failed = Vec::new();
    let mut report = Report {
        header: ReportHeader {
            toolkit: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            command,
            input_digest: input_digest(&file),
        },
        points: problem.space.values().to_vec(),
        axioms: None,
        zeta: None,
        relation: None,
        hypotheses: None,
        trace: None,
        diagnostics: None,
        certificate: None,
        probes: Vec::new(),
        verdict: Verdict {
            pass: true,
            failed: Vec::new(),
        },
    };

    if command.runs(Command::Axioms) {
        let axioms = verify_bmetric_axioms(&problem.space, verify_options.axiom_tol);
        let zeta = check_zeta_axioms(&problem.zeta, &verify_options.sample_spec);
        if !axioms.all_ok() {
            failed.push("b-metric axioms".to_string());
        }
        if !zeta.all_ok() {
            failed.push("simulation-function axioms".to_string());
        }
        report.axioms = Some(axioms);
        report.zeta = Some(zeta);
    }

    if command.runs(Command::Verify) {
        let hypotheses = verify_all_hypotheses_with(&problem, &verify_options);
        if !hypotheses.all_hypotheses_ok {
            failed.extend(failed_hypotheses(&hypotheses).into_iter().map(|h| format!("hypothesis: {h}")));
        }
        report.relation = Some(relation_report(&problem.space, &problem.relation, &problem.map));
        report.hypotheses = Some(hypotheses);
        report.probes = probes
            .iter()
            .map(|&(a, b)| probe(&problem, a, b))
            .collect::<Result<_>>()?;
    }

    if command.runs(Command::Solve) || command.runs(Command::Certify) {
        let start = match (options.start, start) {
            (Some(v), _) => problem.space.find_value(v).ok_or_else(|| {
                Error::InvalidSpace(format!("start {} is not a point of the space", fmt_num(v)))
            })?,
            (None, Some(p)) => p,
            (None, None) => default_start(&problem)?,
        };
        let solver_options = SolverOptions {
            tol: options.tol.unwrap_or(tol),
            max_iter: options.max_iter.or(max_iter),
            allow_inadmissible_start: options.allow_inadmissible_start,
        };
        let trace = picard_iterate(&problem, start, &solver_options)?;
        if trace.terminated_by == Termination::MaxIterations {
            failed.push("iteration did not terminate".to_string());
        }
        if !trace.relation_violations.is_empty() {
            failed.push("orbit left the relation".to_string());
        }
        if command.runs(Command::Solve) {
            let diagnostics = ratio_diagnostics(&trace, DIAGNOSTIC_TOL);
            if !diagnostics.all_ok() {
                failed.push("ratio diagnostics".to_string());
            }
            report.diagnostics = Some(diagnostics);
        }
        if command.runs(Command::Certify) {
            let certificate = certify(&problem, &trace)?;
            if !certificate.unique {
                failed.push("unique fixed point".to_string());
            }
            if !certificate.contradictions.is_empty() {
                failed.push("fixed points joined under a passing contraction".to_string());
            }
            report.certificate = Some(certificate);
        }
        report.trace = Some(trace);
    }

    report.verdict = Verdict {
        pass: failed.is_empty(),
        failed,
    };
    Ok(report)
}

fn failed_hypotheses(h: &HypothesisReport) -> Vec<&'static str> {
    let mut out = Vec::new();
    if !h.bmetric_axioms.all_ok() {
        out.push("b-metric axioms");
    }
    if !h.complete_declared {
        out.push("completeness declared");
    }
    if !h.zeta_axioms.all_ok() {
        out.push("simulation-function axioms");
    }
    if !h.mfr_nonempty {
        out.push("admissible start exists");
    }
    if !h.f_closed.holds {
        out.push("relation closed under the map");
    }
    if !h.transitive.holds {
        out.push("relation transitive");
    }
    if h.condition_iii == crate::contraction::ConditionIii::Neither {
        out.push("self-closed relation or continuous map");
    }
    if !h.contraction.holds {
        out.push("contraction condition");
    }
    out
}

fn probe(problem: &ContractionProblem, a: PointId, b: PointId) -> Result<ProbeReport> {
    let pair_distance = problem.d(a, b);
    let image_distance = problem.d(problem.map.apply(a), problem.map.apply(b));
    Ok(ProbeReport {
        sigma: a,
        rho: b,
        pair_distance,
        image_distance,
        ratio: (pair_distance > 0.0).then(|| image_distance / pair_distance),
        b_simulation: check_b_simulation_inequality(
            &problem.zeta,
            image_distance,
            pair_distance,
            problem.space.coefficient(),
        )?,
    })
}

fn render_text(r: &Report) -> String {
    let p = |id: PointId| fmt_num(r.points[id.0]);
    let pair = |(a, b): (PointId, PointId)| format!("({}, {})", p(a), p(b));
    let list = |ids: &[PointId]| ids.iter().map(|&i| p(i)).collect::<Vec<_>>().join(", ");
    let yes = |b: bool| if b { "yes" } else { "NO" };
    let mut out = String::new();
    let h = &r.header;
    let _ = writeln!(
        out,
        "{} {} — {} (input {})",
        h.toolkit,
        h.version,
        h.command.name(),
        &h.input_digest[..16]
    );
    let _ = writeln!(out, "points: {}", r.points.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(", "));

    if let Some(ax) = &r.axioms {
        let _ = writeln!(out, "\n[b-metric axioms] s = {}, tol = {:e}", fmt_num(ax.s), ax.tol);
        let _ = writeln!(
            out,
            "  identity {}  symmetry {}  triangle {}",
            yes(ax.identity_ok),
            yes(ax.symmetry_ok),
            yes(ax.triangle_ok)
        );
        match (ax.min_feasible_s, ax.sharpest_triple) {
            (Some(s), Some((x, z, y))) => {
                let _ = writeln!(out, "  smallest feasible s = {} (triple {} → {} via {})", fmt_num(s), p(x), p(z), p(y));
            }
            (Some(s), None) => {
                let _ = writeln!(out, "  smallest feasible s = {}", fmt_num(s));
            }
            (None, _) => {
                let _ = writeln!(out, "  no coefficient s makes the triangle inequality hold");
            }
        }
        for w in ax.witnesses.iter().take(10) {
            let line = match *w {
                AxiomWitness::Identity { a, b, distance } => format!("identity: d({}, {}) = {distance}", p(a), p(b)),
                AxiomWitness::Symmetry { a, b, forward, backward } => {
                    format!("symmetry: d({}, {}) = {forward} but reverse is {backward}", p(a), p(b))
                }
                AxiomWitness::Triangle { from, to, via, lhs, rhs_sum } => format!(
                    "triangle: d({0}, {1}) = {2} > s·(d({0}, {3}) + d({3}, {1})) = {4}",
                    p(from),
                    p(to),
                    fmt_num(lhs),
                    p(via),
                    fmt_num(ax.s * rhs_sum)
                ),
            };
            let _ = writeln!(out, "  witness {line}");
        }
    }

    if let Some(z) = &r.zeta {
        let _ = writeln!(
            out,
            "\n[simulation function] {}: ζ1 {}  ζ2 {} ({} samples)  ζ3 {} ({} sequences)",
            z.family,
            yes(z.zeta1_ok),
            yes(z.zeta2_ok),
            z.zeta2_samples,
            yes(z.zeta3_ok),
            z.zeta3_sequences
        );
        for v in z.zeta2_violations.iter().take(5) {
            let _ = writeln!(out, "  ζ2 violated at t = {}, s = {}: ζ = {}", v.t, v.s, v.value);
        }
        for v in z.zeta3_violations.iter().take(5) {
            let _ = writeln!(out, "  ζ3 violated on {} sequence with limit {}: limsup ≈ {}", v.family, v.limit, v.limsup_estimate);
        }
        for note in &z.zeta3_not_exercised {
            let _ = writeln!(out, "  not exercised: {note}");
        }
    }

    if let Some(rel) = &r.relation {
        let _ = writeln!(out, "\n[relation] {} pairs", rel.pair_count);
        let _ = writeln!(out, "  transitive {}  F-closed {}  complete {}", yes(rel.transitive.holds), yes(rel.f_closed.holds), yes(rel.complete.holds));
        let _ = writeln!(
            out,
            "  reflexive {}  irreflexive {}  symmetric {}  antisymmetric {}",
            yes(rel.reflexive.holds),
            yes(rel.irreflexive.holds),
            yes(rel.symmetric.holds),
            yes(rel.antisymmetric.holds)
        );
        if let Some(&(a, b, c)) = rel.transitive.witnesses.first() {
            let _ = writeln!(out, "  transitivity fails: {} → {} → {}", p(a), p(b), p(c));
        }
        if let Some(&w) = rel.f_closed.witnesses.first() {
            let _ = writeln!(out, "  closure under F fails at {}", pair(w));
        }
        match &rel.bd_self_closed {
            SelfClosedness::Holds { justification } => {
                let _ = writeln!(out, "  self-closed: {justification}");
            }
            SelfClosedness::NotApplicable { reason } => {
                let _ = writeln!(out, "  self-closed: not decided ({reason})");
            }
        }
    }

    if let Some(h) = &r.hypotheses {
        let c = &h.contraction;
        let _ = writeln!(out, "\n[hypotheses]");
        let _ = writeln!(out, "  admissible starts M(F;R) = {{{}}}", list(&h.mfr));
        let _ = writeln!(out, "  third condition via {:?}", h.condition_iii);
        let _ = writeln!(
            out,
            "  contraction {} (tol {:e}): {} active, {} vacuous, {} failing",
            yes(c.holds),
            c.tol,
            c.active,
            c.vacuous,
            c.failures.len()
        );
        for &f in c.failures.iter().take(10) {
            let _ = writeln!(out, "    fails at {}", pair(f));
        }
        match c.linear_threshold.lambda {
            Some(l) => {
                let binding: Vec<String> = c.linear_threshold.binding.iter().map(|&b| pair(b)).collect();
                let _ = writeln!(out, "  linear ζ needs λ ≥ {} (binding {})", fmt_num(l), binding.join(" "));
            }
            None => {
                let _ = writeln!(out, "  no linear ζ satisfies every active pair");
            }
        }
        if let Some(m) = &c.max_image_ratio {
            let _ = writeln!(out, "  largest d(Fσ,Fρ)/d(σ,ρ) = {} at {}", fmt_num(m.ratio), pair((m.sigma, m.rho)));
        }
        for caveat in &h.caveats {
            let _ = writeln!(out, "  note: {caveat}");
        }
        let _ = writeln!(out, "  all hypotheses {}", yes(h.all_hypotheses_ok));
    }

    for pr in &r.probes {
        let b = &pr.b_simulation;
        let _ = writeln!(
            out,
            "\n[probe {}] d(σ,ρ) = {}, d(Fσ,Fρ) = {}{}",
            pair((pr.sigma, pr.rho)),
            fmt_num(pr.pair_distance),
            fmt_num(pr.image_distance),
            pr.ratio.map(|x| format!(", ratio {}", fmt_num(x))).unwrap_or_default()
        );
        let _ = writeln!(
            out,
            "  b-simulation bound d(σ,ρ) − s·d(Fσ,Fρ) = {} ({:?}){}",
            fmt_num(b.bound),
            b.sign,
            if b.nonnegative_value_impossible {
                "; no b-simulation function is nonnegative here"
            } else {
                ""
            }
        );
    }

    if let Some(t) = &r.trace {
        let _ = writeln!(out, "\n[iteration] from {}", p(t.start));
        let _ = writeln!(out, "  orbit {}", t.orbit_values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" → "));
        let _ = writeln!(out, "  steps {}", t.steps.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(", "));
        let _ = writeln!(out, "  φ {}", t.phi_values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(", "));
        let _ = writeln!(out, "  terminated by {:?}, residual {}", t.terminated_by, fmt_num(t.residual));
        if !t.relation_violations.is_empty() {
            let _ = writeln!(out, "  relation violated at steps {:?}", t.relation_violations);
        }
    }

    if let Some(d) = &r.diagnostics {
        let _ = writeln!(out, "\n[diagnostics] tol {:e}", d.tol);
        let _ = writeln!(out, "  per-step ratio bound {}  ({} ratios)", yes(d.ratio_bound_ok), d.ratio_bounds.len());
        let _ = writeln!(
            out,
            "  telescoping sum {} ≤ {}: {}",
            fmt_num(d.ratio_sum),
            fmt_num(d.telescoping_bound),
            yes(d.telescoping_ok)
        );
        let _ = writeln!(out, "  potential descent {}", yes(d.phi_descent_ok));
        if d.decay.exercised {
            let _ = writeln!(
                out,
                "  eventual decay: ϱ = {}, n0 = {}, holds {}",
                d.decay.rho.map(fmt_num).unwrap_or_default(),
                d.decay.n0.unwrap_or_default(),
                yes(d.decay.holds)
            );
        } else if let Some(reason) = &d.decay.reason {
            let _ = writeln!(out, "  eventual decay not exercised: {reason}");
        }
    }

    if let Some(c) = &r.certificate {
        let _ = writeln!(out, "\n[certificate]");
        let _ = writeln!(out, "  fixed points {{{}}}, solver result {}", list(&c.fixed_points), p(c.solver_result));
        let _ = writeln!(out, "  unique {}", yes(c.unique));
        for x in &c.contradictions {
            let _ = writeln!(
                out,
                "  contradiction: {} and {} are joined by {} ({})",
                p(x.from),
                p(x.to),
                list(&x.path.nodes),
                x.note
            );
        }
    }

    let _ = writeln!(
        out,
        "\nverdict: {}{}",
        if r.verdict.pass { "PASS" } else { "FAIL" },
        if r.verdict.failed.is_empty() {
            String::new()
        } else {
            format!(" ({})", r.verdict.failed.join("; "))
        }
    );
    out
}
