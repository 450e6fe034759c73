//! Finite b-metric spaces and an exhaustive checker for the b-metric axioms.
//!
//! A space is a finite, ordered table of one-dimensional points together with
//! a distance definition and a relaxation coefficient `s >= 1` for the
//! triangle inequality `d(x, z) <= s * (d(x, y) + d(y, z))`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Strategy};

/// Axiom tolerance used for formula metrics, whose evaluation rounds.
pub const FORMULA_AXIOM_TOL: f64 = 1e-12;

/// Dense index into a space's point table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub id: PointId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `d(x, y) = (x - y)^2`, a b-metric with coefficient 2.
    SquaredDifference,
    /// `d(x, y) = |x - y|`, the usual metric.
    AbsoluteDifference,
    /// Explicit distance table indexed by point id.
    Table(Vec<Vec<f64>>),
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::SquaredDifference => "squared-difference",
            Metric::AbsoluteDifference => "absolute-difference",
            Metric::Table(_) => "table",
        }
    }

    /// Whether distances are read verbatim from data rather than computed.
    pub fn is_exact(&self) -> bool {
        matches!(self, Metric::Table(_))
    }
}

/// How the finite carrier relates to the space it stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// The listed points are the whole space.
    Carrier,
    /// The points are a grid sample of a continuum.
    GridSample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BMetricSpace {
    values: Vec<f64>,
    metric: Metric,
    s: f64,
    complete: bool,
    sampling: Sampling,
}

impl BMetricSpace {
    pub fn new(values: Vec<f64>, metric: Metric, s: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpace("the point set must be non-empty".into()));
        }
        if !s.is_finite() || s < 1.0 {
            return Err(Error::InvalidSpace(format!("s >= 1 required, got {s}")));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSpace(format!("point #{i} has non-finite value {v}")));
            }
            if values[..i].contains(v) {
                return Err(Error::InvalidSpace(format!("duplicate point value {v}")));
            }
        }
        if let Metric::Table(rows) = &metric {
            validate_table(rows, values.len())?;
        }
        Ok(Self {
            values,
            metric,
            s,
            complete: true,
            sampling: Sampling::Carrier,
        })
    }

    pub fn with_complete_flag(mut self, complete: bool) -> Self {
        self.complete = complete;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    /// Same points and metric with a different coefficient.
    pub fn with_coefficient(&self, s: f64) -> Result<Self> {
        let mut space = Self::new(self.values.clone(), self.metric.clone(), s)?;
        space.complete = self.complete;
        space.sampling = self.sampling;
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coefficient(&self) -> f64 {
        self.s
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// User assertion of b-completeness. Never computed.
    pub fn complete_flag(&self) -> bool {
        self.complete
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = PointId> + '_ {
        (0..self.values.len()).map(PointId)
    }

    pub fn point(&self, id: PointId) -> Result<Point> {
        self.values
            .get(id.0)
            .map(|&value| Point { id, value })
            .ok_or(Error::UnknownPoint(id.0))
    }

    pub fn value(&self, id: PointId) -> f64 {
        self.values[id.0]
    }

    pub fn contains(&self, id: PointId) -> bool {
        id.0 < self.values.len()
    }

    /// Look a point up by coordinate. Exact matches win; otherwise a relative
    /// tolerance of 1e-9 absorbs grid rounding.
    pub fn find_value(&self, v: f64) -> Option<PointId> {
        if let Some(i) = self.values.iter().position(|&x| x == v) {
            return Some(PointId(i));
        }
        let tol = 1e-9 * v.abs().max(1.0);
        self.values
            .iter()
            .position(|&x| (x - v).abs() <= tol)
            .map(PointId)
    }

    pub fn distance(&self, a: PointId, b: PointId) -> Result<f64> {
        if !self.contains(a) {
            return Err(Error::UnknownPoint(a.0));
        }
        if !self.contains(b) {
            return Err(Error::UnknownPoint(b.0));
        }
        Ok(self.d(a.0, b.0))
    }

    /// Unchecked distance by raw index.
    #[inline]
    pub(crate) fn d(&self, a: usize, b: usize) -> f64 {
        match &self.metric {
            Metric::SquaredDifference => {
                let diff = self.values[a] - self.values[b];
                diff * diff
            }
            Metric::AbsoluteDifference => (self.values[a] - self.values[b]).abs(),
            Metric::Table(rows) => rows[a][b],
        }
    }

    /// Default tolerance for the axiom check: exact for tables.
    pub fn default_axiom_tol(&self) -> f64 {
        if self.metric.is_exact() {
            0.0
        } else {
            FORMULA_AXIOM_TOL
        }
    }

    /// Smallest positive distance between two points, if any pair is apart.
    pub fn min_nonzero_distance(&self) -> Option<f64> {
        let n = self.len();
        let mut best: Option<f64> = None;
        for a in 0..n {
            for b in 0..n {
                let d = self.d(a, b);
                if d > 0.0 && best.is_none_or(|m| d < m) {
                    best = Some(d);
                }
            }
        }
        best
    }
}

fn validate_table(rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::InvalidSpace(format!(
            "distance table has {} rows for {n} points",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidSpace(format!(
                "distance table row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        for (j, &d) in row.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(Error::InvalidSpace(format!(
                    "distance table entry ({i}, {j}) = {d} is not a finite nonnegative real"
                )));
            }
        }
        if row[i] != 0.0 {
            return Err(Error::InvalidSpace(format!("distance table diagonal ({i}, {i}) must be zero")));
        }
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate().take(i) {
            if v != rows[j][i] {
                return Err(Error::InvalidSpace(format!(
                    "distance table is not symmetric at ({j}, {i})"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum AxiomWitness {
    /// `d(a, b) = 0` for distinct points, or a nonzero self-distance.
    Identity { a: PointId, b: PointId, distance: f64 },
    Symmetry { a: PointId, b: PointId, forward: f64, backward: f64 },
    /// `d(from, to) > s * (d(from, via) + d(via, to)) + tol`.
    Triangle {
        from: PointId,
        to: PointId,
        via: PointId,
        lhs: f64,
        rhs_sum: f64,
    },
}

impl AxiomWitness {
    /// Stable sort key: axiom kind, then the ids involved.
    fn key(&self) -> (u8, usize, usize, usize) {
        match *self {
            AxiomWitness::Identity { a, b, .. } => (0, a.0, b.0, 0),
            AxiomWitness::Symmetry { a, b, .. } => (1, a.0, b.0, 0),
            AxiomWitness::Triangle { from, to, via, .. } => (2, from.0, to.0, via.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub s: f64,
    pub tol: f64,
    pub identity_ok: bool,
    pub symmetry_ok: bool,
    pub triangle_ok: bool,
    /// Largest `d(x, z) / (d(x, y) + d(y, z))` over triples with a positive
    /// denominator, floored at 1. `None` when some triple has a positive
    /// left side over a zero denominator, i.e. no coefficient works.
    pub min_feasible_s: Option<f64>,
    /// Triple attaining `min_feasible_s`, as `(from, to, via)`.
    pub sharpest_triple: Option<(PointId, PointId, PointId)>,
    pub witnesses: Vec<AxiomWitness>,
}

impl AxiomReport {
    pub fn all_ok(&self) -> bool {
        self.identity_ok && self.symmetry_ok && self.triangle_ok
    }
}

pub fn verify_bmetric_axioms(space: &BMetricSpace, tol: f64) -> AxiomReport {
    verify_bmetric_axioms_with(space, tol, Strategy::default())
}

pub fn verify_bmetric_axioms_with(space: &BMetricSpace, tol: f64, strategy: Strategy) -> AxiomReport {
    scan_axioms(space.len(), space.coefficient(), tol, strategy, |a, b| space.d(a, b))
}

/// Run the axiom scan on a raw square table, which need not be symmetric or
/// zero-diagonal.
pub fn verify_table_axioms(table: &[Vec<f64>], s: f64, tol: f64) -> AxiomReport {
    scan_axioms(table.len(), s, tol, Strategy::default(), |a, b| table[a][b])
}

#[derive(Default)]
struct TripleScan {
    witnesses: Vec<AxiomWitness>,
    best: Option<(f64, (usize, usize, usize))>,
    infeasible: bool,
}

fn scan_axioms<D>(n: usize, s: f64, tol: f64, strategy: Strategy, d: D) -> AxiomReport
where
    D: Fn(usize, usize) -> f64 + Sync + Send,
{
    let mut witnesses = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let dab = d(a, b);
            if (a == b) != (dab == 0.0) {
                witnesses.push(AxiomWitness::Identity {
                    a: PointId(a),
                    b: PointId(b),
                    distance: dab,
                });
            }
            if a < b {
                let dba = d(b, a);
                if dab != dba {
                    witnesses.push(AxiomWitness::Symmetry {
                        a: PointId(a),
                        b: PointId(b),
                        forward: dab,
                        backward: dba,
                    });
                }
            }
        }
    }

    // One partial scan per `from` row, merged in row order.
    let rows = par::map_range(strategy, n, |x| {
        let mut scan = TripleScan::default();
        for z in 0..n {
            let lhs = d(x, z);
            for y in 0..n {
                let rhs = d(x, y) + d(y, z);
                if lhs > s * rhs + tol {
                    scan.witnesses.push(AxiomWitness::Triangle {
                        from: PointId(x),
                        to: PointId(z),
                        via: PointId(y),
                        lhs,
                        rhs_sum: rhs,
                    });
                }
                if rhs > 0.0 {
                    let ratio = lhs / rhs;
                    if scan.best.is_none_or(|(r, _)| ratio > r) {
                        scan.best = Some((ratio, (x, z, y)));
                    }
                } else if lhs > 0.0 {
                    scan.infeasible = true;
                }
            }
        }
        scan
    });

    let mut best: Option<(f64, (usize, usize, usize))> = None;
    let mut infeasible = false;
    for row in rows {
        witnesses.extend(row.witnesses);
        infeasible |= row.infeasible;
        if let Some((r, t)) = row.best {
            if best.is_none_or(|(b, _)| r > b) {
                best = Some((r, t));
            }
        }
    }
    witnesses.sort_by_key(AxiomWitness::key);

    let identity_ok = !witnesses.iter().any(|w| matches!(w, AxiomWitness::Identity { .. }));
    let symmetry_ok = !witnesses.iter().any(|w| matches!(w, AxiomWitness::Symmetry { .. }));
    let triangle_ok = !witnesses.iter().any(|w| matches!(w, AxiomWitness::Triangle { .. }));
    let min_feasible_s = if infeasible {
        None
    } else {
        Some(best.map_or(1.0, |(r, _)| r.max(1.0)))
    };
    AxiomReport {
        s,
        tol,
        identity_ok,
        symmetry_ok,
        triangle_ok,
        min_feasible_s,
        sharpest_triple: best.map(|(_, (x, z, y))| (PointId(x), PointId(z), PointId(y))),
        witnesses,
    }
}
