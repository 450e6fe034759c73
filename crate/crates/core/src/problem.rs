//! Line-oriented problem files.
//!
//! ```text
//! # comments run to the end of the line
//! [space]
//! points = 1, 2, 3, 4          # or: range = 1 .. 4 step 0.5
//! metric = squared-difference  # absolute-difference | table (with `row = ...` lines)
//! s = 2
//! complete = true
//! sampling = carrier           # grid; defaults to grid for ranges
//!
//! [relation]
//! pair = 1 2                   # or: pairs = (1, 1) (1, 2) ...
//! order = ge                   # adds {(a, b) : a >= b}; also le
//! closure = transitive         # symmetric; applied in order after the pairs
//!
//! [map]
//! piece = [1, 2] -> 1          # interval bounds may be open: (2, 3]
//! at = 4 -> 3
//! r_continuous = false
//!
//! [potential]
//! linear = 3                   # φ(x) = 3x; or `value = x -> v` lines
//!
//! [zeta]
//! family = linear              # scaled (lambda, mu) | custom-table (entry = t s -> v)
//! lambda = 0.9
//! grid = 0.1 0.5 1 2 4 8
//!
//! [solver]
//! start = 3
//! tol = 0
//! max_iter = 40
//!
//! [probe]
//! pair = 2 4
//! ```
//!
//! Points are referred to by coordinate everywhere.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::contraction::{ContractionProblem, Potential, SelfMap};
use crate::error::{Error, Result};
use crate::relation::BinaryRelation;
use crate::simulation::{SampleSpec, SimulationFunction, TableEntry};
use crate::space::{BMetricSpace, Metric, PointId, Sampling};

const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum PointsSpec {
    List(Vec<f64>),
    Range { start: f64, end: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    SquaredDifference,
    AbsoluteDifference,
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceBlock {
    pub points: PointsSpec,
    pub metric: MetricSpec,
    pub s: f64,
    pub complete: bool,
    pub sampling: Option<Sampling>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Ge,
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    Symmetric,
    Transitive,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RelationBlock {
    pub pairs: Vec<(f64, f64)>,
    pub orders: Vec<Order>,
    pub closures: Vec<Closure>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapEntry {
    At { from: f64, to: f64 },
    Piece { lo: Bound, hi: Bound, to: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapBlock {
    pub entries: Vec<MapEntry>,
    pub r_continuous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialBlock {
    Linear(f64),
    Table(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZetaFamily {
    Linear { lambda: f64 },
    Scaled { lambda: f64, mu: f64 },
    CustomTable(Vec<TableEntry>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZetaBlock {
    pub family: ZetaFamily,
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverBlock {
    pub start: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub space: SpaceBlock,
    pub relation: RelationBlock,
    pub map: MapBlock,
    pub potential: PotentialBlock,
    pub zeta: ZetaBlock,
    pub solver: SolverBlock,
    pub probes: Vec<(f64, f64)>,
}

/// A validated problem with its solver settings resolved to point ids.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltProblem {
    pub problem: ContractionProblem,
    pub sample_spec: SampleSpec,
    pub start: Option<PointId>,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub probes: Vec<(PointId, PointId)>,
}

/// Parse and fully validate a problem file. Errors carry 1-based line and
/// column numbers.
pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let (file, spans) = Parser::default().run(text)?;
    file.build_with(&spans)?;
    Ok(file)
}

impl ProblemFile {
    /// Validate and assemble. Errors have no line information; use
    /// [`parse_problem`] for anchored diagnostics.
    pub fn build(&self) -> Result<BuiltProblem> {
        self.build_with(&Spans::default())
    }

    fn build_with(&self, spans: &Spans) -> Result<BuiltProblem> {
        let space = self.build_space(spans)?;
        let n = space.len();
        let lookup = |v: f64, at: Anchor, what: &str| {
            space
                .find_value(v)
                .ok_or_else(|| at.error(format!("{what} {} is not a point of the space", fmt_num(v))))
        };

        let mut relation = BinaryRelation::empty(n);
        for (i, &(a, b)) in self.relation.pairs.iter().enumerate() {
            let at = spans.item("relation.pair", i);
            let a = lookup(a, at, "relation endpoint")?;
            let b = lookup(b, at, "relation endpoint")?;
            relation.insert(a, b)?;
        }
        for order in &self.relation.orders {
            let values = space.values();
            for a in space.ids() {
                for b in space.ids() {
                    let keep = match order {
                        Order::Ge => values[a.0] >= values[b.0],
                        Order::Le => values[a.0] <= values[b.0],
                    };
                    if keep {
                        relation.insert(a, b)?;
                    }
                }
            }
        }
        for closure in &self.relation.closures {
            relation = match closure {
                Closure::Symmetric => relation.symmetric_closure(),
                Closure::Transitive => relation.transitive_closure(),
            };
        }

        let mut image = Vec::with_capacity(n);
        for p in space.ids() {
            let x = space.value(p);
            let hit = self.map.entries.iter().enumerate().find(|(_, e)| match e {
                MapEntry::At { from, .. } => space.find_value(*from) == Some(p),
                MapEntry::Piece { lo, hi, .. } => {
                    (x > lo.value || (lo.closed && x == lo.value)) && (x < hi.value || (hi.closed && x == hi.value))
                }
            });
            let Some((i, entry)) = hit else {
                return Err(spans
                    .key("section.map")
                    .error(format!("map is not total: point {} has no image", fmt_num(x))));
            };
            let to = match entry {
                MapEntry::At { to, .. } | MapEntry::Piece { to, .. } => *to,
            };
            let target = space.find_value(to).ok_or_else(|| {
                spans.item("map.entry", i).error(format!(
                    "image {} of point {} is not a point of the space (map must be total on the carrier)",
                    fmt_num(to),
                    fmt_num(x)
                ))
            })?;
            image.push(target);
        }
        let map = SelfMap::new(image, &space)?.with_r_continuous(self.map.r_continuous);

        let potential = match &self.potential {
            PotentialBlock::Linear(c) => {
                let values: Vec<f64> = space.values().iter().map(|x| c * x).collect();
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return Err(spans.key("potential.linear").error(format!(
                        "potential takes value {} outside the codomain [0, ∞)",
                        fmt_num(*v)
                    )));
                }
                values
            }
            PotentialBlock::Table(entries) => {
                let mut values = vec![None; n];
                for (i, &(x, v)) in entries.iter().enumerate() {
                    let at = spans.item("potential.value", i);
                    let p = lookup(x, at, "potential argument")?;
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(at.error(format!(
                            "potential value {} at {} is outside the codomain [0, ∞)",
                            fmt_num(v),
                            fmt_num(x)
                        )));
                    }
                    values[p.0] = Some(v);
                }
                values
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| {
                            spans.key("section.potential").error(format!(
                                "potential has no value at point {}",
                                fmt_num(space.value(PointId(i)))
                            ))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
        };
        let potential = Potential::new(potential)?;

        let zeta_at = spans.key("zeta.family");
        let zeta = match &self.zeta.family {
            ZetaFamily::Linear { lambda } => SimulationFunction::linear(*lambda),
            ZetaFamily::Scaled { lambda, mu } => SimulationFunction::scaled(*lambda, *mu),
            ZetaFamily::CustomTable(entries) => SimulationFunction::custom_table(entries.clone()),
        }
        .map_err(|e| zeta_at.error(e.to_string()))?;
        let sample_spec = match &self.zeta.grid {
            Some(grid) => {
                if grid.is_empty() || grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
                    return Err(spans
                        .key("zeta.grid")
                        .error("sample grid must be a non-empty list of positive reals".into()));
                }
                SampleSpec::with_grid(grid.clone())
            }
            None => SampleSpec::default(),
        };

        let start = self
            .solver
            .start
            .map(|v| lookup(v, spans.key("solver.start"), "start"))
            .transpose()?;
        let tol = self.solver.tol.unwrap_or(0.0);
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(spans.key("solver.tol").error("solver tol must be a finite nonnegative real".into()));
        }
        if self.solver.max_iter == Some(0) {
            return Err(spans.key("solver.max_iter").error("max_iter must be positive".into()));
        }
        let probes = self
            .probes
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let at = spans.item("probe.pair", i);
                Ok((lookup(a, at, "probe point")?, lookup(b, at, "probe point")?))
            })
            .collect::<Result<Vec<_>>>()?;

        let problem = ContractionProblem::new(space, relation, map, potential, zeta)?;
        Ok(BuiltProblem {
            problem,
            sample_spec,
            start,
            tol,
            max_iter: self.solver.max_iter,
            probes,
        })
    }

    fn build_space(&self, spans: &Spans) -> Result<BMetricSpace> {
        let block = &self.space;
        let values = match &block.points {
            PointsSpec::List(values) => values.clone(),
            PointsSpec::Range { start, end, step } => {
                let at = spans.key("space.range");
                if !(step.is_finite() && *step > 0.0 && start.is_finite() && end.is_finite() && start <= end) {
                    return Err(at.error("range needs finite start <= end and a positive step".into()));
                }
                let count = ((end - start) / step + 1e-9).floor() as usize + 1;
                if count > MAX_GRID_POINTS {
                    return Err(at.error(format!("range yields {count} points, limit is {MAX_GRID_POINTS}")));
                }
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        };
        let metric = match &block.metric {
            MetricSpec::SquaredDifference => Metric::SquaredDifference,
            MetricSpec::AbsoluteDifference => Metric::AbsoluteDifference,
            MetricSpec::Table(rows) => Metric::Table(rows.clone()),
        };
        if !(block.s >= 1.0 && block.s.is_finite()) {
            return Err(spans
                .key("space.s")
                .error(format!("s ≥ 1 required, got {}", fmt_num(block.s))));
        }
        let default_sampling = match block.points {
            PointsSpec::List(_) => Sampling::Carrier,
            PointsSpec::Range { .. } => Sampling::GridSample,
        };
        let space = BMetricSpace::new(values, metric, block.s).map_err(|e| spans.key("section.space").error(e.to_string()))?;
        Ok(space
            .with_complete_flag(block.complete)
            .with_sampling(block.sampling.unwrap_or(default_sampling)))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Anchor {
    line: usize,
    column: usize,
}

impl Anchor {
    fn error(self, message: String) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column,
            message,
        }
    }
}

#[derive(Debug, Default)]
struct Spans {
    keys: HashMap<&'static str, Anchor>,
    items: HashMap<&'static str, Vec<Anchor>>,
}

impl Spans {
    fn key(&self, name: &str) -> Anchor {
        self.keys.get(name).copied().unwrap_or_default()
    }

    fn item(&self, name: &str, i: usize) -> Anchor {
        self.items.get(name).and_then(|v| v.get(i)).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Space,
    Relation,
    Map,
    Potential,
    Zeta,
    Solver,
    Probe,
}

#[derive(Default)]
struct Parser {
    points: Option<PointsSpec>,
    metric: Option<String>,
    rows: Vec<Vec<f64>>,
    s: Option<f64>,
    complete: Option<bool>,
    sampling: Option<Sampling>,
    relation: RelationBlock,
    map: MapBlock,
    potential_linear: Option<f64>,
    potential_table: Vec<(f64, f64)>,
    family: Option<String>,
    lambda: Option<f64>,
    mu: Option<f64>,
    zeta_entries: Vec<TableEntry>,
    grid: Option<Vec<f64>>,
    solver: SolverBlock,
    probes: Vec<(f64, f64)>,
    seen: Vec<Section>,
    spans: Spans,
}

struct Value<'a> {
    text: &'a str,
    at: Anchor,
}

impl<'a> Value<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        self.at.error(message.into())
    }

    fn number(&self) -> Result<f64> {
        parse_number(self.text, self.at)
    }

    fn numbers(&self) -> Result<Vec<f64>> {
        self.text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| parse_number(t, self.at))
            .collect()
    }

    fn boolean(&self) -> Result<bool> {
        match self.text {
            "true" | "yes" => Ok(true),
            "false" | "no" => Ok(false),
            other => Err(self.err(format!("expected true or false, got `{other}`"))),
        }
    }

    /// `lhs -> rhs`.
    fn arrow(&self) -> Result<(&'a str, f64)> {
        let (lhs, rhs) = self
            .text
            .split_once("->")
            .ok_or_else(|| self.err("expected `<argument> -> <value>`"))?;
        Ok((lhs.trim(), parse_number(rhs.trim(), self.at)?))
    }
}

fn parse_number(text: &str, at: Anchor) -> Result<f64> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(at.error(format!("expected a finite number, got `{}`", text.trim()))),
    }
}

impl Parser {
    fn run(mut self, text: &str) -> Result<(ProblemFile, Spans)> {
        let mut section: Option<Section> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            let at_line = Anchor {
                line: line_no,
                column: indent + 1,
            };
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| at_line.error("unterminated section header".into()))?
                    .trim();
                let next = match name {
                    "space" => Section::Space,
                    "relation" => Section::Relation,
                    "map" => Section::Map,
                    "potential" => Section::Potential,
                    "zeta" => Section::Zeta,
                    "solver" => Section::Solver,
                    "probe" => Section::Probe,
                    other => return Err(at_line.error(format!("unknown section `[{other}]`"))),
                };
                if self.seen.contains(&next) {
                    return Err(at_line.error(format!("duplicate section `[{name}]`")));
                }
                self.seen.push(next);
                let key: &'static str = match next {
                    Section::Space => "section.space",
                    Section::Relation => "section.relation",
                    Section::Map => "section.map",
                    Section::Potential => "section.potential",
                    Section::Zeta => "section.zeta",
                    Section::Solver => "section.solver",
                    Section::Probe => "section.probe",
                };
                self.spans.keys.insert(key, at_line);
                section = Some(next);
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| at_line.error("expected `key = value`".into()))?;
            let key = key.trim();
            let value_text = value.trim();
            let value_offset = content.find('=').expect("split on '='") + 1;
            let value_indent = content[value_offset..].len() - content[value_offset..].trim_start().len();
            let value = Value {
                text: value_text,
                at: Anchor {
                    line: line_no,
                    column: value_offset + value_indent + 1,
                },
            };
            let Some(section) = section else {
                return Err(at_line.error("key outside of any section".into()));
            };
            self.key(section, key, value, at_line)?;
        }
        self.finish()
    }

    fn remember(&mut self, key: &'static str, at: Anchor) {
        self.spans.keys.insert(key, at);
    }

    fn push_item(&mut self, key: &'static str, at: Anchor) {
        self.spans.items.entry(key).or_default().push(at);
    }

    fn key(&mut self, section: Section, key: &str, value: Value<'_>, at_line: Anchor) -> Result<()> {
        let unknown = || at_line.error(format!("unknown key `{key}` in this section"));
        match section {
            Section::Space => match key {
                "points" => {
                    self.remember("space.points", value.at);
                    self.points = Some(PointsSpec::List(value.numbers()?));
                }
                "range" => {
                    self.remember("space.range", value.at);
                    self.points = Some(parse_range(&value)?);
                }
                "metric" => {
                    self.remember("space.metric", value.at);
                    match value.text {
                        "squared-difference" | "absolute-difference" | "table" => {
                            self.metric = Some(value.text.to_string())
                        }
                        other => return Err(value.err(format!("unknown metric `{other}`"))),
                    }
                }
                "row" => {
                    self.push_item("space.row", value.at);
                    self.rows.push(value.numbers()?);
                }
                "s" => {
                    self.remember("space.s", value.at);
                    self.s = Some(value.number()?);
                }
                "complete" => self.complete = Some(value.boolean()?),
                "sampling" => {
                    self.sampling = Some(match value.text {
                        "carrier" => Sampling::Carrier,
                        "grid" => Sampling::GridSample,
                        other => return Err(value.err(format!("unknown sampling `{other}`"))),
                    })
                }
                _ => return Err(unknown()),
            },
            Section::Relation => match key {
                "pair" => {
                    let nums = value.numbers()?;
                    let [a, b] = nums[..] else {
                        return Err(value.err("expected two coordinates"));
                    };
                    self.push_item("relation.pair", value.at);
                    self.relation.pairs.push((a, b));
                }
                "pairs" => {
                    for pair in parse_pair_list(&value)? {
                        self.push_item("relation.pair", value.at);
                        self.relation.pairs.push(pair);
                    }
                }
                "order" => self.relation.orders.push(match value.text {
                    "ge" => Order::Ge,
                    "le" => Order::Le,
                    other => return Err(value.err(format!("unknown order `{other}`, expected ge or le"))),
                }),
                "closure" => self.relation.closures.push(match value.text {
                    "symmetric" => Closure::Symmetric,
                    "transitive" => Closure::Transitive,
                    other => return Err(value.err(format!("unknown closure `{other}`"))),
                }),
                _ => return Err(unknown()),
            },
            Section::Map => match key {
                "at" => {
                    let (lhs, to) = value.arrow()?;
                    let from = parse_number(lhs, value.at)?;
                    self.push_item("map.entry", value.at);
                    self.map.entries.push(MapEntry::At { from, to });
                }
                "piece" => {
                    let (lhs, to) = value.arrow()?;
                    let (lo, hi) = parse_interval(lhs, value.at)?;
                    self.push_item("map.entry", value.at);
                    self.map.entries.push(MapEntry::Piece { lo, hi, to });
                }
                "r_continuous" => self.map.r_continuous = value.boolean()?,
                _ => return Err(unknown()),
            },
            Section::Potential => match key {
                "linear" => {
                    self.remember("potential.linear", value.at);
                    self.potential_linear = Some(value.number()?);
                }
                "value" => {
                    let (lhs, v) = value.arrow()?;
                    let x = parse_number(lhs, value.at)?;
                    self.push_item("potential.value", value.at);
                    self.potential_table.push((x, v));
                }
                _ => return Err(unknown()),
            },
            Section::Zeta => match key {
                "family" => {
                    self.remember("zeta.family", value.at);
                    match value.text {
                        "linear" | "scaled" | "custom-table" => self.family = Some(value.text.to_string()),
                        other => return Err(value.err(format!("unknown simulation family `{other}`"))),
                    }
                }
                "lambda" => self.lambda = Some(value.number()?),
                "mu" => self.mu = Some(value.number()?),
                "entry" => {
                    let (lhs, v) = value.arrow()?;
                    let args = Value { text: lhs, at: value.at }.numbers()?;
                    let [t, s] = args[..] else {
                        return Err(value.err("expected `t s -> value`"));
                    };
                    self.zeta_entries.push(TableEntry { t, s, value: v });
                }
                "grid" => {
                    self.remember("zeta.grid", value.at);
                    self.grid = Some(value.numbers()?);
                }
                _ => return Err(unknown()),
            },
            Section::Solver => match key {
                "start" => {
                    self.remember("solver.start", value.at);
                    self.solver.start = Some(value.number()?);
                }
                "tol" => {
                    self.remember("solver.tol", value.at);
                    self.solver.tol = Some(value.number()?);
                }
                "max_iter" => {
                    self.remember("solver.max_iter", value.at);
                    self.solver.max_iter = Some(
                        value
                            .text
                            .parse()
                            .map_err(|_| value.err(format!("expected a nonnegative integer, got `{}`", value.text)))?,
                    );
                }
                _ => return Err(unknown()),
            },
            Section::Probe => match key {
                "pair" => {
                    let nums = value.numbers()?;
                    let [a, b] = nums[..] else {
                        return Err(value.err("expected two coordinates"));
                    };
                    self.push_item("probe.pair", value.at);
                    self.probes.push((a, b));
                }
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }

    fn finish(self) -> Result<(ProblemFile, Spans)> {
        let end = Anchor { line: 0, column: 0 };
        for (section, name) in [
            (Section::Space, "space"),
            (Section::Relation, "relation"),
            (Section::Map, "map"),
            (Section::Potential, "potential"),
            (Section::Zeta, "zeta"),
        ] {
            if !self.seen.contains(&section) {
                return Err(end.error(format!("missing required section `[{name}]`")));
            }
        }
        let space_at = self.spans.key("section.space");
        let points = self
            .points
            .ok_or_else(|| space_at.error("space needs `points` or `range`".into()))?;
        let metric_name = self
            .metric
            .ok_or_else(|| space_at.error("space needs a `metric`".into()))?;
        if metric_name != "table" && !self.rows.is_empty() {
            return Err(self.spans.item("space.row", 0).error("`row` lines need `metric = table`".into()));
        }
        let metric = match metric_name.as_str() {
            "squared-difference" => MetricSpec::SquaredDifference,
            "absolute-difference" => MetricSpec::AbsoluteDifference,
            _ => {
                if self.rows.is_empty() {
                    return Err(self.spans.key("space.metric").error("table metric needs `row` lines".into()));
                }
                MetricSpec::Table(self.rows)
            }
        };
        let s = self.s.ok_or_else(|| space_at.error("space needs a coefficient `s`".into()))?;
        let potential_at = self.spans.key("section.potential");
        let potential = match (self.potential_linear, self.potential_table.is_empty()) {
            (Some(c), true) => PotentialBlock::Linear(c),
            (None, false) => PotentialBlock::Table(self.potential_table),
            (None, true) => return Err(potential_at.error("potential needs `linear` or `value` lines".into())),
            (Some(_), false) => {
                return Err(potential_at.error("potential takes either `linear` or `value` lines, not both".into()))
            }
        };
        let zeta_at = self.spans.key("section.zeta");
        let family = match self.family.as_deref() {
            Some("linear") => ZetaFamily::Linear {
                lambda: self.lambda.ok_or_else(|| zeta_at.error("linear family needs `lambda`".into()))?,
            },
            Some("scaled") => ZetaFamily::Scaled {
                lambda: self.lambda.ok_or_else(|| zeta_at.error("scaled family needs `lambda`".into()))?,
                mu: self.mu.ok_or_else(|| zeta_at.error("scaled family needs `mu`".into()))?,
            },
            Some(_) => ZetaFamily::CustomTable(self.zeta_entries),
            None => return Err(zeta_at.error("zeta needs a `family`".into())),
        };
        let file = ProblemFile {
            space: SpaceBlock {
                points,
                metric,
                s,
                complete: self.complete.unwrap_or(true),
                sampling: self.sampling,
            },
            relation: self.relation,
            map: self.map,
            potential,
            zeta: ZetaBlock {
                family,
                grid: self.grid,
            },
            solver: self.solver,
            probes: self.probes,
        };
        Ok((file, self.spans))
    }
}

fn parse_range(value: &Value<'_>) -> Result<PointsSpec> {
    let (bounds, step) = value
        .text
        .split_once("step")
        .ok_or_else(|| value.err("expected `<start> .. <end> step <h>`"))?;
    let (start, end) = bounds
        .split_once("..")
        .ok_or_else(|| value.err("expected `<start> .. <end> step <h>`"))?;
    Ok(PointsSpec::Range {
        start: parse_number(start, value.at)?,
        end: parse_number(end, value.at)?,
        step: parse_number(step, value.at)?,
    })
}

fn parse_pair_list(value: &Value<'_>) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut rest = value.text.trim();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .ok_or_else(|| value.err("expected `(a, b)` pairs"))?;
        let close = inner.find(')').ok_or_else(|| value.err("unterminated pair"))?;
        let nums = Value {
            text: &inner[..close],
            at: value.at,
        }
        .numbers()?;
        let [a, b] = nums[..] else {
            return Err(value.err("expected two coordinates in a pair"));
        };
        out.push((a, b));
        rest = inner[close + 1..].trim_start();
    }
    Ok(out)
}

fn parse_interval(text: &str, at: Anchor) -> Result<(Bound, Bound)> {
    let text = text.trim();
    let lo_closed = match text.chars().next() {
        Some('[') => true,
        Some('(') => false,
        _ => return Err(at.error("interval must start with `[` or `(`".into())),
    };
    let hi_closed = match text.chars().last() {
        Some(']') => true,
        Some(')') => false,
        _ => return Err(at.error("interval must end with `]` or `)`".into())),
    };
    let (lo, hi) = text[1..text.len() - 1]
        .split_once(',')
        .ok_or_else(|| at.error("interval needs two comma-separated bounds".into()))?;
    Ok((
        Bound {
            value: parse_number(lo, at)?,
            closed: lo_closed,
        },
        Bound {
            value: parse_number(hi, at)?,
            closed: hi_closed,
        },
    ))
}

/// Shortest decimal that parses back to the same value.
pub fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for ProblemFile {
    /// Canonical serialization; parsing it yields an equal `ProblemFile`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let sp = &self.space;
        out.push_str("[space]\n");
        match &sp.points {
            PointsSpec::List(v) => writeln!(out, "points = {}", join(v))?,
            PointsSpec::Range { start, end, step } => writeln!(
                out,
                "range = {} .. {} step {}",
                fmt_num(*start),
                fmt_num(*end),
                fmt_num(*step)
            )?,
        }
        match &sp.metric {
            MetricSpec::SquaredDifference => out.push_str("metric = squared-difference\n"),
            MetricSpec::AbsoluteDifference => out.push_str("metric = absolute-difference\n"),
            MetricSpec::Table(rows) => {
                out.push_str("metric = table\n");
                for row in rows {
                    writeln!(out, "row = {}", join(row))?;
                }
            }
        }
        writeln!(out, "s = {}", fmt_num(sp.s))?;
        writeln!(out, "complete = {}", sp.complete)?;
        match sp.sampling {
            Some(Sampling::Carrier) => out.push_str("sampling = carrier\n"),
            Some(Sampling::GridSample) => out.push_str("sampling = grid\n"),
            None => {}
        }

        out.push_str("\n[relation]\n");
        for (a, b) in &self.relation.pairs {
            writeln!(out, "pair = {} {}", fmt_num(*a), fmt_num(*b))?;
        }
        for order in &self.relation.orders {
            let name = match order {
                Order::Ge => "ge",
                Order::Le => "le",
            };
            writeln!(out, "order = {name}")?;
        }
        for closure in &self.relation.closures {
            let name = match closure {
                Closure::Symmetric => "symmetric",
                Closure::Transitive => "transitive",
            };
            writeln!(out, "closure = {name}")?;
        }

        out.push_str("\n[map]\n");
        for entry in &self.map.entries {
            match entry {
                MapEntry::At { from, to } => writeln!(out, "at = {} -> {}", fmt_num(*from), fmt_num(*to))?,
                MapEntry::Piece { lo, hi, to } => writeln!(
                    out,
                    "piece = {}{}, {}{} -> {}",
                    if lo.closed { '[' } else { '(' },
                    fmt_num(lo.value),
                    fmt_num(hi.value),
                    if hi.closed { ']' } else { ')' },
                    fmt_num(*to)
                )?,
            }
        }
        writeln!(out, "r_continuous = {}", self.map.r_continuous)?;

        out.push_str("\n[potential]\n");
        match &self.potential {
            PotentialBlock::Linear(c) => writeln!(out, "linear = {}", fmt_num(*c))?,
            PotentialBlock::Table(entries) => {
                for (x, v) in entries {
                    writeln!(out, "value = {} -> {}", fmt_num(*x), fmt_num(*v))?;
                }
            }
        }

        out.push_str("\n[zeta]\n");
        match &self.zeta.family {
            ZetaFamily::Linear { lambda } => {
                writeln!(out, "family = linear\nlambda = {}", fmt_num(*lambda))?;
            }
            ZetaFamily::Scaled { lambda, mu } => {
                writeln!(out, "family = scaled\nlambda = {}\nmu = {}", fmt_num(*lambda), fmt_num(*mu))?;
            }
            ZetaFamily::CustomTable(entries) => {
                out.push_str("family = custom-table\n");
                for e in entries {
                    writeln!(out, "entry = {} {} -> {}", fmt_num(e.t), fmt_num(e.s), fmt_num(e.value))?;
                }
            }
        }
        if let Some(grid) = &self.zeta.grid {
            writeln!(out, "grid = {}", join(grid))?;
        }

        let solver = &self.solver;
        if solver.start.is_some() || solver.tol.is_some() || solver.max_iter.is_some() {
            out.push_str("\n[solver]\n");
            if let Some(v) = solver.start {
                writeln!(out, "start = {}", fmt_num(v))?;
            }
            if let Some(v) = solver.tol {
                writeln!(out, "tol = {}", fmt_num(v))?;
            }
            if let Some(v) = solver.max_iter {
                writeln!(out, "max_iter = {v}")?;
            }
        }
        if !self.probes.is_empty() {
            out.push_str("\n[probe]\n");
            for (a, b) in &self.probes {
                writeln!(out, "pair = {} {}", fmt_num(*a), fmt_num(*b))?;
            }
        }
        f.write_str(&out)
    }
}
