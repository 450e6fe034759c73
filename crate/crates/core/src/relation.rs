//! Finite binary relations over a space's points and the relational
//! hypotheses checked on them.

use std::collections::VecDeque;

use serde::{Serialize, Serializer};

use crate::contraction::SelfMap;
use crate::error::{Error, Result};
use crate::par::{self, Strategy};
use crate::space::{BMetricSpace, PointId, Sampling};

/// A relation on `0..universe`, stored as a dense adjacency matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRelation {
    universe: usize,
    bits: Vec<bool>,
}

impl Serialize for BinaryRelation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.pairs())
    }
}

impl BinaryRelation {
    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            bits: vec![false; universe * universe],
        }
    }

    pub fn full(universe: usize) -> Self {
        Self {
            universe,
            bits: vec![true; universe * universe],
        }
    }

    pub fn from_pairs<I>(universe: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PointId, PointId)>,
    {
        let mut relation = Self::empty(universe);
        for (a, b) in pairs {
            relation.insert(a, b)?;
        }
        Ok(relation)
    }

    /// Build from a predicate over every ordered pair.
    pub fn from_fn(universe: usize, f: impl Fn(PointId, PointId) -> bool) -> Self {
        let mut relation = Self::empty(universe);
        for a in 0..universe {
            for b in 0..universe {
                relation.bits[a * universe + b] = f(PointId(a), PointId(b));
            }
        }
        relation
    }

    /// Insert a pair; returns whether it was new.
    pub fn insert(&mut self, a: PointId, b: PointId) -> Result<bool> {
        for p in [a, b] {
            if p.0 >= self.universe {
                return Err(Error::InvalidRelation(format!(
                    "pair endpoint {p} outside a universe of {} points",
                    self.universe
                )));
            }
        }
        let slot = &mut self.bits[a.0 * self.universe + b.0];
        let fresh = !*slot;
        *slot = true;
        Ok(fresh)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// `true` iff `(a, b)` is in the relation. Out-of-range ids are unrelated.
    #[inline]
    pub fn related(&self, a: PointId, b: PointId) -> bool {
        a.0 < self.universe && b.0 < self.universe && self.bits[a.0 * self.universe + b.0]
    }

    /// Related in at least one direction.
    pub fn related_either(&self, a: PointId, b: PointId) -> bool {
        self.related(a, b) || self.related(b, a)
    }

    /// Pairs in lexicographic id order.
    pub fn pairs(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        let n = self.universe;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (PointId(i / n), PointId(i % n)))
    }

    pub fn successors(&self, a: PointId) -> impl Iterator<Item = PointId> + '_ {
        let n = self.universe;
        let row = &self.bits[a.0 * n..(a.0 + 1) * n];
        row.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| PointId(i))
    }

    /// `R ∪ R⁻¹`.
    pub fn symmetric_closure(&self) -> Self {
        let n = self.universe;
        let mut out = self.clone();
        for a in 0..n {
            for b in 0..n {
                if self.bits[a * n + b] {
                    out.bits[b * n + a] = true;
                }
            }
        }
        out
    }

    /// Smallest transitive superset (Warshall).
    pub fn transitive_closure(&self) -> Self {
        let n = self.universe;
        let mut out = self.clone();
        for k in 0..n {
            for i in 0..n {
                if out.bits[i * n + k] {
                    for j in 0..n {
                        if out.bits[k * n + j] {
                            out.bits[i * n + j] = true;
                        }
                    }
                }
            }
        }
        out
    }

    /// Smallest superset that is closed under `map` and transitive.
    pub fn closure_under(&self, map: &SelfMap) -> Self {
        let mut current = self.transitive_closure();
        loop {
            let mut next = current.clone();
            for (a, b) in current.pairs() {
                // endpoints are in range by construction
                let _ = next.insert(map.apply(a), map.apply(b));
            }
            let next = next.transitive_closure();
            if next == current {
                return current;
            }
            current = next;
        }
    }
}

/// Outcome of a relational property check. A failing check always carries
/// at least one witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check<W> {
    pub holds: bool,
    pub witnesses: Vec<W>,
}

impl<W> Check<W> {
    fn from_witnesses(witnesses: Vec<W>) -> Self {
        Self {
            holds: witnesses.is_empty(),
            witnesses,
        }
    }
}

pub type PairCheck = Check<(PointId, PointId)>;
pub type TripleCheck = Check<(PointId, PointId, PointId)>;

pub fn is_transitive(relation: &BinaryRelation) -> TripleCheck {
    is_transitive_with(relation, Strategy::default())
}

/// Witnesses are triples `(a, b, c)` with `(a, b), (b, c)` related but
/// `(a, c)` not.
pub fn is_transitive_with(relation: &BinaryRelation, strategy: Strategy) -> TripleCheck {
    let n = relation.universe;
    let witnesses = par::flat_map_range(strategy, n, |a| {
        let a = PointId(a);
        let mut out = Vec::new();
        for b in relation.successors(a) {
            for c in relation.successors(b) {
                if !relation.related(a, c) {
                    out.push((a, b, c));
                }
            }
        }
        out
    });
    Check::from_witnesses(witnesses)
}

/// Completeness over distinct points: every unordered pair `{a, b}`,
/// `a != b`, is related in some direction. Reflexive pairs are not required.
pub fn is_complete(relation: &BinaryRelation) -> PairCheck {
    let n = relation.universe;
    let mut witnesses = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !relation.related_either(PointId(a), PointId(b)) {
                witnesses.push((PointId(a), PointId(b)));
            }
        }
    }
    Check::from_witnesses(witnesses)
}

/// Witnesses are related pairs whose image pair is unrelated.
pub fn is_f_closed(relation: &BinaryRelation, map: &SelfMap) -> PairCheck {
    let witnesses = relation
        .pairs()
        .filter(|&(a, b)| !relation.related(map.apply(a), map.apply(b)))
        .collect();
    Check::from_witnesses(witnesses)
}

/// Every pair drawn from `subset` (including a point with itself) has a
/// common successor somewhere in the universe.
pub fn is_r_directed(subset: &[PointId], relation: &BinaryRelation) -> PairCheck {
    let mut points = subset.to_vec();
    points.sort();
    points.dedup();
    let n = relation.universe;
    let mut witnesses = Vec::new();
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i..] {
            let joined = (0..n)
                .map(PointId)
                .any(|eta| relation.related(a, eta) && relation.related(b, eta));
            if !joined {
                witnesses.push((a, b));
            }
        }
    }
    Check::from_witnesses(witnesses)
}

/// A path of length `k >= 1` in the relation: `nodes[0] = source`,
/// `nodes[k] = target`, consecutive nodes related.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Path {
    pub nodes: Vec<PointId>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn source(&self) -> PointId {
        self.nodes[0]
    }

    pub fn target(&self) -> PointId {
        *self.nodes.last().expect("paths have at least two nodes")
    }
}

/// Shortest path of length between 1 and `max_len`, lexicographically
/// smallest by node id among the shortest ones.
pub fn find_path(
    relation: &BinaryRelation,
    source: PointId,
    target: PointId,
    max_len: usize,
) -> Option<Path> {
    let n = relation.universe;
    if source.0 >= n || target.0 >= n || max_len == 0 {
        return None;
    }
    // Reverse BFS: hops from each node to the target.
    let mut hops = vec![usize::MAX; n];
    hops[target.0] = 0;
    let mut queue = VecDeque::from([target.0]);
    while let Some(v) = queue.pop_front() {
        for u in 0..n {
            if relation.bits[u * n + v] && hops[u] == usize::MAX {
                hops[u] = hops[v] + 1;
                queue.push_back(u);
            }
        }
    }
    // Length is at least one even when source == target.
    let first = relation
        .successors(source)
        .filter(|v| hops[v.0] != usize::MAX)
        .min_by_key(|v| (hops[v.0], v.0))?;
    let total = hops[first.0] + 1;
    if total > max_len {
        return None;
    }
    let mut nodes = vec![source, first];
    let mut current = first;
    while hops[current.0] > 0 {
        let step = relation
            .successors(current)
            .find(|v| hops[v.0] != usize::MAX && hops[v.0] + 1 == hops[current.0])
            .expect("BFS layers are connected");
        nodes.push(step);
        current = step;
    }
    Some(Path { nodes })
}

/// Decision for the self-closedness property of convergent relation-
/// preserving sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SelfClosedness {
    Holds { justification: String },
    NotApplicable { reason: String },
}

impl SelfClosedness {
    pub fn holds(&self) -> bool {
        matches!(self, SelfClosedness::Holds { .. })
    }
}

/// Decided only for carriers with a positive gap between distinct points.
/// There every convergent sequence is eventually constant at its limit `x`,
/// the preserved tail pairs are `(x, x)`, and the tail itself is a
/// subsequence related to `x` in both directions.
pub fn check_bd_self_closed(space: &BMetricSpace, _relation: &BinaryRelation) -> SelfClosedness {
    if space.sampling() == Sampling::GridSample {
        return SelfClosedness::NotApplicable {
            reason: "points are a grid sample of a continuum; convergent sequences need not be \
                     eventually constant, declare continuity of the map instead"
                .into(),
        };
    }
    let gap = space.min_nonzero_distance();
    let justification = match gap {
        None => "single-point carrier: every sequence is constant".to_string(),
        Some(g) => format!(
            "eventually-constant tails: distinct points are at least {g:e} apart, so a convergent \
             sequence equals its limit x from some index on; preservation puts (x, x) in the \
             relation, which covers both directions of the bracket condition"
        ),
    };
    SelfClosedness::Holds { justification }
}

pub fn is_reflexive(relation: &BinaryRelation) -> Check<PointId> {
    let witnesses = (0..relation.universe)
        .map(PointId)
        .filter(|&a| !relation.related(a, a))
        .collect();
    Check::from_witnesses(witnesses)
}

pub fn is_irreflexive(relation: &BinaryRelation) -> Check<PointId> {
    let witnesses = (0..relation.universe)
        .map(PointId)
        .filter(|&a| relation.related(a, a))
        .collect();
    Check::from_witnesses(witnesses)
}

pub fn is_symmetric(relation: &BinaryRelation) -> PairCheck {
    let witnesses = relation.pairs().filter(|&(a, b)| !relation.related(b, a)).collect();
    Check::from_witnesses(witnesses)
}

pub fn is_antisymmetric(relation: &BinaryRelation) -> PairCheck {
    let witnesses = relation
        .pairs()
        .filter(|&(a, b)| a < b && relation.related(b, a))
        .collect();
    Check::from_witnesses(witnesses)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub pair_count: usize,
    pub transitive: TripleCheck,
    /// Checked over distinct points only.
    pub complete: PairCheck,
    pub f_closed: PairCheck,
    pub bd_self_closed: SelfClosedness,
    pub reflexive: Check<PointId>,
    pub irreflexive: Check<PointId>,
    pub symmetric: PairCheck,
    pub antisymmetric: PairCheck,
}

pub fn relation_report(space: &BMetricSpace, relation: &BinaryRelation, map: &SelfMap) -> RelationReport {
    RelationReport {
        pair_count: relation.len(),
        transitive: is_transitive(relation),
        complete: is_complete(relation),
        f_closed: is_f_closed(relation, map),
        bd_self_closed: check_bd_self_closed(space, relation),
        reflexive: is_reflexive(relation),
        irreflexive: is_irreflexive(relation),
        symmetric: is_symmetric(relation),
        antisymmetric: is_antisymmetric(relation),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use crate::space::Metric;
    use crate::par::Strategy;
    use proptest::prelude::*;
    use proptest::strategy::Strategy as _;

    fn p(i: usize) -> PointId {
        PointId(i)
    }

    // Points 1, 2, 3, 4 sit at ids 0..4.
    fn step_relation() -> BinaryRelation {
        samples::step_relation()
    }

    fn step_map() -> SelfMap {
        samples::step_map()
    }

    fn rel(n: usize, pairs: &[(usize, usize)]) -> BinaryRelation {
        BinaryRelation::from_pairs(n, pairs.iter().map(|&(a, b)| (p(a), p(b)))).unwrap()
    }

    #[test]
    fn related_examples() {
        let r = step_relation();
        assert_eq!(r.len(), 12);
        assert!(r.related(p(0), p(3)));
        assert!(!r.related(p(3), p(0)));
        assert!(!BinaryRelation::empty(4).related(p(1), p(2)));
        assert!(!r.related(p(0), p(9)));
    }

    #[test]
    fn insert_rejects_foreign_points() {
        let mut r = BinaryRelation::empty(2);
        assert!(r.insert(p(0), p(2)).is_err());
        assert!(r.insert(p(0), p(1)).unwrap());
        assert!(!r.insert(p(0), p(1)).unwrap());
    }

    #[test]
    fn symmetric_closure_examples() {
        assert_eq!(rel(3, &[(1, 2)]).symmetric_closure(), rel(3, &[(1, 2), (2, 1)]));
        let sym = rel(3, &[(0, 1), (1, 0), (2, 2)]);
        assert_eq!(sym.symmetric_closure(), sym);
        let mut expected = step_relation();
        for a in 0..3 {
            expected.insert(p(3), p(a)).unwrap();
        }
        assert_eq!(step_relation().symmetric_closure(), expected);
        assert_eq!(expected.len(), 15);
    }

    #[test]
    fn transitivity_examples() {
        assert!(is_transitive(&step_relation()).holds);
        let chain = rel(4, &[(1, 2), (2, 3)]);
        let check = is_transitive(&chain);
        assert!(!check.holds);
        assert_eq!(check.witnesses, vec![(p(1), p(2), p(3))]);
        assert_eq!(chain.transitive_closure(), rel(4, &[(1, 2), (2, 3), (1, 3)]));
        assert_eq!(step_relation().transitive_closure(), step_relation());
        assert_eq!(BinaryRelation::empty(3).transitive_closure(), BinaryRelation::empty(3));
    }

    #[test]
    fn completeness_examples() {
        // all six distinct pairs of {1,2,3,4} appear in some direction
        assert!(is_complete(&step_relation()).holds);
        assert!(is_complete(&BinaryRelation::full(4)).holds);
        let check = is_complete(&BinaryRelation::empty(2));
        assert!(!check.holds);
        assert_eq!(check.witnesses, vec![(p(0), p(1))]);
    }

    #[test]
    fn f_closed_examples() {
        assert!(is_f_closed(&step_relation(), &step_map()).holds);
        assert!(is_f_closed(&BinaryRelation::empty(4), &step_map()).holds);
        let check = is_f_closed(&rel(4, &[(2, 3)]), &step_map());
        assert!(!check.holds);
        assert_eq!(check.witnesses, vec![(p(2), p(3))]);
    }

    #[test]
    fn directedness_examples() {
        assert!(is_r_directed(&[p(0), p(1)], &step_relation()).holds);
        assert!(is_r_directed(&[p(2)], &rel(3, &[(2, 2)])).holds);
        assert!(!is_r_directed(&[p(0), p(1)], &BinaryRelation::empty(4)).holds);
        // 4 has no successor at all
        let check = is_r_directed(&[p(0), p(3)], &step_relation());
        assert_eq!(check.witnesses, vec![(p(0), p(3)), (p(3), p(3))]);
    }

    #[test]
    fn path_examples() {
        let r = step_relation();
        let path = find_path(&r, p(0), p(3), 4).unwrap();
        assert_eq!(path.nodes, vec![p(0), p(3)]);
        assert_eq!(path.len(), 1);
        assert_eq!(find_path(&r, p(3), p(0), 4), None);
        let looped = rel(2, &[(1, 1)]);
        assert_eq!(find_path(&looped, p(1), p(1), 2).unwrap().nodes, vec![p(1), p(1)]);
        assert_eq!(find_path(&rel(2, &[]), p(1), p(1), 2), None);
    }

    #[test]
    fn path_respects_max_len_and_tie_break() {
        let r = rel(5, &[(0, 3), (0, 2), (2, 4), (3, 4), (4, 1)]);
        let path = find_path(&r, p(0), p(1), 5).unwrap();
        assert_eq!(path.nodes, vec![p(0), p(2), p(4), p(1)]);
        assert_eq!(find_path(&r, p(0), p(1), 2), None);
    }

    #[test]
    fn self_closedness() {
        let space = samples::step_space();
        let verdict = check_bd_self_closed(&space, &step_relation());
        match verdict {
            SelfClosedness::Holds { justification } => {
                assert!(justification.starts_with("eventually-constant tails"))
            }
            other => panic!("unexpected {other:?}"),
        }
        let single = BMetricSpace::new(vec![0.0], Metric::AbsoluteDifference, 1.0).unwrap();
        assert!(check_bd_self_closed(&single, &BinaryRelation::empty(1)).holds());
        let grid = samples::step_space().with_sampling(Sampling::GridSample);
        assert!(!check_bd_self_closed(&grid, &step_relation()).holds());
    }

    #[test]
    fn order_diagnostics_on_step_relation() {
        let r = step_relation();
        let reflexive = is_reflexive(&r);
        assert!(!reflexive.holds);
        assert_eq!(reflexive.witnesses, vec![p(3)]);
        let irreflexive = is_irreflexive(&r);
        assert!(!irreflexive.holds);
        assert!(irreflexive.witnesses.contains(&p(0)));
        assert!(!is_symmetric(&r).holds);
        assert!(!is_antisymmetric(&r).holds);
    }

    fn arb_relation(n: usize) -> impl proptest::strategy::Strategy<Value = BinaryRelation> {
        proptest::collection::vec(any::<bool>(), n * n)
            .prop_map(move |bits| BinaryRelation::from_fn(n, |a, b| bits[a.0 * n + b.0]))
    }

    fn arb_relation_and_map() -> impl proptest::strategy::Strategy<Value = (BinaryRelation, SelfMap)> {
        (1usize..7).prop_flat_map(|n| {
            (
                arb_relation(n),
                proptest::collection::vec(0..n, n).prop_map(|image| {
                    SelfMap::from_indices(image).unwrap()
                }),
            )
        })
    }

    // Plain DFS reachability, independent of the BFS used by find_path.
    fn reachable(r: &BinaryRelation, a: PointId, b: PointId) -> bool {
        let mut seen = vec![false; r.universe()];
        let mut stack: Vec<PointId> = r.successors(a).collect();
        while let Some(v) = stack.pop() {
            if v == b {
                return true;
            }
            if !seen[v.0] {
                seen[v.0] = true;
                stack.extend(r.successors(v));
            }
        }
        false
    }

    proptest! {
        #[test]
        fn closure_is_idempotent_and_monotone(r in (1usize..8).prop_flat_map(arb_relation)) {
            let c = r.transitive_closure();
            prop_assert_eq!(c.transitive_closure(), c.clone());
            prop_assert!(is_transitive(&c).holds);
            for (a, b) in r.pairs() {
                prop_assert!(c.related(a, b));
            }
        }

        #[test]
        fn symmetric_closure_preserves_f_closedness((r, f) in arb_relation_and_map()) {
            let closed = r.closure_under(&f);
            prop_assert!(is_f_closed(&closed, &f).holds);
            prop_assert!(is_f_closed(&closed.symmetric_closure(), &f).holds);
            if is_f_closed(&r, &f).holds {
                prop_assert!(is_f_closed(&r.symmetric_closure(), &f).holds);
            }
        }

        #[test]
        fn paths_exist_iff_reachable(r in (1usize..8).prop_flat_map(arb_relation)) {
            let n = r.universe();
            for a in 0..n {
                for b in 0..n {
                    let found = find_path(&r, p(a), p(b), n);
                    prop_assert_eq!(found.is_some(), reachable(&r, p(a), p(b)));
                    if let Some(path) = found {
                        prop_assert_eq!(path.source(), p(a));
                        prop_assert_eq!(path.target(), p(b));
                        prop_assert!(!path.is_empty() && path.len() <= n);
                        for w in path.nodes.windows(2) {
                            prop_assert!(r.related(w[0], w[1]));
                        }
                        if is_transitive(&r).holds {
                            prop_assert!(r.related(p(a), p(b)));
                        }
                    }
                }
            }
        }

        #[test]
        fn failing_checks_carry_witnesses(r in (1usize..6).prop_flat_map(arb_relation)) {
            let t = is_transitive(&r);
            prop_assert_eq!(t.holds, t.witnesses.is_empty());
            prop_assert_eq!(is_transitive_with(&r, Strategy::Sequential), t);
            let c = is_complete(&r);
            prop_assert_eq!(c.holds, c.witnesses.is_empty());
        }
    }
}
