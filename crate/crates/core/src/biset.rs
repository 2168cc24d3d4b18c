//! Biset algebra, laminar forests and witness-family uncrossing.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitset::{EdgeSet, VertexSet};
use crate::error::{Error, Result};
use crate::graph::NodeWeightedGraph;

/// A pair of nested vertex sets `(S, S')` with `S ⊆ S'`.
///
/// The boundary `S' ∖ S` is always derived. Ordering is lexicographic on
/// `(inner, outer)` as sorted id lists, which gives families a canonical order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Biset {
    inner: VertexSet,
    outer: VertexSet,
}

impl Biset {
    pub fn new(inner: VertexSet, outer: VertexSet) -> Result<Self> {
        if !inner.is_subset(&outer) {
            return Err(Error::Domain(format!(
                "inner {inner:?} is not contained in outer {outer:?}"
            )));
        }
        Ok(Self { inner, outer })
    }

    /// `(S, S)`, a biset with empty boundary.
    pub fn set(s: VertexSet) -> Self {
        Self {
            outer: s.clone(),
            inner: s,
        }
    }

    pub fn from_ids(inner: &[usize], outer: &[usize]) -> Result<Self> {
        Self::new(inner.iter().copied().collect(), outer.iter().copied().collect())
    }

    /// `(V, V)` over `n` vertices.
    pub fn universe(n: usize) -> Self {
        Self::set(VertexSet::full(n))
    }

    pub fn inner(&self) -> &VertexSet {
        &self.inner
    }

    pub fn outer(&self) -> &VertexSet {
        &self.outer
    }

    pub fn boundary(&self) -> VertexSet {
        self.outer.difference(&self.inner)
    }

    pub fn boundary_len(&self) -> usize {
        self.outer.len() - self.inner.len()
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.intersection(&other.inner),
            outer: self.outer.intersection(&other.outer),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.union(&other.inner),
            outer: self.outer.union(&other.outer),
        }
    }

    /// `Ŝ ∖ T̂ = (S ∖ T', S' ∖ T)`.
    pub fn subtract(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.difference(&other.outer),
            outer: self.outer.difference(&other.inner),
        }
    }

    pub fn subset_of(&self, other: &Self) -> bool {
        self.inner.is_subset(&other.inner) && self.outer.is_subset(&other.outer)
    }

    pub fn strict_subset_of(&self, other: &Self) -> bool {
        self != other && self.subset_of(other)
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        !(self.subset_of(other)
            || other.subset_of(self)
            || (self.outer.is_disjoint(&other.inner) && self.inner.is_disjoint(&other.outer)))
    }

    /// True iff the boundary holds no reliable vertex.
    pub fn in_p_elem(&self, g: &NodeWeightedGraph) -> bool {
        self.boundary().iter().all(|v| !g.is_reliable(v))
    }

    /// True iff `u ∈ S` and `v ∉ S'` (or the reverse).
    pub fn separates(&self, u: usize, v: usize) -> bool {
        (self.inner.contains(u) && !self.outer.contains(v))
            || (self.inner.contains(v) && !self.outer.contains(u))
    }
}

impl fmt::Display for Biset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{:?})", self.inner, self.outer)
    }
}

impl fmt::Debug for Biset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Biset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl std::str::FromStr for Biset {
    type Err = Error;

    /// Parses the `([inner],[outer])` form produced by `Display`.
    fn from_str(text: &str) -> Result<Self, Error> {
        let bad = || Error::Schema(format!("malformed biset {text:?}"));
        let body = text.trim().strip_prefix("([").and_then(|t| t.strip_suffix("])")).ok_or_else(bad)?;
        let (inner, outer) = body.split_once("],[").ok_or_else(bad)?;
        let ids = |part: &str| -> Result<VertexSet, Error> {
            part.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        Biset::new(ids(inner)?, ids(outer)?)
    }
}

impl<'de> Deserialize<'de> for Biset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Keeps only the ⊆-minimal members of a family, sorted and deduplicated.
pub fn minimal_members(family: impl IntoIterator<Item = Biset>) -> Vec<Biset> {
    let mut all: Vec<Biset> = family.into_iter().collect();
    all.sort();
    all.dedup();
    let keep: Vec<bool> = all
        .iter()
        .map(|s| !all.iter().any(|t| t.strict_subset_of(s)))
        .collect();
    all.into_iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then_some(s))
        .collect()
}

/// Number of overlapping pairs in a family.
pub fn overlap_count<'a>(family: impl IntoIterator<Item = &'a Biset>) -> usize {
    let items: Vec<&Biset> = family.into_iter().collect();
    let mut count = 0;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if items[i].overlaps(items[j]) {
                count += 1;
            }
        }
    }
    count
}

/// Tree of a non-overlapping biset family plus the synthetic root `(V, V)`.
///
/// Node 0 is the root. Each other node's parent is the ⊆-minimal family
/// member (or the root) strictly containing it.
#[derive(Debug, Clone)]
pub struct LaminarForest {
    nodes: Vec<Biset>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    edge_of: Vec<Option<usize>>,
}

impl LaminarForest {
    pub const ROOT: usize = 0;

    pub fn build(family: impl IntoIterator<Item = Biset>, n: usize) -> Result<Self> {
        Self::build_labeled(family.into_iter().map(|b| (b, None)), n)
    }

    /// Builds from `(biset, cover edge)` pairs, as for a witness family.
    pub fn build_labeled(
        family: impl IntoIterator<Item = (Biset, Option<usize>)>,
        n: usize,
    ) -> Result<Self> {
        let root = Biset::universe(n);
        let mut members: Vec<(Biset, Option<usize>)> =
            family.into_iter().filter(|(b, _)| *b != root).collect();
        members.sort();
        members.dedup_by(|a, b| a.0 == b.0);
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if members[i].0.overlaps(&members[j].0) {
                    return Err(Error::Overlapping(Box::new(members[i].0.clone()), Box::new(members[j].0.clone())));
                }
            }
        }
        let mut nodes = vec![root];
        let mut edge_of = vec![None];
        for (b, e) in members {
            nodes.push(b);
            edge_of.push(e);
        }
        let mut parent = vec![None; nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for i in 1..nodes.len() {
            // strict supersets of a laminar member form a chain
            let mut best = Self::ROOT;
            for j in 1..nodes.len() {
                if nodes[i].strict_subset_of(&nodes[j]) && nodes[j].subset_of(&nodes[best]) {
                    best = j;
                }
            }
            parent[i] = Some(best);
            children[best].push(i);
        }
        Ok(Self {
            nodes,
            parent,
            children,
            edge_of,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn biset(&self, node: usize) -> &Biset {
        &self.nodes[node]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn edge_of(&self, node: usize) -> Option<usize> {
        self.edge_of[node]
    }

    pub fn node_of(&self, b: &Biset) -> Option<usize> {
        self.nodes.iter().position(|x| x == b)
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    /// Degree of a node in the tree (children plus parent link).
    pub fn degree(&self, node: usize) -> usize {
        self.children[node].len() + usize::from(self.parent[node].is_some())
    }

    pub fn depth(&self, node: usize) -> usize {
        let mut d = 0;
        let mut cur = node;
        while let Some(p) = self.parent[cur] {
            d += 1;
            cur = p;
        }
        d
    }

    pub fn is_ancestor(&self, ancestor: usize, mut node: usize) -> bool {
        loop {
            if node == ancestor {
                return true;
            }
            match self.parent[node] {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    /// The node owning `u`: the minimal biset whose inner part contains `u`.
    pub fn owner(&self, u: usize) -> usize {
        let mut best = Self::ROOT;
        for (i, b) in self.nodes.iter().enumerate().skip(1) {
            if b.inner().contains(u) && b.subset_of(&self.nodes[best]) {
                best = i;
            }
        }
        best
    }

    /// All nodes containing `u` in their inner part that are ⊆-minimal among
    /// such nodes. A laminar family always yields exactly one.
    pub fn owner_candidates(&self, u: usize) -> Vec<usize> {
        let holding: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].inner().contains(u))
            .collect();
        holding
            .iter()
            .copied()
            .filter(|&i| {
                !holding
                    .iter()
                    .any(|&j| self.nodes[j].strict_subset_of(&self.nodes[i]))
            })
            .collect()
    }
}

/// True iff `s` is an `f`-witness of edge `e`: `h(Ŝ)` holds and `e` is the
/// only `f` edge crossing `Ŝ`.
pub fn is_witness(
    g: &NodeWeightedGraph,
    f: &EdgeSet,
    h: &dyn Fn(&Biset) -> bool,
    s: &Biset,
    e: usize,
) -> bool {
    let crossing = g.delta(f, s);
    crossing.len() == 1 && crossing.contains(e) && h(s)
}

/// Replaces overlapping witness pairs by `(∩, ∪)` or `(∖, ∖)` until the
/// family is laminar. Each replacement must re-validate both witnesses and
/// strictly lower the overlap count.
pub fn uncross_witness_family(
    g: &NodeWeightedGraph,
    f: &EdgeSet,
    witnesses: BTreeMap<usize, Biset>,
    h: &dyn Fn(&Biset) -> bool,
) -> Result<BTreeMap<usize, Biset>> {
    for (&e, s) in &witnesses {
        if !f.contains(e) {
            return Err(Error::Precondition(format!("edge {e} is not in the cover")));
        }
        if !is_witness(g, f, h, s, e) {
            return Err(Error::Precondition(format!("{s} is not a witness for edge {e}")));
        }
    }
    let mut family = witnesses;
    loop {
        let keys: Vec<usize> = family.keys().copied().collect();
        let pair = keys.iter().enumerate().find_map(|(i, &a)| {
            keys[i + 1..]
                .iter()
                .find(|&&b| family[&a].overlaps(&family[&b]))
                .map(|&b| (a, b))
        });
        let Some((e1, e2)) = pair else {
            return Ok(family);
        };
        let before = overlap_count(family.values());
        let (s1, s2) = (family[&e1].clone(), family[&e2].clone());
        let branches = [
            (s1.intersect(&s2), s1.union(&s2)),
            (s1.subtract(&s2), s2.subtract(&s1)),
        ];
        let mut progressed = false;
        for (a, b) in branches {
            for (ea, eb) in [(e1, e2), (e2, e1)] {
                if !(is_witness(g, f, h, &a, ea) && is_witness(g, f, h, &b, eb)) {
                    continue;
                }
                let mut next = family.clone();
                next.insert(ea, a.clone());
                next.insert(eb, b.clone());
                if overlap_count(next.values()) < before {
                    family = next;
                    progressed = true;
                    break;
                }
            }
            if progressed {
                break;
            }
        }
        if !progressed {
            return Err(Error::InternalInvariant(format!(
                "cannot uncross witnesses {s1} (edge {e1}) and {s2} (edge {e2})"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(inner: &[usize], outer: &[usize]) -> Biset {
        Biset::from_ids(inner, outer).unwrap()
    }

    #[test]
    fn set_operations() {
        assert_eq!(b(&[1], &[1, 2]).intersect(&b(&[2], &[2, 3])), b(&[], &[2]));
        let s = b(&[1], &[1, 2]);
        assert_eq!(s.subtract(&s), b(&[], &[2]));
        assert_eq!(s.subtract(&s).outer(), &s.boundary());
        assert_eq!(b(&[1], &[1]).union(&b(&[3], &[3, 4])), b(&[1, 3], &[1, 3, 4]));
    }

    #[test]
    fn construction_checks_nesting() {
        assert!(Biset::from_ids(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn subset_examples() {
        assert!(b(&[], &[]).subset_of(&b(&[1], &[1, 2])));
        assert!(!b(&[1], &[1, 2]).subset_of(&b(&[1], &[1])));
    }

    #[test]
    fn overlap_examples() {
        assert!(!b(&[1], &[1]).overlaps(&b(&[2], &[2])));
        assert!(b(&[1, 2], &[1, 2]).overlaps(&b(&[2, 3], &[2, 3])));
        assert!(!b(&[1], &[1, 2]).overlaps(&b(&[1, 2], &[1, 2, 3])));
    }

    #[test]
    fn p_elem_membership() {
        let g = NodeWeightedGraph::new(vec![0; 3], vec![true, false, true], vec![]).unwrap();
        assert!(b(&[0], &[0]).in_p_elem(&g));
        assert!(b(&[0], &[0, 1]).in_p_elem(&g));
        assert!(!b(&[0], &[0, 2]).in_p_elem(&g));
    }

    #[test]
    fn display_format() {
        assert_eq!(b(&[1], &[1, 2]).to_string(), "([1],[1,2])");
        assert_eq!(b(&[], &[]).to_string(), "([],[])");
    }

    #[test]
    fn parse_round_trip() {
        for x in [b(&[1], &[1, 2]), b(&[], &[]), b(&[], &[0, 3])] {
            assert_eq!(x.to_string().parse::<Biset>().unwrap(), x);
        }
        assert!("([2],[1])".parse::<Biset>().is_err());
        assert!("[1],[1]".parse::<Biset>().is_err());
    }

    #[test]
    fn forest_shapes() {
        let empty = LaminarForest::build(Vec::new(), 4).unwrap();
        assert_eq!(empty.len(), 1);
        assert!(empty.is_leaf(LaminarForest::ROOT));

        let chain = LaminarForest::build(
            vec![b(&[0], &[0]), b(&[0], &[0, 1]), b(&[0, 1], &[0, 1, 2])],
            4,
        )
        .unwrap();
        let deepest = chain.node_of(&b(&[0], &[0])).unwrap();
        assert_eq!(chain.depth(deepest), 3);

        let flat = LaminarForest::build(vec![b(&[0], &[0]), b(&[2], &[2, 3])], 4).unwrap();
        assert_eq!(flat.children(LaminarForest::ROOT).len(), 2);
        assert_eq!(flat.degree(LaminarForest::ROOT), 2);
    }

    #[test]
    fn forest_rejects_overlap() {
        let err = LaminarForest::build(vec![b(&[0, 1], &[0, 1]), b(&[1, 2], &[1, 2])], 3);
        assert!(matches!(err, Err(Error::Overlapping(_, _))));
    }

    #[test]
    fn owner_examples() {
        let forest = LaminarForest::build(vec![b(&[0], &[0, 1]), b(&[0, 1], &[0, 1])], 4).unwrap();
        assert_eq!(forest.owner(3), LaminarForest::ROOT);
        assert_eq!(forest.biset(forest.owner(0)), &b(&[0], &[0, 1]));
        assert_eq!(forest.biset(forest.owner(1)), &b(&[0, 1], &[0, 1]));
        assert_eq!(forest.owner_candidates(0).len(), 1);
    }

    #[test]
    fn minimal_members_filters_supersets() {
        let fam = vec![b(&[0], &[0, 1]), b(&[0], &[0]), b(&[2], &[2]), b(&[0], &[0])];
        assert_eq!(minimal_members(fam), vec![b(&[0], &[0]), b(&[2], &[2])]);
    }

    // 4-cycle 0-1-2-3-0, demand r(0,2) = 2, phase 2 after buying the path
    // 0-1-2. h is the phase-2 residual function on empty-boundary bisets and
    // F = {23, 30} covers it.
    fn c4_phase_two() -> (NodeWeightedGraph, EdgeSet, EdgeSet) {
        let g = NodeWeightedGraph::new(vec![0; 4], vec![true; 4], vec![(0, 1), (1, 2), (2, 3), (0, 3)])
            .unwrap();
        let h1: EdgeSet = [g.edge_id(0, 1).unwrap(), g.edge_id(1, 2).unwrap()].into_iter().collect();
        let f: EdgeSet = [g.edge_id(2, 3).unwrap(), g.edge_id(0, 3).unwrap()].into_iter().collect();
        (g, h1, f)
    }

    #[test]
    fn uncross_singleton_and_laminar_inputs_unchanged() {
        let (g, h1, f) = c4_phase_two();
        let h = |s: &Biset| s.boundary_len() == 0 && s.separates(0, 2) && g.delta_count(&h1, s) == 1;
        let e30 = g.edge_id(0, 3).unwrap();
        let e23 = g.edge_id(2, 3).unwrap();
        let single: BTreeMap<_, _> = [(e30, b(&[0], &[0]))].into_iter().collect();
        assert_eq!(uncross_witness_family(&g, &f, single.clone(), &h).unwrap(), single);
        let laminar: BTreeMap<_, _> =
            [(e30, b(&[0], &[0])), (e23, b(&[0, 1, 3], &[0, 1, 3]))].into_iter().collect();
        assert_eq!(overlap_count(laminar.values()), 0);
        assert_eq!(uncross_witness_family(&g, &f, laminar.clone(), &h).unwrap(), laminar);
    }

    #[test]
    fn uncross_overlapping_pair_on_c4() {
        let (g, h1, f) = c4_phase_two();
        let h = |s: &Biset| s.boundary_len() == 0 && s.separates(0, 2) && g.delta_count(&h1, s) == 1;
        let e30 = g.edge_id(0, 3).unwrap();
        let e23 = g.edge_id(2, 3).unwrap();
        let input: BTreeMap<_, _> =
            [(e30, b(&[0, 1], &[0, 1])), (e23, b(&[0, 3], &[0, 3]))].into_iter().collect();
        assert!(input[&e30].overlaps(&input[&e23]));
        let out = uncross_witness_family(&g, &f, input, &h).unwrap();
        assert_eq!(overlap_count(out.values()), 0);
        for (&e, s) in &out {
            // witness property by direct count
            let crossing: Vec<usize> = f
                .iter()
                .filter(|&id| {
                    let (u, v) = g.edge(id);
                    s.separates(u, v)
                })
                .collect();
            assert_eq!(crossing, vec![e], "witness {s} for edge {e}");
            assert!(h(s));
        }
        assert_eq!(out[&e30], b(&[0], &[0]));
        assert_eq!(out[&e23], b(&[0, 1, 3], &[0, 1, 3]));
    }

    #[test]
    fn uncross_rejects_bad_witness() {
        let (g, h1, f) = c4_phase_two();
        let h = |s: &Biset| s.boundary_len() == 0 && s.separates(0, 2) && g.delta_count(&h1, s) == 1;
        let e23 = g.edge_id(2, 3).unwrap();
        let bad: BTreeMap<_, _> = [(e23, b(&[0], &[0]))].into_iter().collect();
        assert!(matches!(
            uncross_witness_family(&g, &f, bad, &h),
            Err(Error::Precondition(_))
        ));
    }
}
