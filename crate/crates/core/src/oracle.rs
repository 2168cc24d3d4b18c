//! Brute-force ground truth and audits of the solver machinery.
//!
//! Everything here is exhaustive or re-derived from solver logs, and is meant
//! for small instances: biset enumeration is `3^n`, exact optima enumerate
//! subsets of the positive-weight vertices.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::biset::{minimal_members, overlap_count, uncross_witness_family, Biset, LaminarForest};
use crate::bitset::{EdgeSet, VertexSet};
use crate::cover::{rational, CoverResult};
use crate::error::{Certificate, Error, Result};
use crate::flow::{connectivity_capped, flows_run, min_cut_below, CutMode};
use crate::graph::{preprocess, Instance, Kind, NodeWeightedGraph};
use crate::sndp::{ec_view, first_deficit, h_ell_value, PhaseState, SolveReport};

/// Largest universe `enumerate_bisets` accepts.
pub const ENUMERATION_LIMIT: usize = 12;
/// Largest number of positive-weight vertices `exact_opt_bruteforce` accepts.
pub const EXACT_LIMIT: usize = 20;

/// One named pass/fail result. Failures carry a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub instance: String,
    pub pass: bool,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<Check>,
    pub bisets_enumerated: u64,
    pub flows_run: u64,
    /// Observations that are not pass/fail, such as a re-minimalized set.
    pub notes: Vec<String>,
}

impl AuditReport {
    pub fn record(&mut self, name: &str, instance: &str, pass: bool, witness: impl FnOnce() -> String) {
        self.checks.push(Check {
            name: name.to_string(),
            instance: instance.to_string(),
            pass,
            witness: (!pass).then(witness),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Failures among checks whose name is one of `names`.
    pub fn failures_named<'a>(&'a self, names: &'a [&str]) -> impl Iterator<Item = &'a Check> + 'a {
        self.failures().filter(move |c| names.contains(&c.name.as_str()))
    }

    pub fn count_named(&self, name: &str) -> usize {
        self.checks.iter().filter(|c| c.name == name).count()
    }

    pub fn merge(&mut self, other: AuditReport) {
        self.checks.extend(other.checks);
        self.bisets_enumerated += other.bisets_enumerated;
        self.flows_run += other.flows_run;
        self.notes.extend(other.notes);
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&serde_json::to_string(c).expect("check serializes"));
            out.push('\n');
        }
        out
    }
}

/// Every biset over `universe` (each vertex inside, on the boundary or
/// outside), optionally restricted to bisets with a non-reliable boundary.
///
/// Refuses universes of more than `ENUMERATION_LIMIT` vertices. With the
/// restriction, reliable vertices have only two states, so the refusal is on
/// the number of bisets produced: at most `3^ENUMERATION_LIMIT`.
pub fn enumerate_bisets<'a>(
    universe: &VertexSet,
    restrict_p_elem: bool,
    g: &'a NodeWeightedGraph,
) -> Result<impl Iterator<Item = Biset> + 'a> {
    let elems = universe.to_vec();
    let cap = 3u64.pow(ENUMERATION_LIMIT as u32);
    if restrict_p_elem {
        let reliable = elems.iter().filter(|&&v| g.is_reliable(v)).count() as u32;
        let count = 2u128.pow(reliable) * 3u128.pow(elems.len() as u32 - reliable);
        if count > u128::from(cap) {
            return Err(Error::TooLarge {
                what: "restricted biset enumeration",
                size: usize::try_from(count).unwrap_or(usize::MAX),
                limit: cap as usize,
            });
        }
    } else if elems.len() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "biset universe",
            size: elems.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    // states per vertex: 0 outside, 1 inside, 2 boundary
    let radix: Vec<u64> = elems
        .iter()
        .map(|&v| if restrict_p_elem && g.is_reliable(v) { 2 } else { 3 })
        .collect();
    let total: u64 = radix.iter().product();
    Ok((0..total).map(move |mut code| {
        let (mut inner, mut outer) = (VertexSet::new(), VertexSet::new());
        for (&v, &r) in elems.iter().zip(&radix) {
            match code % r {
                1 => {
                    inner.insert(v);
                    outer.insert(v);
                }
                2 => {
                    outer.insert(v);
                }
                _ => {}
            }
            code /= r;
        }
        Biset::new(inner, outer).expect("inner part is contained in outer part")
    }))
}

/// Minimal violated bisets of phase `state.ell` for the vertex set `p`, by
/// enumerating every biset with a non-reliable boundary.
pub fn minimal_violated_bruteforce(state: &PhaseState, inst: &Instance, p: &VertexSet) -> Result<Vec<Biset>> {
    let g = &inst.graph;
    let phase_p = state.phase_edges.intersection(&g.induced_edges(p));
    let mut violated = Vec::new();
    for b in enumerate_bisets(&g.vertices(), true, g)? {
        if h_ell_value(state, inst, &b)? == 1 && g.delta_count(&phase_p, &b) == 0 {
            violated.push(b);
        }
    }
    Ok(minimal_members(violated))
}

fn feasibility_view(inst: &Instance) -> Result<(Instance, CutMode)> {
    match inst.kind {
        Kind::Ec => Ok((ec_view(inst)?, CutMode::Element)),
        Kind::Elem => Ok((inst.clone(), CutMode::Element)),
        Kind::Vc012 => Ok((inst.clone(), CutMode::Vertex)),
    }
}

/// `None` when every demand pair meets its requirement in `E[X]`; otherwise
/// the first deficient pair with its minimum cut.
pub fn check_feasibility(inst: &Instance, x: &VertexSet) -> Result<Option<Certificate>> {
    let (view, mode) = feasibility_view(inst)?;
    first_deficit(&view, x, mode, |r| r)
}

fn is_feasible(inst: &Instance, mode: CutMode, x: &VertexSet) -> Result<bool> {
    let g = &inst.graph;
    let edges = g.induced_edges(x);
    for (&(s, t), &r) in inst.demands() {
        if connectivity_capped(&edges, g, s, t, mode, r)? < r {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimum-weight feasible vertex set by branch and bound over the
/// positive-weight vertices. Returns `(w(X ∖ T), X)` in input ids.
pub fn exact_opt_bruteforce(inst: &Instance) -> Result<(u64, VertexSet)> {
    let (view, mode) = feasibility_view(inst)?;
    let (pre, _) = preprocess(&view)?;
    let g = &pre.graph;
    if let Some(cert) = first_deficit(&pre, &g.vertices(), mode, |r| r)? {
        return Err(Error::Infeasible(Box::new(cert)));
    }
    let free: VertexSet = (0..g.n()).filter(|&v| g.weight(v) == 0).collect();
    let candidates: Vec<usize> = (0..g.n()).filter(|&v| g.weight(v) > 0).collect();
    if candidates.len() > EXACT_LIMIT {
        return Err(Error::TooLarge {
            what: "positive-weight vertex set",
            size: candidates.len(),
            limit: EXACT_LIMIT,
        });
    }

    struct Search<'a> {
        pre: &'a Instance,
        mode: CutMode,
        candidates: &'a [usize],
        best: Option<(u64, VertexSet)>,
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, chosen: VertexSet, cost: u64) -> Result<()> {
            if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
                return Ok(());
            }
            if is_feasible(self.pre, self.mode, &chosen)? {
                self.best = Some((cost, chosen));
                return Ok(());
            }
            if i == self.candidates.len() {
                return Ok(());
            }
            let optimistic = chosen.union(&self.candidates[i..].iter().copied().collect());
            if !is_feasible(self.pre, self.mode, &optimistic)? {
                return Ok(());
            }
            let v = self.candidates[i];
            let mut with = chosen.clone();
            with.insert(v);
            self.go(i + 1, with, cost + self.pre.graph.weight(v))?;
            self.go(i + 1, chosen, cost)
        }
    }

    let mut search = Search {
        pre: &pre,
        mode,
        candidates: &candidates,
        best: None,
    };
    search.go(0, free, 0)?;
    let (_, chosen) = search.best.ok_or_else(|| Error::InternalInvariant("feasible graph without a feasible subset".into()))?;
    let n = inst.graph.n();
    let solution: VertexSet = chosen.iter().filter(|&v| v < n).collect();
    Ok((inst.solution_weight(&solution), solution))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Bisubmodular,
    Bimaximal,
    Biuncrossable,
    SkewBisupermodular,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Bisubmodular => "bisubmodular",
            Property::Bimaximal => "bimaximal",
            Property::Biuncrossable => "biuncrossable",
            Property::SkewBisupermodular => "skew_bisupermodular",
        }
    }
}

/// Tests the defining inequalities of `property` on every pair of `domain`.
/// The domain must be closed under biset intersection, union and difference
/// for the values of combined bisets to be meaningful; values outside it are
/// computed on demand.
pub fn check_function_property(
    property: Property,
    f: &dyn Fn(&Biset) -> i64,
    domain: &[Biset],
    instance: &str,
) -> AuditReport {
    let mut cache: HashMap<Biset, i64> = domain.iter().map(|b| (b.clone(), f(b))).collect();
    let mut value = |b: Biset| *cache.entry(b).or_insert_with_key(|b| f(b));
    let mut failure = None;
    'outer: for (i, s) in domain.iter().enumerate() {
        for t in &domain[i..] {
            let (fs, ft) = (value(s.clone()), value(t.clone()));
            let ok = match property {
                Property::Bimaximal => {
                    !s.inner().is_disjoint(t.inner()) || value(s.union(t)) <= fs.max(ft)
                }
                _ => {
                    let meet = value(s.intersect(t)) + value(s.union(t));
                    let diff = value(s.subtract(t)) + value(t.subtract(s));
                    match property {
                        Property::Bisubmodular => fs + ft >= meet && fs + ft >= diff,
                        Property::SkewBisupermodular => meet >= fs + ft || diff >= fs + ft,
                        Property::Biuncrossable => fs <= 0 || ft <= 0 || meet >= fs + ft || diff >= fs + ft,
                        Property::Bimaximal => unreachable!(),
                    }
                }
            };
            if !ok {
                failure = Some(format!(
                    "S={s} T={t} f(S)={fs} f(T)={ft} f(S∩T)={} f(S∪T)={} f(S∖T)={} f(T∖S)={}",
                    value(s.intersect(t)),
                    value(s.union(t)),
                    value(s.subtract(t)),
                    value(t.subtract(s))
                ));
                break 'outer;
            }
        }
    }
    let mut report = AuditReport {
        bisets_enumerated: domain.len() as u64,
        ..AuditReport::default()
    };
    let pass = failure.is_none();
    report.record(property.as_str(), instance, pass, || failure.unwrap_or_default());
    report
}

/// Requirement test for one phase: pairs with `r ≥ ℓ` that `E[X]` alone
/// leaves below `ℓ`, checked against extra edges or vertices.
struct PhaseCoverage<'a> {
    g: &'a NodeWeightedGraph,
    ell: u32,
    base: EdgeSet,
    deficient: Vec<(usize, usize)>,
}

impl<'a> PhaseCoverage<'a> {
    fn new(inst: &'a Instance, ell: u32, x: &VertexSet) -> Result<Self> {
        let g = &inst.graph;
        let base = g.induced_edges(x);
        let mut deficient = Vec::new();
        for (&(s, t), &r) in inst.demands() {
            if r >= ell && connectivity_capped(&base, g, s, t, CutMode::Element, ell)? < ell {
                deficient.push((s, t));
            }
        }
        Ok(Self {
            g,
            ell,
            base,
            deficient,
        })
    }

    fn covered_by_edges(&self, extra: &EdgeSet) -> Result<bool> {
        let edges = self.base.union(extra);
        for &(s, t) in &self.deficient {
            if connectivity_capped(&edges, self.g, s, t, CutMode::Element, self.ell)? < self.ell {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn covered_by_vertices(&self, y: &VertexSet) -> Result<bool> {
        self.covered_by_edges(&self.g.induced_edges(y))
    }

    /// A biset crossed by `e` alone among `cover` that still needs covering.
    fn witness(&self, cover: &EdgeSet, e: usize) -> Result<Option<Biset>> {
        let mut rest = cover.clone();
        rest.remove(e);
        let edges = self.base.union(&rest);
        for &(s, t) in &self.deficient {
            if let Some(cut) = min_cut_below(&edges, self.g, s, t, CutMode::Element, self.ell)? {
                return Ok(Some(cut.biset));
            }
        }
        Ok(None)
    }
}

/// Drops vertices of `q` in ascending id order while `X ∪ Q` stays feasible
/// for phase `ℓ`. Returns the reduced set and whether anything was removed.
pub fn node_minimal_subset(inst: &Instance, ell: u32, x: &VertexSet, q: &VertexSet) -> Result<(VertexSet, bool)> {
    let cov = PhaseCoverage::new(inst, ell, x)?;
    let mut kept = q.clone();
    let mut changed = false;
    for v in q.iter() {
        kept.remove(v);
        if cov.covered_by_vertices(&x.union(&kept))? {
            changed = true;
        } else {
            kept.insert(v);
        }
    }
    Ok((kept, changed))
}

fn edge_name(g: &NodeWeightedGraph, e: usize) -> String {
    let (u, v) = g.edge(e);
    format!("{u}-{v}")
}

/// Checks the structure of one uncrossed witness family and its tree.
struct TreeAudit<'a> {
    g: &'a NodeWeightedGraph,
    family: &'a [Biset],
    label: &'a str,
    prefix: &'static str,
}

impl TreeAudit<'_> {
    fn run(
        &self,
        report: &mut AuditReport,
        cover: &EdgeSet,
        witnesses: &BTreeMap<usize, Biset>,
        h: &dyn Fn(&Biset) -> bool,
    ) -> Option<LaminarForest> {
        let (g, label, p) = (self.g, self.label, self.prefix);
        let bad: Vec<String> = witnesses
            .iter()
            .filter(|(&e, s)| {
                let crossing = g.delta(cover, s);
                !(h(s) && crossing.len() == 1 && crossing.contains(e))
            })
            .map(|(&e, s)| format!("{s} for {}", edge_name(g, e)))
            .collect();
        report.record(&format!("{p}_witness_valid"), label, bad.is_empty(), || bad.join("; "));

        let overlaps = overlap_count(witnesses.values());
        let forest = LaminarForest::build_labeled(witnesses.iter().map(|(&e, s)| (s.clone(), Some(e))), g.n());
        report.record(&format!("{p}_laminar"), label, overlaps == 0 && forest.is_ok(), || {
            format!("{overlaps} overlapping pairs: {:?}", forest.as_ref().err())
        });
        let forest = forest.ok()?;

        let multi: Vec<usize> = (0..g.n()).filter(|&u| forest.owner_candidates(u).len() != 1).collect();
        report.record(&format!("{p}_owner_unique"), label, multi.is_empty(), || {
            format!("vertices with several owners: {multi:?}")
        });

        let split: Vec<String> = self
            .family
            .iter()
            .filter(|c| {
                let owners: VertexSet = c.inner().iter().map(|u| forest.owner(u)).collect();
                owners.len() > 1
            })
            .map(|c| c.to_string())
            .collect();
        report.record(&format!("{p}_minimal_owned_whole"), label, split.is_empty(), || split.join("; "));

        let owned: VertexSet = self
            .family
            .iter()
            .filter_map(|c| c.inner().min().map(|u| forest.owner(u)))
            .collect();
        let orphan: Vec<String> = (0..forest.len())
            .filter(|&node| node != LaminarForest::ROOT && forest.is_leaf(node) && !owned.contains(node))
            .map(|node| forest.biset(node).to_string())
            .collect();
        report.record(&format!("{p}_leaf_owns_minimal"), label, orphan.is_empty(), || orphan.join("; "));

        let mut misplaced = Vec::new();
        for node in 1..forest.len() {
            let Some(e) = forest.edge_of(node) else { continue };
            let (u, v) = g.edge(e);
            let (ou, ov) = (forest.owner(u), forest.owner(v));
            let below = |a: usize, b: usize| forest.biset(a).strict_subset_of(forest.biset(b));
            let ok = (node == ou && below(ou, ov)) || (node == ov && below(ov, ou));
            if !ok {
                misplaced.push(format!("{} witnessed by {}", edge_name(g, e), forest.biset(node)));
            }
        }
        report.record(&format!("{p}_witness_owns_endpoint"), label, misplaced.is_empty(), || {
            misplaced.join("; ")
        });
        Some(forest)
    }
}

/// Audits the counting argument for one primal-dual iteration.
///
/// `x` is the vertex set the family `family` was computed for, `q ⊆ V ∖ X`
/// a node-minimal completion to a feasible phase-`ℓ` cover. Verifies the
/// critical-vertex bound, the planar charging bound, and rebuilds the
/// blue-pruned cover `F`, the edge-minimal cover `F' ⊆ F`, their laminar
/// witness families and trees, with every structural property the counting
/// relies on.
pub fn audit_counting(
    inst: &Instance,
    state: &PhaseState,
    x: &VertexSet,
    q: &VertexSet,
    family: &[Biset],
    label: &str,
) -> Result<AuditReport> {
    let flows_at_start = flows_run();
    let g = &inst.graph;
    let ell = state.ell;
    let mut report = AuditReport::default();
    if !q.is_disjoint(x) {
        return Err(Error::Precondition(format!("completion {q:?} meets the base set")));
    }
    let cov = PhaseCoverage::new(inst, ell, x)?;
    let q_all = x.union(q);
    if !cov.covered_by_vertices(&q_all)? {
        return Err(Error::Precondition(format!("{q:?} does not complete a feasible cover")));
    }
    for v in q.iter() {
        let mut less = q_all.clone();
        less.remove(v);
        if cov.covered_by_vertices(&less)? {
            return Err(Error::Precondition(format!("vertex {v} of {q:?} is redundant")));
        }
    }

    let c = family.len();
    let gammas: Vec<VertexSet> = family.iter().map(|b| g.gamma(&state.phase_edges, b)).collect();
    let critical: VertexSet = gammas.iter().fold(VertexSet::new(), |acc, gm| acc.union(&gm.intersection(q)));
    report.record("critical_bound", label, critical.len() <= 4 * c, || {
        format!("{} critical vertices {critical:?} for {c} minimal bisets", critical.len())
    });
    if inst.planar {
        let charge: usize = gammas.iter().map(|gm| gm.intersection_len(q)).sum();
        report.record("planar_charging_bound", label, charge <= 10 * c, || {
            format!("charge {charge} for {c} minimal bisets")
        });
    }

    // K: phase edges outside E[X]; F starts from the part of K inside X ∪ Q
    let k_edges = state.phase_edges.difference(&g.induced_edges(x));
    let start = g.induced_edges(&q_all).difference(&cov.base);
    if !start.is_subset(&k_edges) {
        return Err(Error::InternalInvariant(format!(
            "edges {:?} added by Q lie outside the phase graph",
            start.difference(&k_edges)
        )));
    }
    let red: EdgeSet = family.iter().fold(EdgeSet::new(), |acc, b| acc.union(&g.delta(&k_edges, b)));

    let mut f = start.clone();
    for e in start.iter().filter(|e| !red.contains(*e)) {
        f.remove(e);
        if !cov.covered_by_edges(&f)? {
            f.insert(e);
        }
    }
    let mut f_red = f.clone();
    for e in f.iter().filter(|e| red.contains(*e)) {
        f_red.remove(e);
        if !cov.covered_by_edges(&f_red)? {
            f_red.insert(e);
        }
    }

    let touches = |v: usize, edges: &EdgeSet, red_side: bool| {
        edges.iter().any(|e| {
            let (a, b) = g.edge(e);
            (a == v || b == v) && red.contains(e) == red_side
        })
    };
    let regular: VertexSet = critical.iter().filter(|&v| touches(v, &f, false)).collect();
    let special = critical.difference(&regular);
    report.record("regular_bound", label, regular.len() <= 2 * c, || {
        format!("{} regular vertices {regular:?} for {c} minimal bisets", regular.len())
    });
    report.record("special_bound", label, special.len() <= 2 * c, || {
        format!("{} special vertices {special:?} for {c} minimal bisets", special.len())
    });
    let stranded: Vec<usize> = special.iter().filter(|&v| !touches(v, &f_red, true)).collect();
    report.record("special_has_red_edge", label, stranded.is_empty(), || {
        format!("special vertices without a red cover edge: {stranded:?}")
    });

    let h_x = state.phase_edges.intersection(&cov.base);
    let h_prime = |b: &Biset| h_ell_value(state, inst, b).is_ok_and(|v| v == 1) && g.delta_count(&h_x, b) == 0;

    let mut families = Vec::new();
    for (prefix, cover, members) in [
        ("blue", &f, f.difference(&red)),
        ("red", &f_red, f_red.intersection(&red)),
    ] {
        let mut initial = BTreeMap::new();
        let mut missing = Vec::new();
        for e in members.iter() {
            match cov.witness(cover, e)? {
                Some(s) => {
                    initial.insert(e, s);
                }
                None => missing.push(edge_name(g, e)),
            }
        }
        report.record(&format!("{prefix}_edges_necessary"), label, missing.is_empty(), || {
            format!("redundant cover edges {missing:?}")
        });
        let uncrossed = uncross_witness_family(g, cover, initial, &h_prime);
        report.record(&format!("{prefix}_uncrossing"), label, uncrossed.is_ok(), || {
            uncrossed.as_ref().err().map(|e| e.to_string()).unwrap_or_default()
        });
        let Ok(witnesses) = uncrossed else { continue };
        let audit = TreeAudit {
            g,
            family,
            label,
            prefix,
        };
        let forest = audit.run(&mut report, cover, &witnesses, &h_prime);
        families.push((prefix, witnesses, forest));
    }

    if let Some((_, witnesses, Some(forest))) = families.iter().find(|(p, _, _)| *p == "red") {
        let boundary: VertexSet = witnesses.values().fold(VertexSet::new(), |acc, s| acc.union(&s.boundary()));
        let mut wrong = Vec::new();
        let mut owners = VertexSet::new();
        let mut crossing_total = 0;
        for cb in family {
            let Some(u) = cb.inner().min() else { continue };
            let node = forest.owner(u);
            owners.insert(node);
            let crossing = g.delta(&f_red, cb);
            crossing_total += crossing.len();
            for e in crossing.iter() {
                let (a, b) = g.edge(e);
                if boundary.contains(a) || boundary.contains(b) {
                    continue;
                }
                let Some(at) = witnesses.get(&e).and_then(|s| forest.node_of(s)) else {
                    wrong.push(format!("{} has no witness node", edge_name(g, e)));
                    continue;
                };
                if at != node && forest.parent(at) != Some(node) {
                    wrong.push(format!("{} maps away from the owner of {cb}", edge_name(g, e)));
                }
            }
        }
        report.record("tree_edge_correspondence", label, wrong.is_empty(), || wrong.join("; "));
        let degree_sum: usize = owners.iter().map(|node| forest.degree(node)).sum();
        let chain = crossing_total <= degree_sum && degree_sum <= 2 * owners.len() && owners.len() <= c;
        report.record("degree_chain", label, chain, || {
            format!(
                "crossing {crossing_total}, owner degrees {degree_sum}, owners {}, minimal bisets {c}",
                owners.len()
            )
        });
    }

    report.flows_run = flows_run() - flows_at_start;
    Ok(report)
}

/// Re-derives the dual solution of a cover run from its iteration log and
/// checks feasibility, slackness, the no-neighbor property, and, when
/// `ratio_bound` is set, `w(Q ∖ P₀) ≤ bound · Σ y` and the per-iteration
/// charging bound.
pub fn audit_cover(
    g: &NodeWeightedGraph,
    phase_edges: &EdgeSet,
    run: &CoverResult,
    ratio_bound: Option<u64>,
    label: &str,
) -> AuditReport {
    let mut report = AuditReport::default();
    let mut y: BTreeMap<Biset, BigRational> = BTreeMap::new();
    let mut residual: Vec<BigRational> = g.weights().iter().map(|&w| rational(w)).collect();
    let mut negative = Vec::new();
    let mut neighbor = Vec::new();
    let mut not_tight = Vec::new();
    let mut shared = Vec::new();
    let mut charge_over = Vec::new();
    for it in &run.iterations {
        let q_i = run.q.difference(&it.before);
        let mut charge = 0;
        for (k, c) in it.family.iter().enumerate() {
            let gamma = g.gamma(phase_edges, c);
            if !gamma.is_disjoint(&it.before) {
                neighbor.push(format!("iteration {}: {c} touches {:?}", it.iter, gamma.intersection(&it.before)));
            }
            if it.family[..k].iter().any(|d| !d.inner().is_disjoint(c.inner())) {
                shared.push(format!("iteration {}: {c}", it.iter));
            }
            charge += gamma.intersection_len(&q_i);
            for v in gamma.iter() {
                residual[v] -= &it.epsilon;
            }
            *y.entry(c.clone()).or_insert_with(BigRational::zero) += &it.epsilon;
        }
        if charge > 10 * it.family.len() {
            charge_over.push(format!("iteration {}: charge {charge} for {}", it.iter, it.family.len()));
        }
        for (v, r) in residual.iter().enumerate() {
            if r.is_negative() {
                negative.push(format!("iteration {}: vertex {v} slack {r}", it.iter));
            }
        }
        if !residual[it.tight_vertex].is_zero() {
            not_tight.push(format!("iteration {}: vertex {} slack {}", it.iter, it.tight_vertex, residual[it.tight_vertex]));
        }
    }
    report.record("dual_feasible", label, negative.is_empty(), || negative.join("; "));
    report.record("no_neighbor", label, neighbor.is_empty(), || neighbor.join("; "));
    report.record("disjoint_inner_parts", label, shared.is_empty(), || shared.join("; "));
    report.record("tight_on_purchase", label, not_tight.is_empty(), || not_tight.join("; "));
    let slack: Vec<String> = run
        .q
        .difference(&run.p0)
        .iter()
        .filter(|&v| !residual[v].is_zero())
        .map(|v| format!("vertex {v} slack {}", residual[v]))
        .collect();
    report.record("complementary_slackness", label, slack.is_empty(), || slack.join("; "));
    report.record("dual_matches_log", label, y == run.dual.y && residual == run.dual.residual, || {
        "reported duals differ from the values re-derived from the log".to_string()
    });
    let nested = run.p0.is_subset(&run.q) && run.q.is_subset(&run.p);
    report.record("nested_sets", label, nested, || {
        format!("P0={:?} Q={:?} P={:?}", run.p0, run.q, run.p)
    });
    if let Some(bound) = ratio_bound {
        let cost = rational(run.cost(g));
        let dual: BigRational = y.values().fold(BigRational::zero(), |a, b| a + b);
        let ok = cost <= rational(bound) * &dual;
        report.record("dual_ratio", label, ok, || format!("cost {cost} > {bound} × dual {dual}"));
        report.record("charging_bound", label, charge_over.is_empty(), || charge_over.join("; "));
    }
    report
}

/// The instance a solve report's phases refer to.
pub fn solver_instance(inst: &Instance, kind: Kind) -> Result<Instance> {
    let view = if kind == Kind::Ec { ec_view(inst)? } else { inst.clone() };
    Ok(preprocess(&view)?.0)
}

/// Audits a full solve: final feasibility, every cover run, the end-of-phase
/// invariant, and (for element and edge connectivity, when `counting` is set)
/// the counting argument at every iteration.
pub fn audit_solve(inst: &Instance, report: &SolveReport, counting: bool) -> Result<AuditReport> {
    let flows_at_start = flows_run();
    let pre = solver_instance(inst, report.kind)?;
    let g = &pre.graph;
    let mut audit = AuditReport::default();
    let cert = check_feasibility(&pre, &report.internal_solution)?;
    audit.record("feasible", "solution", cert.is_none(), || cert.map(|c| c.to_string()).unwrap_or_default());
    let cert = check_feasibility(inst, &report.solution)?;
    audit.record("feasible_input_ids", "solution", cert.is_none(), || {
        cert.map(|c| c.to_string()).unwrap_or_default()
    });

    for phase in &report.phases {
        let label = format!("phase {}", phase.ell);
        let bounded = pre.planar && (report.kind != Kind::Vc012 || phase.ell == 2);
        audit.merge(audit_cover(g, &phase.phase_edges, &phase.cover, bounded.then_some(10), &label));
        if report.kind == Kind::Vc012 {
            continue;
        }
        let x = phase.x_before.union(&phase.cover.q);
        let cert = first_deficit(&pre, &x, CutMode::Element, |r| r.min(phase.ell))?;
        audit.record("phase_invariant", &label, cert.is_none(), || cert.map(|c| c.to_string()).unwrap_or_default());
        if !counting {
            continue;
        }
        let state = PhaseState::new(g, phase.ell, phase.x_before.clone());
        for it in &phase.cover.iterations {
            let it_label = format!("phase {} iteration {}", phase.ell, it.iter);
            let q = phase.cover.q.difference(&it.before);
            let (q_min, changed) = node_minimal_subset(&pre, phase.ell, &it.before, &q)?;
            audit.record("node_minimal", &it_label, !changed, || {
                format!("{q:?} reduces to {q_min:?}")
            });
            if changed {
                audit.notes.push(format!("{it_label}: completion re-minimalized to {q_min:?}"));
            }
            audit.merge(audit_counting(&pre, &state, &it.before, &q_min, &it.family, &it_label)?);
        }
    }
    audit.flows_run = flows_run() - flows_at_start;
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(
        weights: Vec<u64>,
        reliable: &[usize],
        edges: &[(usize, usize)],
        demands: &[(usize, usize, u32)],
        kind: Kind,
    ) -> Instance {
        let flags = (0..weights.len()).map(|v| reliable.contains(&v)).collect();
        let g = NodeWeightedGraph::new(weights, flags, edges.to_vec()).unwrap();
        Instance::new(g, demands.iter().copied(), kind).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let g = NodeWeightedGraph::new(vec![0; 2], vec![false; 2], vec![]).unwrap();
        let one = VertexSet::singleton(0);
        let all: Vec<Biset> = enumerate_bisets(&one, false, &g).unwrap().collect();
        assert_eq!(all.len(), 3);
        assert!(all.contains(&Biset::from_ids(&[], &[0]).unwrap()));
        assert_eq!(enumerate_bisets(&g.vertices(), false, &g).unwrap().count(), 9);
        let r = NodeWeightedGraph::new(vec![0; 4], vec![true; 4], vec![]).unwrap();
        let only_sets: Vec<Biset> = enumerate_bisets(&r.vertices(), true, &r).unwrap().collect();
        assert_eq!(only_sets.len(), 16);
        assert!(only_sets.iter().all(|b| b.boundary_len() == 0));
    }

    #[test]
    fn enumeration_refuses_large_universe() {
        let g = NodeWeightedGraph::new(vec![0; 13], vec![true; 13], vec![]).unwrap();
        assert!(matches!(
            enumerate_bisets(&g.vertices(), false, &g).map(|_| ()),
            Err(Error::TooLarge { size: 13, .. })
        ));
    }

    #[test]
    fn exact_on_square() {
        let inst = instance(vec![0, 1, 0, 1], &[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3), (0, 3)], &[(0, 2, 2)], Kind::Ec);
        let (w, x) = exact_opt_bruteforce(&inst).unwrap();
        assert_eq!(w, 2);
        assert_eq!(x.to_vec(), vec![0, 1, 2, 3]);
        let relaxed = instance(vec![0, 1, 0, 1], &[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3), (0, 3)], &[(0, 2, 1)], Kind::Ec);
        assert_eq!(exact_opt_bruteforce(&relaxed).unwrap().0, 1);
    }

    #[test]
    fn exact_on_adjacent_terminals() {
        let inst = instance(vec![5, 5], &[0, 1], &[(0, 1)], &[(0, 1, 1)], Kind::Elem);
        assert_eq!(exact_opt_bruteforce(&inst).unwrap().0, 0);
    }

    #[test]
    fn feasibility_certificate() {
        let inst = instance(vec![0, 3, 0], &[0, 2], &[(0, 1), (1, 2)], &[(0, 2, 1)], Kind::Elem);
        let cert = check_feasibility(&inst, &inst.terminals()).unwrap().unwrap();
        assert_eq!(cert.cut, Biset::from_ids(&[0], &[0]).unwrap());
        assert!(check_feasibility(&inst, &inst.graph.vertices()).unwrap().is_none());
    }

    #[test]
    fn negative_control_bimaximal() {
        // 1 only on the union of two disjoint singletons
        let union = Biset::from_ids(&[0, 1], &[0, 1]).unwrap();
        let f = |b: &Biset| i64::from(*b == union);
        let domain = vec![Biset::from_ids(&[0], &[0]).unwrap(), Biset::from_ids(&[1], &[1]).unwrap(), union.clone()];
        let rep = check_function_property(Property::Bimaximal, &f, &domain, "control");
        assert!(!rep.passed());
        assert!(rep.checks[0].witness.as_ref().unwrap().contains("S=([0],[0]) T=([1],[1])"));
    }

    #[test]
    fn boundary_size_is_bisubmodular() {
        let g = NodeWeightedGraph::new(vec![0; 4], vec![false; 4], vec![]).unwrap();
        let domain: Vec<Biset> = enumerate_bisets(&g.vertices(), false, &g).unwrap().collect();
        let f = |b: &Biset| b.boundary_len() as i64;
        assert!(check_function_property(Property::Bisubmodular, &f, &domain, "bd").passed());
    }

    #[test]
    fn empty_family_counting_is_vacuous() {
        let inst = instance(vec![0, 1, 0], &[0, 1, 2], &[(0, 1), (1, 2)], &[(0, 2, 1)], Kind::Ec);
        let state = PhaseState::new(&inst.graph, 1, inst.terminals());
        let x = inst.graph.vertices();
        let rep = audit_counting(&inst, &state, &x, &VertexSet::new(), &[], "empty").unwrap();
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }
}
