//! Problem-level solvers built on the cover engine.
//!
//! Element and edge connectivity use `k` augmentation phases; phase `ℓ`
//! raises every pair with `r ≥ ℓ` from `ℓ-1` to `ℓ` element-disjoint paths.
//! {0,1,2} vertex connectivity runs a Steiner-forest stage followed by one
//! 2-connectivity augmentation stage.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::biset::{minimal_members, Biset};
use crate::bitset::{EdgeSet, VertexSet};
use crate::cover::{cover, dual_lower_bound, de_rational, ser_rational, CoverResult, ViolatedBisets};
use crate::error::{Certificate, Error, Result};
use crate::flow::{connectivity_capped, min_cut_below, CutMode};
use crate::graph::{preprocess, Instance, Kind, NodeWeightedGraph};

/// The vertices bought before phase `ℓ` and the edge split it induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseState {
    pub ell: u32,
    /// `X_{ℓ-1}`.
    pub x: VertexSet,
    /// `E[X_{ℓ-1}]`.
    pub h_edges: EdgeSet,
    /// `E ∖ E[X_{ℓ-1}]`, the edges phase `ℓ` may buy.
    pub phase_edges: EdgeSet,
}

impl PhaseState {
    pub fn new(g: &NodeWeightedGraph, ell: u32, x: VertexSet) -> Self {
        let h_edges = g.induced_edges(&x);
        let phase_edges = g.all_edges().difference(&h_edges);
        Self {
            ell,
            x,
            h_edges,
            phase_edges,
        }
    }
}

/// Largest requirement of a pair with one end in `S` and the other outside `S'`.
pub fn r_elem(inst: &Instance, s: &Biset) -> u32 {
    inst.demands()
        .iter()
        .filter(|(&(u, v), _)| s.separates(u, v) || s.separates(v, u))
        .map(|(_, &r)| r)
        .max()
        .unwrap_or(0)
}

/// `min(ℓ, r_elem(Ŝ)) − |bd(Ŝ)|`.
pub fn f_ell(inst: &Instance, ell: u32, s: &Biset) -> i64 {
    i64::from(ell.min(r_elem(inst, s))) - s.boundary_len() as i64
}

/// The residual requirement of phase `ℓ`: 1 iff `r_elem(Ŝ) ≥ ℓ` and
/// `|bd(Ŝ)| + |δ_H(Ŝ)| = ℓ − 1`.
pub fn h_ell_value(state: &PhaseState, inst: &Instance, s: &Biset) -> Result<u8> {
    if !s.in_p_elem(&inst.graph) {
        return Err(Error::Domain(format!("{s} has a reliable boundary vertex")));
    }
    let hit = r_elem(inst, s) >= state.ell
        && s.boundary_len() + inst.graph.delta_count(&state.h_edges, s) == state.ell as usize - 1;
    Ok(u8::from(hit))
}

/// `r_v(Ŝ)` for vertex connectivity: largest demand separated by `Ŝ`.
pub fn r_vertex(inst: &Instance, s: &Biset) -> u32 {
    r_elem(inst, s)
}

/// Stage-two requirement: 1 iff `r_v(Ŝ) = 2` and `|δ_F(Ŝ)| + |bd(Ŝ)| = 1`.
pub fn vc_h_value(f1: &EdgeSet, inst: &Instance, s: &Biset) -> u8 {
    u8::from(r_vertex(inst, s) == 2 && inst.graph.delta_count(f1, s) + s.boundary_len() == 1)
}

fn inner_connected(g: &NodeWeightedGraph, c: &VertexSet) -> bool {
    let Some(start) = c.min() else {
        return true;
    };
    let mut seen = VertexSet::singleton(start);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(v, _) in g.neighbors(u) {
            if c.contains(v) && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == c.len()
}

/// Structural facts every minimal violated biset satisfies.
fn check_minimal_family(g: &NodeWeightedGraph, p: &VertexSet, family: &[Biset]) -> Result<()> {
    for c in family {
        if !c.boundary().is_subset(p) || !c.inner().is_subset(p) {
            return Err(Error::InternalInvariant(format!(
                "minimal violated biset {c} leaves the vertex set {p:?}"
            )));
        }
        if !inner_connected(g, c.inner()) {
            return Err(Error::InternalInvariant(format!(
                "minimal violated biset {c} has a disconnected inner part"
            )));
        }
    }
    Ok(())
}

/// Closest minimum cuts from both ends of every pair below `limit`, reduced
/// to the ⊆-minimal members.
fn closest_cut_family(
    g: &NodeWeightedGraph,
    edges: &EdgeSet,
    pairs: &[(usize, usize)],
    mode: CutMode,
    limit: u32,
) -> Result<Vec<Biset>> {
    let mut candidates = Vec::new();
    for &(s, t) in pairs {
        if let Some(cut) = min_cut_below(edges, g, s, t, mode, limit)? {
            candidates.push(cut.biset);
            let back = min_cut_below(edges, g, t, s, mode, limit)?
                .ok_or_else(|| Error::InternalInvariant(format!("asymmetric cut for ({s}, {t})")))?;
            candidates.push(back.biset);
        }
    }
    Ok(minimal_members(candidates))
}

fn pairs_at_least(inst: &Instance, ell: u32) -> Vec<(usize, usize)> {
    inst.demands()
        .iter()
        .filter(|(_, &r)| r >= ell)
        .map(|(&p, _)| p)
        .collect()
}

/// Minimal violated bisets of phase `ℓ` for the vertex set `p ⊇ X_{ℓ-1}`.
///
/// Connectivity is measured in `E[P]`, which contains `E[X_{ℓ-1}]`; since
/// that subgraph already gives every pair with `r ≥ ℓ` at least `ℓ - 1`
/// element-disjoint paths, the violated bisets are exactly the minimum cuts
/// of the pairs still below `ℓ`.
pub fn elem_violated_bisets(state: &PhaseState, inst: &Instance, p: &VertexSet) -> Result<Vec<Biset>> {
    ElemOracle::new(inst, state).violated(p)
}

pub struct ElemOracle<'a> {
    inst: &'a Instance,
    state: &'a PhaseState,
    pairs: Vec<(usize, usize)>,
}

impl<'a> ElemOracle<'a> {
    pub fn new(inst: &'a Instance, state: &'a PhaseState) -> Self {
        Self {
            inst,
            state,
            pairs: pairs_at_least(inst, state.ell),
        }
    }
}

impl ViolatedBisets for ElemOracle<'_> {
    fn violated(&self, p: &VertexSet) -> Result<Vec<Biset>> {
        let g = &self.inst.graph;
        let edges = g.induced_edges(&p.union(&self.state.x));
        let family = closest_cut_family(g, &edges, &self.pairs, CutMode::Element, self.state.ell)?;
        check_minimal_family(g, p, &family)?;
        Ok(family)
    }

    fn is_feasible(&self, p: &VertexSet) -> Result<bool> {
        let g = &self.inst.graph;
        let edges = g.induced_edges(&p.union(&self.state.x));
        for &(s, t) in &self.pairs {
            if connectivity_capped(&edges, g, s, t, CutMode::Element, self.state.ell)? < self.state.ell {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Components of `(V, E[P])` that separate a demand pair, as bisets `(C, C)`.
pub struct SteinerOracle<'a> {
    inst: &'a Instance,
}

impl<'a> SteinerOracle<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Self { inst }
    }

    fn components(&self, p: &VertexSet) -> Vec<usize> {
        let g = &self.inst.graph;
        let mut label = vec![usize::MAX; g.n()];
        for root in 0..g.n() {
            if label[root] != usize::MAX {
                continue;
            }
            label[root] = root;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                if !p.contains(u) {
                    continue;
                }
                for &(v, _) in g.neighbors(u) {
                    if p.contains(v) && label[v] == usize::MAX {
                        label[v] = root;
                        stack.push(v);
                    }
                }
            }
        }
        label
    }
}

impl ViolatedBisets for SteinerOracle<'_> {
    fn violated(&self, p: &VertexSet) -> Result<Vec<Biset>> {
        let label = self.components(p);
        let mut roots = VertexSet::new();
        for &(s, t) in self.inst.demands().keys() {
            if label[s] != label[t] {
                roots.insert(label[s]);
                roots.insert(label[t]);
            }
        }
        let mut family: Vec<Biset> = roots
            .iter()
            .map(|root| Biset::set((0..label.len()).filter(|&v| label[v] == root).collect()))
            .collect();
        family.sort();
        check_minimal_family(&self.inst.graph, p, &family)?;
        Ok(family)
    }
}

/// Stage-two oracle: pairs with `r = 2` that a single vertex or edge of
/// `E[P]` still separates.
pub struct VcOracle<'a> {
    inst: &'a Instance,
    pairs: Vec<(usize, usize)>,
}

impl<'a> VcOracle<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Self {
            inst,
            pairs: pairs_at_least(inst, 2),
        }
    }
}

impl ViolatedBisets for VcOracle<'_> {
    fn violated(&self, p: &VertexSet) -> Result<Vec<Biset>> {
        let g = &self.inst.graph;
        let edges = g.induced_edges(p);
        let family = closest_cut_family(g, &edges, &self.pairs, CutMode::Vertex, 2)?;
        check_minimal_family(g, p, &family)?;
        Ok(family)
    }

    fn is_feasible(&self, p: &VertexSet) -> Result<bool> {
        let g = &self.inst.graph;
        let edges = g.induced_edges(p);
        for &(s, t) in &self.pairs {
            if connectivity_capped(&edges, g, s, t, CutMode::Vertex, 2)? < 2 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// One cover-engine run inside a solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseReport {
    /// Augmentation phase `ℓ`, or the stage number for vertex connectivity.
    pub ell: u32,
    /// Vertices already bought when the phase started.
    pub x_before: VertexSet,
    pub phase_edges: EdgeSet,
    pub cover: CoverResult,
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub dual_lower_bound: BigRational,
    /// `w(Q ∖ P₀)`.
    pub cost: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub kind: Kind,
    /// Chosen vertices, in the ids of the input instance.
    pub solution: VertexSet,
    /// Chosen vertices of the preprocessed instance the phases ran on.
    pub internal_solution: VertexSet,
    /// `w(solution ∖ terminals)`.
    pub weight: u64,
    pub planar: bool,
    pub phases: Vec<PhaseReport>,
    /// Sum of the per-phase dual lower bounds.
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub dual_lower_bound: BigRational,
    /// `weight / dual_lower_bound`; 1 for a free solution, absent when only the bound is zero.
    pub ratio_vs_dual: Option<f64>,
    pub iterations: usize,
}

impl SolveReport {
    fn assemble(original: &Instance, pre: &Instance, x: VertexSet, phases: Vec<PhaseReport>) -> Self {
        let n = original.graph.n();
        let solution: VertexSet = x.iter().filter(|&v| v < n).collect();
        let weight = original.solution_weight(&solution);
        let dual = phases
            .iter()
            .fold(BigRational::zero(), |acc, p| acc + &p.dual_lower_bound);
        let ratio_vs_dual = if weight == 0 {
            Some(1.0)
        } else if dual.is_zero() {
            None
        } else {
            dual.to_f64().map(|d| weight as f64 / d)
        };
        let iterations = phases.iter().map(|p| p.cover.iterations.len()).sum();
        Self {
            kind: original.kind,
            solution,
            internal_solution: x,
            weight,
            planar: pre.planar,
            phases,
            dual_lower_bound: dual,
            ratio_vs_dual,
            iterations,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The `weight=… dual_lb=… ratio_vs_dual=…` summary line.
    pub fn summary(&self) -> String {
        let ratio = match self.ratio_vs_dual {
            Some(r) => format!("{r:.4}"),
            None => "inf".to_string(),
        };
        format!(
            "weight={} dual_lb={} ratio_vs_dual={}",
            self.weight, self.dual_lower_bound, ratio
        )
    }
}

fn zero_weight(g: &NodeWeightedGraph) -> VertexSet {
    (0..g.n()).filter(|&v| g.weight(v) == 0).collect()
}

/// A deficient pair in `E[X]`, with its minimum cut.
pub(crate) fn first_deficit(inst: &Instance, x: &VertexSet, mode: CutMode, cap: impl Fn(u32) -> u32) -> Result<Option<Certificate>> {
    let g = &inst.graph;
    let edges = g.induced_edges(x);
    for (&(s, t), &r) in inst.demands() {
        let need = cap(r);
        if need == 0 {
            continue;
        }
        if let Some(cut) = min_cut_below(&edges, g, s, t, mode, need)? {
            return Ok(Some(Certificate {
                pair: (s, t),
                required: need,
                achieved: cut.value,
                cut: cut.biset,
            }));
        }
    }
    Ok(None)
}

fn require_feasible(inst: &Instance, mode: CutMode) -> Result<()> {
    match first_deficit(inst, &inst.graph.vertices(), mode, |r| r)? {
        Some(cert) => Err(Error::Infeasible(Box::new(cert))),
        None => Ok(()),
    }
}

fn run_augmentation(original: &Instance, pre: Instance) -> Result<SolveReport> {
    require_feasible(&pre, CutMode::Element)?;
    let g = &pre.graph;
    let base = zero_weight(g);
    let mut x = base.clone();
    let mut phases = Vec::new();
    for ell in 1..=pre.k() {
        let state = PhaseState::new(g, ell, x.clone());
        let oracle = ElemOracle::new(&pre, &state);
        let p0 = x.union(&base);
        let result = cover(g, &state.phase_edges, &oracle, &p0)?;
        x = x.union(&result.q);
        if let Some(cert) = first_deficit(&pre, &x, CutMode::Element, |r| r.min(ell))? {
            return Err(Error::InternalInvariant(format!(
                "phase {ell} left a deficient pair: {cert}"
            )));
        }
        phases.push(PhaseReport {
            ell,
            x_before: state.x,
            phase_edges: state.phase_edges,
            dual_lower_bound: dual_lower_bound(&result),
            cost: result.cost(g),
            cover: result,
        });
    }
    Ok(SolveReport::assemble(original, &pre, x, phases))
}

/// Element-connectivity SNDP via `k` augmentation phases. EC instances are
/// handled as the all-reliable special case.
pub fn solve_elem_sndp(inst: &Instance) -> Result<SolveReport> {
    if inst.kind == Kind::Vc012 {
        return Err(Error::Precondition("vertex-connectivity instance given to the element solver".into()));
    }
    let (pre, _) = preprocess(inst)?;
    run_augmentation(inst, pre)
}

/// Edge-connectivity SNDP: every vertex is treated as reliable.
pub fn solve_ec_sndp(inst: &Instance) -> Result<SolveReport> {
    let ec = ec_view(inst)?;
    let (pre, _) = preprocess(&ec)?;
    run_augmentation(&ec, pre)
}

/// The same instance with every vertex reliable and kind EC.
pub fn ec_view(inst: &Instance) -> Result<Instance> {
    let graph = inst.graph.with_reliable(vec![true; inst.graph.n()]);
    let demands = inst.demands().iter().map(|(&(u, v), &r)| (u, v, r));
    Ok(Instance::new(graph, demands, Kind::Ec)?.with_planar(inst.planar))
}

/// {0,1,2} vertex-connectivity SNDP: a Steiner forest for all pairs, then
/// one augmentation to two internally disjoint paths for the `r = 2` pairs.
pub fn solve_vc012(inst: &Instance) -> Result<SolveReport> {
    if inst.kind != Kind::Vc012 {
        return Err(Error::Precondition(format!("{} instance given to the VC012 solver", inst.kind)));
    }
    let (pre, _) = preprocess(inst)?;
    require_feasible(&pre, CutMode::Vertex)?;
    let g = &pre.graph;
    let base = zero_weight(g);

    let stage1 = cover(g, &g.all_edges(), &SteinerOracle::new(&pre), &base)?;
    let x1 = stage1.q.clone();
    if let Some(cert) = first_deficit(&pre, &x1, CutMode::Vertex, |r| r.min(1))? {
        return Err(Error::InternalInvariant(format!("stage 1 left a pair disconnected: {cert}")));
    }
    let mut phases = vec![PhaseReport {
        ell: 1,
        x_before: VertexSet::new(),
        phase_edges: g.all_edges(),
        dual_lower_bound: dual_lower_bound(&stage1),
        cost: stage1.cost(g),
        cover: stage1,
    }];

    let f1 = g.induced_edges(&x1);
    let phase_edges = g.all_edges().difference(&f1);
    let stage2 = cover(g, &phase_edges, &VcOracle::new(&pre), &x1.union(&base))?;
    let x = x1.union(&stage2.q);
    if let Some(cert) = first_deficit(&pre, &x, CutMode::Vertex, |r| r)? {
        return Err(Error::InternalInvariant(format!("stage 2 left a deficient pair: {cert}")));
    }
    phases.push(PhaseReport {
        ell: 2,
        x_before: x1,
        phase_edges,
        dual_lower_bound: dual_lower_bound(&stage2),
        cost: stage2.cost(g),
        cover: stage2,
    });
    Ok(SolveReport::assemble(inst, &pre, x, phases))
}

/// Dispatches on the instance kind.
pub fn solve(inst: &Instance) -> Result<SolveReport> {
    match inst.kind {
        Kind::Ec => solve_ec_sndp(inst),
        Kind::Elem => solve_elem_sndp(inst),
        Kind::Vc012 => solve_vc012(inst),
    }
}
