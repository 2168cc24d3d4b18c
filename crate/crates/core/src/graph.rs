//! Instance model: node-weighted graphs, demands, preprocessing and I/O.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::biset::Biset;
use crate::bitset::{EdgeSet, VertexSet};
use crate::error::{Error, Result};

/// Largest connectivity requirement accepted by the solvers.
pub const MAX_REQUIREMENT: u32 = 30;

/// A simple undirected graph with nonnegative integer vertex weights and a
/// reliable/non-reliable vertex partition.
///
/// Edges are stored sorted with the smaller endpoint first; an edge's id is
/// its index in that list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeWeightedGraph {
    weights: Vec<u64>,
    reliable: Vec<bool>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl NodeWeightedGraph {
    pub fn new(weights: Vec<u64>, reliable: Vec<bool>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = weights.len();
        if reliable.len() != n {
            return Err(Error::Schema(format!(
                "reliable has {} entries, expected {n}",
                reliable.len()
            )));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Schema(format!("edge ({u}, {v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::Schema(format!("self-loop at {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (id, &(u, v)) in normalized.iter().enumerate() {
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            weights,
            reliable,
            edges: normalized,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.m())
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn weight(&self, v: usize) -> u64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn is_reliable(&self, v: usize) -> bool {
        self.reliable[v]
    }

    pub fn reliable_flags(&self) -> &[bool] {
        &self.reliable
    }

    pub fn reliable_set(&self) -> VertexSet {
        (0..self.n()).filter(|&v| self.reliable[v]).collect()
    }

    /// Neighbors of `v` as `(neighbor, edge id)`, sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn weight_of(&self, set: &VertexSet) -> u64 {
        set.iter().map(|v| self.weights[v]).sum()
    }

    /// `E[X]`: edges with both endpoints in `x`.
    pub fn induced_edges(&self, x: &VertexSet) -> EdgeSet {
        let mut out = EdgeSet::new();
        for u in x {
            for &(v, id) in &self.adjacency[u] {
                if u < v && x.contains(v) {
                    out.insert(id);
                }
            }
        }
        out
    }

    /// `δ_F(Ŝ)`: edges of `f` with one end in the inner part and the other
    /// outside the outer part.
    pub fn delta(&self, f: &EdgeSet, s: &Biset) -> EdgeSet {
        let mut out = EdgeSet::new();
        for u in s.inner() {
            for &(v, id) in &self.adjacency[u] {
                if !s.outer().contains(v) && f.contains(id) {
                    out.insert(id);
                }
            }
        }
        out
    }

    pub fn delta_count(&self, f: &EdgeSet, s: &Biset) -> usize {
        let mut count = 0;
        for u in s.inner() {
            for &(v, id) in &self.adjacency[u] {
                if !s.outer().contains(v) && f.contains(id) {
                    count += 1;
                }
            }
        }
        count
    }

    /// `Γ_F(Ŝ)`: vertices outside the outer part joined by an `f` edge to the
    /// inner part.
    pub fn gamma(&self, f: &EdgeSet, s: &Biset) -> VertexSet {
        let mut out = VertexSet::new();
        for u in s.inner() {
            for &(v, id) in &self.adjacency[u] {
                if !s.outer().contains(v) && f.contains(id) {
                    out.insert(v);
                }
            }
        }
        out
    }

    /// Copy with different reliability flags.
    pub fn with_reliable(&self, reliable: Vec<bool>) -> Self {
        assert_eq!(reliable.len(), self.n());
        Self {
            reliable,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "EC")]
    Ec,
    #[serde(rename = "ELEM")]
    Elem,
    #[serde(rename = "VC012")]
    Vc012,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Ec => "EC",
            Kind::Elem => "ELEM",
            Kind::Vc012 => "VC012",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EC" => Ok(Kind::Ec),
            "ELEM" => Ok(Kind::Elem),
            "VC012" => Ok(Kind::Vc012),
            other => Err(Error::Schema(format!("unknown kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A network design instance: graph, pairwise requirements and problem kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: NodeWeightedGraph,
    demands: BTreeMap<(usize, usize), u32>,
    pub kind: Kind,
    /// Set by generators that only emit planar graphs; never tested at runtime.
    pub planar: bool,
}

impl Instance {
    pub fn new(
        graph: NodeWeightedGraph,
        demands: impl IntoIterator<Item = (usize, usize, u32)>,
        kind: Kind,
    ) -> Result<Self> {
        let n = graph.n();
        let mut map = BTreeMap::new();
        for (u, v, r) in demands {
            for end in [u, v] {
                if end >= n {
                    return Err(Error::DanglingDemand(end));
                }
            }
            if u == v {
                return Err(Error::Schema(format!("demand on a single vertex {u}")));
            }
            for end in [u, v] {
                if !graph.is_reliable(end) {
                    return Err(Error::UnreliableDemand(end));
                }
            }
            if r == 0 {
                return Err(Error::Schema(format!("demand ({u}, {v}) has value 0")));
            }
            if r > MAX_REQUIREMENT {
                return Err(Error::InvalidInstance(format!(
                    "demand ({u}, {v}) = {r} exceeds the cap {MAX_REQUIREMENT}"
                )));
            }
            if kind == Kind::Vc012 && r > 2 {
                return Err(Error::InvalidInstance(format!(
                    "VC012 demand ({u}, {v}) = {r} is not in {{1,2}}"
                )));
            }
            if map.insert((u.min(v), u.max(v)), r).is_some() {
                return Err(Error::Schema(format!("duplicate demand ({u}, {v})")));
            }
        }
        Ok(Self {
            graph,
            demands: map,
            kind,
            planar: false,
        })
    }

    pub fn with_planar(mut self, planar: bool) -> Self {
        self.planar = planar;
        self
    }

    pub fn demands(&self) -> &BTreeMap<(usize, usize), u32> {
        &self.demands
    }

    pub fn demand(&self, u: usize, v: usize) -> u32 {
        self.demands.get(&(u.min(v), u.max(v))).copied().unwrap_or(0)
    }

    /// Maximum requirement `k` (0 with no demands).
    pub fn k(&self) -> u32 {
        self.demands.values().copied().max().unwrap_or(0)
    }

    pub fn terminals(&self) -> VertexSet {
        self.demands.keys().flat_map(|&(u, v)| [u, v]).collect()
    }

    /// `w(X ∖ T)`: weight of a vertex set, terminals excluded.
    pub fn solution_weight(&self, x: &VertexSet) -> u64 {
        let terminals = self.terminals();
        x.difference(&terminals)
            .iter()
            .map(|v| self.graph.weight(v))
            .sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        doc.into_instance()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc::from(self);
        let mut s = serde_json::to_string(&doc).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_json().as_bytes())?;
        Ok(())
    }
}

/// On-disk JSON layout.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: usize,
    weights: Vec<u64>,
    reliable: Vec<bool>,
    edges: Vec<[usize; 2]>,
    demands: Vec<[u64; 3]>,
    kind: Kind,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    planar: bool,
}

impl InstanceDoc {
    fn into_instance(self) -> Result<Instance> {
        if self.weights.len() != self.n {
            return Err(Error::Schema(format!(
                "weights has {} entries, expected n={}",
                self.weights.len(),
                self.n
            )));
        }
        let graph = NodeWeightedGraph::new(
            self.weights,
            self.reliable,
            self.edges.into_iter().map(|[u, v]| (u, v)).collect(),
        )?;
        let mut demands = Vec::with_capacity(self.demands.len());
        for [u, v, r] in self.demands {
            let r = u32::try_from(r).map_err(|_| Error::Schema(format!("demand value {r}")))?;
            demands.push((u as usize, v as usize, r));
        }
        Ok(Instance::new(graph, demands, self.kind)?.with_planar(self.planar))
    }
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        let g = &inst.graph;
        Self {
            n: g.n(),
            weights: g.weights.clone(),
            reliable: g.reliable.clone(),
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
            demands: inst
                .demands
                .iter()
                .map(|(&(u, v), &r)| [u as u64, v as u64, r as u64])
                .collect(),
            kind: inst.kind,
            planar: inst.planar,
        }
    }
}

/// What `preprocess` changed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PreprocessReport {
    /// Terminals whose weight was forced to zero.
    pub zeroed_terminals: Vec<usize>,
    /// `(a, b, x)`: reliable edge `ab` replaced by the path `a–x–b`.
    pub subdivided: Vec<(usize, usize, usize)>,
}

/// Normalizes an instance for the solvers.
///
/// ELEM: every reliable–reliable edge is subdivided by a fresh zero-weight
/// non-reliable vertex, so the reliable set becomes independent.
/// EC: every vertex is marked reliable. All kinds: terminal weights become 0.
pub fn preprocess(inst: &Instance) -> Result<(Instance, PreprocessReport)> {
    let g = &inst.graph;
    let mut report = PreprocessReport::default();
    let mut weights = g.weights.clone();
    let mut reliable = g.reliable.clone();
    let mut edges = Vec::with_capacity(g.m());

    match inst.kind {
        Kind::Ec => reliable.iter_mut().for_each(|r| *r = true),
        Kind::Elem | Kind::Vc012 => {}
    }
    for &(u, v) in inst.demands.keys() {
        for end in [u, v] {
            if !reliable[end] {
                return Err(Error::InvalidInstance(format!(
                    "demand endpoint not reliable: {end}"
                )));
            }
        }
    }
    for &(a, b) in &g.edges {
        if inst.kind == Kind::Elem && reliable[a] && reliable[b] {
            let x = weights.len();
            weights.push(0);
            reliable.push(false);
            edges.push((a, x));
            edges.push((x, b));
            report.subdivided.push((a, b, x));
        } else {
            edges.push((a, b));
        }
    }
    for t in inst.terminals().iter() {
        if weights[t] != 0 {
            weights[t] = 0;
            report.zeroed_terminals.push(t);
        }
    }
    let graph = NodeWeightedGraph::new(weights, reliable, edges)?;
    let demands = inst.demands.iter().map(|(&(u, v), &r)| (u, v, r));
    let out = Instance::new(graph, demands, inst.kind)?.with_planar(inst.planar);
    Ok((out, report))
}

/// Graphviz rendering: labels `id:w`, non-reliable vertices as boxes,
/// solution vertices filled.
pub fn to_dot(inst: &Instance, solution: Option<&VertexSet>) -> String {
    let g = &inst.graph;
    let terminals = inst.terminals();
    let mut out = String::from("graph G {\n");
    for v in 0..g.n() {
        let mut attrs = vec![format!("label=\"{}:{}\"", v, g.weight(v))];
        if !g.is_reliable(v) {
            attrs.push("shape=box".into());
        }
        if solution.is_some_and(|s| s.contains(v)) {
            attrs.push("style=filled".into());
        }
        if terminals.contains(v) {
            attrs.push("penwidth=2".into());
        }
        let _ = writeln!(out, "  {} [{}];", v, attrs.join(", "));
    }
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "  {u} -- {v};");
    }
    out.push_str("}\n");
    out
}
