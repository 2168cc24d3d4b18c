//! Unit-capacity max-flow kernels for element and vertex connectivity.
//!
//! Splittable vertices `v` become an arc `v_in → v_out` of capacity 1; the
//! remaining vertices are single nodes. An undirected edge `uv` becomes the
//! arcs `u_out → v_in` and `v_out → u_in`, each of capacity 1. Arc order is
//! fixed by vertex id and then edge id, and augmenting paths are found by BFS
//! in that order, so every query is deterministic.

use std::cell::Cell;
use std::collections::VecDeque;

use crate::biset::Biset;
use crate::bitset::{EdgeSet, VertexSet};
use crate::error::{Error, Result};
use crate::graph::NodeWeightedGraph;

thread_local! {
    static FLOWS_RUN: Cell<u64> = const { Cell::new(0) };
}

/// Max-flow computations run so far on the calling thread.
pub fn flows_run() -> u64 {
    FLOWS_RUN.with(Cell::get)
}

/// Which vertices may be cut, besides edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutMode {
    /// Non-reliable vertices are cut elements; reliable ones are shared freely.
    Element,
    /// Every vertex other than the two endpoints may be cut.
    Vertex,
}

/// The directed network for one `s`–`t` query.
#[derive(Debug, Clone)]
pub struct SplitNetwork {
    in_node: Vec<usize>,
    out_node: Vec<usize>,
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u32>,
}

impl SplitNetwork {
    pub fn build(
        g: &NodeWeightedGraph,
        edges: &EdgeSet,
        split: impl Fn(usize) -> bool,
    ) -> Self {
        let n = g.n();
        let mut in_node = Vec::with_capacity(n);
        let mut out_node = Vec::with_capacity(n);
        let mut nodes = n;
        for v in 0..n {
            in_node.push(v);
            if split(v) {
                out_node.push(nodes);
                nodes += 1;
            } else {
                out_node.push(v);
            }
        }
        let mut net = Self {
            in_node,
            out_node,
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        };
        for v in 0..n {
            if net.in_node[v] != net.out_node[v] {
                net.add_arc(net.in_node[v], net.out_node[v]);
            }
        }
        for id in edges.iter() {
            let (u, v) = g.edge(id);
            net.add_arc(net.out_node[u], net.in_node[v]);
            net.add_arc(net.out_node[v], net.in_node[u]);
        }
        net
    }

    fn add_arc(&mut self, from: usize, to: usize) {
        let id = self.to.len();
        self.to.push(to);
        self.cap.push(1);
        self.head[from].push(id);
        self.to.push(from);
        self.cap.push(0);
        self.head[to].push(id + 1);
    }

    fn augment(&mut self, source: usize, sink: usize) -> bool {
        let mut via = vec![usize::MAX; self.head.len()];
        let mut seen = vec![false; self.head.len()];
        let mut queue = VecDeque::from([source]);
        seen[source] = true;
        while let Some(x) = queue.pop_front() {
            for &arc in &self.head[x] {
                let y = self.to[arc];
                if self.cap[arc] > 0 && !seen[y] {
                    seen[y] = true;
                    via[y] = arc;
                    if y == sink {
                        let mut cur = sink;
                        while cur != source {
                            let a = via[cur];
                            self.cap[a] -= 1;
                            self.cap[a ^ 1] += 1;
                            cur = self.to[a ^ 1];
                        }
                        return true;
                    }
                    queue.push_back(y);
                }
            }
        }
        false
    }

    /// Maximum `s`–`t` flow, stopping early once `limit` is reached.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: u32) -> u32 {
        FLOWS_RUN.with(|c| c.set(c.get() + 1));
        let (source, sink) = (self.out_node[s], self.in_node[t]);
        let mut value = 0;
        while value < limit && self.augment(source, sink) {
            value += 1;
        }
        value
    }

    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let source = self.out_node[s];
        let mut seen = vec![false; self.head.len()];
        // s_in and s_out coincide for unsplit endpoints
        seen[self.in_node[s]] = true;
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            for &arc in &self.head[x] {
                let y = self.to[arc];
                if self.cap[arc] > 0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// After a maximum flow: the source-side biset of the minimum cut whose
    /// source side is smallest. Inner part = vertices with every copy
    /// reachable; boundary = split vertices with only `v_in` reachable.
    pub fn source_side_biset(&self, s: usize) -> Biset {
        let seen = self.residual_reachable(s);
        let mut inner = VertexSet::new();
        let mut outer = VertexSet::new();
        for v in 0..self.in_node.len() {
            let (i, o) = (seen[self.in_node[v]], seen[self.out_node[v]]);
            if i && o {
                inner.insert(v);
                outer.insert(v);
            } else if i {
                outer.insert(v);
            }
        }
        Biset::new(inner, outer).expect("inner part is contained in outer part")
    }
}

/// A minimum `s`–`t` cut as a biset containing `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinCut {
    pub value: u32,
    pub biset: Biset,
}

fn check_endpoints(g: &NodeWeightedGraph, s: usize, t: usize, mode: CutMode) -> Result<()> {
    if s >= g.n() || t >= g.n() {
        return Err(Error::Precondition(format!("vertex out of range: ({s}, {t})")));
    }
    if s == t {
        return Err(Error::Precondition(format!("source and sink coincide at {s}")));
    }
    if mode == CutMode::Element {
        for v in [s, t] {
            if !g.is_reliable(v) {
                return Err(Error::Precondition(format!(
                    "element connectivity endpoint {v} is not reliable"
                )));
            }
        }
    }
    Ok(())
}

fn network(g: &NodeWeightedGraph, edges: &EdgeSet, s: usize, t: usize, mode: CutMode) -> SplitNetwork {
    match mode {
        CutMode::Element => SplitNetwork::build(g, edges, |v| !g.is_reliable(v)),
        CutMode::Vertex => SplitNetwork::build(g, edges, |v| v != s && v != t),
    }
}

/// Connectivity between `s` and `t` in `(V, edges)`, capped at `limit`.
pub fn connectivity_capped(
    edges: &EdgeSet,
    g: &NodeWeightedGraph,
    s: usize,
    t: usize,
    mode: CutMode,
    limit: u32,
) -> Result<u32> {
    check_endpoints(g, s, t, mode)?;
    Ok(network(g, edges, s, t, mode).max_flow(s, t, limit))
}

/// Maximum number of element-disjoint `s`–`t` paths using only `edges`.
pub fn element_connectivity(edges: &EdgeSet, g: &NodeWeightedGraph, s: usize, t: usize) -> Result<u32> {
    connectivity_capped(edges, g, s, t, CutMode::Element, u32::MAX)
}

/// `min(2, κ(s, t))` for internally vertex-disjoint paths in `(V, edges)`.
pub fn pair_vertex_connectivity_at_most_2(
    edges: &EdgeSet,
    g: &NodeWeightedGraph,
    s: usize,
    t: usize,
) -> Result<u32> {
    connectivity_capped(edges, g, s, t, CutMode::Vertex, 2)
}

/// Minimum cut with the ⊆-smallest source side; `value` is the full
/// connectivity unless it reaches `limit`, in which case `None` is returned.
pub fn min_cut_below(
    edges: &EdgeSet,
    g: &NodeWeightedGraph,
    s: usize,
    t: usize,
    mode: CutMode,
    limit: u32,
) -> Result<Option<MinCut>> {
    check_endpoints(g, s, t, mode)?;
    let mut net = network(g, edges, s, t, mode);
    let value = net.max_flow(s, t, limit);
    if value >= limit {
        return Ok(None);
    }
    Ok(Some(MinCut {
        value,
        biset: net.source_side_biset(s),
    }))
}

/// The element-connectivity minimum cut biset closest to `s`.
pub fn min_cut_biset_closest_to_source(
    edges: &EdgeSet,
    g: &NodeWeightedGraph,
    s: usize,
    t: usize,
) -> Result<MinCut> {
    Ok(min_cut_below(edges, g, s, t, CutMode::Element, u32::MAX)?
        .expect("unbounded limit always yields a cut"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, reliable: &[usize], edges: &[(usize, usize)]) -> NodeWeightedGraph {
        let flags = (0..n).map(|v| reliable.contains(&v)).collect();
        NodeWeightedGraph::new(vec![0; n], flags, edges.to_vec()).unwrap()
    }

    #[test]
    fn path_through_nonreliable() {
        let g = graph(3, &[0, 2], &[(0, 1), (1, 2)]);
        let all = g.all_edges();
        assert_eq!(element_connectivity(&all, &g, 0, 2).unwrap(), 1);
        let cut = min_cut_biset_closest_to_source(&all, &g, 0, 2).unwrap();
        // ({0},{0}), ({0},{0,1}) and ({0,1},{0,1}) all have value 1; the
        // ⊆-smallest wins
        assert_eq!(cut.biset, Biset::from_ids(&[0], &[0]).unwrap());
        let minimum: Vec<Biset> = all_bisets(3)
            .into_iter()
            .filter(|b| b.in_p_elem(&g) && b.inner().contains(0) && !b.outer().contains(2))
            .filter(|b| g.delta_count(&all, b) + b.boundary_len() == 1)
            .collect();
        assert_eq!(minimum.len(), 3);
        assert!(minimum.iter().all(|b| cut.biset.subset_of(b)));
    }

    fn all_bisets(n: usize) -> Vec<Biset> {
        let mut out = Vec::new();
        for code in 0..3usize.pow(n as u32) {
            let (mut inner, mut outer) = (VertexSet::new(), VertexSet::new());
            let mut c = code;
            for v in 0..n {
                match c % 3 {
                    1 => {
                        outer.insert(v);
                    }
                    2 => {
                        inner.insert(v);
                        outer.insert(v);
                    }
                    _ => {}
                }
                c /= 3;
            }
            out.push(Biset::new(inner, outer).unwrap());
        }
        out
    }

    #[test]
    fn two_disjoint_paths() {
        let g = graph(4, &[0, 3], &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        assert_eq!(element_connectivity(&g.all_edges(), &g, 0, 3).unwrap(), 2);
    }

    #[test]
    fn single_edge_cut() {
        let g = graph(2, &[0, 1], &[(0, 1)]);
        let cut = min_cut_biset_closest_to_source(&g.all_edges(), &g, 0, 1).unwrap();
        assert_eq!(cut.value, 1);
        assert_eq!(cut.biset, Biset::from_ids(&[0], &[0]).unwrap());
        assert_eq!(g.delta(&g.all_edges(), &cut.biset).len(), 1);
    }

    #[test]
    fn reliable_vertices_are_shared() {
        // s-a-t twice through reliable a: edge-disjoint but a is shared
        let g = graph(4, &[0, 1, 2, 3], &[(0, 1), (1, 2), (0, 3), (3, 1)]);
        assert_eq!(element_connectivity(&g.all_edges(), &g, 0, 2).unwrap(), 1);
        let g2 = graph(5, &[0, 1, 2, 3, 4], &[(0, 1), (0, 3), (1, 2), (3, 2), (1, 4), (4, 2)]);
        assert_eq!(element_connectivity(&g2.all_edges(), &g2, 0, 2).unwrap(), 2);
    }

    #[test]
    fn endpoint_must_be_reliable() {
        let g = graph(3, &[0], &[(0, 1), (1, 2)]);
        assert!(matches!(
            element_connectivity(&g.all_edges(), &g, 0, 2),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn vertex_connectivity_examples() {
        let disconnected = graph(4, &[], &[(0, 1), (2, 3)]);
        assert_eq!(
            pair_vertex_connectivity_at_most_2(&disconnected.all_edges(), &disconnected, 0, 3).unwrap(),
            0
        );
        let tree = graph(4, &[], &[(0, 1), (1, 2), (1, 3)]);
        assert_eq!(pair_vertex_connectivity_at_most_2(&tree.all_edges(), &tree, 0, 3).unwrap(), 1);
        let cycle = graph(4, &[], &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(pair_vertex_connectivity_at_most_2(&cycle.all_edges(), &cycle, 0, 2).unwrap(), 2);
        // a complete graph still caps at 2
        let k5: Vec<_> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        let k5 = graph(5, &[], &k5);
        assert_eq!(pair_vertex_connectivity_at_most_2(&k5.all_edges(), &k5, 0, 4).unwrap(), 2);
    }

    #[test]
    fn restricted_edge_set() {
        let g = graph(4, &[0, 3], &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        let only: EdgeSet = [g.edge_id(0, 1).unwrap(), g.edge_id(1, 3).unwrap()].into_iter().collect();
        assert_eq!(element_connectivity(&only, &g, 0, 3).unwrap(), 1);
        assert_eq!(element_connectivity(&EdgeSet::new(), &g, 0, 3).unwrap(), 0);
    }
}
