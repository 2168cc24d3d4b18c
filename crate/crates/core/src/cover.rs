//! Primal-dual covering of a {0,1} biset function by vertices.
//!
//! The engine grows the duals of all minimal violated bisets uniformly until
//! some vertex becomes tight, buys it, and repeats; a reverse-delete pass then
//! drops redundant purchases. It never evaluates the function itself: a
//! [`ViolatedBisets`] oracle supplies the minimal violated family for the
//! current vertex set.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::biset::Biset;
use crate::bitset::{EdgeSet, VertexSet};
use crate::error::{Error, Result};
use crate::graph::NodeWeightedGraph;

/// Supplies the minimal violated bisets of a phase function.
pub trait ViolatedBisets {
    /// All ⊆-minimal violated bisets with respect to the vertex set `p`,
    /// sorted canonically.
    fn violated(&self, p: &VertexSet) -> Result<Vec<Biset>>;

    /// Whether `p` covers the function. Implementations may short-circuit.
    fn is_feasible(&self, p: &VertexSet) -> Result<bool> {
        Ok(self.violated(p)?.is_empty())
    }
}

pub(crate) fn ser_rational<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_rationals<S: Serializer>(qs: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| q.to_string()))
}

fn ser_dual_map<S: Serializer>(
    y: &BTreeMap<Biset, BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(y.iter().map(|(b, q)| (b.to_string(), q.to_string())))
}

fn parse_rational<E: serde::de::Error>(text: &str) -> std::result::Result<BigRational, E> {
    text.parse().map_err(|_| E::custom(format!("malformed rational {text:?}")))
}

pub(crate) fn de_rational<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
    parse_rational(&String::deserialize(d)?)
}

fn de_rationals<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
    Vec::<String>::deserialize(d)?.iter().map(|t| parse_rational(t)).collect()
}

fn de_dual_map<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Biset, BigRational>, D::Error> {
    BTreeMap::<String, String>::deserialize(d)?
        .iter()
        .map(|(b, q)| Ok((b.parse().map_err(D::Error::custom)?, parse_rational(q)?)))
        .collect()
}

/// Dual values of the raised bisets and per-vertex slack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualState {
    #[serde(serialize_with = "ser_dual_map", deserialize_with = "de_dual_map")]
    pub y: BTreeMap<Biset, BigRational>,
    /// `w(v)` minus the duals of all raised bisets with `v ∈ Γ`.
    #[serde(serialize_with = "ser_rationals", deserialize_with = "de_rationals")]
    pub residual: Vec<BigRational>,
}

impl DualState {
    fn new(g: &NodeWeightedGraph) -> Self {
        Self {
            y: BTreeMap::new(),
            residual: g.weights().iter().map(|&w| rational(w)).collect(),
        }
    }

    pub fn objective(&self) -> BigRational {
        self.y.values().fold(BigRational::zero(), |acc, q| acc + q)
    }
}

pub fn rational(w: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(w))
}

/// One growth step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// `P_{i-1}`, the vertex set the family was computed for.
    pub before: VertexSet,
    pub family: Vec<Biset>,
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub epsilon: BigRational,
    pub tight_vertex: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverResult {
    pub p0: VertexSet,
    /// Vertex set before reverse-delete.
    pub p: VertexSet,
    /// Vertex set after reverse-delete.
    pub q: VertexSet,
    /// `(iteration, vertex)` in purchase order.
    pub selection_order: Vec<(usize, usize)>,
    pub dual: DualState,
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub dual_objective: BigRational,
    pub iterations: Vec<IterationRecord>,
}

impl CoverResult {
    /// Weight of the vertices bought on top of `P₀`.
    pub fn cost(&self, g: &NodeWeightedGraph) -> u64 {
        g.weight_of(&self.q.difference(&self.p0))
    }

    /// One JSON object per iteration: `{iter, raised_bisets, epsilon, tight_vertex}`.
    pub fn trace_lines(&self) -> Vec<String> {
        self.iterations
            .iter()
            .map(|it| {
                let line = TraceLine {
                    iter: it.iter,
                    raised_bisets: it.family.iter().map(|b| b.to_string()).collect(),
                    epsilon: it.epsilon.to_string(),
                    tight_vertex: it.tight_vertex,
                };
                serde_json::to_string(&line).expect("trace line serializes")
            })
            .collect()
    }
}

#[derive(Serialize)]
struct TraceLine {
    iter: usize,
    raised_bisets: Vec<String>,
    epsilon: String,
    tight_vertex: usize,
}

/// Σ y(Ŝ) over the raised bisets.
pub fn dual_lower_bound(result: &CoverResult) -> BigRational {
    result.dual.objective()
}

fn check_family(
    g: &NodeWeightedGraph,
    phase_edges: &EdgeSet,
    p: &VertexSet,
    family: &[Biset],
) -> Result<Vec<VertexSet>> {
    let mut gammas = Vec::with_capacity(family.len());
    for (i, c) in family.iter().enumerate() {
        if !c.outer().is_subset(p) {
            return Err(Error::InternalInvariant(format!(
                "violated biset {c} is not contained in the current vertex set"
            )));
        }
        let gamma = g.gamma(phase_edges, c);
        if !gamma.is_disjoint(p) {
            return Err(Error::InternalInvariant(format!(
                "violated biset {c} has a purchased neighbor in {:?}",
                gamma.intersection(p)
            )));
        }
        for d in &family[..i] {
            if !c.inner().is_disjoint(d.inner()) {
                return Err(Error::InternalInvariant(format!(
                    "minimal violated bisets {d} and {c} share inner vertices"
                )));
            }
        }
        gammas.push(gamma);
    }
    Ok(gammas)
}

/// Runs the growth stage from `p0` and then reverse-delete.
pub fn cover(
    g: &NodeWeightedGraph,
    phase_edges: &EdgeSet,
    oracle: &dyn ViolatedBisets,
    p0: &VertexSet,
) -> Result<CoverResult> {
    let mut dual = DualState::new(g);
    let mut p = p0.clone();
    let mut selection_order = Vec::new();
    let mut iterations = Vec::new();

    loop {
        let family = oracle.violated(&p)?;
        if family.is_empty() {
            break;
        }
        let gammas = check_family(g, phase_edges, &p, &family)?;
        let mut load = vec![0u64; g.n()];
        for gamma in &gammas {
            for v in gamma.iter() {
                load[v] += 1;
            }
        }
        let mut best: Option<(BigRational, usize)> = None;
        for (v, &l) in load.iter().enumerate() {
            if l == 0 || p.contains(v) {
                continue;
            }
            let ratio = &dual.residual[v] / rational(l);
            if best.as_ref().is_none_or(|(b, _)| ratio < *b) {
                best = Some((ratio, v));
            }
        }
        let (epsilon, tight) = best.ok_or(Error::Uncoverable)?;
        for c in &family {
            *dual.y.entry(c.clone()).or_insert_with(BigRational::zero) += &epsilon;
        }
        for (v, &l) in load.iter().enumerate() {
            if l > 0 {
                dual.residual[v] -= &epsilon * rational(l);
                if dual.residual[v].is_negative() {
                    return Err(Error::InternalInvariant(format!(
                        "dual constraint of vertex {v} exceeded by {}",
                        -dual.residual[v].clone()
                    )));
                }
            }
        }
        let iter = iterations.len() + 1;
        iterations.push(IterationRecord {
            iter,
            before: p.clone(),
            family,
            epsilon,
            tight_vertex: tight,
        });
        p.insert(tight);
        selection_order.push((iter, tight));
    }

    let mut q = p.clone();
    for &(_, v) in selection_order.iter().rev() {
        q.remove(v);
        if !oracle.is_feasible(&q)? {
            q.insert(v);
        }
    }

    for v in q.difference(p0).iter() {
        if !dual.residual[v].is_zero() {
            return Err(Error::InternalInvariant(format!(
                "selected vertex {v} is not tight (slack {})",
                dual.residual[v]
            )));
        }
    }

    let dual_objective = dual.objective();
    Ok(CoverResult {
        p0: p0.clone(),
        p,
        q,
        selection_order,
        dual,
        dual_objective,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Covers singleton sets `{t}` for each listed terminal until `t` has a
    /// purchased neighbor.
    struct NeedNeighbor<'a> {
        g: &'a NodeWeightedGraph,
        terminals: Vec<usize>,
    }

    impl ViolatedBisets for NeedNeighbor<'_> {
        fn violated(&self, p: &VertexSet) -> Result<Vec<Biset>> {
            let edges = self.g.induced_edges(p);
            Ok(self
                .terminals
                .iter()
                .map(|&t| Biset::set(VertexSet::singleton(t)))
                .filter(|b| self.g.delta_count(&edges, b) == 0)
                .collect())
        }
    }

    fn triangle(weights: Vec<u64>) -> NodeWeightedGraph {
        NodeWeightedGraph::new(weights, vec![true; 3], vec![(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn feasible_start_buys_nothing() {
        let g = triangle(vec![0, 0, 0]);
        let oracle = NeedNeighbor { g: &g, terminals: vec![0] };
        let p0 = g.vertices();
        let res = cover(&g, &g.all_edges(), &oracle, &p0).unwrap();
        assert_eq!(res.q, p0);
        assert!(res.iterations.is_empty());
        assert!(dual_lower_bound(&res).is_zero());
    }

    #[test]
    fn gap_example_buys_a_free_neighbor() {
        // v1 (id 0) has weight 1 and is treated as already present; its
        // neighbors cost nothing, so the dual stays at zero
        let g = triangle(vec![1, 0, 0]);
        let oracle = NeedNeighbor { g: &g, terminals: vec![0] };
        let res = cover(&g, &g.all_edges(), &oracle, &VertexSet::singleton(0)).unwrap();
        assert_eq!(res.selection_order, vec![(1, 1)]);
        assert_eq!(res.q.to_vec(), vec![0, 1]);
        assert!(dual_lower_bound(&res).is_zero());
        assert_eq!(res.trace_lines()[0], r#"{"iter":1,"raised_bisets":["([0],[0])"],"epsilon":"0","tight_vertex":1}"#);
    }

    #[test]
    fn uniform_growth_and_reverse_delete() {
        // star: terminals 0 and 1 both adjacent to hub 2 (w=3); 0 also to 3 (w=2),
        // 1 also to 4 (w=2)
        let g = NodeWeightedGraph::new(
            vec![0, 0, 3, 2, 2],
            vec![true; 5],
            vec![(0, 2), (1, 2), (0, 3), (1, 4)],
        )
        .unwrap();
        let oracle = NeedNeighbor { g: &g, terminals: vec![0, 1] };
        let p0: VertexSet = [0, 1].into_iter().collect();
        let res = cover(&g, &g.all_edges(), &oracle, &p0).unwrap();
        // hub load 2 → ε = 3/2; leaves load 1 → ε = 2; hub wins
        assert_eq!(res.iterations[0].epsilon, BigRational::new(3.into(), 2.into()));
        assert_eq!(res.q.to_vec(), vec![0, 1, 2]);
        assert_eq!(dual_lower_bound(&res), rational(3));
        assert_eq!(res.cost(&g), 3);
    }

    #[test]
    fn uncoverable_is_reported() {
        let g = NodeWeightedGraph::new(vec![0, 0], vec![true; 2], vec![]).unwrap();
        let oracle = NeedNeighbor { g: &g, terminals: vec![0] };
        let err = cover(&g, &g.all_edges(), &oracle, &VertexSet::singleton(0)).unwrap_err();
        assert!(matches!(err, Error::Uncoverable));
    }

    struct Broken;
    impl ViolatedBisets for Broken {
        fn violated(&self, _p: &VertexSet) -> Result<Vec<Biset>> {
            Ok(vec![Biset::set(VertexSet::singleton(0))])
        }
    }

    #[test]
    fn purchased_neighbor_is_an_invariant_error() {
        let g = triangle(vec![0, 0, 0]);
        let err = cover(&g, &g.all_edges(), &Broken, &g.vertices()).unwrap_err();
        assert!(matches!(err, Error::InternalInvariant(_)));
    }
}
