//! Seeded generators for planar benchmark instances.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::flow::{connectivity_capped, CutMode};
use crate::graph::{Instance, Kind, NodeWeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Grid,
    RandomPlanarTriangulation,
    CycleChordsPlanar,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Grid => "grid",
            Family::RandomPlanarTriangulation => "random_planar_triangulation",
            Family::CycleChordsPlanar => "cycle_chords_planar",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Family::Grid),
            "random_planar_triangulation" | "triangulation" => Ok(Family::RandomPlanarTriangulation),
            "cycle_chords_planar" | "cycle_chords" => Ok(Family::CycleChordsPlanar),
            other => Err(Error::Generator(format!("unknown family {other:?}"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub weight_range: (u64, u64),
    pub demand_count: usize,
    pub k_max: u32,
    pub seed: u64,
    pub kind: Kind,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, demand_count: usize, k_max: u32, kind: Kind, seed: u64) -> Self {
        Self {
            family,
            n,
            weight_range: (1, 100),
            demand_count,
            k_max,
            seed,
            kind,
        }
    }
}

/// Row-major lattice with `⌊√n⌋` rows; the last row may be partial.
fn grid_edges(n: usize) -> Vec<(usize, usize)> {
    let rows = (n as f64).sqrt().floor().max(1.0) as usize;
    let cols = n.div_ceil(rows);
    let mut edges = Vec::new();
    for v in 0..n {
        let c = v % cols;
        if c + 1 < cols && v + 1 < n {
            edges.push((v, v + 1));
        }
        if v + cols < n {
            edges.push((v, v + cols));
        }
    }
    edges
}

/// Start from a triangle and repeatedly put a new vertex inside a random
/// face, joined to its three corners.
fn triangulation_edges(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = vec![(0, 1), (0, 2), (1, 2)];
    let mut faces = vec![[0, 1, 2], [0, 1, 2]];
    for v in 3..n {
        let i = rng.gen_range(0..faces.len());
        let [a, b, c] = faces.swap_remove(i);
        edges.extend([(a, v), (b, v), (c, v)]);
        faces.extend([[a, b, v], [a, c, v], [b, c, v]]);
    }
    edges
}

fn chords_cross(a: (usize, usize), b: (usize, usize)) -> bool {
    let ((p, q), (r, s)) = (a, b);
    (p < r && r < q && q < s) || (r < p && p < s && s < q)
}

/// A Hamiltonian cycle plus random pairwise non-crossing chords.
fn cycle_chords_edges(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (0..n).map(|v| (v.min((v + 1) % n), v.max((v + 1) % n))).collect();
    let mut chords: Vec<(usize, usize)> = Vec::new();
    for _ in 0..n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (p, q) = (a.min(b), a.max(b));
        if q - p < 2 || (p == 0 && q == n - 1) {
            continue;
        }
        if chords.iter().any(|&c| c == (p, q) || chords_cross(c, (p, q))) {
            continue;
        }
        chords.push((p, q));
    }
    edges.extend(chords);
    edges
}

/// Builds a planar instance fully determined by `spec`.
///
/// Demand values are drawn from `1..=k_max` and capped at the pair's
/// connectivity in the whole graph, so every instance is feasible.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::Generator(format!("need at least 2 vertices, got {n}")));
    }
    if spec.demand_count == 0 {
        return Err(Error::Generator("need at least one demand".into()));
    }
    if spec.k_max == 0 {
        return Err(Error::Generator("k_max must be positive".into()));
    }
    if spec.demand_count > n * (n - 1) / 2 {
        return Err(Error::Generator(format!(
            "{} demands requested but only {} vertex pairs exist",
            spec.demand_count,
            n * (n - 1) / 2
        )));
    }
    let (lo, hi) = spec.weight_range;
    if lo > hi {
        return Err(Error::Generator(format!("empty weight range [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let edges = match spec.family {
        Family::Grid => grid_edges(n),
        Family::RandomPlanarTriangulation | Family::CycleChordsPlanar if n < 3 => vec![(0, 1)],
        Family::RandomPlanarTriangulation => triangulation_edges(n, &mut rng),
        Family::CycleChordsPlanar => cycle_chords_edges(n, &mut rng),
    };
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();

    let mut all_pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    all_pairs.shuffle(&mut rng);
    let pairs = &all_pairs[..spec.demand_count];
    let terminals: VertexSet = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();

    let reliable: Vec<bool> = (0..n)
        .map(|v| match spec.kind {
            Kind::Elem => terminals.contains(v) || rng.gen_bool(0.5),
            Kind::Ec | Kind::Vc012 => true,
        })
        .collect();
    let graph = NodeWeightedGraph::new(weights, reliable, edges)?;

    let (mode, k_max) = match spec.kind {
        Kind::Vc012 => (CutMode::Vertex, spec.k_max.min(2)),
        Kind::Ec | Kind::Elem => (CutMode::Element, spec.k_max),
    };
    let everything = graph.all_edges();
    let mut demands = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs {
        let want = rng.gen_range(1..=k_max);
        let have = connectivity_capped(&everything, &graph, u, v, mode, want)?;
        if have == 0 {
            return Err(Error::Generator(format!("pair ({u}, {v}) is disconnected")));
        }
        demands.push((u, v, want.min(have)));
    }
    Ok(Instance::new(graph, demands, spec.kind)?.with_planar(true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        assert_eq!(grid_edges(4), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        // 3×4 lattice
        assert_eq!(grid_edges(12).len(), 17);
    }

    #[test]
    fn triangulation_is_maximal_planar() {
        for n in [3, 4, 10, 40] {
            let spec = GeneratorSpec::new(Family::RandomPlanarTriangulation, n, 1, 1, Kind::Ec, 3);
            let inst = generate(&spec).unwrap();
            assert_eq!(inst.graph.m(), 3 * n - 6);
        }
    }

    #[test]
    fn chords_do_not_cross() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let edges = cycle_chords_edges(30, &mut rng);
        let chords: Vec<_> = edges[30..].to_vec();
        for (i, &a) in chords.iter().enumerate() {
            for &b in &chords[i + 1..] {
                assert!(!chords_cross(a, b));
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = GeneratorSpec::new(Family::Grid, 25, 4, 3, Kind::Elem, 99);
        assert_eq!(generate(&spec).unwrap().to_json(), generate(&spec).unwrap().to_json());
        let other = GeneratorSpec { seed: 100, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap().to_json(), generate(&other).unwrap().to_json());
    }

    #[test]
    fn too_many_demands() {
        let spec = GeneratorSpec::new(Family::Grid, 3, 4, 1, Kind::Ec, 1);
        assert!(matches!(generate(&spec), Err(Error::Generator(_))));
    }

    #[test]
    fn vc_demands_stay_small() {
        let spec = GeneratorSpec::new(Family::RandomPlanarTriangulation, 12, 5, 3, Kind::Vc012, 5);
        let inst = generate(&spec).unwrap();
        assert!(inst.demands().values().all(|&r| (1..=2).contains(&r)));
    }
}
