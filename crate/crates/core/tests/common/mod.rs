#![allow(dead_code)]

use crashgraph::graph::{Edge, Provenance, Vertex, VertexKind, Vid};
use crashgraph::{ExtractionMethod, StructureGraph};
use rand::Rng;

/// A part-vertex graph with `f_ie` weights on the given edges.
pub fn weighted_graph(n: usize, edges: &[(Vid, Vid, f64)]) -> StructureGraph {
    StructureGraph {
        sim_id: "dag".into(),
        method: ExtractionMethod::Spbg,
        segmented: false,
        impact_direction: [1.0, 0.0, 0.0],
        vertices: (0..n)
            .map(|vid| Vertex {
                vid,
                kind: VertexKind::Part,
                pid: Some(vid as u32 + 1),
                cid: None,
                name: format!("v{vid}"),
                members: vec![],
                center: [vid as f64, 0.0, 0.0],
                features: None,
                segment: None,
            })
            .collect(),
        edges: edges
            .iter()
            .map(|&(s, d, w)| {
                let mut e = Edge::new(s, d, Provenance::ComponentLink);
                e.weights.f_ie = Some(w);
                e
            })
            .collect(),
    }
}

/// Random DAG on at most `max_n` vertices: edges only go from lower to
/// higher vids, each present with probability `density`.
pub fn random_dag<R: Rng>(rng: &mut R, max_n: usize, density: f64) -> (usize, Vec<(Vid, Vid, f64)>) {
    let n = rng.gen_range(1..=max_n);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b, rng.gen_range(0.01..10.0)));
            }
        }
    }
    (n, edges)
}

/// Heaviest path by exhaustive enumeration of every path, summing weights
/// left to right; equal weights resolve to the lexicographically smallest
/// vid sequence.
pub fn brute_force_longest(n: usize, edges: &[(Vid, Vid, f64)]) -> (f64, Vec<Vid>) {
    let mut best: (f64, Vec<Vid>) = (f64::NEG_INFINITY, vec![]);
    let mut stack: Vec<(Vec<Vid>, f64)> = (0..n).map(|v| (vec![v], 0.0)).collect();
    while let Some((path, w)) = stack.pop() {
        if w > best.0 || (w == best.0 && path < best.1) {
            best = (w, path.clone());
        }
        let last = *path.last().unwrap();
        for &(s, d, ew) in edges {
            if s == last {
                let mut p = path.clone();
                p.push(d);
                stack.push((p, w + ew));
            }
        }
    }
    best
}
