use super::mirror::Side;
use super::{LoadPath, PathError};
use crate::graph::{StructureGraph, Vid, WeightKind};

/// Heaviest path by `kind`, found with one pass over the reverse
/// topological order.
///
/// Among paths of equal weight the lexicographically smallest vid sequence
/// wins, so a path never grows by a zero-weight tail.
pub fn longest_path(graph: &StructureGraph, kind: WeightKind) -> Result<LoadPath, PathError> {
    let order = graph.topological_order().ok_or(PathError::CyclicGraph)?;
    if order.is_empty() {
        return Err(PathError::EmptyGraph);
    }
    let weight: Vec<f64> = graph
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| e.weights.get(kind).ok_or(PathError::MissingWeight { kind, edge: i }))
        .collect::<Result<_, _>>()?;

    let inc = graph.incidence();
    let n = graph.vertices.len();
    // best[v]: heaviest path starting at v; next[v]: its second vertex
    let mut best = vec![0.0f64; n];
    let mut next: Vec<Option<Vid>> = vec![None; n];
    for &v in order.iter().rev() {
        let mut outs: Vec<usize> = inc.out_edges[v].clone();
        outs.sort_by_key(|&e| graph.edges[e].dst);
        for e in outs {
            let u = graph.edges[e].dst;
            let cand = weight[e] + best[u];
            if cand > best[v] {
                best[v] = cand;
                next[v] = Some(u);
            }
        }
    }

    let mut start = 0;
    for v in 1..n {
        if best[v] > best[start] {
            start = v;
        }
    }
    let mut seq = vec![start];
    while let Some(u) = next[*seq.last().unwrap()] {
        seq.push(u);
    }

    Ok(LoadPath {
        sim_id: graph.sim_id.clone(),
        method: graph.method,
        weight_kind: kind,
        total_weight: path_weight(graph, &seq, kind).expect("path edges exist"),
        signature: signature_of(graph, &seq),
        side: Side::of_path(graph, &seq),
        vertex_sequence: seq,
        symmetric: false,
        mirrored_signature: None,
    })
}

/// Sum of `kind` weights along `seq`, left to right. `None` if two
/// consecutive vertices are not joined by an edge or a weight is missing.
pub fn path_weight(graph: &StructureGraph, seq: &[Vid], kind: WeightKind) -> Option<f64> {
    let mut total = 0.0;
    for w in seq.windows(2) {
        let e = graph.find_edge(w[0], w[1])?;
        total += graph.edges[e].weights.get(kind)?;
    }
    Some(total)
}

/// Names of the vertices along `seq` with segments folded into their origin
/// and consecutive repeats dropped.
pub fn signature_of(graph: &StructureGraph, seq: &[Vid]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut last: Option<Vid> = None;
    for &v in seq {
        let origin = graph.origin_of(v);
        if last != Some(origin) {
            out.push(graph.vertices[origin].name.clone());
            last = Some(origin);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, ExtractionMethod, Provenance, Vertex, VertexKind};

    fn weighted(n: usize, edges: &[(Vid, Vid, f64)]) -> StructureGraph {
        StructureGraph {
            sim_id: "lp".into(),
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

    #[test]
    fn shortcut_beats_chain() {
        let g = weighted(3, &[(0, 1, 3.0), (1, 2, 1.0), (0, 2, 5.0)]);
        let p = longest_path(&g, WeightKind::FIe).unwrap();
        assert_eq!(p.vertex_sequence, vec![0, 2]);
        assert_eq!(p.total_weight, 5.0);
        assert_eq!(p.signature, vec!["v0", "v2"]);
    }

    #[test]
    fn single_vertex() {
        let g = weighted(1, &[]);
        let p = longest_path(&g, WeightKind::FIe).unwrap();
        assert_eq!(p.vertex_sequence, vec![0]);
        assert_eq!(p.total_weight, 0.0);
    }

    #[test]
    fn uniform_chain_is_taken_whole() {
        let g = weighted(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]);
        assert_eq!(longest_path(&g, WeightKind::FIe).unwrap().vertex_sequence, vec![0, 1, 2, 3]);
    }

    #[test]
    fn ties_pick_smallest_sequence() {
        // 0->1->3 and 0->2->3 both weigh 2
        let g = weighted(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]);
        assert_eq!(longest_path(&g, WeightKind::FIe).unwrap().vertex_sequence, vec![0, 1, 3]);
        // trailing zero-weight edge is not appended
        let g = weighted(3, &[(0, 1, 2.0), (1, 2, 0.0)]);
        assert_eq!(longest_path(&g, WeightKind::FIe).unwrap().vertex_sequence, vec![0, 1]);
    }

    #[test]
    fn missing_weight_and_cycle() {
        let g = weighted(2, &[(0, 1, 1.0)]);
        assert_eq!(
            longest_path(&g, WeightKind::St),
            Err(PathError::MissingWeight { kind: WeightKind::St, edge: 0 })
        );
        let mut c = weighted(2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        c.segmented = true;
        assert_eq!(longest_path(&c, WeightKind::FIe), Err(PathError::CyclicGraph));
    }

    #[test]
    fn negative_weights_are_avoided() {
        let g = weighted(3, &[(0, 1, -1.0), (1, 2, 4.0)]);
        assert_eq!(longest_path(&g, WeightKind::FIe).unwrap().vertex_sequence, vec![1, 2]);
    }
}
