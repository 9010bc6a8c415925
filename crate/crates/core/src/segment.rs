//! Time segmentation of absorption intervals.
//!
//! Each vertex `j` absorbs energy over `[t_i, t_n]`. Its successors start
//! absorbing at their own `t_i`, which may fall inside that interval. The
//! interval of `j` is cut at every such successor onset, one segment vertex
//! is added per distinct cut plus a terminal one ending at `t_n`, and each
//! successor is re-attached to the segment vertex at its onset. Edge weight
//! `s_t` is then the time between the initial timings of its endpoints.

use thiserror::Error;

use crate::energy::FlowReport;
use crate::graph::{Edge, Provenance, SegmentInfo, StructureGraph, Vertex, VertexKind, Vid};

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("vertex {0} has no absorption timing")]
    MissingTiming(Vid),
    #[error("graph is already segmented")]
    AlreadySegmented,
    #[error("graph is not segmented")]
    NotSegmented,
    #[error("graph contains a cycle")]
    CyclicGraph,
    #[error("edge {edge} has no {kind} weight")]
    MissingWeight { edge: usize, kind: &'static str },
    #[error("flow report has {report} edges but the graph has {graph}")]
    ReportMismatch { report: usize, graph: usize },
}

/// Builds the time-segmented graph. Original vertices keep their vids; new
/// segment vertices are appended in origin order. Every edge carries `s_t`.
pub fn segment_graph(graph: &StructureGraph) -> Result<StructureGraph, SegmentError> {
    if graph.segmented {
        return Err(SegmentError::AlreadySegmented);
    }
    if !graph.is_acyclic() {
        return Err(SegmentError::CyclicGraph);
    }
    let timing = |vid: Vid| {
        graph.vertices[vid]
            .features
            .map(|f| (f.t_i, f.t_n))
            .ok_or(SegmentError::MissingTiming(vid))
    };

    let inc = graph.incidence();
    let mut vertices: Vec<Vertex> = graph.vertices.clone();
    let mut edges: Vec<Edge> = Vec::new();

    for j in 0..graph.vertices.len() {
        let (t_i, t_n) = timing(j)?;
        let succ: Vec<(Vid, f64, Provenance)> = inc.out_edges[j]
            .iter()
            .map(|&e| {
                let s = graph.edges[e].dst;
                Ok((s, timing(s)?.0, graph.edges[e].provenance))
            })
            .collect::<Result<_, SegmentError>>()?;

        if t_n <= t_i {
            for &(s, _, prov) in &succ {
                edges.push(Edge::new(j, s, prov));
            }
            continue;
        }

        let inside = |t: f64| t > t_i && t < t_n && !same_time(t, t_i) && !same_time(t, t_n);
        let mut cuts: Vec<f64> = succ.iter().map(|&(_, t, _)| t).filter(|&t| inside(t)).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| same_time(*a, *b));
        cuts.push(t_n);

        let origin = &graph.vertices[j];
        let mut chain: Vec<(Vid, f64)> = Vec::with_capacity(cuts.len());
        let mut prev_vid = j;
        let mut prev_t = t_i;
        for (k, &t_end) in cuts.iter().enumerate() {
            let vid = vertices.len();
            vertices.push(Vertex {
                vid,
                kind: VertexKind::Segment,
                pid: origin.pid,
                cid: origin.cid,
                name: format!("{}#{}", origin.name, k + 1),
                members: Vec::new(),
                center: origin.center,
                features: None,
                segment: Some(SegmentInfo { origin_vid: j, k: k + 1, t_start: prev_t, t_end }),
            });
            edges.push(Edge::new(prev_vid, vid, Provenance::SegmentLink));
            chain.push((vid, t_end));
            prev_vid = vid;
            prev_t = t_end;
        }

        let terminal = chain.last().expect("terminal segment").0;
        for &(s, t_s, prov) in &succ {
            let anchor = if t_s <= t_i || same_time(t_s, t_i) {
                j
            } else if t_s >= t_n || same_time(t_s, t_n) {
                terminal
            } else {
                chain.iter().find(|&&(_, t)| same_time(t, t_s)).expect("cut exists").0
            };
            edges.push(Edge::new(anchor, s, prov));
        }
    }

    let mut out = StructureGraph {
        sim_id: graph.sim_id.clone(),
        method: graph.method,
        segmented: true,
        impact_direction: graph.impact_direction,
        vertices,
        edges,
    };
    set_time_weights(&mut out)?;
    Ok(out)
}

/// Two instants closer than this, relative to their magnitude, are the
/// same: onsets read off curves of different amplitude but identical shape
/// differ in the last bits only.
pub const TIME_TOLERANCE: f64 = 1e-9;

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// `s_t = |t_i(dst) - t_i(src)|` on every edge, zero for equal instants.
fn set_time_weights(graph: &mut StructureGraph) -> Result<(), SegmentError> {
    let starts: Vec<Option<f64>> = graph.vertices.iter().map(Vertex::start_time).collect();
    for e in &mut graph.edges {
        let a = starts[e.src].ok_or(SegmentError::MissingTiming(e.src))?;
        let b = starts[e.dst].ok_or(SegmentError::MissingTiming(e.dst))?;
        e.weights.s_t = Some(if same_time(a, b) { 0.0 } else { (b - a).abs() });
    }
    Ok(())
}

/// Segment vertices of `origin`, in chain order.
pub fn segments_of(graph: &StructureGraph, origin: Vid) -> Vec<&Vertex> {
    let mut out: Vec<&Vertex> = graph
        .vertices
        .iter()
        .filter(|v| v.segment.is_some_and(|s| s.origin_vid == origin))
        .collect();
    out.sort_by_key(|v| v.segment.map(|s| s.k));
    out
}

/// Copies `f_ie` from `flows` onto the segmented graph and sets
/// `s_pe = f_ie / s_t`. Zero-duration edges get `s_pe = 0` and are flagged.
pub fn attach_spe(segmented: &StructureGraph, flows: &FlowReport) -> Result<StructureGraph, SegmentError> {
    if !segmented.segmented {
        return Err(SegmentError::NotSegmented);
    }
    if flows.edge_flows.len() != segmented.edges.len() {
        return Err(SegmentError::ReportMismatch { report: flows.edge_flows.len(), graph: segmented.edges.len() });
    }
    let mut out = segmented.clone();
    for (i, (e, &f)) in out.edges.iter_mut().zip(&flows.edge_flows).enumerate() {
        let s_t = e.weights.s_t.ok_or(SegmentError::MissingWeight { edge: i, kind: "s_t" })?;
        e.weights.f_ie = Some(f);
        if s_t > 0.0 {
            e.weights.s_pe = Some(f / s_t);
            e.zero_duration = false;
        } else {
            e.weights.s_pe = Some(0.0);
            e.zero_duration = true;
        }
    }
    Ok(out)
}
