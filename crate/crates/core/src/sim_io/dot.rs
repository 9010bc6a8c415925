use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{write_atomic, Error, Result};
use crate::graph::{StructureGraph, Vid, VertexKind};
use crate::loadpath::LoadPath;

/// Layout of the DOT export.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DotOptions {
    /// Coordinate axis along gravity, dropped when projecting box centers
    /// onto the drawing plane. `2` draws the x–y plane.
    pub drop_axis: usize,
    /// Length units per DOT point.
    pub scale: f64,
}

impl Default for DotOptions {
    fn default() -> Self {
        Self { drop_axis: 2, scale: 1.0 }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders `graph` as a Graphviz digraph. Edges along `highlight` are drawn
/// in red.
pub fn to_dot(graph: &StructureGraph, highlight: Option<&LoadPath>, opts: &DotOptions) -> Result<String> {
    let mut marked: BTreeSet<(Vid, Vid)> = BTreeSet::new();
    if let Some(path) = highlight {
        for &v in &path.vertex_sequence {
            if v >= graph.vertices.len() {
                return Err(Error::PathNotInGraph(format!("vertex {v} does not exist")));
            }
        }
        for w in path.vertex_sequence.windows(2) {
            if graph.find_edge(w[0], w[1]).is_none() {
                return Err(Error::PathNotInGraph(format!("no edge {} to {}", w[0], w[1])));
            }
            marked.insert((w[0], w[1]));
        }
    }
    let axes: Vec<usize> = (0..3).filter(|&k| k != opts.drop_axis.min(2)).collect();
    let scale = if opts.scale > 0.0 { opts.scale } else { 1.0 };

    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&graph.sim_id));
    let _ = writeln!(out, "  graph [label={}];", quote(&format!("{} {}", graph.sim_id, graph.method)));
    out.push_str("  node [shape=box, fontsize=10];\n");
    for v in &graph.vertices {
        let shape = match v.kind {
            VertexKind::Part => "box",
            VertexKind::Component => "triangle",
            VertexKind::Segment => "point",
        };
        let (x, y) = (v.center[axes[0]] / scale, v.center[axes[1]] / scale);
        let _ = writeln!(
            out,
            "  v{} [label={}, shape={shape}, pos=\"{x},{y}!\"];",
            v.vid,
            quote(&v.name),
        );
    }
    for e in &graph.edges {
        let mut attrs = vec![format!("provenance={}", quote(provenance_name(e.provenance)))];
        if marked.contains(&(e.src, e.dst)) {
            attrs.push("color=red".into());
            attrs.push("penwidth=2".into());
        }
        let _ = writeln!(out, "  v{} -> v{} [{}];", e.src, e.dst, attrs.join(", "));
    }
    out.push_str("}\n");
    Ok(out)
}

fn provenance_name(p: crate::graph::Provenance) -> &'static str {
    use crate::graph::Provenance::*;
    match p {
        ComponentLink => "component_link",
        IntraComponent => "intra_component",
        SegmentLink => "segment_link",
    }
}

pub fn export_dot(graph: &StructureGraph, highlight: Option<&LoadPath>, path: &Path, opts: &DotOptions) -> Result<()> {
    let text = to_dot(graph, highlight, opts)?;
    write_atomic(path, text.as_bytes())
}
