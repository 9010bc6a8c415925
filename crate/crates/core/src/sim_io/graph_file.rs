use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, write_atomic, Error, Result};
use crate::graph::StructureGraph;

/// Version tag written into every graph file.
pub const GRAPH_FORMAT_VERSION: &str = "v1";

#[derive(Serialize)]
struct Versioned<'a> {
    version: &'a str,
    #[serde(flatten)]
    graph: &'a StructureGraph,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<String>,
}

fn invalid(message: impl Into<String>) -> Error {
    Error::validation(None, "graph", message)
}

pub fn graph_to_json(graph: &StructureGraph) -> Result<String> {
    graph.validate().map_err(|e| invalid(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&Versioned { version: GRAPH_FORMAT_VERSION, graph })
        .map_err(|e| invalid(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Parses a graph file. The version tag is checked before anything else,
/// and the graph must satisfy its structural invariants.
pub fn graph_from_json(text: &str, origin: &Path) -> Result<StructureGraph> {
    let parse = |source| Error::Parse { path: origin.to_path_buf(), source };
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse)?;
    let probe: VersionProbe = serde_json::from_value(value.clone()).map_err(parse)?;
    match probe.version.as_deref() {
        Some(GRAPH_FORMAT_VERSION) => {}
        Some(other) => return Err(Error::SchemaVersion(other.to_string())),
        None => return Err(Error::SchemaVersion("<missing>".into())),
    }
    let graph: StructureGraph = serde_json::from_value(value).map_err(parse)?;
    graph.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(graph)
}

pub fn save_graph(graph: &StructureGraph, path: &Path) -> Result<()> {
    write_atomic(path, graph_to_json(graph)?.as_bytes())
}

pub fn load_graph(path: &Path) -> Result<StructureGraph> {
    graph_from_json(&read_to_string(path)?, path)
}
