//! Load-path detection as the heaviest path of a weighted DAG, and
//! clustering of simulations by identical paths.

mod cluster;
mod longest;
mod mirror;
mod pipeline;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ExtractionMethod, Vid, WeightKind};

pub use cluster::{cluster, write_cluster_csv, Cluster, ClusterReport};
pub use longest::{longest_path, path_weight, signature_of};
pub use mirror::{lateral_axis, NameMirror, Side};
pub use pipeline::{detect, detect_with_graph, weigh, DetectError, PipelineConfig, Stage, WeightedGraphs};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadPath {
    pub sim_id: String,
    pub method: ExtractionMethod,
    pub weight_kind: WeightKind,
    pub vertex_sequence: Vec<Vid>,
    /// Part names along the path, segments folded into their origin.
    pub signature: Vec<String>,
    pub total_weight: f64,
    pub side: Side,
    /// Set when the mirrored path is a distinct path of equal weight, so the
    /// side was picked by the tie-break alone.
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirrored_signature: Option<Vec<String>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PathError {
    #[error("graph contains a cycle")]
    CyclicGraph,
    #[error("edge {edge} has no {kind} weight")]
    MissingWeight { kind: WeightKind, edge: usize },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("paths mix weight kinds {0} and {1}")]
    MixedWeightKinds(WeightKind, WeightKind),
    #[error("paths mix extraction methods {0} and {1}")]
    MixedMethods(ExtractionMethod, ExtractionMethod),
}
