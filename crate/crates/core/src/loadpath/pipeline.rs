use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::longest::{longest_path, path_weight};
use super::mirror::NameMirror;
use super::{LoadPath, PathError};
use crate::energy::{annotate_features, apply_flows, compute_flow, FeatureConfig, FeatureError, FlowError, FlowFeature, FlowReport};
use crate::geometry::{group_components, Component, GroupingConfig, GroupingError};
use crate::graph::{build_cbg, build_mpbg, build_spbg, ExtractError, ExtractionConfig, ExtractionMethod, StructureGraph, WeightKind};
use crate::segment::{attach_spe, segment_graph, SegmentError};
use crate::sim_io::SimulationBundle;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub grouping: GroupingConfig,
    pub extraction: ExtractionConfig,
    pub features: FeatureConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Grouping,
    Extraction,
    Features,
    Flow,
    Segmentation,
    Path,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Grouping => "grouping",
            Stage::Extraction => "extraction",
            Stage::Features => "features",
            Stage::Flow => "flow",
            Stage::Segmentation => "segmentation",
            Stage::Path => "path",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("grouping: {0}")]
    Grouping(#[from] GroupingError),
    #[error("extraction: {0}")]
    Extraction(#[from] ExtractError),
    #[error("features: {0}")]
    Features(#[from] FeatureError),
    #[error("flow: {0}")]
    Flow(#[from] FlowError),
    #[error("segmentation: {0}")]
    Segmentation(#[from] SegmentError),
    #[error("path: {0}")]
    Path(#[from] PathError),
}

impl DetectError {
    pub fn stage(&self) -> Stage {
        match self {
            DetectError::Grouping(_) => Stage::Grouping,
            DetectError::Extraction(_) => Stage::Extraction,
            DetectError::Features(_) => Stage::Features,
            DetectError::Flow(_) => Stage::Flow,
            DetectError::Segmentation(_) => Stage::Segmentation,
            DetectError::Path(_) => Stage::Path,
        }
    }
}

/// Every artifact of one simulation's pipeline for a single method.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraphs {
    pub components: Vec<Component>,
    /// Features on vertices, `f_ie` and `f_iedt` on edges.
    pub base: StructureGraph,
    /// Segmented graph with `s_t`, `f_ie` and `s_pe` on edges.
    pub segmented: StructureGraph,
    pub flow_ie: FlowReport,
    pub flow_iedt: FlowReport,
    pub flow_segmented: FlowReport,
}

impl WeightedGraphs {
    /// The graph a weight kind is read from.
    pub fn graph_for(&self, kind: WeightKind) -> &StructureGraph {
        if kind.needs_segmentation() {
            &self.segmented
        } else {
            &self.base
        }
    }
}

/// Runs grouping, extraction, feature annotation, both flows and the time
/// segmentation for `cfg.extraction.method`.
pub fn weigh(bundle: &SimulationBundle, cfg: &PipelineConfig) -> Result<WeightedGraphs, DetectError> {
    let components = group_components(&bundle.parts, &cfg.grouping)?;
    let mut base = match cfg.extraction.method {
        ExtractionMethod::Cbg => build_cbg(bundle, &components, &cfg.extraction)?,
        ExtractionMethod::Spbg => build_spbg(bundle, &components, &cfg.extraction)?,
        ExtractionMethod::Mpbg => build_mpbg(bundle, &components, &cfg.extraction)?,
    };
    annotate_features(&mut base, bundle, &cfg.features)?;
    let flow_ie = compute_flow(&base, FlowFeature::IeMax)?;
    let flow_iedt = compute_flow(&base, FlowFeature::IeDt)?;
    apply_flows(&mut base, &flow_ie)?;
    apply_flows(&mut base, &flow_iedt)?;

    let segmented = segment_graph(&base)?;
    let flow_segmented = compute_flow(&segmented, FlowFeature::IeMax)?;
    let segmented = attach_spe(&segmented, &flow_segmented)?;
    Ok(WeightedGraphs { components, base, segmented, flow_ie, flow_iedt, flow_segmented })
}

/// Detects the load-path of `bundle` for one method and weight kind.
pub fn detect(
    bundle: &SimulationBundle,
    method: ExtractionMethod,
    weight: WeightKind,
    cfg: &PipelineConfig,
) -> Result<LoadPath, DetectError> {
    detect_with_graph(bundle, method, weight, cfg).map(|(path, _)| path)
}

/// Like [`detect`], also returning the graph the path was found in.
pub fn detect_with_graph(
    bundle: &SimulationBundle,
    method: ExtractionMethod,
    weight: WeightKind,
    cfg: &PipelineConfig,
) -> Result<(LoadPath, StructureGraph), DetectError> {
    let mut cfg = *cfg;
    cfg.extraction.method = method;
    let weighted = weigh(bundle, &cfg)?;
    let graph = weighted.graph_for(weight).clone();
    let mut path = longest_path(&graph, weight)?;
    mark_symmetry(&mut path, &graph, &NameMirror::from_bundle(bundle));
    Ok((path, graph))
}

/// Records the mirrored signature and whether the mirror image of the path
/// is a different path of the same weight.
fn mark_symmetry(path: &mut LoadPath, graph: &StructureGraph, mirror: &NameMirror) {
    if mirror.is_empty() {
        return;
    }
    path.mirrored_signature = Some(mirror.mirror_signature(&path.signature));
    let map = mirror.vertex_map(graph);
    let Some(image) = path.vertex_sequence.iter().map(|&v| map[v]).collect::<Option<Vec<_>>>() else {
        return;
    };
    if image == path.vertex_sequence {
        return;
    }
    if let Some(w) = path_weight(graph, &image, path.weight_kind) {
        let tol = 1e-9 * path.total_weight.abs().max(1.0);
        path.symmetric = (w - path.total_weight).abs() <= tol;
    }
}
