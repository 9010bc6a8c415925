//! Absorption features of energy curves and their propagation onto edges.
//!
//! Vertex energies are turned into edge flows by a backward sweep that
//! starts at dead ends (out-degree zero). A vertex is processed once all of
//! its outflows are known; its total inflow `IE_j + Σ outflows` is split
//! equally across its in-edges. Vertices with in-degree zero are sources of
//! kinetic energy and get no balance equation.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Component;
use crate::graph::{StructureGraph, Vid, VertexKind, WeightKind};
use crate::sim_io::{EnergyCurve, Pid, SimulationBundle};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionFeatures {
    pub ie_max: f64,
    /// Initial absorption time.
    pub t_i: f64,
    /// Final absorption time.
    pub t_n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ie_dt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Fraction of `ie_max` marking the onset of absorption.
    pub alpha: f64,
    /// Fraction of `ie_max` marking saturation.
    pub beta: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { alpha: 0.02, beta: 0.95 }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(0.0 < self.alpha && self.alpha < self.beta && self.beta <= 1.0) {
            return Err(FeatureError::InvalidConfig(format!(
                "need 0 < alpha < beta <= 1, got alpha={} beta={}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("invalid feature config: {0}")]
    InvalidConfig(String),
    #[error("no features for pid {0}")]
    MissingFeature(Pid),
    #[error("absorption times out of order: need {t_i_min} <= {t_i} <= {t_n} <= {t_n_max}")]
    OrderingViolation { t_i_min: f64, t_i: f64, t_n: f64, t_n_max: f64 },
}

/// First time the curve reaches `level`, interpolating linearly between samples.
fn first_crossing(curve: &EnergyCurve, level: f64) -> f64 {
    let (t, v) = (curve.times(), curve.values());
    match v.iter().position(|&x| x >= level) {
        None => t[t.len() - 1],
        Some(0) => t[0],
        Some(k) => {
            let (t0, t1, v0, v1) = (t[k - 1], t[k], v[k - 1], v[k]);
            if v1 <= v0 {
                t1
            } else {
                t0 + (level - v0) / (v1 - v0) * (t1 - t0)
            }
        }
    }
}

pub fn extract_features(curve: &EnergyCurve, cfg: &FeatureConfig) -> AbsorptionFeatures {
    let ie_max = curve.values().iter().copied().fold(0.0, f64::max);
    if ie_max <= 0.0 {
        let t0 = curve.times()[0];
        return AbsorptionFeatures { ie_max: 0.0, t_i: t0, t_n: t0, ie_dt: None };
    }
    let t_i = first_crossing(curve, cfg.alpha * ie_max);
    let t_n = first_crossing(curve, cfg.beta * ie_max).max(t_i);
    AbsorptionFeatures { ie_max, t_i, t_n, ie_dt: None }
}

/// Component features from its members: energies add up, the absorption
/// interval is the hull of the member intervals.
pub fn aggregate(
    component: &Component,
    features: &BTreeMap<Pid, AbsorptionFeatures>,
) -> Result<AbsorptionFeatures, FeatureError> {
    aggregate_members(&component.member_pids, features)
}

pub(crate) fn aggregate_members(
    members: &[Pid],
    features: &BTreeMap<Pid, AbsorptionFeatures>,
) -> Result<AbsorptionFeatures, FeatureError> {
    let mut out: Option<AbsorptionFeatures> = None;
    for pid in members {
        let f = features.get(pid).ok_or(FeatureError::MissingFeature(*pid))?;
        out = Some(match out {
            None => AbsorptionFeatures { ie_dt: None, ..*f },
            Some(acc) => AbsorptionFeatures {
                ie_max: acc.ie_max + f.ie_max,
                t_i: acc.t_i.min(f.t_i),
                t_n: acc.t_n.max(f.t_n),
                ie_dt: None,
            },
        });
    }
    out.ok_or(FeatureError::MissingFeature(0))
}

/// Area under a piecewise IE approximation between the global first onset
/// and the global last saturation: zero before `t_i`, a linear ramp up to
/// `t_n`, then flat at `ie_max`.
pub fn combine_ie_dt(features: &AbsorptionFeatures, t_i_min: f64, t_n_max: f64) -> Result<f64, FeatureError> {
    let f = features;
    if !(t_i_min <= f.t_i && f.t_i <= f.t_n && f.t_n <= t_n_max) {
        return Err(FeatureError::OrderingViolation { t_i_min, t_i: f.t_i, t_n: f.t_n, t_n_max });
    }
    let unload = 0.0;
    let absorption = f.ie_max * (f.t_n - f.t_i) / 2.0;
    let saturated = f.ie_max * (t_n_max - f.t_n);
    Ok(unload + absorption + saturated)
}

/// Features of every part, keyed by pid.
pub fn part_features(bundle: &SimulationBundle, cfg: &FeatureConfig) -> BTreeMap<Pid, AbsorptionFeatures> {
    bundle.parts.iter().map(|p| (p.pid, extract_features(&p.ie_curve, cfg))).collect()
}

/// Attaches `ie_max`, `t_i`, `t_n` and `ie_dt` to every part and component
/// vertex of `graph`. The `ie_dt` window spans all parts of the bundle.
pub fn annotate_features(
    graph: &mut StructureGraph,
    bundle: &SimulationBundle,
    cfg: &FeatureConfig,
) -> Result<(), FeatureError> {
    cfg.validate()?;
    let per_part = part_features(bundle, cfg);
    let t_i_min = per_part.values().map(|f| f.t_i).fold(f64::INFINITY, f64::min);
    let t_n_max = per_part.values().map(|f| f.t_n).fold(f64::NEG_INFINITY, f64::max);
    for v in &mut graph.vertices {
        let mut f = match v.kind {
            VertexKind::Part => {
                let pid = v.pid.ok_or(FeatureError::MissingFeature(0))?;
                *per_part.get(&pid).ok_or(FeatureError::MissingFeature(pid))?
            }
            VertexKind::Component => aggregate_members(&v.members, &per_part)?,
            VertexKind::Segment => continue,
        };
        f.ie_dt = Some(combine_ie_dt(&f, t_i_min, t_n_max)?);
        v.features = Some(f);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowFeature {
    IeMax,
    IeDt,
}

impl FlowFeature {
    /// Edge weight slot the flows of this feature are written to.
    pub fn weight_kind(self) -> WeightKind {
        match self {
            FlowFeature::IeMax => WeightKind::FIe,
            FlowFeature::IeDt => WeightKind::FIeDt,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("graph contains a cycle")]
    CyclicGraph,
    #[error("vertex {vid} has no {feature:?} feature")]
    MissingFeature { vid: Vid, feature: FlowFeature },
    #[error("flow sweep never reached vertex {0}")]
    UnreachedVertex(Vid),
    #[error("flow report has {report} edges but the graph has {graph}")]
    ReportMismatch { report: usize, graph: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub sim_id: String,
    pub feature: FlowFeature,
    /// Flow per edge, indexed like `graph.edges`.
    pub edge_flows: Vec<f64>,
    pub rmse: f64,
    pub excluded_sources: Vec<Vid>,
    /// Edges whose flow came out negative.
    pub negative_edges: Vec<usize>,
}

/// The `{sim_id, rmse, excluded_sources}` record written next to a weighted graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub sim_id: String,
    pub feature: FlowFeature,
    pub rmse: f64,
    pub excluded_sources: Vec<Vid>,
}

impl FlowReport {
    pub fn summary(&self) -> FlowSummary {
        FlowSummary {
            sim_id: self.sim_id.clone(),
            feature: self.feature,
            rmse: self.rmse,
            excluded_sources: self.excluded_sources.clone(),
        }
    }
}

/// Energy a vertex contributes to the balance. Segment vertices hold none.
pub fn vertex_energy(graph: &StructureGraph, vid: Vid, feature: FlowFeature) -> Result<f64, FlowError> {
    let v = &graph.vertices[vid];
    if v.kind == VertexKind::Segment {
        return Ok(0.0);
    }
    let missing = FlowError::MissingFeature { vid, feature };
    let Some(f) = v.features.as_ref() else {
        return Err(missing);
    };
    match feature {
        FlowFeature::IeMax => Ok(f.ie_max),
        FlowFeature::IeDt => f.ie_dt.ok_or(missing),
    }
}

pub fn compute_flow(graph: &StructureGraph, feature: FlowFeature) -> Result<FlowReport, FlowError> {
    if !graph.is_acyclic() {
        return Err(FlowError::CyclicGraph);
    }
    let n = graph.vertices.len();
    let energy: Vec<f64> = (0..n).map(|v| vertex_energy(graph, v, feature)).collect::<Result<_, _>>()?;
    let inc = graph.incidence();

    let mut flows: Vec<Option<f64>> = vec![None; graph.edges.len()];
    let mut pending: Vec<usize> = inc.out_edges.iter().map(Vec::len).collect();
    let mut processed = vec![false; n];
    let is_source = |v: Vid| inc.in_edges[v].is_empty();

    let mut active: VecDeque<Vid> = (0..n).filter(|&v| pending[v] == 0 && !is_source(v)).collect();
    while let Some(j) = active.pop_front() {
        debug_assert!(!processed[j]);
        processed[j] = true;
        let outflow: f64 = inc.out_edges[j].iter().map(|&e| flows[e].expect("outflows known")).sum();
        let share = (energy[j] + outflow) / inc.in_edges[j].len() as f64;
        for &e in &inc.in_edges[j] {
            flows[e] = Some(share);
            let p = graph.edges[e].src;
            pending[p] -= 1;
            if pending[p] == 0 && !is_source(p) {
                active.push_back(p);
            }
        }
    }

    let excluded_sources: Vec<Vid> = (0..n).filter(|&v| is_source(v)).collect();
    if let Some(v) = (0..n).find(|&v| !is_source(v) && !processed[v]) {
        return Err(FlowError::UnreachedVertex(v));
    }
    let edge_flows: Vec<f64> = flows
        .into_iter()
        .enumerate()
        .map(|(e, f)| f.ok_or(FlowError::UnreachedVertex(graph.edges[e].src)))
        .collect::<Result<_, _>>()?;

    let rmse = balance_rmse(graph, &energy, &edge_flows);
    let negative_edges = edge_flows.iter().enumerate().filter(|(_, &f)| f < 0.0).map(|(i, _)| i).collect();
    Ok(FlowReport { sim_id: graph.sim_id.clone(), feature, edge_flows, rmse, excluded_sources, negative_edges })
}

/// Root mean square of `IE_j - (inflow_j - outflow_j)` over all vertices
/// with at least one in-edge.
pub fn balance_rmse(graph: &StructureGraph, energy: &[f64], edge_flows: &[f64]) -> f64 {
    let residuals = balance_residuals(graph, energy, edge_flows);
    if residuals.is_empty() {
        return 0.0;
    }
    let sq: f64 = residuals.iter().map(|(_, r)| r * r).sum();
    (sq / residuals.len() as f64).sqrt()
}

/// `(vid, IE_j - (inflow - outflow))` for every non-source vertex.
pub fn balance_residuals(graph: &StructureGraph, energy: &[f64], edge_flows: &[f64]) -> Vec<(Vid, f64)> {
    let mut inflow = vec![0.0; graph.vertices.len()];
    let mut outflow = vec![0.0; graph.vertices.len()];
    let mut indeg = vec![0usize; graph.vertices.len()];
    for (e, f) in graph.edges.iter().zip(edge_flows) {
        inflow[e.dst] += f;
        outflow[e.src] += f;
        indeg[e.dst] += 1;
    }
    (0..graph.vertices.len())
        .filter(|&v| indeg[v] > 0)
        .map(|v| (v, energy[v] - (inflow[v] - outflow[v])))
        .collect()
}

/// Writes the report's flows into the matching weight slot of each edge.
pub fn apply_flows(graph: &mut StructureGraph, report: &FlowReport) -> Result<(), FlowError> {
    if report.edge_flows.len() != graph.edges.len() {
        return Err(FlowError::ReportMismatch { report: report.edge_flows.len(), graph: graph.edges.len() });
    }
    let kind = report.feature.weight_kind();
    for (e, &f) in graph.edges.iter_mut().zip(&report.edge_flows) {
        e.weights.set(kind, f);
    }
    Ok(())
}
