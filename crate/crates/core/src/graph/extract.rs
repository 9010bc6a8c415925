use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{cmp_keys, Edge, ExtractionMethod, Provenance, StructureGraph, Vertex, VertexKind, Vid};
use crate::geometry::{dot, gap_distance, group_components, Component, GroupingConfig, GroupingError, Vec3};
use crate::sim_io::{Pid, SimulationBundle};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Maximum box gap (length units) at which two components are adjacent.
    pub tlv: f64,
    pub method: ExtractionMethod,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self { tlv: 10.0, method: ExtractionMethod::Mpbg }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error("invalid extraction config: {0}")]
    InvalidConfig(String),
    #[error("no adjacent components among {components} within tlv {tlv}")]
    NoAdjacency { components: usize, tlv: f64 },
    #[error("component {cid} references pid {pid} which is not in the bundle")]
    UnknownPid { cid: usize, pid: Pid },
    #[error(transparent)]
    Grouping(#[from] GroupingError),
}

/// Orders two vertices along the impact direction `x`: the one with the
/// smaller projection comes first, ties go to the smaller vid.
pub fn orient(a: (Vid, Vec3), b: (Vid, Vec3), x: Vec3) -> (Vid, Vid) {
    let ka = (dot(a.1, x), a.0);
    let kb = (dot(b.1, x), b.0);
    if cmp_keys(ka, kb).is_lt() {
        (a.0, b.0)
    } else {
        (b.0, a.0)
    }
}

/// Component pairs closer than the TLV, oriented along the impact direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Adjacency {
    /// `(from cid, to cid)`, in sweep order of the source.
    pub pairs: Vec<(usize, usize)>,
    pub no_adjacency: bool,
}

pub fn component_adjacency(components: &[Component], tlv: f64, impact_direction: Vec3) -> Adjacency {
    let mut sweep: Vec<&Component> = components.iter().collect();
    sweep.sort_by(|a, b| cmp_keys((dot(a.center, impact_direction), a.cid), (dot(b.center, impact_direction), b.cid)));

    let mut pairs = Vec::new();
    for (i, a) in sweep.iter().enumerate() {
        for b in &sweep[i + 1..] {
            if gap_distance(&a.bbox, &b.bbox) < tlv {
                pairs.push(orient((a.cid, a.center), (b.cid, b.center), impact_direction));
            }
        }
    }
    pairs.sort_by_key(|&(s, d)| {
        let pos = |cid| sweep.iter().position(|c| c.cid == cid).unwrap();
        (pos(s), pos(d))
    });
    pairs.dedup();
    Adjacency { no_adjacency: pairs.is_empty(), pairs }
}

fn check_config(cfg: &ExtractionConfig) -> Result<(), ExtractError> {
    if !(cfg.tlv.is_finite() && cfg.tlv >= 0.0) {
        return Err(ExtractError::InvalidConfig(format!("tlv must be a finite value >= 0, got {}", cfg.tlv)));
    }
    Ok(())
}

fn adjacency_or_error(components: &[Component], cfg: &ExtractionConfig, x: Vec3) -> Result<Adjacency, ExtractError> {
    check_config(cfg)?;
    let adj = component_adjacency(components, cfg.tlv, x);
    if adj.no_adjacency && components.len() > 1 {
        return Err(ExtractError::NoAdjacency { components: components.len(), tlv: cfg.tlv });
    }
    Ok(adj)
}

fn component_by_cid(components: &[Component]) -> BTreeMap<usize, &Component> {
    components.iter().map(|c| (c.cid, c)).collect()
}

/// Component-based graph: one vertex per component, vid = position in
/// `components`.
pub fn build_cbg(
    bundle: &SimulationBundle,
    components: &[Component],
    cfg: &ExtractionConfig,
) -> Result<StructureGraph, ExtractError> {
    let x = bundle.impact_direction;
    let adj = adjacency_or_error(components, cfg, x)?;
    let vid_of: BTreeMap<usize, Vid> = components.iter().enumerate().map(|(i, c)| (c.cid, i)).collect();

    let mut vertices = Vec::with_capacity(components.len());
    for (vid, c) in components.iter().enumerate() {
        let rep = bundle
            .part(c.representative)
            .ok_or(ExtractError::UnknownPid { cid: c.cid, pid: c.representative })?;
        vertices.push(Vertex {
            vid,
            kind: VertexKind::Component,
            pid: None,
            cid: Some(c.cid),
            name: rep.name.clone(),
            members: c.member_pids.clone(),
            center: c.center,
            features: None,
            segment: None,
        });
    }

    let mut edges = BTreeMap::new();
    for &(a, b) in &adj.pairs {
        let (va, vb) = (vid_of[&a], vid_of[&b]);
        let (s, d) = orient((va, vertices[va].center), (vb, vertices[vb].center), x);
        edges.entry((s, d)).or_insert(Provenance::ComponentLink);
    }
    Ok(finish(bundle, ExtractionMethod::Cbg, vertices, edges))
}

struct PartIndex {
    vertices: Vec<Vertex>,
    vid_of: BTreeMap<Pid, Vid>,
}

fn part_vertices(bundle: &SimulationBundle, components: &[Component]) -> Result<PartIndex, ExtractError> {
    let mut parts: Vec<_> = bundle.parts.iter().collect();
    parts.sort_by_key(|p| p.pid);
    let mut cid_of = BTreeMap::new();
    for c in components {
        for &pid in &c.member_pids {
            if bundle.part(pid).is_none() {
                return Err(ExtractError::UnknownPid { cid: c.cid, pid });
            }
            cid_of.insert(pid, c.cid);
        }
    }
    let vertices: Vec<Vertex> = parts
        .iter()
        .enumerate()
        .map(|(vid, p)| Vertex {
            vid,
            kind: VertexKind::Part,
            pid: Some(p.pid),
            cid: cid_of.get(&p.pid).copied(),
            name: p.name.clone(),
            members: Vec::new(),
            center: p.bbox.center(),
            features: None,
            segment: None,
        })
        .collect();
    let vid_of = parts.iter().enumerate().map(|(vid, p)| (p.pid, vid)).collect();
    Ok(PartIndex { vertices, vid_of })
}

type EdgeSet = BTreeMap<(Vid, Vid), Provenance>;

fn link(edges: &mut EdgeSet, idx: &PartIndex, a: Pid, b: Pid, x: Vec3, prov: Provenance) {
    let (va, vb) = (idx.vid_of[&a], idx.vid_of[&b]);
    if va == vb {
        return;
    }
    let key = orient((va, idx.vertices[va].center), (vb, idx.vertices[vb].center), x);
    edges.entry(key).or_insert(prov);
}

fn spbg_edges(
    bundle: &SimulationBundle,
    components: &[Component],
    adj: &Adjacency,
    idx: &PartIndex,
) -> EdgeSet {
    let x = bundle.impact_direction;
    let by_cid = component_by_cid(components);
    let mut edges = EdgeSet::new();
    for &(a, b) in &adj.pairs {
        link(&mut edges, idx, by_cid[&a].representative, by_cid[&b].representative, x, Provenance::ComponentLink);
    }
    for c in components {
        for &m in &c.member_pids {
            link(&mut edges, idx, m, c.representative, x, Provenance::IntraComponent);
        }
    }
    edges
}

/// Single-part-based graph: every part is a vertex, and each component is
/// represented by its largest part.
pub fn build_spbg(
    bundle: &SimulationBundle,
    components: &[Component],
    cfg: &ExtractionConfig,
) -> Result<StructureGraph, ExtractError> {
    let adj = adjacency_or_error(components, cfg, bundle.impact_direction)?;
    let idx = part_vertices(bundle, components)?;
    let edges = spbg_edges(bundle, components, &adj, &idx);
    Ok(finish(bundle, ExtractionMethod::Spbg, idx.vertices, edges))
}

/// Multi-part-based graph: the sPBG edges, plus component links branched to
/// every part involved in a partial merge, plus one edge per merge event.
pub fn build_mpbg(
    bundle: &SimulationBundle,
    components: &[Component],
    cfg: &ExtractionConfig,
) -> Result<StructureGraph, ExtractError> {
    let x = bundle.impact_direction;
    let adj = adjacency_or_error(components, cfg, x)?;
    let idx = part_vertices(bundle, components)?;
    let mut edges = spbg_edges(bundle, components, &adj, &idx);

    let by_cid = component_by_cid(components);
    let anchors = |c: &Component| {
        let mut a = c.partial_members();
        if !a.contains(&c.representative) {
            a.push(c.representative);
        }
        a
    };
    for &(ca, cb) in &adj.pairs {
        for &pa in &anchors(by_cid[&ca]) {
            for &pb in &anchors(by_cid[&cb]) {
                link(&mut edges, &idx, pa, pb, x, Provenance::ComponentLink);
            }
        }
    }
    for c in components {
        for ev in &c.merge_log {
            link(&mut edges, &idx, ev.child_pid, ev.parent_pid, x, Provenance::IntraComponent);
        }
    }
    Ok(finish(bundle, ExtractionMethod::Mpbg, idx.vertices, edges))
}

fn finish(bundle: &SimulationBundle, method: ExtractionMethod, vertices: Vec<Vertex>, edges: EdgeSet) -> StructureGraph {
    StructureGraph {
        sim_id: bundle.sim_id.clone(),
        method,
        segmented: false,
        impact_direction: bundle.impact_direction,
        vertices,
        edges: edges.into_iter().map(|((s, d), p)| Edge::new(s, d, p)).collect(),
    }
}

/// Groups the bundle's parts and builds the graph for `cfg.method`.
pub fn extract(
    bundle: &SimulationBundle,
    grouping: &GroupingConfig,
    cfg: &ExtractionConfig,
) -> Result<(Vec<Component>, StructureGraph), ExtractError> {
    let components = group_components(&bundle.parts, grouping)?;
    let graph = match cfg.method {
        ExtractionMethod::Cbg => build_cbg(bundle, &components, cfg)?,
        ExtractionMethod::Spbg => build_spbg(bundle, &components, cfg)?,
        ExtractionMethod::Mpbg => build_mpbg(bundle, &components, cfg)?,
    };
    Ok((components, graph))
}
