//! Directed structural graphs over parts, components and time segments.

mod extract;

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::AbsorptionFeatures;
use crate::geometry::{dot, Vec3};
use crate::sim_io::Pid;

pub use extract::{build_cbg, build_mpbg, build_spbg, component_adjacency, extract, orient, Adjacency, ExtractError, ExtractionConfig};

pub type Vid = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMethod {
    Cbg,
    Spbg,
    Mpbg,
}

impl ExtractionMethod {
    pub const ALL: [ExtractionMethod; 3] = [ExtractionMethod::Cbg, ExtractionMethod::Spbg, ExtractionMethod::Mpbg];

    pub fn as_str(self) -> &'static str {
        match self {
            ExtractionMethod::Cbg => "cbg",
            ExtractionMethod::Spbg => "spbg",
            ExtractionMethod::Mpbg => "mpbg",
        }
    }
}

impl fmt::Display for ExtractionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExtractionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cbg" => Ok(ExtractionMethod::Cbg),
            "spbg" => Ok(ExtractionMethod::Spbg),
            "mpbg" => Ok(ExtractionMethod::Mpbg),
            other => Err(format!("unknown method {other:?} (expected cbg, spbg or mpbg)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Part,
    Component,
    Segment,
}

/// Timing of one segment of an origin vertex's absorption interval.
/// The segment vertex stands for the instant `t_end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub origin_vid: Vid,
    /// 1-based position in the origin's chain.
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl SegmentInfo {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub vid: Vid,
    pub kind: VertexKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pid: Option<Pid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cid: Option<usize>,
    pub name: String,
    /// Member pids of a component vertex.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<Pid>,
    pub center: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<AbsorptionFeatures>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<SegmentInfo>,
}

impl Vertex {
    /// Initial timing of the vertex: `t_i` for parts and components, the
    /// segment end for segment vertices.
    pub fn start_time(&self) -> Option<f64> {
        match (&self.segment, &self.features) {
            (Some(s), _) => Some(s.t_end),
            (None, Some(f)) => Some(f.t_i),
            (None, None) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeightKind {
    #[serde(rename = "f_ie")]
    FIe,
    #[serde(rename = "f_iedt")]
    FIeDt,
    #[serde(rename = "s_t")]
    St,
    #[serde(rename = "s_pe")]
    SPe,
}

impl WeightKind {
    pub const ALL: [WeightKind; 4] = [WeightKind::FIe, WeightKind::FIeDt, WeightKind::St, WeightKind::SPe];

    pub fn as_str(self) -> &'static str {
        match self {
            WeightKind::FIe => "f_ie",
            WeightKind::FIeDt => "f_iedt",
            WeightKind::St => "s_t",
            WeightKind::SPe => "s_pe",
        }
    }

    /// Time-based weights live on the segmented graph.
    pub fn needs_segmentation(self) -> bool {
        matches!(self, WeightKind::St | WeightKind::SPe)
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "f_ie" | "fie" => Ok(WeightKind::FIe),
            "f_iedt" | "fiedt" => Ok(WeightKind::FIeDt),
            "s_t" | "st" => Ok(WeightKind::St),
            "s_pe" | "spe" => Ok(WeightKind::SPe),
            other => Err(format!("unknown weight {other:?} (expected f_ie, f_iedt, s_t or s_pe)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_ie: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_iedt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_pe: Option<f64>,
}

impl Weights {
    pub fn get(&self, kind: WeightKind) -> Option<f64> {
        match kind {
            WeightKind::FIe => self.f_ie,
            WeightKind::FIeDt => self.f_iedt,
            WeightKind::St => self.s_t,
            WeightKind::SPe => self.s_pe,
        }
    }

    pub fn set(&mut self, kind: WeightKind, value: f64) {
        let slot = match kind {
            WeightKind::FIe => &mut self.f_ie,
            WeightKind::FIeDt => &mut self.f_iedt,
            WeightKind::St => &mut self.s_t,
            WeightKind::SPe => &mut self.s_pe,
        };
        *slot = Some(value);
    }

    fn all(&self) -> [Option<f64>; 4] {
        [self.f_ie, self.f_iedt, self.s_t, self.s_pe]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ComponentLink,
    IntraComponent,
    SegmentLink,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: Vid,
    pub dst: Vid,
    #[serde(default)]
    pub weights: Weights,
    pub provenance: Provenance,
    /// Set when `s_t` is zero and `s_pe` was forced to zero.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub zero_duration: bool,
}

impl Edge {
    pub fn new(src: Vid, dst: Vid, provenance: Provenance) -> Self {
        Self { src, dst, weights: Weights::default(), provenance, zero_duration: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureGraph {
    pub sim_id: String,
    pub method: ExtractionMethod,
    #[serde(default)]
    pub segmented: bool,
    pub impact_direction: Vec3,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("vertex at position {index} has vid {vid}")]
    VidMismatch { index: usize, vid: Vid },
    #[error("edge {edge} references missing vertex {vid}")]
    DanglingEdge { edge: usize, vid: Vid },
    #[error("self-loop on vertex {0}")]
    SelfLoop(Vid),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(Vid, Vid),
    #[error("graph contains a cycle")]
    Cyclic,
    #[error("edge {0} -> {1} runs against the impact order")]
    AgainstImpactOrder(Vid, Vid),
    #[error("edge {edge} has a non-finite {kind} weight")]
    NonFiniteWeight { edge: usize, kind: &'static str },
}

/// In/out edge lists by vertex, holding edge indices in edge order.
#[derive(Clone, Debug)]
pub struct Incidence {
    pub out_edges: Vec<Vec<usize>>,
    pub in_edges: Vec<Vec<usize>>,
}

impl StructureGraph {
    pub fn vertex(&self, vid: Vid) -> Option<&Vertex> {
        self.vertices.get(vid)
    }

    pub fn incidence(&self) -> Incidence {
        let n = self.vertices.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            out_edges[e.src].push(i);
            in_edges[e.dst].push(i);
        }
        Incidence { out_edges, in_edges }
    }

    pub fn find_edge(&self, src: Vid, dst: Vid) -> Option<usize> {
        self.edges.iter().position(|e| e.src == src && e.dst == dst)
    }

    /// `(projection on the impact direction, vid)`, compared with `total_cmp`.
    pub fn order_key(&self, vid: Vid) -> (f64, Vid) {
        (dot(self.vertices[vid].center, self.impact_direction), vid)
    }

    /// Kahn's algorithm, smallest ready vid first. `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<Vid>> {
        let inc = self.incidence();
        let mut indeg: Vec<usize> = inc.in_edges.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<Vid> = (0..self.vertices.len()).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.vertices.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &e in &inc.out_edges[v] {
                let w = self.edges[e].dst;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == self.vertices.len()).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Checks the structural invariants. Unsegmented graphs must also have
    /// every edge running forward in the `(projection, vid)` order.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (index, v) in self.vertices.iter().enumerate() {
            if v.vid != index {
                return Err(GraphError::VidMismatch { index, vid: v.vid });
            }
        }
        let mut seen = BTreeSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            for vid in [e.src, e.dst] {
                if vid >= self.vertices.len() {
                    return Err(GraphError::DanglingEdge { edge: i, vid });
                }
            }
            if e.src == e.dst {
                return Err(GraphError::SelfLoop(e.src));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(GraphError::DuplicateEdge(e.src, e.dst));
            }
            for (kind, w) in WeightKind::ALL.iter().zip(e.weights.all()) {
                if w.is_some_and(|w| !w.is_finite()) {
                    return Err(GraphError::NonFiniteWeight { edge: i, kind: kind.as_str() });
                }
            }
            if !self.segmented && cmp_keys(self.order_key(e.src), self.order_key(e.dst)) != Ordering::Less {
                return Err(GraphError::AgainstImpactOrder(e.src, e.dst));
            }
        }
        if !self.is_acyclic() {
            return Err(GraphError::Cyclic);
        }
        Ok(())
    }

    /// All vertices reachable from `start` (including it).
    pub fn reachable_from(&self, start: Vid) -> BTreeSet<Vid> {
        let inc = self.incidence();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &e in &inc.out_edges[v] {
                let w = self.edges[e].dst;
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// The part or component a vertex stands for; segments resolve to their origin.
    pub fn origin_of(&self, vid: Vid) -> Vid {
        match self.vertices[vid].segment {
            Some(s) => s.origin_vid,
            None => vid,
        }
    }
}

pub(crate) fn cmp_keys(a: (f64, Vid), b: (f64, Vid)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy(n: usize, edges: &[(Vid, Vid)]) -> StructureGraph {
        StructureGraph {
            sim_id: "toy".into(),
            method: ExtractionMethod::Spbg,
            segmented: false,
            impact_direction: [1.0, 0.0, 0.0],
            vertices: (0..n)
                .map(|vid| Vertex {
                    vid,
                    kind: VertexKind::Part,
                    pid: Some(vid as Pid + 1),
                    cid: None,
                    name: format!("v{vid}"),
                    members: vec![],
                    center: [vid as f64, 0.0, 0.0],
                    features: None,
                    segment: None,
                })
                .collect(),
            edges: edges.iter().map(|&(s, d)| Edge::new(s, d, Provenance::ComponentLink)).collect(),
        }
    }

    #[test]
    fn topological_order_and_cycle() {
        let g = toy(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        assert_eq!(g.topological_order(), Some(vec![0, 1, 2, 3]));
        assert!(g.validate().is_ok());

        let mut cyc = toy(3, &[(0, 1), (1, 2), (2, 0)]);
        cyc.segmented = true;
        assert_eq!(cyc.validate(), Err(GraphError::Cyclic));
    }

    #[test]
    fn validate_rejects_malformed_edges() {
        assert_eq!(toy(2, &[(1, 0)]).validate(), Err(GraphError::AgainstImpactOrder(1, 0)));
        assert_eq!(toy(2, &[(0, 1), (0, 1)]).validate(), Err(GraphError::DuplicateEdge(0, 1)));
        assert_eq!(toy(2, &[(0, 5)]).validate(), Err(GraphError::DanglingEdge { edge: 0, vid: 5 }));
        let mut g = toy(2, &[(0, 1)]);
        g.edges[0].weights.f_ie = Some(f64::INFINITY);
        assert_eq!(g.validate(), Err(GraphError::NonFiniteWeight { edge: 0, kind: "f_ie" }));
    }

    #[test]
    fn weight_kind_parsing() {
        assert_eq!("s_pe".parse::<WeightKind>(), Ok(WeightKind::SPe));
        assert_eq!("MPBG".parse::<ExtractionMethod>(), Ok(ExtractionMethod::Mpbg));
        assert!("x".parse::<WeightKind>().is_err());
    }
}
