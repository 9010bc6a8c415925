//! Axis-aligned box arithmetic and grouping of parts into components.
//!
//! Parts are grouped by box overlap. For every pair of parts the overlap
//! ratio `r = vol(a ∩ b) / min(vol(a), vol(b))` decides whether the smaller
//! box is fully contained in the larger one ([`MergeKind::Full`]), partially
//! overlaps it ([`MergeKind::Partial`]) or stays separate. Merged pairs are
//! joined with union-find, so grouping is transitive.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim_io::{PartRecord, Pid};

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Axis-aligned box given by its min and max corners.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub min: Vec3,
    pub max: Vec3,
}

impl Box3 {
    /// Returns `None` if any `min[k] > max[k]` or a coordinate is not finite.
    pub fn new(min: Vec3, max: Vec3) -> Option<Self> {
        let ok = (0..3).all(|k| min[k].is_finite() && max[k].is_finite() && min[k] <= max[k]);
        ok.then_some(Self { min, max })
    }

    /// Tight bound of a point cloud.
    pub fn from_points(points: &[Vec3]) -> Option<Self> {
        let first = *points.first()?;
        let mut b = Self { min: first, max: first };
        for p in &points[1..] {
            for k in 0..3 {
                b.min[k] = b.min[k].min(p[k]);
                b.max[k] = b.max[k].max(p[k]);
            }
        }
        Self::new(b.min, b.max)
    }

    pub fn extent(&self) -> Vec3 {
        sub(self.max, self.min)
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e[0] * e[1] * e[2]
    }

    pub fn center(&self) -> Vec3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    pub fn contains(&self, other: &Box3) -> bool {
        (0..3).all(|k| self.min[k] <= other.min[k] && other.max[k] <= self.max[k])
    }

    /// Smallest box containing both.
    pub fn union(&self, other: &Box3) -> Box3 {
        let mut out = *self;
        for k in 0..3 {
            out.min[k] = out.min[k].min(other.min[k]);
            out.max[k] = out.max[k].max(other.max[k]);
        }
        out
    }
}

/// Volume of `a ∩ b`; zero when the boxes are disjoint or only touch.
pub fn intersection_volume(a: &Box3, b: &Box3) -> f64 {
    let mut v = 1.0;
    for k in 0..3 {
        let lo = a.min[k].max(b.min[k]);
        let hi = a.max[k].min(b.max[k]);
        if hi <= lo {
            return 0.0;
        }
        v *= hi - lo;
    }
    v
}

/// Euclidean length of the per-axis separation between two boxes.
/// Zero iff the boxes touch or overlap.
pub fn gap_distance(a: &Box3, b: &Box3) -> f64 {
    let mut g = [0.0; 3];
    for k in 0..3 {
        g[k] = (a.min[k].max(b.min[k]) - a.max[k].min(b.max[k])).max(0.0);
    }
    norm(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeKind {
    Full,
    Partial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub child_pid: Pid,
    pub parent_pid: Pid,
    pub kind: MergeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub cid: usize,
    /// Sorted ascending.
    pub member_pids: Vec<Pid>,
    /// Largest member by (volume desc, pid asc).
    pub representative: Pid,
    pub bbox: Box3,
    pub center: Vec3,
    pub merge_log: Vec<MergeEvent>,
}

impl Component {
    pub fn contains(&self, pid: Pid) -> bool {
        self.member_pids.binary_search(&pid).is_ok()
    }

    /// Parts that took part in at least one partial merge, sorted.
    pub fn partial_members(&self) -> Vec<Pid> {
        let mut out: Vec<Pid> = self
            .merge_log
            .iter()
            .filter(|e| e.kind == MergeKind::Partial)
            .flat_map(|e| [e.child_pid, e.parent_pid])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn has_partial_merge(&self) -> bool {
        self.merge_log.iter().any(|e| e.kind == MergeKind::Partial)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupingConfig {
    pub full_threshold: f64,
    pub partial_threshold: f64,
    /// Volumes below this are treated as degenerate (length³).
    pub eps_vol: f64,
    pub allow_degenerate: bool,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        Self {
            full_threshold: 0.99,
            partial_threshold: 0.05,
            eps_vol: 1e-9,
            allow_degenerate: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GroupingError {
    #[error("no parts to group")]
    Empty,
    #[error("invalid grouping config: {0}")]
    InvalidConfig(String),
    #[error("part {pid} has degenerate box volume {volume:e}")]
    DegenerateGeometry { pid: Pid, volume: f64 },
}

impl GroupingConfig {
    pub fn validate(&self) -> Result<(), GroupingError> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.full_threshold) || !in_unit(self.partial_threshold) {
            return Err(GroupingError::InvalidConfig(format!(
                "thresholds must lie in [0,1], got full={} partial={}",
                self.full_threshold, self.partial_threshold
            )));
        }
        if self.partial_threshold > self.full_threshold {
            return Err(GroupingError::InvalidConfig(format!(
                "partial_threshold {} exceeds full_threshold {}",
                self.partial_threshold, self.full_threshold
            )));
        }
        if !(self.eps_vol.is_finite() && self.eps_vol > 0.0) {
            return Err(GroupingError::InvalidConfig(format!("eps_vol must be > 0, got {}", self.eps_vol)));
        }
        Ok(())
    }
}

/// Total order used to pick parents and representatives: larger volume
/// first, smaller pid on ties.
pub(crate) fn size_order(a: (f64, Pid), b: (f64, Pid)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Partitions `parts` into components by pairwise box overlap.
///
/// Components are numbered by the size order of their representative, so
/// the result does not depend on the input order.
pub fn group_components(parts: &[PartRecord], cfg: &GroupingConfig) -> Result<Vec<Component>, GroupingError> {
    cfg.validate()?;
    if parts.is_empty() {
        return Err(GroupingError::Empty);
    }
    if !cfg.allow_degenerate {
        if let Some(p) = parts.iter().find(|p| p.bbox.volume() < cfg.eps_vol) {
            return Err(GroupingError::DegenerateGeometry { pid: p.pid, volume: p.bbox.volume() });
        }
    }

    let mut order: Vec<&PartRecord> = parts.iter().collect();
    order.sort_by(|a, b| size_order((a.bbox.volume(), a.pid), (b.bbox.volume(), b.pid)));

    let n = order.len();
    let mut uf = UnionFind::<usize>::new(n);
    let mut events: Vec<(usize, MergeEvent)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (parent, child) = (order[i], order[j]);
            let inter = intersection_volume(&parent.bbox, &child.bbox);
            if inter <= 0.0 {
                continue;
            }
            let denom = parent.bbox.volume().min(child.bbox.volume()).max(cfg.eps_vol);
            let r = inter / denom;
            let kind = if r >= cfg.full_threshold {
                MergeKind::Full
            } else if r >= cfg.partial_threshold {
                MergeKind::Partial
            } else {
                continue;
            };
            uf.union(i, j);
            events.push((i, MergeEvent { child_pid: child.pid, parent_pid: parent.pid, kind }));
        }
    }

    // Roots keyed by their smallest sorted index, which is the representative.
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut first_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..n {
        let root = uf.find(i);
        let first = *first_of_root.entry(root).or_insert(i);
        groups.entry(first).or_default().push(i);
    }

    let mut components = Vec::with_capacity(groups.len());
    for (cid, (first, members)) in groups.into_iter().enumerate() {
        let root = uf.find(first);
        let bbox = members[1..]
            .iter()
            .fold(order[first].bbox, |acc, &m| acc.union(&order[m].bbox));
        let mut member_pids: Vec<Pid> = members.iter().map(|&m| order[m].pid).collect();
        member_pids.sort_unstable();
        let mut merge_log: Vec<MergeEvent> = events
            .iter()
            .filter(|(i, _)| uf.find(*i) == root)
            .map(|(_, e)| *e)
            .collect();
        merge_log.sort_by_key(|e| (e.parent_pid, e.child_pid));
        components.push(Component {
            cid,
            member_pids,
            representative: order[first].pid,
            center: bbox.center(),
            bbox,
            merge_log,
        });
    }
    Ok(components)
}
