use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{dot, norm, sub, Box3, Vec3};
use crate::graph::{StructureGraph, Vid, VertexKind};
use crate::sim_io::{Pid, SimulationBundle};

/// Horizontal axis orthogonal to the impact direction, with +z as up.
/// Positive values are the left-hand side.
pub fn lateral_axis(impact: Vec3) -> Vec3 {
    let up = [0.0, 0.0, 1.0];
    let c = [
        up[1] * impact[2] - up[2] * impact[1],
        up[2] * impact[0] - up[0] * impact[2],
        up[0] * impact[1] - up[1] * impact[0],
    ];
    let n = norm(c);
    if n < 1e-12 {
        [0.0, 1.0, 0.0]
    } else {
        [c[0] / n, c[1] / n, c[2] / n]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Center,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "LHS",
            Side::Right => "RHS",
            Side::Center => "center",
        })
    }
}

impl Side {
    /// Majority side of the distinct parts along `seq`, measured from the
    /// lateral mid-plane of the graph.
    pub fn of_path(graph: &StructureGraph, seq: &[Vid]) -> Side {
        let axis = lateral_axis(graph.impact_direction);
        let lat: Vec<f64> = graph.vertices.iter().map(|v| dot(v.center, axis)).collect();
        let lo = lat.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        let tol = 1e-6 * (hi - lo).max(f64::MIN_POSITIVE);

        let origins: BTreeSet<Vid> = seq.iter().map(|&v| graph.origin_of(v)).collect();
        let (mut left, mut right) = (0usize, 0usize);
        for v in origins {
            let off = lat[v] - mid;
            if off > tol {
                left += 1;
            } else if off < -tol {
                right += 1;
            }
        }
        match left.cmp(&right) {
            std::cmp::Ordering::Greater => Side::Left,
            std::cmp::Ordering::Less => Side::Right,
            std::cmp::Ordering::Equal => Side::Center,
        }
    }
}

/// LHS/RHS correspondence between parts, by pid and by name. Parts without
/// a partner map to themselves.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NameMirror {
    pids: BTreeMap<Pid, Pid>,
    names: BTreeMap<String, String>,
}

impl NameMirror {
    pub fn from_pairs(bundle: &SimulationBundle, pairs: &[(Pid, Pid)]) -> Self {
        let mut pids = BTreeMap::new();
        for &(a, b) in pairs {
            pids.insert(a, b);
            pids.insert(b, a);
        }
        let name = |pid: Pid| bundle.part(pid).map(|p| p.name.clone());
        let mut names = BTreeMap::new();
        for (&a, &b) in &pids {
            if let (Some(na), Some(nb)) = (name(a), name(b)) {
                names.insert(na, nb);
            }
        }
        Self { pids, names }
    }

    /// Uses the bundle's symmetry map when present, otherwise pairs parts
    /// whose box centers mirror each other across the lateral mid-plane
    /// within `1e-6` of the model extent.
    pub fn from_bundle(bundle: &SimulationBundle) -> Self {
        match &bundle.symmetry_map {
            Some(pairs) => Self::from_pairs(bundle, pairs),
            None => Self::from_pairs(bundle, &infer_pairs(bundle)),
        }
    }

    /// Name correspondence recorded in detected paths, for when the bundles
    /// are no longer at hand. Pids are not recovered.
    pub fn from_paths(paths: &[super::LoadPath]) -> Self {
        let mut names = BTreeMap::new();
        for p in paths {
            if let Some(m) = &p.mirrored_signature {
                for (a, b) in p.signature.iter().zip(m) {
                    if a != b {
                        names.insert(a.clone(), b.clone());
                        names.insert(b.clone(), a.clone());
                    }
                }
            }
        }
        Self { pids: BTreeMap::new(), names }
    }

    pub fn mirror_pid(&self, pid: Pid) -> Pid {
        self.pids.get(&pid).copied().unwrap_or(pid)
    }

    pub fn mirror_name<'a>(&'a self, name: &'a str) -> &'a str {
        self.names.get(name).map(String::as_str).unwrap_or(name)
    }

    pub fn mirror_signature(&self, sig: &[String]) -> Vec<String> {
        sig.iter().map(|s| self.mirror_name(s).to_string()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pids.is_empty() && self.names.is_empty()
    }

    /// Image of every vertex of `graph` under the mirror, where one exists.
    pub fn vertex_map(&self, graph: &StructureGraph) -> Vec<Option<Vid>> {
        let part_vid: BTreeMap<Pid, Vid> = graph
            .vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Part)
            .filter_map(|v| v.pid.map(|p| (p, v.vid)))
            .collect();
        let comp_vid: BTreeMap<Vec<Pid>, Vid> = graph
            .vertices
            .iter()
            .filter(|v| v.kind == VertexKind::Component)
            .map(|v| (v.members.clone(), v.vid))
            .collect();
        let seg_vid: BTreeMap<(Vid, usize), Vid> = graph
            .vertices
            .iter()
            .filter_map(|v| v.segment.map(|s| ((s.origin_vid, s.k), v.vid)))
            .collect();

        let base = |v: Vid| -> Option<Vid> {
            let vx = &graph.vertices[v];
            match vx.kind {
                VertexKind::Part => part_vid.get(&self.mirror_pid(vx.pid?)).copied(),
                VertexKind::Component => {
                    let mut m: Vec<Pid> = vx.members.iter().map(|&p| self.mirror_pid(p)).collect();
                    m.sort_unstable();
                    comp_vid.get(&m).copied()
                }
                VertexKind::Segment => None,
            }
        };
        graph
            .vertices
            .iter()
            .map(|v| match v.segment {
                Some(s) => base(s.origin_vid).and_then(|o| seg_vid.get(&(o, s.k)).copied()),
                None => base(v.vid),
            })
            .collect()
    }
}

fn infer_pairs(bundle: &SimulationBundle) -> Vec<(Pid, Pid)> {
    let axis = lateral_axis(bundle.impact_direction);
    let hull = bundle.parts[1..].iter().fold(bundle.parts[0].bbox, |acc, p| acc.union(&p.bbox));
    let extent = norm(hull.extent());
    let tol = 1e-6 * extent;
    let mid = dot(hull.center(), axis);

    let reflect = |c: Vec3| {
        let off = dot(c, axis) - mid;
        [c[0] - 2.0 * off * axis[0], c[1] - 2.0 * off * axis[1], c[2] - 2.0 * off * axis[2]]
    };
    let centers: Vec<(Pid, Vec3)> = bundle.parts.iter().map(|p| (p.pid, Box3::center(&p.bbox))).collect();
    let mut pairs = Vec::new();
    let mut used = BTreeSet::new();
    for &(pid, c) in &centers {
        if used.contains(&pid) {
            continue;
        }
        let image = reflect(c);
        let partner = centers
            .iter()
            .filter(|(q, _)| *q != pid && !used.contains(q))
            .find(|(_, cq)| norm(sub(*cq, image)) <= tol);
        if let Some(&(q, _)) = partner {
            used.insert(pid);
            used.insert(q);
            pairs.push((pid.min(q), pid.max(q)));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim_io::{EnergyCurve, PartRecord, Units};

    fn part(pid: Pid, name: &str, y0: f64, y1: f64) -> PartRecord {
        PartRecord {
            pid,
            name: name.into(),
            bbox: Box3::new([0.0, y0, 0.0], [1.0, y1, 1.0]).unwrap(),
            ie_curve: EnergyCurve::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(),
        }
    }

    fn bundle(map: Option<Vec<(Pid, Pid)>>) -> SimulationBundle {
        SimulationBundle {
            sim_id: "m".into(),
            impact_direction: [1.0, 0.0, 0.0],
            units: Units::default(),
            parts: vec![part(1, "mid", -1.0, 1.0), part(2, "left", 3.0, 4.0), part(3, "right", -4.0, -3.0)],
            symmetry_map: map,
        }
    }

    #[test]
    fn lateral_axis_for_x_impact_is_plus_y() {
        assert_eq!(lateral_axis([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0]);
        assert_eq!(lateral_axis([0.0, 0.0, 1.0]), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn explicit_and_inferred_maps_agree() {
        let explicit = NameMirror::from_bundle(&bundle(Some(vec![(2, 3)])));
        let inferred = NameMirror::from_bundle(&bundle(None));
        assert_eq!(explicit, inferred);
        assert_eq!(inferred.mirror_name("left"), "right");
        assert_eq!(inferred.mirror_name("mid"), "mid");
        assert_eq!(inferred.mirror_pid(3), 2);
    }
}
