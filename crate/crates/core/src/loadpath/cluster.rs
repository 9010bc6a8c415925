use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mirror::{NameMirror, Side};
use super::{LoadPath, PathError};
use crate::sim_io;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// `A`, `B`, ... by decreasing size.
    pub label: String,
    pub signature: Vec<String>,
    pub members: Vec<String>,
    pub side: Side,
    /// Members on the left-hand side, center paths included.
    pub n_l: usize,
    pub n_r: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired_with: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub clusters: Vec<Cluster>,
    /// `(cluster, mirrored cluster)` with the first index not larger than the
    /// second. Self-mirrored clusters appear as `(i, i)`.
    pub pairing: Vec<(usize, usize)>,
}

impl ClusterReport {
    pub fn cluster_of(&self, sim_id: &str) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.members.iter().any(|m| m == sim_id))
    }

    pub fn modal_size(&self) -> usize {
        self.clusters.iter().map(|c| c.members.len()).max().unwrap_or(0)
    }
}

fn label(i: usize) -> String {
    let mut n = i;
    let mut s = Vec::new();
    loop {
        s.push(b'A' + (n % 26) as u8);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

/// Groups paths by exact signature. With a mirror, each cluster is paired
/// with the cluster holding its mirrored signature.
pub fn cluster(paths: &[LoadPath], mirror: Option<&NameMirror>) -> Result<ClusterReport, PathError> {
    if let Some(first) = paths.first() {
        for p in paths {
            if p.weight_kind != first.weight_kind {
                return Err(PathError::MixedWeightKinds(first.weight_kind, p.weight_kind));
            }
            if p.method != first.method {
                return Err(PathError::MixedMethods(first.method, p.method));
            }
        }
    }

    let mut groups: BTreeMap<&[String], Vec<&LoadPath>> = BTreeMap::new();
    for p in paths {
        groups.entry(p.signature.as_slice()).or_default().push(p);
    }
    let mut ordered: Vec<(&[String], Vec<&LoadPath>)> = groups.into_iter().collect();
    ordered.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));

    let mut clusters: Vec<Cluster> = ordered
        .iter()
        .enumerate()
        .map(|(id, (sig, members))| {
            let n_r = members.iter().filter(|p| p.side == Side::Right).count();
            let mut ids: Vec<String> = members.iter().map(|p| p.sim_id.clone()).collect();
            ids.sort_by_key(|a| natural_key(a));
            Cluster {
                id,
                label: label(id),
                signature: sig.to_vec(),
                members: ids,
                side: members[0].side,
                n_l: members.len() - n_r,
                n_r,
                paired_with: None,
            }
        })
        .collect();

    let mut pairing = Vec::new();
    if let Some(m) = mirror {
        let index: BTreeMap<Vec<String>, usize> = clusters.iter().map(|c| (c.signature.clone(), c.id)).collect();
        for i in 0..clusters.len() {
            let mirrored = m.mirror_signature(&clusters[i].signature);
            if let Some(&j) = index.get(&mirrored) {
                clusters[i].paired_with = Some(j);
                if i <= j {
                    pairing.push((i, j));
                }
            }
        }
    }
    Ok(ClusterReport { clusters, pairing })
}

/// Sorts `analog_2` before `analog_10`.
fn natural_key(s: &str) -> (String, u64, String) {
    let digits_at = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
    let (head, rest) = s.split_at(digits_at);
    let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let num = rest[..end].parse().unwrap_or(0);
    (head.to_string(), num, rest[end..].to_string())
}

/// One row per cluster: `signature,member_ids,n_L,n_R,paired_with`.
/// Signatures are joined with `>` and member ids with `;`.
pub fn write_cluster_csv(report: &ClusterReport, path: &Path) -> sim_io::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let row_err = |e: csv::Error| sim_io::Error::Io { path: path.to_path_buf(), source: e.into() };
    w.write_record(["signature", "member_ids", "n_L", "n_R", "paired_with"]).map_err(row_err)?;
    for c in &report.clusters {
        let paired = c.paired_with.map(|j| report.clusters[j].label.clone()).unwrap_or_default();
        w.write_record([
            c.signature.join(">"),
            c.members.join(";"),
            c.n_l.to_string(),
            c.n_r.to_string(),
            paired,
        ])
        .map_err(row_err)?;
    }
    let bytes = w.into_inner().map_err(|e| sim_io::Error::Io { path: path.to_path_buf(), source: e.into_error() })?;
    sim_io::write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ExtractionMethod, WeightKind};
    use crate::sim_io::{EnergyCurve, PartRecord, SimulationBundle, Units};
    use crate::geometry::Box3;

    fn path(sim: &str, sig: &[&str], side: Side) -> LoadPath {
        LoadPath {
            sim_id: sim.into(),
            method: ExtractionMethod::Mpbg,
            weight_kind: WeightKind::St,
            vertex_sequence: vec![],
            signature: sig.iter().map(|s| s.to_string()).collect(),
            total_weight: 1.0,
            side,
            symmetric: false,
            mirrored_signature: None,
        }
    }

    fn mirror() -> NameMirror {
        let part = |pid, name: &str, y: f64| PartRecord {
            pid,
            name: name.into(),
            bbox: Box3::new([0.0, y, 0.0], [1.0, y + 1.0, 1.0]).unwrap(),
            ie_curve: EnergyCurve::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap(),
        };
        let b = SimulationBundle {
            sim_id: "x".into(),
            impact_direction: [1.0, 0.0, 0.0],
            units: Units::default(),
            parts: vec![part(1, "b", -0.5), part(2, "L", 3.0), part(3, "R", -4.0)],
            symmetry_map: Some(vec![(2, 3)]),
        };
        NameMirror::from_bundle(&b)
    }

    #[test]
    fn identical_signatures_share_a_cluster() {
        let paths = [path("s1", &["b", "L"], Side::Left), path("s2", &["b", "L"], Side::Left)];
        let r = cluster(&paths, None).unwrap();
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].members, vec!["s1", "s2"]);
        assert!(r.pairing.is_empty());
    }

    #[test]
    fn mirrored_signatures_pair_up() {
        let paths = [path("s1", &["b", "L"], Side::Left), path("s2", &["b", "R"], Side::Right)];
        let r = cluster(&paths, Some(&mirror())).unwrap();
        assert_eq!(r.clusters.len(), 2);
        assert_eq!(r.pairing, vec![(0, 1)]);
        let left = r.cluster_of("s1").unwrap();
        let right = r.cluster_of("s2").unwrap();
        assert_eq!((left.n_l, left.n_r), (1, 0));
        assert_eq!((right.n_l, right.n_r), (0, 1));
        assert_eq!(left.paired_with, Some(right.id));
    }

    #[test]
    fn self_mirrored_cluster_pairs_with_itself() {
        let paths = [path("s1", &["b"], Side::Center)];
        let r = cluster(&paths, Some(&mirror())).unwrap();
        assert_eq!(r.pairing, vec![(0, 0)]);
        assert_eq!(r.clusters[0].n_l + r.clusters[0].n_r, 1);
    }

    #[test]
    fn mixed_weights_rejected() {
        let mut other = path("s2", &["b"], Side::Center);
        other.weight_kind = WeightKind::FIe;
        let err = cluster(&[path("s1", &["b"], Side::Center), other], None).unwrap_err();
        assert_eq!(err, PathError::MixedWeightKinds(WeightKind::St, WeightKind::FIe));
    }

    #[test]
    fn labels_and_natural_order() {
        assert_eq!(label(0), "A");
        assert_eq!(label(25), "Z");
        assert_eq!(label(26), "AA");
        let paths = [path("analog_10", &["b"], Side::Center), path("analog_2", &["b"], Side::Center)];
        let r = cluster(&paths, None).unwrap();
        assert_eq!(r.clusters[0].members, vec!["analog_2", "analog_10"]);
    }

    #[test]
    fn csv_has_one_row_per_cluster() {
        let paths = [path("s1", &["b", "L"], Side::Left), path("s2", &["b", "R"], Side::Right)];
        let r = cluster(&paths, Some(&mirror())).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        write_cluster_csv(&r, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "signature,member_ids,n_L,n_R,paired_with");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",B") && lines[2].ends_with(",A"));
    }
}
