use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, write_atomic, Error, Result};
use crate::geometry::{norm, Box3, Vec3};

pub type Pid = u32;

/// Internal-energy history of one part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl EnergyCurve {
    /// Checks length, finiteness, strictly increasing times, non-negative
    /// values and monotonicity within `1e-6 * max(values)`.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> std::result::Result<Self, String> {
        if times.len() != values.len() {
            return Err(format!("times has {} samples but values has {}", times.len(), values.len()));
        }
        if times.len() < 2 {
            return Err("a curve needs at least 2 samples".into());
        }
        if let Some(i) = times.iter().chain(&values).position(|v| !v.is_finite()) {
            return Err(format!("non-finite sample at position {i}"));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(format!("times not strictly increasing at index {}", i + 1));
        }
        if let Some(i) = values.iter().position(|&v| v < 0.0) {
            return Err(format!("negative energy {} at index {i}", values[i]));
        }
        let peak = values.iter().copied().fold(0.0, f64::max);
        let tol = 1e-6 * peak;
        let mut running = values[0];
        for (i, &v) in values.iter().enumerate() {
            if v < running - tol {
                return Err(format!("energy drops from {running} to {v} at index {i}"));
            }
            running = running.max(v);
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartRecord {
    pub pid: Pid,
    pub name: String,
    pub bbox: Box3,
    pub ie_curve: EnergyCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub length: String,
    pub time: String,
    pub energy: String,
}

impl Default for Units {
    fn default() -> Self {
        Self { length: "mm".into(), time: "ms".into(), energy: "kJ".into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationBundle {
    pub sim_id: String,
    pub impact_direction: Vec3,
    pub units: Units,
    pub parts: Vec<PartRecord>,
    pub symmetry_map: Option<Vec<(Pid, Pid)>>,
}

impl SimulationBundle {
    pub fn part(&self, pid: Pid) -> Option<&PartRecord> {
        self.parts.iter().find(|p| p.pid == pid)
    }

    /// Checks every invariant of the bundle and its parts.
    pub fn validate(&self) -> Result<()> {
        if self.sim_id.is_empty() {
            return Err(Error::validation(None, "sim_id", "must not be empty"));
        }
        let n = norm(self.impact_direction);
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::validation(None, "impact_direction", format!("norm is {n}, expected 1")));
        }
        if self.parts.len() < 2 {
            return Err(Error::validation(None, "parts", format!("need at least 2 parts, got {}", self.parts.len())));
        }
        let mut seen = BTreeSet::new();
        for p in &self.parts {
            if p.pid == 0 {
                return Err(Error::validation(Some(p.pid), "pid", "must be positive"));
            }
            if !seen.insert(p.pid) {
                return Err(Error::validation(Some(p.pid), "pid", format!("duplicate pid {}", p.pid)));
            }
            if p.name.trim().is_empty() {
                return Err(Error::validation(Some(p.pid), "name", "must not be empty"));
            }
            if Box3::new(p.bbox.min, p.bbox.max).is_none() {
                return Err(Error::validation(Some(p.pid), "box", "min must not exceed max"));
            }
        }
        if let Some(pairs) = &self.symmetry_map {
            let mut used = BTreeSet::new();
            for &(a, b) in pairs {
                for pid in [a, b] {
                    if !seen.contains(&pid) {
                        return Err(Error::validation(Some(pid), "symmetry_map", "unknown pid"));
                    }
                }
                if !used.insert(a) || (a != b && !used.insert(b)) {
                    return Err(Error::validation(Some(a), "symmetry_map", "pid paired more than once"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    min: Vec3,
    max: Vec3,
}

#[derive(Serialize, Deserialize)]
struct RawCurve {
    times: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPart {
    pid: i64,
    name: String,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    bbox: Option<RawBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<Vec3>>,
    ie_curve: RawCurve,
}

#[derive(Serialize, Deserialize)]
struct RawBundle {
    sim_id: String,
    impact_direction: Vec3,
    units: Units,
    parts: Vec<RawPart>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetry_map: Option<Vec<(i64, i64)>>,
}

fn to_pid(raw: i64, field: &str) -> Result<Pid> {
    Pid::try_from(raw)
        .ok()
        .filter(|&p| p > 0)
        .ok_or_else(|| Error::validation(None, field, format!("pid {raw} is not a positive integer")))
}

impl TryFrom<RawBundle> for SimulationBundle {
    type Error = Error;

    fn try_from(raw: RawBundle) -> Result<Self> {
        let mut parts = Vec::with_capacity(raw.parts.len());
        for rp in raw.parts {
            let pid = to_pid(rp.pid, "pid")?;
            let bbox = match (rp.bbox, rp.nodes) {
                (Some(b), _) => Box3::new(b.min, b.max)
                    .ok_or_else(|| Error::validation(Some(pid), "box", "min must not exceed max"))?,
                (None, Some(nodes)) => Box3::from_points(&nodes)
                    .ok_or_else(|| Error::validation(Some(pid), "nodes", "need at least one finite node"))?,
                (None, None) => return Err(Error::validation(Some(pid), "box", "missing box and nodes")),
            };
            let ie_curve = EnergyCurve::new(rp.ie_curve.times, rp.ie_curve.values)
                .map_err(|m| Error::validation(Some(pid), "ie_curve", m))?;
            parts.push(PartRecord { pid, name: rp.name, bbox, ie_curve });
        }
        let symmetry_map = raw
            .symmetry_map
            .map(|pairs| {
                pairs
                    .into_iter()
                    .map(|(a, b)| Ok((to_pid(a, "symmetry_map")?, to_pid(b, "symmetry_map")?)))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let bundle = SimulationBundle {
            sim_id: raw.sim_id,
            impact_direction: raw.impact_direction,
            units: raw.units,
            parts,
            symmetry_map,
        };
        bundle.validate()?;
        Ok(bundle)
    }
}

impl From<&SimulationBundle> for RawBundle {
    fn from(b: &SimulationBundle) -> Self {
        RawBundle {
            sim_id: b.sim_id.clone(),
            impact_direction: b.impact_direction,
            units: b.units.clone(),
            parts: b
                .parts
                .iter()
                .map(|p| RawPart {
                    pid: p.pid as i64,
                    name: p.name.clone(),
                    bbox: Some(RawBox { min: p.bbox.min, max: p.bbox.max }),
                    nodes: None,
                    ie_curve: RawCurve { times: p.ie_curve.times.clone(), values: p.ie_curve.values.clone() },
                })
                .collect(),
            symmetry_map: b
                .symmetry_map
                .as_ref()
                .map(|m| m.iter().map(|&(a, c)| (a as i64, c as i64)).collect()),
        }
    }
}

/// Parses and validates a bundle from JSON text. `origin` only labels errors.
pub fn parse_bundle(text: &str, origin: &Path) -> Result<SimulationBundle> {
    let raw: RawBundle =
        serde_json::from_str(text).map_err(|source| Error::Parse { path: origin.to_path_buf(), source })?;
    SimulationBundle::try_from(raw)
}

pub fn load_bundle(path: &Path) -> Result<SimulationBundle> {
    parse_bundle(&read_to_string(path)?, path)
}

pub fn to_json(bundle: &SimulationBundle) -> String {
    let mut s = serde_json::to_string_pretty(&RawBundle::from(bundle)).expect("bundle serializes");
    s.push('\n');
    s
}

pub fn save_bundle(bundle: &SimulationBundle, path: &Path) -> Result<()> {
    bundle.validate()?;
    write_atomic(path, to_json(bundle).as_bytes())
}
