//! Parametric frontal-structure bundles.
//!
//! The `Frontal27` layout is a barrier-side impactor, a three-plate bumper
//! spanning both sides, and per side a crash-box and a front and rear
//! side-member made of stacked plates, tied together by a front and a rear
//! cross-member and ending at the dash. Its 27 parts group into 11
//! components, and with the default threshold of 10 mm only the intended
//! neighbours are adjacent. The impact runs along +x and +y is the left-hand
//! side. `Mini8` is a four-component chain of eight parts.
//!
//! Every part absorbs energy along `ie_max · clamp((t − t0)/d, 0, 1)²`.
//! A part of stiffness `k` absorbs `ie_max ∝ 1/k` over a duration
//! `d ∝ k`. A component's onset, the instant its parts reach 2% of their
//! energy, follows the onsets of the components feeding it by a fraction of
//! their duration, so stiffer sides reach the rear of the structure later.
//! Parts fed by the same component share their onset whatever their
//! stiffness.
//!
//! The default sweep has 66 simulations:
//! - `analog_0`..`analog_5` are symmetric, with `analog_3` at nominal stiffness;
//! - the rest come in mirrored pairs `(2m, 2m + 1)` whose left and right
//!   multipliers are swapped; the even member has the stiffer left side.
//!   `analog_30` has a soft right side and `analog_60` a stiff left side.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Box3, Vec3};
use crate::sim_io::{EnergyCurve, PartRecord, Pid, SimulationBundle, Units};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Frontal27,
    Mini8,
}

impl std::str::FromStr for Layout {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "frontal27" => Ok(Layout::Frontal27),
            "mini8" => Ok(Layout::Mini8),
            other => Err(format!("unknown layout {other:?}, expected frontal27 or mini8")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub layout: Layout,
    pub n_sims: usize,
    pub seed: u64,
    /// `(lhs, rhs)` multipliers for every simulation instead of the sweep.
    pub stiffness: Option<(f64, f64)>,
    /// Relative amplitude of the per-part energy and per-component duration
    /// perturbation. Mirrored parts share their perturbation.
    pub jitter: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { layout: Layout::Frontal27, n_sims: SWEEP_LEN, seed: 0, stiffness: None, jitter: 0.03 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("n_sims must be at least 1")]
    NoSims,
    #[error("stiffness multipliers must be positive and finite, got {0}")]
    NonPositiveStiffness(f64),
    #[error("jitter must lie in [0, 0.2], got {0}")]
    InvalidJitter(f64),
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_sims == 0 {
            return Err(ConfigError::NoSims);
        }
        if let Some((l, r)) = self.stiffness {
            for k in [l, r] {
                if !(k.is_finite() && k > 0.0) {
                    return Err(ConfigError::NonPositiveStiffness(k));
                }
            }
        }
        if !(0.0..=0.2).contains(&self.jitter) {
            return Err(ConfigError::InvalidJitter(self.jitter));
        }
        Ok(())
    }
}

/// Number of simulations in the reference sweep.
pub const SWEEP_LEN: usize = 66;
/// Stiffness multipliers of the symmetric simulations.
pub const SYMMETRIC_LEVELS: [f64; 6] = [0.7, 0.8, 0.9, 1.0, 1.15, 1.3];
/// Multiplier grid of the asymmetric pairs.
pub const PAIR_LEVELS: [f64; 9] = [0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4];
/// `(pair index, lhs, rhs)` pinned in the sweep.
const PINNED: [(usize, f64, f64); 2] = [(12, 1.0, 0.7), (27, 1.3, 1.0)];
const TIME_STEP: f64 = 0.25;
/// Onset of the first group, the time its parts reach 2% of their energy.
const FIRST_ONSET: f64 = 2.0;
/// Fraction of the ramp duration before a part reaches 2% of its energy,
/// `sqrt(0.02)` for the quadratic ramp.
const ONSET_LEAD: f64 = 0.141_421_356_237_309_5;

pub fn sim_id(index: usize) -> String {
    format!("analog_{index}")
}

/// `(lhs, rhs)` stiffness multipliers of every simulation.
pub fn stiffness_plan(cfg: &SynthConfig) -> Result<Vec<(f64, f64)>, ConfigError> {
    cfg.validate()?;
    if let Some(k) = cfg.stiffness {
        return Ok(vec![k; cfg.n_sims]);
    }
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for hi in 0..PAIR_LEVELS.len() {
        for lo in 0..hi {
            let (l, r) = (PAIR_LEVELS[hi], PAIR_LEVELS[lo]);
            if hi - lo <= 5 && !PINNED.iter().any(|&(_, pl, pr)| pl == l && pr == r) {
                pairs.push((l, r));
            }
        }
    }
    pairs.shuffle(&mut rng(cfg.seed, u64::MAX));
    for &(at, l, r) in &PINNED {
        pairs.insert(at, (l, r));
    }

    let mut plan: Vec<(f64, f64)> = SYMMETRIC_LEVELS.iter().map(|&k| (k, k)).collect();
    for &(l, r) in &pairs {
        plan.push((l, r));
        plan.push((r, l));
    }
    debug_assert_eq!(plan.len(), SWEEP_LEN);
    let mut extra = rng(cfg.seed, u64::MAX - 1);
    while plan.len() < cfg.n_sims {
        let l = *PAIR_LEVELS.choose(&mut extra).unwrap();
        let r = *PAIR_LEVELS.choose(&mut extra).unwrap();
        plan.push((l, r));
    }
    plan.truncate(cfg.n_sims);
    Ok(plan)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Stream of the perturbation of simulation `index`; mirrored pairs share it.
fn jitter_stream(index: usize) -> u64 {
    let sym = SYMMETRIC_LEVELS.len();
    if index < sym || index >= SWEEP_LEN {
        index as u64
    } else {
        (sym + (index - sym) / 2 * 2) as u64
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<Vec<SimulationBundle>, ConfigError> {
    let plan = stiffness_plan(cfg)?;
    let layout = LayoutSpec::new(cfg.layout);
    Ok(plan
        .iter()
        .enumerate()
        .map(|(i, &(l, r))| layout.bundle(sim_id(i), l, r, cfg.jitter, &mut rng(cfg.seed, jitter_stream(i))))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Lat {
    Left,
    Right,
    Center,
}

struct PartSpec {
    name: String,
    bbox: Box3,
    group: usize,
    energy: f64,
    /// Index of the left-hand counterpart of a right-hand part.
    twin: Option<usize>,
}

struct GroupSpec {
    lat: Lat,
    duration: f64,
    /// Groups whose onsets this group waits for.
    after: Vec<usize>,
    /// Fraction of each predecessor's duration waited after its onset.
    lag: f64,
    twin: Option<usize>,
}

struct LayoutSpec {
    parts: Vec<PartSpec>,
    groups: Vec<GroupSpec>,
    mirrored: bool,
}

fn bx(x: [f64; 2], y: [f64; 2], z: [f64; 2]) -> Box3 {
    Box3::new([x[0], y[0], z[0]], [x[1], y[1], z[1]]).expect("layout boxes are ordered")
}

fn flip(b: &Box3) -> Box3 {
    Box3::new([b.min[0], -b.max[1], b.min[2]], [b.max[0], -b.min[1], b.max[2]]).unwrap()
}

impl LayoutSpec {
    fn new(layout: Layout) -> Self {
        match layout {
            Layout::Frontal27 => Self::frontal27(),
            Layout::Mini8 => Self::mini8(),
        }
    }

    fn group(&mut self, lat: Lat, duration: f64, after: &[usize], lag: f64) -> usize {
        self.groups.push(GroupSpec { lat, duration, after: after.to_vec(), lag, twin: None });
        self.groups.len() - 1
    }

    /// Adds a left/right pair of groups; the right one waits for the mirror
    /// images of the left one's predecessors.
    fn side_groups(&mut self, duration: f64, after: &[usize], lag: f64) -> (usize, usize) {
        let l = self.group(Lat::Left, duration, after, lag);
        let mirrored: Vec<usize> = after.iter().map(|&g| self.groups[g].twin.unwrap_or(g)).collect();
        let r = self.group(Lat::Right, duration, &mirrored, lag);
        self.groups[l].twin = Some(r);
        self.groups[r].twin = Some(l);
        (l, r)
    }

    fn part(&mut self, name: &str, bbox: Box3, group: usize, energy: f64) {
        self.parts.push(PartSpec { name: name.into(), bbox, group, energy, twin: None });
    }

    /// Adds `{name}_l` in group `l` and its mirror `{name}_r` in group `r`.
    fn side_parts(&mut self, specs: &[(&str, Box3, f64)], (l, r): (usize, usize)) {
        let start = self.parts.len();
        for &(name, b, e) in specs {
            self.part(&format!("{name}_l"), b, l, e);
        }
        for (i, &(name, b, e)) in specs.iter().enumerate() {
            self.parts.push(PartSpec { name: format!("{name}_r"), bbox: flip(&b), group: r, energy: e, twin: Some(start + i) });
        }
    }

    fn frontal27() -> Self {
        let mut s = Self { parts: vec![], groups: vec![], mirrored: true };
        let impactor = s.group(Lat::Center, 10.0, &[], 0.15);
        let bumper = s.group(Lat::Center, 20.0, &[impactor], 0.15);
        let crashbox = s.side_groups(20.0, &[bumper], 0.15);
        let sm_front = s.side_groups(30.0, &[crashbox.0], 0.5);
        let sm_rear = s.side_groups(30.0, &[sm_front.0], 0.5);
        let cm_front = s.group(Lat::Center, 8.0, &[sm_front.0, sm_front.1], 0.15);
        let cm_rear = s.group(Lat::Center, 8.0, &[sm_rear.0, sm_rear.1], 0.15);
        let dash = s.group(Lat::Center, 10.0, &[sm_rear.0, sm_rear.1], 0.15);

        s.part("impactor", bx([0.0, 20.0], [-700.0, 700.0], [0.0, 600.0]), impactor, 1.0);
        s.part("bumper_beam_front", bx([25.0, 85.0], [-650.0, 650.0], [300.0, 420.0]), bumper, 3.0);
        s.part("bumper_beam_rear", bx([70.0, 125.0], [-640.0, 640.0], [310.0, 410.0]), bumper, 2.0);
        s.part("bumper_reinf", bx([30.0, 65.0], [-600.0, 600.0], [320.0, 400.0]), bumper, 1.0);
        s.side_parts(
            &[
                ("crashbox_outer", bx([130.0, 330.0], [480.0, 560.0], [320.0, 400.0]), 6.0),
                ("crashbox_inner", bx([130.0, 330.0], [450.0, 510.0], [320.0, 400.0]), 4.0),
            ],
            crashbox,
        );
        s.side_parts(
            &[
                ("sm_front_outer", bx([335.0, 835.0], [500.0, 570.0], [300.0, 420.0]), 5.0),
                ("sm_front_inner", bx([335.0, 835.0], [440.0, 520.0], [300.0, 420.0]), 5.0),
                ("sm_front_reinf1", bx([335.0, 835.0], [525.0, 565.0], [310.0, 410.0]), 2.0),
                ("sm_front_reinf2", bx([600.0, 800.0], [445.0, 495.0], [310.0, 410.0]), 2.0),
            ],
            sm_front,
        );
        s.side_parts(
            &[
                ("sm_rear_outer", bx([840.0, 1340.0], [490.0, 570.0], [280.0, 400.0]), 3.0),
                ("sm_rear_inner", bx([840.0, 1340.0], [440.0, 500.0], [280.0, 400.0]), 3.0),
                ("sm_rear_reinf", bx([900.0, 1300.0], [500.0, 560.0], [290.0, 390.0]), 1.5),
            ],
            sm_rear,
        );
        s.part("cm_front_upper", bx([600.0, 700.0], [-435.0, 435.0], [360.0, 420.0]), cm_front, 1.0);
        s.part("cm_front_lower", bx([600.0, 700.0], [-435.0, 435.0], [300.0, 370.0]), cm_front, 1.0);
        s.part("cm_rear_upper", bx([1100.0, 1200.0], [-435.0, 435.0], [340.0, 400.0]), cm_rear, 0.8);
        s.part("cm_rear_lower", bx([1100.0, 1200.0], [-435.0, 435.0], [280.0, 350.0]), cm_rear, 0.8);
        s.part("dash", bx([1345.0, 1365.0], [-700.0, 700.0], [200.0, 700.0]), dash, 2.0);
        s
    }

    fn mini8() -> Self {
        let mut s = Self { parts: vec![], groups: vec![], mirrored: false };
        // the two middle components scale with the lhs multiplier
        let a = s.group(Lat::Center, 10.0, &[], 0.15);
        let b = s.group(Lat::Left, 20.0, &[a], 0.15);
        let c = s.group(Lat::Left, 20.0, &[b], 0.5);
        let d = s.group(Lat::Center, 10.0, &[c], 0.5);
        s.part("front_plate", bx([0.0, 10.0], [-50.0, 50.0], [0.0, 50.0]), a, 1.0);
        s.part("beam_main", bx([15.0, 75.0], [-40.0, 40.0], [0.0, 40.0]), b, 3.0);
        s.part("beam_inner", bx([20.0, 60.0], [-30.0, 30.0], [5.0, 35.0]), b, 1.0);
        s.part("beam_cap", bx([65.0, 95.0], [-40.0, 40.0], [0.0, 40.0]), b, 1.5);
        s.part("rail_a", bx([100.0, 160.0], [-40.0, 0.0], [0.0, 40.0]), c, 2.0);
        s.part("rail_b", bx([100.0, 160.0], [-10.0, 40.0], [0.0, 40.0]), c, 2.0);
        s.part("end_plate", bx([165.0, 185.0], [-50.0, 50.0], [0.0, 50.0]), d, 1.0);
        s.part("end_tab", bx([170.0, 180.0], [-20.0, 20.0], [10.0, 40.0]), d, 0.5);
        s
    }

    fn bundle(&self, sim_id: String, lhs: f64, rhs: f64, jitter: f64, rng: &mut ChaCha8Rng) -> SimulationBundle {
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| 1.0 + jitter * rng.gen_range(-1.0..=1.0)).collect() };
        let e_jit = draw(self.parts.len());
        let d_jit = draw(self.groups.len());
        let e_factor = |i: usize| e_jit[self.parts[i].twin.unwrap_or(i)];
        let d_factor = |g: usize| {
            let canonical = match self.groups[g].lat {
                Lat::Right => self.groups[g].twin.unwrap_or(g),
                _ => g,
            };
            d_jit[canonical]
        };
        let k_of = |g: usize| match self.groups[g].lat {
            Lat::Left => lhs,
            Lat::Right => rhs,
            Lat::Center => 1.0,
        };

        // groups are declared after their predecessors
        let mut onset = vec![0.0; self.groups.len()];
        let mut dur = vec![0.0; self.groups.len()];
        for (g, spec) in self.groups.iter().enumerate() {
            dur[g] = spec.duration * k_of(g) * d_factor(g);
            onset[g] = spec
                .after
                .iter()
                .map(|&p| onset[p] + spec.lag * dur[p] + 1.0)
                .fold(FIRST_ONSET, f64::max);
            // on a sample, so the onset is read off the curve exactly
            onset[g] = (onset[g] / TIME_STEP).ceil() * TIME_STEP;
        }
        let t0: Vec<f64> = onset.iter().zip(&dur).map(|(o, d)| o - ONSET_LEAD * d).collect();
        let t_end = self.groups.iter().enumerate().map(|(g, _)| t0[g] + dur[g]).fold(0.0, f64::max);
        let steps = ((t_end + 10.0) / 10.0).ceil() as usize * (10.0 / TIME_STEP) as usize;
        let times: Vec<f64> = (0..=steps).map(|i| i as f64 * TIME_STEP).collect();

        let parts = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let g = p.group;
                let ie_max = p.energy * e_factor(i) / k_of(g);
                PartRecord {
                    pid: i as Pid + 1,
                    name: p.name.clone(),
                    bbox: p.bbox,
                    ie_curve: ramp(&times, ie_max, t0[g], dur[g]),
                }
            })
            .collect();
        let symmetry_map = self
            .parts
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.twin.map(|t| (t as Pid + 1, i as Pid + 1)))
            .collect();
        SimulationBundle {
            sim_id,
            impact_direction: IMPACT,
            units: Units::default(),
            parts,
            symmetry_map: Some(if self.mirrored { symmetry_map } else { vec![] }),
        }
    }
}

const IMPACT: Vec3 = [1.0, 0.0, 0.0];

/// `ie_max · clamp((t − t0)/d, 0, 1)²` sampled at `times`.
pub fn ramp(times: &[f64], ie_max: f64, t0: f64, d: f64) -> EnergyCurve {
    let values = times.iter().map(|&t| ie_max * ((t - t0) / d).clamp(0.0, 1.0).powi(2)).collect();
    EnergyCurve::new(times.to_vec(), values).expect("ramp is a valid curve")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{group_components, GroupingConfig};

    #[test]
    fn sweep_has_the_reference_simulations() {
        let plan = stiffness_plan(&SynthConfig::default()).unwrap();
        assert_eq!(plan.len(), 66);
        assert_eq!(plan[3], (1.0, 1.0));
        assert_eq!(plan[30], (1.0, 0.7));
        assert_eq!(plan[31], (0.7, 1.0));
        assert_eq!(plan[60], (1.3, 1.0));
        assert_eq!(plan[61], (1.0, 1.3));
        for m in 0..30 {
            let (a, b) = (plan[6 + 2 * m], plan[7 + 2 * m]);
            assert_eq!(a, (b.1, b.0));
            assert!(a.0 > a.1);
        }
        let mut distinct: Vec<_> = plan[6..].iter().map(|&(l, r)| (l.to_bits(), r.to_bits())).collect();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 60);
    }

    #[test]
    fn frontal_layout_groups_into_eleven_components() {
        for b in generate(&SynthConfig { n_sims: 8, ..SynthConfig::default() }).unwrap() {
            b.validate().unwrap();
            assert_eq!(b.parts.len(), 27);
            assert_eq!(group_components(&b.parts, &GroupingConfig::default()).unwrap().len(), 11);
        }
    }

    #[test]
    fn mini_layout_is_a_four_component_chain() {
        let b = &generate(&SynthConfig { layout: Layout::Mini8, n_sims: 1, ..SynthConfig::default() }).unwrap()[0];
        assert_eq!(b.parts.len(), 8);
        assert_eq!(group_components(&b.parts, &GroupingConfig::default()).unwrap().len(), 4);
    }

    #[test]
    fn symmetric_analog_has_identical_sides() {
        let all = generate(&SynthConfig { n_sims: 4, ..SynthConfig::default() }).unwrap();
        let b = &all[3];
        for &(l, r) in b.symmetry_map.as_ref().unwrap() {
            assert_eq!(b.part(l).unwrap().ie_curve, b.part(r).unwrap().ie_curve);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = SynthConfig { n_sims: 0, ..SynthConfig::default() };
        assert_eq!(generate(&bad).unwrap_err(), ConfigError::NoSims);
        let bad = SynthConfig { stiffness: Some((1.0, 0.0)), ..SynthConfig::default() };
        assert_eq!(generate(&bad).unwrap_err(), ConfigError::NonPositiveStiffness(0.0));
        let bad = SynthConfig { jitter: 0.5, ..SynthConfig::default() };
        assert_eq!(generate(&bad).unwrap_err(), ConfigError::InvalidJitter(0.5));
    }
}
