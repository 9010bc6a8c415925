//! Graph extraction and load-path detection for crash-simulation part data.
//!
//! A simulation is a set of parts, each with an axis-aligned box and an
//! internal-energy curve. The pipeline is:
//!
//! 1. [`geometry::group_components`] merges overlapping parts into components.
//! 2. [`graph::extract`] connects adjacent components along the impact
//!    direction as a component graph (CBG), a single-part graph (sPBG) or a
//!    multi-part graph (mPBG).
//! 3. [`energy::annotate_features`] distills each curve into `ie_max`, `t_i`
//!    and `t_n`; [`energy::compute_flow`] turns vertex energies into edge flows.
//! 4. [`segment::segment_graph`] splits absorption intervals at successor
//!    onsets, giving the time weight `s_t` and the efficiency weight `s_pe`.
//! 5. [`loadpath::longest_path`] picks the heaviest path, and
//!    [`loadpath::cluster`] groups simulations by identical paths.
//!
//! [`loadpath::detect`] runs all of it for one bundle. [`synth`] generates
//! parametric frontal-structure bundles to try it on.

pub mod cli;
pub mod energy;
pub mod geometry;
pub mod graph;
pub mod loadpath;
pub mod segment;
pub mod sim_io;
pub mod synth;

pub use energy::{AbsorptionFeatures, FeatureConfig, FlowFeature, FlowReport};
pub use geometry::{Box3, Component, GroupingConfig};
pub use graph::{ExtractionConfig, ExtractionMethod, StructureGraph, WeightKind};
pub use loadpath::{ClusterReport, LoadPath, PipelineConfig};
pub use sim_io::{PartRecord, SimulationBundle};
