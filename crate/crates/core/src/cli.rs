//! Command-line front end.
//!
//! Every command writes its outputs atomically plus a run manifest, and
//! exits with 0 on success, 2 when an input or option is invalid, and 3 when
//! a pipeline stage fails. Diagnostics are single lines on standard error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{annotate_features, apply_flows, compute_flow, FeatureConfig, FeatureError, FlowFeature};
use crate::geometry::GroupingConfig;
use crate::graph::{extract, ExtractError, ExtractionConfig, ExtractionMethod, WeightKind};
use crate::loadpath::{cluster, detect_with_graph, write_cluster_csv, DetectError, LoadPath, NameMirror, PipelineConfig};
use crate::segment::{attach_spe, segment_graph};
use crate::sim_io::{self, export_dot, load_bundle, load_graph, save_bundle, save_graph, write_json, DotOptions};
use crate::synth::{generate, Layout, SynthConfig};

/// Environment variable holding the log level.
pub const LOG_ENV: &str = "CRASHGRAPH_LOG";

#[derive(Debug, Parser)]
#[command(name = "crashgraph", version, about = "Graph extraction and load-path detection for crash-simulation part data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Group parts and build the structural graph of a bundle, or of every bundle in a directory.
    Extract {
        input: PathBuf,
        #[command(flatten)]
        graph: GraphOpts,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Attach absorption features and energy-flow weights to a graph.
    Flow {
        graph: PathBuf,
        bundle: PathBuf,
        #[arg(long, default_value = "f_ie", value_parser = parse_feature)]
        feature: FlowFeature,
        #[command(flatten)]
        features: FeatureOpts,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time-segment a weighted graph and attach `s_t` and `s_pe`.
    Segment {
        graph: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Detect the load-path of a bundle, or of every bundle in a directory.
    Detect {
        input: PathBuf,
        #[command(flatten)]
        graph: GraphOpts,
        #[arg(long, default_value = "f_ie")]
        weight: WeightKind,
        #[command(flatten)]
        features: FeatureOpts,
        /// Also write the graph as DOT with the path drawn in red.
        #[arg(long)]
        dot: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Cluster the path files of a directory by identical signatures.
    Cluster {
        dir: PathBuf,
        /// Output prefix; `<prefix>.csv` and `<prefix>.json` are written.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write synthetic bundles, one JSON file per simulation.
    Synth {
        #[arg(long, default_value = "frontal27")]
        layout: Layout,
        #[arg(long, default_value_t = crate::synth::SWEEP_LEN)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GraphOpts {
    #[arg(long, default_value = "mpbg")]
    pub method: ExtractionMethod,
    #[arg(long, default_value_t = 10.0)]
    pub tlv: f64,
    #[arg(long, default_value_t = 0.99)]
    pub full_threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    pub partial_threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FeatureOpts {
    #[arg(long, default_value_t = 0.02)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.95)]
    pub beta: f64,
}

fn parse_feature(s: &str) -> Result<FlowFeature, String> {
    match s {
        "f_ie" | "ie_max" => Ok(FlowFeature::IeMax),
        "f_iedt" | "ie_dt" => Ok(FlowFeature::IeDt),
        other => Err(format!("unknown feature {other:?}, expected f_ie or f_iedt")),
    }
}

impl GraphOpts {
    fn grouping(&self) -> GroupingConfig {
        GroupingConfig {
            full_threshold: self.full_threshold,
            partial_threshold: self.partial_threshold,
            ..GroupingConfig::default()
        }
    }

    fn extraction(&self) -> ExtractionConfig {
        ExtractionConfig { tlv: self.tlv, method: self.method }
    }
}

impl FeatureOpts {
    fn config(&self) -> FeatureConfig {
        FeatureConfig { alpha: self.alpha, beta: self.beta }
    }
}

/// Record of one successful command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

/// A failed command or batch item.
#[derive(Debug)]
pub struct Failure {
    pub stage: String,
    pub message: String,
    pub code: u8,
}

impl Failure {
    fn validation(stage: &str, message: impl ToString) -> Self {
        Self { stage: stage.into(), message: message.to_string(), code: 2 }
    }

    fn pipeline(stage: &str, message: impl ToString) -> Self {
        Self { stage: stage.into(), message: message.to_string(), code: 3 }
    }
}

impl From<sim_io::Error> for Failure {
    fn from(e: sim_io::Error) -> Self {
        Failure::validation("io", e)
    }
}

impl From<DetectError> for Failure {
    fn from(e: DetectError) -> Self {
        let stage = e.stage().to_string();
        let invalid = matches!(
            e,
            DetectError::Features(FeatureError::InvalidConfig(_))
                | DetectError::Extraction(ExtractError::InvalidConfig(_) | ExtractError::NoAdjacency { .. })
                | DetectError::Grouping(_)
        );
        let code = if invalid { 2 } else { 3 };
        let text = e.to_string();
        let message = text.strip_prefix(&format!("{stage}: ")).unwrap_or(&text).to_string();
        Failure { stage, message, code }
    }
}

impl From<ExtractError> for Failure {
    fn from(e: ExtractError) -> Self {
        DetectError::from(e).into()
    }
}

type Outcome = Result<Vec<PathBuf>, Failure>;

/// `out` with its `.json` extension replaced by `.{tag}.{ext}`.
pub fn sibling(out: &Path, tag: &str, ext: &str) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(".json").unwrap_or(&name);
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn bundle_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::validation("io", format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().contains("manifest")))
        .collect();
    files.sort();
    Ok(files)
}

fn run_batch<F>(input: &Path, out_dir: &Path, item: F) -> (Vec<PathBuf>, Vec<PathBuf>, Option<Failure>)
where
    F: Fn(&Path, &Path) -> Outcome + Sync,
{
    let files = match bundle_files(input) {
        Ok(f) => f,
        Err(e) => return (vec![], vec![], Some(e)),
    };
    let results: Vec<(PathBuf, Outcome)> = files.par_iter().map(|f| (f.clone(), item(f, out_dir))).collect();
    let mut outputs = Vec::new();
    let mut failed = 0;
    let mut code = 0;
    for (file, r) in results {
        match r {
            Ok(o) => outputs.extend(o),
            Err(f) => {
                eprintln!("error[{}]: {}: {}", f.stage, file.display(), f.message);
                failed += 1;
                code = code.max(f.code);
            }
        }
    }
    let summary = (failed > 0).then(|| Failure {
        stage: "batch".into(),
        message: format!("{failed} of {} inputs failed", files.len()),
        code,
    });
    (files, outputs, summary)
}

fn extract_one(input: &Path, output: &Path, opts: &GraphOpts) -> Outcome {
    let bundle = load_bundle(input)?;
    let (_, graph) = extract(&bundle, &opts.grouping(), &opts.extraction())?;
    save_graph(&graph, output)?;
    Ok(vec![output.to_path_buf()])
}

fn detect_one(input: &Path, output: &Path, opts: &GraphOpts, weight: WeightKind, features: &FeatureOpts, dot: bool) -> Outcome {
    let bundle = load_bundle(input)?;
    let cfg = PipelineConfig { grouping: opts.grouping(), extraction: opts.extraction(), features: features.config() };
    let (path, graph) = detect_with_graph(&bundle, opts.method, weight, &cfg)?;
    log::info!("{}: {} path on {} with weight {}", path.sim_id, weight, path.side, path.total_weight);
    write_json(output, &path)?;
    let mut outs = vec![output.to_path_buf()];
    if dot {
        let dot_path = output.with_extension("dot");
        export_dot(&graph, Some(&path), &dot_path, &DotOptions::default())?;
        outs.push(dot_path);
    }
    Ok(outs)
}

fn batch_name(file: &Path, out_dir: &Path, suffix: &str) -> PathBuf {
    let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out_dir.join(format!("{stem}.{suffix}"))
}

/// Runs one command; returns `(inputs, outputs, config snapshot)`.
fn execute(command: &Command) -> Result<(Vec<PathBuf>, Vec<PathBuf>, serde_json::Value), Failure> {
    match command {
        Command::Extract { input, graph, output } => {
            let config = serde_json::json!({
                "grouping": graph.grouping(),
                "extraction": graph.extraction(),
            });
            if input.is_dir() {
                let suffix = format!("{}.graph.json", graph.method);
                let (ins, outs, failed) = run_batch(input, output, |f, dir| extract_one(f, &batch_name(f, dir, &suffix), graph));
                return failed.map_or(Ok((ins, outs, config)), Err);
            }
            let outs = extract_one(input, output, graph)?;
            Ok((vec![input.clone()], outs, config))
        }
        Command::Flow { graph: graph_path, bundle, feature, features, output } => {
            let mut graph = load_graph(graph_path)?;
            let bundle_data = load_bundle(bundle)?;
            if graph.sim_id != bundle_data.sim_id {
                return Err(Failure::validation("io", format!("graph is for {:?} but the bundle is {:?}", graph.sim_id, bundle_data.sim_id)));
            }
            let cfg = features.config();
            annotate_features(&mut graph, &bundle_data, &cfg).map_err(|e| Failure::from(DetectError::from(e)))?;
            let report = compute_flow(&graph, *feature).map_err(|e| Failure::pipeline("flow", e))?;
            apply_flows(&mut graph, &report).map_err(|e| Failure::pipeline("flow", e))?;
            log::info!("{}: flow rmse {:e}", graph.sim_id, report.rmse);
            if !report.negative_edges.is_empty() {
                log::warn!("{}: {} edges carry negative flow", graph.sim_id, report.negative_edges.len());
            }
            save_graph(&graph, output)?;
            let sidecar = sibling(output, "flow", "json");
            write_json(&sidecar, &report.summary())?;
            let config = serde_json::json!({ "feature": feature, "features": cfg });
            Ok((vec![graph_path.clone(), bundle.clone()], vec![output.clone(), sidecar], config))
        }
        Command::Segment { graph: graph_path, output } => {
            let graph = load_graph(graph_path)?;
            let segmented = segment_graph(&graph).map_err(|e| Failure::pipeline("segmentation", e))?;
            let flows = compute_flow(&segmented, FlowFeature::IeMax).map_err(|e| Failure::pipeline("flow", e))?;
            let weighted = attach_spe(&segmented, &flows).map_err(|e| Failure::pipeline("segmentation", e))?;
            save_graph(&weighted, output)?;
            Ok((vec![graph_path.clone()], vec![output.clone()], serde_json::json!({})))
        }
        Command::Detect { input, graph, weight, features, dot, output } => {
            let config = serde_json::json!({
                "grouping": graph.grouping(),
                "extraction": graph.extraction(),
                "features": features.config(),
                "weight": weight,
            });
            if input.is_dir() {
                let suffix = format!("{}.{}.path.json", graph.method, weight);
                let (ins, outs, failed) = run_batch(input, output, |f, dir| {
                    detect_one(f, &batch_name(f, dir, &suffix), graph, *weight, features, *dot)
                });
                return failed.map_or(Ok((ins, outs, config)), Err);
            }
            let outs = detect_one(input, output, graph, *weight, features, *dot)?;
            Ok((vec![input.clone()], outs, config))
        }
        Command::Cluster { dir, output } => {
            let files = bundle_files(dir)?;
            let paths: Vec<LoadPath> = files.iter().map(|f| sim_io::read_json(f)).collect::<Result<_, _>>()?;
            let mirror = NameMirror::from_paths(&paths);
            let report = cluster(&paths, (!mirror.is_empty()).then_some(&mirror)).map_err(|e| Failure::validation("path", e))?;
            let csv_path = output.with_extension("csv");
            let json_path = output.with_extension("json");
            write_cluster_csv(&report, &csv_path)?;
            write_json(&json_path, &report)?;
            log::info!("{} paths in {} clusters", paths.len(), report.clusters.len());
            Ok((files, vec![csv_path, json_path], serde_json::json!({})))
        }
        Command::Synth { layout, n, seed, output } => {
            let cfg = SynthConfig { layout: *layout, n_sims: *n, seed: *seed, ..SynthConfig::default() };
            let bundles = generate(&cfg).map_err(|e| Failure::validation("synth", e))?;
            let outs: Vec<PathBuf> = bundles
                .par_iter()
                .map(|b| {
                    let p = output.join(format!("{}.json", b.sim_id));
                    save_bundle(b, &p).map(|_| p)
                })
                .collect::<Result<_, _>>()?;
            Ok((vec![], outs, serde_json::to_value(cfg).unwrap_or_default()))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Extract { .. } => "extract",
        Command::Flow { .. } => "flow",
        Command::Segment { .. } => "segment",
        Command::Detect { .. } => "detect",
        Command::Cluster { .. } => "cluster",
        Command::Synth { .. } => "synth",
    }
}

fn manifest_path(command: &Command) -> PathBuf {
    let (out, is_dir) = match command {
        Command::Extract { input, output, .. } | Command::Detect { input, output, .. } => (output, input.is_dir()),
        Command::Flow { output, .. } | Command::Segment { output, .. } | Command::Cluster { output, .. } => (output, false),
        Command::Synth { output, .. } => (output, true),
    };
    if is_dir {
        out.join("manifest.json")
    } else {
        sibling(out, "manifest", "json")
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let start = Instant::now();
    match execute(&cli.command) {
        Ok((inputs, outputs, config)) => {
            let manifest = RunManifest {
                command: command_name(&cli.command).into(),
                config,
                inputs,
                outputs,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            match write_json(&manifest_path(&cli.command), &manifest) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error[io]: {e}");
                    2
                }
            }
        }
        Err(f) => {
            eprintln!("error[{}]: {}", f.stage, f.message);
            f.code
        }
    }
}

/// Entry point of the binary: logging from `CRASHGRAPH_LOG`, then [`run`].
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    ExitCode::from(run(Cli::parse()))
}

