//! Renders a graph with its `s_t` load-path highlighted as Graphviz DOT.
//!
//! `cargo run --example dot_export > path.dot && neato -n -Tsvg path.dot`

use crashgraph::loadpath::detect_with_graph;
use crashgraph::sim_io::{to_dot, DotOptions};
use crashgraph::synth::{generate, SynthConfig};
use crashgraph::{ExtractionMethod, PipelineConfig, WeightKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = generate(&SynthConfig { n_sims: 1, stiffness: Some((1.0, 0.7)), ..SynthConfig::default() })?.remove(0);
    let (path, graph) = detect_with_graph(&bundle, ExtractionMethod::Spbg, WeightKind::St, &PipelineConfig::default())?;
    print!("{}", to_dot(&graph, Some(&path), &DotOptions::default())?);
    Ok(())
}
