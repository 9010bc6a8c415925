//! Groups the parts of a bundle and prints the three graph variants.
//!
//! `cargo run --example extract_graphs [bundle.json]`; without an argument a
//! synthetic frontal structure is used.

use crashgraph::graph::extract;
use crashgraph::sim_io::load_bundle;
use crashgraph::synth::{generate, SynthConfig};
use crashgraph::{ExtractionConfig, ExtractionMethod, GroupingConfig, SimulationBundle};

fn bundle() -> Result<SimulationBundle, Box<dyn std::error::Error>> {
    match std::env::args().nth(1) {
        Some(path) => Ok(load_bundle(path.as_ref())?),
        None => Ok(generate(&SynthConfig { n_sims: 1, ..SynthConfig::default() })?.remove(0)),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = bundle()?;
    println!("{}: {} parts", bundle.sim_id, bundle.parts.len());
    for method in ExtractionMethod::ALL {
        let cfg = ExtractionConfig { method, ..ExtractionConfig::default() };
        let (components, graph) = extract(&bundle, &GroupingConfig::default(), &cfg)?;
        println!("{method}: {} components, {} vertices, {} edges", components.len(), graph.vertices.len(), graph.edges.len());
        if method == ExtractionMethod::Cbg {
            for c in &components {
                let names: Vec<&str> = c.member_pids.iter().filter_map(|&p| bundle.part(p)).map(|p| p.name.as_str()).collect();
                println!("  component {}: {}", c.cid, names.join(", "));
            }
        }
    }
    Ok(())
}
