//! Detects the load-path of one bundle for every method and weight kind.
//!
//! `cargo run --example detect_loadpaths [bundle.json]`; by default an
//! asymmetric synthetic bundle with a stiffer left side is used.

use crashgraph::loadpath::detect;
use crashgraph::sim_io::load_bundle;
use crashgraph::synth::{generate, SynthConfig};
use crashgraph::{ExtractionMethod, PipelineConfig, WeightKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = match std::env::args().nth(1) {
        Some(path) => load_bundle(path.as_ref())?,
        None => generate(&SynthConfig { n_sims: 1, stiffness: Some((1.3, 0.8)), ..SynthConfig::default() })?.remove(0),
    };
    for method in ExtractionMethod::ALL {
        for weight in WeightKind::ALL {
            let path = detect(&bundle, method, weight, &PipelineConfig::default())?;
            println!("{method:<5} {weight:<6} {:<6} {:>10.3}  {}", path.side.to_string(), path.total_weight, path.signature.join(" > "));
        }
    }
    Ok(())
}
