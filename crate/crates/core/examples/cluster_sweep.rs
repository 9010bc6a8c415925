//! Runs the full synthetic sweep and clusters the detected paths.
//!
//! `cargo run --release --example cluster_sweep [weight]`, where weight is one
//! of f_ie, f_iedt, s_t, s_pe (default s_t).

use crashgraph::loadpath::{cluster, detect, NameMirror};
use crashgraph::synth::{generate, SynthConfig};
use crashgraph::{ExtractionMethod, LoadPath, PipelineConfig, WeightKind};
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let weight: WeightKind = std::env::args().nth(1).as_deref().unwrap_or("s_t").parse()?;
    let bundles = generate(&SynthConfig::default())?;
    let cfg = PipelineConfig::default();
    let paths: Vec<LoadPath> = bundles.par_iter().map(|b| detect(b, ExtractionMethod::Mpbg, weight, &cfg)).collect::<Result<_, _>>()?;
    let mirror = NameMirror::from_bundle(&bundles[0]);
    let report = cluster(&paths, Some(&mirror))?;
    println!("{} simulations, {} clusters, modal size {}", paths.len(), report.clusters.len(), report.modal_size());
    for c in &report.clusters {
        let partner = c.paired_with.map(|i| report.clusters[i].label.clone()).unwrap_or_else(|| "-".into());
        println!("{:>3} {:>3}L/{:<3}R  mirror {:<3} {}", c.label, c.n_l, c.n_r, partner, c.signature.join(" > "));
    }
    Ok(())
}
