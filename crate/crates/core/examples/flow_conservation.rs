//! Computes both energy flows on an mPBG and shows the per-vertex balance.
//!
//! `cargo run --example flow_conservation`

use crashgraph::energy::{annotate_features, balance_residuals, compute_flow, vertex_energy};
use crashgraph::graph::extract;
use crashgraph::synth::{generate, SynthConfig};
use crashgraph::{ExtractionConfig, FeatureConfig, FlowFeature, GroupingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = generate(&SynthConfig { n_sims: 31, ..SynthConfig::default() })?.remove(30);
    let (_, mut graph) = extract(&bundle, &GroupingConfig::default(), &ExtractionConfig::default())?;
    annotate_features(&mut graph, &bundle, &FeatureConfig::default())?;

    for feature in [FlowFeature::IeMax, FlowFeature::IeDt] {
        let report = compute_flow(&graph, feature)?;
        println!("{} {feature:?}: rmse {:.3e}, sources {:?}", report.sim_id, report.rmse, report.excluded_sources);
        let energy: Vec<f64> = (0..graph.vertices.len()).map(|v| vertex_energy(&graph, v, feature)).collect::<Result<_, _>>()?;
        for (vid, residual) in balance_residuals(&graph, &energy, &report.edge_flows).into_iter().take(5) {
            println!("  {:<22} energy {:>8.3}  residual {:+.1e}", graph.vertices[vid].name, energy[vid], residual);
        }
    }
    Ok(())
}
