//! Writes a synthetic sweep to a directory and reads one bundle back.
//!
//! `cargo run --example synth_bundles [out_dir]`

use crashgraph::sim_io::{load_bundle, save_bundle};
use crashgraph::synth::{generate, stiffness_plan, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("crashgraph_synth"));
    let cfg = SynthConfig { n_sims: 8, ..SynthConfig::default() };
    let plan = stiffness_plan(&cfg)?;
    for (bundle, (lhs, rhs)) in generate(&cfg)?.iter().zip(plan) {
        let path = out.join(format!("{}.json", bundle.sim_id));
        save_bundle(bundle, &path)?;
        let back = load_bundle(&path)?;
        assert_eq!(&back, bundle);
        println!("{}  lhs {lhs:.2} rhs {rhs:.2}  {} parts  -> {}", bundle.sim_id, bundle.parts.len(), path.display());
    }
    Ok(())
}
