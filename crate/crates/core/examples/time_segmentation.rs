//! Splits absorption intervals at successor onsets and prints the segments
//! of each part with their `s_t` and `s_pe` edge weights.
//!
//! `cargo run --example time_segmentation`

use crashgraph::loadpath::weigh;
use crashgraph::segment::segments_of;
use crashgraph::synth::{generate, Layout, SynthConfig};
use crashgraph::PipelineConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = generate(&SynthConfig { layout: Layout::Mini8, n_sims: 1, ..SynthConfig::default() })?.remove(0);
    let weighted = weigh(&bundle, &PipelineConfig::default())?;
    let (base, seg) = (&weighted.base, &weighted.segmented);
    println!("{}: {} vertices become {}", bundle.sim_id, base.vertices.len(), seg.vertices.len());
    for v in &base.vertices {
        let parts: Vec<String> = segments_of(seg, v.vid)
            .iter()
            .filter_map(|s| s.segment.map(|i| format!("[{:.2}, {:.2}]", i.t_start, i.t_end)))
            .collect();
        println!("  {:<10} {}", v.name, parts.join(" "));
    }
    for e in seg.edges.iter().filter(|e| e.weights.s_t.unwrap_or(0.0) > 0.0) {
        println!(
            "  {} -> {}: s_t {:.3} ms, s_pe {:.3}",
            seg.vertices[e.src].name,
            seg.vertices[e.dst].name,
            e.weights.s_t.unwrap_or(0.0),
            e.weights.s_pe.unwrap_or(0.0)
        );
    }
    Ok(())
}
