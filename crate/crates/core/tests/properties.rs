mod common;

use std::collections::BTreeSet;
use std::path::Path;

use crashgraph::energy::{annotate_features, compute_flow, extract_features};
use crashgraph::geometry::{group_components, MergeEvent};
use crashgraph::graph::{extract, Vid};
use crashgraph::loadpath::{detect_with_graph, longest_path, NameMirror};
use crashgraph::segment::{segment_graph, segments_of};
use crashgraph::sim_io::{bundle_to_json, graph_from_json, graph_to_json, parse_bundle, EnergyCurve, Units};
use crashgraph::synth::{generate, ramp, SynthConfig};
use crashgraph::{
    Box3, ExtractionConfig, ExtractionMethod, FeatureConfig, FlowFeature, GroupingConfig, PartRecord, PipelineConfig,
    SimulationBundle, StructureGraph, WeightKind,
};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn times() -> Vec<f64> {
    (0..=240).map(|i| i as f64 * 0.25).collect()
}

prop_compose! {
    fn part_strategy(pid: u32)(
        x in 0.0..120.0f64, y in -40.0..40.0f64, z in 0.0..20.0f64,
        dx in 1.0..30.0f64, dy in 1.0..20.0f64, dz in 1.0..20.0f64,
        ie in 0.5..20.0f64, t0 in 0.0..30.0f64, d in 2.0..25.0f64,
    ) -> PartRecord {
        PartRecord {
            pid,
            name: format!("p{pid}"),
            bbox: Box3::new([x, y, z], [x + dx, y + dy, z + dz]).unwrap(),
            ie_curve: ramp(&times(), ie, t0, d),
        }
    }
}

fn parts_strategy() -> impl Strategy<Value = Vec<PartRecord>> {
    (2usize..9).prop_flat_map(|n| (1..=n as u32).map(part_strategy).collect::<Vec<_>>())
}

fn bundle_of(parts: Vec<PartRecord>) -> SimulationBundle {
    SimulationBundle {
        sim_id: "prop".into(),
        impact_direction: [1.0, 0.0, 0.0],
        units: Units::default(),
        parts,
        symmetry_map: None,
    }
}

/// Partition with its merge events, independent of component numbering.
fn partition(parts: &[PartRecord], cfg: &GroupingConfig) -> BTreeSet<(Vec<u32>, Vec<(u32, u32, String)>)> {
    group_components(parts, cfg)
        .unwrap()
        .into_iter()
        .map(|c| {
            let mut log: Vec<(u32, u32, String)> = c
                .merge_log
                .iter()
                .map(|m: &MergeEvent| (m.child_pid, m.parent_pid, format!("{:?}", m.kind)))
                .collect();
            log.sort();
            (c.member_pids, log)
        })
        .collect()
}

/// Graph of a random bundle with features annotated, if the parts connect.
fn annotated(bundle: &SimulationBundle, method: ExtractionMethod) -> Option<StructureGraph> {
    let cfg = ExtractionConfig { method, tlv: 15.0 };
    let (_, mut g) = extract(bundle, &GroupingConfig::default(), &cfg).ok()?;
    annotate_features(&mut g, bundle, &FeatureConfig::default()).unwrap();
    Some(g)
}

fn method_strategy() -> impl Strategy<Value = ExtractionMethod> {
    prop::sample::select(ExtractionMethod::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grouping_is_a_partition_invariant_under_part_order(parts in parts_strategy(), seed in any::<u64>()) {
        let cfg = GroupingConfig::default();
        let comps = group_components(&parts, &cfg).unwrap();
        let mut seen: Vec<u32> = comps.iter().flat_map(|c| c.member_pids.clone()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (1..=parts.len() as u32).collect::<Vec<_>>());

        let mut shuffled = parts.clone();
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(partition(&parts, &cfg), partition(&shuffled, &cfg));
    }

    #[test]
    fn raising_the_partial_threshold_never_adds_merges(parts in parts_strategy(), lo in 0.01..0.5f64, step in 0.0..0.4f64) {
        let merges = |p: f64| {
            let cfg = GroupingConfig { partial_threshold: p, ..GroupingConfig::default() };
            group_components(&parts, &cfg).unwrap().iter().map(|c| c.merge_log.len()).sum::<usize>()
        };
        prop_assert!(merges(lo + step) <= merges(lo));
    }

    #[test]
    fn extracted_and_segmented_graphs_are_acyclic(parts in parts_strategy(), method in method_strategy()) {
        let bundle = bundle_of(parts);
        if let Some(g) = annotated(&bundle, method) {
            prop_assert!(g.is_acyclic());
            prop_assert!(segment_graph(&g).unwrap().is_acyclic());
        }
    }

    #[test]
    fn spbg_edges_are_a_subset_of_mpbg_edges(parts in parts_strategy()) {
        let bundle = bundle_of(parts);
        if let (Some(s), Some(m)) = (annotated(&bundle, ExtractionMethod::Spbg), annotated(&bundle, ExtractionMethod::Mpbg)) {
            let pairs = |g: &StructureGraph| g.edges.iter().map(|e| (e.src, e.dst)).collect::<BTreeSet<_>>();
            prop_assert!(pairs(&s).is_subset(&pairs(&m)));
            prop_assert_eq!(s.vertices.len(), m.vertices.len());
        }
    }

    #[test]
    fn flow_balances_every_non_source_vertex(parts in parts_strategy(), method in method_strategy()) {
        let bundle = bundle_of(parts);
        if let Some(g) = annotated(&bundle, method) {
            for feature in [FlowFeature::IeMax, FlowFeature::IeDt] {
                let report = compute_flow(&g, feature).unwrap();
                let sources: BTreeSet<Vid> = report.excluded_sources.iter().copied().collect();
                for v in &g.vertices {
                    if sources.contains(&v.vid) {
                        continue;
                    }
                    let f = v.features.unwrap();
                    let ie = match feature { FlowFeature::IeMax => f.ie_max, FlowFeature::IeDt => f.ie_dt.unwrap() };
                    let net: f64 = g.edges.iter().enumerate().map(|(i, e)| {
                        if e.dst == v.vid { report.edge_flows[i] } else if e.src == v.vid { -report.edge_flows[i] } else { 0.0 }
                    }).sum();
                    prop_assert!((ie - net).abs() <= 1e-9 * ie.abs().max(1.0), "vertex {} ie {} net {}", v.vid, ie, net);
                }
            }
        }
    }

    #[test]
    fn flow_is_linear_in_the_energies(parts in parts_strategy(), c in 0.01..100.0f64, pow in -3i32..4) {
        let scale = |b: &SimulationBundle, k: f64| {
            let mut out = b.clone();
            for p in &mut out.parts {
                let v = p.ie_curve.values().iter().map(|x| x * k).collect();
                p.ie_curve = EnergyCurve::new(p.ie_curve.times().to_vec(), v).unwrap();
            }
            out
        };
        let bundle = bundle_of(parts);
        let Some(g) = annotated(&bundle, ExtractionMethod::Mpbg) else { return Ok(()) };
        let base = compute_flow(&g, FlowFeature::IeMax).unwrap();
        for (k, exact) in [(c, false), (2f64.powi(pow), true)] {
            let g2 = annotated(&scale(&bundle, k), ExtractionMethod::Mpbg).unwrap();
            let scaled = compute_flow(&g2, FlowFeature::IeMax).unwrap();
            for (a, b) in base.edge_flows.iter().zip(&scaled.edge_flows) {
                if exact {
                    prop_assert_eq!(a * k, *b);
                } else {
                    prop_assert!((a * k - b).abs() <= 1e-12 * (a * k).abs().max(f64::MIN_POSITIVE));
                }
            }
        }
    }

    #[test]
    fn segmentation_conserves_time_and_reachability(parts in parts_strategy(), method in method_strategy()) {
        let bundle = bundle_of(parts);
        let Some(g) = annotated(&bundle, method) else { return Ok(()) };
        let s = segment_graph(&g).unwrap();
        for v in &g.vertices {
            let f = v.features.unwrap();
            let segs = segments_of(&s, v.vid);
            let total: f64 = segs.iter().map(|x| x.segment.unwrap().duration()).sum();
            if f.t_n > f.t_i {
                prop_assert!((total - (f.t_n - f.t_i)).abs() <= 1e-9);
            } else {
                prop_assert!(segs.is_empty());
            }
            let after = s.reachable_from(v.vid);
            for u in g.reachable_from(v.vid) {
                prop_assert!(after.contains(&u));
            }
        }
    }

    #[test]
    fn bundles_and_graphs_round_trip(parts in parts_strategy(), method in method_strategy()) {
        let bundle = bundle_of(parts);
        let back = parse_bundle(&bundle_to_json(&bundle), Path::new("mem")).unwrap();
        prop_assert_eq!(&back, &bundle);
        if let Some(g) = annotated(&bundle, method) {
            let text = graph_to_json(&g).unwrap();
            prop_assert_eq!(graph_from_json(&text, Path::new("mem")).unwrap(), g.clone());
            let seg = segment_graph(&g).unwrap();
            prop_assert_eq!(graph_from_json(&graph_to_json(&seg).unwrap(), Path::new("mem")).unwrap(), seg);
            prop_assert_eq!(text, graph_to_json(&g).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn longest_path_matches_enumeration(seed in any::<u64>(), density in 0.1..0.9f64) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (n, edges) = common::random_dag(&mut rng, 12, density);
        let path = longest_path(&common::weighted_graph(n, &edges), WeightKind::FIe).unwrap();
        let (w, seq) = common::brute_force_longest(n, &edges);
        prop_assert_eq!(path.total_weight, w);
        prop_assert_eq!(path.vertex_sequence, seq);
    }

    #[test]
    fn scaling_weights_keeps_the_path(seed in any::<u64>(), c in 0.001..1000.0f64, pow in -8i32..8) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (n, edges) = common::random_dag(&mut rng, 12, 0.4);
        let base = longest_path(&common::weighted_graph(n, &edges), WeightKind::FIe).unwrap();
        // a power of two scales exactly, so even ties survive
        let exact: Vec<_> = edges.iter().map(|&(a, b, w)| (a, b, w * 2f64.powi(pow))).collect();
        prop_assert_eq!(&longest_path(&common::weighted_graph(n, &exact), WeightKind::FIe).unwrap().vertex_sequence, &base.vertex_sequence);
        let scaled: Vec<_> = edges.iter().map(|&(a, b, w)| (a, b, w * c)).collect();
        prop_assert_eq!(longest_path(&common::weighted_graph(n, &scaled), WeightKind::FIe).unwrap().vertex_sequence, base.vertex_sequence);
    }
}

/// The bundle with every mirrored pair's curves exchanged: geometrically
/// the reflection of `bundle` with pids relabelled by the symmetry map.
fn mirrored(bundle: &SimulationBundle) -> SimulationBundle {
    let mirror = NameMirror::from_bundle(bundle);
    let mut out = bundle.clone();
    for p in &mut out.parts {
        p.ie_curve = bundle.part(mirror.mirror_pid(p.pid)).unwrap().ie_curve.clone();
    }
    out
}

/// Vertex of `image_graph` (built from the mirrored bundle) corresponding
/// to `v` of `graph`; segment vertices map by origin and chain position.
fn image_of(bundle: &SimulationBundle, graph: &StructureGraph, image_graph: &StructureGraph, v: Vid) -> Vid {
    let map = NameMirror::from_bundle(bundle).vertex_map(graph);
    match graph.vertices[v].segment {
        None => map[v].unwrap(),
        Some(s) => {
            let origin = map[s.origin_vid].unwrap();
            image_graph
                .vertices
                .iter()
                .find(|u| u.segment.is_some_and(|t| t.origin_vid == origin && t.k == s.k))
                .unwrap()
                .vid
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn paths_are_mirror_equivariant(
        levels in subsequence(vec![0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4], 2),
        flip in any::<bool>(),
        seed in 0u64..1000,
        method in method_strategy(),
        kind in prop::sample::select(WeightKind::ALL.to_vec()),
    ) {
        let (a, b) = if flip { (levels[1], levels[0]) } else { (levels[0], levels[1]) };
        let cfg = SynthConfig { n_sims: 1, seed, stiffness: Some((a, b)), ..SynthConfig::default() };
        let bundle = generate(&cfg).unwrap().remove(0);
        let pc = PipelineConfig::default();
        let (path, graph) = detect_with_graph(&bundle, method, kind, &pc).unwrap();
        let (image, image_graph) = detect_with_graph(&mirrored(&bundle), method, kind, &pc).unwrap();
        let expected: Vec<Vid> = path.vertex_sequence.iter().map(|&v| image_of(&bundle, &graph, &image_graph, v)).collect();
        prop_assert_eq!(image.vertex_sequence, expected);
        prop_assert!((image.total_weight - path.total_weight).abs() <= 1e-9 * path.total_weight.abs().max(1.0));
        prop_assert_eq!(image_graph.vertices.len(), graph.vertices.len());
    }

    #[test]
    fn synth_is_deterministic(seed in any::<u64>(), n in 1usize..8) {
        let cfg = SynthConfig { n_sims: n, seed, ..SynthConfig::default() };
        let a: Vec<String> = generate(&cfg).unwrap().iter().map(bundle_to_json).collect();
        let b: Vec<String> = generate(&cfg).unwrap().iter().map(bundle_to_json).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn stiffer_parts_absorb_less_for_longer(k in 0.5..1.5f64, dk in 0.05..0.5f64, seed in 0u64..1000) {
        let make = |k: f64| generate(&SynthConfig { n_sims: 1, seed, stiffness: Some((k, k)), ..SynthConfig::default() }).unwrap().remove(0);
        let (soft, stiff) = (make(k), make(k + dk));
        let fc = FeatureConfig::default();
        for (p, q) in soft.parts.iter().zip(&stiff.parts) {
            if !(p.name.ends_with("_l") || p.name.ends_with("_r")) {
                continue;
            }
            let (fp, fq) = (extract_features(&p.ie_curve, &fc), extract_features(&q.ie_curve, &fc));
            prop_assert!(fq.ie_max < fp.ie_max, "{}: ie_max {} -> {}", p.name, fp.ie_max, fq.ie_max);
            prop_assert!(fq.t_n - fq.t_i > fp.t_n - fp.t_i, "{}: duration {} -> {}", p.name, fp.t_n - fp.t_i, fq.t_n - fq.t_i);
        }
        let comps = |b: &SimulationBundle| group_components(&b.parts, &GroupingConfig::default()).unwrap().len();
        prop_assert_eq!(comps(&soft), 11);
        prop_assert_eq!(comps(&stiff), 11);
    }
}
