mod common;

use std::f64::consts::{PI, TAU};
use std::path::Path;

use proptest::prelude::*;
use swbeam::antenna::{optimal_beamwidth, sector_beam_length, ula_gain, AntennaConfig};
use swbeam::linkgraph::{build_link_graph, covered_nodes, omni_configs, DirectedLinkGraph};
use swbeam::metrics::{read_reports, write_reports, GraphStats, MetricsReport};
use swbeam::topology::{NodeId, Point, Topology};
use swbeam::wfb::{generate_traffic, run_warmup, wfb_on_overhear, wfb_on_transmit, WfbNodeState};

fn topology(max_nodes: usize, side: f64) -> impl Strategy<Value = Topology> {
    prop::collection::vec((0.0..side, 0.0..side), 2..=max_nodes).prop_map(move |pts| {
        let pts = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        Topology::new(pts, side, side, 1.0, 0).unwrap()
    })
}

fn digraph(max_nodes: usize) -> impl Strategy<Value = DirectedLinkGraph> {
    (2..=max_nodes)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..n * n)))
        .prop_map(|(n, edges)| DirectedLinkGraph::from_edges(n, edges).unwrap())
}

fn sector() -> impl Strategy<Value = AntennaConfig> {
    (1u32..=6, 0.0..TAU).prop_map(|(k, o)| {
        let theta = TAU / f64::from(k * k);
        AntennaConfig::sector(theta, sector_beam_length(theta, 1.0).unwrap(), o).unwrap()
    })
}

proptest! {
    #[test]
    fn sector_area_is_conserved_and_length_shrinks_with_width(a in 1e-3..TAU, b in 1e-3..TAU, r in 0.05..10.0f64) {
        let la = sector_beam_length(a, r).unwrap();
        let lb = sector_beam_length(b, r).unwrap();
        prop_assert!((a / 2.0 * la * la - PI * r * r).abs() <= 1e-9 * r * r.max(1.0));
        if a < b {
            prop_assert!(la >= lb);
        }
    }

    #[test]
    fn ula_gain_stays_within_zero_and_m(m in 1u32..20, b in 0.0..TAU, phi in -10.0..10.0f64) {
        let g = ula_gain(m, b, phi);
        prop_assert!(g >= 0.0 && g <= f64::from(m) + 1e-9);
    }

    #[test]
    fn optimizer_picks_a_candidate_maximizing_weighted_length(
        grid in prop::collection::vec(1e-2..TAU, 1..10),
        r in 0.2..3.0f64,
        n in 0.5..40.0f64,
    ) {
        let best = optimal_beamwidth(&grid, r, n).unwrap();
        prop_assert!(grid.contains(&best));
        prop_assert_eq!(best, common::grid_argmax(&grid, r, n));
    }

    #[test]
    fn omni_neighbourhoods_are_symmetric(topo in topology(40, 4.0)) {
        for v in topo.nodes() {
            for u in topo.omni_neighbors(v) {
                prop_assert!(topo.omni_neighbors(u).contains(&v));
            }
        }
    }

    #[test]
    fn one_node_reconfiguration_only_touches_its_out_links(
        topo in topology(30, 3.0),
        pick in any::<prop::sample::Index>(),
        cfg in sector(),
    ) {
        let base = build_link_graph(&topo, &omni_configs(&topo)).unwrap();
        let v = pick.index(topo.len());
        let mut configs = omni_configs(&topo);
        configs[v] = cfg;
        let changed = build_link_graph(&topo, &configs).unwrap();
        for u in 0..topo.len() {
            if u != v {
                prop_assert_eq!(base.out_neighbors(u), changed.out_neighbors(u));
            }
        }
        // a sector never reaches past its own length
        let AntennaConfig::Sector { length, .. } = cfg else { unreachable!() };
        for &u in changed.out_neighbors(v) {
            prop_assert!(topo.distance(NodeId(v), NodeId(u)) <= length);
            prop_assert!(covered_nodes(&topo, NodeId(v), &cfg).contains(&NodeId(u)));
        }
    }

    #[test]
    fn metrics_match_brute_force(g in digraph(12)) {
        let brute = common::brute_metrics(&g);
        let stats = GraphStats::compute(&g);
        match brute.apl {
            Some(a) => prop_assert_eq!(stats.apl, a),
            None => prop_assert!(stats.apl.is_nan()),
        }
        prop_assert_eq!(stats.clustering, brute.clustering);
        prop_assert_eq!(stats.unidirectional_fraction, brute.unidirectional);
        prop_assert_eq!(stats.unreachable_fraction, brute.unreachable);
    }

    #[test]
    fn wfb_state_stays_positive_and_replays_exactly(topo in topology(10, 2.5), seed in any::<u64>(), frac in 0.1..=1.0f64) {
        let flows = generate_traffic(&topo, frac, seed).unwrap();
        let warm = run_warmup(&topo, &flows, seed);
        for e in &warm.events {
            prop_assert!(e.w_after > 0.0 && e.w_after.is_finite() && e.g_after >= 2);
        }
        for s in &warm.states {
            prop_assert!(s.w > 0.0 && s.g >= 1);
            for (id, rec) in &s.neighbor_table {
                prop_assert!(rec.w > 0.0 && rec.g >= 1);
                prop_assert!(topo.omni_neighbors(s.id).contains(id));
            }
        }
        let replayed = common::replay(&topo, &warm.events).map_err(|e| TestCaseError::fail(e.0))?;
        common::compare_states(&replayed, &warm.states).map_err(|e| TestCaseError::fail(e.0))?;
    }

    #[test]
    fn every_update_keeps_w_positive(
        table in prop::collection::vec((1e-3..1e3f64, 1u64..1000), 0..8),
        own in (1e-3..1e3f64, 1u64..1000),
        tx in (1e-3..1e3f64, 1u64..1000),
    ) {
        let mut s = WfbNodeState::new(NodeId(0), Point::new(0.0, 0.0));
        s.w = own.0;
        s.g = own.1;
        for (i, (w, g)) in table.into_iter().enumerate() {
            wfb_on_overhear(&mut s, NodeId(i + 1), Point::new(0.1, 0.0), w, g, 1, i as u64);
            prop_assert!(s.w > 0.0);
        }
        let (w, g) = wfb_on_transmit(&mut s);
        prop_assert!(w > 0.0 && g >= 2);
        wfb_on_overhear(&mut s, NodeId(99), Point::new(0.2, 0.0), tx.0, tx.1, 3, 100);
        prop_assert!(s.w > 0.0 && s.g == g);
    }

    #[test]
    fn metrics_rows_round_trip(
        apl in 0.0..50.0f64,
        ratio in 0.0..1.0f64,
        seed in any::<u64>(),
        beta in prop::option::of(0.0..2.0f64),
    ) {
        let row = MetricsReport {
            seed,
            n: 300,
            width: 10.0,
            height: 10.0,
            model: "sector".into(),
            p: ratio,
            beta,
            baseline_apl: apl + 1.0,
            apl,
            baseline_clustering: ratio / 3.0,
            clustering: ratio / 7.0,
            unidirectional_pair_fraction: ratio * ratio,
            unreachable_pair_fraction: ratio / 11.0,
            beamformer_fraction: ratio,
            diameter_d: apl * 0.1 + 1.0,
        };
        let mut buf = Vec::new();
        write_reports(&mut buf, std::slice::from_ref(&row)).unwrap();
        let back = read_reports(buf.as_slice(), Path::new("rows.csv")).unwrap();
        prop_assert_eq!(back, vec![row]);
    }
}
