//! Property-based invariants over the graph, taxonomy and cost model.

use proptest::prelude::*;

use gnnflow_core::graph::CsrGraph;
use gnnflow_core::interphase::{run_layer, LayerHardware};
use gnnflow_core::oracle::replay_layer;
use gnnflow_core::phase::{aggregation_cost, combination_cost, HardwareConfig};
use gnnflow_core::taxonomy::{format_dataflow, parse_dataflow, TileConfig};

fn adjacency_strategy() -> impl Strategy<Value = Vec<Vec<u32>>> {
    // Up to 24 vertices with arbitrary (possibly duplicate) neighbor ids.
    (1usize..24).prop_flat_map(|v| {
        proptest::collection::vec(
            proptest::collection::vec(0u32..v as u32, 0..8),
            v..=v,
        )
    })
}

fn pow2() -> impl Strategy<Value = u64> {
    (0u32..4).prop_map(|e| 1u64 << e)
}

fn tiles_strategy() -> impl Strategy<Value = TileConfig> {
    [pow2(), pow2(), pow2(), pow2(), pow2(), pow2()]
        .prop_map(TileConfig::from_tuple)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// CSR construction keeps the vertex array monotone and neighbor lists
    /// sorted, deduplicated and in range.
    #[test]
    fn csr_invariants(adj in adjacency_strategy()) {
        let v = adj.len();
        let g = CsrGraph::from_adjacency(adj, 4).unwrap();
        let va = g.vertex_array();
        prop_assert_eq!(va.len(), v + 1);
        prop_assert_eq!(va[0], 0);
        prop_assert!(va.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(*va.last().unwrap(), g.num_edges());
        for u in 0..v {
            let n = g.neighbors(u);
            prop_assert!(n.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(n.iter().all(|&x| (x as usize) < v));
        }
    }

    /// Self-loop insertion is idempotent and adds at most V edges.
    #[test]
    fn self_loops_idempotent(adj in adjacency_strategy()) {
        let g = CsrGraph::from_adjacency(adj, 1).unwrap();
        let once = g.with_self_loops();
        prop_assert!(once.num_edges() <= g.num_edges() + g.num_vertices());
        let twice = once.with_self_loops();
        prop_assert_eq!(once.vertex_array(), twice.vertex_array());
        prop_assert_eq!(once.edge_array(), twice.edge_array());
    }

    /// Formatting then reparsing a dataflow is the identity on structure.
    #[test]
    fn format_parse_round_trip(
        inter in prop::sample::select(vec!["Seq", "SP", "PP"]),
        order in prop::sample::select(vec!["AC", "CA"]),
        agg in prop::sample::select(vec!["V_x F_x N_t", "V_s F_x N_t", "V_x F_s N_s", "N_t V_x F_x", "F_x V_x N_x"]),
        cmb in prop::sample::select(vec!["V_x G_x F_x", "V_s F_x G_x", "F_s V_x G_t", "G_x V_x F_x"]),
    ) {
        let text = format!("{inter}_{order}({agg}, {cmb})");
        let spec = parse_dataflow(&text).unwrap();
        let rendered = format_dataflow(&spec);
        prop_assert_eq!(&rendered, &text);
        let reparsed = parse_dataflow(&rendered).unwrap();
        prop_assert_eq!(spec, reparsed);
    }

    /// MAC counts are conserved across tilings: aggregation always does
    /// E*F multiply-accumulates, combination V*F*G.
    #[test]
    fn work_conservation(adj in adjacency_strategy(), tiles in tiles_strategy(), f in pow2(), g_dim in pow2()) {
        let graph = CsrGraph::from_adjacency(adj, f * 4).unwrap();
        let spec = parse_dataflow("Seq_AC(V_x F_x N_x, V_x G_x F_x)").unwrap();
        let hw = HardwareConfig::new(1 << 12);
        let agg = aggregation_cost(&graph, &spec.agg, &tiles, &hw).unwrap();
        prop_assert_eq!(agg.mac_count, graph.num_edges() as u64 * graph.num_features());
        // Cycle lower bound: one MAC per PE per cycle.
        prop_assert!(agg.cycles >= agg.mac_count.div_ceil(hw.pe_count));
        prop_assert!(agg.utilization <= 1.0);

        let v = graph.num_vertices() as u64;
        let cmb = combination_cost(v, f * 4, g_dim, &spec.cmb, &tiles, &hw).unwrap();
        prop_assert_eq!(cmb.mac_count, v * f * 4 * g_dim);
        prop_assert!(cmb.cycles >= cmb.mac_count.div_ceil(hw.pe_count));
    }

    /// Growing one vertex's neighborhood never makes aggregation cheaper.
    #[test]
    fn degree_monotonicity(adj in adjacency_strategy(), tiles in tiles_strategy(), pick in 0usize..24) {
        let v = adj.len();
        let target = pick % v;
        let graph = CsrGraph::from_adjacency(adj.clone(), 8).unwrap();
        let mut bigger = adj;
        bigger[target] = (0..v as u32).collect();
        let graph_big = CsrGraph::from_adjacency(bigger, 8).unwrap();
        prop_assume!(graph_big.num_edges() > graph.num_edges());

        let spec = parse_dataflow("Seq_AC(V_x F_x N_x, V_x G_x F_x)").unwrap();
        let hw = HardwareConfig::new(1 << 12);
        let before = aggregation_cost(&graph, &spec.agg, &tiles, &hw).unwrap();
        let after = aggregation_cost(&graph_big, &spec.agg, &tiles, &hw).unwrap();
        prop_assert!(after.cycles >= before.cycles);
        prop_assert!(after.mac_count > before.mac_count);
    }

    /// The analytical model and the event replay agree on arbitrary small
    /// instances of the three inter-phase strategies.
    #[test]
    fn oracle_agrees_with_model(
        adj in adjacency_strategy(),
        f in pow2(),
        g_dim in pow2(),
        t in [pow2(), pow2(), pow2(), pow2()],
    ) {
        let graph = CsrGraph::from_adjacency(adj, f).unwrap();
        let hw = LayerHardware::shared(512);
        let hw_pp = LayerHardware::split(512, 512);
        let cases = [
            (
                "Seq_AC(V_x F_x N_x, V_x G_x F_x)",
                TileConfig::from_tuple([t[0], t[1], t[2], t[0], t[3], t[2]]),
                hw,
            ),
            (
                "SP_AC(V_x F_x N_t, V_x F_x G_x)",
                TileConfig::from_tuple([t[0], 1, t[2], t[0], t[3], t[2]]),
                hw,
            ),
            (
                "PP_AC(V_x F_x N_x, V_x G_x F_x)",
                TileConfig::from_tuple([t[0], t[1], t[2], t[0], t[3], t[2]]),
                hw_pp,
            ),
        ];
        for (notation, tiles, hw) in cases {
            let spec = parse_dataflow(notation).unwrap().with_tiles(tiles);
            let model = run_layer(&graph, g_dim, &spec, &hw).unwrap();
            let replay = replay_layer(&graph, g_dim, &spec, &hw).unwrap();
            prop_assert_eq!(model.total_cycles, replay.cycles, "{}", notation);
            prop_assert_eq!(model.mac_count(), replay.mac_count, "{}", notation);
        }
    }
}
