use imc_core::fixtures;
use imc_core::{
    enumerate_mappings, evaluate_mapping, ImcMacroConfig, Layer, MemoryLevel, SpatialMapping,
};
use imc_oracle::{layer_macs, simulate, Bits, LoopNest, SimCounts, Unroll};
use proptest::prelude::*;

fn nest(l: &Layer) -> LoopNest {
    LoopNest {
        b: l.b,
        g: l.g,
        k: l.k,
        c: l.c,
        ox: l.ox,
        oy: l.oy,
        fx: l.fx,
        fy: l.fy,
        sx: l.sx,
        sy: l.sy,
    }
}

fn unroll(m: &SpatialMapping) -> Unroll {
    Unroll {
        k: m.k_u,
        ox: m.ox_u,
        c: m.c_u,
        fx: m.fx_u,
        fy: m.fy_u,
    }
}

fn model_counts(layer: &Layer, cfg: &ImcMacroConfig, m: &SpatialMapping) -> SimCounts {
    let r = evaluate_mapping(layer, cfg, m, &MemoryLevel::ideal()).unwrap();
    SimCounts {
        mvm_invocations: r.mvm_invocations,
        weight_tile_loads: r.weight_tile_loads,
        total_cycles: r.total_cycles,
        macs: layer.total_macs().unwrap(),
        weight_dram_bits: r.traffic.weight_dram,
        weight_macro_bits: r.traffic.weight_macro,
        input_dram_bits: r.traffic.input_dram,
        input_cache_bits: r.traffic.input_cache,
        output_cache_bits: r.traffic.output_cache,
    }
}

fn layer_strategy() -> impl Strategy<Value = Layer> {
    (
        (1u64..=2, 1u64..=3, 1u64..=8, 1u64..=8),
        (1u64..=8, 1u64..=8, 1u64..=3, 1u64..=3),
        (1u64..=3, 1u64..=3),
    )
        .prop_map(|((b, g, k, c), (ox, oy, fx, fy), (sx, sy))| {
            Layer::new(k, c, ox, oy, fx, fy)
                .with_batch(b)
                .with_groups(g)
                .with_strides(sx.min(fx), sy.min(fy))
        })
}

fn macro_strategy() -> impl Strategy<Value = ImcMacroConfig> {
    (1u64..=16, 1u64..=16, any::<bool>(), 1u32..=8, 1u32..=8).prop_map(
        |(d_i, d_o, dimc, b_i, b_w)| {
            let base = if dimc {
                ImcMacroConfig::dimc(d_i, d_o)
            } else {
                ImcMacroConfig::aimc(d_i, d_o)
            };
            ImcMacroConfig {
                b_i,
                b_w,
                b_cycle: base.b_cycle.min(b_i),
                ..base
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traffic_matches_loop_simulator(
        layer in layer_strategy(),
        cfg in macro_strategy(),
        pick in any::<prop::sample::Index>(),
    ) {
        let maps = enumerate_mappings(&layer, &cfg);
        prop_assert!(!maps.is_empty());
        let m = maps[pick.index(maps.len())];
        let bits = Bits {
            b_i: cfg.b_i as u64,
            b_w: cfg.b_w as u64,
            b_o: cfg.b_o as u64,
            cycles_per_mvm: cfg.cycles_per_mvm(),
        };
        let sim = simulate(&nest(&layer), &unroll(&m), &bits);
        prop_assert_eq!(model_counts(&layer, &cfg, &m), sim);
        prop_assert_eq!(sim.macs, layer_macs(&nest(&layer)));
    }

    #[test]
    fn enumerated_mappings_respect_capacity(layer in layer_strategy(), cfg in macro_strategy()) {
        let maps = enumerate_mappings(&layer, &cfg);
        prop_assert!(maps.contains(&SpatialMapping::ONES));
        for m in &maps {
            prop_assert!(m.rows() <= cfg.d_i && m.cols() <= cfg.d_o);
            prop_assert_eq!(layer.k % m.k_u, 0);
            prop_assert_eq!(layer.ox % m.ox_u, 0);
            prop_assert_eq!(layer.c % m.c_u, 0);
            prop_assert_eq!(layer.fx % m.fx_u, 0);
            prop_assert_eq!(layer.fy % m.fy_u, 0);
            let r = evaluate_mapping(&layer, &cfg, m, &MemoryLevel::ideal()).unwrap();
            prop_assert!(r.spatial_utilization > 0.0 && r.spatial_utilization <= 1.0);
            prop_assert!(r.in_unroll_ratio > 0.0 && r.in_unroll_ratio <= 1.0);
            prop_assert!(r.out_unroll_ratio > 0.0 && r.out_unroll_ratio <= 1.0);
            prop_assert_eq!(r.total_cycles, r.mvm_invocations * cfg.cycles_per_mvm());
            let tight = m.rows() == cfg.d_i && m.cols() == cfg.d_o;
            prop_assert_eq!(r.spatial_utilization == 1.0, tight);
        }
    }

    #[test]
    fn larger_arrays_never_need_more_mvms(
        layer in layer_strategy(),
        cfg in macro_strategy(),
        grow_i in 0u64..=8,
        grow_o in 0u64..=8,
    ) {
        let fewest = |c: &ImcMacroConfig| {
            enumerate_mappings(&layer, c)
                .iter()
                .map(|m| evaluate_mapping(&layer, c, m, &MemoryLevel::ideal()).unwrap().mvm_invocations)
                .min()
                .unwrap()
        };
        let bigger = ImcMacroConfig { d_i: cfg.d_i + grow_i, d_o: cfg.d_o + grow_o, ..cfg.clone() };
        prop_assert!(fewest(&bigger) <= fewest(&cfg));
    }
}

#[test]
fn benchmark_layers_match_simulator_on_small_macros() {
    let cfg = ImcMacroConfig::aimc(16, 16);
    let bits = Bits {
        b_i: 8,
        b_w: 8,
        b_o: 8,
        cycles_per_mvm: 4,
    };
    for (_, layer) in [("dw", fixtures::dw_layer()), ("pw", Layer::new(8, 8, 4, 4, 1, 1))] {
        for m in enumerate_mappings(&layer, &cfg) {
            let sim = simulate(&nest(&layer), &unroll(&m), &bits);
            assert_eq!(model_counts(&layer, &cfg, &m), sim, "{m}");
        }
    }
}
