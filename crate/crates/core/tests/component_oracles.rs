use imc_core::component::{
    accumulator_cost, adc_area, adc_delay, adc_energy, adc_resolution, adder_tree_cost,
    adder_tree_fa_count, cell_array_energy, dac_energy, multiplier_cost, padded_adder_tree_cost,
    register_cost, sram_array_area,
};
use imc_core::TechnologyParams;
use imc_oracle::{build_adder_tree, Tech};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn pair(scale: [f64; 9]) -> (TechnologyParams, Tech) {
    let p = TechnologyParams {
        c_gate: 0.7e-15 * scale[0],
        k1: 100e-15 * scale[1],
        k2: 1e-18 * scale[2],
        k3: 6.53e-12 * scale[3],
        k4: 640e-12 * scale[4],
        k5: 0.0369 * scale[5],
        k6: 1.206 * scale[6],
        k7: 50e-15 * scale[7],
        v_dd: 0.9 * scale[8],
        ..TechnologyParams::default()
    };
    let t = Tech {
        c_gate: p.c_gate,
        k1: p.k1,
        k2: p.k2,
        k3: p.k3,
        k4: p.k4,
        k5: p.k5,
        k6: p.k6,
        k7: p.k7,
        vdd: p.v_dd,
        ..Tech::default()
    };
    (p, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn equations_match_hand_formulas(
        scale in prop::array::uniform9(0.5f64..2.0),
        res in 1u32..=16,
        d_i in 1u64..=4096,
        d_o in 1u64..=4096,
        b_w in 1u32..=16,
        bits in 1u32..=8,
        activity in 0.0f64..=1.0,
    ) {
        let (p, t) = pair(scale);
        prop_assert!(rel(adc_energy(&p, res).unwrap(), t.adc_energy(res)) <= 1e-12);
        prop_assert!(rel(adc_delay(&p, res, d_i).unwrap(), t.adc_delay(res, d_i as f64)) <= 1e-12);
        prop_assert!(rel(adc_area(&p, res).unwrap(), t.adc_area(res)) <= 1e-12);
        prop_assert!(rel(dac_energy(&p, res).unwrap(), t.dac_energy(res)) <= 1e-12);
        let e = cell_array_energy(&p, b_w, d_i, d_o, activity).unwrap();
        prop_assert!(rel(e, t.cell_array_energy(b_w as f64, d_i as f64, d_o as f64, activity)) <= 1e-12);
        prop_assert_eq!(adc_resolution(&p, bits, d_i).unwrap(), t.adc_resolution(bits as f64, d_i as f64));
    }

    #[test]
    fn adc_costs_increase_with_resolution(res in 1u32..=15, d_i in 1u64..=4096) {
        let p = TechnologyParams::default();
        prop_assert!(adc_energy(&p, res + 1).unwrap() > adc_energy(&p, res).unwrap());
        prop_assert!(adc_area(&p, res + 1).unwrap() > adc_area(&p, res).unwrap());
        prop_assert!(adc_delay(&p, res + 1, d_i).unwrap() > adc_delay(&p, res, d_i).unwrap());
        prop_assert!(adc_delay(&p, res, d_i + 1).unwrap() > adc_delay(&p, res, d_i).unwrap());
    }

    #[test]
    fn padded_tree_between_neighbouring_powers(fan_in in 2u64..=1024, b_in in 1u32..=16) {
        let p = TechnologyParams::default();
        let padded = fan_in.next_power_of_two();
        let lower = padded / 2;
        let c = padded_adder_tree_cost(&p, fan_in, b_in, 1.0).unwrap();
        let hi = adder_tree_cost(&p, padded, b_in, 1.0).unwrap();
        let lo = adder_tree_cost(&p, lower, b_in, 1.0).unwrap();
        prop_assert_eq!(c.delay, hi.delay);
        prop_assert!(c.energy <= hi.energy * (1.0 + 1e-12));
        prop_assert!(c.energy >= lo.energy * (1.0 - 1e-12));
    }
}

#[test]
fn worked_values_reproduce() {
    let p = TechnologyParams::default();
    assert!(rel(adc_energy(&p, 4).unwrap(), 324.207e-15) < 1e-5);
    assert!(rel(adc_energy(&p, 7).unwrap(), 580.271e-15) < 1e-5);
    assert!(rel(adc_energy(&p, 10).unwrap(), 1.6594e-12) < 1e-4);
    assert!(rel(adc_delay(&p, 4, 32).unwrap(), 3.39584e-9) < 1e-5);
    assert!(rel(adc_delay(&p, 7, 1024).unwrap(), 51.28704e-9) < 1e-6);
    assert!(rel(adc_delay(&p, 1, 1).unwrap(), 646.53e-12) < 1e-9);
    assert!(rel(adc_area(&p, 4).unwrap(), 183.1) < 1e-3);
    // 10^0.9477 · 128 = 1134.78; the quoted figure is rounded up in its last digit
    assert!((adc_area(&p, 7).unwrap() - 1134.9).abs() < 0.15);
    assert!(rel(adc_area(&p, 10).unwrap(), 7033.0) < 1e-2);
    assert!(rel(dac_energy(&p, 2).unwrap(), 81e-15) < 1e-12);
    assert!(rel(dac_energy(&p, 7).unwrap(), 283.5e-15) < 1e-12);
    assert!(rel(cell_array_energy(&p, 8, 32, 32, 1.0).unwrap(), 2.32243e-12) < 1e-5);
    assert!(rel(cell_array_energy(&p, 1, 1, 1, 1.0).unwrap(), 0.2835e-15) < 1e-12);
    assert_eq!(cell_array_energy(&p, 8, 32, 32, 0.0).unwrap(), 0.0);
    assert_eq!(adc_resolution(&p, 2, 16).unwrap(), 4);
    assert_eq!(adc_resolution(&p, 2, 1024).unwrap(), 7);
    assert_eq!(adc_resolution(&p, 1, 1).unwrap(), 1);
}

#[test]
fn small_component_worked_values() {
    let p = TechnologyParams::default();
    let m = multiplier_cost(&p);
    assert!(rel(m.energy, 0.2835e-15) < 1e-12);
    assert_eq!((m.delay, m.area), (47.8e-12, 0.614));
    let t = adder_tree_cost(&p, 4, 8, 1.0).unwrap();
    assert!(rel(t.energy, 85.05e-15) < 1e-12);
    assert!(rel(t.delay, 1.41488e-9) < 1e-5);
    assert!(rel(t.area, 119.73) < 1e-4);
    assert!(rel(adder_tree_cost(&p, 128, 8, 1.0).unwrap().delay, 3.0401e-9) < 1e-4);
    let a = accumulator_cost(&p, 22, 15).unwrap();
    assert!(rel(a.energy, 112.27e-15) < 5e-3);
    assert!(rel(a.delay, 669.2e-12) < 1e-9);
    assert!(rel(a.area, 186.4) < 5e-3);
    assert!(rel(register_cost(&p, 8).energy, 13.608e-15) < 1e-12);
    assert!(rel(sram_array_area(&p, 1024), 307.2) < 1e-12);
    assert!(rel(sram_array_area(&p, 8 * 1024 * 1024), 2.516e6) < 1e-3);
}

#[test]
fn adder_tree_matches_explicit_construction() {
    let p = TechnologyParams::default();
    let t = Tech::default();
    for log in 1..=10 {
        let fan_in = 1u64 << log;
        for b_in in 1..=16 {
            let built = build_adder_tree(fan_in as usize, b_in);
            assert_eq!(adder_tree_fa_count(fan_in, b_in).unwrap(), built.full_adders);
            let c = adder_tree_cost(&p, fan_in, b_in, 1.0).unwrap();
            assert!(rel(c.delay, built.delay(&t)) < 1e-12, "fan_in {fan_in} b_in {b_in}");
            assert!(rel(c.energy, built.full_adders as f64 * t.fa_energy()) < 1e-12);
            assert!(rel(c.area, built.full_adders as f64 * t.fa_area()) < 1e-12);
        }
    }
    assert_eq!(adder_tree_fa_count(4, 8).unwrap(), 25);
}

#[test]
fn domain_errors() {
    let p = TechnologyParams::default();
    assert!(adc_energy(&p, 0).is_err());
    assert!(adc_area(&p, 0).is_err());
    assert!(adc_delay(&p, 0, 4).is_err());
    assert!(adc_delay(&p, 4, 0).is_err());
    assert!(dac_energy(&p, 0).is_err());
    assert!(adc_resolution(&p, 2, 0).is_err());
    assert!(cell_array_energy(&p, 0, 1, 1, 0.5).is_err());
    assert!(cell_array_energy(&p, 1, 1, 1, 1.5).is_err());
    assert!(adder_tree_fa_count(6, 8).is_err());
    assert!(accumulator_cost(&p, 3, 4).is_err());
}
