//! Independent reference evaluations used by the test suites.
//!
//! Nothing here depends on `imc-core`: constants are restated, formulas are
//! written out directly, the adder tree is built operand by operand and the
//! mapper traffic is counted by walking every loop iteration.

use std::collections::HashSet;

/// Reference 28nm / 0.9V constants.
pub mod consts {
    pub const C_GATE: f64 = 0.7e-15;
    pub const D_GATE: f64 = 47.8e-12;
    pub const A_GATE: f64 = 0.614;
    pub const K1: f64 = 100e-15;
    pub const K2: f64 = 1e-18;
    pub const K3: f64 = 6.53e-12;
    pub const K4: f64 = 640e-12;
    pub const K5: f64 = 0.0369;
    pub const K6: f64 = 1.206;
    pub const K7: f64 = 50e-15;
    pub const VDD: f64 = 0.9;
    pub const FS: f64 = 0.5;
    pub const K_ADC: f64 = 2.0;
}

/// Parameter set for the hand formulas, so tests can randomize it.
#[derive(Debug, Clone, Copy)]
pub struct Tech {
    pub c_gate: f64,
    pub d_gate: f64,
    pub a_gate: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
    pub k6: f64,
    pub k7: f64,
    pub vdd: f64,
    pub fs: f64,
    pub k_adc: f64,
}

impl Default for Tech {
    fn default() -> Self {
        use consts::*;
        Self {
            c_gate: C_GATE,
            d_gate: D_GATE,
            a_gate: A_GATE,
            k1: K1,
            k2: K2,
            k3: K3,
            k4: K4,
            k5: K5,
            k6: K6,
            k7: K7,
            vdd: VDD,
            fs: FS,
            k_adc: K_ADC,
        }
    }
}

impl Tech {
    pub fn cell_array_energy(&self, b_w: f64, d_i: f64, d_o: f64, activity: f64) -> f64 {
        let c_cell = self.c_gate / 2.0;
        c_cell * self.vdd * self.vdd * b_w * d_i * d_o * activity
    }

    pub fn adc_resolution(&self, bits: f64, d_i: f64) -> u32 {
        let exact = bits + (self.k_adc * self.fs * d_i.sqrt()).log2();
        // tolerate representation error on exact integers
        let r = (exact - 1e-9).ceil();
        if r < 1.0 {
            1
        } else {
            r as u32
        }
    }

    pub fn adc_energy(&self, res: u32) -> f64 {
        let r = res as f64;
        (self.k1 * r + self.k2 * 4f64.powf(r)) * self.vdd * self.vdd
    }

    pub fn adc_delay(&self, res: u32, d_i: f64) -> f64 {
        (self.k3 * d_i + self.k4) * res as f64
    }

    pub fn adc_area(&self, res: u32) -> f64 {
        let r = res as f64;
        10f64.powf(self.k6 - self.k5 * r) * 2f64.powf(r)
    }

    pub fn dac_energy(&self, res: u32) -> f64 {
        self.k7 * res as f64 * self.vdd * self.vdd
    }

    pub fn fa_energy(&self) -> f64 {
        6.0 * self.c_gate * self.vdd * self.vdd
    }

    pub fn fa_sum_delay(&self) -> f64 {
        4.8 * self.d_gate
    }

    pub fn fa_carry_delay(&self) -> f64 {
        2.0 * self.d_gate
    }

    pub fn fa_area(&self) -> f64 {
        7.8 * self.a_gate
    }
}

/// A reduction tree built by pairing operands level by level with
/// ripple-carry adders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuiltTree {
    pub full_adders: u64,
    pub depth: u32,
    pub output_bits: u32,
}

/// Builds the tree for `fan_in` operands of `b_in` bits. A `w`-bit adder uses
/// `w` full adders and yields `w + 1` bits.
pub fn build_adder_tree(fan_in: usize, b_in: u32) -> BuiltTree {
    assert!(fan_in >= 1);
    let mut operands = vec![b_in; fan_in];
    let mut full_adders = 0u64;
    let mut depth = 0u32;
    while operands.len() > 1 {
        let mut next = Vec::with_capacity(operands.len().div_ceil(2));
        for pair in operands.chunks(2) {
            match *pair {
                [a, b] => {
                    let w = a.max(b);
                    full_adders += w as u64;
                    next.push(w + 1);
                }
                [a] => next.push(a),
                _ => unreachable!(),
            }
        }
        operands = next;
        depth += 1;
    }
    BuiltTree {
        full_adders,
        depth,
        output_bits: operands[0],
    }
}

impl BuiltTree {
    /// Critical path: one sum delay per level, then the final carry ripple.
    pub fn delay(&self, tech: &Tech) -> f64 {
        if self.depth == 0 {
            return 0.0;
        }
        tech.fa_sum_delay() * self.depth as f64 + tech.fa_carry_delay() * self.output_bits as f64
    }
}

/// Loop bounds of a layer, restated locally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopNest {
    pub b: u64,
    pub g: u64,
    pub k: u64,
    pub c: u64,
    pub ox: u64,
    pub oy: u64,
    pub fx: u64,
    pub fy: u64,
    pub sx: u64,
    pub sy: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unroll {
    pub k: u64,
    pub ox: u64,
    pub c: u64,
    pub fx: u64,
    pub fy: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bits {
    pub b_i: u64,
    pub b_w: u64,
    pub b_o: u64,
    pub cycles_per_mvm: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimCounts {
    pub mvm_invocations: u64,
    pub weight_tile_loads: u64,
    pub total_cycles: u64,
    pub macs: u64,
    pub weight_dram_bits: u64,
    pub weight_macro_bits: u64,
    pub input_dram_bits: u64,
    pub input_cache_bits: u64,
    pub output_cache_bits: u64,
}

/// Walks the weight-stationary schedule: weight tiles (g, k, c, fx, fy) outer,
/// then b, oy and ox tiles, one MVM per innermost iteration. Every row slot
/// and column slot of the array is visited each MVM. Outputs accumulate in
/// place and are written once; inputs are fetched from DRAM once each.
pub fn simulate(layer: &LoopNest, u: &Unroll, bits: &Bits) -> SimCounts {
    let tiles = |n: u64, f: u64| n.div_ceil(f);
    let mut out = SimCounts::default();
    let mut weights = HashSet::new();
    let mut inputs = HashSet::new();
    let mut outputs = HashSet::new();

    for g in 0..layer.g {
        for kt in 0..tiles(layer.k, u.k) {
            for ct in 0..tiles(layer.c, u.c) {
                for fxt in 0..tiles(layer.fx, u.fx) {
                    for fyt in 0..tiles(layer.fy, u.fy) {
                        out.weight_tile_loads += 1;
                        let rows = row_slots(layer, u, ct, fxt, fyt);
                        // every column slot holds its own copy of the tile
                        for ku in 0..u.k {
                            let k = kt * u.k + ku;
                            if k >= layer.k {
                                continue;
                            }
                            for _oxu in 0..u.ox {
                                for &(c, fx, fy) in &rows {
                                    out.weight_macro_bits += bits.b_w;
                                    weights.insert((g, k, c, fx, fy));
                                }
                            }
                        }
                        for b in 0..layer.b {
                            for oy in 0..layer.oy {
                                for oxt in 0..tiles(layer.ox, u.ox) {
                                    out.mvm_invocations += 1;
                                    out.total_cycles += bits.cycles_per_mvm;
                                    out.input_cache_bits += rows.len() as u64 * bits.b_i;
                                    for ku in 0..u.k {
                                        let k = kt * u.k + ku;
                                        for oxu in 0..u.ox {
                                            let ox = oxt * u.ox + oxu;
                                            if k >= layer.k || ox >= layer.ox {
                                                continue;
                                            }
                                            outputs.insert((b, g, k, ox, oy));
                                            for &(c, fx, fy) in &rows {
                                                out.macs += 1;
                                                let ix = ox * layer.sx + fx;
                                                let iy = oy * layer.sy + fy;
                                                inputs.insert((b, g, c, ix, iy));
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.weight_dram_bits = weights.len() as u64 * bits.b_w;
    out.input_dram_bits = inputs.len() as u64 * bits.b_i;
    out.output_cache_bits = outputs.len() as u64 * bits.b_o;
    out
}

fn row_slots(layer: &LoopNest, u: &Unroll, ct: u64, fxt: u64, fyt: u64) -> Vec<(u64, u64, u64)> {
    let mut rows = Vec::new();
    for cu in 0..u.c {
        for fxu in 0..u.fx {
            for fyu in 0..u.fy {
                let (c, fx, fy) = (ct * u.c + cu, fxt * u.fx + fxu, fyt * u.fy + fyu);
                if c < layer.c && fx < layer.fx && fy < layer.fy {
                    rows.push((c, fx, fy));
                }
            }
        }
    }
    rows
}

/// Direct MAC count of a layer.
pub fn layer_macs(l: &LoopNest) -> u64 {
    l.b * l.g * l.k * l.c * l.ox * l.oy * l.fx * l.fy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_spot_values() {
        assert_eq!(build_adder_tree(4, 8).full_adders, 25);
        assert_eq!(build_adder_tree(8, 4).full_adders, 32);
        assert_eq!(build_adder_tree(1, 8).full_adders, 0);
        let t = build_adder_tree(128, 8);
        assert_eq!((t.depth, t.output_bits), (7, 15));
    }

    #[test]
    fn simulator_macs_match_loop_product() {
        let l = LoopNest {
            b: 1,
            g: 2,
            k: 3,
            c: 2,
            ox: 4,
            oy: 2,
            fx: 3,
            fy: 1,
            sx: 1,
            sy: 1,
        };
        let u = Unroll {
            k: 3,
            ox: 2,
            c: 1,
            fx: 3,
            fy: 1,
        };
        let bits = Bits {
            b_i: 8,
            b_w: 8,
            b_o: 8,
            cycles_per_mvm: 4,
        };
        let s = simulate(&l, &u, &bits);
        assert_eq!(s.macs, layer_macs(&l));
        assert_eq!(s.mvm_invocations, 2 * 2 * 2 * 2);
        assert_eq!(s.output_cache_bits, 2 * 3 * 4 * 2 * 8);
    }
}
