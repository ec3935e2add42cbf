//! Per-component energy, delay and area equations for one IMC macro.
//!
//! Every function here is a pure function of its arguments. Energies are in
//! joules, delays in seconds and areas in µm².

use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tech::TechnologyParams;

/// Energy / delay / area triple of one hardware component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentCost {
    pub energy: f64,
    pub delay: f64,
    pub area: f64,
}

impl ComponentCost {
    pub const ZERO: ComponentCost = ComponentCost {
        energy: 0.0,
        delay: 0.0,
        area: 0.0,
    };

    pub fn new(energy: f64, delay: f64, area: f64) -> Self {
        Self {
            energy,
            delay,
            area,
        }
    }

    /// Replicates the component `count` times: energy and area scale, delay does not.
    pub fn replicate(self, count: f64) -> Self {
        Self {
            energy: self.energy * count,
            delay: self.delay,
            area: self.area * count,
        }
    }
}

impl Add for ComponentCost {
    type Output = ComponentCost;

    fn add(self, rhs: Self) -> Self {
        Self {
            energy: self.energy + rhs.energy,
            delay: self.delay + rhs.delay,
            area: self.area + rhs.area,
        }
    }
}

impl AddAssign for ComponentCost {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sum for ComponentCost {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ComponentCost::ZERO, Add::add)
    }
}

/// `ceil(log2(n))`, with `ceil_log2(1) == 0`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        u64::BITS - (n - 1).leading_zeros()
    }
}

fn check_activity(op: &'static str, activity: f64) -> Result<()> {
    if (0.0..=1.0).contains(&activity) {
        Ok(())
    } else {
        Err(Error::domain(
            op,
            format!("activity must lie in [0, 1], got {activity}"),
        ))
    }
}

fn check_resolution(op: &'static str, res: u32) -> Result<()> {
    if res >= 1 {
        Ok(())
    } else {
        Err(Error::domain(op, "resolution must be >= 1 bit"))
    }
}

/// Bitline switching energy of the AIMC cell array during one MVM cycle.
///
/// Each cell presents half a gate capacitance to its bitline.
pub fn cell_array_energy(
    params: &TechnologyParams,
    b_w: u32,
    d_i: u64,
    d_o: u64,
    activity: f64,
) -> Result<f64> {
    const OP: &str = "cell_array_energy";
    if b_w == 0 || d_i == 0 || d_o == 0 {
        return Err(Error::domain(OP, "b_w, d_i and d_o must be >= 1"));
    }
    check_activity(OP, activity)?;
    let cells = b_w as f64 * d_i as f64 * d_o as f64;
    Ok(0.5 * params.gate_energy() * cells * activity)
}

/// Required SAR resolution for summing `d_i` products of `input_bits`-bit inputs.
///
/// Rounded up and clamped to at least one bit.
pub fn adc_resolution(params: &TechnologyParams, input_bits: u32, d_i: u64) -> Result<u32> {
    const OP: &str = "adc_resolution";
    if d_i == 0 {
        return Err(Error::domain(OP, "d_i must be >= 1"));
    }
    if input_bits == 0 {
        return Err(Error::domain(OP, "input bits must be >= 1"));
    }
    let exact = input_bits as f64 + (params.adc_k * params.adc_fs * (d_i as f64).sqrt()).log2();
    // absorb log2 rounding noise so exact integers are not bumped up a bit
    let res = (exact - 1e-9).ceil();
    Ok(if res < 1.0 { 1 } else { res as u32 })
}

pub fn adc_energy(params: &TechnologyParams, res: u32) -> Result<f64> {
    check_resolution("adc_energy", res)?;
    let r = res as f64;
    Ok((params.k1 * r + params.k2 * 4f64.powi(res as i32)) * params.v_dd * params.v_dd)
}

/// Bitline settling plus SAR conversion time.
pub fn adc_delay(params: &TechnologyParams, res: u32, d_i: u64) -> Result<f64> {
    check_resolution("adc_delay", res)?;
    if d_i == 0 {
        return Err(Error::domain("adc_delay", "d_i must be >= 1"));
    }
    Ok((params.k3 * d_i as f64 + params.k4) * res as f64)
}

pub fn adc_area(params: &TechnologyParams, res: u32) -> Result<f64> {
    check_resolution("adc_area", res)?;
    let r = res as f64;
    Ok(10f64.powf(-params.k5 * r + params.k6) * 2f64.powi(res as i32))
}

/// DAC energy per conversion. DAC delay and area are neglected.
pub fn dac_energy(params: &TechnologyParams, res: u32) -> Result<f64> {
    check_resolution("dac_energy", res)?;
    Ok(params.k7 * res as f64 * params.v_dd * params.v_dd)
}

/// One NAND2 acting as a 1-bit multiplier.
pub fn multiplier_cost(params: &TechnologyParams) -> ComponentCost {
    ComponentCost::new(0.5 * params.gate_energy(), params.d_gate, params.a_gate)
}

/// Full adders in a binary tree of ripple-carry adders reducing `fan_in`
/// operands of `b_in` bits, each level widening the operands by one bit.
pub fn adder_tree_fa_count(fan_in: u64, b_in: u32) -> Result<u64> {
    const OP: &str = "adder_tree_fa_count";
    if fan_in == 0 || !fan_in.is_power_of_two() {
        return Err(Error::domain(
            OP,
            format!("fan_in must be a power of two, got {fan_in}"),
        ));
    }
    if b_in == 0 {
        return Err(Error::domain(OP, "b_in must be >= 1"));
    }
    let depth = fan_in.trailing_zeros();
    let mut count: u64 = 0;
    for n in 1..=depth {
        let adders = fan_in >> n;
        let width = (b_in + n - 1) as u64;
        count = width
            .checked_mul(adders)
            .and_then(|c| count.checked_add(c))
            .ok_or(Error::Overflow { what: "FA count" })?;
    }
    Ok(count)
}

/// Cost of one ripple-carry adder tree with a power-of-two fan-in.
///
/// The critical path crosses one sum stage per level and then ripples through
/// the carry chain of the widest (output) adder.
pub fn adder_tree_cost(
    params: &TechnologyParams,
    fan_in: u64,
    b_in: u32,
    activity: f64,
) -> Result<ComponentCost> {
    check_activity("adder_tree_cost", activity)?;
    let fas = adder_tree_fa_count(fan_in, b_in)?;
    if fan_in == 1 {
        return Ok(ComponentCost::ZERO);
    }
    let depth = fan_in.trailing_zeros();
    let b_out = b_in + depth;
    Ok(ComponentCost::new(
        params.fa_energy() * fas as f64 * activity,
        params.fa_sum_delay() * depth as f64 + params.fa_carry_delay() * b_out as f64,
        params.fa_area() * fas as f64,
    ))
}

/// Adder tree for any fan-in >= 1.
///
/// Non-power-of-two fan-ins take the depth (and delay) of the next power of
/// two; energy and area are those of the padded tree scaled by
/// `fan_in / padded`.
pub fn padded_adder_tree_cost(
    params: &TechnologyParams,
    fan_in: u64,
    b_in: u32,
    activity: f64,
) -> Result<ComponentCost> {
    if fan_in == 0 {
        return Err(Error::domain("adder_tree_cost", "fan_in must be >= 1"));
    }
    let padded = fan_in
        .checked_next_power_of_two()
        .ok_or(Error::Overflow { what: "tree fan-in" })?;
    let full = adder_tree_cost(params, padded, b_in, activity)?;
    if padded == fan_in {
        return Ok(full);
    }
    let scale = fan_in as f64 / padded as f64;
    Ok(ComponentCost::new(
        full.energy * scale,
        full.delay,
        full.area * scale,
    ))
}

/// Output width of a (padded) adder tree.
pub fn adder_tree_output_bits(fan_in: u64, b_in: u32) -> u32 {
    b_in + ceil_log2(fan_in)
}

/// `b_acc`-bit accumulator: one FA and one DFF per bit, carry ripples through
/// the bits beyond the tree output width.
pub fn accumulator_cost(
    params: &TechnologyParams,
    b_acc: u32,
    b_adds_out: u32,
) -> Result<ComponentCost> {
    if b_acc < b_adds_out {
        return Err(Error::domain(
            "accumulator_cost",
            format!("b_acc ({b_acc}) must be >= b_adds_out ({b_adds_out})"),
        ));
    }
    let bits = b_acc as f64;
    Ok(ComponentCost::new(
        (params.fa_energy() + params.dff_energy()) * bits,
        params.fa_carry_delay() * (b_acc - b_adds_out) as f64,
        (params.fa_area() + params.dff_area()) * bits,
    ))
}

/// `n_bits` DFFs, energy per write event. Clock-to-Q is neglected.
pub fn register_cost(params: &TechnologyParams, n_bits: u64) -> ComponentCost {
    let n = n_bits as f64;
    ComponentCost::new(n * params.dff_energy(), 0.0, n * params.dff_area())
}

pub fn sram_array_area(params: &TechnologyParams, n_cells: u64) -> f64 {
    n_cells as f64 * params.sram_cell_area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> TechnologyParams {
        TechnologyParams::default()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn cell_array_examples() {
        let e = cell_array_energy(&p(), 8, 32, 32, 1.0).unwrap();
        assert!(close(e, 2.3224e-12, 1e-4), "{e}");
        let e = cell_array_energy(&p(), 1, 1, 1, 1.0).unwrap();
        assert!(close(e, 0.2835e-15, 1e-9), "{e}");
        assert_eq!(cell_array_energy(&p(), 8, 64, 17, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn cell_array_rejects_bad_inputs() {
        assert!(cell_array_energy(&p(), 0, 1, 1, 1.0).is_err());
        assert!(cell_array_energy(&p(), 1, 0, 1, 1.0).is_err());
        assert!(cell_array_energy(&p(), 1, 1, 0, 1.0).is_err());
        assert!(cell_array_energy(&p(), 1, 1, 1, 1.5).is_err());
        assert!(cell_array_energy(&p(), 1, 1, 1, -0.1).is_err());
    }

    #[test]
    fn adc_resolution_examples() {
        assert_eq!(adc_resolution(&p(), 2, 16).unwrap(), 4);
        assert_eq!(adc_resolution(&p(), 2, 1024).unwrap(), 7);
        assert_eq!(adc_resolution(&p(), 1, 1).unwrap(), 1);
        assert_eq!(adc_resolution(&p(), 2, 32).unwrap(), 5);
        assert!(adc_resolution(&p(), 2, 0).is_err());
    }

    #[test]
    fn adc_resolution_clamps_to_one_bit() {
        let tiny = TechnologyParams {
            adc_k: 1.0,
            adc_fs: 0.1,
            ..p()
        };
        assert_eq!(adc_resolution(&tiny, 1, 1).unwrap(), 1);
    }

    #[test]
    fn adc_and_dac_examples() {
        assert!(close(adc_energy(&p(), 4).unwrap(), 324.21e-15, 1e-4));
        assert!(close(adc_energy(&p(), 7).unwrap(), 580.27e-15, 1e-4));
        assert!(close(adc_energy(&p(), 10).unwrap(), 1.6594e-12, 1e-4));
        assert!(close(adc_delay(&p(), 4, 32).unwrap(), 3.3958e-9, 1e-4));
        assert!(close(adc_delay(&p(), 7, 1024).unwrap(), 51.29e-9, 1e-3));
        assert!(close(adc_delay(&p(), 1, 1).unwrap(), 646.53e-12, 1e-4));
        assert!(close(adc_area(&p(), 4).unwrap(), 183.1, 1e-3));
        assert!(close(adc_area(&p(), 7).unwrap(), 1134.9, 1e-3));
        assert!(close(adc_area(&p(), 10).unwrap(), 7033.0, 1e-2));
        assert!(close(dac_energy(&p(), 2).unwrap(), 81e-15, 1e-9));
        assert!(close(dac_energy(&p(), 7).unwrap(), 283.5e-15, 1e-9));
        assert!(close(dac_energy(&p(), 1).unwrap(), 40.5e-15, 1e-9));
        for f in [adc_energy, adc_area, dac_energy] {
            assert!(f(&p(), 0).is_err());
        }
        assert!(adc_delay(&p(), 0, 4).is_err());
        assert!(adc_delay(&p(), 4, 0).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let m = multiplier_cost(&p());
        assert!(close(m.energy, 0.2835e-15, 1e-9));
        assert_eq!(m.delay, 47.8e-12);
        assert_eq!(m.area, 0.614);
        let doubled = multiplier_cost(&TechnologyParams { v_dd: 1.8, ..p() });
        assert!(close(doubled.energy, 4.0 * m.energy, 1e-12));
        assert_eq!(doubled.delay, m.delay);
        assert_eq!(doubled.area, m.area);
        let zero = multiplier_cost(&TechnologyParams { c_gate: 0.0, ..p() });
        assert_eq!(zero.energy, 0.0);
    }

    #[test]
    fn fa_count_examples() {
        assert_eq!(adder_tree_fa_count(4, 8).unwrap(), 25);
        assert_eq!(adder_tree_fa_count(8, 4).unwrap(), 32);
        assert_eq!(adder_tree_fa_count(1, 8).unwrap(), 0);
        assert!(adder_tree_fa_count(6, 8).is_err());
        assert!(adder_tree_fa_count(0, 8).is_err());
        assert!(adder_tree_fa_count(4, 0).is_err());
    }

    #[test]
    fn adder_tree_examples() {
        let t = adder_tree_cost(&p(), 4, 8, 1.0).unwrap();
        assert!(close(t.energy, 85.05e-15, 1e-4));
        assert!(close(t.delay, 1.4149e-9, 1e-4));
        assert!(close(t.area, 119.73, 1e-4));
        let t = adder_tree_cost(&p(), 128, 8, 1.0).unwrap();
        assert!(close(t.delay, 3.0401e-9, 1e-4));
        assert_eq!(adder_tree_cost(&p(), 1, 5, 1.0).unwrap(), ComponentCost::ZERO);
    }

    #[test]
    fn padded_tree_interpolates() {
        let full = adder_tree_cost(&p(), 8, 8, 1.0).unwrap();
        let six = padded_adder_tree_cost(&p(), 6, 8, 1.0).unwrap();
        assert_eq!(six.delay, full.delay);
        assert!(close(six.energy, full.energy * 0.75, 1e-12));
        assert!(close(six.area, full.area * 0.75, 1e-12));
        assert_eq!(padded_adder_tree_cost(&p(), 8, 8, 1.0).unwrap(), full);
        assert_eq!(adder_tree_output_bits(6, 8), 11);
    }

    #[test]
    fn accumulator_examples() {
        let a = accumulator_cost(&p(), 22, 15).unwrap();
        assert!(close(a.energy, 112.27e-15, 5e-3));
        assert!(close(a.delay, 669.2e-12, 5e-3));
        assert!(close(a.area, 186.4, 5e-3));
        assert_eq!(accumulator_cost(&p(), 15, 15).unwrap().delay, 0.0);
        assert_eq!(accumulator_cost(&p(), 0, 0).unwrap(), ComponentCost::ZERO);
        assert!(accumulator_cost(&p(), 14, 15).is_err());
    }

    #[test]
    fn register_examples() {
        let r = register_cost(&p(), 1);
        assert!(close(r.energy, 1.701e-15, 1e-9));
        assert_eq!(r.delay, 0.0);
        assert!(close(r.area, 3.684, 1e-9));
        assert_eq!(register_cost(&p(), 0), ComponentCost::ZERO);
        assert!(close(register_cost(&p(), 8).energy, 13.608e-15, 1e-9));
    }

    #[test]
    fn sram_area_examples() {
        assert!(close(sram_array_area(&p(), 1024), 307.2, 1e-12));
        assert_eq!(sram_array_area(&p(), 0), 0.0);
        assert!(close(sram_array_area(&p(), 8 * 1024 * 1024), 2.516e6, 1e-3));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }
}
