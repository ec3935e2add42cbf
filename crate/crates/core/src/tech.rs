//! Technology constants for the 28nm / 0.9 V cost model.
//!
//! All values are SI base units (farads, seconds, volts, joules) except areas,
//! which are µm² throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which input precision drives the ADC resolution rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdcInputBits {
    /// Only the bits applied in one cycle (`b_cycle`) enter the analog sum.
    #[default]
    PerCycle,
    /// The full activation precision `b_i`.
    FullInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TechnologyParams {
    pub v_dd: f64,
    /// NAND2 gate capacitance.
    pub c_gate: f64,
    /// NAND2 delay.
    pub d_gate: f64,
    /// NAND2 area.
    pub a_gate: f64,
    /// ADC energy: linear term (F).
    pub k1: f64,
    /// ADC energy: exponential term (F).
    pub k2: f64,
    /// ADC settling delay per attached cell (s).
    pub k3: f64,
    /// SAR conversion delay per bit (s).
    pub k4: f64,
    /// ADC area exponent slope.
    pub k5: f64,
    /// ADC area exponent offset.
    pub k6: f64,
    /// DAC capacitance per bit (F).
    pub k7: f64,
    pub fa_energy_ratio: f64,
    pub dff_energy_ratio: f64,
    pub fa_sum_delay_ratio: f64,
    pub fa_carry_delay_ratio: f64,
    pub fa_area_ratio: f64,
    pub dff_area_ratio: f64,
    /// Area of one 6T cell, µm². Placeholder until fitted to a memory compiler.
    pub sram_cell_area: f64,
    /// Energy to write one bit into the array, J. Placeholder.
    pub sram_cell_write_energy: f64,
    /// ADC full-scale range as a fraction of the supply.
    pub adc_fs: f64,
    /// Noise-margin constant of the resolution rule.
    pub adc_k: f64,
    pub adc_input_bits: AdcInputBits,
}

impl Default for TechnologyParams {
    fn default() -> Self {
        Self {
            v_dd: 0.9,
            c_gate: 0.7e-15,
            d_gate: 47.8e-12,
            a_gate: 0.614,
            k1: 100e-15,
            k2: 1e-18,
            k3: 6.53e-12,
            k4: 640e-12,
            k5: 0.0369,
            k6: 1.206,
            k7: 50e-15,
            fa_energy_ratio: 6.0,
            dff_energy_ratio: 3.0,
            fa_sum_delay_ratio: 4.8,
            fa_carry_delay_ratio: 2.0,
            fa_area_ratio: 7.8,
            dff_area_ratio: 6.0,
            sram_cell_area: 0.3,
            sram_cell_write_energy: 50e-15,
            adc_fs: 0.5,
            adc_k: 2.0,
            adc_input_bits: AdcInputBits::PerCycle,
        }
    }
}

impl TechnologyParams {
    /// `c_gate · v_dd²`, the switching energy of one NAND2.
    pub fn gate_energy(&self) -> f64 {
        self.c_gate * self.v_dd * self.v_dd
    }

    pub fn fa_energy(&self) -> f64 {
        self.fa_energy_ratio * self.gate_energy()
    }

    pub fn dff_energy(&self) -> f64 {
        self.dff_energy_ratio * self.gate_energy()
    }

    pub fn fa_sum_delay(&self) -> f64 {
        self.fa_sum_delay_ratio * self.d_gate
    }

    pub fn fa_carry_delay(&self) -> f64 {
        self.fa_carry_delay_ratio * self.d_gate
    }

    pub fn fa_area(&self) -> f64 {
        self.fa_area_ratio * self.a_gate
    }

    pub fn dff_area(&self) -> f64 {
        self.dff_area_ratio * self.a_gate
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_dd", self.v_dd),
            ("c_gate", self.c_gate),
            ("d_gate", self.d_gate),
            ("a_gate", self.a_gate),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("k7", self.k7),
            ("fa_energy_ratio", self.fa_energy_ratio),
            ("dff_energy_ratio", self.dff_energy_ratio),
            ("fa_sum_delay_ratio", self.fa_sum_delay_ratio),
            ("fa_carry_delay_ratio", self.fa_carry_delay_ratio),
            ("fa_area_ratio", self.fa_area_ratio),
            ("dff_area_ratio", self.dff_area_ratio),
            ("sram_cell_area", self.sram_cell_area),
            ("sram_cell_write_energy", self.sram_cell_write_energy),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    format!("technology.{name}"),
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if !(self.k5.is_finite() && self.k6.is_finite()) {
            return Err(Error::config("technology.k5/k6", "must be finite"));
        }
        if !(self.adc_fs > 0.0 && self.adc_fs <= 1.0) {
            return Err(Error::config(
                "technology.adc_fs",
                format!("must lie in (0, 1], got {}", self.adc_fs),
            ));
        }
        if !(self.adc_k.is_finite() && self.adc_k >= 1.0) {
            return Err(Error::config(
                "technology.adc_k",
                format!("must be >= 1, got {}", self.adc_k),
            ));
        }
        Ok(())
    }
}
