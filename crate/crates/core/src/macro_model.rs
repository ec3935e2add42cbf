//! Composition of component costs into AIMC and DIMC macro metrics.
//!
//! Both templates share the same vocabulary: `d_i` rows receive inputs,
//! `d_o` columns produce outputs, each output column holds `b_w` weight-bit
//! cells per row and `m` cells share one local compute port. An MVM takes
//! `ceil(b_i / b_cycle)` cycles.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::component::{
    accumulator_cost, adc_area, adc_delay, adc_energy, adc_resolution, adder_tree_output_bits,
    cell_array_energy, ceil_log2, dac_energy, multiplier_cost, padded_adder_tree_cost,
    register_cost, sram_array_area, ComponentCost,
};
use crate::error::{Error, Result};
use crate::tech::{AdcInputBits, TechnologyParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImcType {
    Aimc,
    Dimc,
}

impl fmt::Display for ImcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImcType::Aimc => "AIMC",
            ImcType::Dimc => "DIMC",
        })
    }
}

/// Cost-breakdown keys. The first eight are macro components; the last three
/// only appear in system-level breakdowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    CellArray,
    Dac,
    Adc,
    Multiplier,
    AdderTree,
    Accumulator,
    Registers,
    PipelineRegisters,
    Cache,
    Dram,
    WeightLoad,
}

impl Component {
    pub const MACRO: [Component; 8] = [
        Component::CellArray,
        Component::Dac,
        Component::Adc,
        Component::Multiplier,
        Component::AdderTree,
        Component::Accumulator,
        Component::Registers,
        Component::PipelineRegisters,
    ];

    pub const ALL: [Component; 11] = [
        Component::CellArray,
        Component::Dac,
        Component::Adc,
        Component::Multiplier,
        Component::AdderTree,
        Component::Accumulator,
        Component::Registers,
        Component::PipelineRegisters,
        Component::Cache,
        Component::Dram,
        Component::WeightLoad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::CellArray => "cell_array",
            Component::Dac => "dac",
            Component::Adc => "adc",
            Component::Multiplier => "multiplier",
            Component::AdderTree => "adder_tree",
            Component::Accumulator => "accumulator",
            Component::Registers => "registers",
            Component::PipelineRegisters => "pipeline_registers",
            Component::Cache => "cache",
            Component::Dram => "dram",
            Component::WeightLoad => "weight_load",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One IMC design point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImcMacroConfig {
    pub imc_type: ImcType,
    pub b_i: u32,
    pub b_w: u32,
    /// Input bits applied per cycle (DAC resolution for AIMC).
    pub b_cycle: u32,
    pub d_i: u64,
    pub d_o: u64,
    /// Cells sharing one local bitline / NAND port.
    pub m: u64,
    pub n_macros: u64,
    pub input_toggle_rate: f64,
    pub weight_sparsity: f64,
    pub pipelined: bool,
    /// Output bits written back to memory per output.
    pub b_o: u32,
}

impl ImcMacroConfig {
    /// INT8 AIMC with two input bits per cycle.
    pub fn aimc(d_i: u64, d_o: u64) -> Self {
        Self {
            imc_type: ImcType::Aimc,
            b_i: 8,
            b_w: 8,
            b_cycle: 2,
            d_i,
            d_o,
            m: 1,
            n_macros: 1,
            input_toggle_rate: 0.5,
            weight_sparsity: 0.0,
            pipelined: false,
            b_o: 8,
        }
    }

    /// INT8 bit-serial DIMC.
    pub fn dimc(d_i: u64, d_o: u64) -> Self {
        Self {
            imc_type: ImcType::Dimc,
            b_cycle: 1,
            ..Self::aimc(d_i, d_o)
        }
    }

    /// Combined activity factor applied to data-dependent switching energy.
    pub fn activity(&self) -> f64 {
        self.input_toggle_rate * (1.0 - self.weight_sparsity)
    }

    pub fn cycles_per_mvm(&self) -> u64 {
        self.b_i.div_ceil(self.b_cycle) as u64
    }

    /// MACs performed by one macro in one MVM.
    pub fn macs_per_mvm(&self) -> f64 {
        self.d_i as f64 * self.d_o as f64
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_i", self.d_i),
            ("d_o", self.d_o),
            ("m", self.m),
            ("n_macros", self.n_macros),
        ] {
            if v == 0 {
                return Err(Error::config(format!("macro.{name}"), "must be >= 1"));
            }
        }
        for (name, v) in [
            ("b_i", self.b_i),
            ("b_w", self.b_w),
            ("b_cycle", self.b_cycle),
            ("b_o", self.b_o),
        ] {
            if v == 0 {
                return Err(Error::config(format!("macro.{name}"), "must be >= 1"));
            }
        }
        if self.b_cycle > self.b_i {
            return Err(Error::config(
                "macro.b_cycle",
                format!("must not exceed b_i ({} > {})", self.b_cycle, self.b_i),
            ));
        }
        for (name, v) in [
            ("input_toggle_rate", self.input_toggle_rate),
            ("weight_sparsity", self.weight_sparsity),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(
                    format!("macro.{name}"),
                    format!("must lie in [0, 1], got {v}"),
                ));
            }
        }
        Ok(())
    }

    fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.b_i.is_multiple_of(self.b_cycle) {
            w.push(format!(
                "b_cycle = {} does not divide b_i = {}; cycles rounded up to {}",
                self.b_cycle,
                self.b_i,
                self.cycles_per_mvm()
            ));
        }
        w
    }
}

pub type Breakdown = BTreeMap<Component, ComponentCost>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    /// Energy of one MVM on one macro, J.
    pub energy_per_mvm: f64,
    pub clock_period: f64,
    pub cycles_per_mvm: u64,
    /// Area of all macros, µm².
    pub area: f64,
    /// TOP/s over all macros, 2 ops per MAC.
    pub tops: f64,
    pub tops_per_w: f64,
    pub tops_per_mm2: f64,
    /// Energy per MVM (one macro), critical-path delay and area (all macros)
    /// per component. Every macro component key is present.
    pub breakdown: Breakdown,
    pub warnings: Vec<String>,
}

impl MacroMetrics {
    pub fn energy_per_mac(&self, cfg: &ImcMacroConfig) -> f64 {
        self.energy_per_mvm / cfg.macs_per_mvm()
    }
}

/// Per-MVM costs of one macro with only `rows` x `cols` of the array active.
///
/// Energies are per MVM; areas always cover the full array; delays are the
/// contribution of each component to the clock period.
#[derive(Debug, Clone)]
pub(crate) struct Composition {
    pub parts: Breakdown,
    pub clock_period: f64,
    pub cycles_per_mvm: u64,
}

fn empty_breakdown() -> Breakdown {
    Component::MACRO
        .iter()
        .map(|&c| (c, ComponentCost::ZERO))
        .collect()
}

/// Splits a two-stage critical path. Returns the scale applied to each stage's
/// delays in the breakdown so that they add up to the clock period.
fn stage_weights(pipelined: bool, first: f64, second: f64) -> (f64, f64, f64) {
    if !pipelined {
        (first + second, 1.0, 1.0)
    } else if first >= second {
        (first, 1.0, 0.0)
    } else {
        (second, 0.0, 1.0)
    }
}

pub(crate) fn compose(
    params: &TechnologyParams,
    cfg: &ImcMacroConfig,
    rows: u64,
    cols: u64,
) -> Result<Composition> {
    cfg.validate()?;
    if rows == 0 || rows > cfg.d_i || cols == 0 || cols > cfg.d_o {
        return Err(Error::domain(
            "macro composition",
            format!(
                "active region {rows}x{cols} outside array {}x{}",
                cfg.d_i, cfg.d_o
            ),
        ));
    }
    match cfg.imc_type {
        ImcType::Aimc => compose_aimc(params, cfg, rows, cols),
        ImcType::Dimc => compose_dimc(params, cfg, rows, cols),
    }
}

fn compose_aimc(
    params: &TechnologyParams,
    cfg: &ImcMacroConfig,
    rows: u64,
    cols: u64,
) -> Result<Composition> {
    let cycles = cfg.cycles_per_mvm();
    let cyc = cycles as f64;
    let alpha = cfg.activity();
    let (r, q) = (rows as f64, cols as f64);
    let d_o = cfg.d_o as f64;
    let b_w = cfg.b_w as f64;

    let adc_bits = match params.adc_input_bits {
        AdcInputBits::PerCycle => cfg.b_cycle,
        AdcInputBits::FullInput => cfg.b_i,
    };
    let res = adc_resolution(params, adc_bits, cfg.d_i)?;

    let mut parts = empty_breakdown();

    let cells = cfg.d_i * cfg.d_o * cfg.b_w as u64 * cfg.m;
    parts.insert(
        Component::CellArray,
        ComponentCost::new(
            cyc * cell_array_energy(params, cfg.b_w, rows, cols, alpha)?,
            0.0,
            sram_array_area(params, cells),
        ),
    );
    parts.insert(
        Component::Dac,
        ComponentCost::new(cyc * r * dac_energy(params, cfg.b_cycle)?, 0.0, 0.0),
    );

    let adc_t = adc_delay(params, res, cfg.d_i)?;
    // one converter per bitline
    let adc = ComponentCost::new(
        cyc * q * b_w * adc_energy(params, res)?,
        adc_t,
        d_o * b_w * adc_area(params, res)?,
    );

    // shift-add tree combining the b_w weight-bit columns of each output
    let tree = padded_adder_tree_cost(params, cfg.b_w as u64, res, alpha)?;
    let b_adds_out = adder_tree_output_bits(cfg.b_w as u64, res);
    let b_acc = b_adds_out + (cfg.b_i - cfg.b_cycle);
    let acc = accumulator_cost(params, b_acc, b_adds_out)?;

    let (clock, w1, w2) = stage_weights(cfg.pipelined, adc_t, tree.delay + acc.delay);
    parts.insert(
        Component::Adc,
        ComponentCost::new(adc.energy, adc.delay * w1, adc.area),
    );
    parts.insert(
        Component::AdderTree,
        ComponentCost::new(cyc * q * tree.energy, tree.delay * w2, d_o * tree.area),
    );
    parts.insert(
        Component::Accumulator,
        ComponentCost::new(cyc * q * acc.energy, acc.delay * w2, d_o * acc.area),
    );

    parts.insert(
        Component::Registers,
        io_registers(params, cfg, rows, cols),
    );
    if cfg.pipelined {
        let per_output = register_cost(params, res as u64 * cfg.b_w as u64);
        parts.insert(
            Component::PipelineRegisters,
            ComponentCost::new(cyc * q * per_output.energy, 0.0, d_o * per_output.area),
        );
    }

    Ok(Composition {
        parts,
        clock_period: clock,
        cycles_per_mvm: cycles,
    })
}

fn compose_dimc(
    params: &TechnologyParams,
    cfg: &ImcMacroConfig,
    rows: u64,
    cols: u64,
) -> Result<Composition> {
    let cycles = cfg.cycles_per_mvm();
    let cyc = cycles as f64;
    let alpha = cfg.activity();
    let (r, q) = (rows as f64, cols as f64);
    let d_o = cfg.d_o as f64;
    let bits_per_cell_port = (cfg.b_w * cfg.b_cycle) as f64;
    let b_cycle = cfg.b_cycle as f64;

    let mut parts = empty_breakdown();

    let cells = cfg.d_i * cfg.d_o * cfg.b_w as u64 * cfg.m;
    parts.insert(
        Component::CellArray,
        ComponentCost::new(0.0, 0.0, sram_array_area(params, cells)),
    );

    let nand = multiplier_cost(params);
    let mult = ComponentCost::new(
        cyc * r * q * bits_per_cell_port * nand.energy * alpha,
        nand.delay,
        cfg.d_i as f64 * d_o * bits_per_cell_port * nand.area,
    );

    // b_cycle column trees per output, each reducing d_i products of b_w bits
    let tree = padded_adder_tree_cost(params, cfg.d_i, cfg.b_w, alpha)?;
    let tree_out = adder_tree_output_bits(cfg.d_i, cfg.b_w);
    let (combine, b_adds_out) = if cfg.b_cycle > 1 {
        let c = padded_adder_tree_cost(params, cfg.b_cycle as u64, tree_out, alpha)?;
        (c, tree_out + ceil_log2(cfg.b_cycle.max(2) as u64))
    } else {
        (ComponentCost::ZERO, tree_out)
    };
    let b_acc = b_adds_out + (cfg.b_i - cfg.b_cycle);
    let acc = accumulator_cost(params, b_acc, b_adds_out)?;

    let second = tree.delay + combine.delay + acc.delay;
    let (clock, w1, w2) = stage_weights(cfg.pipelined, mult.delay, second);
    parts.insert(
        Component::Multiplier,
        ComponentCost::new(mult.energy, mult.delay * w1, mult.area),
    );
    parts.insert(
        Component::AdderTree,
        ComponentCost::new(
            cyc * q * (b_cycle * tree.energy + combine.energy),
            (tree.delay + combine.delay) * w2,
            d_o * (b_cycle * tree.area + combine.area),
        ),
    );
    parts.insert(
        Component::Accumulator,
        ComponentCost::new(cyc * q * acc.energy, acc.delay * w2, d_o * acc.area),
    );
    parts.insert(
        Component::Registers,
        io_registers(params, cfg, rows, cols),
    );
    if cfg.pipelined {
        let per_output = register_cost(params, cfg.b_cycle as u64 * cfg.b_w as u64 * cfg.d_i);
        parts.insert(
            Component::PipelineRegisters,
            ComponentCost::new(cyc * q * per_output.energy, 0.0, d_o * per_output.area),
        );
    }

    Ok(Composition {
        parts,
        clock_period: clock,
        cycles_per_mvm: cycles,
    })
}

/// Input registers (written once per MVM) and output registers.
fn io_registers(
    params: &TechnologyParams,
    cfg: &ImcMacroConfig,
    rows: u64,
    cols: u64,
) -> ComponentCost {
    let active = register_cost(params, rows * cfg.b_i as u64 + cols * cfg.b_o as u64);
    let full = register_cost(params, cfg.d_i * cfg.b_i as u64 + cfg.d_o * cfg.b_o as u64);
    ComponentCost::new(active.energy, 0.0, full.area)
}

fn finish(cfg: &ImcMacroConfig, comp: Composition) -> MacroMetrics {
    let n = cfg.n_macros as f64;
    let breakdown: Breakdown = comp
        .parts
        .into_iter()
        .map(|(k, c)| (k, ComponentCost::new(c.energy, c.delay, c.area * n)))
        .collect();
    let energy_per_mvm: f64 = breakdown.values().map(|c| c.energy).sum();
    let area: f64 = breakdown.values().map(|c| c.area).sum();
    let ops = 2.0 * cfg.macs_per_mvm();
    let mvm_time = comp.clock_period * comp.cycles_per_mvm as f64;
    let tops = ops * n / mvm_time / 1e12;
    MacroMetrics {
        energy_per_mvm,
        clock_period: comp.clock_period,
        cycles_per_mvm: comp.cycles_per_mvm,
        area,
        tops,
        tops_per_w: ops / energy_per_mvm / 1e12,
        tops_per_mm2: tops / (area * 1e-6),
        breakdown,
        warnings: cfg.warnings(),
    }
}

pub fn aimc_macro_metrics(params: &TechnologyParams, cfg: &ImcMacroConfig) -> Result<MacroMetrics> {
    if cfg.imc_type != ImcType::Aimc {
        return Err(Error::config("macro.imc_type", "expected AIMC"));
    }
    let comp = compose(params, cfg, cfg.d_i, cfg.d_o)?;
    Ok(finish(cfg, comp))
}

pub fn dimc_macro_metrics(params: &TechnologyParams, cfg: &ImcMacroConfig) -> Result<MacroMetrics> {
    if cfg.imc_type != ImcType::Dimc {
        return Err(Error::config("macro.imc_type", "expected DIMC"));
    }
    let comp = compose(params, cfg, cfg.d_i, cfg.d_o)?;
    Ok(finish(cfg, comp))
}

pub fn macro_metrics(params: &TechnologyParams, cfg: &ImcMacroConfig) -> Result<MacroMetrics> {
    match cfg.imc_type {
        ImcType::Aimc => aimc_macro_metrics(params, cfg),
        ImcType::Dimc => dimc_macro_metrics(params, cfg),
    }
}
