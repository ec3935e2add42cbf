//! Spatial unrolling of one layer onto one macro, and the traffic it implies
//! under a fixed weight-stationary schedule.
//!
//! K and OX unroll across the `d_o` columns; C, FX and FY unroll across the
//! `d_i` rows. G and B are always temporal. Temporally, weight tiles are the
//! outer loops, B / OY / OX tiles run inside each tile, and partial sums over
//! C / FX / FY tiles stay in the accumulators, so every output is written
//! exactly once.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::macro_model::ImcMacroConfig;
use crate::system::{layer_cost, MemoryLevel, SystemConfig, SystemMetrics};
use crate::workload::Layer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpatialMapping {
    pub k_u: u64,
    pub ox_u: u64,
    pub c_u: u64,
    pub fx_u: u64,
    pub fy_u: u64,
}

impl SpatialMapping {
    pub const ONES: SpatialMapping = SpatialMapping {
        k_u: 1,
        ox_u: 1,
        c_u: 1,
        fx_u: 1,
        fy_u: 1,
    };

    /// Active rows (`d_i` side).
    pub fn rows(&self) -> u64 {
        self.c_u * self.fx_u * self.fy_u
    }

    /// Active columns (`d_o` side).
    pub fn cols(&self) -> u64 {
        self.k_u * self.ox_u
    }

    fn key(&self) -> (u64, u64, u64, u64, u64) {
        (self.k_u, self.ox_u, self.c_u, self.fx_u, self.fy_u)
    }
}

impl fmt::Display for SpatialMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "K{}xOX{} | C{}xFX{}xFY{}",
            self.k_u, self.ox_u, self.c_u, self.fx_u, self.fy_u
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    W,
    I,
    O,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Dram,
    Cache,
    Macro,
}

/// Bits moved per operand and memory level over one layer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traffic {
    /// Distinct weight bits read from DRAM.
    pub weight_dram: u64,
    /// Weight bits written into the array, duplicates included.
    pub weight_macro: u64,
    pub input_dram: u64,
    pub input_cache: u64,
    pub output_cache: u64,
    pub output_dram: u64,
}

impl Traffic {
    pub fn get(&self, operand: Operand, level: Level) -> u64 {
        match (operand, level) {
            (Operand::W, Level::Dram) => self.weight_dram,
            (Operand::W, Level::Macro) => self.weight_macro,
            (Operand::I, Level::Dram) => self.input_dram,
            (Operand::I, Level::Cache) => self.input_cache,
            (Operand::O, Level::Cache) => self.output_cache,
            (Operand::O, Level::Dram) => self.output_dram,
            (Operand::W, Level::Cache) | (Operand::I, Level::Macro) | (Operand::O, Level::Macro) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingResult {
    pub mapping: SpatialMapping,
    pub spatial_utilization: f64,
    pub mvm_invocations: u64,
    pub cycles_per_mvm: u64,
    pub total_cycles: u64,
    pub weight_tile_loads: u64,
    pub traffic: Traffic,
    pub in_unroll_ratio: f64,
    pub out_unroll_ratio: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Energy,
    Latency,
    Edp,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Energy => "energy",
            Objective::Latency => "latency",
            Objective::Edp => "edp",
        })
    }
}

/// The macro configuration a layer actually runs with: layer precision
/// overrides replace the macro's `b_i`, `b_w`, `b_o`.
pub fn layer_macro_config(layer: &Layer, cfg: &ImcMacroConfig) -> ImcMacroConfig {
    let mut out = cfg.clone();
    if let Some(b) = layer.b_i {
        out.b_i = b;
        out.b_cycle = out.b_cycle.min(b);
    }
    if let Some(b) = layer.b_w {
        out.b_w = b;
    }
    if let Some(b) = layer.b_o {
        out.b_o = b;
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// All divisor-factor mappings that fit the array, in lexicographic order of
/// `(k_u, ox_u, c_u, fx_u, fy_u)`.
pub fn enumerate_mappings(layer: &Layer, cfg: &ImcMacroConfig) -> Vec<SpatialMapping> {
    let fx = divisors(layer.fx);
    let fy = divisors(layer.fy);
    let c = divisors(layer.c);
    let ox = divisors(layer.ox);
    let mut out = Vec::new();
    for k_u in divisors(layer.k).into_iter().take_while(|&k| k <= cfg.d_o) {
        for &ox_u in ox.iter().take_while(|&&o| k_u * o <= cfg.d_o) {
            for &c_u in c.iter().take_while(|&&c| c <= cfg.d_i) {
                for &fx_u in fx.iter().take_while(|&&x| c_u * x <= cfg.d_i) {
                    for &fy_u in fy.iter().take_while(|&&y| c_u * fx_u * y <= cfg.d_i) {
                        out.push(SpatialMapping {
                            k_u,
                            ox_u,
                            c_u,
                            fx_u,
                            fy_u,
                        });
                    }
                }
            }
        }
    }
    out
}

fn product(values: &[u64], what: &'static str) -> Result<u64> {
    values
        .iter()
        .try_fold(1u64, |acc, &v| acc.checked_mul(v))
        .ok_or(Error::Overflow { what })
}

fn check_feasible(layer: &Layer, cfg: &ImcMacroConfig, m: &SpatialMapping) -> Result<()> {
    let infeasible = |reason: String| Error::InfeasibleMapping {
        mapping: m.to_string(),
        reason,
    };
    for (name, factor, bound) in [
        ("k_u", m.k_u, layer.k),
        ("ox_u", m.ox_u, layer.ox),
        ("c_u", m.c_u, layer.c),
        ("fx_u", m.fx_u, layer.fx),
        ("fy_u", m.fy_u, layer.fy),
    ] {
        if factor == 0 || factor > bound {
            return Err(infeasible(format!("{name} = {factor} outside [1, {bound}]")));
        }
    }
    if m.rows() > cfg.d_i {
        return Err(infeasible(format!("{} rows exceed d_i = {}", m.rows(), cfg.d_i)));
    }
    if m.cols() > cfg.d_o {
        return Err(infeasible(format!("{} columns exceed d_o = {}", m.cols(), cfg.d_o)));
    }
    Ok(())
}

/// Cycle counts, weight reloads and per-level traffic of one mapping.
///
/// Layer precision overrides are applied before evaluation.
pub fn evaluate_mapping(
    layer: &Layer,
    cfg: &ImcMacroConfig,
    mapping: &SpatialMapping,
    cache: &MemoryLevel,
) -> Result<MappingResult> {
    layer.validate()?;
    let cfg = layer_macro_config(layer, cfg);
    cfg.validate()?;
    check_feasible(layer, &cfg, mapping)?;
    let m = mapping;

    let k_t = layer.k.div_ceil(m.k_u);
    let c_t = layer.c.div_ceil(m.c_u);
    let ox_t = layer.ox.div_ceil(m.ox_u);
    let fx_t = layer.fx.div_ceil(m.fx_u);
    let fy_t = layer.fy.div_ceil(m.fy_u);

    let mvm_invocations = product(
        &[layer.b, layer.g, k_t, c_t, ox_t, layer.oy, fx_t, fy_t],
        "MVM invocations",
    )?;
    let cycles_per_mvm = cfg.cycles_per_mvm();
    let total_cycles = product(&[mvm_invocations, cycles_per_mvm], "total cycles")?;
    let weight_tile_loads = product(&[layer.g, k_t, c_t, fx_t, fy_t], "weight tiles")?;

    let (b_i, b_w, b_o) = (cfg.b_i as u64, cfg.b_w as u64, cfg.b_o as u64);
    let rows = m.rows();
    let cols = m.cols();

    let mut warnings = Vec::new();
    let input_bits = product(&[layer.input_elements()?, b_i], "input bits")?;
    let output_bits = product(&[layer.output_elements()?, b_o], "output bits")?;
    let per_access_inputs = product(&[mvm_invocations, rows, b_i], "input reads")?;
    let capacity = cache.capacity;

    let (input_dram, input_cache, resident) = if input_bits as f64 > capacity {
        warnings.push(format!(
            "input tensor ({input_bits} bits) exceeds cache capacity; inputs read from DRAM per access"
        ));
        (per_access_inputs, 0, 0)
    } else {
        (input_bits, per_access_inputs, input_bits)
    };
    let output_dram = if (resident + output_bits) as f64 > capacity {
        warnings.push(format!(
            "output tensor ({output_bits} bits) does not fit beside the inputs; outputs written to DRAM"
        ));
        output_bits
    } else {
        0
    };

    let traffic = Traffic {
        weight_dram: product(&[layer.weight_elements()?, b_w], "weight bits")?,
        weight_macro: product(&[weight_tile_loads, rows, cols, b_w], "weight writes")?,
        input_dram,
        input_cache,
        output_cache: output_bits,
        output_dram,
    };

    let row_bound = layer.c * layer.fx * layer.fy;
    let col_bound = layer.k * layer.ox;
    Ok(MappingResult {
        mapping: *m,
        spatial_utilization: (rows * cols) as f64 / (cfg.d_i as f64 * cfg.d_o as f64),
        mvm_invocations,
        cycles_per_mvm,
        total_cycles,
        weight_tile_loads,
        traffic,
        in_unroll_ratio: rows as f64 / row_bound.min(cfg.d_i) as f64,
        out_unroll_ratio: cols as f64 / col_bound.min(cfg.d_o) as f64,
        warnings,
    })
}

fn objective_value(objective: Objective, metrics: &SystemMetrics) -> f64 {
    match objective {
        Objective::Energy => metrics.energy,
        Objective::Latency => metrics.latency,
        Objective::Edp => metrics.energy * metrics.latency,
    }
}

/// Lower objective first, then higher utilization, then the smaller factor tuple.
fn rank(a: &(MappingResult, SystemMetrics, f64), b: &(MappingResult, SystemMetrics, f64)) -> Ordering {
    a.2.total_cmp(&b.2)
        .then_with(|| b.0.spatial_utilization.total_cmp(&a.0.spatial_utilization))
        .then_with(|| a.0.mapping.key().cmp(&b.0.mapping.key()))
}

/// Exhaustive search over [`enumerate_mappings`] for the mapping minimizing
/// `objective` under the system cost model. Candidates are evaluated in
/// parallel; the winner does not depend on evaluation order.
pub fn best_mapping(
    sys: &SystemConfig,
    layer: &Layer,
    objective: Objective,
) -> Result<(MappingResult, SystemMetrics)> {
    let cfg = layer_macro_config(layer, &sys.macro_cfg);
    let candidates = enumerate_mappings(layer, &cfg);
    let scored = candidates
        .par_iter()
        .map(|m| {
            let result = evaluate_mapping(layer, &sys.macro_cfg, m, &sys.cache)?;
            let metrics = layer_cost(sys, layer, &result)?;
            let value = objective_value(objective, &metrics);
            Ok((result, metrics, value))
        })
        .collect::<Result<Vec<_>>>()?;
    let (result, metrics, _) = scored
        .into_iter()
        .min_by(rank)
        .expect("the all-ones mapping is always feasible");
    Ok((result, metrics))
}
