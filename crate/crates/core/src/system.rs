//! Macro plus on-chip cache plus DRAM: peak, per-layer and per-network metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::macro_model::{compose, macro_metrics, Component, ImcMacroConfig};
use crate::mapper::{best_mapping, layer_macro_config, MappingResult, Objective};
use crate::tech::TechnologyParams;
use crate::workload::{Layer, LayerKind, Network};

/// One memory level of the hierarchy between DRAM and the macro.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryLevel {
    /// Bits.
    pub capacity: f64,
    /// J per bit.
    pub read_energy: f64,
    /// J per bit.
    pub write_energy: f64,
    /// µm².
    pub area: f64,
    /// Bits per macro clock cycle. `None` sizes the port to the macro.
    pub bandwidth: Option<f64>,
}

impl Default for MemoryLevel {
    /// 256 KiB placeholder with nominal small-SRAM access energy.
    fn default() -> Self {
        Self {
            capacity: 256.0 * 1024.0 * 8.0,
            read_energy: 0.05e-12,
            write_energy: 0.05e-12,
            area: 0.5e6,
            bandwidth: None,
        }
    }
}

impl MemoryLevel {
    /// 256 KiB cache with access energies typical of a large banked SRAM,
    /// wire and periphery included.
    pub fn calibrated_cache() -> Self {
        Self {
            read_energy: 0.8e-12,
            write_energy: 1.0e-12,
            ..Self::default()
        }
    }

    /// A free, unbounded level: system metrics reduce to macro metrics.
    pub fn ideal() -> Self {
        Self {
            capacity: f64::INFINITY,
            read_energy: 0.0,
            write_energy: 0.0,
            area: 0.0,
            bandwidth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.capacity.is_nan() || self.capacity <= 0.0 {
            return Err(Error::config("cache.capacity", "must be > 0"));
        }
        for (name, v) in [
            ("read_energy", self.read_energy),
            ("write_energy", self.write_energy),
            ("area", self.area),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!("cache.{name}"), format!("must be finite and >= 0, got {v}")));
            }
        }
        if let Some(b) = self.bandwidth {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::config("cache.bandwidth", format!("must be > 0, got {b}")));
            }
        }
        Ok(())
    }
}

/// Default DRAM access energy, J per bit.
pub const DEFAULT_DRAM_ENERGY: f64 = 3.7e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub params: TechnologyParams,
    pub macro_cfg: ImcMacroConfig,
    pub cache: MemoryLevel,
    /// J per bit.
    pub dram_energy: f64,
}

impl SystemConfig {
    pub fn new(params: TechnologyParams, macro_cfg: ImcMacroConfig, cache: MemoryLevel) -> Self {
        Self {
            params,
            macro_cfg,
            cache,
            dram_energy: DEFAULT_DRAM_ENERGY,
        }
    }

    /// Cache bits per cycle needed to feed every macro at full rate.
    pub fn required_bandwidth(&self) -> f64 {
        let c = &self.macro_cfg;
        c.n_macros as f64 * (c.d_i as f64 * c.b_cycle as f64 + c.d_o as f64 * c.b_o as f64)
    }

    pub fn cache_bandwidth(&self) -> f64 {
        self.cache.bandwidth.unwrap_or_else(|| self.required_bandwidth())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.macro_cfg.validate()?;
        self.cache.validate()?;
        if !self.dram_energy.is_finite() || self.dram_energy < 0.0 {
            return Err(Error::config("system.dram_energy", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMetrics {
    pub tops: f64,
    pub tops_per_w: f64,
    pub tops_per_mm2: f64,
    /// J.
    pub energy: f64,
    /// s.
    pub latency: f64,
    /// µm², macros plus cache.
    pub area: f64,
    pub macs: f64,
    /// J per component.
    pub energy_breakdown: BTreeMap<Component, f64>,
    /// s per component; sums to `latency`.
    pub delay_breakdown: BTreeMap<Component, f64>,
    /// µm² per component; sums to `area`.
    pub area_breakdown: BTreeMap<Component, f64>,
    pub warnings: Vec<String>,
}

impl SystemMetrics {
    fn from_parts(
        energy_breakdown: BTreeMap<Component, f64>,
        delay_breakdown: BTreeMap<Component, f64>,
        area_breakdown: BTreeMap<Component, f64>,
        macs: f64,
        warnings: Vec<String>,
    ) -> Self {
        let energy: f64 = energy_breakdown.values().sum();
        let latency: f64 = delay_breakdown.values().sum();
        let area: f64 = area_breakdown.values().sum();
        let tops = 2.0 * macs / latency / 1e12;
        Self {
            tops,
            tops_per_w: 2.0 * macs / energy / 1e12,
            tops_per_mm2: tops / (area * 1e-6),
            energy,
            latency,
            area,
            macs,
            energy_breakdown,
            delay_breakdown,
            area_breakdown,
            warnings,
        }
    }

    pub fn energy_per_mac(&self) -> f64 {
        self.energy / self.macs
    }
}

fn zero_map() -> BTreeMap<Component, f64> {
    Component::ALL.iter().map(|&c| (c, 0.0)).collect()
}

/// Peak operation: every macro fully used, inputs read from and outputs
/// written to the cache once per MVM.
pub fn peak_system_metrics(sys: &SystemConfig) -> Result<SystemMetrics> {
    sys.validate()?;
    let cfg = &sys.macro_cfg;
    let required = sys.required_bandwidth();
    let available = sys.cache_bandwidth();
    if available < required {
        return Err(Error::BandwidthFit { available, required });
    }
    let mm = macro_metrics(&sys.params, cfg)?;
    let n = cfg.n_macros as f64;

    let mut energy = zero_map();
    let mut delay = zero_map();
    let mut area = zero_map();
    for (&c, cost) in &mm.breakdown {
        energy.insert(c, n * cost.energy);
        delay.insert(c, cost.delay * mm.cycles_per_mvm as f64);
        area.insert(c, cost.area);
    }
    let cache_bits_read = cfg.d_i as f64 * cfg.b_i as f64;
    let cache_bits_written = cfg.d_o as f64 * cfg.b_o as f64;
    energy.insert(
        Component::Cache,
        n * (cache_bits_read * sys.cache.read_energy + cache_bits_written * sys.cache.write_energy),
    );
    area.insert(Component::Cache, sys.cache.area);

    Ok(SystemMetrics::from_parts(
        energy,
        delay,
        area,
        n * cfg.macs_per_mvm(),
        mm.warnings,
    ))
}

/// System cost of running `layer` with an already evaluated mapping.
pub fn layer_cost(sys: &SystemConfig, layer: &Layer, result: &MappingResult) -> Result<SystemMetrics> {
    if sys.macro_cfg.n_macros != 1 {
        return Err(Error::config(
            "macro.n_macros",
            "layer evaluation maps onto a single macro; set n_macros = 1",
        ));
    }
    let cfg = layer_macro_config(layer, &sys.macro_cfg);
    let comp = compose(&sys.params, &cfg, result.mapping.rows(), result.mapping.cols())?;
    let mvm = result.mvm_invocations as f64;
    let t = &result.traffic;
    let clk = comp.clock_period;

    let mut energy = zero_map();
    let mut delay = zero_map();
    let mut area = zero_map();
    for (&c, cost) in &comp.parts {
        energy.insert(c, mvm * cost.energy);
        delay.insert(c, cost.delay * result.total_cycles as f64);
        area.insert(c, cost.area);
    }
    energy.insert(
        Component::Cache,
        t.input_cache as f64 * sys.cache.read_energy + t.output_cache as f64 * sys.cache.write_energy,
    );
    energy.insert(
        Component::Dram,
        (t.input_dram + t.output_dram) as f64 * sys.dram_energy,
    );
    energy.insert(
        Component::WeightLoad,
        t.weight_dram as f64 * sys.dram_energy + t.weight_macro as f64 * sys.params.sram_cell_write_energy,
    );
    let stall_cycles = (t.weight_macro as f64 / sys.cache_bandwidth()).ceil();
    delay.insert(Component::WeightLoad, stall_cycles * clk);
    area.insert(Component::Cache, sys.cache.area);

    let mut warnings = cfg_warnings(&cfg);
    warnings.extend(result.warnings.iter().cloned());
    Ok(SystemMetrics::from_parts(
        energy,
        delay,
        area,
        layer.total_macs()? as f64,
        warnings,
    ))
}

fn cfg_warnings(cfg: &ImcMacroConfig) -> Vec<String> {
    if !cfg.b_i.is_multiple_of(cfg.b_cycle) {
        vec![format!(
            "b_cycle = {} does not divide b_i = {}; cycles rounded up",
            cfg.b_cycle, cfg.b_i
        )]
    } else {
        Vec::new()
    }
}

/// Best mapping of `layer` under `objective`, with its system metrics.
pub fn layer_system_metrics(
    sys: &SystemConfig,
    layer: &Layer,
    objective: Objective,
) -> Result<(MappingResult, SystemMetrics)> {
    sys.validate()?;
    layer.validate()?;
    best_mapping(sys, layer, objective)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub name: String,
    pub kind: LayerKind,
    pub repeat: u64,
    pub mapping: MappingResult,
    /// Metrics of a single instance of the layer.
    pub metrics: SystemMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub network: String,
    pub layers: Vec<LayerReport>,
    /// Totals over all layers and repeats.
    pub total: SystemMetrics,
}

/// Evaluates every layer with its own best mapping and sums the results.
pub fn network_system_metrics(
    sys: &SystemConfig,
    network: &Network,
    objective: Objective,
) -> Result<NetworkMetrics> {
    network.validate()?;
    let mut layers = Vec::with_capacity(network.layers.len());
    for nl in &network.layers {
        let (mapping, metrics) = layer_system_metrics(sys, &nl.layer, objective)?;
        layers.push(LayerReport {
            name: nl.name.clone(),
            kind: nl.layer.classify(),
            repeat: nl.repeat,
            mapping,
            metrics,
        });
    }
    let mut energy = zero_map();
    let mut delay = zero_map();
    let mut macs = 0.0;
    let mut warnings = Vec::new();
    for l in &layers {
        let r = l.repeat as f64;
        for (c, v) in &l.metrics.energy_breakdown {
            *energy.get_mut(c).expect("all keys present") += r * v;
        }
        for (c, v) in &l.metrics.delay_breakdown {
            *delay.get_mut(c).expect("all keys present") += r * v;
        }
        macs += r * l.metrics.macs;
        warnings.extend(l.metrics.warnings.iter().map(|w| format!("{}: {w}", l.name)));
    }
    let area = layers[0].metrics.area_breakdown.clone();
    Ok(NetworkMetrics {
        network: network.name.clone(),
        total: SystemMetrics::from_parts(energy, delay, area, macs, warnings),
        layers,
    })
}

/// Geometric mean of strictly positive values; `None` for an empty slice or
/// any non-positive value.
pub fn geomean(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
        return None;
    }
    let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    Some(mean_log.exp())
}

/// Geometric means of TOP/s/W and TOP/s/mm² across networks.
pub fn network_geomean(results: &[NetworkMetrics]) -> Option<(f64, f64)> {
    let w: Vec<f64> = results.iter().map(|r| r.total.tops_per_w).collect();
    let a: Vec<f64> = results.iter().map(|r| r.total.tops_per_mm2).collect();
    Some((geomean(&w)?, geomean(&a)?))
}
