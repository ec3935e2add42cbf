//! Analytical energy, latency and area models for SRAM-based analog (AIMC)
//! and digital (DIMC) in-memory-computing macros, with a spatial mapper and
//! a cache/DRAM system model for design-space exploration.
//!
//! Units: energy in J, time in s, area in µm², capacitance in F, voltage in V.

pub mod component;
pub mod error;
pub mod fixtures;
pub mod macro_model;
pub mod mapper;
pub mod system;
pub mod tech;
pub mod workload;

pub use component::ComponentCost;
pub use error::{Error, Result};
pub use macro_model::{
    aimc_macro_metrics, dimc_macro_metrics, macro_metrics, Breakdown, Component, ImcMacroConfig,
    ImcType, MacroMetrics,
};
pub use mapper::{
    best_mapping, enumerate_mappings, evaluate_mapping, layer_macro_config, Level, MappingResult,
    Objective, Operand, SpatialMapping, Traffic,
};
pub use system::{
    geomean, layer_cost, layer_system_metrics, network_geomean, network_system_metrics,
    peak_system_metrics, LayerReport, MemoryLevel, NetworkMetrics, SystemConfig, SystemMetrics,
    DEFAULT_DRAM_ENERGY,
};
pub use tech::{AdcInputBits, TechnologyParams};
pub use workload::{load_network, parse_network, Layer, LayerKind, Network, NetworkLayer};
