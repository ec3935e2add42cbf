//! TOML configuration: technology parameters, macro template, cache and system.
//!
//! Every section and key is optional; omitted values take the built-in
//! 28nm / 0.9V defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use imc_core::{ImcMacroConfig, ImcType, MemoryLevel, TechnologyParams, DEFAULT_DRAM_ENERGY};

use crate::CliError;

/// Environment variable naming a directory whose `config.toml` is used when
/// `--config` is absent.
pub const CONFIG_DIR_ENV: &str = "IMC_DSE_CONFIG_DIR";

/// Macro fields. Unset precision fields fall back to the per-type defaults
/// (`b_cycle` is 2 for AIMC and 1 for DIMC).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroSection {
    #[serde(rename = "type")]
    pub imc_type: Option<ImcType>,
    pub b_i: Option<u32>,
    pub b_w: Option<u32>,
    pub b_cycle: Option<u32>,
    pub b_o: Option<u32>,
    pub d_i: Option<u64>,
    pub d_o: Option<u64>,
    pub m: Option<u64>,
    pub n_macros: Option<u64>,
    pub input_toggle_rate: Option<f64>,
    pub weight_sparsity: Option<f64>,
    pub pipelined: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    /// J per bit.
    pub dram_energy: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            dram_energy: DEFAULT_DRAM_ENERGY,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub technology: TechnologyParams,
    #[serde(rename = "macro")]
    pub macro_: MacroSection,
    pub cache: MemoryLevel,
    pub system: SystemSection,
}

impl FileConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let cfg: FileConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("{}: {}", origin.display(), e.to_string().trim_end())))?;
        cfg.technology
            .validate()
            .and_then(|_| cfg.cache.validate())
            .map_err(|e| CliError::Config(format!("{}: {e}", origin.display())))?;
        if !cfg.system.dram_energy.is_finite() || cfg.system.dram_energy < 0.0 {
            return Err(CliError::Config(format!(
                "{}: system.dram_energy must be finite and >= 0",
                origin.display()
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    /// `explicit`, else `$IMC_DSE_CONFIG_DIR/config.toml` if it exists, else defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<(Self, Option<PathBuf>), CliError> {
        if let Some(p) = explicit {
            return Ok((Self::load(p)?, Some(p.to_path_buf())));
        }
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let p = PathBuf::from(dir).join("config.toml");
            if p.is_file() {
                return Ok((Self::load(&p)?, Some(p)));
            }
        }
        Ok((Self::default(), None))
    }

    /// Macro configuration of the given type and array size, with the file's
    /// overrides applied.
    pub fn macro_config(&self, imc_type: ImcType, d_i: u64, d_o: u64) -> ImcMacroConfig {
        let base = match imc_type {
            ImcType::Aimc => ImcMacroConfig::aimc(d_i, d_o),
            ImcType::Dimc => ImcMacroConfig::dimc(d_i, d_o),
        };
        let s = &self.macro_;
        ImcMacroConfig {
            imc_type,
            b_i: s.b_i.unwrap_or(base.b_i),
            b_w: s.b_w.unwrap_or(base.b_w),
            b_cycle: s.b_cycle.unwrap_or(base.b_cycle),
            b_o: s.b_o.unwrap_or(base.b_o),
            d_i,
            d_o,
            m: s.m.unwrap_or(base.m),
            n_macros: s.n_macros.unwrap_or(base.n_macros),
            input_toggle_rate: s.input_toggle_rate.unwrap_or(base.input_toggle_rate),
            weight_sparsity: s.weight_sparsity.unwrap_or(base.weight_sparsity),
            pipelined: s.pipelined.unwrap_or(base.pipelined),
        }
    }
}
