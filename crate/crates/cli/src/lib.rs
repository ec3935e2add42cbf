//! `imc-dse`: design-space exploration front end for the IMC cost model.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use imc_core::fixtures::validation_designs;
use imc_core::{
    load_network, macro_metrics, network_geomean, network_system_metrics, peak_system_metrics,
    Component, ImcMacroConfig, ImcType, Network, NetworkMetrics, Objective, SystemConfig,
};

pub use config::FileConfig;
pub use output::{Format, Table, Value};

/// Default square array sizes of a sweep.
pub const DEFAULT_SIZES: [u64; 6] = [32, 64, 128, 256, 512, 1024];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Eval(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Eval(_) => 3,
        }
    }
}

impl From<imc_core::Error> for CliError {
    fn from(e: imc_core::Error) -> Self {
        let msg = e.to_string();
        if e.is_config_error() || matches!(e, imc_core::Error::BandwidthFit { .. }) {
            CliError::Config(msg)
        } else {
            CliError::Eval(msg)
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "imc-dse", version, about = "Energy, latency and area exploration of AIMC and DIMC macros")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Peak macro and system metrics per array size.
    Peak(CommonArgs),
    /// Best mapping and system metrics of every layer in the workload(s).
    Layer(CommonArgs),
    /// Network totals, plus the geometric mean across networks.
    Network(CommonArgs),
    /// Both IMC types across all sizes: peak metrics, or network totals when
    /// a workload is given.
    Sweep(CommonArgs),
    /// Model estimates for the seven published validation designs.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TypeArg {
    Aimc,
    Dimc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Energy,
    Latency,
    Edp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Workload JSON file(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub workload: Vec<PathBuf>,
    /// Square array sizes, comma separated powers of two in [8, 4096].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<u64>,
    #[arg(long = "type", value_enum)]
    pub imc_type: Option<TypeArg>,
    #[arg(long, value_enum, default_value = "energy")]
    pub objective: ObjectiveArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Peak,
    Layer,
    Network,
    Sweep,
    Validate,
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config: Option<PathBuf>,
    pub workloads: Vec<PathBuf>,
    /// Explicit square sizes; `None` defers to the config file or the default sweep.
    pub sizes: Option<Vec<u64>>,
    /// Explicit types; `None` defers to the config file or both.
    pub types: Option<Vec<ImcType>>,
    pub objective: Objective,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunSpec {
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let (command, a) = match cli.command {
            CommandArgs::Peak(a) => (Command::Peak, a),
            CommandArgs::Layer(a) => (Command::Layer, a),
            CommandArgs::Network(a) => (Command::Network, a),
            CommandArgs::Sweep(a) => (Command::Sweep, a),
            CommandArgs::Validate(a) => (Command::Validate, a),
        };
        let job = RunSpec {
            command,
            config: a.config,
            workloads: a.workload,
            sizes: (!a.sizes.is_empty()).then_some(a.sizes),
            types: a.imc_type.map(|t| match t {
                TypeArg::Aimc => vec![ImcType::Aimc],
                TypeArg::Dimc => vec![ImcType::Dimc],
                TypeArg::Both => vec![ImcType::Aimc, ImcType::Dimc],
            }),
            objective: match a.objective {
                ObjectiveArg::Energy => Objective::Energy,
                ObjectiveArg::Latency => Objective::Latency,
                ObjectiveArg::Edp => Objective::Edp,
            },
            format: match a.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            },
            out: a.out,
            jobs: a.jobs,
        };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(sizes) = &self.sizes {
            for &s in sizes {
                if !s.is_power_of_two() || !(8..=4096).contains(&s) {
                    return Err(CliError::Usage(format!(
                        "size {s} is not a power of two in [8, 4096]"
                    )));
                }
            }
        }
        if matches!(self.command, Command::Layer | Command::Network) && self.workloads.is_empty() {
            return Err(CliError::Usage(
                "--workload is required for this command".to_string(),
            ));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// A result table and the warnings raised while producing it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub table: Table,
    pub warnings: Vec<String>,
}

struct Context {
    file: FileConfig,
    points: Vec<(ImcType, u64, u64)>,
    networks: Vec<Network>,
}

impl Context {
    fn new(job: &RunSpec) -> Result<Self, CliError> {
        job.validate()?;
        let (file, _) = FileConfig::resolve(job.config.as_deref())?;
        let types = match (job.command, &job.types, file.macro_.imc_type) {
            (Command::Sweep, _, _) => vec![ImcType::Aimc, ImcType::Dimc],
            (_, Some(t), _) => t.clone(),
            (_, None, Some(t)) => vec![t],
            (_, None, None) => vec![ImcType::Aimc, ImcType::Dimc],
        };
        let dims: Vec<(u64, u64)> = match (&job.sizes, file.macro_.d_i, file.macro_.d_o) {
            (Some(s), _, _) => {
                let mut s = s.clone();
                s.sort_unstable();
                s.dedup();
                s.into_iter().map(|x| (x, x)).collect()
            }
            (None, Some(d_i), Some(d_o)) => vec![(d_i, d_o)],
            _ => DEFAULT_SIZES.iter().map(|&x| (x, x)).collect(),
        };
        let points = types
            .iter()
            .flat_map(|&t| dims.iter().map(move |&(i, o)| (t, i, o)))
            .collect();
        let networks = job
            .workloads
            .iter()
            .map(|p| load_network(p).map_err(CliError::from))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            file,
            points,
            networks,
        })
    }

    fn system(&self, imc_type: ImcType, d_i: u64, d_o: u64) -> Result<SystemConfig, CliError> {
        let cfg = self.file.macro_config(imc_type, d_i, d_o);
        cfg.validate()?;
        let mut sys = SystemConfig::new(self.file.technology.clone(), cfg, self.file.cache.clone());
        sys.dram_energy = self.file.system.dram_energy;
        Ok(sys)
    }
}

fn breakdown_columns() -> impl Iterator<Item = String> {
    Component::ALL.iter().map(|c| format!("energy_{c}_j"))
}

fn columns(names: &[&str], with_breakdown: bool) -> Vec<String> {
    let mut out: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    if with_breakdown {
        out.extend(breakdown_columns());
    }
    out
}

fn design_columns(cfg: &ImcMacroConfig) -> Vec<Value> {
    vec![
        cfg.imc_type.to_string().into(),
        cfg.d_i.into(),
        cfg.d_o.into(),
        cfg.b_i.into(),
        cfg.b_w.into(),
        cfg.b_cycle.into(),
    ]
}

const DESIGN: [&str; 6] = ["type", "d_i", "d_o", "b_i", "b_w", "b_cycle"];

fn peak(ctx: &Context) -> Result<Report, CliError> {
    let mut names = DESIGN.to_vec();
    names.extend([
        "m",
        "n_macros",
        "cycles_per_mvm",
        "clock_period_s",
        "macro_energy_per_mvm_j",
        "macro_energy_per_mac_j",
        "macro_area_um2",
        "macro_tops",
        "macro_tops_per_w",
        "macro_tops_per_mm2",
        "system_energy_per_mvm_j",
        "system_energy_per_mac_j",
        "system_area_um2",
        "system_tops",
        "system_tops_per_w",
        "system_tops_per_mm2",
    ]);
    let rows = ctx
        .points
        .par_iter()
        .map(|&(t, d_i, d_o)| {
            let sys = ctx.system(t, d_i, d_o)?;
            let cfg = &sys.macro_cfg;
            let mm = macro_metrics(&sys.params, cfg)?;
            let sm = peak_system_metrics(&sys)?;
            let mut row = design_columns(cfg);
            row.extend([
                Value::from(cfg.m),
                cfg.n_macros.into(),
                mm.cycles_per_mvm.into(),
                mm.clock_period.into(),
                mm.energy_per_mvm.into(),
                mm.energy_per_mac(cfg).into(),
                mm.area.into(),
                mm.tops.into(),
                mm.tops_per_w.into(),
                mm.tops_per_mm2.into(),
                sm.energy.into(),
                sm.energy_per_mac().into(),
                sm.area.into(),
                sm.tops.into(),
                sm.tops_per_w.into(),
                sm.tops_per_mm2.into(),
            ]);
            row.extend(sm.energy_breakdown.values().map(|&v| Value::from(v)));
            let warnings = mm.warnings.iter().map(|w| format!("{t} {d_i}x{d_o}: {w}")).collect();
            Ok((row, warnings))
        })
        .collect::<Result<Vec<(Vec<Value>, Vec<String>)>, CliError>>()?;
    Ok(assemble(columns(&names, true), rows))
}

fn assemble(columns: Vec<String>, rows: Vec<(Vec<Value>, Vec<String>)>) -> Report {
    let mut report = Report {
        table: Table::new(columns),
        warnings: Vec::new(),
    };
    for (row, warnings) in rows {
        report.table.push(row);
        for w in warnings {
            if !report.warnings.contains(&w) {
                report.warnings.push(w);
            }
        }
    }
    report
}

/// One design point and its per-network results.
type NetworkPoint = (ImcType, u64, u64, Vec<NetworkMetrics>);

fn evaluate_networks(
    ctx: &Context,
    objective: Objective,
) -> Result<Vec<NetworkPoint>, CliError> {
    ctx.points
        .par_iter()
        .map(|&(t, d_i, d_o)| {
            let sys = ctx.system(t, d_i, d_o)?;
            let results = ctx
                .networks
                .iter()
                .map(|n| network_system_metrics(&sys, n, objective).map_err(CliError::from))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((t, d_i, d_o, results))
        })
        .collect()
}

fn layer(ctx: &Context, objective: Objective) -> Result<Report, CliError> {
    let names = [
        "type",
        "d_i",
        "d_o",
        "network",
        "layer",
        "kind",
        "repeat",
        "k_u",
        "ox_u",
        "c_u",
        "fx_u",
        "fy_u",
        "spatial_utilization",
        "in_unroll_ratio",
        "out_unroll_ratio",
        "mvm_invocations",
        "total_cycles",
        "weight_tile_loads",
        "w_dram_bits",
        "w_macro_bits",
        "i_dram_bits",
        "i_cache_bits",
        "o_cache_bits",
        "o_dram_bits",
        "macs",
        "energy_j",
        "latency_s",
        "area_um2",
        "energy_per_mac_j",
        "tops",
        "tops_per_w",
        "tops_per_mm2",
    ];
    let mut rows = Vec::new();
    for (t, d_i, d_o, results) in evaluate_networks(ctx, objective)? {
        for net in results {
            for l in &net.layers {
                let m = &l.mapping;
                let s = &l.metrics;
                let tr = &m.traffic;
                let mut row: Vec<Value> = vec![
                    t.to_string().into(),
                    d_i.into(),
                    d_o.into(),
                    net.network.clone().into(),
                    l.name.clone().into(),
                    l.kind.to_string().into(),
                    l.repeat.into(),
                    m.mapping.k_u.into(),
                    m.mapping.ox_u.into(),
                    m.mapping.c_u.into(),
                    m.mapping.fx_u.into(),
                    m.mapping.fy_u.into(),
                    m.spatial_utilization.into(),
                    m.in_unroll_ratio.into(),
                    m.out_unroll_ratio.into(),
                    m.mvm_invocations.into(),
                    m.total_cycles.into(),
                    m.weight_tile_loads.into(),
                    tr.weight_dram.into(),
                    tr.weight_macro.into(),
                    tr.input_dram.into(),
                    tr.input_cache.into(),
                    tr.output_cache.into(),
                    tr.output_dram.into(),
                    s.macs.into(),
                    s.energy.into(),
                    s.latency.into(),
                    s.area.into(),
                    s.energy_per_mac().into(),
                    s.tops.into(),
                    s.tops_per_w.into(),
                    s.tops_per_mm2.into(),
                ];
                row.extend(s.energy_breakdown.values().map(|&v| Value::from(v)));
                let warnings = s
                    .warnings
                    .iter()
                    .map(|w| format!("{t} {d_i}x{d_o} {}/{}: {w}", net.network, l.name))
                    .collect();
                rows.push((row, warnings));
            }
        }
    }
    Ok(assemble(columns(&names, true), rows))
}

fn network(ctx: &Context, objective: Objective) -> Result<Report, CliError> {
    let names = [
        "type",
        "d_i",
        "d_o",
        "network",
        "layers",
        "macs",
        "energy_j",
        "latency_s",
        "area_um2",
        "energy_per_mac_j",
        "tops",
        "tops_per_w",
        "tops_per_mm2",
    ];
    let width = names.len() + Component::ALL.len();
    let mut rows = Vec::new();
    for (t, d_i, d_o, results) in evaluate_networks(ctx, objective)? {
        for net in &results {
            let s = &net.total;
            let mut row: Vec<Value> = vec![
                t.to_string().into(),
                d_i.into(),
                d_o.into(),
                net.network.clone().into(),
                (net.layers.len() as u64).into(),
                s.macs.into(),
                s.energy.into(),
                s.latency.into(),
                s.area.into(),
                s.energy_per_mac().into(),
                s.tops.into(),
                s.tops_per_w.into(),
                s.tops_per_mm2.into(),
            ];
            row.extend(s.energy_breakdown.values().map(|&v| Value::from(v)));
            let warnings = s
                .warnings
                .iter()
                .map(|w| format!("{t} {d_i}x{d_o} {}: {w}", net.network))
                .collect();
            rows.push((row, warnings));
        }
        if results.len() > 1 {
            let (w, a) = network_geomean(&results)
                .ok_or_else(|| CliError::Eval("geometric mean of non-positive metrics".into()))?;
            let mut row = vec![Value::Empty; width];
            row[0] = t.to_string().into();
            row[1] = d_i.into();
            row[2] = d_o.into();
            row[3] = "geomean".into();
            row[4] = (results.len() as u64).into();
            row[11] = w.into();
            row[12] = a.into();
            rows.push((row, Vec::new()));
        }
    }
    Ok(assemble(columns(&names, true), rows))
}

fn validate(ctx: &Context) -> Result<Report, CliError> {
    let names = [
        "index",
        "type",
        "b_i/b_w/b_cycle",
        "d_i",
        "d_o",
        "m",
        "n_macros",
        "energy_per_mac_j",
        "clock_period_s",
        "area_um2",
    ];
    let mut rows = Vec::new();
    for d in validation_designs() {
        let c = &d.config;
        let m = macro_metrics(&ctx.file.technology, c)?;
        let row = vec![
            Value::from(d.index as u64),
            c.imc_type.to_string().into(),
            format!("{}/{}/{}", c.b_i, c.b_w, c.b_cycle).into(),
            c.d_i.into(),
            c.d_o.into(),
            c.m.into(),
            c.n_macros.into(),
            m.energy_per_mac(c).into(),
            m.clock_period.into(),
            m.area.into(),
        ];
        let warnings = m
            .warnings
            .iter()
            .map(|w| format!("design {}: {w}", d.index))
            .collect();
        rows.push((row, warnings));
    }
    Ok(assemble(columns(&names, false), rows))
}

/// Evaluates `job` and returns the result table without writing it.
pub fn run(job: &RunSpec) -> Result<Report, CliError> {
    let work = || {
        let ctx = Context::new(job)?;
        match job.command {
            Command::Peak => peak(&ctx),
            Command::Layer => layer(&ctx, job.objective),
            Command::Network => network(&ctx, job.objective),
            Command::Sweep if ctx.networks.is_empty() => peak(&ctx),
            Command::Sweep => network(&ctx, job.objective),
            Command::Validate => validate(&ctx),
        }
    };
    match job.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Eval(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Runs `job` and writes the rendered table to `--out` or standard output.
/// Warnings go to standard error.
pub fn execute(job: &RunSpec) -> Result<(), CliError> {
    let report = run(job)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let bytes = report.table.render(job.format)?;
    match &job.out {
        Some(path) => output::write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Eval(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Parses `args` (program name first) into a [`RunSpec`]. Help and version
/// requests come back as `Ok(Err(text))`.
pub fn parse_args<I, T>(args: I) -> Result<Result<RunSpec, String>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => RunSpec::from_cli(cli).map(Ok),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                Ok(Err(e.to_string()))
            }
            _ => Err(CliError::Usage(e.to_string())),
        },
    }
}
