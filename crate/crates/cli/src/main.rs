//! `netdyn`: command-line front end to `netdyn-core`.

mod commands;
mod manifest;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use report::{Format, Report};

#[derive(Debug, Parser)]
#[command(name = "netdyn", version, about = "Dynamical systems on networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalOpts {
    /// Output file; a run manifest `<out>.manifest.json` is written beside it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Graph structure and operators.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Flow statistics, centralities, communities and cascades.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Advection on metric graphs.
    #[command(subcommand)]
    Transport(TransportCmd),
    /// Kirchhoff Laplacian: spectrum, heat flow, grid Dirichlet problem.
    #[command(subcommand)]
    Diffusion(DiffusionCmd),
    /// Coupled agent ODEs and spectral identification.
    #[command(subcommand)]
    Ode(OdeCmd),
    /// Road traffic simulation.
    #[command(subcommand)]
    Traffic(TrafficCmd),
    /// Re-run the command recorded in a manifest, rewriting its outputs.
    Replay { manifest: PathBuf },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphCmd {
    /// Sizes, connectivity, strong components and operator summaries.
    Info { graph: PathBuf },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FlowArgs {
    /// Graph JSON; may carry an "exports" array.
    pub graph: PathBuf,
    /// JSON array of exports, overriding the graph file.
    #[arg(long)]
    pub exports: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisArg {
    Flows,
    Overall,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureCmd {
    /// Finn cycling index per vertex and for the system.
    Fci(FlowArgs),
    Reciprocity {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, value_enum, default_value_t = BasisArg::Flows)]
        basis: BasisArg,
    },
    /// Degree, harmonic closeness and betweenness.
    Centrality {
        graph: PathBuf,
        /// Ignore edge directions.
        #[arg(long)]
        undirected: bool,
    },
    Louvain { graph: PathBuf },
    Kshell { graph: PathBuf },
    /// Default cascade on an exposure network.
    Cascade {
        graph: PathBuf,
        /// Cascade configuration JSON.
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    Auto,
    Exact,
    Upwind,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportCmd {
    /// Edge masses over time.
    Evolve {
        scenario: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Cells per edge, overriding the scenario.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value_t = SchemeArg::Auto)]
        scheme: SchemeArg,
        #[arg(long)]
        dt: Option<f64>,
        /// Time between rows; only the start and end when omitted.
        #[arg(long)]
        sample_every: Option<f64>,
    },
    /// Eigenvalues in a rectangle of the complex plane.
    Spectrum {
        scenario: PathBuf,
        /// `re_min,re_max,im_min,im_max`.
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1,-10,10")]
        region: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Periodic and convergent components, transient edges.
    Asymptotics {
        scenario: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value_t = SchemeArg::Auto)]
        scheme: SchemeArg,
    },
    /// Long-run variant prevalence per patch.
    Virus { scenario: PathBuf },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionCmd {
    /// Eigenvalues of an equilateral graph with their family.
    Spectrum {
        scenario: PathBuf,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Heat flow from the scenario's initial data.
    Heat {
        scenario: PathBuf,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Steps between rows.
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
    },
    /// Grid-graph approximation of −Δu = f on the unit square with
    /// u = sin(pπx)sin(qπy).
    Dirichlet {
        /// Grid sizes.
        #[arg(long = "N", value_delimiter = ',', default_value = "8,16,32,64")]
        n: Vec<usize>,
        /// `p,q`.
        #[arg(long, value_delimiter = ',', default_value = "1,1")]
        mode: Vec<u32>,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeCmd {
    /// Outputs over time and a synchronisation verdict.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Steps between rows.
        #[arg(long, default_value_t = 1)]
        sample_every: usize,
        #[arg(long, default_value_t = 1e-6)]
        sync_tol: f64,
        /// Trailing window for the synchronisation check.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
    },
    /// Jacobian at the synchronous origin and its eigenvalues.
    Jacobian { model: PathBuf },
    /// σ(J) against the union of σ(B − λD) over the Laplacian spectrum.
    Specunion { model: PathBuf },
    /// Laplacian eigenvalues recovered from Jacobian eigenvalues.
    Recover { model: PathBuf },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficCmd {
    /// Per-edge telemetry over time.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        t_end: f64,
        /// Also emit the full density and speed fields at this time.
        #[arg(long)]
        snapshot: Option<f64>,
        /// Steps between rows.
        #[arg(long, default_value_t = 1)]
        sample_every: u64,
        #[arg(long)]
        allow_cfl_override: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, message: String },
    Domain { context: String, source: netdyn_core::Error },
}

impl CliError {
    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    pub fn domain(context: impl fmt::Display, source: netdyn_core::Error) -> Self {
        CliError::Domain { context: context.to_string(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = match self {
            CliError::Usage(m) => format!("usage: {m}"),
            CliError::Io { path, message } => format!("{}: {message}", path.display()),
            CliError::Domain { context, source } => format!("{context}: {source}"),
        };
        f.write_str(&line.replace('\n', " "))
    }
}

/// Adds the failing input to a core error.
pub trait Context<T> {
    fn at(self, context: impl fmt::Display) -> Result<T, CliError>;
}

impl<T> Context<T> for netdyn_core::Result<T> {
    fn at(self, context: impl fmt::Display) -> Result<T, CliError> {
        self.map_err(|e| CliError::domain(context, e))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NETDYN_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("NETDYN_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))
}

/// Parses `args` (without the program name) and runs the command.
pub fn dispatch(args: &[String]) -> Result<(), CliError> {
    let argv = std::iter::once("netdyn".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return Err(CliError::Usage(first.to_string()));
        }
    };
    if let Command::Replay { manifest } = &cli.command {
        let m = manifest::RunManifest::load(manifest)?;
        if matches!(m.args.first().map(String::as_str), Some("replay")) {
            return Err(CliError::Usage(format!("{}: a manifest cannot record a replay", manifest.display())));
        }
        return dispatch(&m.args);
    }
    let report: Report = commands::run(&cli.command, &cli.global)?;
    let written = report::emit(&report, cli.global.format, cli.global.out.as_deref())?;
    if let Some(out) = &cli.global.out {
        manifest::RunManifest::new(&cli, args, written).write_beside(out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let result = configure_threads().and_then(|()| dispatch(&args));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netdyn: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
