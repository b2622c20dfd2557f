use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::report::Format;
use crate::{Cli, CliError, Command, DiffusionCmd, GraphCmd, MeasureCmd, OdeCmd, TrafficCmd, TransportCmd};

/// Record of one run. `args` replayed through the same binary version
/// reproduce every output byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    /// Every option of the command after defaults were applied.
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub format: Format,
    pub outputs: Vec<PathBuf>,
    pub version: String,
}

fn inputs(cmd: &Command) -> Vec<PathBuf> {
    let one = |p: &PathBuf| vec![p.clone()];
    match cmd {
        Command::Graph(GraphCmd::Info { graph }) => one(graph),
        Command::Measure(m) => match m {
            MeasureCmd::Fci(f) | MeasureCmd::Reciprocity { flow: f, .. } => {
                std::iter::once(f.graph.clone()).chain(f.exports.clone()).collect()
            }
            MeasureCmd::Centrality { graph, .. } | MeasureCmd::Louvain { graph } | MeasureCmd::Kshell { graph } => {
                one(graph)
            }
            MeasureCmd::Cascade { graph, config } => vec![graph.clone(), config.clone()],
        },
        Command::Transport(
            TransportCmd::Evolve { scenario, .. }
            | TransportCmd::Spectrum { scenario, .. }
            | TransportCmd::Asymptotics { scenario, .. }
            | TransportCmd::Virus { scenario },
        ) => one(scenario),
        Command::Diffusion(DiffusionCmd::Spectrum { scenario, .. } | DiffusionCmd::Heat { scenario, .. }) => {
            one(scenario)
        }
        Command::Diffusion(DiffusionCmd::Dirichlet { .. }) => Vec::new(),
        Command::Ode(
            OdeCmd::Simulate { model, .. } | OdeCmd::Jacobian { model } | OdeCmd::Specunion { model } | OdeCmd::Recover { model },
        ) => one(model),
        Command::Traffic(TrafficCmd::Run { scenario, .. }) => one(scenario),
        Command::Replay { manifest } => one(manifest),
    }
}

fn subcommand(cmd: &Command) -> String {
    let (group, v) = match cmd {
        Command::Replay { .. } => return "replay".into(),
        Command::Graph(c) => ("graph", serde_json::to_value(c)),
        Command::Measure(c) => ("measure", serde_json::to_value(c)),
        Command::Transport(c) => ("transport", serde_json::to_value(c)),
        Command::Diffusion(c) => ("diffusion", serde_json::to_value(c)),
        Command::Ode(c) => ("ode", serde_json::to_value(c)),
        Command::Traffic(c) => ("traffic", serde_json::to_value(c)),
    };
    let v = v.expect("commands serialise");
    let leaf = v.as_object().and_then(|o| o.keys().next().cloned()).or_else(|| v.as_str().map(String::from));
    format!("{group} {}", leaf.unwrap_or_default())
}

impl RunManifest {
    pub fn new(cli: &Cli, args: &[String], outputs: Vec<PathBuf>) -> Self {
        Self {
            subcommand: subcommand(&cli.command),
            args: args.to_vec(),
            inputs: inputs(&cli.command),
            parameters: serde_json::to_value(&cli.command).expect("commands serialise"),
            seed: cli.global.seed,
            format: cli.global.format,
            outputs,
            version: netdyn_core::VERSION.to_string(),
        }
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        out.with_file_name(name)
    }

    pub fn write_beside(&self, out: &Path) -> Result<(), CliError> {
        let path = Self::path_for(out);
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
    }
}
