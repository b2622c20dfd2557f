mod diffusion;
mod graph;
mod measure;
mod ode;
mod traffic;
mod transport;

use std::path::Path;

use netdyn_core::graph::GraphDocument;
use netdyn_core::Digraph;

use crate::report::Report;
use crate::{CliError, Command, Context, GlobalOpts};

pub fn run(cmd: &Command, global: &GlobalOpts) -> Result<Report, CliError> {
    match cmd {
        Command::Graph(c) => graph::run(c),
        Command::Measure(c) => measure::run(c, global.seed),
        Command::Transport(c) => transport::run(c),
        Command::Diffusion(c) => diffusion::run(c),
        Command::Ode(c) => ode::run(c),
        Command::Traffic(c) => traffic::run(c),
        Command::Replay { .. } => unreachable!("replay is resolved before dispatch"),
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::io(path, e))
}

pub(crate) fn load_digraph(path: &Path) -> Result<Digraph, CliError> {
    let doc: GraphDocument = parse_json(path)?;
    doc.digraph().at(path.display())
}

/// 1-based, space-separated.
pub(crate) fn index_list(items: &[usize]) -> String {
    items.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ")
}
