use std::path::Path;

use netdyn_core::graph::GraphDocument;
use netdyn_core::measures::{
    cascade, centralities, finn_cycling_index, k_shells, louvain, reciprocity, CascadeConfig, FlowSystem, PathView,
    ReciprocityBasis,
};
use netdyn_core::Error;
use serde::Deserialize;

use super::{index_list, load_digraph, parse_json};
use crate::report::{Report, Table};
use crate::{BasisArg, CliError, Context, FlowArgs, MeasureCmd};

#[derive(Deserialize)]
struct FlowFile {
    #[serde(flatten)]
    graph: GraphDocument,
    #[serde(default)]
    exports: Option<Vec<f64>>,
}

fn flow_system(args: &FlowArgs) -> Result<FlowSystem, CliError> {
    let file: FlowFile = parse_json(&args.graph)?;
    let g = file.graph.digraph().at(args.graph.display())?;
    let (exports, source) = match &args.exports {
        Some(p) => (parse_json::<Vec<f64>>(p)?, p.as_path()),
        None => {
            let e = file.exports.ok_or_else(|| {
                CliError::domain(
                    args.graph.display(),
                    Error::InvalidInput("no \"exports\" field and no --exports file".into()),
                )
            })?;
            (e, args.graph.as_path())
        }
    };
    FlowSystem::new(g, exports).at(source.display())
}

pub fn run(cmd: &MeasureCmd, seed: u64) -> Result<Report, CliError> {
    match cmd {
        MeasureCmd::Fci(args) => {
            let fs = flow_system(args)?;
            let rep = finn_cycling_index(&fs).at(args.graph.display())?;
            let h = fs.throughflow();
            let mut t = Table::new("fci", &["vertex", "throughflow", "fci"]);
            for (i, f) in rep.per_node.iter().enumerate() {
                t.push(vec![(i + 1).to_string().into(), h[i].into(), (*f).into()]);
            }
            t.push(vec!["system".into(), h.iter().sum::<f64>().into(), rep.system.into()]);
            Ok(vec![t])
        }
        MeasureCmd::Reciprocity { flow, basis } => {
            let fs = flow_system(flow)?;
            let (b, name) = match basis {
                BasisArg::Flows => (ReciprocityBasis::Flows, "flows"),
                BasisArg::Overall => (ReciprocityBasis::Overall, "overall"),
            };
            let r = reciprocity(&fs, b).at(flow.graph.display())?;
            let mut t = Table::new("reciprocity", &["basis", "reciprocity"]);
            t.push(vec![name.into(), r.into()]);
            Ok(vec![t])
        }
        MeasureCmd::Centrality { graph, undirected } => {
            let g = load_digraph(graph)?;
            let view = if *undirected { PathView::Undirected } else { PathView::Directed };
            let c = centralities(&g, view);
            let mut t = Table::new("centrality", &["vertex", "degree", "closeness", "betweenness"]);
            for i in 0..g.vertex_count() {
                t.push(vec![(i + 1).into(), c.degree[i].into(), c.closeness[i].into(), c.betweenness[i].into()]);
            }
            Ok(vec![t])
        }
        MeasureCmd::Louvain { graph } => {
            let g = load_digraph(graph)?;
            let p = louvain(&g);
            let mut labels = Table::new("communities", &["vertex", "community"]);
            for (i, &c) in p.labels.iter().enumerate() {
                labels.push(vec![(i + 1).into(), (c + 1).into()]);
            }
            let mut sweeps = Table::new("sweeps", &["sweep", "modularity"]);
            for (k, &q) in p.sweep_modularity.iter().enumerate() {
                sweeps.push(vec![(k + 1).into(), q.into()]);
            }
            let mut summary = Table::new("summary", &["communities", "levels", "modularity"]);
            summary.push(vec![p.community_count().into(), p.levels.into(), p.modularity.into()]);
            Ok(vec![labels, summary, sweeps])
        }
        MeasureCmd::Kshell { graph } => {
            let g = load_digraph(graph)?;
            let mut t = Table::new("kshell", &["vertex", "shell"]);
            for (i, &k) in k_shells(&g).iter().enumerate() {
                t.push(vec![(i + 1).into(), k.into()]);
            }
            Ok(vec![t])
        }
        MeasureCmd::Cascade { graph, config } => {
            let g = load_digraph(graph)?;
            let cfg = cascade_config(config)?;
            let out = cascade(&g, &cfg, seed).at(config.display())?;
            let mut t = Table::new("losses", &["vertex", "loss", "failed"]);
            for (i, &l) in out.losses.iter().enumerate() {
                t.push(vec![(i + 1).into(), l.into(), out.failed.contains(&i).into()]);
            }
            let mut s = Table::new("summary", &["failed_count", "total_loss", "failed", "added_links"]);
            let added: Vec<String> = out.added_links.iter().map(|(u, v)| format!("{}->{}", u + 1, v + 1)).collect();
            s.push(vec![out.failed.len().into(), out.total_loss.into(), index_list(&out.failed).into(), added.join(" ").into()]);
            Ok(vec![t, s])
        }
    }
}

/// Cascade files name shocked vertices from 1.
fn cascade_config(path: &Path) -> Result<CascadeConfig, CliError> {
    let mut cfg: CascadeConfig = parse_json(path)?;
    for v in &mut cfg.shocked {
        *v = v
            .checked_sub(1)
            .ok_or_else(|| CliError::domain(path.display(), Error::InvalidInput("vertex index 0; indices start at 1".into())))?;
    }
    Ok(cfg)
}
