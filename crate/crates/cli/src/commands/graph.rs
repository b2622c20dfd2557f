use netdyn_core::graph::{operator_suite, strong_components};
use netdyn_core::DMatrix;

use super::{index_list, load_digraph};
use crate::report::{Report, Table, Value};
use crate::{CliError, GraphCmd};

pub fn run(cmd: &GraphCmd) -> Result<Report, CliError> {
    let GraphCmd::Info { graph } = cmd;
    let g = load_digraph(graph)?;
    let comps = strong_components(&g);

    let mut summary = Table::new("summary", &["property", "value"]);
    let loops = g.edges().iter().filter(|e| e.is_loop()).count();
    let total: f64 = g.weights().iter().sum();
    let rows: Vec<(&str, Value)> = vec![
        ("vertices", g.vertex_count().into()),
        ("edges", g.edge_count().into()),
        ("loops", loops.into()),
        ("total_weight", total.into()),
        ("symmetric", g.is_symmetric().into()),
        ("weakly_connected", g.is_weakly_connected().into()),
        ("strongly_connected", g.is_strongly_connected().into()),
        ("strong_components", comps.len().into()),
        ("terminal_components", comps.iter().filter(|c| c.terminal).count().into()),
    ];
    for (k, v) in rows {
        summary.push(vec![k.into(), v]);
    }

    let mut components = Table::new("components", &["component", "size", "terminal", "vertices"]);
    for (k, c) in comps.iter().enumerate() {
        components.push(vec![(k + 1).into(), c.vertices.len().into(), c.terminal.into(), index_list(&c.vertices).into()]);
    }

    let ops = operator_suite(&g);
    let named: [(&str, &DMatrix<f64>); 27] = [
        ("phi_in", &ops.phi_in),
        ("phi_out", &ops.phi_out),
        ("adj_in", &ops.adj_in),
        ("adj_out", &ops.adj_out),
        ("adj_in_unweighted", &ops.adj_in_unweighted),
        ("adj_out_unweighted", &ops.adj_out_unweighted),
        ("adj", &ops.adj),
        ("adj_unweighted", &ops.adj_unweighted),
        ("deg_in", &ops.deg_in),
        ("deg_out", &ops.deg_out),
        ("deg_in_unweighted", &ops.deg_in_unweighted),
        ("deg_out_unweighted", &ops.deg_out_unweighted),
        ("deg", &ops.deg),
        ("deg_unweighted", &ops.deg_unweighted),
        ("advection_in", &ops.advection_in),
        ("advection_out", &ops.advection_out),
        ("advection_in_unweighted", &ops.advection_in_unweighted),
        ("advection_out_unweighted", &ops.advection_out_unweighted),
        ("kirchhoff_in", &ops.kirchhoff_in),
        ("kirchhoff_out", &ops.kirchhoff_out),
        ("kirchhoff_in_unweighted", &ops.kirchhoff_in_unweighted),
        ("kirchhoff_out_unweighted", &ops.kirchhoff_out_unweighted),
        ("laplace_beltrami", &ops.laplace_beltrami),
        ("laplace_beltrami_unweighted", &ops.laplace_beltrami_unweighted),
        ("line_in", &ops.line_in),
        ("line_out", &ops.line_out),
        ("line", &ops.line),
    ];
    let mut operators = Table::new("operators", &["operator", "rows", "cols", "nonzeros", "trace", "frobenius"]);
    for (name, m) in named {
        operators.push(vec![
            name.into(),
            m.nrows().into(),
            m.ncols().into(),
            m.iter().filter(|&&x| x != 0.0).count().into(),
            m.is_square().then(|| m.trace()).into(),
            m.norm().into(),
        ]);
    }
    Ok(vec![summary, components, operators])
}
