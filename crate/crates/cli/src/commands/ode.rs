use std::path::Path;

use netdyn_core::linalg::{cluster_multiset_distance, eigenvalues_real, C64};
use netdyn_core::ode::{recover_laplacian_spectrum, simulate, sync_check, AgentNetwork, ModelDocument};

use super::read_text;
use crate::report::{Report, Table};
use crate::{CliError, Context, OdeCmd};

/// Radius used to group repeated eigenvalues when comparing spectra.
const CLUSTER_RADIUS: f64 = 1e-5;

fn load(path: &Path) -> Result<(ModelDocument, AgentNetwork), CliError> {
    let doc = ModelDocument::from_json(&read_text(path)?).at(path.display())?;
    let net = doc.network().at(path.display())?;
    Ok((doc, net))
}

fn eigen_table(name: &str, values: &[C64]) -> Table {
    let mut t = Table::new(name, &["re", "im"]);
    for z in values {
        t.push(vec![z.re.into(), z.im.into()]);
    }
    t
}

fn sorted(mut v: Vec<C64>) -> Vec<C64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

pub fn run(cmd: &OdeCmd) -> Result<Report, CliError> {
    match cmd {
        OdeCmd::Simulate { model, t_end, dt, sample_every, sync_tol, window } => {
            let (doc, net) = load(model)?;
            let x0 = doc.initial_state(&net).at(model.display())?;
            let traj = simulate(&net, &x0, t_end.unwrap_or(doc.t_end), dt.unwrap_or(doc.dt)).at(model.display())?;
            let (n, q) = (traj.agents, traj.output_dim);
            let mut cols = vec!["time".to_string()];
            for i in 1..=n {
                if q == 1 {
                    cols.push(format!("y_{i}"));
                } else {
                    cols.extend((1..=q).map(|c| format!("y_{i}_{c}")));
                }
            }
            let mut t = Table::with_columns("outputs", cols);
            let last = traj.times.len() - 1;
            let every = (*sample_every).max(1);
            for s in (0..=last).filter(|&s| s % every == 0 || s == last) {
                let mut row = vec![traj.times[s].into()];
                row.extend(traj.outputs[s].iter().map(|&y| y.into()));
                t.push(row);
            }
            let window = window.min(traj.times[last]);
            let rep = sync_check(&traj, *sync_tol, window).at(model.display())?;
            let mut s = Table::new("sync", &["synchronized", "max_deviation", "tolerance", "window"]);
            s.push(vec![rep.synchronized.into(), rep.max_deviation.into(), (*sync_tol).into(), window.into()]);
            Ok(vec![t, s])
        }
        OdeCmd::Jacobian { model } => {
            let (_, net) = load(model)?;
            let j = net.linearize().jacobian().at(model.display())?;
            let mut cols = vec!["row".to_string()];
            cols.extend((1..=j.ncols()).map(|c| format!("c{c}")));
            let mut t = Table::with_columns("jacobian", cols);
            for r in 0..j.nrows() {
                let mut row = vec![(r + 1).into()];
                row.extend(j.row(r).iter().map(|&x| x.into()));
                t.push(row);
            }
            let eig = sorted(eigenvalues_real(&j).at(model.display())?);
            Ok(vec![t, eigen_table("eigenvalues", &eig)])
        }
        OdeCmd::Specunion { model } => {
            let (_, net) = load(model)?;
            let lin = net.linearize();
            let direct = sorted(eigenvalues_real(&lin.jacobian().at(model.display())?).at(model.display())?);
            let union = sorted(lin.spectrum_union().at(model.display())?);
            let mut s = Table::new("comparison", &["count", "cluster_distance"]);
            s.push(vec![direct.len().into(), cluster_multiset_distance(&direct, &union, CLUSTER_RADIUS).into()]);
            Ok(vec![eigen_table("jacobian", &direct), eigen_table("union", &union), s])
        }
        OdeCmd::Recover { model } => {
            let (doc, net) = load(model)?;
            let lin = net.linearize();
            let mu: Vec<C64> = match &doc.mu {
                Some(m) => m.iter().map(|&[re, im]| C64::new(re, im)).collect(),
                None => eigenvalues_real(&lin.jacobian().at(model.display())?).at(model.display())?,
            };
            let rec = recover_laplacian_spectrum(&mu, &lin.b, &lin.d).at(model.display())?;
            let spectrum = sorted(rec.spectrum.clone().unwrap_or_default());
            let mut s = Table::new("recovery", &["recovered", "rank_one", "failure"]);
            s.push(vec![rec.spectrum.is_some().into(), rec.rank_one.into(), rec.failure.clone().into()]);
            let mut c = Table::new("candidates", &["mu_re", "mu_im", "lambda_re", "lambda_im"]);
            for (m, list) in mu.iter().zip(&rec.candidates) {
                for l in list {
                    c.push(vec![m.re.into(), m.im.into(), l.re.into(), l.im.into()]);
                }
            }
            Ok(vec![eigen_table("spectrum", &spectrum), s, c])
        }
    }
}
