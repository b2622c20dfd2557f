use std::f64::consts::PI;

use netdyn_core::diffusion::{
    dirichlet_convergence, equilateral_spectrum, heat_asymptotics, heat_evolve, DiffusionScenario, Family,
};

use super::read_text;
use crate::report::{Report, Table};
use crate::{CliError, Context, DiffusionCmd};

pub fn run(cmd: &DiffusionCmd) -> Result<Report, CliError> {
    match cmd {
        DiffusionCmd::Spectrum { scenario, kmax } => {
            let sc = DiffusionScenario::from_json(&read_text(scenario)?).at(scenario.display())?;
            let g = sc.graph.metric_graph().at(scenario.display())?;
            let entries = equilateral_spectrum(&g, kmax.unwrap_or(sc.k_max)).at(scenario.display())?;
            let mut t = Table::new("spectrum", &["lambda", "sqrt_lambda", "family", "multiplicity"]);
            for e in &entries {
                let fam = match e.family {
                    Family::S1 => "S1",
                    Family::S2 => "S2",
                };
                t.push(vec![e.lambda.into(), e.lambda.sqrt().into(), fam.into(), e.multiplicity.into()]);
            }
            Ok(vec![t])
        }
        DiffusionCmd::Heat { scenario, t_end, dt, sample_every } => {
            let sc = DiffusionScenario::from_json(&read_text(scenario)?).at(scenario.display())?;
            let lap = sc.laplacian().at(scenario.display())?;
            let f = sc.initial_field().at(scenario.display())?;
            let dt = dt.or(sc.dt);
            let traj = heat_evolve(&lap, &f, t_end.unwrap_or(sc.t_end), dt, *sample_every).at(scenario.display())?;
            let asy = heat_asymptotics(&lap, &f, dt).at(scenario.display())?;
            let m = f.edges();
            let mut cols = vec!["time".to_string(), "mass".into(), "deviation".into()];
            cols.extend((1..=m).map(|j| format!("mean_{j}")));
            let mut t = Table::with_columns("heat", cols);
            for (time, frame) in traj.times.iter().zip(&traj.frames) {
                let dev = frame.values.iter().flatten().map(|u| (u - asy.limit).abs()).fold(0.0, f64::max);
                let mut row = vec![(*time).into(), lap.mass(frame).into(), dev.into()];
                row.extend((0..m).map(|j| frame.edge_mass(j).into()));
                t.push(row);
            }
            let mut s = Table::new("asymptotics", &["limit", "rate", "lambda2", "horizon", "dt"]);
            s.push(vec![asy.limit.into(), asy.rate.into(), asy.lambda2.into(), asy.horizon.into(), traj.dt.into()]);
            Ok(vec![t, s])
        }
        DiffusionCmd::Dirichlet { n, mode } => {
            let [p, q] = mode[..] else {
                return Err(CliError::Usage(format!("--mode needs two integers, got {mode:?}")));
            };
            if p == 0 || q == 0 {
                return Err(CliError::Usage("--mode entries must be positive".into()));
            }
            let (a, b) = (p as f64 * PI, q as f64 * PI);
            let f = move |x: f64, y: f64| (a * a + b * b) * (a * x).sin() * (b * y).sin();
            let u = move |x: f64, y: f64| (a * x).sin() * (b * y).sin();
            let grad = move |x: f64, y: f64| (a * (a * x).cos() * (b * y).sin(), b * (a * x).sin() * (b * y).cos());
            let table = dirichlet_convergence(&f, &u, &grad, n).at("dirichlet")?;
            let mut t = Table::new("errors", &["N", "h", "h1_error", "sup_error"]);
            for r in &table.rows {
                t.push(vec![r.n.into(), r.h.into(), r.h1_error.into(), r.sup_error.into()]);
            }
            let mut s = Table::new("slopes", &["h1_slope", "sup_slope", "monotone"]);
            s.push(vec![table.h1_slope.into(), table.sup_slope.into(), table.monotone().into()]);
            Ok(vec![t, s])
        }
    }
}
