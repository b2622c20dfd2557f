use std::path::Path;

use netdyn_core::transport::{
    asymptotics, eigen_residuals, evolve, spectrum, Behaviour, EdgeField, EvolveOptions, Region, Scheme,
    TransientClass, TransportScenario, TransportSystem, VirusScenario,
};

use super::{index_list, read_text};
use crate::report::{Report, Table, Value};
use crate::{CliError, Context, SchemeArg, TransportCmd};

fn scheme(s: SchemeArg) -> Scheme {
    match s {
        SchemeArg::Auto => Scheme::Auto,
        SchemeArg::Exact => Scheme::Exact,
        SchemeArg::Upwind => Scheme::Upwind,
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Auto => "auto",
        Scheme::Exact => "exact",
        Scheme::Upwind => "upwind",
    }
}

fn load(path: &Path, grid: Option<usize>) -> Result<(TransportSystem, EdgeField), CliError> {
    let sc = TransportScenario::from_json(&read_text(path)?).at(path.display())?;
    let ts = sc.system().at(path.display())?;
    let f = sc.initial_field(grid).at(path.display())?;
    Ok((ts, f))
}

fn parse_region(text: &str) -> Result<Region, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("--region {text}: {e}")))?;
    let [a, b, c, d] = parts[..] else {
        return Err(CliError::Usage(format!("--region needs four numbers, got {text}")));
    };
    Region::new(a, b, c, d).map_err(|e| CliError::Usage(format!("--region {text}: {e}")))
}

pub fn run(cmd: &TransportCmd) -> Result<Report, CliError> {
    match cmd {
        TransportCmd::Evolve { scenario, t_end, grid, scheme: s, dt, sample_every } => {
            let (ts, f) = load(scenario, *grid)?;
            let opts = EvolveOptions { scheme: scheme(*s), dt: *dt, sample_every: *sample_every, ..Default::default() };
            let traj = evolve(&ts, &f, *t_end, &opts).at(scenario.display())?;
            let m = ts.edge_count();
            let mut cols = vec!["time".to_string()];
            cols.extend((1..=m).map(|j| format!("mass_{j}")));
            cols.push("total".into());
            let mut t = Table::with_columns("masses", cols);
            for (time, frame) in traj.times.iter().zip(&traj.frames) {
                let mut row = vec![(*time).into()];
                row.extend((0..m).map(|j| frame.edge_mass(j).into()));
                row.push(frame.mass().into());
                t.push(row);
            }
            let mut s = Table::new("run", &["scheme", "dt", "steps"]);
            s.push(vec![scheme_name(traj.scheme).into(), traj.dt.into(), (traj.times.len() - 1).into()]);
            Ok(vec![t, s])
        }
        TransportCmd::Spectrum { scenario, region, tol } => {
            let region = parse_region(region)?;
            let (ts, _) = load(scenario, None)?;
            let pairs = spectrum(&ts, &region, *tol).at(scenario.display())?;
            let mut t = Table::new("eigenvalues", &["re", "im", "boundary_residual", "ode_residual"]);
            for p in &pairs {
                let (b, o) = eigen_residuals(&ts, p);
                t.push(vec![p.lambda.re.into(), p.lambda.im.into(), b.into(), o.into()]);
            }
            Ok(vec![t])
        }
        TransportCmd::Asymptotics { scenario, grid, scheme: s } => {
            let (ts, f) = load(scenario, *grid)?;
            let opts = EvolveOptions { scheme: scheme(*s), ..Default::default() };
            let rep = asymptotics(&ts, &f, &opts).at(scenario.display())?;
            let mut comps = Table::new("components", &["component", "edges", "behaviour", "period", "error"]);
            let mut masses = Table::new("equilibrium", &["component", "edge", "mass", "window_variance"]);
            for (k, c) in rep.components.iter().enumerate() {
                match &c.behaviour {
                    Behaviour::Periodic { tau, error } => comps.push(vec![
                        (k + 1).into(),
                        index_list(&c.edges).into(),
                        "periodic".into(),
                        format!("{tau}").into(),
                        (*error).into(),
                    ]),
                    Behaviour::Equilibrium { masses: mm, error_bar, window_variance } => {
                        comps.push(vec![
                            (k + 1).into(),
                            index_list(&c.edges).into(),
                            "equilibrium".into(),
                            Value::Null,
                            (*error_bar).into(),
                        ]);
                        for (i, &e) in c.edges.iter().enumerate() {
                            masses.push(vec![(k + 1).into(), (e + 1).into(), mm[i].into(), window_variance[i].into()]);
                        }
                    }
                }
            }
            let mut trans = Table::new("transient", &["edge", "class", "extinction_time", "final_mass"]);
            for (e, class) in &rep.transient {
                let row = match class {
                    TransientClass::Nilpotent { t0 } => vec![(e + 1).into(), "nilpotent".into(), (*t0).into(), Value::Null],
                    TransientClass::Stable { final_mass } => {
                        vec![(e + 1).into(), "stable".into(), Value::Null, (*final_mass).into()]
                    }
                };
                trans.push(row);
            }
            let mut run = Table::new("run", &["scheme", "horizon"]);
            run.push(vec![scheme_name(rep.scheme).into(), rep.horizon.into()]);
            Ok(vec![comps, masses, trans, run])
        }
        TransportCmd::Virus { scenario } => {
            let sc = VirusScenario::from_json(&read_text(scenario)?).at(scenario.display())?;
            let model = sc.model().at(scenario.display())?;
            let f = sc.initial_field().at(scenario.display())?;
            let rep = model.prevalence(&f).at(scenario.display())?;
            let mut prev = Table::new("prevalence", &["patch", "variant", "prevalence"]);
            for (p, row) in rep.prev.iter().enumerate() {
                for (q, &x) in row.iter().enumerate() {
                    prev.push(vec![(p + 1).into(), (q + 1).into(), x.into()]);
                }
            }
            let mut dom = Table::new("dominant", &["patch", "variant"]);
            for (p, d) in rep.dominant.iter().enumerate() {
                dom.push(vec![(p + 1).into(), d.map(|q| q + 1).into()]);
            }
            Ok(vec![prev, dom])
        }
    }
}
