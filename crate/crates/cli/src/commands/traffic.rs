use netdyn_core::traffic::{run as simulate, RunOptions, TrafficScenario};

use super::read_text;
use crate::report::{Report, Table, Value};
use crate::{CliError, Context, TrafficCmd};

pub fn run(cmd: &TrafficCmd) -> Result<Report, CliError> {
    let TrafficCmd::Run { scenario, t_end, snapshot, sample_every, allow_cfl_override } = cmd;
    let at = scenario.display();
    let sc = TrafficScenario::from_json(&read_text(scenario)?).at(&at)?;
    let net = sc.network().at(&at)?;
    let demand = sc.demand().at(&at)?;
    let initial = sc.initial_state(&net).at(&at)?;
    let opts = RunOptions { sample_every: *sample_every, allow_cfl_override: *allow_cfl_override };
    let tel = simulate(&net, initial.clone(), &demand, *t_end, opts).at(&at)?;

    let mut t = Table::new("telemetry", &["step", "time", "edge", "density", "speed", "flux", "inflow", "vehicles"]);
    for f in &tel.frames {
        for (j, e) in f.edges.iter().enumerate() {
            t.push(vec![
                f.step.into(),
                f.time.into(),
                (j + 1).into(),
                e.density.into(),
                e.speed.into(),
                e.flux.into(),
                e.inflow.into(),
                f.vehicles.into(),
            ]);
        }
    }
    let mut events = Table::new("events", &["kind", "step", "edge", "count"]);
    events.push(vec!["clamp".into(), Value::Null, Value::Null, tel.clamp_events.into()]);
    for &(k, j) in &tel.held_events {
        events.push(vec!["held".into(), k.into(), (j + 1).into(), 1usize.into()]);
    }
    let mut report = vec![t, events];

    if let Some(ts) = snapshot {
        let state = if (*ts - t_end).abs() <= 1e-12 * t_end.abs().max(1.0) {
            tel.final_state
        } else {
            let quiet = RunOptions { sample_every: u64::MAX, ..opts };
            simulate(&net, initial, &demand, *ts, quiet).at(&at)?.final_state
        };
        let ds = net.global().ds;
        let mut s = Table::new("snapshot", &["time", "edge", "cell", "s", "rho", "v"]);
        let time = state.time(&net);
        for (j, (rho, v)) in state.rho.iter().zip(&state.v).enumerate() {
            for (c, (r, u)) in rho.iter().zip(v).enumerate() {
                s.push(vec![time.into(), (j + 1).into(), (c + 1).into(), ((c as f64 + 0.5) * ds).into(), (*r).into(), (*u).into()]);
            }
        }
        report.push(s);
    }
    Ok(report)
}
