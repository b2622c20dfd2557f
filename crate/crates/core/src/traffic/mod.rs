//! Payne–Whitham traffic on embedded road networks.
//!
//! Each road is split into `N_e` cells of length `δs`; density follows the
//! flux form of the conservation law and speed relaxes towards the
//! fundamental diagram with an anticipation term. Intersections supply the
//! virtual values `q(k, 0)`, `v(k, 0)` and `ρ(k, N_e + 1)` from turning
//! weights, with a geometric cap on turning speed and optional signals.

mod network;
mod scenario;
mod sim;

pub use network::{
    fundamental_diagram, AngleConvention, GlobalParams, RoadNetwork, RoadParams, SignalPhase, SignalPlan, Turning,
};
pub use scenario::{CellValues, DemandRecord, TrafficScenario};
pub use sim::{
    boundary_values, intersection_coupling, run, set_signals, step, DemandProfile, EdgeStats, Frame, RunOptions,
    StepReport, Telemetry, TrafficState, Virtual,
};
