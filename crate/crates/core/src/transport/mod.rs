//! Advection on metric graphs.
//!
//! Every edge is rescaled to `[0, 1]` with mass flowing from `s = 1` to
//! `s = 0` at speed `c_j`; at a vertex the arriving flux is split over the
//! outgoing edges by the boundary weights. Provides exact and upwind
//! evolution, the point spectrum via `det(I − E_λ(−1)B_C) = 0`, the
//! long-time decomposition into periodic, equilibrium and transient parts,
//! and the virus-variant prevalence model built on it.

mod asymptotics;
mod evolve;
mod scenario;
mod spectrum;
mod system;
mod virus;

pub use asymptotics::{asymptotics, AsymptoticReport, Behaviour, TerminalComponent, TransientClass, AVERAGING_TRAVERSALS};
pub use evolve::{evolve, EvolveOptions, Scheme, Stepper, TransportTrajectory, MAX_EXACT_CELLS};
pub use scenario::{InitialData, Profile, TransportScenario, VirusScenario};
pub use spectrum::{eigen_residuals, spectrum, Eigenpair, Region, MAX_DEPTH, NEWTON_TOL};
pub use system::{EdgeField, Speed, TransportSystem};
pub use virus::{VirusModel, VirusReport};
