//! Kirchhoff Laplacian on metric graphs.
//!
//! Equilateral spectra from the transition matrix `D⁻¹A`, implicit heat
//! evolution with its long-time limit, and the grid-graph approximation of
//! the Dirichlet problem on the unit square.

mod grid;
mod heat;
mod scenario;
mod spectrum;

pub use grid::{
    adaptive_simpson, dirichlet_convergence, dirichlet_grid_solve, ConvergenceRow, ConvergenceTable, GridGraph,
    GridSolution, QUAD_TOL,
};
pub use heat::{default_dt, heat_asymptotics, heat_evolve, HeatAsymptotics, HeatSolver, HeatTrajectory, KirchhoffLaplacian};
pub use scenario::DiffusionScenario;
pub use spectrum::{eigenfunction, eigenfunction_residuals, equilateral_spectrum, Family, SpectralEntry};
