//! Diffusively coupled identical agents on a digraph.
//!
//! Each agent `i` evolves as `x_i' = F(x_i) + K(x_i) Σ_k a⁺_ik H(Q(x_k) − Q(x_i))`.
//! Linearising at the origin gives `J = Iₙ ⊗ B − L⁺ ⊗ D`, whose spectrum is
//! the union of `σ(B − λD)` over the Laplacian eigenvalues λ; inverting that
//! relation recovers `σ(L⁺)` from `σ(J)`.

mod agents;
mod linear;
mod model;

pub use agents::{
    simulate, sync_check, AgentModel, AgentNetwork, DoubleIntegrator, LinearAgent, SingleIntegrator, SyncReport,
    Trajectory,
};
pub use linear::{recover_laplacian_spectrum, LinearizedNetwork, Recovery};
pub use model::{AgentFamily, ModelDocument};
