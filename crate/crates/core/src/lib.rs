//! Finite-time agreement for networks of scalar integrator agents.
//!
//! Two nonlinear agreement protocols drive every agent state `x_i` toward a
//! common value in finite time over an undirected weighted graph:
//!
//! * `P1`: `u_i = sig(Σ_j a_ij (x_j - x_i), α)`
//! * `P2`: `u_i = Σ_j a_ij sig(x_j - x_i, α)` (also preserves the state average)
//!
//! where `sig(r, α) = sign(r)·|r|^α` and `0 < α < 1`. The crate evaluates these
//! vector fields, computes the Lyapunov-based settling-time bounds from the
//! graph Laplacian spectrum, integrates fixed and switching topologies, and
//! serializes scenarios, trajectories and reports for the `ftconsensus` CLI.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod graph;
pub mod output;
pub mod protocols;
pub mod repro;
pub mod scenario;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Laplacian, Topology};
pub use protocols::{ProtocolKind, ProtocolSpec, StateVector};
pub use sim::{Scenario, Status, SwitchingSchedule, TopologySource, Trajectory};
pub use spectral::SpectrumResult;
