//! Deterministic round-based simulator for energy-aware routing in wireless
//! sensor networks.
//!
//! Each round every alive sensor originates one packet for a distant base
//! station. Five routing policies are available: direct transmission, e3D
//! diffusion, diffusion with global knowledge, random clustering and
//! clustering with global knowledge. Runs are reduced to lifetime,
//! energy-balance and synchronization-overhead statistics.

pub mod energy;
pub mod engine;
pub mod io;
pub mod metrics;
pub mod protocols;
pub mod topology;

pub use engine::{run_simulation, RoundReport, Simulation, SimulationResult};
pub use io::SimConfig;
pub use protocols::ProtocolKind;
