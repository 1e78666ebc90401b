//! Simulation of open quantum dynamics for systems composed of elementary
//! free subsystems (modes, qbits) and interactions between them.
//!
//! Three evolution drivers are provided: a single Monte Carlo wave-function
//! trajectory, an ensemble of such trajectories, and the full master
//! equation. All of them share the same element contracts and operator
//! kernels, so a system defined once can be evolved in any of the three ways.
//!
//! The layers, bottom up:
//!
//! * [`qdata`]: multi-leg state vectors and density operators, partial trace,
//!   partial transpose, negativity.
//! * [`qop`]: tridiagonal one-leg operators, leg-wise product terms, diagonal
//!   propagators for the interaction picture.
//! * [`structure`]: the role contracts of elements (Hamiltonian, jumps,
//!   exact propagator, averages).
//! * [`elements`]: modes, qbits, Jaynes–Cummings and a ternary coupling, with
//!   their parameter records and makers.
//! * [`composite`]: wiring of frees and interactions via [`composite::Act`].
//! * [`evolution`]: ODE stepper, trajectories and the `evolve` dispatcher.
//! * [`cli`]: the parameter table and command-line parsing.
//! * [`trajio`]: output formatting and `.sv` state files.
//! * [`driver`]: ready-made scripts used by the `qedsim` binary.

pub mod cli;
pub mod composite;
pub mod driver;
pub mod elements;
mod error;
pub mod evolution;
pub mod qdata;
pub mod qop;
pub mod structure;
pub mod trajio;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

/// Name written into output headers.
pub const FRAMEWORK_NAME: &str = "qedsim";
/// Version written into output headers.
pub const FRAMEWORK_VERSION: &str = env!("CARGO_PKG_VERSION");
