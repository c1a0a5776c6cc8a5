//! Simulation toolkit for one-dimensional Toda chains with an on-site
//! pinning potential `(nu^2 / z) q^z`.
//!
//! * [`chain`]: potentials, forces, energy, heat currents, the center-of-mass invariant.
//! * [`integrator`]: velocity Verlet and the Langevin-reservoir splitting.
//! * [`ness`]: driven chains in their nonequilibrium steady state.
//! * [`ring`]: isolated rings and the persistence of the total current.
//! * [`poincare`]: Poincaré sections of the three-body open chain.
//! * [`config`], [`output`], [`harness`]: experiment files, CSV/JSON output and the run orchestrator.

pub mod chain;
pub mod config;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod ness;
pub mod output;
pub mod poincare;
pub mod ring;
pub mod rng;
pub mod stats;

pub use chain::{Boundary, ChainSpec, Interaction, State};
pub use error::{Error, Result};
pub use integrator::{BathSpec, Scheme, StepperConfig, Trajectory};
pub use rng::RngStream;
