//! Stochastic quantum-jump trajectories of a two-state atom in a thermal
//! radiation field, with the analytic rate results needed to check them.
//!
//! Three models share one engine:
//!
//! - [`einstein`]: the classic rate-equation jump process (no coherence).
//! - [`driven`]: thermal jumps plus a resonant classical drive, with coherent
//!   non-Hermitian evolution between jumps.
//! - [`mode`]: one reservoir mode promoted into the system, entangled with
//!   the atom inside a two-dimensional manifold between jumps.
//!
//! The [`rates`] module carries the closed-form results that the stochastic
//! output must reproduce (anomalous jump probabilities, photon-number jump
//! rates, the Bose-Einstein stationary distribution, and the mode-summed
//! consistency integral), and [`ensemble`] runs seeded, reproducible
//! parallel ensembles with merged statistics.

pub mod config;
pub mod csvio;
pub mod driven;
pub mod einstein;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod mode;
pub mod physics;
pub mod rates;
mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use rng::{derive_seed, rng_from_seed};
