//! Atomic congestion games, local linear toll mechanisms, and the robustness
//! of toll design to cost-parameter misspecification.
//!
//! - [`game`]: games with basis-parameterized resource costs, deployed
//!   tolls, agent and system costs, and the Rosenthal potential.
//! - [`equilibrium`]: exact pure-Nash enumeration (with an anonymous-profile
//!   reduction for symmetric games), best-response dynamics, and the price
//!   of anarchy.
//! - [`tolls`]: marginal-cost and LP-designed toll mechanisms, the lambda
//!   rescaling family, and certified misspecification radii under which no
//!   new equilibria can appear.
//! - [`robust`]: worst-case price of anarchy over a game class under
//!   relative coefficient error, as a linear program, with the tight cyclic
//!   game construction attaining it.
//! - [`experiments`]: seeded Monte-Carlo perturbation studies and the
//!   mechanism/lambda sweep grids, with CSV output.
//! - [`gamefile`]: the TOML instance format and bundled games.

pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod game;
pub mod gamefile;
pub mod rng;
pub mod robust;
pub mod tolls;

pub use error::{Error, Result};
