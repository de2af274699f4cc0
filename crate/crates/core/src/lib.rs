//! Pathwise simulation and analysis of chemostat models with wall growth whose
//! input flow is perturbed by a bounded Ornstein-Uhlenbeck process or by white
//! noise.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerics:
//!
//! * [`noise`]: reproducible Wiener and O-U sample paths on uniform grids,
//!   ergodic statistics and dilution-band certification.
//! * [`models`]: parameter sets, right-hand sides of the deterministic, random
//!   and stochastic systems, and the coordinate transforms between them.
//! * [`integrators`]: fixed-step pathwise RK4 for the random ODEs and
//!   Euler-Maruyama / stochastic Heun for the Itô and Stratonovich SDEs.
//! * [`analysis`]: closed-form attracting-set bounds, regime classification
//!   and pathwise envelope / positivity diagnostics.
//!
//! Configuration files, ensembles, CSV/JSON export and the command line live
//! in the `chemostat-harness` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)] // written to reject NaN as well

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
mod error;
pub mod grid;
pub mod integrators;
pub mod models;
pub mod noise;
mod rng;

pub use error::{Error, ParamViolation, Result, StepFailure};
pub use grid::TimeGrid;
pub use rng::{split_seed, GaussianStream};
