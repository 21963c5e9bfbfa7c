//! Capture-step gait control without `std`.
//!
//! The crate is split along the control loop:
//!
//! * [`lipm`]: closed-form linear inverted pendulum math (prediction,
//!   time-of-arrival inversion, orbital energy, ZMP-shifted 2D predictor).
//! * [`cpg`]: the central-pattern-generated stepping motion expressed through
//!   the abstract leg interface.
//! * [`estimation`]: tilted pose reconstruction, CoM extraction in the
//!   footstep frame and support-exchange detection.
//! * [`control`]: reference trajectory, predictive filter and the balance
//!   controller producing swing amplitude and step time.
//! * [`config`]: the aggregate [`GaitConfig`](config::GaitConfig).
//!
//! Everything here is allocation-free and deterministic. Simulation, file
//! formats and the command-line front end live in the `capstep` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(test)]
extern crate std;

pub mod config;
pub mod control;
pub mod cpg;
pub mod estimation;
pub mod lipm;
mod math;

pub use config::GaitConfig;
pub use control::{FootstepController, StepParams, StepTimeCase};
pub use lipm::{ComState, PendulumParams, State1D, ZmpOffset};
