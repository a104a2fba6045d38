//! Local decoherence of large spin ensembles.
//!
//! Three descriptions are provided and cross-checked against each other:
//! exact evolution in the collective-state basis ([`engine`]), quantum
//! trajectories ([`trajectories`]), and a single bosonic mode in phase space
//! ([`phase_space`], [`moments`]). [`oracle`] integrates the full `2^N`
//! master equation for small ensembles.

pub mod basis;
pub mod cli;
pub mod density;
pub mod engine;
pub mod hp;
pub mod jump_spec;
pub mod moments;
pub mod error;
pub mod ode;
pub mod oracle;
pub mod phase_space;
pub mod qfi;
pub mod trajectories;

pub use error::{Error, Result};
