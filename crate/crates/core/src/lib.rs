//! Simulator for the Dicke model driven by a rotation of the pseudo-spin.
//!
//! Two engines share one set of parameters and observables: the
//! thermodynamic-limit mean-field flow ([`meanfield`]) and exact finite-size
//! propagation on a truncated Fock space ([`quantum`]). [`experiments`]
//! builds driving protocols and parameter sweeps on top of both, and
//! [`config`] / [`output`] back the `rotdicke` command-line tool.

pub mod config;
pub mod error;
pub mod experiments;
pub mod meanfield;
pub mod model;
pub mod output;
pub mod quantum;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use trajectory::{Engine, Observable, Sample, Trajectory};
