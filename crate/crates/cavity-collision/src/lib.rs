//! Simulation and analysis of the cavity-assisted coherent collision of two
//! Rydberg atoms crossing a two-mode non-resonant microwave cavity.
//!
//! The crate provides three layers:
//!
//! * [`analytic`] — the closed-form collision mixing angles (free-space van
//!   der Waals estimate and the exact dispersive cavity expressions), the
//!   detuning parameter eta and its inversion;
//! * [`dynamics`] — exact time-dependent propagation of the two-atom /
//!   two-mode state through the Gaussian mode profile, with thermal-field
//!   averaging;
//! * [`measurement`] — Ramsey analysis pulses, the detection-error model and
//!   the Bell-correlator phase scan.
//!
//! [`sweep`] and [`config`] drive parameter sweeps from flat `key = value`
//! configs and emit deterministic CSV tables; [`acceptance`] bundles the
//! release-gating self-tests behind the `selftest` subcommand.
//!
//! ```
//! use cavity_collision::analytic::{cavity_angle_eq4, eta_from_delta};
//! use cavity_collision::model::{v0_effective, PhysicalSetup};
//!
//! let setup = PhysicalSetup::reference();
//! let v0 = v0_effective(300.0, 243.0)?;
//! let eta = eta_from_delta(std::f64::consts::TAU * 470e3, &setup)?.eta;
//! let theta = cavity_angle_eq4(&setup, eta, v0)?.theta;
//! assert!((theta - 0.4492).abs() < 1e-3);
//! # Ok::<(), cavity_collision::error::Error>(())
//! ```
//!
//! A narrative guide lives in `book/`; its code listings are compiled as
//! doc-tests via the hidden [`guide`] module.

pub mod acceptance;
pub mod analytic;
pub mod basis;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod measurement;
pub mod model;
pub mod sweep;

#[doc(hidden)]
pub mod guide;

pub use error::{Error, Result};
