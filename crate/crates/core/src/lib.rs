//! Phase-locking transition of a chirped-frequency-driven Duffing oscillator.
//!
//! The library computes resonant-capture probabilities, thresholds, and
//! transition widths in the `(P1, P2)` parameter plane three ways:
//!
//! - [`ladder`]: rotating-wave Schrödinger integration of the level
//!   amplitudes on a truncated energy ladder,
//! - [`analytic`]: closed-form Landau-Zener ladder-climbing and classical
//!   autoresonance formulas,
//! - [`wigner`]: quantum Liouville evolution of the Wigner function in the
//!   fixed and chirped rotating frames.
//!
//! [`capture`] turns ladder runs into the observables (capture probability,
//! S-curves, threshold, width); [`params`] holds the parameter conversions.

pub mod analytic;
pub mod capture;
pub mod ladder;
pub mod ode;
pub mod params;
pub mod wigner;

pub use capture::{CaptureResult, SCurve};
pub use ladder::{AmplitudeState, LadderRun};
pub use params::{DimensionlessParams, PhysicalParams};
