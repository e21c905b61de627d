//! Physical and dimensionless drive parameters and their interconversions.
//!
//! Everything downstream works with the dimensionless pair `(P1, P2)`:
//! `P1 = ε/√(2mħω0α)` measures the drive strength and `P2 = 3ħβ/(4m√α)`
//! the nonlinearity (and classicality) of the chirped system. Physical
//! units exist only at this input boundary.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
}

/// Oscillator and drive parameters in a consistent physical unit system.
///
/// The temperature field is `k_B·T` in energy units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub omega0: f64,
    /// Quartic nonlinearity of the potential `mω0²(x²/2 − βx⁴/4)`.
    pub beta: f64,
    /// Drive amplitude ε of the term `εx cos φ_d`.
    pub drive: f64,
    /// Linear chirp rate α of the drive frequency `ω_d = ω0 − αt`.
    pub chirp: f64,
    pub hbar: f64,
    /// `k_B·T`, ≥ 0.
    pub temperature: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        for (name, value) in [
            ("mass", self.mass),
            ("omega0", self.omega0),
            ("hbar", self.hbar),
            ("chirp", self.chirp),
            ("beta", self.beta),
        ] {
            if !(value > 0.0) {
                return Err(ParamsError::NonPositive { name, value });
            }
        }
        for (name, value) in [("drive", self.drive), ("temperature", self.temperature)] {
            if !(value >= 0.0) {
                return Err(ParamsError::Negative { name, value });
            }
        }
        Ok(())
    }
}

/// The dimensionless parameter set used by every solver.
///
/// `gamma = ħω0/k_B·T_eff` fixes the initial thermal state; `gamma = 2`
/// is the ground state (T = 0), the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub p1: f64,
    pub p2: f64,
    pub gamma: f64,
}

impl DimensionlessParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self, ParamsError> {
        Self::with_gamma(p1, p2, 2.0)
    }

    pub fn with_gamma(p1: f64, p2: f64, gamma: f64) -> Result<Self, ParamsError> {
        if !(p1 >= 0.0) {
            return Err(ParamsError::Negative { name: "p1", value: p1 });
        }
        if !(p2 > 0.0) {
            return Err(ParamsError::NonPositive { name: "p2", value: p2 });
        }
        if !(gamma > 0.0) {
            return Err(ParamsError::NonPositive { name: "gamma", value: gamma });
        }
        Ok(Self { p1, p2, gamma })
    }

    /// Classical autoresonance drive parameter `μ = ½·P1·√P2`.
    pub fn mu(&self) -> f64 {
        0.5 * self.p1 * self.p2.sqrt()
    }

    /// Dimensionless Planck constant of the rotating frame, `λ = ½·P2`.
    pub fn lambda(&self) -> f64 {
        0.5 * self.p2
    }

    /// Variance of the rotating-frame initial Gaussian,
    /// `σ² = (λ/2)·coth(ħω0/2k_BT) = λ/γ`; reduces to `λ/2` at T = 0.
    pub fn sigma_sq(&self) -> f64 {
        self.lambda() / self.gamma
    }
}

/// Convert physical parameters to the dimensionless set.
pub fn from_physical(p: &PhysicalParams) -> Result<DimensionlessParams, ParamsError> {
    p.validate()?;
    let p1 = p.drive / (2.0 * p.mass * p.hbar * p.omega0 * p.chirp).sqrt();
    let p2 = 3.0 * p.hbar * p.beta / (4.0 * p.mass * p.chirp.sqrt());
    let kt_eff = effective_temperature(p.hbar * p.omega0, p.temperature);
    let gamma = p.hbar * p.omega0 / kt_eff;
    DimensionlessParams::with_gamma(p1, p2, gamma)
}

/// `k_B·T_eff = (ħω0/2)·coth(ħω0/2k_BT)`: classical temperature with the
/// quantum zero-point floor. Saturates at `ħω0/2` as T → 0 and approaches
/// `k_B·T` at high temperature.
pub fn effective_temperature(hbar_omega0: f64, kt: f64) -> f64 {
    let half = 0.5 * hbar_omega0;
    if kt == 0.0 {
        return half;
    }
    half * coth(half / kt)
}

/// Classical AR drive parameter `μ = ½·P1·√P2`.
pub fn classical_drive_param(d: &DimensionlessParams) -> f64 {
    d.mu()
}

/// `coth(x)` for x > 0, accurate for both small and large arguments.
fn coth(x: f64) -> f64 {
    // 1 + 2/(e^{2x} − 1); expm1 keeps the small-x limit 1/x exact,
    // overflow at large x degrades gracefully to 1.
    1.0 + 2.0 / (2.0 * x).exp_m1()
}
