//! Phase-space (Wigner) picture of the chirped-driven oscillator: grids
//! and fields, the fixed-frame split-step solver, the rotating-frame
//! method-of-lines solver, and eigenstate projections.

pub mod eigen;
pub mod field;
pub mod fixed;
pub mod rotating;
pub mod spectral;

pub use eigen::WellBasis;
pub use field::{initial_thermal, Axis, Frame, PhaseSpaceField, PhaseSpaceGrid, WignerError};
pub use fixed::{evolve_fixed, FixedFrameConfig, FixedFrameReport};
pub use rotating::{
    classical_reference, evolve_rotating, quantum_term, RotatingFrameConfig, RotatingFrameReport,
};

/// Separatrix ordinate of the undriven anharmonic well in the rescaled
/// frame (ξ, υ) = √β̄·(x̄, ū): the level set through the saddles
/// (±1, 0), which also crosses the υ axis at ±1/√2.
pub fn separatrix_upsilon(xi: f64) -> f64 {
    (1.0 - xi * xi) / std::f64::consts::SQRT_2
}

/// Both separatrix branches as plain-coordinate (x̄, ū) polylines for
/// overlaying on fixed-frame fields.
pub fn separatrix_polylines(beta_bar: f64, n: usize) -> [Vec<(f64, f64)>; 2] {
    assert!(beta_bar > 0.0 && n >= 2);
    let scale = 1.0 / beta_bar.sqrt();
    let branch = |sign: f64| -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let xi = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                (scale * xi, scale * sign * separatrix_upsilon(xi))
            })
            .collect()
    };
    [branch(1.0), branch(-1.0)]
}
