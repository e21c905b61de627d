//! Phase-space grids and real-valued Wigner fields.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WignerError {
    #[error("grid too small: Gaussian tail mass outside the grid is {tail:.3e} (> 1e-8)")]
    GridTooSmall { tail: f64 },
    #[error("time step {dt:e} exceeds the stability bound; admissible step is {admissible:e}")]
    CflViolation { dt: f64, admissible: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Lab frame, coordinates (x̄, ū), time in units of 1/ω0.
    Fixed,
    /// Chirped rotating frame, coordinates (Q, P), slow time τ.
    Rotating,
}

/// One periodic uniform axis: points `min + i·step`, `i = 0..points`,
/// with `step = (max − min)/points` (the right endpoint is the wrap).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn symmetric(half_width: f64, points: usize) -> Self {
        Self { min: -half_width, max: half_width, points }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / self.points as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step()
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }

    /// FFT angular frequencies for this axis, in fftfreq order.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.points;
        let d = 2.0 * std::f64::consts::PI / (self.step() * n as f64);
        (0..n)
            .map(|i| {
                let k = if i <= (n - 1) / 2 { i as isize } else { i as isize - n as isize };
                k as f64 * d
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    /// Position-like axis (x̄ in the fixed frame, Q in the rotating frame).
    pub x: Axis,
    /// Velocity-like axis (ū or P).
    pub u: Axis,
}

impl PhaseSpaceGrid {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self { x: Axis::symmetric(half_width, points), u: Axis::symmetric(half_width, points) }
    }

    pub fn cell_area(&self) -> f64 {
        self.x.step() * self.u.step()
    }

    pub fn len(&self) -> usize {
        self.x.points * self.u.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Real Wigner function sampled on a phase-space grid, row-major with the
/// u index contiguous. May be negative; normalized so the discrete
/// integral is 1 at construction.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseSpaceField {
    pub frame: Frame,
    pub grid: PhaseSpaceGrid,
    pub time: f64,
    pub values: Vec<f64>,
}

impl PhaseSpaceField {
    pub fn at(&self, ix: usize, iu: usize) -> f64 {
        self.values[ix * self.grid.u.points + iu]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Total negative mass `∬ max(−f, 0)`.
    pub fn negativity(&self) -> f64 {
        self.values.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>()
            * self.grid.cell_area()
    }

    /// Centered second moments (⟨x²⟩, ⟨u²⟩) of the field.
    pub fn second_moments(&self) -> (f64, f64) {
        let xs = self.grid.x.values();
        let us = self.grid.u.values();
        let a = self.grid.cell_area();
        let m: f64 = self.integral();
        let (mut mx, mut mu) = (0.0, 0.0);
        for (ix, &x) in xs.iter().enumerate() {
            for (iu, &u) in us.iter().enumerate() {
                let f = self.at(ix, iu) * a;
                mx += x * x * f;
                mu += u * u * f;
            }
        }
        (mx / m, mu / m)
    }

    /// Box-average over square cells of the given size (a multiple of the
    /// grid spacing is exact; other sizes round to the nearest multiple).
    /// The total integral is unchanged; `cell` equal to the grid spacing
    /// is the identity.
    pub fn coarse_grain(&self, cell: f64) -> PhaseSpaceField {
        let kx = (cell / self.grid.x.step()).round().max(1.0) as usize;
        let ku = (cell / self.grid.u.step()).round().max(1.0) as usize;
        let (nx, nu) = (self.grid.x.points, self.grid.u.points);
        let mut out = vec![0.0; self.values.len()];
        let mut bx = 0;
        while bx < nx {
            let ex = (bx + kx).min(nx);
            let mut bu = 0;
            while bu < nu {
                let eu = (bu + ku).min(nu);
                let count = ((ex - bx) * (eu - bu)) as f64;
                let mut sum = 0.0;
                for ix in bx..ex {
                    for iu in bu..eu {
                        sum += self.at(ix, iu);
                    }
                }
                let avg = sum / count;
                for ix in bx..ex {
                    for iu in bu..eu {
                        out[ix * nu + iu] = avg;
                    }
                }
                bu = eu;
            }
            bx = ex;
        }
        PhaseSpaceField { frame: self.frame, grid: self.grid, time: self.time, values: out }
    }
}

/// Centered thermal Gaussian `exp(−(x²+u²)/2σ²)/(2πσ²)`, renormalized so
/// the discrete integral is exactly 1.
///
/// Fixed frame: σ² = 1 (the rescaling absorbs the temperature). Rotating
/// frame: σ² = (λ/2)·coth(ħω0/2k_BT), i.e. λ/2 at T = 0.
pub fn initial_thermal(
    frame: Frame,
    grid: &PhaseSpaceGrid,
    sigma_sq: f64,
    time: f64,
) -> Result<PhaseSpaceField, WignerError> {
    assert!(sigma_sq > 0.0);
    let sigma = sigma_sq.sqrt();
    let inside = |a: &Axis| {
        let s = 2f64.sqrt() * sigma;
        0.5 * (erf(a.max / s) - erf(a.min / s))
    };
    let tail = 1.0 - inside(&grid.x) * inside(&grid.u);
    if tail > 1e-8 {
        return Err(WignerError::GridTooSmall { tail });
    }
    let xs = grid.x.values();
    let us = grid.u.values();
    let mut values = Vec::with_capacity(grid.len());
    for &x in &xs {
        for &u in &us {
            values.push((-(x * x + u * u) / (2.0 * sigma_sq)).exp());
        }
    }
    let norm: f64 = values.iter().sum::<f64>() * grid.cell_area();
    for v in &mut values {
        *v /= norm;
    }
    Ok(PhaseSpaceField { frame, grid: *grid, time, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_field_is_normalized_with_matching_moments() {
        let grid = PhaseSpaceGrid::square(8.0, 128);
        let f = initial_thermal(Frame::Fixed, &grid, 1.0, 0.0).unwrap();
        assert_relative_eq!(f.integral(), 1.0, epsilon = 1e-12);
        let (mx, mu) = f.second_moments();
        assert_relative_eq!(mx, 1.0, epsilon = 1e-6);
        assert_relative_eq!(mu, 1.0, epsilon = 1e-6);
        assert_eq!(f.negativity(), 0.0);
    }

    #[test]
    fn rotating_ground_state_variance_is_half_lambda() {
        let lambda = 0.1;
        let grid = PhaseSpaceGrid::square(2.0, 128);
        let f = initial_thermal(Frame::Rotating, &grid, lambda / 2.0, -8.0).unwrap();
        let (mx, _) = f.second_moments();
        assert_relative_eq!(mx, lambda / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn undersized_grid_rejected() {
        let grid = PhaseSpaceGrid::square(2.0, 32);
        assert!(matches!(
            initial_thermal(Frame::Fixed, &grid, 1.0, 0.0),
            Err(WignerError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn coarse_grain_identity_and_mass_conservation() {
        let grid = PhaseSpaceGrid::square(6.0, 64);
        let f = initial_thermal(Frame::Fixed, &grid, 1.0, 0.0).unwrap();
        let same = f.coarse_grain(grid.x.step());
        assert_eq!(same.values, f.values);
        let coarse = f.coarse_grain(4.0 * grid.x.step());
        assert_relative_eq!(coarse.integral(), f.integral(), epsilon = 1e-12);
        assert_eq!(coarse.negativity(), 0.0);
    }

    #[test]
    fn fft_frequencies_match_fftfreq_convention() {
        let a = Axis::symmetric(1.0, 8);
        let k = a.frequencies();
        // spacing 2π/(n·Δ) = π for Δ = 1/4, n = 8
        let d = std::f64::consts::PI;
        assert_relative_eq!(k[0], 0.0);
        assert_relative_eq!(k[1], d);
        assert_relative_eq!(k[3], 3.0 * d);
        assert_relative_eq!(k[4], -4.0 * d);
        assert_relative_eq!(k[7], -d);
    }
}
