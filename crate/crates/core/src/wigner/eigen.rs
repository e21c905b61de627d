//! Bound states of the scaled anharmonic well
//! `H = −(γ²/2) d²/dx² + ½x² − ¼β̄x⁴` (effective Planck constant γ)
//! and their Wigner transforms, used to read energy-level populations off
//! a fixed-frame phase-space field.

use super::field::{Axis, Frame, PhaseSpaceField, PhaseSpaceGrid};
use nalgebra::DMatrix;

/// The lowest eigenstates of the well, discretized on one grid axis with
/// a second-order finite-difference Hamiltonian and hard walls at the
/// axis ends.
pub struct WellBasis {
    pub gamma: f64,
    pub beta_bar: f64,
    pub axis: Axis,
    /// Eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors, normalized so Σψ²·Δx = 1.
    states: Vec<Vec<f64>>,
}

impl WellBasis {
    pub fn new(axis: Axis, gamma: f64, beta_bar: f64, n_states: usize) -> Self {
        let n = axis.points;
        assert!(n_states <= n);
        let dx = axis.step();
        let xs = axis.values();
        let kin = gamma * gamma / (2.0 * dx * dx);
        let h = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let x = xs[i];
                2.0 * kin + 0.5 * x * x - 0.25 * beta_bar * x.powi(4)
            } else if i.abs_diff(j) == 1 {
                -kin
            } else {
                0.0
            }
        });
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut energies = Vec::with_capacity(n_states);
        let mut states = Vec::with_capacity(n_states);
        for &k in order.iter().take(n_states) {
            energies.push(eig.eigenvalues[k]);
            let col = eig.eigenvectors.column(k);
            let norm: f64 = col.iter().map(|v| v * v).sum::<f64>() * dx;
            states.push(col.iter().map(|v| v / norm.sqrt()).collect());
        }
        Self { gamma, beta_bar, axis, energies, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, n: usize) -> &[f64] {
        &self.states[n]
    }

    /// Wigner transform of eigenstate `n` on a grid whose x axis must be
    /// the basis axis:
    /// `W_n(x_i, u) = (Δx/πγ) Σ_m ψ[i+m] ψ[i−m] e^{−2ium·Δx/γ}`.
    pub fn wigner_state(&self, n: usize, grid: &PhaseSpaceGrid) -> PhaseSpaceField {
        assert_eq!(grid.x, self.axis, "grid x axis must match the basis axis");
        let psi = &self.states[n];
        let npts = self.axis.points;
        let dx = self.axis.step();
        let us = grid.u.values();
        let nu = grid.u.points;
        let pref = dx / (std::f64::consts::PI * self.gamma);
        let mut values = vec![0.0; grid.len()];
        for i in 0..npts {
            let mmax = i.min(npts - 1 - i);
            for (j, &u) in us.iter().enumerate() {
                // m and −m pair up into a cosine
                let mut s = psi[i] * psi[i];
                let w = 2.0 * u * dx / self.gamma;
                for m in 1..=mmax {
                    s += 2.0 * psi[i + m] * psi[i - m] * (w * m as f64).cos();
                }
                values[i * nu + j] = pref * s;
            }
        }
        PhaseSpaceField { frame: Frame::Fixed, grid: *grid, time: 0.0, values }
    }

    /// Populations `P_n = 2πγ ∬ f·W_n dx du` of the first `len()` levels.
    pub fn project(&self, f: &PhaseSpaceField) -> Vec<f64> {
        let area = f.grid.cell_area();
        let pref = 2.0 * std::f64::consts::PI * self.gamma * area;
        (0..self.len())
            .map(|n| {
                let w = self.wigner_state(n, &f.grid);
                pref * f.values.iter().zip(&w.values).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wigner::field::initial_thermal;
    use approx::assert_relative_eq;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::square(12.0, 128)
    }

    #[test]
    fn harmonic_limit_energies_are_equally_spaced() {
        let basis = WellBasis::new(grid().x, 2.0, 0.0, 6);
        for (n, e) in basis.energies.iter().enumerate() {
            // E_n = γ(n + ½); the O(Δx²) finite-difference bias grows
            // roughly linearly with n (≈ 0.11% per level on this grid)
            let exact = 2.0 * (n as f64 + 0.5);
            let tol = 2e-3 * (n as f64 + 1.0);
            assert!(
                ((e - exact) / exact).abs() < tol,
                "E_{n} = {e}, expected {exact} within {tol:.1e}"
            );
        }
    }

    #[test]
    fn anharmonic_levels_are_red_shifted_and_compressed() {
        let g = grid();
        let harm = WellBasis::new(g.x, 2.0, 0.0, 8);
        let anh = WellBasis::new(g.x, 2.0, 0.0042, 8);
        for n in 0..8 {
            assert!(anh.energies[n] < harm.energies[n]);
        }
        // level spacing shrinks with n (the ladder anharmonicity)
        let gap = |b: &WellBasis, n: usize| b.energies[n + 1] - b.energies[n];
        assert!(gap(&anh, 6) < gap(&anh, 0));
        // harmonic gaps shrink only through the FD bias (≈ 1.3% by n=6);
        // the anharmonic compression must be clearly larger than that
        assert_relative_eq!(gap(&harm, 6), gap(&harm, 0), max_relative = 2e-2);
        assert!(gap(&anh, 6) / gap(&anh, 0) < gap(&harm, 6) / gap(&harm, 0) - 0.01);
    }

    #[test]
    fn wigner_states_are_normalized_and_orthogonal() {
        let g = grid();
        let basis = WellBasis::new(g.x, 2.0, 0.0042, 4);
        let pref = 2.0 * std::f64::consts::PI * basis.gamma * g.cell_area();
        for n in 0..4 {
            let wn = basis.wigner_state(n, &g);
            assert_relative_eq!(wn.integral(), 1.0, epsilon = 1e-6);
            for m in 0..=n {
                let wm = basis.wigner_state(m, &g);
                let ovl: f64 =
                    pref * wn.values.iter().zip(&wm.values).map(|(a, b)| a * b).sum::<f64>();
                let expect = if n == m { 1.0 } else { 0.0 };
                assert!(
                    (ovl - expect).abs() < 1e-6,
                    "⟨W{n}|W{m}⟩ = {ovl:.2e}"
                );
            }
        }
    }

    #[test]
    fn unit_thermal_gaussian_is_the_harmonic_ground_state() {
        let g = grid();
        let f = initial_thermal(Frame::Fixed, &g, 1.0, 0.0).unwrap();
        let basis = WellBasis::new(g.x, 2.0, 0.0, 4);
        let pops = basis.project(&f);
        assert_relative_eq!(pops[0], 1.0, epsilon = 1e-4);
        for p in &pops[1..] {
            assert!(p.abs() < 1e-4);
        }
    }
}
