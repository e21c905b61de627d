//! FFT plumbing shared by the phase-space solvers: batched row
//! transforms, transposes, and spectral derivatives on the periodic grid.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct Spectral {
    pub nx: usize,
    pub nu: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_u: Arc<dyn Fft<f64>>,
    inv_u: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(nx: usize, nu: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            nu,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_u: planner.plan_fft_forward(nu),
            inv_u: planner.plan_fft_inverse(nu),
        }
    }

    fn run_rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], row_len: usize) {
        data.par_chunks_mut(row_len).for_each_init(
            || vec![Complex64::ZERO; fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    }

    /// Forward FFT of every u-row (data row-major, u contiguous).
    pub fn fft_u(&self, data: &mut [Complex64]) {
        Self::run_rows(&self.fwd_u, data, self.nu);
    }

    /// Unnormalized inverse FFT of every u-row; callers fold the 1/n into
    /// their phase tables.
    pub fn ifft_u(&self, data: &mut [Complex64]) {
        Self::run_rows(&self.inv_u, data, self.nu);
    }

    /// Forward FFT of every x-row of a transposed (u-major) buffer.
    pub fn fft_x(&self, data: &mut [Complex64]) {
        Self::run_rows(&self.fwd_x, data, self.nx);
    }

    pub fn ifft_x(&self, data: &mut [Complex64]) {
        Self::run_rows(&self.inv_x, data, self.nx);
    }
}

/// Out-of-place transpose of an `nx × nu` row-major matrix.
pub fn transpose(src: &[Complex64], dst: &mut [Complex64], nx: usize, nu: usize) {
    debug_assert_eq!(src.len(), nx * nu);
    for ix in 0..nx {
        for iu in 0..nu {
            dst[iu * nx + ix] = src[ix * nu + iu];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fft_round_trip() {
        let spec = Spectral::new(8, 8);
        let mut data: Vec<Complex64> =
            (0..64).map(|i| Complex64::new((i as f64 * 0.37).sin(), 0.0)).collect();
        let orig = data.clone();
        spec.fft_u(&mut data);
        spec.ifft_u(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert_relative_eq!(a.re / 8.0, b.re, epsilon = 1e-12);
        }
    }

    #[test]
    fn transpose_round_trip() {
        let src: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let mut t = vec![Complex64::ZERO; 12];
        let mut back = vec![Complex64::ZERO; 12];
        transpose(&src, &mut t, 3, 4);
        transpose(&t, &mut back, 4, 3);
        assert_eq!(src, back);
        assert_eq!(t[0 * 3 + 2], src[2 * 4 + 0]);
    }
}
