//! Adaptive Dormand-Prince 5(4) integrator for complex state vectors,
//! with PI step-size control and 4th-order dense output.
//!
//! Coefficients are the standard DOPRI5 tableau together with the dense
//! output weights of Hairer, Nørsett & Wanner (Solving ODEs I, II.5).

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("exceeded {0} steps")]
    TooManySteps(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-4, max_steps: 50_000_000 }
    }
}

// Butcher tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// b − b̂ (error weights)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense output weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step, exposing the dense interpolant over `[t, t + h]`.
pub struct DenseStep<'a> {
    pub t: f64,
    pub h: f64,
    rcont: &'a [Vec<Complex64>; 5],
}

impl DenseStep<'_> {
    /// Interpolated state at `t + theta·h`, `theta ∈ [0, 1]`.
    pub fn eval(&self, theta: f64, out: &mut [Complex64]) {
        let th1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.rcont;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end` (either direction),
/// invoking `on_step` after every accepted step. The observer can inspect
/// the current state and interpolate inside the step for snapshot output.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    t_end: f64,
    y0: &[Complex64],
    opts: &Dopri5Options,
    mut on_step: O,
) -> Result<(Vec<Complex64>, StepStats), OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    O: FnMut(&DenseStep, &[Complex64]),
{
    let n = y0.len();
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![Complex64::ZERO; n]);
    let mut ytmp = vec![Complex64::ZERO; n];
    let mut ynew = vec![Complex64::ZERO; n];
    let mut rcont: [Vec<Complex64>; 5] = std::array::from_fn(|_| vec![Complex64::ZERO; n]);

    f(t, &y, &mut k[0]);
    let mut h = opts.h_init.abs().min((t_end - t0).abs()) * dir;
    let mut err_prev: f64 = 1.0;
    let mut stats = StepStats::default();

    while (t_end - t) * dir > 0.0 {
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h });
        }
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(OdeError::TooManySteps(opts.max_steps));
        }

        // stages 2..7 (k7 = FSAL evaluation at t + h)
        for s in 1..7 {
            for i in 0..n {
                let mut acc = Complex64::ZERO;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s - 1][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + h * acc;
            }
            if s == 6 {
                ynew.copy_from_slice(&ytmp);
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            f(t + C[s] * h, &ytmp, &mut tail[0]);
        }

        // error norm
        let mut err_sq = 0.0;
        for i in 0..n {
            let mut e = Complex64::ZERO;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * kj[i];
                }
            }
            let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            let r = (h * e).norm() / sc;
            err_sq += r * r;
        }
        let err = (err_sq / n as f64).sqrt().max(1e-30);

        if err <= 1.0 {
            // accept: build dense output then advance
            for i in 0..n {
                let dy = ynew[i] - y[i];
                let bspl = h * k[0][i] - dy;
                let mut dsum = Complex64::ZERO;
                for (j, kj) in k.iter().enumerate() {
                    if D[j] != 0.0 {
                        dsum += D[j] * kj[i];
                    }
                }
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = bspl;
                rcont[3][i] = dy - h * k[6][i] - bspl;
                rcont[4][i] = h * dsum;
            }
            let step = DenseStep { t, h, rcont: &rcont };
            t += h;
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6); // FSAL
            stats.accepted += 1;
            on_step(&step, &y);

            // PI controller (beta = 0.04)
            let fac = 0.9 * err.powf(-0.2 + 0.04) * err_prev.powf(0.04);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let y0 = [Complex64::new(1.0, 0.0)];
        let (y, _) = integrate(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            2.0,
            &y0,
            &Dopri5Options::default(),
            |_, _| {},
        )
        .unwrap();
        assert_relative_eq!(y[0].re, (-2.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn oscillator_phase_and_dense_output() {
        // dy/dt = i·y, y(t) = e^{it}
        let y0 = [Complex64::new(1.0, 0.0)];
        let mut samples = Vec::new();
        let targets = [1.0, 5.0, 9.9];
        let mut next = 0;
        let (y, _) = integrate(
            |_, y, dy| dy[0] = Complex64::I * y[0],
            0.0,
            10.0,
            &y0,
            &Dopri5Options::default(),
            |step, _| {
                let mut out = [Complex64::ZERO];
                while next < targets.len() && targets[next] <= step.t + step.h {
                    step.eval((targets[next] - step.t) / step.h, &mut out);
                    samples.push((targets[next], out[0]));
                    next += 1;
                }
            },
        )
        .unwrap();
        assert_relative_eq!(y[0].re, 10.0f64.cos(), epsilon = 1e-8);
        assert_relative_eq!(y[0].im, 10.0f64.sin(), epsilon = 1e-8);
        assert_eq!(samples.len(), 3);
        for (t, v) in samples {
            assert_relative_eq!(v.re, t.cos(), epsilon = 1e-7);
            assert_relative_eq!(v.im, t.sin(), epsilon = 1e-7);
        }
    }

    #[test]
    fn backward_integration() {
        let y0 = [Complex64::new(1.0, 0.0)];
        let (y, _) = integrate(
            |_, y, dy| dy[0] = -y[0],
            2.0,
            0.0,
            &y0,
            &Dopri5Options::default(),
            |_, _| {},
        )
        .unwrap();
        assert_relative_eq!(y[0].re, 2.0f64.exp(), epsilon = 1e-8);
    }
}
