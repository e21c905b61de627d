//! Rotating-frame quantum Liouville evolution,
//!
//! `∂f/∂τ + G_P ∂f/∂Q − G_Q ∂f/∂P = (λ²/4) D̂f`,
//! `G = (τ/2)(Q²+P²) − ¼(Q²+P²)² + μQ`,
//! `D̂ = (Q ∂/∂P − P ∂/∂Q)(∂²/∂Q² + ∂²/∂P²)`,
//!
//! by an explicit RK4 method of lines with spectral derivatives on the
//! periodic grid. The step size obeys a CFL-style bound assembled from
//! the maximum phase-space velocity and the dispersive `λ²k³` scale; the
//! bound is recomputed per output segment (the velocity grows with |τ|).
//!
//! The Hamiltonian velocity field is tapered to zero across the sponge
//! ring so the corner speeds of the square grid do not throttle the step;
//! dynamics there is sacrificial by construction since the sponge absorbs
//! anything that reaches it.

use super::field::{Frame, PhaseSpaceField, PhaseSpaceGrid, WignerError};
use super::spectral::{transpose, Spectral};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RotatingFrameConfig {
    /// Classical AR drive parameter μ = ½P1√P2.
    pub mu: f64,
    /// Dimensionless Planck constant λ = ½P2.
    pub lambda: f64,
    pub tau0: f64,
    pub snapshot_taus: Vec<f64>,
    /// Forced step; `None` derives the admissible step from the CFL
    /// bound. A forced step above the bound is rejected.
    pub dt: Option<f64>,
    pub grid: PhaseSpaceGrid,
    pub sponge_frac: f64,
    /// CFL safety factor applied to the derived step.
    pub safety: f64,
}

impl RotatingFrameConfig {
    pub fn new(mu: f64, lambda: f64, grid: PhaseSpaceGrid) -> Self {
        Self {
            mu,
            lambda,
            tau0: -8.0,
            snapshot_taus: vec![0.0],
            dt: None,
            grid,
            sponge_frac: 0.05,
            safety: 0.7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RotatingFrameReport {
    pub fields: Vec<PhaseSpaceField>,
    pub absorbed_mass: f64,
    pub norm_drift: f64,
    pub steps: usize,
    /// Smallest admissible step encountered (diagnostic).
    pub min_step: f64,
}

/// Spectral first derivative of a real field along one axis.
fn derivative(spec: &Spectral, grid: &PhaseSpaceGrid, f: &[f64], along_x: bool) -> Vec<f64> {
    let (nx, nu) = (grid.x.points, grid.u.points);
    let mut c: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if along_x {
        let mut t = vec![Complex64::ZERO; nx * nu];
        transpose(&c, &mut t, nx, nu);
        spec.fft_x(&mut t);
        let ks = grid.x.frequencies();
        for row in t.chunks_mut(nx) {
            for (v, &k) in row.iter_mut().zip(&ks) {
                *v *= Complex64::new(0.0, k / nx as f64);
            }
        }
        spec.ifft_x(&mut t);
        transpose(&t, &mut c, nu, nx);
    } else {
        spec.fft_u(&mut c);
        let ks = grid.u.frequencies();
        for row in c.chunks_mut(nu) {
            for (v, &k) in row.iter_mut().zip(&ks) {
                *v *= Complex64::new(0.0, k / nu as f64);
            }
        }
        spec.ifft_u(&mut c);
    }
    c.iter().map(|v| v.re).collect()
}

/// Spectral Laplacian of a real field.
fn laplacian(spec: &Spectral, grid: &PhaseSpaceGrid, f: &[f64]) -> Vec<f64> {
    let (nx, nu) = (grid.x.points, grid.u.points);
    let mut c: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spec.fft_u(&mut c);
    let ku = grid.u.frequencies();
    for row in c.chunks_mut(nu) {
        for (v, &k) in row.iter_mut().zip(&ku) {
            *v *= -k * k / nu as f64;
        }
    }
    spec.ifft_u(&mut c);
    let mut t = vec![Complex64::ZERO; nx * nu];
    transpose(&c, &mut t, nx, nu);
    // add ∂²/∂x² in the transposed layout
    let mut cx: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut tx = vec![Complex64::ZERO; nx * nu];
    transpose(&cx, &mut tx, nx, nu);
    spec.fft_x(&mut tx);
    let kx = grid.x.frequencies();
    for row in tx.chunks_mut(nx) {
        for (v, &k) in row.iter_mut().zip(&kx) {
            *v *= -k * k / nx as f64;
        }
    }
    spec.ifft_x(&mut tx);
    for (a, b) in t.iter_mut().zip(&tx) {
        *a += b;
    }
    transpose(&t, &mut cx, nu, nx);
    cx.iter().map(|v| v.re).collect()
}

/// Discrete `D̂f = (Q ∂_P − P ∂_Q)(∇²f)`; exposed for operator tests.
pub fn quantum_term(grid: &PhaseSpaceGrid, f: &[f64]) -> Vec<f64> {
    let spec = Spectral::new(grid.x.points, grid.u.points);
    quantum_term_with(&spec, grid, f)
}

fn quantum_term_with(spec: &Spectral, grid: &PhaseSpaceGrid, f: &[f64]) -> Vec<f64> {
    let lap = laplacian(spec, grid, f);
    let lap_q = derivative(spec, grid, &lap, true);
    let lap_p = derivative(spec, grid, &lap, false);
    let qs = grid.x.values();
    let ps = grid.u.values();
    let nu = grid.u.points;
    let mut out = vec![0.0; f.len()];
    for (iq, &q) in qs.iter().enumerate() {
        for (ip, &p) in ps.iter().enumerate() {
            out[iq * nu + ip] = q * lap_p[iq * nu + ip] - p * lap_q[iq * nu + ip];
        }
    }
    out
}

struct RhsContext {
    spec: Spectral,
    grid: PhaseSpaceGrid,
    mu: f64,
    lambda: f64,
    /// Velocity taper, 1 in the interior, 0 across the sponge ring.
    taper: Vec<f64>,
}

impl RhsContext {
    fn rhs(&self, tau: f64, f: &[f64]) -> Vec<f64> {
        let f_q = derivative(&self.spec, &self.grid, f, true);
        let f_p = derivative(&self.spec, &self.grid, f, false);
        let dmat = quantum_term_with(&self.spec, &self.grid, f);
        let qs = self.grid.x.values();
        let ps = self.grid.u.values();
        let nu = self.grid.u.points;
        let quart = self.lambda * self.lambda / 4.0;
        let mut out = vec![0.0; f.len()];
        for (iq, &q) in qs.iter().enumerate() {
            for (ip, &p) in ps.iter().enumerate() {
                let i = iq * nu + ip;
                let r2 = q * q + p * p;
                let g_p = (tau - r2) * p;
                let g_q = (tau - r2) * q + self.mu;
                let m = self.taper[i];
                out[i] = m * (-g_p * f_q[i] + g_q * f_p[i]) + quart * dmat[i];
            }
        }
        out
    }
}

fn max_velocity(cfg: &RotatingFrameConfig, tau_abs: f64, taper: &[f64]) -> f64 {
    let qs = cfg.grid.x.values();
    let ps = cfg.grid.u.values();
    let nu = cfg.grid.u.points;
    let mut v: f64 = 0.0;
    for (iq, &q) in qs.iter().enumerate() {
        for (ip, &p) in ps.iter().enumerate() {
            let r2 = q * q + p * p;
            let speed = (tau_abs + r2) * r2.sqrt() + cfg.mu;
            v = v.max(speed * taper[iq * nu + ip]);
        }
    }
    v
}

/// Admissible RK4 step for the advective + dispersive spectral operator.
fn admissible_step(cfg: &RotatingFrameConfig, tau_abs: f64, taper: &[f64]) -> f64 {
    let kx = std::f64::consts::PI / cfg.grid.x.step();
    let ku = std::f64::consts::PI / cfg.grid.u.step();
    let v = max_velocity(cfg, tau_abs, taper);
    let adv = v * (kx + ku);
    let rmax = cfg.grid.x.max.hypot(cfg.grid.u.max);
    let disp = cfg.lambda * cfg.lambda / 4.0 * rmax * (kx.max(ku)).powi(3);
    // 2.8 ≈ RK4 imaginary-axis stability limit
    cfg.safety * 2.8 / (adv + disp).max(1e-12)
}

pub fn evolve_rotating(
    cfg: &RotatingFrameConfig,
    f0: &PhaseSpaceField,
) -> Result<RotatingFrameReport, WignerError> {
    assert_eq!(f0.grid, cfg.grid);
    let grid = cfg.grid;
    let (nx, nu) = (grid.x.points, grid.u.points);
    let cell = grid.cell_area();

    // taper and sponge profiles share the edge ring
    let edge = |ax: &super::field::Axis, v: f64, w: f64| -> f64 {
        let d = (v - ax.min).min(ax.max - ax.step() - v).max(0.0);
        if d >= w || w <= 0.0 {
            1.0
        } else {
            (0.5 * std::f64::consts::PI * d / w).sin().powi(2)
        }
    };
    let wx = cfg.sponge_frac * (grid.x.max - grid.x.min);
    let wu = cfg.sponge_frac * (grid.u.max - grid.u.min);
    let qs = grid.x.values();
    let ps = grid.u.values();
    let mut sponge = Vec::with_capacity(nx * nu);
    let mut taper = Vec::with_capacity(nx * nu);
    for &q in &qs {
        for &p in &ps {
            let ex = edge(&grid.x, q, wx) * edge(&grid.u, p, wu);
            sponge.push(ex);
            // taper turns off velocities over a ring twice as wide
            taper.push(edge(&grid.x, q, 2.0 * wx) * edge(&grid.u, p, 2.0 * wu));
        }
    }

    let ctx = RhsContext { spec: Spectral::new(nx, nu), grid, mu: cfg.mu, lambda: cfg.lambda, taper };

    let mut f = f0.values.clone();
    let mut tau = cfg.tau0;
    let mut absorbed = 0.0;
    let mut drift: f64 = 0.0;
    let mut steps = 0;
    let mut min_step = f64::INFINITY;
    let mut fields = Vec::new();

    for &tau_target in &cfg.snapshot_taus {
        if tau_target > tau {
            let tau_abs = tau.abs().max(tau_target.abs());
            let h_adm = admissible_step(cfg, tau_abs, &ctx.taper);
            min_step = min_step.min(h_adm);
            let h_req = match cfg.dt {
                Some(dt) => {
                    if dt > h_adm {
                        return Err(WignerError::CflViolation { dt, admissible: h_adm });
                    }
                    dt
                }
                None => h_adm,
            };
            let n = ((tau_target - tau) / h_req).ceil().max(1.0) as usize;
            let h = (tau_target - tau) / n as f64;
            for i in 0..n {
                let t0 = tau + i as f64 * h;
                let k1 = ctx.rhs(t0, &f);
                let f2: Vec<f64> =
                    f.iter().zip(&k1).map(|(y, k)| y + 0.5 * h * k).collect();
                let k2 = ctx.rhs(t0 + 0.5 * h, &f2);
                let f3: Vec<f64> =
                    f.iter().zip(&k2).map(|(y, k)| y + 0.5 * h * k).collect();
                let k3 = ctx.rhs(t0 + 0.5 * h, &f3);
                let f4: Vec<f64> = f.iter().zip(&k3).map(|(y, k)| y + h * k).collect();
                let k4 = ctx.rhs(t0 + h, &f4);
                for j in 0..f.len() {
                    f[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
                // sponge
                for (v, m) in f.iter_mut().zip(&sponge) {
                    if *m < 1.0 {
                        absorbed += *v * (1.0 - m) * cell;
                        *v *= m;
                    }
                }
            }
            steps += n;
            tau = tau_target;
        }
        let field = PhaseSpaceField {
            frame: Frame::Rotating,
            grid,
            time: tau,
            values: f.clone(),
        };
        drift = drift.max((field.integral() + absorbed - 1.0).abs());
        fields.push(field);
    }

    Ok(RotatingFrameReport {
        fields,
        absorbed_mass: absorbed,
        norm_drift: drift,
        steps,
        min_step,
    })
}

/// Classical (λ = 0) reference: solve the characteristics of `G`
/// backwards from each grid node with RK4 and sample the analytic
/// initial Gaussian of variance σ². Used as the λ→0 oracle.
pub fn classical_reference(
    cfg: &RotatingFrameConfig,
    sigma_sq: f64,
    tau_end: f64,
    ode_steps: usize,
) -> PhaseSpaceField {
    let grid = cfg.grid;
    let qs = grid.x.values();
    let ps = grid.u.values();
    let h = (cfg.tau0 - tau_end) / ode_steps as f64; // negative: backwards
    let deriv = |tau: f64, q: f64, p: f64| -> (f64, f64) {
        let r2 = q * q + p * p;
        ((tau - r2) * p, -((tau - r2) * q + cfg.mu))
    };
    let mut values = Vec::with_capacity(grid.len());
    for &q0 in &qs {
        for &p0 in &ps {
            let (mut q, mut p) = (q0, p0);
            let mut tau = tau_end;
            for _ in 0..ode_steps {
                let (k1q, k1p) = deriv(tau, q, p);
                let (k2q, k2p) = deriv(tau + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p);
                let (k3q, k3p) = deriv(tau + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p);
                let (k4q, k4p) = deriv(tau + h, q + h * k3q, p + h * k3p);
                q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
                p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                tau += h;
            }
            values.push(
                (-(q * q + p * p) / (2.0 * sigma_sq)).exp()
                    / (2.0 * std::f64::consts::PI * sigma_sq),
            );
        }
    }
    PhaseSpaceField { frame: Frame::Rotating, grid, time: tau_end, values }
}
