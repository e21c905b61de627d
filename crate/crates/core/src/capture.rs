//! Resonant-capture observables extracted from ladder runs: the capture
//! probability `P = Σ_{n≥n_c} |B_n|²`, S-curves `P(P1)` at fixed `P2`,
//! and the ½-probability threshold with its transition width (the inverse
//! slope of the S-curve at `P = 1/2`).

use crate::ladder::{self, LadderError, LadderRun, LadderSettings};
use crate::params::DimensionlessParams;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("no snapshot at τ = {0}")]
    MissingSnapshot(f64),
    #[error(
        "S-curve does not bracket P = 1/2 (P ranges {min:.3}..{max:.3} over the grid)"
    )]
    BracketMiss { min: f64, max: f64 },
    #[error("P1 grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error(transparent)]
    Ladder(#[from] LadderError),
}

/// One capture measurement.
#[derive(Debug, Clone, Serialize)]
pub struct CaptureResult {
    pub p2: f64,
    pub p1: f64,
    /// Separator level between the nonresonant and resonant groups.
    pub n_c: usize,
    /// Capture probability `Σ_{n≥n_c} |B_n|²`.
    pub probability: f64,
    pub tau_measure: f64,
    /// Population at the valley level, as a separation diagnostic.
    pub valley_depth: f64,
    /// Set when the two-group structure was not resolvable and the
    /// separator came from the fallback rule.
    pub fallback: bool,
    pub norm_drift: f64,
}

/// Separator-level decision for a measured run.
///
/// The nonresonant group sits at the bottom of the ladder and the
/// phase-locked group rides the resonant level `n ≈ τ/P2`, so the
/// histogram is split at the midpoint `round(τ/2P2)`, each side's peak is
/// located on the 3-point-smoothed populations, and the separator is the
/// valley between the two peaks. Falls back to the midpoint itself
/// (capped at 5 in the deep LC regime) when the two groups are not
/// resolvable.
pub fn separator_level(run: &LadderRun, tau_measure: f64) -> Result<(usize, f64, bool), CaptureError> {
    let snap = run
        .snapshot_at(tau_measure)
        .ok_or(CaptureError::MissingSnapshot(tau_measure))?;
    let pops = snap.populations();
    let n = pops.len();
    let fallback_nc = || -> usize {
        let nc = (0.5 * tau_measure / run.params.p2).round() as isize;
        nc.clamp(1, n as isize - 1) as usize
    };

    let excited: f64 = pops.iter().skip(2).sum();
    if excited < 1e-3 {
        // drive too weak to form groups
        let nc = fallback_nc().min(5);
        return Ok((nc, 0.0, true));
    }

    // 3-point moving average irons out the Landau-Zener wiggles inside
    // each group (the groups themselves are tens of levels apart)
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            pops[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();

    let argmax = |range: std::ops::Range<usize>| -> usize {
        range.min_by(|a, b| smooth[*a].total_cmp(&smooth[*b]).reverse()).unwrap()
    };
    let mid = fallback_nc().min(n - 1).max(1);
    let lo_peak = argmax(0..mid);
    let hi_peak = argmax(mid..n);
    if hi_peak - lo_peak < 2 {
        return Ok((fallback_nc(), 0.0, true));
    }
    let valley = (lo_peak + 1..hi_peak)
        .min_by(|i, j| smooth[*i].total_cmp(&smooth[*j]))
        .unwrap();
    // a genuine valley lies strictly below both peaks
    if smooth[valley] >= smooth[lo_peak] || smooth[valley] >= smooth[hi_peak] {
        return Ok((fallback_nc(), 0.0, true));
    }
    Ok((valley, pops[valley], false))
}

/// Capture probability of a run with an explicit separator level.
pub fn capture_probability(
    run: &LadderRun,
    n_c: usize,
    tau_measure: f64,
) -> Result<CaptureResult, CaptureError> {
    let snap = run
        .snapshot_at(tau_measure)
        .ok_or(CaptureError::MissingSnapshot(tau_measure))?;
    let pops = snap.populations();
    let probability = pops[n_c.min(pops.len())..].iter().sum();
    Ok(CaptureResult {
        p2: run.params.p2,
        p1: run.params.p1,
        n_c,
        probability,
        tau_measure,
        valley_depth: pops.get(n_c).copied().unwrap_or(0.0),
        fallback: false,
        norm_drift: run.max_norm_drift,
    })
}

/// Simulation policy for S-curve scans.
#[derive(Debug, Clone, Serialize)]
pub struct ScanSettings {
    pub tau0: f64,
    /// Measurement time; `None` selects `max(12, 10·P2)` past linear
    /// resonance so the two groups are separated.
    pub tau_measure: Option<f64>,
    /// Separator override; `None` uses valley detection per run.
    pub n_c: Option<usize>,
    pub ladder: LadderSettings,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { tau0: -10.0, tau_measure: None, n_c: None, ladder: LadderSettings::default() }
    }
}

pub fn default_tau_measure(p2: f64) -> f64 {
    (10.0 * p2).max(12.0)
}

/// Sampled capture probability versus `P1` at fixed `P2`, with the
/// threshold and width extracted from a shape-preserving monotone
/// interpolant.
#[derive(Debug, Clone, Serialize)]
pub struct SCurve {
    pub p2: f64,
    pub samples: Vec<CaptureResult>,
    pub threshold: f64,
    pub threshold_err: f64,
    pub width: f64,
    pub width_err: f64,
}

/// Run one ladder integration and measure its capture probability.
pub fn measure_capture(
    p1: f64,
    p2: f64,
    settings: &ScanSettings,
) -> Result<CaptureResult, CaptureError> {
    let tau_measure = settings.tau_measure.unwrap_or_else(|| default_tau_measure(p2));
    let params = DimensionlessParams::new(p1, p2).expect("valid scan parameters");
    let n = ladder::default_basis_size(p1, p2, tau_measure);
    let run = ladder::integrate(
        &params,
        settings.tau0,
        tau_measure,
        n,
        None,
        &[tau_measure],
        &settings.ladder,
    )?;
    let (n_c, valley_depth, fallback) = match settings.n_c {
        Some(nc) => (nc, 0.0, false),
        None => separator_level(&run, tau_measure)?,
    };
    let mut result = capture_probability(&run, n_c, tau_measure)?;
    result.valley_depth = valley_depth;
    result.fallback = fallback;
    Ok(result)
}

/// Scan `P(P1)` over a grid (one independent ladder run per point,
/// executed in parallel) and fit threshold and width.
pub fn scan_s_curve(
    p2: f64,
    p1_grid: &[f64],
    settings: &ScanSettings,
) -> Result<SCurve, CaptureError> {
    if p1_grid.len() < 2 {
        return Err(CaptureError::GridTooSmall(p1_grid.len()));
    }
    let mut grid = p1_grid.to_vec();
    grid.sort_by(f64::total_cmp);

    let mut samples: Vec<CaptureResult> = grid
        .par_iter()
        .map(|&p1| measure_capture(p1, p2, settings))
        .collect::<Result<_, _>>()?;
    // deterministic reduction regardless of worker count
    samples.sort_by(|a, b| a.p1.total_cmp(&b.p1));

    let (threshold, threshold_err, width, width_err) = threshold_and_width(&samples)?;
    Ok(SCurve { p2, samples, threshold, threshold_err, width, width_err })
}

/// Threshold (`P(P1cr) = 1/2`) and width (inverse interpolant slope at
/// the threshold) from sampled points. Error bars: half the local grid
/// spacing for the threshold; jackknife over interior knots for the
/// width.
pub fn threshold_and_width(
    samples: &[CaptureResult],
) -> Result<(f64, f64, f64, f64), CaptureError> {
    let xs: Vec<f64> = samples.iter().map(|s| s.p1).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.probability).collect();
    let (threshold, width) = fit_threshold_width(&xs, &ys)?;

    let i = xs.partition_point(|&x| x < threshold).clamp(1, xs.len() - 1);
    let threshold_err = 0.5 * (xs[i] - xs[i - 1]);

    // jackknife: drop one interior knot at a time
    let mut widths = Vec::new();
    if xs.len() > 3 {
        for drop in 1..xs.len() - 1 {
            let xj: Vec<f64> =
                xs.iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, v)| *v).collect();
            let yj: Vec<f64> =
                ys.iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, v)| *v).collect();
            if let Ok((_, w)) = fit_threshold_width(&xj, &yj) {
                widths.push(w);
            }
        }
    }
    let width_err = if widths.is_empty() {
        f64::NAN
    } else {
        let mean = widths.iter().sum::<f64>() / widths.len() as f64;
        let var =
            widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / widths.len() as f64;
        var.sqrt().max((width - mean).abs())
    };
    Ok((threshold, threshold_err, width, width_err))
}

fn fit_threshold_width(xs: &[f64], ys: &[f64]) -> Result<(f64, f64), CaptureError> {
    let y_iso = isotonic(ys);
    let interp = Pchip::fit(xs, &y_iso);
    let (min, max) = (y_iso[0], y_iso[y_iso.len() - 1]);
    if min > 0.5 || max < 0.5 {
        return Err(CaptureError::BracketMiss { min, max });
    }
    let threshold = interp.solve(0.5);
    let slope = interp.derivative(threshold);
    Ok((threshold, 1.0 / slope))
}

/// Pool-adjacent-violators: least-squares monotone (non-decreasing)
/// projection of the samples. Removes small Landau-Zener wiggles so the
/// shape-preserving interpolant stays monotone.
pub fn isotonic(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (v2, n2) = blocks[blocks.len() - 1];
            let (v1, n1) = blocks[blocks.len() - 2];
            if v1 <= v2 {
                break;
            }
            blocks.pop();
            blocks.pop();
            let n = n1 + n2;
            blocks.push(((v1 * n1 as f64 + v2 * n2 as f64) / n as f64, n));
        }
    }
    let mut out = Vec::with_capacity(ys.len());
    for (v, n) in blocks {
        out.extend(std::iter::repeat(v).take(n));
    }
    out
}

/// Shape-preserving monotone cubic interpolant (Fritsch-Carlson).
#[derive(Debug, Clone)]
pub struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// knot derivatives
    ds: Vec<f64>,
}

impl Pchip {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Self {
        assert!(xs.len() == ys.len() && xs.len() >= 2);
        let n = xs.len();
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                ds[i] = 0.0;
            } else {
                // weighted harmonic mean keeps the interpolant monotone
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        ds[0] = edge_derivative(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        ds[n - 1] = edge_derivative(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        Self { xs: xs.to_vec(), ys: ys.to_vec(), ds }
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        self.xs.partition_point(|&xk| xk <= x).clamp(1, n - 1) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + h * d1 * (t3 - t2)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let t2 = t * t;
        (y0 * (6.0 * t2 - 6.0 * t) / h)
            + d0 * (3.0 * t2 - 4.0 * t + 1.0)
            + (y1 * (6.0 * t - 6.0 * t2) / h)
            + d1 * (3.0 * t2 - 2.0 * t)
    }

    /// x with eval(x) = target, assuming the data is monotone increasing
    /// and the target is bracketed.
    pub fn solve(&self, target: f64) -> f64 {
        let (mut lo, mut hi) = (self.xs[0], self.xs[self.xs.len() - 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

fn edge_derivative(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // one-sided three-point estimate, clipped for shape preservation
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
