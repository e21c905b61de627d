use crate::config::Resolver;
use crate::output::{fmt, linspace, logspace, RunDir};
use crate::{Cli, CliError, FiguresArgs, LadderArgs, MapArgs, ScanArgs, WignerArgs};
use chirped_duffing::wigner::{
    evolve_fixed, evolve_rotating, initial_thermal, separatrix_polylines, FixedFrameConfig,
    Frame, PhaseSpaceField, PhaseSpaceGrid, RotatingFrameConfig,
};
use chirped_duffing::{analytic, capture, ladder, DimensionlessParams};
use serde_json::json;
use std::path::Path;

fn solver<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Solver(e.to_string())
}

fn ladder_settings(
    r: &mut Resolver,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> Result<ladder::LadderSettings, CliError> {
    let mut s = ladder::LadderSettings::default();
    s.rtol = r.f64("rtol", rtol, s.rtol)?;
    s.atol = r.f64("atol", atol, s.atol)?;
    Ok(s)
}

pub fn ladder(cli: &Cli, args: &LadderArgs, out: &Path, workers: usize) -> Result<(), CliError> {
    let mut r = Resolver::load(cli.config.as_deref())?;
    let p1 = r.f64_req("p1", args.p1)?;
    let p2 = r.f64_req("p2", args.p2)?;
    let tau0 = r.f64("tau0", args.tau0, -10.0)?;
    let tau_end = r.f64("tau_end", args.tau_end, capture::default_tau_measure(p2))?;
    let snapshots = r.f64_list("snapshots", args.snapshots.as_deref(), &[tau_end])?;
    let settings = ladder_settings(&mut r, args.rtol, args.atol)?;
    let basis = r.usize(
        "basis_size",
        args.basis_size,
        ladder::default_basis_size(p1, p2, tau_end),
    )?;
    let resolved = r.finish()?;

    let params = DimensionlessParams::new(p1, p2).map_err(|e| CliError::Config(e.to_string()))?;
    let run = ladder::integrate(&params, tau0, tau_end, basis, None, &snapshots, &settings)
        .map_err(solver)?;

    let dir = RunDir::create(out)?;
    dir.manifest(
        "ladder",
        resolved,
        workers,
        json!({"rtol": settings.rtol, "atol": settings.atol}),
    )?;
    dir.csv(
        "populations.csv",
        "tau,n,population",
        run.snapshots.iter().flat_map(|s| {
            let tau = s.tau;
            s.populations()
                .into_iter()
                .enumerate()
                .map(move |(n, p)| format!("{},{n},{}", fmt(tau), fmt(p)))
        }),
    )?;
    dir.json(
        "summary.json",
        &json!({
            "p1": p1, "p2": p2, "tau0": tau0, "tau_end": tau_end,
            "basis_size": run.basis_size,
            "steps": run.steps,
            "max_norm_drift": run.max_norm_drift,
        }),
    )?;
    dir.gnuplot(
        "populations.gnuplot",
        "# gnuplot populations.gnuplot\n\
         set datafile separator ','\n\
         set xlabel 'level n'\n\
         set ylabel 'population'\n\
         set style data histeps\n\
         plot 'populations.csv' every ::1 using 2:3 title 'populations'\n",
    )?;
    println!(
        "ladder: P1={p1} P2={p2} basis={} steps={} norm drift {:.2e}",
        run.basis_size, run.steps, run.max_norm_drift
    );
    Ok(())
}

fn scan_settings(
    r: &mut Resolver,
    tau0: Option<f64>,
    tau_measure: Option<f64>,
    n_c: Option<usize>,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> Result<capture::ScanSettings, CliError> {
    let mut s = capture::ScanSettings::default();
    s.tau0 = r.f64("tau0", tau0, s.tau0)?;
    s.tau_measure = r.opt_f64("tau_measure", tau_measure)?;
    s.n_c = r.opt_usize("n_c", n_c)?;
    s.ladder = ladder_settings(r, rtol, atol)?;
    Ok(s)
}

fn write_scurve(dir: &RunDir, curve: &capture::SCurve) -> Result<(), CliError> {
    dir.csv(
        "scurve.csv",
        "p1,probability,n_c,fallback,valley_depth,norm_drift",
        curve.samples.iter().map(|s| {
            format!(
                "{},{},{},{},{},{}",
                fmt(s.p1),
                fmt(s.probability),
                s.n_c,
                s.fallback as u8,
                fmt(s.valley_depth),
                fmt(s.norm_drift)
            )
        }),
    )?;
    dir.json(
        "summary.json",
        &json!({
            "p2": curve.p2,
            "p1cr": curve.threshold,
            "p1cr_err": curve.threshold_err,
            "width": curve.width,
            "width_err": curve.width_err,
        }),
    )?;
    dir.gnuplot(
        "scurve.gnuplot",
        "# gnuplot scurve.gnuplot\n\
         set datafile separator ','\n\
         set xlabel 'P1'\n\
         set ylabel 'capture probability'\n\
         set yrange [0:1]\n\
         plot 'scurve.csv' every ::1 using 1:2 with linespoints title 'P(P1)', 0.5 notitle\n",
    )
}

pub fn scan(cli: &Cli, args: &ScanArgs, out: &Path, workers: usize) -> Result<(), CliError> {
    let mut r = Resolver::load(cli.config.as_deref())?;
    let p2 = r.f64_req("p2", args.p2)?;
    let p1_min = r.f64_req("p1_min", args.p1_min)?;
    let p1_max = r.f64_req("p1_max", args.p1_max)?;
    let points = r.usize("points", args.points, 15)?;
    let settings = scan_settings(&mut r, args.tau0, args.tau_measure, args.n_c, args.rtol, args.atol)?;
    let resolved = r.finish()?;
    if points < 2 || p1_max <= p1_min {
        return Err(CliError::Config(format!(
            "need an increasing P1 grid with ≥ 2 points (got [{p1_min}, {p1_max}] × {points})"
        )));
    }

    let curve =
        capture::scan_s_curve(p2, &linspace(p1_min, p1_max, points), &settings).map_err(solver)?;
    let dir = RunDir::create(out)?;
    dir.manifest(
        "scan",
        resolved,
        workers,
        json!({"rtol": settings.ladder.rtol, "atol": settings.ladder.atol}),
    )?;
    write_scurve(&dir, &curve)?;
    println!(
        "scan: P2={p2} P1cr = {:.4} ± {:.4}, ΔP1 = {:.4} ± {:.4}",
        curve.threshold, curve.threshold_err, curve.width, curve.width_err
    );
    Ok(())
}

/// Default P1 grid bracketing the threshold at one P2: centered on the
/// larger of the two asymptotic predictions.
fn auto_p1_grid(p2: f64, points: usize) -> Vec<f64> {
    let center = analytic::lc_threshold(analytic::DEFAULT_N_PRODUCT)
        .max(analytic::classical_threshold(p2));
    linspace(0.5 * center, 1.6 * center, points)
}

fn default_p2_list() -> Vec<f64> {
    let mut list = logspace(0.1, 10.0, 13);
    list.extend_from_slice(&[0.2, 8.0]);
    list.sort_by(f64::total_cmp);
    list.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    list
}

struct MapRow {
    p2: f64,
    curve: Result<capture::SCurve, capture::CaptureError>,
}

fn run_map_rows(p2_list: &[f64], points: usize, settings: &capture::ScanSettings) -> Vec<MapRow> {
    // outer loop sequential: each scan already fans out its grid points
    p2_list
        .iter()
        .map(|&p2| MapRow { p2, curve: capture::scan_s_curve(p2, &auto_p1_grid(p2, points), settings) })
        .collect()
}

pub fn map(
    cli: &Cli,
    args: &MapArgs,
    out: &Path,
    workers: usize,
    thresholds: bool,
) -> Result<(), CliError> {
    let mut r = Resolver::load(cli.config.as_deref())?;
    let p2_list = r.f64_list("p2_list", args.p2_list.as_deref(), &default_p2_list())?;
    let points = r.usize("points", args.points, 15)?;
    let settings = scan_settings(&mut r, args.tau0, None, None, args.rtol, args.atol)?;
    let resolved = r.finish()?;

    let rows = run_map_rows(&p2_list, points, &settings);
    let dir = RunDir::create(out)?;
    let command = if thresholds { "threshold-map" } else { "width-map" };
    dir.manifest(
        command,
        resolved,
        workers,
        json!({"rtol": settings.ladder.rtol, "atol": settings.ladder.atol}),
    )?;

    // failed grid points are marked, not fatal
    let lc_ref = analytic::lc_threshold(analytic::DEFAULT_N_PRODUCT);
    let lc_width = analytic::lc_width(analytic::DEFAULT_N_PRODUCT);
    let cl_width = analytic::classical_width(1.0, 0.0);
    let (name, header, mk): (_, _, Box<dyn Fn(&MapRow) -> String>) = if thresholds {
        (
            "threshold_map.csv",
            "p2,p1cr,p1cr_err,lc_ref,ar_ref,status",
            Box::new(move |row: &MapRow| match &row.curve {
                Ok(c) => format!(
                    "{},{},{},{},{},ok",
                    fmt(row.p2),
                    fmt(c.threshold),
                    fmt(c.threshold_err),
                    fmt(lc_ref),
                    fmt(analytic::classical_threshold(row.p2)),
                ),
                Err(e) => format!(
                    "{},nan,nan,{},{},failed: {e}",
                    fmt(row.p2),
                    fmt(lc_ref),
                    fmt(analytic::classical_threshold(row.p2)),
                ),
            }),
        )
    } else {
        (
            "width_map.csv",
            "p2,width,width_err,lc_ref,ar_ref,status",
            Box::new(move |row: &MapRow| match &row.curve {
                Ok(c) => format!(
                    "{},{},{},{},{},ok",
                    fmt(row.p2),
                    fmt(c.width),
                    fmt(c.width_err),
                    fmt(lc_width),
                    fmt(cl_width),
                ),
                Err(e) => {
                    format!("{},nan,nan,{},{},failed: {e}", fmt(row.p2), fmt(lc_width), fmt(cl_width))
                }
            }),
        )
    };
    dir.csv(name, header, rows.iter().map(|row| mk(row)))?;
    dir.gnuplot(
        &format!("{}.gnuplot", name.trim_end_matches(".csv")),
        &format!(
            "# companion plot script\n\
             set datafile separator ','\n\
             set logscale x\n\
             set xlabel 'P2'\n\
             set ylabel '{}'\n\
             plot '{name}' every ::1 using 1:2:3 with yerrorbars title 'simulated', \\\n\
                  '' every ::1 using 1:4 with lines title 'LC reference', \\\n\
                  '' every ::1 using 1:5 with lines title 'AR reference'\n",
            if thresholds { "P1cr" } else { "width" },
        ),
    )?;
    for row in &rows {
        match &row.curve {
            Ok(c) => println!(
                "{command}: P2={:.4} -> {:.4}",
                row.p2,
                if thresholds { c.threshold } else { c.width }
            ),
            Err(e) => println!("{command}: P2={:.4} failed: {e}", row.p2),
        }
    }
    Ok(())
}

fn write_fields(
    dir: &RunDir,
    fields: &[PhaseSpaceField],
    beta_bar: Option<f64>,
) -> Result<(), CliError> {
    for (i, f) in fields.iter().enumerate() {
        let base = format!("field_{i:03}");
        dir.json(
            &format!("{base}.json"),
            &json!({
                "frame": f.frame,
                "time": f.time,
                "grid": f.grid,
                "beta_bar": beta_bar,
                "columns": "x,u,f",
            }),
        )?;
        let xs = f.grid.x.values();
        let us = f.grid.u.values();
        dir.csv(
            &format!("{base}.csv"),
            "x,u,f",
            xs.iter().enumerate().flat_map(|(ix, &x)| {
                let us = us.clone();
                let f = &f.values;
                let nu = us.len();
                (0..nu).map(move |iu| {
                    format!("{},{},{}", fmt(x), fmt(us[iu]), fmt(f[ix * nu + iu]))
                })
            }),
        )?;
    }
    Ok(())
}

fn write_diagnostics(dir: &RunDir, fields: &[PhaseSpaceField]) -> Result<(), CliError> {
    dir.csv(
        "diagnostics.csv",
        "time,interior_mass,negativity",
        fields
            .iter()
            .map(|f| format!("{},{},{}", fmt(f.time), fmt(f.integral()), fmt(f.negativity()))),
    )
}

fn write_separatrix(dir: &RunDir, beta_bar: f64) -> Result<(), CliError> {
    let [up, down] = separatrix_polylines(beta_bar, 201);
    dir.csv(
        "separatrix.csv",
        "branch,x,u",
        up.iter()
            .map(|(x, u)| format!("upper,{},{}", fmt(*x), fmt(*u)))
            .chain(down.iter().map(|(x, u)| format!("lower,{},{}", fmt(*x), fmt(*u)))),
    )
}

/// Default square grid: the separatrix (fixed frame) or the autoresonant
/// bucket at the final time fits with ≥ 15% margin, spacing ≈ 0.2 in the
/// fixed frame.
fn default_fixed_grid(beta_bar: f64) -> (f64, usize) {
    let hw = if beta_bar > 0.0 { 1.15 / beta_bar.sqrt() } else { 10.0 };
    let points = (((hw * 10.0) / 32.0).ceil() as usize).max(3) * 32;
    (hw, points)
}

pub fn wigner(cli: &Cli, args: &WignerArgs, out: &Path, workers: usize) -> Result<(), CliError> {
    let mut r = Resolver::load(cli.config.as_deref())?;
    let frame = match r.string("frame", args.frame.as_deref(), "fixed")?.as_str() {
        "fixed" => Frame::Fixed,
        "rotating" => Frame::Rotating,
        other => {
            return Err(CliError::Config(format!(
                "--frame must be `fixed` or `rotating`, got `{other}`"
            )))
        }
    };
    let dir = RunDir::create(out)?;

    match frame {
        Frame::Fixed => {
            let alpha_bar = r.f64_req("alpha_bar", args.alpha_bar)?;
            let beta_bar = r.f64("beta_bar", args.beta_bar, 0.0)?;
            let eps_bar = r.f64("eps_bar", args.eps_bar, 0.0)?;
            let gamma = r.f64("gamma", args.gamma, 2.0)?;
            let (hw_def, pts_def) = default_fixed_grid(beta_bar);
            let hw = r.f64("half_width", args.half_width, hw_def)?;
            let points = r.usize("grid_points", args.grid_points, pts_def)?;
            let tau0 = r.f64("tau0", args.tau0, -8.0)?;
            let snapshots = r.f64_list("snapshots", args.snapshots.as_deref(), &[0.0])?;
            let dt = r.f64("dt", args.dt, 0.2)?;
            let sponge = r.f64("sponge_frac", args.sponge_frac, 0.05)?;
            let resolved = r.finish()?;

            let grid = PhaseSpaceGrid::square(hw, points);
            let cfg = FixedFrameConfig {
                alpha_bar,
                beta_bar,
                eps_bar,
                gamma,
                tau0,
                snapshot_taus: snapshots,
                dt,
                grid,
                sponge_frac: sponge,
            };
            let f0 = initial_thermal(Frame::Fixed, &grid, 1.0, tau0).map_err(solver)?;
            let report = evolve_fixed(&cfg, &f0).map_err(solver)?;

            dir.manifest("wigner", resolved, workers, json!({"norm_drift_limit": 1e-4}))?;
            write_fields(&dir, &report.fields, Some(beta_bar))?;
            write_diagnostics(&dir, &report.fields)?;
            if beta_bar > 0.0 {
                write_separatrix(&dir, beta_bar)?;
            }
            dir.json(
                "summary.json",
                &json!({
                    "absorbed_mass": report.absorbed_mass,
                    "norm_drift": report.norm_drift,
                    "steps": report.steps,
                }),
            )?;
            println!(
                "wigner fixed: {} snapshot(s), {} steps, norm drift {:.2e}, absorbed {:.2e}",
                report.fields.len(),
                report.steps,
                report.norm_drift,
                report.absorbed_mass
            );
            if beta_bar == 0.0 && eps_bar == 0.0 {
                // harmonic limit: the centered thermal Gaussian is
                // rotation-invariant, so the field should return to f0
                let sup = report
                    .fields
                    .iter()
                    .flat_map(|f| f.values.iter().zip(&f0.values))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                println!("harmonic rotation-match diagnostic: sup-norm deviation {sup:.3e}");
            }
        }
        Frame::Rotating => {
            let mu = r.f64_req("mu", args.mu)?;
            let lambda = r.f64_req("lambda", args.lambda)?;
            let sigma_sq = r.f64("sigma_sq", args.sigma_sq, lambda / 2.0)?;
            let tau0 = r.f64("tau0", args.tau0, -8.0)?;
            let snapshots = r.f64_list("snapshots", args.snapshots.as_deref(), &[0.0])?;
            let tau_max = snapshots.iter().copied().fold(1.0f64, f64::max);
            let hw = r.f64("half_width", args.half_width, 1.15 * (tau_max.sqrt() + 1.0))?;
            let points = r.usize("grid_points", args.grid_points, 128)?;
            let dt = r.opt_f64("dt", args.dt)?;
            let sponge = r.f64("sponge_frac", args.sponge_frac, 0.05)?;
            let resolved = r.finish()?;
            if sigma_sq < lambda / 2.0 {
                return Err(CliError::Config(format!(
                    "sigma_sq = {sigma_sq} below the quantum floor λ/2 = {}",
                    lambda / 2.0
                )));
            }

            let grid = PhaseSpaceGrid::square(hw, points);
            let mut cfg = RotatingFrameConfig::new(mu, lambda, grid);
            cfg.tau0 = tau0;
            cfg.snapshot_taus = snapshots;
            cfg.dt = dt;
            cfg.sponge_frac = sponge;
            let f0 = initial_thermal(Frame::Rotating, &grid, sigma_sq, tau0).map_err(solver)?;
            let report = evolve_rotating(&cfg, &f0).map_err(solver)?;

            dir.manifest("wigner", resolved, workers, json!({"norm_drift_limit": 1e-4}))?;
            write_fields(&dir, &report.fields, None)?;
            write_diagnostics(&dir, &report.fields)?;
            dir.json(
                "summary.json",
                &json!({
                    "absorbed_mass": report.absorbed_mass,
                    "norm_drift": report.norm_drift,
                    "steps": report.steps,
                    "min_step": report.min_step,
                }),
            )?;
            println!(
                "wigner rotating: {} snapshot(s), {} steps (min admissible step {:.2e}), \
                 norm drift {:.2e}",
                report.fields.len(),
                report.steps,
                report.min_step,
                report.norm_drift
            );
        }
    }
    Ok(())
}

/// Fixed-frame parameter sets behind the three time-series figures.
/// ᾱ and β̄ follow the published values; ε̄ is derived exactly from P1
/// (ε̄ = 2·P1·√ᾱ at γ = 2), which matches the published ε̄ for the
/// P2 = 1 and P2 = 0.2 sets.
struct FigureSet {
    p1: f64,
    p2: f64,
    alpha_bar: f64,
    beta_bar: f64,
    taus: [f64; 4],
    /// Expected separator valley (None where many levels blur it).
    n_c: Option<usize>,
    spot_probability: Option<f64>,
}

fn figure_set(fig: u32) -> FigureSet {
    match fig {
        1 => FigureSet {
            p1: 0.8,
            p2: 8.0,
            alpha_bar: 6.25e-7,
            beta_bar: 0.0042,
            taus: [0.0, 30.0, 60.0, 90.0],
            n_c: Some(6),
            spot_probability: Some(0.48),
        },
        2 => FigureSet {
            p1: 1.0,
            p2: 1.0,
            alpha_bar: 1e-4,
            beta_bar: 0.0067,
            taus: [0.0, 8.0, 16.0, 24.0],
            n_c: Some(10),
            spot_probability: Some(0.62),
        },
        3 => FigureSet {
            p1: 1.9,
            p2: 0.2,
            alpha_bar: 1e-4,
            beta_bar: 0.0013,
            taus: [0.0, 4.0, 8.0, 12.0],
            n_c: Some(40),
            // regression value: the capture probability here oscillates
            // with the start-time phase, so the golden pins this solver's
            // reproducible number rather than a round published one
            spot_probability: Some(0.601),
        },
        _ => unreachable!(),
    }
}

struct Checks {
    lines: Vec<(String, bool)>,
}

impl Checks {
    fn new() -> Self {
        Self { lines: Vec::new() }
    }

    fn close(&mut self, what: &str, got: f64, expect: f64, tol: f64) {
        let ok = (got - expect).abs() <= tol;
        self.lines.push((
            format!("{what}: got {got:.4}, expected {expect:.4} ± {tol:.3}"),
            ok,
        ));
    }

    fn finish(self) -> Result<(), CliError> {
        let mut failed = 0;
        for (line, ok) in &self.lines {
            println!("{} {line}", if *ok { "PASS" } else { "FAIL" });
            if !ok {
                failed += 1;
            }
        }
        if failed == 0 {
            Ok(())
        } else {
            Err(CliError::Check(format!("{failed} golden check(s) failed")))
        }
    }
}

pub fn figures(cli: &Cli, args: &FiguresArgs, out: &Path, workers: usize) -> Result<(), CliError> {
    if !(1..=5).contains(&args.fig) {
        return Err(CliError::Config(format!("--fig must be 1..5, got {}", args.fig)));
    }
    let mut r = Resolver::load(cli.config.as_deref())?;
    let points = r.usize("points", args.points, 15)?;
    let resolved = r.finish()?;
    let dir = RunDir::create(out)?;
    dir.manifest(
        "figures",
        resolved,
        workers,
        json!({"fig": args.fig, "check": args.check}),
    )?;

    match args.fig {
        fig @ 1..=3 => figure_panels(&dir, fig, args),
        4 | 5 => figure_maps(&dir, args.fig, args.check, points),
        _ => unreachable!(),
    }
}

fn figure_panels(dir: &RunDir, fig: u32, args: &FiguresArgs) -> Result<(), CliError> {
    let set = figure_set(fig);
    let params = DimensionlessParams::new(set.p1, set.p2).unwrap();
    let tau0 = -8.0;
    let tau_end = set.taus[3];
    let basis = ladder::default_basis_size(set.p1, set.p2, tau_end);
    let run = ladder::integrate(
        &params,
        tau0,
        tau_end,
        basis,
        None,
        &set.taus,
        &ladder::LadderSettings::default(),
    )
    .map_err(solver)?;

    if args.check {
        let mut checks = Checks::new();
        if fig == 1 {
            let (valley, _, fallback) =
                capture::separator_level(&run, tau_end).map_err(solver)?;
            checks.close("fig 1 valley level at τ=90", valley as f64, 6.0, 1.0);
            checks.lines.push((
                format!("fig 1 valley from two-group structure (fallback={fallback})"),
                !fallback,
            ));
        }
        if let (Some(nc), Some(p)) = (set.n_c, set.spot_probability) {
            let res = capture::capture_probability(&run, nc, tau_end).map_err(solver)?;
            checks.close(
                &format!("fig {fig} capture probability at n_c={nc}"),
                res.probability,
                p,
                0.05,
            );
        }
        return checks.finish();
    }

    dir.csv(
        &format!("fig{fig}_histograms.csv"),
        "tau,n,population",
        run.snapshots.iter().flat_map(|s| {
            let tau = s.tau;
            s.populations()
                .into_iter()
                .enumerate()
                .map(move |(n, p)| format!("{},{n},{}", fmt(tau), fmt(p)))
        }),
    )?;
    dir.gnuplot(
        &format!("fig{fig}.gnuplot"),
        &format!(
            "# companion plot script\n\
             set datafile separator ','\n\
             set xlabel 'level n'\n\
             set ylabel 'population'\n\
             set style data histeps\n\
             plot 'fig{fig}_histograms.csv' every ::1 using 2:3 title 'populations'\n"
        ),
    )?;

    if !args.skip_wigner {
        let eps_bar = 2.0 * set.p1 * set.alpha_bar.sqrt();
        let (hw, pts) = default_fixed_grid(set.beta_bar);
        let grid = PhaseSpaceGrid::square(hw, pts);
        let cfg = FixedFrameConfig {
            alpha_bar: set.alpha_bar,
            beta_bar: set.beta_bar,
            eps_bar,
            gamma: 2.0,
            tau0,
            snapshot_taus: set.taus.to_vec(),
            dt: 0.2,
            grid,
            sponge_frac: 0.05,
        };
        let f0 = initial_thermal(Frame::Fixed, &grid, 1.0, tau0).map_err(solver)?;
        let report = evolve_fixed(&cfg, &f0).map_err(solver)?;
        write_fields(dir, &report.fields, Some(set.beta_bar))?;
        write_diagnostics(dir, &report.fields)?;
        write_separatrix(dir, set.beta_bar)?;
        println!(
            "fig {fig}: phase-space panels done ({} steps, norm drift {:.2e})",
            report.steps, report.norm_drift
        );
    }
    println!("fig {fig}: histograms written (norm drift {:.2e})", run.max_norm_drift);
    Ok(())
}

fn figure_maps(dir: &RunDir, fig: u32, check: bool, points: usize) -> Result<(), CliError> {
    let settings = capture::ScanSettings::default();
    let p2_list: Vec<f64> = if check { vec![0.2, 8.0] } else { default_p2_list() };
    let rows = run_map_rows(&p2_list, points, &settings);

    if check {
        let mut checks = Checks::new();
        for row in &rows {
            let curve = row.curve.as_ref().map_err(|e| solver(e.to_string()))?;
            match (fig, row.p2) {
                (4, p2) if p2 == 8.0 => {
                    checks.close("fig 4 P1cr at P2=8", curve.threshold, 0.79, 0.08)
                }
                (4, p2) if p2 == 0.2 => {
                    checks.close("fig 4 P1cr at P2=0.2", curve.threshold, 1.83, 0.1)
                }
                (5, p2) if p2 == 8.0 => {
                    checks.close("fig 5 width at P2=8", curve.width, 0.66, 0.1)
                }
                (5, p2) if p2 == 0.2 => {
                    checks.close("fig 5 width at P2=0.2", curve.width, 0.61, 0.1)
                }
                _ => {}
            }
        }
        return checks.finish();
    }

    let name = format!("fig{fig}.csv");
    if fig == 4 {
        let lc_ref = analytic::lc_threshold(analytic::DEFAULT_N_PRODUCT);
        dir.csv(
            &name,
            "p2,p1cr,p1cr_err,lc_ref,ar_ref,status",
            rows.iter().map(|row| match &row.curve {
                Ok(c) => format!(
                    "{},{},{},{},{},ok",
                    fmt(row.p2),
                    fmt(c.threshold),
                    fmt(c.threshold_err),
                    fmt(lc_ref),
                    fmt(analytic::classical_threshold(row.p2)),
                ),
                Err(e) => format!(
                    "{},nan,nan,{},{},failed: {e}",
                    fmt(row.p2),
                    fmt(lc_ref),
                    fmt(analytic::classical_threshold(row.p2)),
                ),
            }),
        )?;
    } else {
        let lc_width = analytic::lc_width(analytic::DEFAULT_N_PRODUCT);
        let cl_width = analytic::classical_width(1.0, 0.0);
        dir.csv(
            &name,
            "p2,width,width_err,lc_ref,ar_ref,status",
            rows.iter().map(|row| match &row.curve {
                Ok(c) => format!(
                    "{},{},{},{},{},ok",
                    fmt(row.p2),
                    fmt(c.width),
                    fmt(c.width_err),
                    fmt(lc_width),
                    fmt(cl_width),
                ),
                Err(e) => format!(
                    "{},nan,nan,{},{},failed: {e}",
                    fmt(row.p2),
                    fmt(lc_width),
                    fmt(cl_width)
                ),
            }),
        )?;
    }
    dir.gnuplot(
        &format!("fig{fig}.gnuplot"),
        &format!(
            "# companion plot script\n\
             set datafile separator ','\n\
             set logscale x\n\
             set xlabel 'P2'\n\
             set ylabel '{}'\n\
             plot 'fig{fig}.csv' every ::1 using 1:2:3 with yerrorbars title 'simulated', \\\n\
                  '' every ::1 using 1:4 with lines title 'LC reference', \\\n\
                  '' every ::1 using 1:5 with lines title 'AR reference'\n",
            if fig == 4 { "P1cr" } else { "width" },
        ),
    )?;
    for row in &rows {
        match &row.curve {
            Ok(c) => println!(
                "fig {fig}: P2={:.4} -> {:.4}",
                row.p2,
                if fig == 4 { c.threshold } else { c.width }
            ),
            Err(e) => println!("fig {fig}: P2={:.4} failed: {e}", row.p2),
        }
    }
    Ok(())
}
