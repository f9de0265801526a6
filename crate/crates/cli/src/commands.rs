use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use num_complex::Complex64;
use pointdamp_core::eigenfunctions::{
    eval_phi, phi_residuals, riesz_tail_report_grid, PhiResiduals,
};
use pointdamp_core::resolvent::resolvent_apply;
use pointdamp_core::simulator::{dissipation_check, fit_decay_rate, simulate, ModalInit};
use pointdamp_core::spectrum::{
    compute_spectrum, critical_alpha_double, spectral_abscissa, undamped_spectrum,
    xi_special_report, CriticalAlpha, XiReport,
};
use pointdamp_core::{fmt_f64, BeamParams, GridFunction, ResolventInput};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::Invalid;

const MAX_SAMPLES: usize = 5_000_000;

fn write(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

fn yes(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}

/// Bound on the decay rate: the first mode is overdamped when `b^2 > 4 a pi^4`.
fn decay_bound(p: &BeamParams) -> (String, f64) {
    let d = p.b * p.b - 4.0 * p.a * std::f64::consts::PI.powi(4);
    if d > 0.0 {
        (
            "(-b + sqrt(b^2 - 4 a pi^4))/2 + eps".into(),
            0.5 * (-p.b + d.sqrt()),
        )
    } else {
        ("-b/2 + eps".into(), -0.5 * p.b)
    }
}

pub fn spectrum(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    let p = cfg.validate()?;
    let spec = compute_spectrum(&p, cfg.n_max)?;
    write(dir, "spectrum.json", &(spec.to_json() + "\n"))?;
    write(dir, "spectrum.csv", &spec.to_csv())?;
    let (case, bound) = decay_bound(&p);
    let worst = spec
        .eigenvalues
        .iter()
        .map(|e| e.point.residual)
        .fold(0.0, f64::max);
    println!("eigenvalues: {}", spec.eigenvalues.len());
    println!("abscissa: {}", fmt_f64(spec.abscissa));
    println!("max residual: {worst:.3e}");
    println!("undamped decay bound {case}: {}", fmt_f64(bound));
    if spec.abscissa_caveat {
        println!("note: abscissa within 1e-6 of -b/2; larger n_max may move it");
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    alpha: f64,
    beta: f64,
    xi: f64,
    b: f64,
    abscissa: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    rows: Vec<SweepRow>,
    best: Option<usize>,
    undamped_abscissa: Option<f64>,
    beats_undamped: bool,
}

pub fn sweep(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    cfg.validate()?;
    let points = cfg.sweep_points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .context("building worker pool")?;
    let n_max = cfg.n_max;
    let rows: Vec<SweepRow> = pool.install(|| {
        use rayon::prelude::*;
        points
            .par_iter()
            .map(|p| {
                let res = compute_spectrum(p, n_max);
                SweepRow {
                    alpha: p.alpha,
                    beta: p.beta,
                    xi: p.xi,
                    b: p.b,
                    abscissa: res.as_ref().ok().map(|s| s.abscissa),
                    error: res.err().map(|e| e.to_string()),
                }
            })
            .collect()
    });
    let best = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.abscissa.map(|a| (i, a)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(i, _)| i);
    let undamped = best.map(|i| {
        let spec = undamped_spectrum(cfg.a, rows[i].b, n_max);
        spec.iter()
            .map(|e| e.mu().re)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let beats = match (best, undamped) {
        (Some(i), Some(u)) => rows[i].abscissa.unwrap() < u,
        _ => false,
    };
    let summary = SweepSummary {
        rows,
        best,
        undamped_abscissa: undamped,
        beats_undamped: beats,
    };
    match cfg.format {
        Format::Json => write(dir, "sweep.json", &json(&summary))?,
        Format::Csv => {
            let mut out = String::from("alpha,beta,xi,b,abscissa,best,error\n");
            for (i, r) in summary.rows.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    fmt_f64(r.alpha),
                    fmt_f64(r.beta),
                    fmt_f64(r.xi),
                    fmt_f64(r.b),
                    r.abscissa.map(fmt_f64).unwrap_or_default(),
                    u8::from(summary.best == Some(i)),
                    r.error.as_deref().unwrap_or("").replace(',', ";")
                );
            }
            write(dir, "sweep.csv", &out)?;
        }
    }
    let failed = summary.rows.iter().filter(|r| r.error.is_some()).count();
    println!("points: {} ({failed} failed)", summary.rows.len());
    if let Some(i) = summary.best {
        let r = &summary.rows[i];
        println!(
            "best: alpha={} beta={} xi={} b={} abscissa={}",
            r.alpha,
            r.beta,
            r.xi,
            r.b,
            fmt_f64(r.abscissa.unwrap())
        );
        println!(
            "beats undamped abscissa {}: {}",
            fmt_f64(summary.undamped_abscissa.unwrap()),
            yes(summary.beats_undamped)
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationSummary {
    samples: usize,
    fitted_omega: Option<f64>,
    abscissa: f64,
    relative_gap: Option<f64>,
    max_energy_increase: f64,
    dissipation_mismatch: Option<f64>,
    propagation: String,
    condition: f64,
}

fn auto_samples(cfg: &RunConfig, p: &BeamParams) -> anyhow::Result<usize> {
    if cfg.samples > 0 {
        return Ok(cfg.samples);
    }
    let k = cfg.modes as f64 * std::f64::consts::PI;
    let omega = p.a.sqrt() * k * k + p.b + p.alpha * cfg.modes as f64;
    let n = (cfg.time * omega / std::f64::consts::TAU * 64.0).ceil() as usize + 1;
    if n > MAX_SAMPLES {
        return Err(Invalid(format!(
            "{n} samples needed to resolve {} modes over T = {}; lower --modes or --time",
            cfg.modes, cfg.time
        ))
        .into());
    }
    Ok(n.max(2001))
}

pub fn simulate_cmd(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    let p = cfg.validate()?;
    let samples = auto_samples(cfg, &p)?;
    let traj = simulate(
        &p,
        &ModalInit::smooth(cfg.modes),
        cfg.time,
        samples,
        cfg.modes,
    )?;
    let abscissa = spectral_abscissa(&compute_spectrum(&p, cfg.modes as u32)?);
    let omega = fit_decay_rate(&traj, 0.5).ok();
    let gap = omega.map(|w| ((w - abscissa) / abscissa).abs());
    let diss = dissipation_check(&traj, &p).ok().map(|d| d.max_mismatch);
    let summary = SimulationSummary {
        samples,
        fitted_omega: omega,
        abscissa,
        relative_gap: gap,
        max_energy_increase: traj.max_energy_increase(),
        dissipation_mismatch: diss,
        propagation: format!("{:?}", traj.propagation),
        condition: traj.condition,
    };
    write(dir, "trajectory.csv", &traj.to_csv())?;
    write(dir, "simulation.json", &json(&summary))?;
    match omega {
        Some(w) => println!(
            "fitted omega: {} (abscissa {})",
            fmt_f64(w),
            fmt_f64(abscissa)
        ),
        None => println!("fitted omega: unavailable (energy underflow)"),
    }
    println!(
        "decay fit within 5% of abscissa: {}",
        yes(gap.is_some_and(|g| g <= 0.05))
    );
    Ok(())
}

#[derive(Serialize)]
struct EigenfunctionOut<'a> {
    n: i32,
    sign: &'a str,
    mu: Complex64,
    lambda: Complex64,
    residuals: PhiResiduals,
    phi: &'a GridFunction,
}

pub fn eigenfunction(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    let p = cfg.validate()?;
    let spec = compute_spectrum(&p, cfg.n_max.max(cfg.mode.unsigned_abs()))?;
    let rec = spec.find(cfg.mode, cfg.sign).ok_or_else(|| {
        Invalid(format!(
            "no eigenvalue labelled ({}, {})",
            cfg.mode,
            cfg.sign.symbol()
        ))
    })?;
    let pair = eval_phi(&p, &rec.point, cfg.grid)?;
    let res = phi_residuals(&p, &rec.point, cfg.grid);
    let ok =
        res.ode <= 1e-4 && res.jump <= 1e-3 && res.boundary <= 1e-10 && res.continuity <= 1e-10;
    match cfg.format {
        Format::Csv => write(dir, "eigenfunction.csv", &pair.first.to_csv())?,
        Format::Json => write(
            dir,
            "eigenfunction.json",
            &json(&EigenfunctionOut {
                n: cfg.mode,
                sign: cfg.sign.symbol(),
                mu: rec.mu(),
                lambda: rec.point.lambda,
                residuals: res,
                phi: &pair.first,
            }),
        )?,
    }
    println!("mu: {} + {} i", fmt_f64(rec.mu().re), fmt_f64(rec.mu().im));
    println!(
        "residuals: ode {:.2e}, jump {:.2e}, boundary {:.2e}, continuity {:.2e}",
        res.ode, res.jump, res.boundary, res.continuity
    );
    println!("residual suite within tolerance: {}", yes(ok));
    Ok(())
}

pub fn resolvent(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    let p = cfg.validate()?;
    let mu = Complex64::new(cfg.mu_re, cfg.mu_im);
    let u1 = GridFunction::from_fn(cfg.grid, |x| {
        Complex64::new((std::f64::consts::PI * x).sin(), 0.0)
    })?;
    let v1 = GridFunction::zeros(cfg.grid)?;
    let out = resolvent_apply(&p, &ResolventInput::new(u1, v1, mu)?)?;
    write(dir, "resolvent.json", &(out.to_json() + "\n"))?;
    if cfg.format == Format::Csv {
        write(dir, "resolvent_u.csv", &out.u.to_csv())?;
        write(dir, "resolvent_v.csv", &out.v.to_csv())?;
    }
    let d = out.diagnostics;
    println!(
        "residuals: ode {:.2e}, jump {:.2e}, second-derivative gap {:.2e}, boundary {:.2e}",
        d.ode_residual,
        d.jump_error,
        d.second_gap,
        d.boundary()
    );
    println!("residual suite within 1e-3: {}", yes(d.worst() <= 1e-3));
    Ok(())
}

pub fn riesz(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    let p = cfg.validate()?;
    if cfg.n0 < 1 || cfg.n0 >= cfg.n_max {
        return Err(Invalid(format!(
            "riesz needs 1 <= n0 < n_max (got {}, {})",
            cfg.n0, cfg.n_max
        ))
        .into());
    }
    let rep = riesz_tail_report_grid(&p, cfg.n0, cfg.n_max, cfg.grid)?;
    write(dir, "riesz.json", &(rep.to_json() + "\n"))?;
    if cfg.format == Format::Csv {
        let mut out = String::from("n,sign,aligned,raw\n");
        for e in &rep.entries {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                e.n,
                e.sign.symbol(),
                fmt_f64(e.aligned),
                fmt_f64(e.raw)
            );
        }
        write(dir, "riesz.csv", &out)?;
    }
    println!("exponent: {:.4}", rep.exponent);
    println!("tail ratio: {:.4}", rep.tail_ratio);
    println!("verdict: {}", rep.verdict);
    Ok(())
}

#[derive(Serialize)]
struct CriticalOut {
    critical: Option<CriticalAlpha>,
    critical_error: Option<String>,
    xi_report: XiReport,
}

pub fn critical(cfg: &RunConfig, dir: &Path) -> anyhow::Result<()> {
    let p = cfg.validate()?;
    let crit = critical_alpha_double(p.a, p.b, p.xi);
    let report = xi_special_report(p.a, p.b, p.alpha);
    match &crit {
        Ok(c) => println!(
            "alpha*: {} (r = {}, admissible: {})",
            fmt_f64(c.alpha),
            fmt_f64(c.r),
            yes(c.admissible)
        ),
        Err(e) => println!("alpha*: undefined ({e})"),
    }
    println!(
        "alpha b = {}: stated roots {:?}, roots where mu = -b is an eigenvalue {:?}",
        report.alpha_b, report.stated_roots, report.entire_form_roots
    );
    println!(
        "two roots announced above alpha b = {}, extremum gives {}",
        report.stated_threshold, report.extremum_threshold
    );
    let out = CriticalOut {
        critical: crit.as_ref().ok().copied(),
        critical_error: crit.err().map(|e| e.to_string()),
        xi_report: report,
    };
    write(dir, "critical.json", &json(&out))?;
    Ok(())
}
