use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use pointdamp_core::{BeamParams, Sign};
use serde::{Deserialize, Serialize};

use crate::Invalid;

pub const MAX_SWEEP_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every knob of a run. Written next to the outputs so the run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub n_max: u32,
    pub grid: usize,
    pub modes: usize,
    pub time: f64,
    /// Zero picks a count from the highest modal frequency.
    pub samples: usize,
    pub out: PathBuf,
    pub format: Format,
    /// Zero means one worker per logical core.
    pub jobs: usize,
    pub mode: i32,
    pub sign: Sign,
    pub mu_re: f64,
    pub mu_im: f64,
    pub n0: u32,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub xis: Vec<f64>,
    pub bs: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            a: 1.0,
            b: 1.0,
            alpha: 0.0,
            beta: 0.0,
            xi: std::f64::consts::FRAC_1_SQRT_2,
            n_max: 8,
            grid: 1024,
            modes: 8,
            time: 40.0,
            samples: 0,
            out: PathBuf::from("out"),
            format: Format::Csv,
            jobs: 0,
            mode: 1,
            sign: Sign::Plus,
            mu_re: 1.0,
            mu_im: 1.0,
            n0: 4,
            alphas: Vec::new(),
            betas: Vec::new(),
            xis: Vec::new(),
            bs: Vec::new(),
        }
    }
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(format!("expected + or - (got {s})")),
    }
}

/// Flags shared by every command; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub a: Option<f64>,
    #[arg(long, global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    #[arg(long, global = true)]
    pub n_max: Option<u32>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    #[arg(long, global = true)]
    pub time: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Mode index for `eigenfunction`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mode: Option<i32>,
    /// Branch for `eigenfunction`: + or -.
    #[arg(long, global = true, value_parser = parse_sign, allow_hyphen_values = true)]
    pub sign: Option<Sign>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu_re: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu_im: Option<f64>,
    /// First mode of the Riesz report.
    #[arg(long, global = true)]
    pub n0: Option<u32>,
    /// Sweep grid for alpha, comma separated.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub alphas: Option<Vec<f64>>,
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub betas: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub xis: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub bs: Option<Vec<f64>>,
}

fn set<T>(slot: &mut T, value: &Option<T>)
where
    T: Clone,
{
    if let Some(v) = value {
        *slot = v.clone();
    }
}

impl Overrides {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => load(path)?,
            None => RunConfig::default(),
        };
        set(&mut c.a, &self.a);
        set(&mut c.b, &self.b);
        set(&mut c.alpha, &self.alpha);
        set(&mut c.beta, &self.beta);
        set(&mut c.xi, &self.xi);
        set(&mut c.n_max, &self.n_max);
        set(&mut c.grid, &self.grid);
        set(&mut c.modes, &self.modes);
        set(&mut c.time, &self.time);
        set(&mut c.samples, &self.samples);
        set(&mut c.out, &self.out);
        set(&mut c.format, &self.format);
        set(&mut c.jobs, &self.jobs);
        set(&mut c.mode, &self.mode);
        set(&mut c.sign, &self.sign);
        set(&mut c.mu_re, &self.mu_re);
        set(&mut c.mu_im, &self.mu_im);
        set(&mut c.n0, &self.n0);
        set(&mut c.alphas, &self.alphas);
        set(&mut c.betas, &self.betas);
        set(&mut c.xis, &self.xis);
        set(&mut c.bs, &self.bs);
        Ok(c)
    }
}

fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| Invalid(format!("config {}: {e}", path.display())).into())
}

impl RunConfig {
    pub fn params(&self) -> anyhow::Result<BeamParams> {
        BeamParams::new(self.a, self.b, self.alpha, self.beta, self.xi)
            .map_err(|e| Invalid(e.to_string()).into())
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> anyhow::Result<BeamParams> {
        let p = self.params()?;
        let check = |ok: bool, msg: &str| -> anyhow::Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Invalid(msg.to_string()).into())
            }
        };
        check(self.n_max >= 1, "n_max must be at least 1")?;
        check(
            self.grid >= 16 && self.grid.is_multiple_of(2),
            "grid must be an even count >= 16",
        )?;
        check(self.modes >= 2, "modes must be at least 2")?;
        check(
            self.time > 0.0 && self.time.is_finite(),
            "time must be positive",
        )?;
        check(
            self.samples == 0 || self.samples >= 2,
            "samples must be 0 (auto) or >= 2",
        )?;
        check(self.mode != 0, "mode index must be nonzero")?;
        check(
            self.mu_re.is_finite() && self.mu_im.is_finite(),
            "mu must be finite",
        )?;
        Ok(p)
    }

    pub fn sweep_points(&self) -> anyhow::Result<Vec<BeamParams>> {
        let axis = |v: &Vec<f64>, d: f64| if v.is_empty() { vec![d] } else { v.clone() };
        let (al, be, xs, bs) = (
            axis(&self.alphas, self.alpha),
            axis(&self.betas, self.beta),
            axis(&self.xis, self.xi),
            axis(&self.bs, self.b),
        );
        let total = al.len() * be.len() * xs.len() * bs.len();
        if total > MAX_SWEEP_POINTS {
            return Err(Invalid(format!(
                "sweep has {total} points (limit {MAX_SWEEP_POINTS})"
            ))
            .into());
        }
        let mut out = Vec::with_capacity(total);
        for &b in &bs {
            for &xi in &xs {
                for &beta in &be {
                    for &alpha in &al {
                        let p = BeamParams::new(self.a, b, alpha, beta, xi)
                            .map_err(|e| Invalid(e.to_string()))?;
                        out.push(p);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("config.json"), text + "\n")
            .with_context(|| format!("writing config into {}", dir.display()))
    }
}
