//! Eigenvalues of the damped generator.

mod contour;
mod refine;
mod special;
mod track;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chareq::EntireSeries;
use crate::error::{BeamError, Result};
use crate::model::{EigenRecord, Provenance, Sign};
use crate::params::{overdamped_modes, BeamParams};

pub use contour::{count_zeros, ContourBox, MAX_PHASE_SAMPLES, MIN_BOUNDARY_MODULUS};
pub use refine::{derivative_ratio, label_root, refine_root, refine_root_in, residual};
pub use special::{
    beta_shift, beta_shift_stated, critical_alpha_double, perturbation_mu, remun_slope_stated,
    xi_special_report, CriticalAlpha, XiReport,
};
pub use track::{track_alpha, BranchTrack};

use contour::count_zeros_robust;
use refine::{make_record, refine_with};

const AUDIT_MAX_DEPTH: u32 = 6;

/// `(mu_n^+, mu_n^-)` for the undamped beam.
pub fn undamped_pair(a: f64, b: f64, n: u32) -> (Complex64, Complex64) {
    let w = a * (n as f64 * PI).powi(4);
    let disc = b * b - 4.0 * w;
    if disc >= 0.0 {
        // stable real pair
        let big = -(b + disc.sqrt()) / 2.0;
        let small = if big != 0.0 { w / big } else { 0.0 };
        (Complex64::new(small, 0.0), Complex64::new(big, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-b / 2.0, im), Complex64::new(-b / 2.0, -im))
    }
}

/// `|Im mu_n^+|` for the undamped beam (zero when overdamped).
fn undamped_im(a: f64, b: f64, n: u32) -> f64 {
    undamped_pair(a, b, n).0.im.abs()
}

/// True when `b` sits on `2 sqrt(a) n^2 pi^2`, where `mu_n^+ = mu_n^-`.
pub fn is_double_undamped(a: f64, b: f64, n: u32) -> bool {
    let crit = 2.0 * a.sqrt() * (n as f64 * PI).powi(2);
    (b - crit).abs() <= 1e-10 * crit
}

pub fn undamped_spectrum(a: f64, b: f64, n_max: u32) -> Vec<EigenRecord> {
    let params = BeamParams {
        a,
        b,
        alpha: 0.0,
        beta: 0.0,
        xi: 0.5,
    };
    let mut out = Vec::with_capacity(2 * n_max as usize);
    for n in 1..=n_max {
        let double = is_double_undamped(a, b, n);
        let (p, m) = if double {
            let c = Complex64::new(-b / 2.0, 0.0);
            (c, c)
        } else {
            undamped_pair(a, b, n)
        };
        for (sign, mu) in [(Sign::Plus, p), (Sign::Minus, m)] {
            let lambda = crate::model::principal_fourth_root(crate::model::lambda4(&params, mu));
            out.push(EigenRecord {
                point: crate::model::SpectralPoint {
                    mu,
                    lambda,
                    branch: crate::model::Branch::Principal,
                    residual: 0.0,
                },
                n: n as i32,
                sign,
                alg_mult_estimate: if double { 2 } else { 1 },
                provenance: Provenance::ClosedForm,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripAudit {
    pub region: ContourBox,
    pub count: i64,
    pub found: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDiagnostics {
    pub strips: Vec<StripAudit>,
    pub max_residual: f64,
    pub added_by_audit: usize,
    pub contour_total: i64,
    pub root_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub params: BeamParams,
    pub n_max: u32,
    pub eigenvalues: Vec<EigenRecord>,
    pub abscissa: f64,
    /// Set when the abscissa sits within 1e-6 of `-b/2`, where truncation
    /// in `n` could matter.
    pub abscissa_caveat: bool,
    pub diagnostics: SpectrumDiagnostics,
}

impl SpectrumResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,sign,re_mu,im_mu,residual,provenance\n");
        for r in &self.eigenvalues {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                r.sign.symbol(),
                crate::fmt_f64(r.mu().re),
                crate::fmt_f64(r.mu().im),
                crate::fmt_f64(r.point.residual),
                r.provenance.as_str()
            ));
        }
        out
    }

    pub fn find(&self, n: i32, sign: Sign) -> Option<&EigenRecord> {
        self.eigenvalues.iter().find(|r| r.n == n && r.sign == sign)
    }
}

pub fn spectral_abscissa(result: &SpectrumResult) -> f64 {
    result
        .eigenvalues
        .iter()
        .map(|r| r.mu().re)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn caveat(params: &BeamParams, abscissa: f64) -> bool {
    (abscissa + params.b / 2.0).abs() <= 1e-6
}

pub(crate) fn sort_records(records: &mut [EigenRecord]) {
    records.sort_by(|x, y| {
        x.mu()
            .im
            .abs()
            .total_cmp(&y.mu().im.abs())
            .then(y.mu().im.total_cmp(&x.mu().im))
            .then(y.mu().re.total_cmp(&x.mu().re))
    });
}

/// Horizontal strips (upper half plus a symmetric bottom strip) covering
/// `[left, 0] x [-top, top]`, edges halfway between undamped modes.
fn audit_strips(params: &BeamParams, n_max: u32) -> Vec<ContourBox> {
    let (a, b) = (params.a, params.b);
    let left = -(2.0 * b + 2.0 * params.alpha + params.alpha * params.alpha);
    let n0 = overdamped_modes(a, b);
    let top = if n_max > n0 {
        undamped_im(a, b, n_max) + 0.5 * a.sqrt() * PI * PI * (2 * n_max + 1) as f64
    } else {
        0.5 * a.sqrt() * PI * PI * (2 * n_max + 1) as f64
    };
    let mut edges = Vec::new();
    for m in (n0 + 1)..n_max {
        edges.push(0.5 * (undamped_im(a, b, m) + undamped_im(a, b, m + 1)));
    }
    edges.push(top);
    let mut strips = vec![ContourBox::new(
        Complex64::new(left, -edges[0]),
        Complex64::new(0.0, edges[0]),
    )];
    for w in edges.windows(2) {
        strips.push(ContourBox::new(
            Complex64::new(left, w[0]),
            Complex64::new(0.0, w[1]),
        ));
    }
    strips
}

fn in_region(bx: &ContourBox, mu: Complex64, bottom: bool) -> bool {
    if bottom {
        bx.contains(mu)
    } else {
        bx.contains(mu) && mu.im > 0.0
    }
}

fn mirror(bx: &ContourBox) -> ContourBox {
    ContourBox::new(bx.lo.conj(), bx.hi.conj())
}

fn basin_for(strips: &[ContourBox], mu: Complex64) -> Option<ContourBox> {
    if strips[0].contains(mu) {
        return Some(strips[0]);
    }
    strips[1..].iter().find_map(|s| {
        if s.contains(mu) {
            Some(*s)
        } else if s.contains(mu.conj()) {
            Some(mirror(s))
        } else {
            None
        }
    })
}

fn same_root(x: Complex64, y: Complex64) -> bool {
    (x - y).norm() <= 1e-8 * x.norm().max(1.0)
}

fn first_order_seed(params: &BeamParams, mu0: Complex64, n: u32) -> Complex64 {
    let s = (n as f64 * PI * params.xi).sin();
    let den = 2.0 * mu0 + params.b;
    if den.norm() < 1e-6 {
        return mu0;
    }
    let delta = -2.0 * (params.alpha * mu0 + params.beta) * s * s / den;
    let spacing = params.a.sqrt() * PI * PI * (2 * n + 1) as f64;
    if delta.norm() < 0.25 * spacing {
        mu0 + delta
    } else {
        mu0
    }
}

/// Eigenvalues for modes `1..=n_max`, refined and audited by winding numbers.
pub fn compute_spectrum(params: &BeamParams, n_max: u32) -> Result<SpectrumResult> {
    params.validate()?;
    if n_max < 1 {
        return Err(BeamError::InvalidParams("n_max must be at least 1".into()));
    }
    let series = EntireSeries::new(params.xi);
    let strips = audit_strips(params, n_max);
    let seeds = undamped_spectrum(params.a, params.b, n_max);
    let undamped = params.alpha == 0.0 && params.beta == 0.0;

    let mut records: Vec<EigenRecord> = if undamped {
        seeds
            .iter()
            .map(|s| {
                let mut r = *s;
                r.point.residual = residual(params, s.mu());
                r
            })
            .collect()
    } else {
        refine_seeds(params, &series, &seeds, &strips)?
    };

    let mut audits: Vec<StripAudit> = strips
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let (count, region) = count_zeros_robust(params, &series, s)?;
            let found = records
                .iter()
                .filter(|r| in_region(&region, r.mu(), k == 0))
                .count();
            Ok(StripAudit {
                region,
                count,
                found,
            })
        })
        .collect::<Result<_>>()?;

    let mut added = 0;
    for (k, audit) in audits.iter_mut().enumerate() {
        if audit.count == audit.found as i64 {
            continue;
        }
        if audit.count < audit.found as i64 {
            return Err(BeamError::AuditMismatch(format!(
                "strip {k}: winding {} but {} roots refined",
                audit.count, audit.found
            )));
        }
        let mut known: Vec<Complex64> = records.iter().map(|r| r.mu()).collect();
        let before = known.len();
        search_missing(params, &series, &audit.region, &mut known, 0)?;
        for &mu in &known[before..] {
            let rec = make_record(
                params,
                &series,
                mu,
                label_root(params, mu),
                Provenance::Contour,
            )?;
            records.push(rec);
            added += 1;
            if k != 0 {
                let conj = make_record(
                    params,
                    &series,
                    mu.conj(),
                    label_root(params, mu.conj()),
                    Provenance::Contour,
                )?;
                records.push(conj);
                added += 1;
            }
        }
        audit.found = records
            .iter()
            .filter(|r| in_region(&audit.region, r.mu(), k == 0))
            .count();
        if audit.count != audit.found as i64 {
            return Err(BeamError::AuditMismatch(format!(
                "strip {k}: winding {} but {} roots after subdivision",
                audit.count, audit.found
            )));
        }
    }

    sort_records(&mut records);
    let contour_total = audits
        .iter()
        .enumerate()
        .map(|(k, a)| if k == 0 { a.count } else { 2 * a.count })
        .sum();
    let abscissa = records
        .iter()
        .map(|r| r.mu().re)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_residual = records.iter().map(|r| r.point.residual).fold(0.0, f64::max);
    Ok(SpectrumResult {
        params: *params,
        n_max,
        abscissa,
        abscissa_caveat: caveat(params, abscissa),
        diagnostics: SpectrumDiagnostics {
            strips: audits,
            max_residual,
            added_by_audit: added,
            contour_total,
            root_total: records.len(),
        },
        eigenvalues: records,
    })
}

fn refine_seeds(
    params: &BeamParams,
    series: &EntireSeries,
    seeds: &[EigenRecord],
    strips: &[ContourBox],
) -> Result<Vec<EigenRecord>> {
    let direct: Vec<Option<Complex64>> = seeds
        .par_iter()
        .map(|s| {
            let mu0 = first_order_seed(params, s.mu(), s.n as u32);
            let basin = basin_for(strips, s.mu());
            refine_with(params, series, mu0, basin.as_ref()).ok()
        })
        .collect();

    // a branch is suspect when it failed or landed on another branch's root
    let mut suspect = vec![false; seeds.len()];
    for i in 0..seeds.len() {
        match direct[i] {
            None => suspect[i] = true,
            Some(mu) => {
                for j in 0..i {
                    if let Some(other) = direct[j] {
                        if same_root(mu, other)
                            && derivative_ratio(params, series, mu) >= refine::DOUBLE_ROOT_RATIO
                        {
                            suspect[i] = true;
                            suspect[j] = true;
                        }
                    }
                }
            }
        }
    }

    seeds
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let (mu, prov) = if suspect[i] {
                let path = track::continue_branch(params, s.mu(), s.n as u32, 64)?;
                (
                    path.last().map(|p| p.1).unwrap_or(s.mu()),
                    Provenance::Tracked,
                )
            } else {
                (direct[i].unwrap(), Provenance::Perturbative)
            };
            make_record(params, series, mu, (s.n, s.sign), prov)
        })
        .collect()
}

fn search_missing(
    params: &BeamParams,
    series: &EntireSeries,
    bx: &ContourBox,
    known: &mut Vec<Complex64>,
    depth: u32,
) -> Result<()> {
    for sub in bx.split() {
        let (count, region) = count_zeros_robust(params, series, &sub)?;
        let inside = known.iter().filter(|mu| region.contains(**mu)).count() as i64;
        if count <= inside {
            continue;
        }
        if count - inside == 1 {
            if let Ok(mu) = refine_with(params, series, region.center(), Some(&region)) {
                let mu = if mu.im.abs() < 1e-12 * mu.norm().max(1.0) {
                    Complex64::new(mu.re, 0.0)
                } else {
                    mu
                };
                if !known.iter().any(|k| same_root(*k, mu)) {
                    known.push(mu);
                    continue;
                }
            }
        }
        if depth + 1 >= AUDIT_MAX_DEPTH {
            return Err(BeamError::AuditMismatch(format!(
                "could not locate {} root(s) in {:?}",
                count - inside,
                region
            )));
        }
        search_missing(params, series, &region, known, depth + 1)?;
    }
    Ok(())
}

/// Pairs a computed root with the closest entry of a reference list.
pub fn nearest(reference: &[Complex64], mu: Complex64) -> (usize, f64) {
    reference
        .iter()
        .enumerate()
        .map(|(i, r)| (i, (r - mu).norm()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap_or((usize::MAX, f64::INFINITY))
}
