//! Damped eigenfunctions and their distance to the undamped modes.
//!
//! With `eta = 1 - xi` and `p = exp((xi - 2)|l|) / |l|^2`,
//!
//! ```text
//! x <= xi: phi = p [sinh l sin(l eta) sin(l x)     - sin l sinh(l eta) sinh(l x)]
//! x >= xi: phi = p [sinh l sin(l xi) sin(l (1-x))  - sin l sinh(l xi) sinh(l (1-x))]
//! ```
//!
//! Both halves vanish with their second derivatives at the ends, agree at
//! `xi`, and the third-derivative jump at `xi` equals `-(alpha/a) mu phi(xi)`
//! exactly when `l` solves the characteristic equation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};
use crate::grid::{d4_central, one_sided, simpson, GridFunction};
use crate::model::{EigenRecord, Sign, SpectralPoint};
use crate::params::BeamParams;
use crate::simulator::least_squares_slope;
use crate::spectrum::{compute_spectrum, residual, undamped_pair};
use crate::trig::ScaledTrig;

pub const DEFAULT_GRID: usize = 1024;
const MAX_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionPair {
    pub first: GridFunction,
    pub second: GridFunction,
    pub mu: Complex64,
    pub lambda: Complex64,
}

impl EigenfunctionPair {
    fn new(first: GridFunction, mu: Complex64, lambda: Complex64) -> Self {
        let second = first.scaled(mu);
        EigenfunctionPair {
            first,
            second,
            mu,
            lambda,
        }
    }
}

/// `(t1, t2)` with `phi = t1 - t2` and `phi'' = -l^2 (t1 + t2)`.
fn phi_parts(lambda: Complex64, xi: f64, x: f64) -> (Complex64, Complex64) {
    let (u, v) = if x <= xi {
        (1.0 - xi, x)
    } else {
        (xi, 1.0 - x)
    };
    let full = ScaledTrig::new(lambda);
    let fixed = ScaledTrig::new(lambda * u);
    let var = ScaledTrig::new(lambda * v);
    let (re, im) = (lambda.re.abs(), lambda.im.abs());
    let r = lambda.norm();
    let base = (xi - 2.0) * r - 2.0 * r.ln();
    let t1 = full.sinh * fixed.sin * var.sin * (base + re + im * (u + v)).exp();
    let t2 = full.sin * fixed.sinh * var.sinh * (base + im + re * (u + v)).exp();
    (t1, t2)
}

pub fn phi_at(lambda: Complex64, xi: f64, x: f64) -> Complex64 {
    let (t1, t2) = phi_parts(lambda, xi, x);
    t1 - t2
}

pub fn phi_dd_at(lambda: Complex64, xi: f64, x: f64) -> Complex64 {
    let (t1, t2) = phi_parts(lambda, xi, x);
    -lambda * lambda * (t1 + t2)
}

/// Damped eigenfunction sampled on `grid_size` intervals.
pub fn eval_phi(
    params: &BeamParams,
    point: &SpectralPoint,
    grid_size: usize,
) -> Result<EigenfunctionPair> {
    let res = residual(params, point.mu);
    if res.is_nan() || res > MAX_RESIDUAL {
        return Err(BeamError::ResidualTooLarge(res));
    }
    let l = point.lambda;
    let st = ScaledTrig::new(l);
    if st.sin.norm() < 1e-14 || st.sinh.norm() < 1e-14 {
        return Err(BeamError::DegenerateTrig);
    }
    let first = GridFunction::from_fn(grid_size, |x| phi_at(l, params.xi, x))?.with_mark(params.xi);
    Ok(EigenfunctionPair::new(first, point.mu, l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiForm {
    /// `l -> n pi`.
    Real,
    /// `l -> i n pi`, taken as the limit of the eigenfunction.
    Imaginary,
}

/// `exp(n pi (xi - 2)) sinh(n pi) / (n pi)^2 * sin(n pi (1 - xi))`.
fn psi_amplitude(n: i32, xi: f64) -> f64 {
    let k = n as f64 * PI;
    let growth = 0.5 * ((k.abs() * (xi - 1.0)).exp() - (k.abs() * (xi - 3.0)).exp()) * k.signum();
    growth * (k * (1.0 - xi)).sin() / (k * k)
}

pub fn psi_at(n: i32, xi: f64, x: f64, form: PsiForm) -> Complex64 {
    let v = psi_amplitude(n, xi) * (n as f64 * PI * x).sin();
    match form {
        PsiForm::Real => Complex64::new(v, 0.0),
        PsiForm::Imaginary => Complex64::new(0.0, -v),
    }
}

fn undamped_mu(params: &BeamParams, n: i32, sign: Sign) -> Complex64 {
    let (p, m) = undamped_pair(params.a, params.b, n.unsigned_abs());
    match sign {
        Sign::Plus => p,
        Sign::Minus => m,
    }
}

/// Comparison mode `Psi_n^±`, second component scaled by the undamped `mu_n^±`.
pub fn eval_psi(
    n: i32,
    sign: Sign,
    params: &BeamParams,
    grid_size: usize,
) -> Result<EigenfunctionPair> {
    eval_psi_form(n, sign, params, grid_size, PsiForm::Real)
}

pub fn eval_psi_form(
    n: i32,
    sign: Sign,
    params: &BeamParams,
    grid_size: usize,
    form: PsiForm,
) -> Result<EigenfunctionPair> {
    if n == 0 {
        return Err(BeamError::InvalidParams(
            "mode index must be nonzero".into(),
        ));
    }
    let first = GridFunction::from_fn(grid_size, |x| psi_at(n, params.xi, x, form))?;
    let lambda = Complex64::new(n as f64 * PI, 0.0);
    let lambda = match form {
        PsiForm::Real => lambda,
        PsiForm::Imaginary => lambda * Complex64::new(0.0, 1.0),
    };
    Ok(EigenfunctionPair::new(
        first,
        undamped_mu(params, n, sign),
        lambda,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HnormDiff {
    /// `min_c |c Phi - Psi/|Psi||_H^2`.
    pub aligned: f64,
    /// `|Phi - Psi|_H^2` with the printed prefactors.
    pub raw: f64,
    /// Aligned value on the half grid.
    pub half_grid: f64,
}

/// Samples `(u, u'', v)` for a state on the split Simpson nodes.
struct State {
    u: Vec<Complex64>,
    udd: Vec<Complex64>,
    v: Vec<Complex64>,
}

fn split_nodes(xi: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let even = |k: f64| ((k.round() as usize).max(2) + 1) & !1;
    let m1 = even(xi * m as f64);
    let m2 = even((1.0 - xi) * m as f64);
    let left = (0..=m1).map(|i| xi * i as f64 / m1 as f64).collect();
    let right = (0..=m2)
        .map(|i| xi + (1.0 - xi) * i as f64 / m2 as f64)
        .collect();
    (left, right)
}

fn inner(a: f64, xs: &(Vec<f64>, Vec<f64>), s: &State, t: &State) -> Complex64 {
    let n1 = xs.0.len();
    let integrand: Vec<Complex64> = (0..s.u.len())
        .map(|i| a * s.udd[i] * t.udd[i].conj() + s.v[i] * t.v[i].conj())
        .collect();
    let h1 = xs.0[1] - xs.0[0];
    let h2 = xs.1[1] - xs.1[0];
    simpson(&integrand[..n1], h1) + simpson(&integrand[n1..], h2)
}

fn diff_at(params: &BeamParams, rec: &EigenRecord, m: usize) -> (f64, f64) {
    let xs = split_nodes(params.xi, m);
    let all: Vec<f64> = xs.0.iter().chain(&xs.1).copied().collect();
    let l = rec.point.lambda;
    let mu = rec.mu();
    let n = rec.n;
    let mu0 = undamped_mu(params, n, rec.sign);
    let k2 = (n as f64 * PI).powi(2);
    let eval_phi = |x: f64| (phi_at(l, params.xi, x), phi_dd_at(l, params.xi, x));
    let mut phi = State {
        u: vec![],
        udd: vec![],
        v: vec![],
    };
    let mut psi = State {
        u: vec![],
        udd: vec![],
        v: vec![],
    };
    for x in &all {
        let (p, pdd) = eval_phi(*x);
        phi.u.push(p);
        phi.udd.push(pdd);
        phi.v.push(mu * p);
        let q = psi_at(n, params.xi, *x, PsiForm::Real);
        psi.u.push(q);
        psi.udd.push(-k2 * q);
        psi.v.push(mu0 * q);
    }
    let pp = inner(params.a, &xs, &phi, &phi).re;
    let qq = inner(params.a, &xs, &psi, &psi).re;
    let c = inner(params.a, &xs, &psi, &phi) / (pp * qq.sqrt());
    let qn = 1.0 / qq.sqrt();
    let combine = |f: &dyn Fn(Complex64, Complex64) -> Complex64| State {
        u: phi.u.iter().zip(&psi.u).map(|(a, b)| f(*a, *b)).collect(),
        udd: phi
            .udd
            .iter()
            .zip(&psi.udd)
            .map(|(a, b)| f(*a, *b))
            .collect(),
        v: phi.v.iter().zip(&psi.v).map(|(a, b)| f(*a, *b)).collect(),
    };
    let aligned = combine(&|p, q| c * p - q * qn);
    let raw = combine(&|p, q| p - q);
    (
        inner(params.a, &xs, &aligned, &aligned).re,
        inner(params.a, &xs, &raw, &raw).re,
    )
}

/// Squared energy-norm distance between the damped eigenvector and `Psi_n^±`.
pub fn hnorm_diff(params: &BeamParams, rec: &EigenRecord, grid_size: usize) -> Result<HnormDiff> {
    if rec.n == 0 {
        return Err(BeamError::InvalidParams("record has no mode index".into()));
    }
    if grid_size < 16 {
        return Err(BeamError::InvalidParams(format!(
            "grid {grid_size} too small"
        )));
    }
    let (aligned, raw) = diff_at(params, rec, grid_size);
    let (half, _) = diff_at(params, rec, grid_size / 2);
    let gap = (aligned - half).abs();
    if gap > 0.01 * aligned.abs() && gap > 1e-14 {
        return Err(BeamError::GridTooCoarse(gap / aligned.abs().max(1e-300)));
    }
    Ok(HnormDiff {
        aligned,
        raw,
        half_grid: half,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszEntry {
    pub n: i32,
    pub sign: Sign,
    pub mu: Complex64,
    pub aligned: f64,
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RieszReport {
    pub params: BeamParams,
    pub n0: u32,
    pub n_max: u32,
    pub entries: Vec<RieszEntry>,
    /// Slope of `ln aligned` against `ln n` over the `+` branch.
    pub exponent: f64,
    pub partial_sums: Vec<f64>,
    /// Power-law estimate of the sum beyond `n_max`, relative to the partial sum.
    pub tail_ratio: f64,
    pub verdict: String,
    /// Every distance below 1e-10: nothing to fit.
    pub trivial: bool,
}

impl RieszReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn consistent(&self) -> bool {
        self.verdict == "consistent with quadratic closeness"
    }
}

pub fn riesz_tail_report(params: &BeamParams, n0: u32, n_max: u32) -> Result<RieszReport> {
    riesz_tail_report_grid(params, n0, n_max, DEFAULT_GRID)
}

pub fn riesz_tail_report_grid(
    params: &BeamParams,
    n0: u32,
    n_max: u32,
    grid: usize,
) -> Result<RieszReport> {
    if n0 < 1 || n_max < n0 + 1 {
        return Err(BeamError::InvalidParams(format!(
            "need 1 <= n0 < n_max (got {n0}, {n_max})"
        )));
    }
    let spectrum = compute_spectrum(params, n_max)?;
    let records: Vec<EigenRecord> = spectrum
        .eigenvalues
        .iter()
        .filter(|r| r.n >= n0 as i32 && r.n <= n_max as i32)
        .copied()
        .collect();
    let mut entries: Vec<RieszEntry> = records
        .par_iter()
        .map(|r| {
            let d = hnorm_diff(params, r, grid)?;
            Ok(RieszEntry {
                n: r.n,
                sign: r.sign,
                mu: r.mu(),
                aligned: d.aligned,
                raw: d.raw,
            })
        })
        .collect::<Result<_>>()?;
    entries.sort_by(|x, y| x.n.cmp(&y.n).then(x.sign.cmp(&y.sign)));

    let plus: Vec<&RieszEntry> = entries.iter().filter(|e| e.sign == Sign::Plus).collect();
    let trivial = entries.iter().all(|e| e.aligned <= 1e-10);
    let (exponent, tail_ratio) = if trivial {
        (f64::NAN, 0.0)
    } else {
        let (lx, ly): (Vec<f64>, Vec<f64>) = plus
            .iter()
            .filter(|e| e.aligned > 0.0)
            .map(|e| ((e.n as f64).ln(), e.aligned.ln()))
            .unzip();
        let p = least_squares_slope(&lx, &ly);
        let mx = lx.iter().sum::<f64>() / lx.len() as f64;
        let my = ly.iter().sum::<f64>() / ly.len() as f64;
        let c = (my - p * mx).exp();
        let total: f64 = entries.iter().map(|e| e.aligned).sum();
        // both signs, integral bound of sum_{n > N} 2 c n^p
        let tail = if p < -1.0 {
            2.0 * c * (n_max as f64 + 0.5).powf(p + 1.0) / (-p - 1.0)
        } else {
            f64::INFINITY
        };
        (p, tail / total)
    };
    let mut acc = 0.0;
    let partial_sums = (n0..=n_max)
        .map(|n| {
            acc += entries
                .iter()
                .filter(|e| e.n == n as i32)
                .map(|e| e.aligned)
                .sum::<f64>();
            acc
        })
        .collect();
    let verdict = if trivial || exponent <= -1.5 {
        "consistent with quadratic closeness"
    } else {
        "not established"
    };
    Ok(RieszReport {
        params: *params,
        n0,
        n_max,
        entries,
        exponent,
        partial_sums,
        tail_ratio,
        verdict: verdict.into(),
        trivial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiResiduals {
    /// `max |a phi'''' + (b mu + mu^2) phi|` away from `xi`, over `max |phi|`.
    pub ode: f64,
    pub boundary: f64,
    pub continuity: f64,
    pub second_continuity: f64,
    /// Error of the third-derivative jump against `-(alpha/a) mu phi(xi)`, relative.
    pub jump: f64,
}

/// Finite-difference residual suite on `m` intervals (stencils at stride 4).
pub fn phi_residuals(params: &BeamParams, point: &SpectralPoint, m: usize) -> PhiResiduals {
    let l = point.lambda;
    let xi = params.xi;
    let f = |x: f64| phi_at(l, xi, x);
    let h = 4.0 / m as f64;
    let norm = (0..=m)
        .map(|i| f(i as f64 / m as f64).norm())
        .fold(0.0, f64::max);
    let k = params.b * point.mu + point.mu * point.mu;
    let mut ode: f64 = 0.0;
    for i in 0..=m {
        let x = i as f64 / m as f64;
        if x - 3.0 * h < 0.0 || x + 3.0 * h > 1.0 || (x - xi).abs() <= 3.0 * h {
            continue;
        }
        let s: [Complex64; 7] = std::array::from_fn(|j| f(x + (j as f64 - 3.0) * h));
        let r = params.a * d4_central(&s, h) + k * s[3];
        ode = ode.max(r.norm());
    }
    let hs = 1.0 / 64.0;
    let side = |dir: f64, order: usize| {
        one_sided(
            |x| side_eval(l, xi, x, dir),
            xi,
            hs * dir.abs(),
            dir,
            order,
            7,
        )
    };
    let left3 = side(-1.0, 3);
    let right3 = side(1.0, 3);
    let target = -(params.alpha / params.a) * point.mu * f(xi);
    let jump_scale = left3.norm().max(right3.norm()).max(target.norm());
    let boundary = [f(0.0), f(1.0), phi_dd_at(l, xi, 0.0), phi_dd_at(l, xi, 1.0)]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    PhiResiduals {
        ode: ode / norm,
        boundary: boundary / norm,
        continuity: (side_eval(l, xi, xi, -1.0) - side_eval(l, xi, xi, 1.0)).norm() / norm,
        second_continuity: (side(-1.0, 2) - side(1.0, 2)).norm() / (norm * l.norm_sqr().max(1.0)),
        jump: ((right3 - left3) - target).norm() / jump_scale,
    }
}

/// Evaluates the branch belonging to one side of `xi`, even past it.
fn side_eval(l: Complex64, xi: f64, x: f64, dir: f64) -> Complex64 {
    let eta = 1.0 - xi;
    let (a, c) = if dir < 0.0 {
        (
            l.sinh() * (l * eta).sin() * (l * x).sin(),
            l.sin() * (l * eta).sinh() * (l * x).sinh(),
        )
    } else {
        (
            l.sinh() * (l * xi).sin() * (l * (1.0 - x)).sin(),
            l.sin() * (l * xi).sinh() * (l * (1.0 - x)).sinh(),
        )
    };
    let r = l.norm();
    (a - c) * ((xi - 2.0) * r).exp() / (r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn params(alpha: f64) -> BeamParams {
        BeamParams::damped(1.0, 1.0, alpha, FRAC_1_SQRT_2).unwrap()
    }

    fn first_plus(p: &BeamParams, n: i32) -> EigenRecord {
        let spec = compute_spectrum(p, n.unsigned_abs() + 1).unwrap();
        *spec.find(n, Sign::Plus).unwrap()
    }

    #[test]
    fn pair_structure_and_boundary() {
        let p = params(0.05);
        let rec = first_plus(&p, 1);
        let pair = eval_phi(&p, &rec.point, 512).unwrap();
        let top = pair.first.max_abs();
        for (u, v) in pair.first.samples.iter().zip(&pair.second.samples) {
            assert!((v - pair.mu * u).norm() <= 1e-13 * top * pair.mu.norm());
        }
        assert_eq!(pair.first.samples[0].norm(), 0.0);
        assert!(pair.first.samples[512].norm() <= 1e-10 * top);
    }

    #[test]
    fn continuous_across_the_damper() {
        let p = params(0.05);
        let l = first_plus(&p, 2).point.lambda;
        let left = phi_at(l, p.xi, p.xi);
        let right = phi_at(l, p.xi, p.xi + 1e-15);
        assert!((left - right).norm() <= 1e-10 * left.norm().max(1e-300));
    }

    #[test]
    fn satisfies_the_beam_equation() {
        let p = params(0.05);
        let rec = first_plus(&p, 1);
        let r = phi_residuals(&p, &rec.point, 512);
        assert!(r.ode <= 1e-4, "{r:?}");
        assert!(r.boundary <= 1e-10 && r.continuity <= 1e-10, "{r:?}");
        assert!(r.jump <= 1e-3, "{r:?}");
    }

    #[test]
    fn refuses_non_roots() {
        let p = params(0.05);
        let pt = crate::model::lambda_from_mu(&p, Complex64::new(-0.3, 20.0)).unwrap();
        assert!(matches!(
            eval_phi(&p, &pt, 256),
            Err(BeamError::ResidualTooLarge(_))
        ));
    }

    #[test]
    fn psi_is_a_sine_mode() {
        let p = params(0.0);
        for n in [1, 3, 6] {
            let psi = eval_psi(n, Sign::Plus, &p, 600).unwrap();
            let amp = psi_amplitude(n, p.xi);
            for k in 0..=n {
                let x = k as f64 / n as f64;
                assert!(psi_at(n, p.xi, x, PsiForm::Real).norm() <= 1e-12 * amp.abs());
            }
            assert!((psi.first.max_abs() - amp.abs()).abs() <= 1e-3 * amp.abs());
        }
    }

    #[test]
    fn psi_prefactor_is_bounded() {
        let mut prev = f64::INFINITY;
        for n in 1..=32 {
            let amp = psi_amplitude(n, FRAC_1_SQRT_2).abs();
            assert!(amp.is_finite() && amp < 1.0);
            let envelope = (n as f64 * PI * (FRAC_1_SQRT_2 - 1.0)).exp();
            assert!(envelope < prev);
            prev = envelope;
        }
    }

    #[test]
    fn damped_mode_tends_to_psi() {
        let mut gaps = Vec::new();
        for alpha in [1e-2, 1e-3, 1e-4] {
            let p = params(alpha);
            let phi = eval_phi(&p, &first_plus(&p, 1).point, 512).unwrap();
            let psi = eval_psi(1, Sign::Plus, &p, 512).unwrap();
            let gap = phi
                .first
                .samples
                .iter()
                .zip(&psi.first.samples)
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            gaps.push(gap);
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    #[test]
    fn undamped_modes_coincide_with_psi() {
        let p = params(0.0);
        for n in [1, 4, 9] {
            let d = hnorm_diff(&p, &first_plus(&p, n), 1024).unwrap();
            assert!(d.aligned <= 1e-10, "{n}: {d:?}");
        }
    }

    #[test]
    fn riesz_report_trivial_when_undamped() {
        let r = riesz_tail_report_grid(&params(0.0), 4, 12, 512).unwrap();
        assert!(r.trivial && r.consistent());
        assert!(r.entries.iter().all(|e| e.aligned <= 1e-10));
    }

    #[test]
    fn riesz_report_small_damping() {
        let r = riesz_tail_report(&params(0.05), 4, 24).unwrap();
        assert!(r.consistent(), "{}", r.verdict);
        assert!(r.tail_ratio < 0.05);
        assert!(r.exponent < -1.0);
    }

    #[test]
    fn riesz_report_large_damping_still_runs() {
        let r = riesz_tail_report_grid(&params(5.0), 2, 10, 512).unwrap();
        assert!(r.exponent.is_finite());
        assert!(!r.to_json().is_empty());
    }
}
