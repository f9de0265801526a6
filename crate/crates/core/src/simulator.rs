//! Modal Galerkin truncation on the basis `sin(n pi x)`.
//!
//! State is `z = (y, p)` with `y_n = omega_n c_n`, `p_n = c_n'` and
//! `omega_n = sqrt(a) n^2 pi^2`, so the beam energy is `|z|^2 / 4` and the
//! undamped part of the generator is skew.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};
use crate::params::BeamParams;

/// Above this `cond_1(V)` the spectral propagator is abandoned.
pub const COND_LIMIT: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct ModalSystem {
    pub n: usize,
    pub matrix: DMatrix<f64>,
    pub coupling: DVector<f64>,
    pub omega: DVector<f64>,
    pub params: BeamParams,
}

pub fn assemble_modal(params: &BeamParams, n: usize) -> Result<ModalSystem> {
    params.validate()?;
    if n < 2 {
        return Err(BeamError::InvalidParams(format!("mode count {n} < 2")));
    }
    let s = DVector::from_fn(n, |k, _| ((k + 1) as f64 * PI * params.xi).sin());
    let omega = DVector::from_fn(n, |k, _| {
        let m = (k + 1) as f64;
        params.a.sqrt() * m * m * PI * PI
    });
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, n + i)] = omega[i];
        a[(n + i, i)] = -omega[i];
        a[(n + i, n + i)] = -params.b;
        for j in 0..n {
            a[(n + i, n + j)] -= 2.0 * params.alpha * s[i] * s[j];
            a[(n + i, j)] -= 2.0 * params.beta * s[i] * s[j] / omega[j];
        }
    }
    Ok(ModalSystem {
        n,
        matrix: a,
        coupling: s,
        omega,
        params: *params,
    })
}

/// Initial modal coefficients `c(0)` and `c'(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalInit {
    pub c: Vec<f64>,
    pub dc: Vec<f64>,
}

impl ModalInit {
    /// `c_n = 1/n^2`, `c_n' = 0`.
    pub fn smooth(n: usize) -> Self {
        ModalInit {
            c: (1..=n).map(|k| 1.0 / (k * k) as f64).collect(),
            dc: vec![0.0; n],
        }
    }

    pub fn single(n: usize, mode: usize) -> Self {
        let mut c = vec![0.0; n];
        c[mode - 1] = 1.0;
        ModalInit {
            c,
            dc: vec![0.0; n],
        }
    }
}

impl ModalSystem {
    pub fn state(&self, init: &ModalInit) -> Result<DVector<f64>> {
        if init.c.len() != self.n || init.dc.len() != self.n {
            return Err(BeamError::InvalidParams(format!(
                "initial data has {} / {} coefficients, expected {}",
                init.c.len(),
                init.dc.len(),
                self.n
            )));
        }
        let mut z = DVector::zeros(2 * self.n);
        for k in 0..self.n {
            z[k] = self.omega[k] * init.c[k];
            z[self.n + k] = init.dc[k];
        }
        Ok(z)
    }

    pub fn modal(&self, z: &DVector<f64>) -> ModalInit {
        ModalInit {
            c: (0..self.n).map(|k| z[k] / self.omega[k]).collect(),
            dc: (0..self.n).map(|k| z[self.n + k]).collect(),
        }
    }

    pub fn energy(&self, z: &DVector<f64>) -> f64 {
        0.25 * z.norm_squared()
    }

    /// Largest eigenvalue of `(A + A^T)/2`; nonpositive means dissipative.
    pub fn symmetric_part_max(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.max()
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let dim = 2 * self.n;
        let schur =
            Schur::try_new(self.matrix.clone(), f64::EPSILON, 200 * dim).ok_or_else(|| {
                BeamError::EigensolverFailure(format!("Schur iteration on {dim}x{dim}"))
            })?;
        let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
        sort_spectrum(&mut ev);
        Ok(ev)
    }

    fn secular_vector(&self, mu: Complex64) -> Option<DVector<Complex64>> {
        let p = &self.params;
        let coupled = p.alpha != 0.0 || p.beta != 0.0;
        let d: Vec<Complex64> = (0..self.n)
            .map(|k| mu * mu + p.b * mu + self.omega[k] * self.omega[k])
            .collect();
        let (kmin, dmin) = d
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .map(|(k, v)| (k, v.norm()))?;
        let scale = mu.norm_sqr() + self.omega[kmin].powi(2);
        let mut v = DVector::zeros(2 * self.n);
        if dmin < 1e-10 * scale && (!coupled || self.coupling[kmin].abs() < 1e-10) {
            v[kmin] = Complex64::new(self.omega[kmin], 0.0);
            v[self.n + kmin] = mu;
        } else if coupled {
            for k in 0..self.n {
                let c = self.coupling[k] / d[k];
                v[k] = self.omega[k] * c;
                v[self.n + k] = mu * c;
            }
        } else {
            return None;
        }
        Some(v)
    }

    /// Right eigenvector for the eigenvalue `mu`, unit 2-norm.
    ///
    /// Uses the rank-one structure first and falls back to inverse iteration.
    pub fn eigenvector(&self, mu: Complex64) -> Result<DVector<Complex64>> {
        let ac = self.matrix.map(|x| Complex64::new(x, 0.0));
        let tol = 1e-9 * (self.matrix.norm() + mu.norm());
        if let Some(v) = self.secular_vector(mu) {
            let v = v.normalize();
            if (&ac * &v - &v * mu).norm() <= tol {
                return Ok(v);
            }
        }
        let dim = 2 * self.n;
        let shift = mu + Complex64::new(1e-10, 1e-10) * mu.norm().max(1.0);
        let lu = (ac.clone() - DMatrix::identity(dim, dim) * shift).lu();
        let mut v = DVector::from_element(dim, Complex64::new(1.0, 0.0)).normalize();
        for _ in 0..4 {
            v = lu
                .solve(&v)
                .ok_or_else(|| BeamError::EigensolverFailure("singular shifted matrix".into()))?
                .normalize();
        }
        if (&ac * &v - &v * mu).norm() > 1e3 * tol {
            return Err(BeamError::EigensolverFailure(format!(
                "no eigenvector found for {mu}"
            )));
        }
        Ok(v)
    }
}

/// Ascending `|Im|`, then `Im`, then `Re`.
pub fn sort_spectrum(ev: &mut [Complex64]) {
    ev.sort_by(|x, y| {
        x.im.abs()
            .total_cmp(&y.im.abs())
            .then(x.im.total_cmp(&y.im))
            .then(x.re.total_cmp(&y.re))
    });
}

pub fn modal_eigen_oracle(params: &BeamParams, n: usize) -> Result<Vec<Complex64>> {
    if n < 8 {
        return Err(BeamError::InvalidParams(format!(
            "oracle needs N >= 8, got {n}"
        )));
    }
    assemble_modal(params, n)?.eigenvalues()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Propagation {
    Spectral,
    MatrixExponential,
}

/// Sampled solution. Only the leading `kept` modal coefficients are stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub velocity_xi: Vec<f64>,
    pub displacement_xi: Vec<f64>,
    /// `\int_0^1 u_t^2 dx`.
    pub kinetic: Vec<f64>,
    pub kept: usize,
    /// Row-major, `kept` entries per sample.
    pub c: Vec<f64>,
    pub dc: Vec<f64>,
    pub propagation: Propagation,
    pub condition: f64,
    pub max_frequency: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,energy,u_t_xi");
        for k in 1..=self.kept {
            out.push_str(&format!(",c{k}"));
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}",
                crate::fmt_f64(self.times[i]),
                crate::fmt_f64(self.energy[i]),
                crate::fmt_f64(self.velocity_xi[i])
            ));
            for k in 0..self.kept {
                out.push(',');
                out.push_str(&crate::fmt_f64(self.c[i * self.kept + k]));
            }
            out.push('\n');
        }
        out
    }

    /// Largest relative one-step energy increase.
    pub fn max_energy_increase(&self) -> f64 {
        self.energy
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

struct Recorder<'a> {
    sys: &'a ModalSystem,
    traj: Trajectory,
}

impl Recorder<'_> {
    fn push(&mut self, t: f64, z: &DVector<f64>) {
        let n = self.sys.n;
        let s = &self.sys.coupling;
        let mut vel = 0.0;
        let mut disp = 0.0;
        let mut kin = 0.0;
        for k in 0..n {
            let c = z[k] / self.sys.omega[k];
            let dc = z[n + k];
            vel += s[k] * dc;
            disp += s[k] * c;
            kin += dc * dc;
        }
        let tr = &mut self.traj;
        tr.times.push(t);
        tr.energy.push(self.sys.energy(z));
        tr.velocity_xi.push(vel);
        tr.displacement_xi.push(disp);
        tr.kinetic.push(0.5 * kin);
        for k in 0..tr.kept {
            tr.c.push(z[k] / self.sys.omega[k]);
            tr.dc.push(z[n + k]);
        }
    }
}

/// Spectral data `A = V diag(mu) V^{-1}`.
pub struct ModalBasis {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub inverse: DMatrix<Complex64>,
    pub condition: f64,
}

impl ModalSystem {
    pub fn basis(&self) -> Result<ModalBasis> {
        let values = self.eigenvalues()?;
        let dim = 2 * self.n;
        let mut vectors = DMatrix::zeros(dim, dim);
        for (j, mu) in values.iter().enumerate() {
            vectors.set_column(j, &self.eigenvector(*mu)?);
        }
        let inverse = vectors
            .clone()
            .try_inverse()
            .ok_or(BeamError::IllConditionedModes(f64::INFINITY))?;
        let condition = norm1(&vectors) * norm1(&inverse);
        Ok(ModalBasis {
            values,
            vectors,
            inverse,
            condition,
        })
    }
}

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Samples `samples` equally spaced states on `[0, t_end]`, keeping up to
/// eight modal coefficients.
pub fn simulate(
    params: &BeamParams,
    init: &ModalInit,
    t_end: f64,
    samples: usize,
    n: usize,
) -> Result<Trajectory> {
    simulate_keep(params, init, t_end, samples, n, n.min(8))
}

pub fn simulate_keep(
    params: &BeamParams,
    init: &ModalInit,
    t_end: f64,
    samples: usize,
    n: usize,
    kept: usize,
) -> Result<Trajectory> {
    if t_end.is_nan() || t_end <= 0.0 || samples < 2 {
        return Err(BeamError::InvalidParams(format!(
            "need T > 0 and at least two samples (T = {t_end}, samples = {samples})"
        )));
    }
    let sys = assemble_modal(params, n)?;
    let z0 = sys.state(init)?;
    let dt = t_end / (samples - 1) as f64;
    let kept = kept.min(n);
    let basis = sys.basis().ok();
    let condition = basis.as_ref().map_or(f64::INFINITY, |b| b.condition);
    let max_frequency = basis
        .as_ref()
        .map(|b| b.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max))
        .unwrap_or_else(|| sys.omega.max());
    let spectral = condition <= COND_LIMIT;
    let mut rec = Recorder {
        sys: &sys,
        traj: Trajectory {
            times: Vec::with_capacity(samples),
            energy: Vec::with_capacity(samples),
            velocity_xi: Vec::with_capacity(samples),
            displacement_xi: Vec::with_capacity(samples),
            kinetic: Vec::with_capacity(samples),
            kept,
            c: Vec::with_capacity(samples * kept),
            dc: Vec::with_capacity(samples * kept),
            propagation: if spectral {
                Propagation::Spectral
            } else {
                Propagation::MatrixExponential
            },
            condition,
            max_frequency,
        },
    };
    match basis.filter(|_| spectral) {
        Some(basis) => {
            let w0 = &basis.inverse * z0.map(|x| Complex64::new(x, 0.0));
            let dim = 2 * n;
            let mut w = DVector::zeros(dim);
            for k in 0..samples {
                let t = k as f64 * dt;
                for j in 0..dim {
                    w[j] = w0[j] * (basis.values[j] * t).exp();
                }
                let z = (&basis.vectors * &w).map(|x| x.re);
                rec.push(t, &z);
            }
        }
        None => {
            let step = (&sys.matrix * dt).exp();
            let mut z = z0;
            rec.push(0.0, &z);
            for k in 1..samples {
                z = &step * z;
                rec.push(k as f64 * dt, &z);
            }
        }
    }
    Ok(rec.traj)
}

/// Removes the spectral components of the slowest-decaying eigenvalue
/// (and its conjugate) from the initial data.
pub fn deflate_slowest(params: &BeamParams, init: &ModalInit) -> Result<(ModalInit, Complex64)> {
    let sys = assemble_modal(params, init.c.len())?;
    let basis = sys.basis()?;
    if basis.condition > COND_LIMIT {
        return Err(BeamError::IllConditionedModes(basis.condition));
    }
    let top = basis
        .values
        .iter()
        .map(|v| v.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let z0 = sys.state(init)?.map(|x| Complex64::new(x, 0.0));
    let mut w = &basis.inverse * z0;
    let mut slowest = basis.values[0];
    for (j, mu) in basis.values.iter().enumerate() {
        if (mu.re - top).abs() <= 1e-9 * top.abs().max(1.0) {
            w[j] = Complex64::new(0.0, 0.0);
            slowest = *mu;
        }
    }
    let z = (&basis.vectors * w).map(|x| x.re);
    Ok((sys.modal(&z), slowest))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub max_mismatch: f64,
    pub samples_per_period: f64,
    pub checked: usize,
}

/// Five-point centered `dE/dt` against
/// `-(b/2) sum c'^2 - alpha u_t(xi)^2 - beta u(xi) u_t(xi)`.
///
/// Mismatch is measured relative to `max(|rhs|, b E)` at each sample.
pub fn dissipation_check(traj: &Trajectory, params: &BeamParams) -> Result<DissipationReport> {
    if traj.len() < 5 {
        return Err(BeamError::SamplingTooCoarse(format!(
            "{} samples",
            traj.len()
        )));
    }
    let h = traj.step();
    let per_period = if traj.max_frequency > 0.0 {
        2.0 * PI / traj.max_frequency / h
    } else {
        f64::INFINITY
    };
    if per_period < 20.0 {
        return Err(BeamError::SamplingTooCoarse(format!(
            "{per_period:.1} samples per shortest period (need 20)"
        )));
    }
    let e = &traj.energy;
    let mut worst: f64 = 0.0;
    for k in 2..traj.len() - 2 {
        let lhs = (e[k - 2] - 8.0 * e[k - 1] + 8.0 * e[k + 1] - e[k + 2]) / (12.0 * h);
        let v = traj.velocity_xi[k];
        let rhs = -params.b * traj.kinetic[k]
            - params.alpha * v * v
            - params.beta * traj.displacement_xi[k] * v;
        let scale = rhs.abs().max(params.b * e[k]);
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(DissipationReport {
        max_mismatch: worst,
        samples_per_period: per_period,
        checked: traj.len() - 4,
    })
}

/// Half the least-squares slope of `ln E` over the trailing `tail_fraction`.
pub fn fit_decay_rate(traj: &Trajectory, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(BeamError::InvalidParams(format!(
            "tail fraction {tail_fraction} outside (0, 1)"
        )));
    }
    let t_end = *traj.times.last().ok_or(BeamError::EnergyUnderflow)?;
    let start = t_end * (1.0 - tail_fraction);
    let (t, y): (Vec<f64>, Vec<f64>) = traj
        .times
        .iter()
        .zip(&traj.energy)
        .filter(|(t, _)| **t >= start)
        .map(|(t, e)| (*t, *e))
        .unzip();
    if t.len() < 2 {
        return Err(BeamError::SamplingTooCoarse(
            "fewer than two samples in fit window".into(),
        ));
    }
    if y.iter().any(|e| *e < 1e-280) {
        return Err(BeamError::EnergyUnderflow);
    }
    let y: Vec<f64> = y.iter().map(|e| e.ln()).collect();
    Ok(0.5 * least_squares_slope(&t, &y))
}

pub(crate) fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn undamped_pair(a: f64, b: f64, n: usize) -> [Complex64; 2] {
        let w2 = a * (n as f64 * PI).powi(4);
        let d = Complex64::new(b * b - 4.0 * w2, 0.0).sqrt();
        [(-b + d) / 2.0, (-b - d) / 2.0]
    }

    #[test]
    fn undamped_oracle_is_closed_form() {
        let p = BeamParams::damped(1.0, 1.0, 0.0, 0.3).unwrap();
        let ev = modal_eigen_oracle(&p, 16).unwrap();
        assert_eq!(ev.len(), 32);
        for n in 1..=16 {
            for mu in undamped_pair(1.0, 1.0, n) {
                let best = ev
                    .iter()
                    .map(|v| (v - mu).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(best <= 1e-10 * mu.norm().max(1.0), "n={n} {best}");
            }
        }
    }

    #[test]
    fn even_modes_decouple_at_midpoint() {
        let p = BeamParams::damped(1.0, 1.0, 0.7, 0.5).unwrap();
        let sys = assemble_modal(&p, 8).unwrap();
        for k in (1..8).step_by(2) {
            assert!(sys.coupling[k].abs() < 1e-15);
        }
        let ev = sys.eigenvalues().unwrap();
        for mu in undamped_pair(1.0, 1.0, 2) {
            assert!(ev.iter().any(|v| (v - mu).norm() < 1e-9));
        }
    }

    #[test]
    fn spectrum_is_conjugate_closed() {
        let p = BeamParams::new(1.0, 1.0, 0.3, 0.2, 0.41).unwrap();
        let ev = modal_eigen_oracle(&p, 12).unwrap();
        for v in &ev {
            assert!(ev
                .iter()
                .any(|w| (w - v.conj()).norm() < 1e-8 * v.norm().max(1.0)));
        }
    }

    #[test]
    fn symmetric_part_is_dissipative() {
        let p = BeamParams::damped(1.0, 1.0, 0.5, FRAC_1_SQRT_2).unwrap();
        let sys = assemble_modal(&p, 24).unwrap();
        assert!(sys.symmetric_part_max() <= 1e-10);
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let p = BeamParams::new(1.0, 1.0, 0.2, 0.1, FRAC_1_SQRT_2).unwrap();
        let sys = assemble_modal(&p, 10).unwrap();
        let basis = sys.basis().unwrap();
        let ac = sys.matrix.map(|x| Complex64::new(x, 0.0));
        let lam = DMatrix::from_diagonal(&DVector::from_vec(basis.values.clone()));
        let back = &basis.vectors * lam * &basis.inverse;
        assert!((back - ac).norm() < 1e-8 * sys.matrix.norm());
        assert!(basis.condition < COND_LIMIT);
    }

    #[test]
    fn conservative_limit_keeps_energy() {
        // b = 0 bypasses validation on purpose: integrator check only
        let p = BeamParams {
            a: 1.0,
            b: 0.0,
            alpha: 0.0,
            beta: 0.0,
            xi: 0.3,
        };
        let sys = assemble_modal(&BeamParams { b: 1.0, ..p }, 6).unwrap();
        let mut m = sys.matrix.clone();
        for k in 0..6 {
            m[(6 + k, 6 + k)] = 0.0;
        }
        let z0 = sys.state(&ModalInit::smooth(6)).unwrap();
        let step = (m * 0.01).exp();
        let mut z = z0.clone();
        for _ in 0..1000 {
            z = &step * z;
        }
        assert!((z.norm_squared() - z0.norm_squared()).abs() < 1e-10 * z0.norm_squared());
    }

    #[test]
    fn single_mode_matches_scalar_solution() {
        let (a, b) = (1.0, 1.0);
        let p = BeamParams::damped(a, b, 0.0, 0.3).unwrap();
        let tr = simulate(&p, &ModalInit::single(2, 1), 5.0, 4001, 2).unwrap();
        let w = a.sqrt() * PI * PI;
        let nu = (w * w - b * b / 4.0).sqrt();
        for (i, t) in tr.times.iter().enumerate() {
            let e = (-b * t / 2.0).exp();
            let c = e * ((nu * t).cos() + b / (2.0 * nu) * (nu * t).sin());
            let dc = -e * (w * w / nu) * (nu * t).sin();
            let energy = 0.25 * (dc * dc + w * w * c * c);
            assert!((tr.energy[i] - energy).abs() <= 1e-9 * energy.max(1e-300) + 1e-15);
            assert!((tr.c[i * tr.kept] - c).abs() < 1e-9);
        }
        let rep = dissipation_check(&tr, &p).unwrap();
        assert!(rep.max_mismatch < 1e-4, "{rep:?}");
    }

    #[test]
    fn single_mode_decay_rate() {
        let p = BeamParams::damped(1.0, 1.0, 0.0, 0.3).unwrap();
        let tr = simulate(&p, &ModalInit::single(2, 1), 40.0, 8001, 2).unwrap();
        // E oscillates around the envelope; fit over whole periods
        let omega = fit_decay_rate(&tr, 0.5).unwrap();
        assert!((omega + 0.5).abs() < 1e-3, "{omega}");
    }

    #[test]
    fn zero_state_dissipation() {
        let p = BeamParams::damped(1.0, 1.0, 0.1, 0.3).unwrap();
        let tr = simulate(
            &p,
            &ModalInit {
                c: vec![0.0; 3],
                dc: vec![0.0; 3],
            },
            1.0,
            400,
            3,
        )
        .unwrap();
        assert_eq!(dissipation_check(&tr, &p).unwrap().max_mismatch, 0.0);
        assert!(matches!(
            fit_decay_rate(&tr, 0.5),
            Err(BeamError::EnergyUnderflow)
        ));
    }

    #[test]
    fn coarse_sampling_is_rejected() {
        let p = BeamParams::damped(1.0, 1.0, 0.1, 0.3).unwrap();
        let tr = simulate(&p, &ModalInit::smooth(8), 1.0, 50, 8).unwrap();
        assert!(matches!(
            dissipation_check(&tr, &p),
            Err(BeamError::SamplingTooCoarse(_))
        ));
    }

    #[test]
    fn double_root_uses_fallback() {
        // b = 2 sqrt(a) pi^2 gives a Jordan block in mode 1
        let p = BeamParams::damped(1.0, 2.0 * PI * PI, 0.0, 0.3).unwrap();
        let tr = simulate(&p, &ModalInit::smooth(3), 1.0, 2000, 3).unwrap();
        assert_eq!(tr.propagation, Propagation::MatrixExponential);
        assert!(tr.max_energy_increase() <= 1e-9);
    }

    #[test]
    fn deflated_init_decays_faster() {
        let p = BeamParams::damped(1.0, 1.0, 0.05, FRAC_1_SQRT_2).unwrap();
        let n = 8;
        let sys = assemble_modal(&p, n).unwrap();
        let abscissa = sys
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|v| v.re)
            .fold(f64::MIN, f64::max);
        let (init, _) = deflate_slowest(&p, &ModalInit::smooth(n)).unwrap();
        let tr = simulate(&p, &init, 40.0, 20001, n).unwrap();
        let omega = fit_decay_rate(&tr, 0.5).unwrap();
        assert!(omega < abscissa - 1e-4, "{omega} vs {abscissa}");
    }
}
