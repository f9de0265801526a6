//! Uniform grids on [0, 1], Simpson sums and finite-difference weights.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BeamError, Result};

pub const MIN_INTERVALS: usize = 8;

/// Samples on `x_i = i / m`, `i = 0..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub m: usize,
    pub samples: Vec<Complex64>,
    /// Node closest to the damper, if any.
    pub marked: Option<usize>,
}

impl GridFunction {
    pub fn new(m: usize, samples: Vec<Complex64>) -> Result<Self> {
        if m < MIN_INTERVALS {
            return Err(BeamError::InvalidParams(format!(
                "grid needs M >= 8, got {m}"
            )));
        }
        if samples.len() != m + 1 {
            return Err(BeamError::InvalidParams(format!(
                "{} samples for M = {m}",
                samples.len()
            )));
        }
        Ok(GridFunction {
            m,
            samples,
            marked: None,
        })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..=m).map(|i| f(i as f64 / m as f64)).collect();
        GridFunction::new(m, samples)
    }

    pub fn zeros(m: usize) -> Result<Self> {
        GridFunction::new(m, vec![Complex64::new(0.0, 0.0); m + 1])
    }

    pub fn with_mark(mut self, xi: f64) -> Self {
        self.marked = Some(((xi * self.m as f64).round() as usize).min(self.m));
        self
    }

    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.m as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(int_0^1 |f|^2)^{1/2}` by Simpson.
    pub fn l2(&self) -> f64 {
        let sq: Vec<Complex64> = self
            .samples
            .iter()
            .map(|z| Complex64::new(z.norm_sqr(), 0.0))
            .collect();
        simpson(&sq, self.h()).re.sqrt()
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> GridFunction {
        GridFunction {
            m: self.m,
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(i, z)| f(self.x(i), *z))
                .collect(),
            marked: self.marked,
        }
    }

    pub fn scaled(&self, c: Complex64) -> GridFunction {
        self.map(|_, z| z * c)
    }

    /// Columns `x,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (i, z) in self.samples.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::fmt_f64(self.x(i)),
                crate::fmt_f64(z.re),
                crate::fmt_f64(z.im)
            ));
        }
        out
    }
}

/// Composite Simpson on equally spaced samples. An odd interval count
/// closes with a 3/8 panel.
pub fn simpson(f: &[Complex64], h: f64) -> Complex64 {
    let n = f.len().saturating_sub(1);
    match n {
        0 => Complex64::new(0.0, 0.0),
        1 => (f[0] + f[1]) * (h / 2.0),
        2 => (f[0] + f[1] * 4.0 + f[2]) * (h / 3.0),
        3 => (f[0] + f[1] * 3.0 + f[2] * 3.0 + f[3]) * (3.0 * h / 8.0),
        _ if n.is_multiple_of(2) => {
            let mut s = f[0] + f[n];
            for (i, v) in f.iter().enumerate().take(n).skip(1) {
                s += v * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * (h / 3.0)
        }
        _ => simpson(&f[..n - 2], h) + simpson(&f[n - 3..], h),
    }
}

/// Simpson rule for `f` on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson_fn(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let v: Vec<Complex64> = (0..=n).map(|i| f(a + i as f64 * h)).collect();
    simpson(&v, h)
}

/// Finite-difference weights for the `order`-th derivative at `z` from
/// nodes `xs` (Fornberg's recursion).
pub fn fd_weights(z: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Applies `fd_weights` to a sampled function.
pub fn fd_apply(w: &[f64], f: &[Complex64]) -> Complex64 {
    w.iter().zip(f).map(|(a, b)| b * *a).sum()
}

/// One-sided derivative at `x0` from samples `x0 + dir * k * h`, `k = 0..points`.
pub fn one_sided(
    f: impl Fn(f64) -> Complex64,
    x0: f64,
    h: f64,
    dir: f64,
    order: usize,
    points: usize,
) -> Complex64 {
    let xs: Vec<f64> = (0..points).map(|k| dir * k as f64 * h).collect();
    let w = fd_weights(0.0, &xs, order);
    let v: Vec<Complex64> = xs.iter().map(|x| f(x0 + x)).collect();
    fd_apply(&w, &v)
}

/// Fourth derivative, 7-point central, fourth order.
pub fn d4_central(f: &[Complex64; 7], h: f64) -> Complex64 {
    (-f[0] + f[1] * 12.0 - f[2] * 39.0 + f[3] * 56.0 - f[4] * 39.0 + f[5] * 12.0 - f[6])
        / (6.0 * h.powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn grid_invariants() {
        assert!(GridFunction::zeros(4).is_err());
        assert!(GridFunction::new(8, vec![c(0.0); 8]).is_err());
        let g = GridFunction::from_fn(10, c).unwrap().with_mark(0.33);
        assert_eq!(g.marked, Some(3));
        assert_eq!(g.h(), 0.1);
        assert!(g.to_csv().starts_with("x,re,im\n0.0000000000000000e0,"));
    }

    #[test]
    fn simpson_exact_on_cubics() {
        for n in [2, 3, 4, 5, 7, 10] {
            let h = 1.0 / n as f64;
            let v: Vec<Complex64> = (0..=n).map(|i| c((i as f64 * h).powi(3))).collect();
            assert!((simpson(&v, h) - 0.25).norm() < 1e-14, "n={n}");
        }
        let s = simpson_fn(|x| c(x.sin()), 0.0, 1.0, 64);
        assert!((s.re - (1.0 - 1f64.cos())).abs() < 1e-9);
    }

    #[test]
    fn fornberg_weights() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let xs: Vec<f64> = (-3..=3).map(|k| k as f64).collect();
        let w = fd_weights(0.0, &xs, 4);
        let expect = [-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b / 6.0).abs() < 1e-12);
        }
        let d = one_sided(|x| c(x.exp()), 0.2, 1e-2, -1.0, 3, 7);
        assert!((d.re - 0.2f64.exp()).abs() < 1e-7);
    }
}
