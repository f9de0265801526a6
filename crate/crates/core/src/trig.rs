//! Overflow-free trigonometric and hyperbolic evaluation.
//!
//! `sin`/`cos` are returned multiplied by `exp(-|Im z|)` and
//! `sinh`/`cosh` by `exp(-|Re z|)`, so every value has modulus at most 1.
//! Products over the arguments `lambda`, `lambda xi`, `lambda (1 - xi)`
//! then share the single factor `exp(|Re lambda| + |Im lambda|)`.

use num_complex::Complex64;

#[inline]
fn exp_shifted(z: Complex64, shift: f64) -> Complex64 {
    Complex64::from_polar((z.re - shift).exp(), z.im)
}

#[derive(Debug, Clone, Copy)]
pub struct ScaledTrig {
    pub sin: Complex64,
    pub cos: Complex64,
    pub sinh: Complex64,
    pub cosh: Complex64,
}

impl ScaledTrig {
    pub fn new(z: Complex64) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let si = z.im.abs();
        let sr = z.re.abs();
        let ep = exp_shifted(i * z, si);
        let em = exp_shifted(-i * z, si);
        let hp = exp_shifted(z, sr);
        let hm = exp_shifted(-z, sr);
        ScaledTrig {
            sin: (ep - em) / (2.0 * i),
            cos: (ep + em) / 2.0,
            sinh: (hp - hm) / 2.0,
            cosh: (hp + hm) / 2.0,
        }
    }
}

/// Scaled trig at `lambda`, `lambda xi` and `lambda (1 - xi)`.
#[derive(Debug, Clone, Copy)]
pub struct BeamTrig {
    pub full: ScaledTrig,
    pub left: ScaledTrig,
    pub right: ScaledTrig,
    /// `|Re lambda| + |Im lambda|`
    pub scale: f64,
}

impl BeamTrig {
    pub fn new(lambda: Complex64, xi: f64) -> Self {
        BeamTrig {
            full: ScaledTrig::new(lambda),
            left: ScaledTrig::new(lambda * xi),
            right: ScaledTrig::new(lambda * (1.0 - xi)),
            scale: lambda.re.abs() + lambda.im.abs(),
        }
    }

    /// `sinh(l) sin(l)`, scaled.
    pub fn p(&self) -> Complex64 {
        self.full.sinh * self.full.sin
    }

    /// `d/dl [sinh(l) sin(l)]`, scaled.
    pub fn dp(&self) -> Complex64 {
        self.full.cosh * self.full.sin + self.full.sinh * self.full.cos
    }

    /// `sin(l) sinh(l xi) sinh(l(1-xi)) - sinh(l) sin(l xi) sin(l(1-xi))`, scaled.
    pub fn bracket(&self) -> Complex64 {
        let (f, l, r) = (&self.full, &self.left, &self.right);
        f.sin * l.sinh * r.sinh - f.sinh * l.sin * r.sin
    }

    /// Derivative of [`Self::bracket`] with respect to `lambda`, scaled.
    pub fn dbracket(&self, xi: f64) -> Complex64 {
        let (f, l, r) = (&self.full, &self.left, &self.right);
        let eta = 1.0 - xi;
        let hyp =
            f.cos * l.sinh * r.sinh + xi * f.sin * l.cosh * r.sinh + eta * f.sin * l.sinh * r.cosh;
        let tri =
            f.cosh * l.sin * r.sin + xi * f.sinh * l.cos * r.sin + eta * f.sinh * l.sin * r.cos;
        hyp - tri
    }
}

/// Truncated Taylor coefficients in `z` for `f(c z)`.
fn taylor(c: f64, deg: usize, kind: u8) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    let mut term = 1.0; // c^k / k!
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            term *= c / k as f64;
        }
        let v = match kind {
            // sin
            0 => match k % 4 {
                1 => term,
                3 => -term,
                _ => 0.0,
            },
            // sinh
            _ => {
                if k % 2 == 1 {
                    term
                } else {
                    0.0
                }
            }
        };
        *slot = v;
    }
    out
}

fn mul(a: &[f64], b: &[f64], deg: usize) -> Vec<f64> {
    let mut out = vec![0.0; deg + 1];
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(deg + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Number of terms kept in the small-`lambda` expansions.
pub const SERIES_TERMS: usize = 18;

/// Coefficients `q_k` with `sinh(l) sin(l) / l^2 = sum q_k (l^4)^k`.
pub fn q_series() -> Vec<f64> {
    let mut out = Vec::with_capacity(SERIES_TERMS);
    let mut fact = 2.0; // (4k+2)!
    for k in 0..SERIES_TERMS {
        if k > 0 {
            let m = (4 * k + 2) as f64;
            fact *= (m - 3.0) * (m - 2.0) * (m - 1.0) * m;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * 2f64.powi(2 * k as i32 + 1) / fact);
    }
    out
}

/// Coefficients `m_k` with `bracket(l) / l^5 = sum m_k (l^4)^k`.
pub fn m_series(xi: f64) -> Vec<f64> {
    let deg = 4 * (SERIES_TERMS - 1) + 5;
    let eta = 1.0 - xi;
    let t1 = mul(
        &mul(&taylor(1.0, deg, 0), &taylor(xi, deg, 1), deg),
        &taylor(eta, deg, 1),
        deg,
    );
    let t2 = mul(
        &mul(&taylor(1.0, deg, 1), &taylor(xi, deg, 0), deg),
        &taylor(eta, deg, 0),
        deg,
    );
    (0..SERIES_TERMS)
        .map(|k| t1[4 * k + 5] - t2[4 * k + 5])
        .collect()
}

/// Evaluates `sum c_k w^k` and its derivative.
pub fn poly_eval(coef: &[f64], w: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in coef.iter().rev() {
        d = d * w + v;
        v = v * w + c;
    }
    (v, d)
}
