//! Numeric utilities shared across the crate.
//!
//! Overview
//! - Compensated (Kahan–Babuška–Neumaier) accumulators so large mode sums are
//!   insensitive to how the terms are partitioned (drift well under 1e-12).
//! - Composite 16-point Gauss–Legendre panels for smooth and mildly
//!   oscillatory integrands; nodes computed once by Newton iteration on the
//!   Legendre polynomial.
//! - Adaptive Simpson quadrature with an absolute-error target, for window
//!   transforms where the caller pre-splits by wavelength.
//! - Degree-8 truncated Taylor arithmetic ("jets") used to evaluate exact
//!   high-order derivatives of windowed weights for tail certificates.
//! - Continued-fraction recognition of rationals for exact level grouping.

use num_complex::Complex64;
use std::sync::OnceLock;
use thiserror::Error;

/// Compensated scalar accumulator (Kahan–Babuška–Neumaier).
///
/// The correction term recovers low-order bits lost to cancellation, so sums
/// of 1e5..1e6 terms agree across arbitrary partitions to ~1e-15 relative.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Compensated complex accumulator built from two scalar accumulators.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Quadrature failure: the requested absolute tolerance was not reached.
#[derive(Debug, Error)]
#[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
pub struct QuadratureError {
    pub achieved: f64,
    pub requested: f64,
}

fn legendre_p_and_dp(n: usize, x: f64) -> (f64, f64) {
    // Three-term recurrence for P_n and the standard derivative identity.
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of 16-point Gauss–Legendre quadrature on [-1, 1].
pub fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static GL: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    GL.get_or_init(|| {
        let n = 16usize;
        let mut nodes = [0.0f64; 16];
        let mut weights = [0.0f64; 16];
        for i in 0..n {
            // Chebyshev-like initial guess, then Newton to machine precision.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..60 {
                let (p, dp) = legendre_p_and_dp(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_p_and_dp(n, x);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Composite Gauss–Legendre integration of a complex integrand over [a, b]
/// with `panels` equal panels. Exponentially accurate once each panel spans
/// no more than a few wavelengths of the integrand.
pub fn integrate_gl_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
) -> Complex64 {
    let (nodes, weights) = gauss_legendre_16();
    let h = (b - a) / panels as f64;
    let mut acc = KahanComplex::new();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc.add(f(mid + 0.5 * h * x) * (0.5 * h * w));
        }
    }
    acc.value()
}

/// Real-valued composite Gauss–Legendre integration.
pub fn integrate_gl<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    integrate_gl_complex(|t| Complex64::new(f(t), 0.0), a, b, panels).re
}

fn simpson(fa: Complex64, fm: Complex64, fb: Complex64, h: f64) -> Complex64 {
    (fa + fm * 4.0 + fb) * (h / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 {
        let err = delta.norm() / 15.0;
        if err > *worst {
            *worst = err;
        }
        return left + right + delta / 15.0;
    }
    if delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let l = adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst);
    let r = adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst);
    l + r
}

/// Adaptive Simpson quadrature with an absolute-error target.
///
/// Callers integrating oscillatory factors should pre-split the interval so
/// each call covers at most a few oscillation periods; the adaptive recursion
/// then resolves the remaining structure. Errors out (with the worst achieved
/// panel estimate) if the depth budget is exhausted before the target.
pub fn adaptive_simpson_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64, QuadratureError> {
    if a >= b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    let mut worst = 0.0f64;
    let v = adaptive_simpson_rec(&mut f, a, b, fa, fm, fb, whole, tol, 40, &mut worst);
    if worst > tol {
        return Err(QuadratureError {
            achieved: worst,
            requested: tol,
        });
    }
    Ok(v)
}

/// Truncated Taylor series of degree 8: coefficients of h^0 .. h^8 around an
/// expansion point. Products are truncated convolutions; `sqrt` uses the
/// standard recurrence. Coefficient k equals the k-th derivative over k!.
#[derive(Clone, Copy, Debug)]
pub struct Jet8(pub [f64; 9]);

impl Jet8 {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; 9];
        c[0] = v;
        Jet8(c)
    }

    pub fn mul(&self, other: &Jet8) -> Jet8 {
        let mut c = [0.0; 9];
        for i in 0..9 {
            for j in 0..(9 - i) {
                c[i + j] += self.0[i] * other.0[j];
            }
        }
        Jet8(c)
    }

    pub fn add(&self, other: &Jet8) -> Jet8 {
        let mut c = [0.0; 9];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = self.0[k] + other.0[k];
        }
        Jet8(c)
    }

    pub fn scale(&self, s: f64) -> Jet8 {
        let mut c = self.0;
        for ck in c.iter_mut() {
            *ck *= s;
        }
        Jet8(c)
    }

    /// Square root of a series with positive leading coefficient.
    pub fn sqrt(&self) -> Jet8 {
        let mut b = [0.0; 9];
        b[0] = self.0[0].sqrt();
        for k in 1..9 {
            let mut s = 0.0;
            for j in 1..k {
                s += b[j] * b[k - j];
            }
            b[k] = (self.0[k] - s) / (2.0 * b[0]);
        }
        Jet8(b)
    }

    /// sinh(t0 + h) expanded in h.
    pub fn sinh_at(t0: f64) -> Jet8 {
        let (s, c) = (t0.sinh(), t0.cosh());
        let mut coef = [0.0; 9];
        let mut fact = 1.0;
        for (k, ck) in coef.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *ck = if k % 2 == 0 { s } else { c } / fact;
        }
        Jet8(coef)
    }

    /// cos(omega (u0 + h) + phase) expanded in h.
    pub fn cos_at(omega: f64, u0: f64, phase: f64) -> Jet8 {
        let mut coef = [0.0; 9];
        let mut fact = 1.0;
        let theta = omega * u0 + phase;
        for (k, ck) in coef.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            // d^k/du^k cos(omega u + phase) = omega^k cos(omega u + phase + k pi/2)
            *ck = omega.powi(k as i32) * (theta + 0.5 * std::f64::consts::PI * k as f64).cos()
                / fact;
        }
        Jet8(coef)
    }

    /// exp(-(u0 + h)^2 / 2) expanded in h, via the Hermite-style recurrence
    /// f' = -u f applied to the truncated series.
    pub fn gauss_at(u0: f64) -> Jet8 {
        let f0 = (-0.5 * u0 * u0).exp();
        let mut c = [0.0; 9];
        c[0] = f0;
        // derivative recurrence: (k+1) c_{k+1} = -(u0 c_k + c_{k-1})
        for k in 0..8 {
            let prev = if k == 0 { 0.0 } else { c[k - 1] };
            c[k + 1] = -(u0 * c[k] + prev) / (k as f64 + 1.0);
        }
        Jet8(c)
    }

    /// sqrt(t0 + h) expanded in h (t0 > 0), by the series square root.
    pub fn sqrt_t_at(t0: f64) -> Jet8 {
        let mut lin = [0.0; 9];
        lin[0] = t0;
        lin[1] = 1.0;
        Jet8(lin).sqrt()
    }

    /// Series of f(s h) given the series of f(h): multiplies coefficient k by
    /// s^k. This is the chain rule for an affine argument rescaling.
    pub fn scale_arg(&self, s: f64) -> Jet8 {
        let mut c = self.0;
        let mut p = 1.0;
        for ck in c.iter_mut() {
            *ck *= p;
            p *= s;
        }
        Jet8(c)
    }

    /// k-th derivative value (coefficient times k!).
    pub fn derivative(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.0[k] * fact
    }
}

/// Best rational p/q with |x - p/q| <= tol and q <= max_den, by continued
/// fractions. Returns None when no such approximation exists (irrational
/// input at the working precision).
pub fn recognize_rational(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut h0, mut h1) = (1i64, v.floor() as i64);
    let (mut k0, mut k1) = (0i64, 1i64);
    v -= v.floor();
    for _ in 0..48 {
        if (h1 as f64 / k1 as f64 - x.abs()).abs() <= tol {
            let p = if neg { -h1 } else { h1 };
            return Some((p, k1));
        }
        if v.abs() < 1e-18 {
            break;
        }
        v = 1.0 / v;
        let a = v.floor();
        if a >= 1e18 {
            break;
        }
        v -= a;
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    if (h1 as f64 / k1 as f64 - x.abs()).abs() <= tol {
        let p = if neg { -h1 } else { h1 };
        Some((p, k1))
    } else {
        None
    }
}

/// Upper bound for the one-sided Gaussian tail integral:
/// int_z^inf e^{-s^2/2} ds <= e^{-z^2/2} / z for z > 0.
pub fn normal_tail_bound(z: f64) -> f64 {
    (-0.5 * z * z).exp() / z
}

/// Upper bound for the full theta sum over the integer lattice:
/// sum_{m in Z} e^{-c m^2} <= 1 + sqrt(pi / c) for c > 0.
pub fn theta_1d_bound(c: f64) -> f64 {
    1.0 + (std::f64::consts::PI / c).sqrt()
}

/// Stable arccosh(1 + s) for s >= 0, accurate near s = 0.
pub fn acosh_1p(s: f64) -> f64 {
    (s + (s * (s + 2.0)).sqrt()).ln_1p()
}
