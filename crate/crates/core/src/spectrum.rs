//! Exact Laplace spectra of flat rectangular tori and flat Klein bottles,
//! with pointwise eigenfunction densities and level bookkeeping.
//!
//! Overview
//! - `torus_modes` / `klein_modes` enumerate one `EigenMode` entry per
//!   linearly independent real eigenfunction with frequency up to a cutoff.
//! - `mode_density` evaluates the squared-density |e(x)|^2 attributed to an
//!   entry, normalized so the surface integral of each eigenfunction is one.
//!   Entries that come in cosine/sine pairs in the x1 direction carry the
//!   pair-averaged density, which is what every pointwise-spectral quantity
//!   downstream (counting functions, traces) actually observes.
//! - `levels` groups modes into eigenvalue levels. When both squared side
//!   lengths are rational the grouping key is the exact rational
//!   (lambda / 2pi)^2 = m^2/a^2 + n^2/b^2; otherwise grouping falls back to a
//!   relative tolerance of 1e-12 and the result is flagged.
//! - `pointwise_weyl` is the pointwise counting function
//!   N_x(lambda) = sum_{lambda_j <= lambda} |e_j(x)|^2 and `level_sum` the
//!   density of a single level, erroring on non-eigenvalues.
//!
//! Design notes
//! - Normalization constants were fixed against a direct quadrature oracle
//!   (see the integration tests); the same convention makes the spectral heat
//!   kernel match the method-of-images expansion to machine precision.
//! - Klein-bottle eigenfunctions on the cylinder descend to the quotient only
//!   with matching parities: constant-in-x1 rows pair with even cosines in
//!   x2, even positive x1-frequencies with both parities, odd x1-frequencies
//!   only with odd sine rows (n >= 1).

use crate::geometry::{FlatKleinSpec, FlatTorusSpec, Point};
use crate::numerics::{recognize_rational, KahanSum};
use num_rational::Ratio;
use std::f64::consts::PI;
use thiserror::Error;

/// Relative tolerance used when matching a query frequency to a level.
pub const LEVEL_MATCH_TOL: f64 = 1e-9;

/// Errors from spectral enumeration and evaluation.
#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("{lambda} is not an eigenvalue frequency of this surface")]
    NotAnEigenvalue { lambda: f64 },
    #[error("mode (family {family:?}, m={m}, n={n}) does not belong to this surface")]
    ModeSurfaceMismatch {
        family: ModeFamily,
        m: u32,
        n: u32,
    },
    #[error("frequency cutoff {lambda_max} must be nonnegative and finite")]
    InvalidCutoff { lambda_max: f64 },
}

/// Eigenfunction families of the two flat models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeFamily {
    /// Klein bottle, constant in x1 (m = 0): a single function per n.
    KleinConstRow,
    /// Klein bottle, even positive x1-frequency: cosine/sine pairs in x1.
    KleinEvenRow,
    /// Klein bottle, odd x1-frequency with n >= 1: cosine/sine pairs in x1
    /// against odd sine rows in x2.
    KleinOddRow,
    /// Torus plane wave (real form).
    TorusMode,
}

/// One linearly independent real eigenfunction.
///
/// `lambda` is the frequency (square root of the Laplace eigenvalue) and
/// `lambda_sq_rational` the exact value of (lambda / 2pi)^2 as a rational,
/// available when both squared side lengths are rational.
#[derive(Clone, Debug)]
pub struct EigenMode {
    pub family: ModeFamily,
    pub m: u32,
    pub n: u32,
    pub lambda: f64,
    pub lambda_sq_rational: Option<Ratio<i64>>,
}

/// Which grouping key the level decomposition used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupingMode {
    /// Exact rational arithmetic on (lambda / 2pi)^2.
    Exact,
    /// Floating-point keys merged at relative tolerance 1e-12.
    Tolerance,
}

/// An eigenvalue level: shared frequency and its member modes.
#[derive(Clone, Debug)]
pub struct Level {
    pub lambda: f64,
    pub lambda_sq_rational: Option<Ratio<i64>>,
    pub members: Vec<EigenMode>,
}

/// A flat surface, the common input of the spectral operations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlatSurface {
    Torus(FlatTorusSpec),
    Klein(FlatKleinSpec),
}

impl FlatSurface {
    pub fn area(&self) -> f64 {
        match self {
            FlatSurface::Torus(t) => t.area(),
            FlatSurface::Klein(k) => k.area(),
        }
    }

    pub fn sides(&self) -> (f64, f64) {
        match self {
            FlatSurface::Torus(t) => (t.a, t.b),
            FlatSurface::Klein(k) => (k.a, k.b),
        }
    }

    pub fn reduce(&self, p: Point) -> Point {
        match self {
            FlatSurface::Torus(t) => t.reduce(p),
            FlatSurface::Klein(k) => k.reduce(p),
        }
    }
}

fn check_cutoff(lambda_max: f64) -> Result<(), SpectrumError> {
    if !(lambda_max >= 0.0) || !lambda_max.is_finite() {
        return Err(SpectrumError::InvalidCutoff { lambda_max });
    }
    Ok(())
}

/// Exact rational 1/s^2 for a side length s, when s^2 is recognizably
/// rational (denominators up to 1e4 at absolute tolerance 1e-12).
fn inv_square_rational(side: f64) -> Option<Ratio<i64>> {
    let s2 = side * side;
    let (p, q) = recognize_rational(s2, 10_000, 1e-12 * s2.max(1.0))?;
    if p <= 0 {
        return None;
    }
    Some(Ratio::new(q, p))
}

struct Enumerator {
    inv_a2: Option<Ratio<i64>>,
    inv_b2: Option<Ratio<i64>>,
    a: f64,
    b: f64,
}

impl Enumerator {
    fn new(a: f64, b: f64) -> Self {
        Enumerator {
            inv_a2: inv_square_rational(a),
            inv_b2: inv_square_rational(b),
            a,
            b,
        }
    }

    fn exact(&self) -> bool {
        self.inv_a2.is_some() && self.inv_b2.is_some()
    }

    /// (lambda/2pi)^2 for the pair (m, n), exactly when possible.
    fn key(&self, m: u32, n: u32) -> (f64, Option<Ratio<i64>>) {
        let q = match (self.inv_a2, self.inv_b2) {
            (Some(ia), Some(ib)) => {
                let m2 = Ratio::from_integer((m as i64) * (m as i64));
                let n2 = Ratio::from_integer((n as i64) * (n as i64));
                Some(m2 * ia + n2 * ib)
            }
            _ => None,
        };
        let approx = match q {
            Some(r) => (*r.numer() as f64) / (*r.denom() as f64),
            None => {
                let (mf, nf) = (m as f64, n as f64);
                mf * mf / (self.a * self.a) + nf * nf / (self.b * self.b)
            }
        };
        (approx, q)
    }
}

/// Runs `emit` for every (m, n, family) admissible on the surface with
/// frequency at most `lambda_max`, passing the per-entry count (1 for
/// singles, 2 for x1 cosine/sine pairs, or the torus sign multiplicity).
fn enumerate_pairs<F: FnMut(u32, u32, ModeFamily, u32, f64, Option<Ratio<i64>>)>(
    surface: &FlatSurface,
    lambda_max: f64,
    mut emit: F,
) {
    let (a, b) = surface.sides();
    let en = Enumerator::new(a, b);
    let qmax = {
        let v = lambda_max / (2.0 * PI);
        v * v * (1.0 + 1e-12)
    };
    let m_cap = (a * lambda_max / (2.0 * PI) * (1.0 + 1e-12)).floor() as u32;
    let n_cap = (b * lambda_max / (2.0 * PI) * (1.0 + 1e-12)).floor() as u32;
    for m in 0..=m_cap {
        for n in 0..=n_cap {
            let (q, key) = en.key(m, n);
            if q > qmax {
                // Frequencies grow with n at fixed m; no later n fits.
                break;
            }
            match surface {
                FlatSurface::Torus(_) => {
                    let count = match (m, n) {
                        (0, 0) => 1,
                        (_, 0) | (0, _) => 2,
                        _ => 4,
                    };
                    emit(m, n, ModeFamily::TorusMode, count, q, key);
                }
                FlatSurface::Klein(_) => {
                    if m == 0 {
                        emit(m, n, ModeFamily::KleinConstRow, 1, q, key);
                    } else if m % 2 == 0 {
                        emit(m, n, ModeFamily::KleinEvenRow, 2, q, key);
                    } else if n >= 1 {
                        emit(m, n, ModeFamily::KleinOddRow, 2, q, key);
                    }
                }
            }
        }
    }
}

fn modes_impl(surface: &FlatSurface, lambda_max: f64) -> Result<Vec<EigenMode>, SpectrumError> {
    check_cutoff(lambda_max)?;
    let mut out = Vec::new();
    enumerate_pairs(surface, lambda_max, |m, n, family, count, q, key| {
        let lambda = 2.0 * PI * q.sqrt();
        for _ in 0..count {
            out.push(EigenMode {
                family,
                m,
                n,
                lambda,
                lambda_sq_rational: key,
            });
        }
    });
    out.sort_by(|x, y| {
        x.lambda
            .partial_cmp(&y.lambda)
            .unwrap()
            .then(x.m.cmp(&y.m))
            .then(x.n.cmp(&y.n))
    });
    Ok(out)
}

/// All real eigenfunctions of the flat Klein bottle with frequency at most
/// `lambda_max`, one entry per independent function (pairs appear twice).
pub fn klein_modes(
    spec: &FlatKleinSpec,
    lambda_max: f64,
) -> Result<Vec<EigenMode>, SpectrumError> {
    modes_impl(&FlatSurface::Klein(*spec), lambda_max)
}

/// All real eigenfunctions of the flat torus with frequency at most
/// `lambda_max`; sign multiplicities of the lattice appear as repeated
/// entries over nonnegative (m, n).
pub fn torus_modes(
    spec: &FlatTorusSpec,
    lambda_max: f64,
) -> Result<Vec<EigenMode>, SpectrumError> {
    modes_impl(&FlatSurface::Torus(*spec), lambda_max)
}

/// Mode enumeration dispatched on the surface kind.
pub fn surface_modes(
    surface: &FlatSurface,
    lambda_max: f64,
) -> Result<Vec<EigenMode>, SpectrumError> {
    modes_impl(surface, lambda_max)
}

fn density_for(family: ModeFamily, m: u32, n: u32, x: Point, a: f64, b: f64) -> f64 {
    let ab = a * b;
    match family {
        ModeFamily::TorusMode => 1.0 / ab,
        ModeFamily::KleinConstRow | ModeFamily::KleinEvenRow => {
            let _ = m;
            if n == 0 {
                2.0 / ab
            } else {
                let c = (2.0 * PI * n as f64 * x.x2 / b).cos();
                4.0 / ab * c * c
            }
        }
        ModeFamily::KleinOddRow => {
            let s = (2.0 * PI * n as f64 * x.x2 / b).sin();
            4.0 / ab * s * s
        }
    }
}

/// Pointwise squared density |e(x)|^2 attributed to a mode entry, with the
/// eigenfunction normalized to unit surface integral. Cosine/sine pairs in
/// the x1 direction carry the pair-averaged value, which is independent of
/// x1 and is the only combination visible to pointwise spectral data.
pub fn mode_density(
    mode: &EigenMode,
    x: Point,
    surface: &FlatSurface,
) -> Result<f64, SpectrumError> {
    let (a, b) = surface.sides();
    let valid = match (surface, mode.family) {
        (FlatSurface::Torus(_), ModeFamily::TorusMode) => true,
        (FlatSurface::Klein(_), ModeFamily::KleinConstRow) => mode.m == 0,
        (FlatSurface::Klein(_), ModeFamily::KleinEvenRow) => mode.m > 0 && mode.m % 2 == 0,
        (FlatSurface::Klein(_), ModeFamily::KleinOddRow) => mode.m % 2 == 1 && mode.n >= 1,
        _ => false,
    };
    // The frequency must match what this surface assigns to (m, n).
    let (mf, nf) = (mode.m as f64, mode.n as f64);
    let expect = 2.0 * PI * (mf * mf / (a * a) + nf * nf / (b * b)).sqrt();
    if !valid || (mode.lambda - expect).abs() > LEVEL_MATCH_TOL * expect.max(1.0) {
        return Err(SpectrumError::ModeSurfaceMismatch {
            family: mode.family,
            m: mode.m,
            n: mode.n,
        });
    }
    let xr = surface.reduce(x);
    Ok(density_for(mode.family, mode.m, mode.n, xr, a, b))
}

/// Eigenvalue levels up to `lambda_max`, with the grouping mode actually used.
pub fn levels(
    surface: &FlatSurface,
    lambda_max: f64,
) -> Result<(Vec<Level>, GroupingMode), SpectrumError> {
    let modes = modes_impl(surface, lambda_max)?;
    let (a, b) = surface.sides();
    let exact = Enumerator::new(a, b).exact();
    let mut out: Vec<Level> = Vec::new();
    for mode in modes {
        let matches_last = out.last().map(|lv: &Level| match (lv.lambda_sq_rational, mode.lambda_sq_rational) {
            (Some(p), Some(q)) => p == q,
            _ => (lv.lambda - mode.lambda).abs() <= 1e-12 * lv.lambda.max(1.0),
        });
        if matches_last == Some(true) {
            out.last_mut().unwrap().members.push(mode);
        } else {
            out.push(Level {
                lambda: mode.lambda,
                lambda_sq_rational: mode.lambda_sq_rational,
                members: vec![mode],
            });
        }
    }
    // With exact keys, pin each level frequency to the rational it groups by,
    // so members agree bitwise.
    for lv in out.iter_mut() {
        if let Some(q) = lv.lambda_sq_rational {
            lv.lambda = 2.0 * PI * ((*q.numer() as f64) / (*q.denom() as f64)).sqrt();
            for m in lv.members.iter_mut() {
                m.lambda = lv.lambda;
            }
        }
    }
    Ok((
        out,
        if exact {
            GroupingMode::Exact
        } else {
            GroupingMode::Tolerance
        },
    ))
}

/// Compact level list for trace evaluation: (frequency, total density at x),
/// ascending in frequency. Streams the enumeration without materializing
/// mode records, so large cutoffs stay cheap.
pub fn density_levels(
    surface: &FlatSurface,
    x: Point,
    lambda_max: f64,
) -> Result<Vec<(f64, f64)>, SpectrumError> {
    check_cutoff(lambda_max)?;
    let (a, b) = surface.sides();
    let xr = surface.reduce(x);
    // Accumulate density per exact key when available, else per frequency.
    let mut entries: Vec<(f64, Option<Ratio<i64>>, f64)> = Vec::new();
    enumerate_pairs(surface, lambda_max, |m, n, family, count, q, key| {
        let dens = density_for(family, m, n, xr, a, b) * count as f64;
        entries.push((q, key, dens));
    });
    entries.sort_by(|p, r| p.0.partial_cmp(&r.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut last_key: Option<Option<Ratio<i64>>> = None;
    let mut last_q = f64::NEG_INFINITY;
    for (q, key, dens) in entries {
        let same = match (&last_key, &key) {
            (Some(Some(p)), Some(r)) => p == r,
            (Some(_), _) => (q - last_q).abs() <= 1e-12 * q.max(1.0),
            (None, _) => false,
        };
        if same {
            out.last_mut().unwrap().1 += dens;
        } else {
            out.push((2.0 * PI * q.sqrt(), dens));
            last_key = Some(key);
            last_q = q;
        }
    }
    Ok(out)
}

/// Pointwise spectral counting function
/// N_x(lambda) = sum_{lambda_j <= lambda} |e_j(x)|^2 (right-continuous).
pub fn pointwise_weyl(
    surface: &FlatSurface,
    x: Point,
    lambda: f64,
) -> Result<f64, SpectrumError> {
    let levels = density_levels(surface, x, lambda)?;
    let mut acc = KahanSum::new();
    for (_, d) in levels {
        acc.add(d);
    }
    Ok(acc.value())
}

/// Total squared density of the eigenvalue level at frequency `lambda0`.
/// Errors when `lambda0` is not an eigenvalue frequency (relative tolerance
/// 1e-9).
pub fn level_sum(
    surface: &FlatSurface,
    x: Point,
    lambda0: f64,
) -> Result<f64, SpectrumError> {
    if !(lambda0 >= 0.0) || !lambda0.is_finite() {
        return Err(SpectrumError::NotAnEigenvalue { lambda: lambda0 });
    }
    let margin = LEVEL_MATCH_TOL * lambda0.max(1.0);
    let levels = density_levels(surface, x, lambda0 + margin + 1e-9)?;
    let mut acc = KahanSum::new();
    let mut found = false;
    for (l, d) in levels {
        if (l - lambda0).abs() <= margin {
            acc.add(d);
            found = true;
        }
    }
    if !found {
        return Err(SpectrumError::NotAnEigenvalue { lambda: lambda0 });
    }
    Ok(acc.value())
}

/// Upper bound on the total mode density mass carried by frequencies in
/// [lo, hi], via a fattened-annulus count of the dual lattice. Used for
/// rigorous truncation certificates.
pub fn shell_mass_bound(surface: &FlatSurface, lo: f64, hi: f64) -> f64 {
    let (a, b) = surface.sides();
    // Dual lattice cell (2pi/a) x (2pi/b); half-diameter fattening.
    let rho = PI * (1.0 / (a * a) + 1.0 / (b * b)).sqrt();
    let outer = hi + rho;
    let inner = (lo - rho).max(0.0);
    let count = (a * b) / (4.0 * PI * PI) * PI * (outer * outer - inner * inner).max(0.0);
    let per_mode = match surface {
        FlatSurface::Torus(_) => 1.0 / (a * b),
        // Klein entries live over nonnegative (m, n) with at most two
        // functions of density at most 4/(ab) each; the full-lattice count
        // dominates the nonnegative-quadrant count.
        FlatSurface::Klein(_) => 8.0 / (a * b),
    };
    count * per_mode
}
