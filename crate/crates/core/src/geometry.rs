//! Geometric primitives: the hyperbolic upper half-plane, real Möbius
//! transformations with word bookkeeping, and flat surface specifications.
//!
//! Overview
//! - `HPoint` is a point of the upper half-plane; constructors reject
//!   nonpositive imaginary parts.
//! - `MobiusElement` wraps a real 2x2 matrix of determinant one together with
//!   the generator word that produced it. Matrices act projectively, so each
//!   element is canonicalized up to overall sign before comparison.
//! - `FlatTorusSpec` / `FlatKleinSpec` describe rectangular flat models with
//!   side lengths a, b; points are stored reduced to the fundamental domain.
//! - `klein_canonicalize` reduces a point of the Klein bottle to the
//!   canonical representative (0, x2*) with x2* in [0, b/4], the orbit
//!   invariant that pointwise spectral data can actually see.
//!
//! Design notes
//! - Distances use arccosh(1 + s) with a log1p-based evaluation, stable for
//!   nearby points.
//! - Determinants are validated to 1e-12 at construction and renormalized
//!   after products so long compositions stay on the unit-determinant sheet.

use crate::numerics::acosh_1p;
use num_complex::Complex64;
use thiserror::Error;

/// Determinant tolerance for accepting a matrix as unimodular.
pub const DET_TOL: f64 = 1e-12;

/// Errors from geometric constructors and maps.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point ({re}, {im}) is not in the upper half-plane")]
    NotUpperHalfPlane { re: f64, im: f64 },
    #[error("matrix determinant {det} is not 1 within {DET_TOL}")]
    NotUnimodular { det: f64 },
    #[error("side length {value} must be positive and finite")]
    InvalidSideLength { value: f64 },
}

/// A point of the hyperbolic upper half-plane (im > 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    re: f64,
    im: f64,
}

impl HPoint {
    /// Builds a point, rejecting arguments outside the open half-plane.
    pub fn new(re: f64, im: f64) -> Result<Self, GeometryError> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(GeometryError::NotUpperHalfPlane { re, im });
        }
        Ok(HPoint { re, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// The imaginary unit i, the usual basepoint.
    pub fn i() -> Self {
        HPoint { re: 0.0, im: 1.0 }
    }
}

/// Geodesic distance on the upper half-plane:
/// d(z, w) = arccosh(1 + |z - w|^2 / (2 Im z Im w)).
pub fn hyperbolic_distance(z: HPoint, w: HPoint) -> f64 {
    let dre = z.re - w.re;
    let dim = z.im - w.im;
    let s = (dre * dre + dim * dim) / (2.0 * z.im * w.im);
    acosh_1p(s)
}

/// A real Möbius transformation of determinant one, acting on the upper
/// half-plane, together with the generator word that produced it.
///
/// Words are sequences of signed generator indices: +k for the k-th generator
/// (1-based), -k for its inverse. The identity carries the empty word.
#[derive(Clone, Debug)]
pub struct MobiusElement {
    m: [f64; 4],
    word: Vec<i32>,
}

impl MobiusElement {
    /// Builds an element from row-major entries [a, b, c, d], validating the
    /// determinant to within `DET_TOL` (scaled by the magnitude of the entry
    /// products, which sets the noise floor of the determinant itself) and
    /// renormalizing it exactly onto the unit-determinant sheet.
    pub fn new(entries: [f64; 4], word: Vec<i32>) -> Result<Self, GeometryError> {
        let det = entries[0] * entries[3] - entries[1] * entries[2];
        let scale = (entries[0] * entries[3])
            .abs()
            .max((entries[1] * entries[2]).abs())
            .max(1.0);
        if !det.is_finite() || (det - 1.0).abs() > DET_TOL * scale {
            return Err(GeometryError::NotUnimodular { det });
        }
        let s = det.sqrt();
        let m = [
            entries[0] / s,
            entries[1] / s,
            entries[2] / s,
            entries[3] / s,
        ];
        Ok(MobiusElement { m, word })
    }

    pub fn identity() -> Self {
        MobiusElement {
            m: [1.0, 0.0, 0.0, 1.0],
            word: Vec::new(),
        }
    }

    pub fn entries(&self) -> [f64; 4] {
        self.m
    }

    pub fn word(&self) -> &[i32] {
        &self.word
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[3]
    }

    /// Group product self * other (apply `other` first), with concatenated
    /// word and a determinant renormalization to absorb rounding drift.
    pub fn compose(&self, other: &MobiusElement) -> MobiusElement {
        let a = &self.m;
        let b = &other.m;
        let mut m = [
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ];
        let det = m[0] * m[3] - m[1] * m[2];
        let s = det.sqrt();
        for e in m.iter_mut() {
            *e /= s;
        }
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        MobiusElement { m, word }
    }

    /// Inverse element: adjugate matrix, reversed and negated word.
    pub fn inverse(&self) -> MobiusElement {
        let m = [self.m[3], -self.m[1], -self.m[2], self.m[0]];
        let word = self.word.iter().rev().map(|&g| -g).collect();
        MobiusElement { m, word }
    }

    /// Sign-canonical entries: the first entry of magnitude above 1e-9 is made
    /// positive. Matrices act projectively, so +/-M are the same isometry and
    /// comparisons go through this representative.
    pub fn canonical_entries(&self) -> [f64; 4] {
        let mut m = self.m;
        for e in self.m.iter() {
            if e.abs() > 1e-9 {
                if *e < 0.0 {
                    for v in m.iter_mut() {
                        *v = -*v;
                    }
                }
                break;
            }
        }
        m
    }

    /// Max entrywise distance to another element, up to overall sign.
    pub fn distance_up_to_sign(&self, other: &MobiusElement) -> f64 {
        let a = self.canonical_entries();
        let b = other.canonical_entries();
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// True when the element is the identity up to sign within `tol`.
    pub fn is_identity_up_to_sign(&self, tol: f64) -> bool {
        self.distance_up_to_sign(&MobiusElement::identity()) <= tol
    }
}

/// Applies a Möbius transformation to a point: z -> (az + b) / (cz + d).
/// Unimodular real matrices preserve the upper half-plane, so the image is
/// again a valid point.
pub fn mobius_apply(g: &MobiusElement, z: HPoint) -> HPoint {
    let [a, b, c, d] = g.entries();
    let den = Complex64::new(c, 0.0) * z.to_complex() + d;
    let num = Complex64::new(a, 0.0) * z.to_complex() + b;
    let w = num / den;
    // Im w = Im z / |cz + d|^2 > 0 exactly in real arithmetic; clamp against
    // catastrophic rounding for extreme inputs.
    HPoint {
        re: w.re,
        im: w.im.max(f64::MIN_POSITIVE),
    }
}

/// A point of a flat rectangular model, stored reduced to the fundamental
/// domain with half-open conventions [0, period).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64) -> Self {
        Point { x1, x2 }
    }
}

fn reduce_mod(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can return `period` itself when x is a tiny negative number.
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Flat torus with side lengths a, b (area ab), spectrum of the flat
/// Laplacian on R^2 / (aZ x bZ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatTorusSpec {
    pub a: f64,
    pub b: f64,
}

impl FlatTorusSpec {
    pub fn new(a: f64, b: f64) -> Result<Self, GeometryError> {
        check_side(a)?;
        check_side(b)?;
        Ok(FlatTorusSpec { a, b })
    }

    pub fn area(&self) -> f64 {
        self.a * self.b
    }

    /// Reduces a point to the fundamental domain [0, a) x [0, b).
    pub fn reduce(&self, p: Point) -> Point {
        Point {
            x1: reduce_mod(p.x1, self.a),
            x2: reduce_mod(p.x2, self.b),
        }
    }
}

/// Flat Klein bottle built from the cylinder of circumference a by the glide
/// identification (x1, x2) ~ (x1 + a/2, -x2), with vertical period b.
/// The area is ab/2 (fundamental domain [0, a/2) x [0, b)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatKleinSpec {
    pub a: f64,
    pub b: f64,
}

impl FlatKleinSpec {
    pub fn new(a: f64, b: f64) -> Result<Self, GeometryError> {
        check_side(a)?;
        check_side(b)?;
        Ok(FlatKleinSpec { a, b })
    }

    pub fn area(&self) -> f64 {
        0.5 * self.a * self.b
    }

    /// Reduces a point to the fundamental domain [0, a/2) x [0, b).
    pub fn reduce(&self, p: Point) -> Point {
        // Apply the glide to bring x1 into [0, a/2); the glide flips x2.
        let x1r = reduce_mod(p.x1, self.a);
        let (x1, x2) = if x1r < 0.5 * self.a {
            (x1r, p.x2)
        } else {
            (x1r - 0.5 * self.a, -p.x2)
        };
        Point {
            x1,
            x2: reduce_mod(x2, self.b),
        }
    }
}

fn check_side(v: f64) -> Result<(), GeometryError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(GeometryError::InvalidSideLength { value: v });
    }
    Ok(())
}

/// Canonical representative of the isometry-orbit invariant that pointwise
/// spectral data determines on a flat Klein bottle.
///
/// Every spectral density depends on the point only through x2 modulo the
/// orbit of the maps x2 -> -x2 and x2 -> x2 + b/2; the representative is
/// (0, x2*) with x2* in [0, b/4].
pub fn klein_canonicalize(spec: &FlatKleinSpec, p: Point) -> Point {
    let half = 0.5 * spec.b;
    let u = reduce_mod(p.x2, half);
    let x2 = u.min(half - u);
    Point { x1: 0.0, x2 }
}

/// A cocompact hyperbolic surface description: a generating set of
/// unit-determinant Möbius elements together with a basepoint lift.
#[derive(Clone, Debug)]
pub struct HyperbolicSurfaceSpec {
    pub generators: Vec<MobiusElement>,
    pub basepoint_lift: HPoint,
}

impl HyperbolicSurfaceSpec {
    pub fn new(
        generators: Vec<MobiusElement>,
        basepoint_lift: HPoint,
    ) -> Result<Self, GeometryError> {
        for g in &generators {
            let det = g.entries()[0] * g.entries()[3] - g.entries()[1] * g.entries()[2];
            if (det - 1.0).abs() > DET_TOL {
                return Err(GeometryError::NotUnimodular { det });
            }
        }
        Ok(HyperbolicSurfaceSpec {
            generators,
            basepoint_lift,
        })
    }
}
