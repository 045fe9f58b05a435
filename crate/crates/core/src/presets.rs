//! Named example surfaces used by the command-line tools and tests.
//!
//! Overview
//! - Flat presets: the unit torus, a 2x1 torus, and Klein bottles with
//!   (a, b) = (2, 1), (2, 2), (4, 1).
//! - `genus2_octagon`: a genus-2 hyperbolic surface given by four symmetric
//!   Möbius generators A_k = R_k T R_k^{-1}, where T is the diagonal
//!   translation of length 2 arccosh(1 + sqrt 2) along the imaginary axis
//!   and R_k rotates by k pi / 8. The basepoint i lies on the axis of the
//!   first generator, so the systole through it has exactly that length and
//!   multiplicity eight (four generator pairs, both directions).
//!
//! Design notes
//! - Generators are constructed from closed-form entries (the conjugated
//!   diagonal flow), so the preset is reproducible bit-for-bit.

use crate::geometry::{
    FlatKleinSpec, FlatTorusSpec, HPoint, HyperbolicSurfaceSpec, MobiusElement,
};
use crate::spectrum::FlatSurface;

/// Unit square torus.
pub fn torus_unit() -> FlatTorusSpec {
    FlatTorusSpec::new(1.0, 1.0).unwrap()
}

/// 2 x 1 rectangular torus.
pub fn torus_2_1() -> FlatTorusSpec {
    FlatTorusSpec::new(2.0, 1.0).unwrap()
}

/// Klein bottle with (a, b) = (2, 1): the degenerate-level example.
pub fn klein_2_1() -> FlatKleinSpec {
    FlatKleinSpec::new(2.0, 1.0).unwrap()
}

/// Klein bottle with (a, b) = (2, 2).
pub fn klein_2_2() -> FlatKleinSpec {
    FlatKleinSpec::new(2.0, 2.0).unwrap()
}

/// Klein bottle with (a, b) = (4, 1).
pub fn klein_4_1() -> FlatKleinSpec {
    FlatKleinSpec::new(4.0, 1.0).unwrap()
}

/// Translation length of the octagon generators: 2 arccosh(1 + sqrt 2).
pub fn octagon_systole() -> f64 {
    2.0 * (1.0 + 2f64.sqrt()).acosh()
}

/// Genus-2 surface from four rotated copies of a diagonal translation.
pub fn genus2_octagon() -> HyperbolicSurfaceSpec {
    let x = 1.0 + 2f64.sqrt(); // cosh(l/2)
    let e = x + (x * x - 1.0).sqrt(); // e^{l/2}
    let mut generators = Vec::with_capacity(4);
    for k in 0..4u32 {
        let th = k as f64 * std::f64::consts::PI / 8.0;
        let (s, c) = th.sin_cos();
        // R T R^{-1} with R = [[c, s], [-s, c]], T = diag(e, 1/e).
        let m = [
            c * c * e + s * s / e,
            c * s * (1.0 / e - e),
            c * s * (1.0 / e - e),
            s * s * e + c * c / e,
        ];
        generators.push(MobiusElement::new(m, vec![k as i32 + 1]).unwrap());
    }
    HyperbolicSurfaceSpec::new(generators, HPoint::i()).unwrap()
}

/// An off-axis observation point for the octagon surface: the basepoint
/// pushed up the imaginary axis by 0.5 and rotated by pi/16, which sits at
/// hyperbolic distance 0.5 from i but on no generator axis.
pub fn octagon_off_axis_point() -> HPoint {
    let th = std::f64::consts::PI / 16.0;
    let (s, c) = th.sin_cos();
    let rot = MobiusElement::new([c, s, -s, c], vec![]).unwrap();
    let z = HPoint::new(0.0, 0.5f64.exp()).unwrap();
    crate::geometry::mobius_apply(&rot, z)
}

/// Any surface the toolkit understands.
#[derive(Clone, Debug)]
pub enum AnySurface {
    Flat(FlatSurface),
    Hyperbolic(HyperbolicSurfaceSpec),
}

/// Looks up a named preset surface.
pub fn by_name(name: &str) -> Option<AnySurface> {
    match name {
        "torus_unit" => Some(AnySurface::Flat(FlatSurface::Torus(torus_unit()))),
        "torus_2_1" => Some(AnySurface::Flat(FlatSurface::Torus(torus_2_1()))),
        "klein_2_1" => Some(AnySurface::Flat(FlatSurface::Klein(klein_2_1()))),
        "klein_2_2" => Some(AnySurface::Flat(FlatSurface::Klein(klein_2_2()))),
        "klein_4_1" => Some(AnySurface::Flat(FlatSurface::Klein(klein_4_1()))),
        "genus2_octagon" => Some(AnySurface::Hyperbolic(genus2_octagon())),
        _ => None,
    }
}

/// Names accepted by `by_name`, for error messages.
pub const PRESET_NAMES: [&str; 6] = [
    "torus_unit",
    "torus_2_1",
    "klein_2_1",
    "klein_2_2",
    "klein_4_1",
    "genus2_octagon",
];
