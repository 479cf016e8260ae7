//! Angle helpers. Everything inside the crate is radians on the real line.

use std::f64::consts::PI;

use serde::Serialize;

pub const TAU: f64 = 2.0 * PI;

pub fn deg(rad: f64) -> f64 {
    rad.to_degrees()
}

pub fn rad(deg: f64) -> f64 {
    deg.to_radians()
}

/// Wraps into `(−π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Wraps into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// An angle reported in both units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Angle {
    pub rad: f64,
    pub deg: f64,
}

impl From<f64> for Angle {
    fn from(rad: f64) -> Self {
        Angle { rad, deg: deg(rad) }
    }
}
