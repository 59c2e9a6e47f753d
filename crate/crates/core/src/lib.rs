//! Numerical laboratory for inscribed rectangles in analytic Jordan curves.
//!
//! A curve `γ` is a truncated Fourier series. For an angle `θ ∈ (0, π)`, the
//! pairs `(z, w) ∈ γ × γ` with `R_θ(z', w') = (z, w)` for some `(z', w') ∈ γ × γ`
//! are the diagonals of inscribed `θ`-rectangles. Each such rectangle carries a
//! Hamiltonian action computed from a capping that avoids the diagonal
//! `{z = w}`. Tracking actions across `θ` gives an action spectrum, from which a
//! candidate spectral function is selected and checked against the monotone,
//! Lipschitz and area constraints it must satisfy.
//!
//! Module map:
//!
//! - [`curve`]: Fourier curves, polygons, area/length/radius, smoothing.
//! - [`geom`]: the rotation flow about the diagonal, loop winding and area.
//! - [`inscribe`]: rectangle and binormal solvers, width estimate.
//! - [`action`]: trajectories, cappings, actions, ice-cream areas, elegance.
//! - [`sweep`]: branch continuation and the action spectrum diagram.
//! - [`spectral`]: candidate spectral function, validation, intervals.
//! - [`shrinkout`]: polygon approximation sequences.
//! - [`svg`]: plot emission.

pub mod action;
pub mod curve;
pub mod geom;
pub mod inscribe;
mod linalg;
pub mod shrinkout;
pub mod spectral;
pub mod svg;
pub mod sweep;

pub use num_complex::Complex64;

/// Angles are clamped into `[THETA_CLAMP, π − THETA_CLAMP]` wherever a range
/// of aspect angles is accepted.
pub const THETA_CLAMP: f64 = 1e-3;

pub(crate) const TAU: f64 = std::f64::consts::TAU;

/// Wrap an angle into `[0, 2π)`.
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed distance between two angles on the circle, in `(−π, π]`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// Clamp an aspect angle into the admissible open interval.
pub fn clamp_theta(theta: f64) -> f64 {
    theta.clamp(THETA_CLAMP, std::f64::consts::PI - THETA_CLAMP)
}
