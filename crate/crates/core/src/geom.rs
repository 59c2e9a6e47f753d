//! The rotation flow about the diagonal of `ℂ²` and planar loop primitives.
//!
//! `H(z, w) = ¼|z − w|²` generates the flow `R_θ`, which fixes the midpoint
//! `m = (z + w)/2` and rotates the half-difference `d = (z − w)/2` by `e^{iθ}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TAU;

/// Samples closer than this to the winding center are rejected.
pub const CENTER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("loop passes within {CENTER_TOL:e} of the winding center (sample {index})")]
    CenterOnLoop { index: usize },
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
}

/// A point `(z, w)` of `ℂ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub z: Complex64,
    pub w: Complex64,
}

impl PointPair {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        Self { z, w }
    }

    pub fn midpoint(&self) -> Complex64 {
        0.5 * (self.z + self.w)
    }

    pub fn swapped(&self) -> Self {
        Self { z: self.w, w: self.z }
    }
}

/// `R_θ(z, w) = (m + e^{iθ}d, m − e^{iθ}d)`.
#[inline]
pub fn rot_theta(p: PointPair, theta: f64) -> PointPair {
    let m = 0.5 * (p.z + p.w);
    let d = 0.5 * (p.z - p.w) * Complex64::from_polar(1.0, theta);
    PointPair { z: m + d, w: m - d }
}

/// The difference coordinate `z − w`, which vanishes exactly on the diagonal.
#[inline]
pub fn diff_projection(p: PointPair) -> Complex64 {
    p.z - p.w
}

/// A closed polyline; the closing edge from the last point to the first is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledLoop {
    points: Vec<Complex64>,
}

impl SampledLoop {
    /// Requires at least three points with consecutive points (cyclically) distinct.
    pub fn new(points: Vec<Complex64>) -> Result<Self, GeomError> {
        if points.len() < 3 {
            return Err(GeomError::InvalidLoop(format!("{} points", points.len())));
        }
        let n = points.len();
        if let Some(i) = (0..n).find(|&i| points[i] == points[(i + 1) % n]) {
            return Err(GeomError::InvalidLoop(format!("repeated point at index {i}")));
        }
        Ok(Self { points })
    }

    /// Accepts repeated points; for intermediate loops built from samples.
    pub fn new_unchecked(points: Vec<Complex64>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self { points }
    }
}

/// Total change of `arg(p − center)` around the loop, divided by `2π`.
///
/// Each edge contributes its principal argument step, so the count is exact as
/// long as consecutive samples subtend less than `π` as seen from `center`.
pub fn winding_number(lp: &SampledLoop, center: Complex64) -> Result<i64, GeomError> {
    Ok((winding_angle(lp.points(), center, true)? / TAU).round() as i64)
}

/// Accumulated argument change of `p − center` along a polyline, closed or open.
pub fn winding_angle(points: &[Complex64], center: Complex64, closed: bool) -> Result<f64, GeomError> {
    if let Some(index) = points.iter().position(|p| (p - center).norm() <= CENTER_TOL) {
        return Err(GeomError::CenterOnLoop { index });
    }
    let n = points.len();
    let edges = if closed { n } else { n.saturating_sub(1) };
    let mut total = 0.0;
    for j in 0..edges {
        let a = points[j] - center;
        let b = points[(j + 1) % n] - center;
        total += (b * a.conj()).arg();
    }
    Ok(total)
}

/// Shoelace signed area, counterclockwise positive.
///
/// Coordinates are taken relative to the first point and summed with Kahan
/// compensation, which keeps loops far from the origin and with many samples
/// accurate.
pub fn signed_area(lp: &SampledLoop) -> f64 {
    shoelace(lp.points())
}

pub(crate) fn shoelace(points: &[Complex64]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let o = points[0];
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for j in 1..n - 1 {
        let a = points[j] - o;
        let b = points[j + 1] - o;
        let y = (a.re * b.im - a.im * b.re) - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    0.5 * sum
}
