//! Trajectories, diagonal-avoiding cappings and actions of inscribed rectangles.
//!
//! The trajectory of a θ-rectangle runs from `(z′, w′)` to `(z, w)` along the
//! rotation flow; both projections are circular arcs of radius `rad` about the
//! center sweeping `θ`. The capping closes it with a path `P` on `γ × γ` from
//! `(z, w)` back to `(z′, w′)` whose loop `τ ∪ P` has winding zero around the
//! diagonal. The action is `θ·rad² − (capping area)`, the capping area being
//! the sum of the signed areas of the two projected loops.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{segment_intersection, JordanCurve};
use crate::geom::{diff_projection, rot_theta, shoelace, winding_angle, winding_number, PointPair, SampledLoop};
use crate::inscribe::InscribedRectangle;
use crate::{wrap_angle, TAU};

/// Samples of `τ ∪ P` closer than this to the diagonal are rejected.
pub const DIAGONAL_TOL: f64 = 1e-6;
/// Consecutive Richardson extrapolations must agree to this, relative to `rad²`.
pub const AREA_TOL: f64 = 1e-10;
const MAX_AREA_SAMPLES: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("capping path comes within {distance:e} of the diagonal")]
    DiagonalHit { distance: f64 },
    #[error("inscription is not elegant")]
    NotElegant,
    #[error("sample count {0} below the minimum of 64")]
    InvalidSamples(usize),
    #[error("area refinement did not settle (last change {change:e} at {samples} samples)")]
    RefinementStalled { change: f64, samples: usize },
}

/// Time reparametrization of the trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpeedProfile {
    #[default]
    Uniform,
    /// `B(u) = ∫₀ᵘ β / ∫₀¹ β` for a smooth bump `β` supported in `(0.1, 0.9)`.
    Bump,
}

const BUMP_LO: f64 = 0.1;
const BUMP_HI: f64 = 0.9;

fn bump(u: f64) -> f64 {
    if u <= BUMP_LO || u >= BUMP_HI {
        0.0
    } else {
        (-1.0 / ((u - BUMP_LO) * (BUMP_HI - u))).exp()
    }
}

// 8-point Gauss–Legendre nodes and weights on [−1, 1].
const GL_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn integrate_bump(a: f64, b: f64) -> f64 {
    const PANELS: usize = 32;
    let h = (b - a) / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * 0.5 * h * (bump(mid - 0.5 * h * x) + bump(mid + 0.5 * h * x));
        }
    }
    total
}

impl SpeedProfile {
    /// Fraction of the flow time elapsed at `u ∈ [0, 1]`.
    pub fn time(self, u: f64) -> f64 {
        match self {
            SpeedProfile::Uniform => u,
            SpeedProfile::Bump => {
                let u = u.clamp(0.0, 1.0);
                if u <= BUMP_LO {
                    0.0
                } else if u >= BUMP_HI {
                    1.0
                } else {
                    let (left, right) = (integrate_bump(BUMP_LO, u), integrate_bump(u, BUMP_HI));
                    left / (left + right)
                }
            }
        }
    }
}

/// Samples `R_{θ·B(u)}(z′, w′)` for `u` on a uniform grid of `[0, 1]`.
pub fn build_trajectory(rect: &InscribedRectangle, samples: usize) -> Result<Vec<PointPair>, ActionError> {
    build_trajectory_with(rect, samples, SpeedProfile::Uniform)
}

pub fn build_trajectory_with(rect: &InscribedRectangle, samples: usize, profile: SpeedProfile) -> Result<Vec<PointPair>, ActionError> {
    if samples < 64 {
        return Err(ActionError::InvalidSamples(samples));
    }
    Ok(trajectory_points(rect, samples - 1, profile))
}

fn trajectory_points(rect: &InscribedRectangle, segments: usize, profile: SpeedProfile) -> Vec<PointPair> {
    let start = PointPair::new(rect.z2(), rect.w2());
    (0..=segments)
        .map(|j| rot_theta(start, rect.theta * profile.time(j as f64 / segments as f64)))
        .collect()
}

/// A linear path in parameter space from `(s, t)` by `(Δa, Δb)`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct ParamPath {
    a0: f64,
    b0: f64,
    da: f64,
    db: f64,
}

impl ParamPath {
    fn at(&self, r: f64) -> (f64, f64) {
        (self.a0 + self.da * r, self.b0 + self.db * r)
    }

    fn core_shifted(&self, loops: i64) -> Self {
        let shift = -TAU * loops as f64;
        Self { da: self.da + shift, db: self.db + shift, ..*self }
    }
}

/// Which same-direction path to start from before the winding correction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PathChoice {
    /// The shortest path on which `a` and `b` move in the same direction.
    #[default]
    Preferred,
    /// The same-direction path going the other way around; it differs from
    /// the preferred one by a core loop.
    Reversed,
}

// Δa ≡ s2 − s and Δb ≡ t2 − t with Δa − Δb fixed so that a − b never crosses a
// multiple of 2π, both of one sign, minimizing |Δa| + |Δb|.
fn same_direction_path(rect: &InscribedRectangle, choice: PathChoice) -> ParamPath {
    let [s, t, s2, t2] = rect.params;
    let d0 = wrap_angle(s - t);
    let d1 = wrap_angle(s2 - t2);
    let c = d1 - d0;
    let base = wrap_angle(s2 - s);
    let mut best: Option<(f64, f64)> = None;
    for m in -2..=2 {
        let da = base + TAU * m as f64;
        let db = da - c;
        if da * db < 0.0 {
            continue;
        }
        if best.map_or(true, |(ba, bb)| da.abs() + db.abs() < ba.abs() + bb.abs()) {
            best = Some((da, db));
        }
    }
    let (mut da, mut db) = best.expect("a same-direction lift always exists");
    if choice == PathChoice::Reversed {
        let shift = if da + db > 0.0 { -TAU } else { TAU };
        da += shift;
        db += shift;
    }
    ParamPath { a0: s, b0: t, da, db }
}

/// A trajectory together with its winding-zero capping.
#[derive(Clone, Debug)]
pub struct CappedTrajectory {
    pub rect: InscribedRectangle,
    /// The trajectory from `(z′, w′)` to `(z, w)`.
    pub arc_samples: Vec<PointPair>,
    /// Parameter samples `(a(r), b(r))` of the corrected path from `(s, t)` to `(s2, t2)`.
    pub boundary_path: Vec<(f64, f64)>,
    /// Number of core loops `k` removed; the path advances by `−2πk` in both parameters.
    pub winding_correction: i64,
    /// Winding of `z − w` along the uncorrected loop, in turns.
    pub raw_winding: i64,
    /// Smallest `|z − w|` along the sampled loop.
    pub min_diagonal_distance: f64,
}

impl CappedTrajectory {
    /// The closed loop `τ ∪ P` in `ℂ²`.
    pub fn loop_points(&self, curve: &JordanCurve) -> Vec<PointPair> {
        let mut pts = self.arc_samples.clone();
        let n = self.boundary_path.len();
        pts.extend(self.boundary_path[1..n - 1].iter().map(|&(a, b)| PointPair::new(curve.eval(a), curve.eval(b))));
        pts
    }

    /// Winding of `z − w` around 0 along the closed loop.
    pub fn diagonal_winding(&self, curve: &JordanCurve) -> i64 {
        let d: Vec<Complex64> = self.loop_points(curve).into_iter().map(diff_projection).collect();
        winding_number(&SampledLoop::new_unchecked(d), Complex64::default()).expect("loop avoids the diagonal")
    }
}

/// Build the preferred capping: a same-direction path, then core loops
/// removed until the diagonal winding vanishes.
pub fn build_capping(curve: &JordanCurve, rect: &InscribedRectangle, samples: usize) -> Result<CappedTrajectory, ActionError> {
    build_capping_with(curve, rect, samples, PathChoice::Preferred)
}

pub fn build_capping_with(
    curve: &JordanCurve,
    rect: &InscribedRectangle,
    samples: usize,
    choice: PathChoice,
) -> Result<CappedTrajectory, ActionError> {
    if samples < 64 {
        return Err(ActionError::InvalidSamples(samples));
    }
    let path = same_direction_path(rect, choice);
    let (raw, min_dist) = path_winding(curve, rect, &path)?;
    let k = raw;
    let corrected = path.core_shifted(k);
    let n = samples - 1;
    let boundary_path: Vec<(f64, f64)> = (0..=n).map(|j| corrected.at(j as f64 / n as f64)).collect();
    let cap = CappedTrajectory {
        rect: rect.clone(),
        arc_samples: trajectory_points(rect, n, SpeedProfile::Uniform),
        boundary_path,
        winding_correction: k,
        raw_winding: raw,
        min_diagonal_distance: min_dist,
    };
    Ok(cap)
}

// Winding (in turns) of z − w along τ then the path, and the minimum |z − w|
// on the path. The path is sampled finely enough that each step turns z − w
// by well under π.
fn path_winding(curve: &JordanCurve, rect: &InscribedRectangle, path: &ParamPath) -> Result<(i64, f64), ActionError> {
    let mut n = 256usize;
    loop {
        let d: Vec<Complex64> = (0..=n)
            .map(|j| {
                let (a, b) = path.at(j as f64 / n as f64);
                curve.eval(a) - curve.eval(b)
            })
            .collect();
        let min_dist = d.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if min_dist < DIAGONAL_TOL {
            return Err(ActionError::DiagonalHit { distance: min_dist });
        }
        let fine = d.windows(2).all(|w| (w[1] - w[0]).norm() < 0.25 * w[0].norm().min(w[1].norm()));
        if fine || n >= MAX_AREA_SAMPLES {
            let along = winding_angle(&d, Complex64::default(), false).map_err(|_| ActionError::DiagonalHit { distance: 0.0 })?;
            // τ turns z − w by exactly θ.
            let turns = (rect.theta + along) / TAU;
            return Ok((turns.round() as i64, min_dist));
        }
        n *= 2;
    }
}

/// The two terms of the action and their difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionValue {
    pub value: f64,
    /// `θ·rad²`.
    pub term_hamiltonian: f64,
    /// Capping area after the core-loop correction.
    pub term_area: f64,
    pub winding_correction: i64,
}

/// JSON action report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionReport {
    pub theta: f64,
    pub rad: f64,
    pub term_hamiltonian: f64,
    pub term_area: f64,
    pub winding_correction: i64,
    pub value: f64,
    pub elegant: bool,
}

impl ActionReport {
    pub fn new(rect: &InscribedRectangle, action: &ActionValue, elegant: bool) -> Self {
        Self {
            theta: rect.theta,
            rad: rect.rad,
            term_hamiltonian: action.term_hamiltonian,
            term_area: action.term_area,
            winding_correction: action.winding_correction,
            value: action.value,
            elegant,
        }
    }
}

/// Action of the rectangle's trajectory with its preferred capping.
pub fn action_value(curve: &JordanCurve, rect: &InscribedRectangle, samples: usize) -> Result<ActionValue, ActionError> {
    action_value_with(curve, rect, samples, SpeedProfile::Uniform)
}

pub fn action_value_with(
    curve: &JordanCurve,
    rect: &InscribedRectangle,
    samples: usize,
    profile: SpeedProfile,
) -> Result<ActionValue, ActionError> {
    if samples < 64 {
        return Err(ActionError::InvalidSamples(samples));
    }
    let path = same_direction_path(rect, PathChoice::Preferred);
    let (k, _) = path_winding(curve, rect, &path)?;
    let scale = rect.rad * rect.rad;
    let loops = richardson(samples, AREA_TOL * scale, |n| capping_area(curve, rect, &path, profile, n))?;
    let term_hamiltonian = rect.theta * scale;
    let term_area = loops - 2.0 * k as f64 * curve.enclosed_area();
    Ok(ActionValue { value: term_hamiltonian - term_area, term_hamiltonian, term_area, winding_correction: k })
}

/// Sum of the signed areas of `π₁(τ then P)` and `π₂(τ then P)` with `n`
/// segments on each of `τ` and `P`.
fn capping_area(curve: &JordanCurve, rect: &InscribedRectangle, path: &ParamPath, profile: SpeedProfile, n: usize) -> f64 {
    let tau = trajectory_points(rect, n, profile);
    let mut p1: Vec<Complex64> = Vec::with_capacity(2 * n);
    let mut p2: Vec<Complex64> = Vec::with_capacity(2 * n);
    for q in &tau {
        p1.push(q.z);
        p2.push(q.w);
    }
    for j in 1..n {
        let (a, b) = path.at(j as f64 / n as f64);
        p1.push(curve.eval(a));
        p2.push(curve.eval(b));
    }
    shoelace(&p1) + shoelace(&p2)
}

// Polygonal areas of piecewise smooth loops sampled uniformly in smooth
// parameters have error expansions in even powers of the step, so one
// Richardson step removes the leading term. Sample counts double until
// consecutive extrapolations agree.
fn richardson(n0: usize, tol: f64, f: impl Fn(usize) -> f64) -> Result<f64, ActionError> {
    let mut n = n0;
    let mut coarse = f(n);
    let mut prev: Option<f64> = None;
    let mut change = f64::INFINITY;
    while 2 * n <= MAX_AREA_SAMPLES {
        let fine = f(2 * n);
        let extrapolated = (4.0 * fine - coarse) / 3.0;
        if let Some(p) = prev {
            change = (extrapolated - p).abs();
            if change <= tol {
                return Ok(extrapolated);
            }
        }
        prev = Some(extrapolated);
        coarse = fine;
        n *= 2;
    }
    Err(ActionError::RefinementStalled { change, samples: n })
}

/// Total area of the two cones bounded by the half-diagonals from the center
/// and the arcs of `γ` from `z′` to `z` and from `w′` to `w`.
pub fn ice_cream_area(curve: &JordanCurve, rect: &InscribedRectangle) -> Result<f64, ActionError> {
    if !is_elegant(curve, rect) {
        return Err(ActionError::NotElegant);
    }
    let [s, t, s2, t2] = rect.params;
    let c = rect.center;
    let cone = |from: f64, to: f64, n: usize| {
        let len = wrap_angle(to - from);
        let mut pts = Vec::with_capacity(n + 2);
        pts.push(c);
        pts.extend((0..=n).map(|j| curve.eval(from + len * j as f64 / n as f64)));
        shoelace(&pts)
    };
    richardson(256, AREA_TOL * rect.rad * rect.rad, |n| cone(s2, s, n) + cone(t2, t, n))
}

/// Samples per arc used by [`is_elegant`].
const ELEGANCE_SAMPLES: usize = 1024;

/// Whether the arcs of `γ` between consecutive vertices, each closed by its
/// rectangle side, bound four simple loops with pairwise disjoint interiors
/// and no vertex inside.
pub fn is_elegant(curve: &JordanCurve, rect: &InscribedRectangle) -> bool {
    let [s, t, s2, t2] = rect.params;
    // Vertex order along γ must be z′, z, w′, w.
    let rel = |x: f64| wrap_angle(x - s2);
    if !(rel(s) < rel(t2) && rel(t2) < rel(t)) {
        return false;
    }
    let params = [s2, s, t2, t];
    let verts = rect.vertices;
    let tol = 1e-9 * (1.0 + rect.rad);
    let arcs: Vec<Vec<Complex64>> = (0..4)
        .map(|i| {
            let from = params[i];
            let len = wrap_angle(params[(i + 1) % 4] - from);
            let m = ELEGANCE_SAMPLES;
            (0..=m).map(|j| curve.eval(from + len * j as f64 / m as f64)).collect()
        })
        .collect();
    // No arc meets a side away from the vertices.
    for arc in &arcs {
        for k in 0..4 {
            let (a, b) = (verts[k], verts[(k + 1) % 4]);
            for seg in arc.windows(2) {
                if let Some((u, _)) = segment_intersection(seg[0], seg[1], a, b) {
                    let p = seg[0] + (seg[1] - seg[0]) * u;
                    if verts.iter().all(|v| (p - v).norm() > tol) {
                        return false;
                    }
                }
            }
        }
    }
    let loops: Vec<SampledLoop> = arcs.iter().map(|arc| SampledLoop::new_unchecked(arc.clone())).collect();
    let inside = |lp: &SampledLoop, p: Complex64| winding_number(lp, p).map_or(true, |w| w != 0);
    for (i, lp) in loops.iter().enumerate() {
        // Other vertices outside.
        for k in [(i + 2) % 4, (i + 3) % 4] {
            if inside(lp, verts[k]) {
                return false;
            }
        }
        // Boundaries do not cross, so overlapping interiors would be nested;
        // a boundary point of one loop inside another detects that.
        for (j, arc) in arcs.iter().enumerate() {
            if i == j {
                continue;
            }
            let side_mid = 0.5 * (verts[j] + verts[(j + 1) % 4]);
            if inside(lp, arc[arc.len() / 2]) || inside(lp, side_mid) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Mode;
    use crate::inscribe::find_rectangles;
    use std::f64::consts::PI;

    fn circle() -> JordanCurve {
        JordanCurve::new("circle", [Mode::new(1, Complex64::new(1.0, 0.0))]).unwrap()
    }

    fn circle_rect(theta: f64, s: f64) -> InscribedRectangle {
        // z = γ(s), w = γ(s + π), z′ = e^{−iθ}z.
        InscribedRectangle::from_params(&circle(), theta, [s, s + PI, s - theta, s + PI - theta])
    }

    #[test]
    fn trajectory_examples() {
        let r = circle_rect(PI / 2.0, 0.0);
        let tr = build_trajectory(&r, 65).unwrap();
        assert!((tr[0].z - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let last = tr.last().unwrap();
        assert!((last.z - r.z()).norm() < 1e-12 && (last.w - r.w()).norm() < 1e-12);
        for p in &tr {
            assert!((p.z.norm() - 1.0).abs() < 1e-14);
        }
        let r1 = InscribedRectangle::from_params(&circle(), PI / 2.0, [PI / 2.0, 1.5 * PI, 0.0, PI]);
        let tr1 = build_trajectory(&r1, 64).unwrap();
        // First components trace the arc from 1 to i.
        assert!((tr1[0].z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((tr1[63].z - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        for (j, p) in tr1.iter().enumerate() {
            assert!((p.z - Complex64::from_polar(1.0, PI / 2.0 * j as f64 / 63.0)).norm() < 1e-14);
        }
        let flat = build_trajectory(&circle_rect(1e-9, 0.3), 64).unwrap();
        assert!(flat.iter().all(|p| (p.z - flat[0].z).norm() < 1e-8));
        assert_eq!(build_trajectory(&r, 10), Err(ActionError::InvalidSamples(10)));
    }

    #[test]
    fn circle_capping_retraces_arcs() {
        let r = circle_rect(PI / 2.0, 0.0);
        let cap = build_capping(&circle(), &r, 128).unwrap();
        assert_eq!(cap.winding_correction, 0);
        assert_eq!(cap.diagonal_winding(&circle()), 0);
        let (a_end, b_end) = *cap.boundary_path.last().unwrap();
        assert!((a_end - (0.0 - PI / 2.0)).abs() < 1e-12);
        assert!((b_end - (PI - PI / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn circle_action_is_theta() {
        for theta in [0.3, 0.9, PI / 2.0, 2.4, 3.1] {
            for s in [0.0, 1.0, 4.0] {
                let a = action_value(&circle(), &circle_rect(theta, s), 64).unwrap();
                assert!((a.value - theta).abs() < 1e-9, "{theta} {s} {a:?}");
                assert!(a.term_area.abs() < 1e-9);
                let ic = ice_cream_area(&circle(), &circle_rect(theta, s)).unwrap();
                assert!((ic - theta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reversed_path_needs_one_core_loop() {
        let e = JordanCurve::ellipse(2.0, 1.0);
        for r in find_rectangles(&e, 1.1, 96, 1e-11).unwrap() {
            let pref = build_capping(&e, &r, 128).unwrap();
            let rev = build_capping_with(&e, &r, 128, PathChoice::Reversed).unwrap();
            assert_eq!(pref.winding_correction, 0);
            assert_eq!((rev.winding_correction - pref.winding_correction).abs(), 1);
            assert_eq!(rev.diagonal_winding(&e), 0);
            for (p, q) in pref.boundary_path.iter().zip(&rev.boundary_path) {
                assert!((p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bump_profile_is_monotone_onto() {
        let p = SpeedProfile::Bump;
        assert_eq!(p.time(0.0), 0.0);
        assert_eq!(p.time(1.0), 1.0);
        assert!((p.time(0.5) - 0.5).abs() < 1e-12);
        let mut prev = 0.0;
        for j in 0..=100 {
            let v = p.time(j as f64 / 100.0);
            assert!(v >= prev - 1e-15, "{j}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn elegance_of_convex_inscriptions() {
        let e = JordanCurve::ellipse(2.0, 1.0);
        for theta in [0.5, PI / 2.0, 2.5] {
            for r in find_rectangles(&e, theta, 96, 1e-11).unwrap() {
                assert!(is_elegant(&e, &r));
                let a = action_value(&e, &r, 64).unwrap();
                let ic = ice_cream_area(&e, &r).unwrap();
                assert!((a.value - ic).abs() < 1e-8, "{a:?} {ic}");
                assert!(a.value > 0.0 && a.value < 2.0 * e.enclosed_area());
            }
        }
        assert!(is_elegant(&circle(), &circle_rect(1.0, 0.4)));
    }

    #[test]
    fn wrong_vertex_order_is_not_elegant() {
        let r = circle_rect(1.0, 0.4);
        let mut bad = r.clone();
        bad.params = [r.params[1], r.params[0], r.params[2], r.params[3]];
        assert!(!is_elegant(&circle(), &bad));
    }
}
