//! Inscribed θ-rectangles, binormals and the width estimate.
//!
//! A θ-rectangle with parameters `(s, t, s2, t2)` satisfies
//! `R_θ(γ(s2), γ(t2)) = (γ(s), γ(t))`: the diagonal `z′w′` rotated by `θ` about
//! its midpoint is the diagonal `zw`. Solutions are found by multi-start Newton
//! from a grid over `(s, t)`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::JordanCurve;
use crate::geom::{rot_theta, PointPair};
use crate::linalg::{condition4, solve2, solve4, sym2_eigenvalues};
use crate::{angle_diff, wrap_angle, TAU};

pub const MAX_NEWTON_ITERS: usize = 50;
/// Newton stops once the step falls below this (radians).
pub const STEP_TOL: f64 = 1e-12;
/// Largest Newton step in any parameter (radians).
const STEP_CLAMP: f64 = 0.5;
/// Solutions with `|z − w|` below this fraction of the curve radius lie on the
/// clean intersection along the diagonal and are discarded.
pub const NONDEGENERACY_CUTOFF: f64 = 1e-4;
/// Solutions closer than this on the parameter torus are the same solution.
pub const DEDUPE_TOL: f64 = 1e-6;
/// Jacobians with condition number above this are reported as degenerate.
pub const DEGENERATE_CONDITION: f64 = 1e10;
/// Degenerate (Morse–Bott) solutions are thinned to one per cell of this grid.
const DEGENERATE_BUCKETS: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InscribeError {
    #[error("theta {0} outside (0, π)")]
    InvalidTheta(f64),
    #[error("grid_n {0} below the minimum of 32")]
    InvalidGrid(usize),
    #[error("theta_steps {0} below the minimum of 16")]
    InvalidSteps(usize),
    #[error("no inscribed rectangles found at any θ")]
    EmptySpectrum,
}

/// An inscribed θ-rectangle with vertices `z′ = γ(s2)`, `z = γ(s)`, `w′ = γ(t2)`,
/// `w = γ(t)` (counterclockwise in that order).
#[derive(Clone, Debug, PartialEq)]
pub struct InscribedRectangle {
    pub theta: f64,
    /// `(s, t, s2, t2)`, each in `[0, 2π)`.
    pub params: [f64; 4],
    /// `[z′, z, w′, w]`.
    pub vertices: [Complex64; 4],
    pub center: Complex64,
    /// Half the diagonal, `|z − w|/2`.
    pub rad: f64,
    /// Max-norm of the defining system at `params`.
    pub residual: f64,
    /// Condition number of the 4×4 Jacobian at `params`.
    pub condition: f64,
}

impl InscribedRectangle {
    /// Evaluate the rectangle data at the given parameters.
    pub fn from_params(curve: &JordanCurve, theta: f64, params: [f64; 4]) -> Self {
        let params = params.map(wrap_angle);
        let (f, j) = system(curve, theta, &Vector4::from(params));
        let z = curve.eval(params[0]);
        let w = curve.eval(params[1]);
        let z2 = curve.eval(params[2]);
        let w2 = curve.eval(params[3]);
        Self {
            theta,
            params,
            vertices: [z2, z, w2, w],
            center: 0.5 * (z + w),
            rad: 0.5 * (z - w).norm(),
            residual: f.amax(),
            condition: condition4(&j),
        }
    }

    pub fn z(&self) -> Complex64 {
        self.vertices[1]
    }

    pub fn w(&self) -> Complex64 {
        self.vertices[3]
    }

    pub fn z2(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn w2(&self) -> Complex64 {
        self.vertices[2]
    }

    /// `|z − w|`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.rad
    }

    /// True when the Jacobian is too ill-conditioned to call the solution transverse.
    pub fn is_degenerate(&self) -> bool {
        self.condition > DEGENERATE_CONDITION
    }

    /// The same rectangle read from the other ends of both diagonals.
    pub fn swapped(&self) -> Self {
        let [s, t, s2, t2] = self.params;
        let [a, b, c, d] = self.vertices;
        Self { params: [t, s, t2, s2], vertices: [c, d, a, b], ..self.clone() }
    }

    pub fn record(&self) -> RectangleRecord {
        let [s, t, s2, t2] = self.params;
        RectangleRecord {
            theta: self.theta,
            s,
            t,
            s2,
            t2,
            z_re: self.z().re,
            z_im: self.z().im,
            w_re: self.w().re,
            w_im: self.w().im,
            rad: self.rad,
            residual: self.residual,
        }
    }
}

/// Flat serialization row for rectangles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleRecord {
    pub theta: f64,
    pub s: f64,
    pub t: f64,
    pub s2: f64,
    pub t2: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub w_re: f64,
    pub w_im: f64,
    pub rad: f64,
    pub residual: f64,
}

pub fn write_rectangles_csv<W: Write>(out: W, rects: &[InscribedRectangle]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in rects {
        wtr.serialize(r.record())?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn rectangles_to_json(rects: &[InscribedRectangle]) -> String {
    let records: Vec<RectangleRecord> = rects.iter().map(InscribedRectangle::record).collect();
    let mut s = serde_json::to_string_pretty(&records).expect("records serialize");
    s.push('\n');
    s
}

/// `R_θ(γ(s2), γ(t2)) − (γ(s), γ(t))` as `(Re, Im, Re, Im)`.
pub fn rectangle_residual(curve: &JordanCurve, theta: f64, params: [f64; 4]) -> [f64; 4] {
    let [s, t, s2, t2] = params;
    let img = rot_theta(PointPair::new(curve.eval(s2), curve.eval(t2)), theta);
    let a = img.z - curve.eval(s);
    let b = img.w - curve.eval(t);
    [a.re, a.im, b.re, b.im]
}

/// Residual and its Jacobian in `(s, t, s2, t2)`.
pub(crate) fn system(curve: &JordanCurve, theta: f64, x: &Vector4<f64>) -> (Vector4<f64>, Matrix4<f64>) {
    let (f, j, _) = system_theta(curve, theta, x);
    (f, j)
}

/// Residual, Jacobian in the parameters, and derivative in `θ`.
pub(crate) fn system_theta(curve: &JordanCurve, theta: f64, x: &Vector4<f64>) -> (Vector4<f64>, Matrix4<f64>, Vector4<f64>) {
    let (zs, ds) = curve.eval_d1(x[0]);
    let (zt, dt) = curve.eval_d1(x[1]);
    let (zs2, ds2) = curve.eval_d1(x[2]);
    let (zt2, dt2) = curve.eval_d1(x[3]);
    let e = Complex64::from_polar(1.0, theta);
    let m = 0.5 * (zs2 + zt2);
    let d = 0.5 * (zs2 - zt2);
    let f1 = m + e * d - zs;
    let f2 = m - e * d - zt;
    let plus = 0.5 * (1.0 + e);
    let minus = 0.5 * (1.0 - e);
    let cols = [
        (-ds, Complex64::default()),
        (Complex64::default(), -dt),
        (plus * ds2, minus * ds2),
        (minus * dt2, plus * dt2),
    ];
    let mut j = Matrix4::zeros();
    for (c, (a, b)) in cols.iter().enumerate() {
        j[(0, c)] = a.re;
        j[(1, c)] = a.im;
        j[(2, c)] = b.re;
        j[(3, c)] = b.im;
    }
    let dtheta = Complex64::new(0.0, 1.0) * e * d;
    (
        Vector4::new(f1.re, f1.im, f2.re, f2.im),
        j,
        Vector4::new(dtheta.re, dtheta.im, -dtheta.re, -dtheta.im),
    )
}

/// Result of a converged Newton solve.
#[derive(Clone, Copy, Debug)]
pub(crate) struct NewtonSolution {
    pub x: Vector4<f64>,
    pub residual: f64,
}

/// Damped Newton with backtracking and minimum-norm steps at fixed `θ`.
pub(crate) fn newton_rectangle(curve: &JordanCurve, theta: f64, x0: Vector4<f64>, tol: f64) -> Option<NewtonSolution> {
    let mut x = x0;
    let (mut f, mut j) = system(curve, theta, &x);
    let mut fnorm = f.norm();
    for _ in 0..MAX_NEWTON_ITERS {
        let mut step = solve4(&j, &(-f))?.x;
        let big = step.amax();
        if big > STEP_CLAMP {
            step *= STEP_CLAMP / big;
        }
        if f.amax() <= tol && step.amax() < STEP_TOL {
            return Some(NewtonSolution { x, residual: f.amax() });
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 1024.0 {
            let xn = x + step * lambda;
            let (fn_, jn) = system(curve, theta, &xn);
            let nn = fn_.norm();
            if nn < (1.0 - 1e-4 * lambda) * fnorm {
                x = xn;
                f = fn_;
                j = jn;
                fnorm = nn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stalled at rounding level.
            return (f.amax() <= tol).then_some(NewtonSolution { x, residual: f.amax() });
        }
    }
    (f.amax() <= tol).then_some(NewtonSolution { x, residual: f.amax() })
}

/// Nearest-parameter projection of plane points onto a curve.
pub(crate) struct Projector<'a> {
    curve: &'a JordanCurve,
    samples: Vec<Complex64>,
}

impl<'a> Projector<'a> {
    pub fn new(curve: &'a JordanCurve, n: usize) -> Self {
        Self { curve, samples: curve.sample(n) }
    }

    /// Parameter of the nearest curve point and the distance to it.
    pub fn project(&self, p: Complex64) -> (f64, f64) {
        let n = self.samples.len();
        let (mut best_j, mut best_d) = (0, f64::INFINITY);
        for (j, q) in self.samples.iter().enumerate() {
            let d = (q - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best_j = j;
            }
        }
        let h = TAU / n as f64;
        let mut s = best_j as f64 * h;
        let mut best = (s, best_d.sqrt());
        for _ in 0..4 {
            let (g, d1, d2) = self.curve.jet(s);
            let r = g - p;
            let fp = d1.re * r.re + d1.im * r.im;
            let fpp = d1.norm_sqr() + d2.re * r.re + d2.im * r.im;
            if fpp <= 0.0 {
                break;
            }
            s -= (fp / fpp).clamp(-h, h);
            let dist = (self.curve.eval(s) - p).norm();
            if dist < best.1 {
                best = (s, dist);
            } else {
                break;
            }
        }
        (wrap_angle(best.0), best.1)
    }
}

/// Parameters of [`find_rectangles_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FindOptions {
    pub grid_n: usize,
    pub tol: f64,
    /// Keep both generators of a rectangle that is reached by two distinct
    /// ordered solutions (squares at `θ = π/2`); otherwise list each geometric
    /// rectangle once.
    pub all_generators: bool,
}

impl Default for FindOptions {
    fn default() -> Self {
        Self { grid_n: 128, tol: 1e-11, all_generators: false }
    }
}

/// All inscribed θ-rectangles found from a `grid_n × grid_n` seed grid.
pub fn find_rectangles(curve: &JordanCurve, theta: f64, grid_n: usize, tol: f64) -> Result<Vec<InscribedRectangle>, InscribeError> {
    find_rectangles_with(curve, theta, &FindOptions { grid_n, tol, all_generators: false })
}

pub fn find_rectangles_with(curve: &JordanCurve, theta: f64, opts: &FindOptions) -> Result<Vec<InscribedRectangle>, InscribeError> {
    if !(theta > 0.0 && theta < PI) {
        return Err(InscribeError::InvalidTheta(theta));
    }
    if opts.grid_n < 32 {
        return Err(InscribeError::InvalidGrid(opts.grid_n));
    }
    let n = opts.grid_n;
    let h = TAU / n as f64;
    let radius = curve.curve_radius();
    let pts = curve.sample(n);
    let proj = Projector::new(curve, (8 * curve.max_frequency() as usize).max(4 * n).min(2048));
    // A seed within half a cell of a solution maps at most h·max|γ'| off the curve.
    let screen = 1.5 * h * curve.max_speed(1024) + 1e-12;
    let min_diag = NONDEGENERACY_CUTOFF * radius;

    let raw: Vec<(Vector4<f64>, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let pts = &pts;
            let proj = &proj;
            (i + 1..n).filter_map(move |j| {
                let back = rot_theta(PointPair::new(pts[i], pts[j]), -theta);
                let (s2, dz) = proj.project(back.z);
                if dz > screen {
                    return None;
                }
                let (t2, dw) = proj.project(back.w);
                if dw > screen {
                    return None;
                }
                let x0 = Vector4::new(i as f64 * h, j as f64 * h, s2, t2);
                let sol = newton_rectangle(curve, theta, x0, opts.tol)?;
                Some((sol.x, sol.residual))
            })
        })
        .collect();

    let mut rects: Vec<InscribedRectangle> = Vec::new();
    for (x, _) in raw {
        let rect = InscribedRectangle::from_params(curve, theta, [x[0], x[1], x[2], x[3]]);
        if rect.diameter() < min_diag || rect.residual > opts.tol {
            continue;
        }
        insert_dedup(&mut rects, canonical(rect));
    }
    if !opts.all_generators {
        let mut geometric: Vec<InscribedRectangle> = Vec::new();
        for r in rects {
            match geometric.iter_mut().find(|g| same_vertex_set(g, &r, DEDUPE_TOL * radius.max(1e-300))) {
                Some(g) if r.residual < g.residual => *g = r,
                Some(_) => {}
                None => geometric.push(r),
            }
        }
        rects = geometric;
    }
    let (mut good, degenerate): (Vec<_>, Vec<_>) = rects.into_iter().partition(|r| !r.is_degenerate());
    if !degenerate.is_empty() {
        log::warn!(
            "{}: {} near-singular rectangle solutions at θ = {theta:.6} (condition > {DEGENERATE_CONDITION:e})",
            curve.name(),
            degenerate.len()
        );
        good.extend(thin_degenerate(degenerate, |r| (r.params[0], r.params[1]), |r| r.residual));
    }
    good.sort_by(|a, b| a.params.partial_cmp(&b.params).expect("finite parameters"));
    Ok(good)
}

/// Distance on the parameter torus, max-norm.
pub fn torus_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|k| angle_diff(a[k], b[k]).abs()).fold(0.0, f64::max)
}

/// Torus distance modulo the swap `(s, t, s2, t2) → (t, s, t2, s2)`.
pub fn quadruple_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let swapped = [b[1], b[0], b[3], b[2]];
    torus_distance(a, b).min(torus_distance(a, &swapped))
}

/// Orient so that `s < t`.
fn canonical(r: InscribedRectangle) -> InscribedRectangle {
    if r.params[0] < r.params[1] {
        r
    } else {
        r.swapped()
    }
}

fn insert_dedup(list: &mut Vec<InscribedRectangle>, r: InscribedRectangle) {
    match list.iter_mut().find(|q| quadruple_distance(&q.params, &r.params) <= DEDUPE_TOL) {
        Some(q) if r.residual < q.residual => *q = r,
        Some(_) => {}
        None => list.push(r),
    }
}

fn same_vertex_set(a: &InscribedRectangle, b: &InscribedRectangle, tol: f64) -> bool {
    a.vertices.iter().all(|p| b.vertices.iter().any(|q| (p - q).norm() <= tol))
        && b.vertices.iter().all(|p| a.vertices.iter().any(|q| (p - q).norm() <= tol))
}

/// Keep the lowest-residual member per `(s, t)` bucket.
fn thin_degenerate<T>(items: Vec<T>, key: impl Fn(&T) -> (f64, f64), residual: impl Fn(&T) -> f64) -> Vec<T> {
    let bucket = |v: f64| ((v / TAU * DEGENERATE_BUCKETS) as i64).min(DEGENERATE_BUCKETS as i64 - 1);
    let mut kept: Vec<((i64, i64), T)> = Vec::new();
    for it in items {
        let (a, b) = key(&it);
        let cell = (bucket(a), bucket(b));
        match kept.iter_mut().find(|(c, _)| *c == cell) {
            Some((_, k)) if residual(&it) < residual(k) => *k = it,
            Some(_) => {}
            None => kept.push((cell, it)),
        }
    }
    kept.into_iter().map(|(_, it)| it).collect()
}

/// An ordered pair `(s, t)` whose chord is normal to `γ` at both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Binormal {
    pub s: f64,
    pub t: f64,
    pub chord_length: f64,
    /// Number of negative Hessian eigenvalues of `½|γ(s) − γ(t)|²`;
    /// `None` when the Hessian is degenerate.
    pub morse_index: Option<u8>,
    /// Max-norm of the orthogonality residual.
    pub residual: f64,
}

impl Binormal {
    pub fn is_degenerate(&self) -> bool {
        self.morse_index.is_none()
    }
}

struct ChordJet {
    grad: Vector2<f64>,
    hess: Matrix2<f64>,
    chord: f64,
}

#[inline]
fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

// Gradient and Hessian of f(s, t) = ½|γ(s) − γ(t)|².
fn chord_jet(curve: &JordanCurve, s: f64, t: f64) -> ChordJet {
    let (ps, ds, dds) = curve.jet(s);
    let (pt, dt, ddt) = curve.jet(t);
    let d = ps - pt;
    let hst = -dot(ds, dt);
    ChordJet {
        grad: Vector2::new(dot(ds, d), -dot(dt, d)),
        hess: Matrix2::new(ds.norm_sqr() + dot(dds, d), hst, hst, dt.norm_sqr() - dot(ddt, d)),
        chord: d.norm(),
    }
}

/// Relative determinant below which a binormal Hessian counts as degenerate.
pub const DEGENERATE_HESSIAN: f64 = 1e-12;

/// All ordered binormals, seeded from discrete local minima of the
/// orthogonality residual on a `grid_n × grid_n` grid.
pub fn find_binormals(curve: &JordanCurve, grid_n: usize, tol: f64) -> Result<Vec<Binormal>, InscribeError> {
    if grid_n < 32 {
        return Err(InscribeError::InvalidGrid(grid_n));
    }
    let n = grid_n;
    let h = TAU / n as f64;
    let jets: Vec<_> = (0..n).map(|j| curve.eval_d1(j as f64 * h)).collect();
    let g2 = |i: usize, j: usize| {
        let d = jets[i % n].0 - jets[j % n].0;
        dot(jets[i % n].1, d).powi(2) + dot(jets[j % n].1, d).powi(2)
    };
    let radius = curve.curve_radius();
    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = g2(i, j);
            let is_min = (0..3).all(|a| {
                (0..3).all(|b| (a == 1 && b == 1) || v <= g2(i + n + a - 1, j + n + b - 1))
            });
            if is_min {
                seeds.push((i as f64 * h, j as f64 * h));
            }
        }
    }
    let mut found: Vec<Binormal> = Vec::new();
    for (s0, t0) in seeds {
        let Some((s, t)) = newton_binormal(curve, s0, t0, tol) else { continue };
        let cj = chord_jet(curve, s, t);
        if cj.chord < NONDEGENERACY_CUTOFF * radius {
            continue;
        }
        let scale = cj.hess.norm().powi(2).max(1e-300);
        let det = cj.hess.determinant();
        let morse_index = if det.abs() < DEGENERATE_HESSIAN * scale {
            None
        } else {
            let (l0, l1) = sym2_eigenvalues(cj.hess[(0, 0)], cj.hess[(0, 1)], cj.hess[(1, 1)]);
            Some((l0 < 0.0) as u8 + (l1 < 0.0) as u8)
        };
        let b = Binormal {
            s: wrap_angle(s),
            t: wrap_angle(t),
            chord_length: cj.chord,
            morse_index,
            residual: cj.grad.amax() / cj.chord,
        };
        let near = |q: &Binormal| angle_diff(q.s, b.s).abs().max(angle_diff(q.t, b.t).abs()) <= DEDUPE_TOL;
        match found.iter_mut().find(|q| near(q)) {
            Some(q) if b.residual < q.residual => *q = b,
            Some(_) => {}
            None => found.push(b),
        }
    }
    let (mut good, degenerate): (Vec<_>, Vec<_>) = found.into_iter().partition(|b| !b.is_degenerate());
    if !degenerate.is_empty() {
        log::warn!("{}: {} binormals with degenerate Hessian", curve.name(), degenerate.len());
        good.extend(thin_degenerate(degenerate, |b| (b.s, b.t), |b| b.residual));
    }
    good.sort_by(|a, b| (a.s, a.t).partial_cmp(&(b.s, b.t)).expect("finite parameters"));
    Ok(good)
}

// Newton on ∇f = 0; the residual is scaled by the chord so `tol` is an angle.
fn newton_binormal(curve: &JordanCurve, mut s: f64, mut t: f64, tol: f64) -> Option<(f64, f64)> {
    let resid = |cj: &ChordJet| cj.grad.norm() / cj.chord.max(1e-300);
    let mut cj = chord_jet(curve, s, t);
    let mut r = resid(&cj);
    for _ in 0..MAX_NEWTON_ITERS {
        let mut step = solve2(&cj.hess, &(-cj.grad))?.x;
        let big = step.amax();
        if big > STEP_CLAMP {
            step *= STEP_CLAMP / big;
        }
        if r <= tol && step.amax() < STEP_TOL {
            return Some((s, t));
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 1024.0 {
            let (ns, nt) = (s + lambda * step[0], t + lambda * step[1]);
            let nj = chord_jet(curve, ns, nt);
            let nr = resid(&nj);
            if nr < (1.0 - 1e-4 * lambda) * r {
                (s, t, cj, r) = (ns, nt, nj, nr);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return (r <= tol).then_some((s, t));
        }
    }
    (r <= tol).then_some((s, t))
}

/// Counts of nondegenerate binormals by Morse index `[0, 1, 2]`.
pub fn morse_counts(binormals: &[Binormal]) -> [usize; 3] {
    let mut c = [0; 3];
    for b in binormals {
        if let Some(k) = b.morse_index {
            c[k as usize] += 1;
        }
    }
    c
}

/// Upper estimate of the infimal diagonal length of inscribed rectangles.
///
/// Takes the minimum over binormal chords (the `θ → 0` limit) and the
/// diagonals of rectangles found on an interior `θ` grid, then refines the best
/// grid rectangle by golden-section search in `θ` with Newton tracking.
pub fn estimate_width(curve: &JordanCurve, theta_steps: usize) -> Result<f64, InscribeError> {
    if theta_steps < 16 {
        return Err(InscribeError::InvalidSteps(theta_steps));
    }
    let opts = FindOptions::default();
    let binormals = find_binormals(curve, opts.grid_n, 1e-12)?;
    let mut best = binormals.iter().map(|b| b.chord_length).fold(f64::INFINITY, f64::min);
    let dtheta = PI / (theta_steps + 1) as f64;
    let mut best_rect: Option<InscribedRectangle> = None;
    let mut any = !binormals.is_empty();
    for i in 1..=theta_steps {
        let theta = i as f64 * dtheta;
        for r in find_rectangles_with(curve, theta, &opts)? {
            any = true;
            if r.diameter() < best_rect.as_ref().map_or(f64::INFINITY, |b| b.diameter()) {
                best_rect = Some(r);
            }
        }
    }
    if !any {
        return Err(InscribeError::EmptySpectrum);
    }
    if let Some(r0) = best_rect {
        best = best.min(r0.diameter());
        let x0 = Vector4::from(r0.params);
        let diag = |theta: f64| {
            newton_rectangle(curve, theta, x0, opts.tol)
                .map(|sol| (curve.eval(sol.x[0]) - curve.eval(sol.x[1])).norm())
                .filter(|d| *d >= NONDEGENERACY_CUTOFF * curve.curve_radius())
                .unwrap_or(f64::INFINITY)
        };
        let (mut a, mut b) = ((r0.theta - dtheta).max(crate::THETA_CLAMP), (r0.theta + dtheta).min(PI - crate::THETA_CLAMP));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (diag(c), diag(d));
        for _ in 0..40 {
            best = best.min(fc).min(fd);
            if fc < fd {
                (b, d, fd) = (d, c, fc);
                c = b - g * (b - a);
                fc = diag(c);
            } else {
                (a, c, fc) = (c, d, fd);
                d = a + g * (b - a);
                fd = diag(d);
            }
        }
        best = best.min(fc).min(fd);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Mode;
    use proptest::prelude::*;

    fn circle() -> JordanCurve {
        JordanCurve::new("circle", [Mode::new(1, Complex64::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn residual_vanishes_on_circle_square() {
        let r = rectangle_residual(&circle(), PI / 2.0, [0.0, PI, 1.5 * PI, 0.5 * PI]);
        assert!(r.iter().all(|v| v.abs() < 1e-15), "{r:?}");
        let bad = rectangle_residual(&circle(), PI / 2.0, [0.0, 1.0, 2.0, 3.0]);
        assert!(bad.iter().any(|v| v.abs() > 0.1));
    }

    #[test]
    fn residual_is_periodic() {
        let g = JordanCurve::ellipse(2.0, 1.0);
        let a = rectangle_residual(&g, 1.0, [0.3, 2.0, 4.0, 5.0]);
        let b = rectangle_residual(&g, 1.0, [0.3 + TAU, 2.0 - TAU, 4.0 + 2.0 * TAU, 5.0]);
        for k in 0..4 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = JordanCurve::new_unchecked(
            "w",
            [Mode::new(1, Complex64::new(1.0, 0.0)), Mode::new(-2, Complex64::new(0.1, 0.05))],
        );
        let x = Vector4::new(0.3, 2.5, 4.1, 5.9);
        let theta = 1.1;
        let (_, j, dth) = system_theta(&g, theta, &x);
        let h = 1e-6;
        for c in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let fd = (system(&g, theta, &xp).0 - system(&g, theta, &xm).0) / (2.0 * h);
            assert!((fd - j.column(c)).amax() < 1e-8);
        }
        let fd = (system(&g, theta + h, &x).0 - system(&g, theta - h, &x).0) / (2.0 * h);
        assert!((fd - dth).amax() < 1e-8);
    }

    #[test]
    fn ellipse_square() {
        let g = JordanCurve::ellipse(2.0, 1.0);
        let rects = find_rectangles(&g, PI / 2.0, 128, 1e-11).unwrap();
        assert_eq!(rects.len(), 1, "{rects:#?}");
        let r = &rects[0];
        // Square vertices (±u, ±u) with u²/4 + u² = 1.
        let u = 2.0 / 5f64.sqrt();
        for v in r.vertices {
            assert!((v.re.abs() - u).abs() < 1e-8 && (v.im.abs() - u).abs() < 1e-8, "{v}");
        }
        assert!((r.rad - 2.0 * 2f64.sqrt() / 5f64.sqrt()).abs() < 1e-9);
        assert!(!r.is_degenerate());
    }

    #[test]
    fn circle_family_representatives() {
        let rects = find_rectangles(&circle(), 1.0, 64, 1e-11).unwrap();
        assert!(rects.len() >= 8, "{}", rects.len());
        for r in &rects {
            assert!((r.rad - 1.0).abs() < 1e-8);
            assert!(r.center.norm() < 1e-8);
            assert!(r.residual <= 1e-10);
        }
    }

    #[test]
    fn rectangle_invariants_hold() {
        let g = JordanCurve::new(
            "wobble",
            [Mode::new(1, Complex64::new(1.0, 0.0)), Mode::new(-2, Complex64::new(0.08, 0.03)), Mode::new(3, Complex64::new(0.02, 0.0))],
        )
        .unwrap();
        for theta in [0.4, 1.3, 2.5] {
            let rects = find_rectangles(&g, theta, 96, 1e-11).unwrap();
            assert!(!rects.is_empty());
            for r in &rects {
                assert!(r.residual <= 1e-10);
                let d1 = r.z() - r.w();
                let d2 = r.z2() - r.w2();
                assert!((d1.norm() - d2.norm()).abs() < 1e-10);
                assert!((0.5 * (r.z() + r.w()) - 0.5 * (r.z2() + r.w2())).norm() < 1e-10);
                // The angle from z′w′ to zw is θ.
                assert!(angle_diff((d1 / d2).arg(), theta).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn square_has_two_generators_when_requested() {
        let g = JordanCurve::ellipse(2.0, 1.0);
        let opts = FindOptions { all_generators: true, ..FindOptions::default() };
        assert_eq!(find_rectangles_with(&g, PI / 2.0, &opts).unwrap().len(), 2);
        let opts = FindOptions { all_generators: true, ..FindOptions::default() };
        assert_eq!(find_rectangles_with(&g, 1.0, &opts).unwrap().len(), find_rectangles(&g, 1.0, 128, 1e-11).unwrap().len());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(find_rectangles(&circle(), 0.0, 64, 1e-11), Err(InscribeError::InvalidTheta(0.0)));
        assert_eq!(find_rectangles(&circle(), 1.0, 8, 1e-11), Err(InscribeError::InvalidGrid(8)));
        assert_eq!(find_binormals(&circle(), 8, 1e-11), Err(InscribeError::InvalidGrid(8)));
    }

    #[test]
    fn ellipse_binormals() {
        let g = JordanCurve::ellipse(2.0, 1.0);
        let bs = find_binormals(&g, 128, 1e-12).unwrap();
        assert_eq!(bs.len(), 4, "{bs:#?}");
        let mut by_chord: Vec<(f64, Option<u8>)> = bs.iter().map(|b| (b.chord_length, b.morse_index)).collect();
        by_chord.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!((by_chord[0].0 - 2.0).abs() < 1e-10 && (by_chord[1].0 - 2.0).abs() < 1e-10);
        assert!((by_chord[2].0 - 4.0).abs() < 1e-10 && (by_chord[3].0 - 4.0).abs() < 1e-10);
        assert_eq!(by_chord.iter().map(|b| b.1).collect::<Vec<_>>(), vec![Some(1), Some(1), Some(2), Some(2)]);
        let c = morse_counts(&bs);
        assert_eq!(c[0] as i64 - c[1] as i64 + c[2] as i64, 0);
        for b in &bs {
            let (ps, ds) = g.eval_d1(b.s);
            let (pt, dt) = g.eval_d1(b.t);
            assert!(dot(ds, ps - pt).abs() < 1e-10 && dot(dt, ps - pt).abs() < 1e-10);
        }
    }

    #[test]
    fn circle_binormals_are_degenerate() {
        let bs = find_binormals(&circle(), 64, 1e-12).unwrap();
        assert!(bs.len() >= 8);
        for b in &bs {
            assert!(b.is_degenerate());
            assert!((b.chord_length - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn width_examples() {
        assert!((estimate_width(&circle(), 16).unwrap() - 2.0).abs() < 1e-8);
        let e = JordanCurve::ellipse(2.0, 1.0);
        let w = estimate_width(&e, 16).unwrap();
        assert!(w <= 2.0 + 1e-3 && w > 1.9, "{w}");
        let w3 = estimate_width(&e.scaled(3.0), 16).unwrap();
        assert!((w3 - 3.0 * w).abs() < 1e-6 * w3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]
        #[test]
        fn rigid_motion_equivariance(phi in 0.0f64..TAU, bx in -2.0f64..2.0, by in -2.0f64..2.0, theta in 0.3f64..2.8) {
            let g = JordanCurve::ellipse(2.0, 1.0);
            let b = Complex64::new(bx, by);
            let moved = g.rigid_motion(phi, b);
            let rot = Complex64::from_polar(1.0, phi);
            let base = find_rectangles(&g, theta, 96, 1e-11).unwrap();
            let image = find_rectangles(&moved, theta, 96, 1e-11).unwrap();
            prop_assert_eq!(base.len(), image.len());
            for r in &base {
                let mapped: Vec<Complex64> = r.vertices.iter().map(|v| rot * v + b).collect();
                let hit = image.iter().any(|q| mapped.iter().all(|p| q.vertices.iter().any(|v| (p - v).norm() < 1e-8)));
                prop_assert!(hit);
            }
        }
    }
}
