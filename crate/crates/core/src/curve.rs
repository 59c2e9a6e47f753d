//! Real analytic Jordan curves as truncated Fourier series.
//!
//! A [`JordanCurve`] is `γ(s) = Σ_k c_k e^{iks}` for finitely many integer
//! frequencies `k`. Curves accepted by [`JordanCurve::new`] are simple,
//! immersed and counterclockwise. [`PolygonCurve`] holds simple polygons, which
//! [`smooth_approximate`] turns into area-matched Fourier curves.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::solve2;
use crate::{angle_diff, TAU};

/// Grid used by the immersion check.
pub const IMMERSION_GRID: usize = 4096;
/// Two curve points closer than this count as the same point.
pub const SIMPLICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("curve has no nonzero modes")]
    Empty,
    #[error("curve is not simple: γ({s:.9}) ≈ γ({t:.9})")]
    NotSimple { s: f64, t: f64 },
    #[error("curve is not immersed: min |γ'| = {min_speed:e}")]
    NotImmersed { min_speed: f64 },
    #[error("curve encloses zero area")]
    ZeroArea,
    #[error("smoothing {smoothing} with {mode_count} modes does not give a simple curve")]
    NotSimpleAfterSmoothing { mode_count: usize, smoothing: f64 },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One Fourier coefficient `c_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: i32,
    pub re: f64,
    pub im: f64,
}

impl Mode {
    pub fn new(k: i32, c: Complex64) -> Self {
        Self { k, re: c.re, im: c.im }
    }

    #[inline]
    pub fn coeff(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Serialize, Deserialize)]
struct CurveFile {
    name: String,
    modes: Vec<Mode>,
}

/// A closed curve `γ(s) = Σ_k c_k e^{iks}`, `s ∈ [0, 2π)`.
#[derive(Clone, PartialEq)]
pub struct JordanCurve {
    name: String,
    modes: Vec<Mode>,
    // Dense coefficients for k = kmin, kmin + stride, ... used by evaluation.
    kmin: i32,
    stride: i32,
    dense: Vec<Complex64>,
}

impl fmt::Debug for JordanCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JordanCurve")
            .field("name", &self.name)
            .field("modes", &self.modes.len())
            .finish()
    }
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl JordanCurve {
    /// Build and validate a curve. Orientation is normalized to
    /// counterclockwise by reversing the parametrization (`c_k ↦ c_{−k}`).
    pub fn new(name: impl Into<String>, modes: impl IntoIterator<Item = Mode>) -> Result<Self, CurveError> {
        let mut curve = Self::new_unchecked(name, modes);
        if curve.modes.iter().all(|m| m.k == 0) {
            return Err(CurveError::Empty);
        }
        let area = curve.enclosed_area();
        if area == 0.0 {
            return Err(CurveError::ZeroArea);
        }
        if area < 0.0 {
            curve = curve.reversed();
        }
        let min_speed = curve.min_speed(IMMERSION_GRID);
        let max_speed = curve.max_speed(IMMERSION_GRID);
        if !(min_speed > 1e-8 * max_speed) {
            return Err(CurveError::NotImmersed { min_speed });
        }
        if let Some((s, t)) = curve.self_intersection() {
            return Err(CurveError::NotSimple { s, t });
        }
        Ok(curve)
    }

    /// Build a curve without validation. Duplicate frequencies are summed and
    /// zero coefficients dropped; nothing else is checked.
    pub fn new_unchecked(name: impl Into<String>, modes: impl IntoIterator<Item = Mode>) -> Self {
        let mut merged: std::collections::BTreeMap<i32, Complex64> = Default::default();
        for m in modes {
            *merged.entry(m.k).or_default() += m.coeff();
        }
        let modes: Vec<Mode> = merged
            .into_iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| Mode::new(k, c))
            .collect();
        let kmin = modes.first().map_or(0, |m| m.k);
        let kmax = modes.last().map_or(0, |m| m.k);
        let stride = modes.iter().fold(0, |g, m| gcd(g, m.k - kmin)).max(1);
        let mut dense = vec![Complex64::new(0.0, 0.0); ((kmax - kmin) / stride + 1) as usize];
        for m in &modes {
            dense[((m.k - kmin) / stride) as usize] = m.coeff();
        }
        Self { name: name.into(), modes, kmin, stride, dense }
    }

    /// Circle of radius `r` about `center`.
    pub fn circle(r: f64, center: Complex64) -> Self {
        Self::new_unchecked("circle", [Mode::new(0, center), Mode::new(1, Complex64::new(r, 0.0))])
    }

    /// Axis-aligned ellipse `x = a cos s, y = b sin s`.
    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new_unchecked(
            format!("ellipse({a},{b})"),
            [
                Mode::new(1, Complex64::new(0.5 * (a + b), 0.0)),
                Mode::new(-1, Complex64::new(0.5 * (a - b), 0.0)),
            ],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Largest `|k|` present.
    pub fn max_frequency(&self) -> i32 {
        self.modes.iter().map(|m| m.k.abs()).max().unwrap_or(0)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `γ(s)`.
    #[inline]
    pub fn eval(&self, s: f64) -> Complex64 {
        let mut e = Complex64::from_polar(1.0, self.kmin as f64 * s);
        let step = Complex64::from_polar(1.0, self.stride as f64 * s);
        let mut acc = Complex64::new(0.0, 0.0);
        for c in &self.dense {
            acc += c * e;
            e *= step;
        }
        acc
    }

    /// `γ'(s)`.
    #[inline]
    pub fn derivative(&self, s: f64) -> Complex64 {
        self.jet(s).1
    }

    /// `(γ(s), γ'(s), γ''(s))` in one pass.
    #[inline]
    pub fn jet(&self, s: f64) -> (Complex64, Complex64, Complex64) {
        let mut e = Complex64::from_polar(1.0, self.kmin as f64 * s);
        let step = Complex64::from_polar(1.0, self.stride as f64 * s);
        let (mut p, mut d1, mut d2) = (Complex64::default(), Complex64::default(), Complex64::default());
        let mut k = self.kmin as f64;
        let dk = self.stride as f64;
        for c in &self.dense {
            let term = c * e;
            p += term;
            d1 += term * Complex64::new(0.0, k);
            d2 -= term * (k * k);
            e *= step;
            k += dk;
        }
        (p, d1, d2)
    }

    /// Value and first derivative.
    #[inline]
    pub fn eval_d1(&self, s: f64) -> (Complex64, Complex64) {
        let (p, d1, _) = self.jet(s);
        (p, d1)
    }

    /// `n` equally spaced samples `γ(2πj/n)`.
    pub fn sample(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|j| self.eval(TAU * j as f64 / n as f64)).collect()
    }

    /// Signed enclosed area `π Σ_k k |c_k|²`; positive for counterclockwise curves.
    pub fn enclosed_area(&self) -> f64 {
        PI * self.modes.iter().map(|m| m.k as f64 * m.coeff().norm_sqr()).sum::<f64>()
    }

    /// Mean point `c_0` of the parametrization.
    pub fn centroid(&self) -> Complex64 {
        self.modes.iter().find(|m| m.k == 0).map_or(Complex64::default(), Mode::coeff)
    }

    /// Half the diameter, `½ max |γ(s) − γ(t)|`.
    pub fn curve_radius(&self) -> f64 {
        0.5 * self.diameter_pair().2
    }

    /// Parameters `(s, t)` realizing the diameter, and the diameter itself.
    pub fn diameter_pair(&self) -> (f64, f64, f64) {
        let m = (16 * self.max_frequency().max(16) as usize).min(1024);
        let pts = self.sample(m);
        // Farthest partner of each sample; the best few are polished.
        let mut cands: Vec<(f64, usize, usize)> = (0..m)
            .map(|i| {
                let (j, d2) = (0..m)
                    .map(|j| (j, (pts[i] - pts[j]).norm_sqr()))
                    .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
                (d2, i, j)
            })
            .collect();
        cands.sort_by(|a, b| b.0.total_cmp(&a.0));
        let h = TAU / m as f64;
        let mut best = (0.0, 0.0, 0.0);
        for &(_, i, j) in cands.iter().take(8) {
            let (s, t, d) = self.ascend_chord(i as f64 * h, j as f64 * h);
            if d > best.2 {
                best = (s, t, d);
            }
        }
        best
    }

    // Newton ascent of |γ(s) − γ(t)|² with a gradient fallback.
    fn ascend_chord(&self, mut s: f64, mut t: f64) -> (f64, f64, f64) {
        let f = |s: f64, t: f64| (self.eval(s) - self.eval(t)).norm_sqr();
        let mut fv = f(s, t);
        for _ in 0..60 {
            let (ps, ds, dds) = self.jet(s);
            let (pt, dt, ddt) = self.jet(t);
            let d = ps - pt;
            let dot = |a: Complex64, b: Complex64| a.re * b.re + a.im * b.im;
            let g = Vector2::new(dot(ds, d), -dot(dt, d));
            let hss = ds.norm_sqr() + dot(dds, d);
            let htt = dt.norm_sqr() - dot(ddt, d);
            let hst = -dot(ds, dt);
            let hess = Matrix2::new(hss, hst, hst, htt);
            let negdef = hss < 0.0 && hss * htt - hst * hst > 0.0;
            let step = if negdef {
                solve2(&hess, &(-g)).map(|r| r.x).unwrap_or(g * 0.1)
            } else {
                g * (0.1 / (1.0 + g.norm()))
            };
            let mut lambda = 1.0;
            let mut moved = false;
            while lambda > 1e-6 {
                let (ns, nt) = (s + lambda * step[0], t + lambda * step[1]);
                let nf = f(ns, nt);
                if nf >= fv {
                    moved = nf > fv;
                    s = ns;
                    t = nt;
                    fv = nf;
                    break;
                }
                lambda *= 0.5;
            }
            if !moved || step.norm() * lambda < 1e-15 {
                break;
            }
        }
        (crate::wrap_angle(s), crate::wrap_angle(t), fv.sqrt())
    }

    /// Arc length `∫ |γ'(s)| ds`. The integrand is periodic and analytic, so the
    /// trapezoid rule converges geometrically; the sample count doubles until
    /// successive estimates agree to 1e-14 relative.
    pub fn curve_length(&self) -> f64 {
        let trap = |n: usize| -> f64 {
            let h = TAU / n as f64;
            (0..n).map(|j| self.derivative(j as f64 * h).norm()).sum::<f64>() * h
        };
        let mut n = 64usize;
        let mut prev = trap(n);
        while n < 1 << 20 {
            n *= 2;
            let next = trap(n);
            if (next - prev).abs() <= 1e-14 * next.abs() {
                return next;
            }
            prev = next;
        }
        prev
    }

    pub fn min_speed(&self, n: usize) -> f64 {
        (0..n)
            .map(|j| self.derivative(TAU * j as f64 / n as f64).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_speed(&self, n: usize) -> f64 {
        (0..n).map(|j| self.derivative(TAU * j as f64 / n as f64).norm()).fold(0.0, f64::max)
    }

    fn max_accel(&self, n: usize) -> f64 {
        (0..n).map(|j| self.jet(TAU * j as f64 / n as f64).2.norm()).fold(0.0, f64::max)
    }

    /// True iff no two well-separated parameters map within [`SIMPLICITY_TOL`].
    pub fn is_simple(&self) -> bool {
        self.self_intersection().is_none()
    }

    /// A pair `(s, t)` with `γ(s) ≈ γ(t)`, if any.
    ///
    /// The sampled polyline is split into a bounding-box tree; overlapping
    /// leaves are tested segment by segment. Crossing segments are reported
    /// directly; near misses within the sampling error are settled by Newton
    /// on `γ(s) − γ(t)`.
    pub fn self_intersection(&self) -> Option<(f64, f64)> {
        let n = (32 * self.max_frequency() as usize).clamp(IMMERSION_GRID, 1 << 15);
        let h = TAU / n as f64;
        let pts = self.sample(n);
        let slack = 1.1 * h * h / 8.0 * self.max_accel(n) + SIMPLICITY_TOL;
        let tree = BoxTree::build(&pts, slack);
        let mut hit = None;
        tree.pairs(&mut |i, j| {
            let gap = (i as isize - j as isize).rem_euclid(n as isize).min((j as isize - i as isize).rem_euclid(n as isize));
            if gap < 3 {
                return false;
            }
            let (a0, a1) = (pts[i], pts[(i + 1) % n]);
            let (b0, b1) = (pts[j], pts[(j + 1) % n]);
            if let Some((u, v)) = segment_intersection(a0, a1, b0, b1) {
                hit = Some(self.refine_crossing((i as f64 + u) * h, (j as f64 + v) * h));
                return true;
            }
            if segment_distance(a0, a1, b0, b1) <= slack {
                if let Some((s, t)) = self.newton_touch((i as f64 + 0.5) * h, (j as f64 + 0.5) * h, 3.0 * h) {
                    hit = Some((s, t));
                    return true;
                }
            }
            false
        });
        hit
    }

    fn refine_crossing(&self, s: f64, t: f64) -> (f64, f64) {
        self.newton_touch(s, t, 0.0).unwrap_or((crate::wrap_angle(s), crate::wrap_angle(t)))
    }

    // Gauss–Newton on γ(s) − γ(t) = 0; Some only if it reaches the tolerance.
    fn newton_touch(&self, mut s: f64, mut t: f64, min_sep: f64) -> Option<(f64, f64)> {
        for _ in 0..40 {
            let (ps, ds) = self.eval_d1(s);
            let (pt, dt) = self.eval_d1(t);
            let r = ps - pt;
            if r.norm() < SIMPLICITY_TOL {
                return (angle_diff(s, t).abs() > min_sep).then(|| (crate::wrap_angle(s), crate::wrap_angle(t)));
            }
            let j = Matrix2::new(ds.re, -dt.re, ds.im, -dt.im);
            let step = solve2(&j, &Vector2::new(-r.re, -r.im))?.x;
            if step.norm() > 0.5 {
                return None;
            }
            s += step[0];
            t += step[1];
        }
        None
    }

    /// `λγ`, a homothety about the origin.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new_unchecked(self.name.clone(), self.modes.iter().map(|m| Mode::new(m.k, m.coeff() * lambda)))
    }

    /// `e^{iφ}γ + b`.
    pub fn rigid_motion(&self, rotation: f64, translation: Complex64) -> Self {
        let r = Complex64::from_polar(1.0, rotation);
        let mut modes: Vec<Mode> = self.modes.iter().map(|m| Mode::new(m.k, m.coeff() * r)).collect();
        modes.push(Mode::new(0, translation));
        Self::new_unchecked(self.name.clone(), modes)
    }

    /// Reparametrization `s ↦ s + c`: the returned curve at `s` equals `γ(s + c)`.
    pub fn phase_shifted(&self, c: f64) -> Self {
        Self::new_unchecked(
            self.name.clone(),
            self.modes.iter().map(|m| Mode::new(m.k, m.coeff() * Complex64::from_polar(1.0, m.k as f64 * c))),
        )
    }

    /// Same point set, opposite orientation.
    pub fn reversed(&self) -> Self {
        Self::new_unchecked(self.name.clone(), self.modes.iter().map(|m| Mode::new(-m.k, m.coeff())))
    }

    pub fn to_json(&self) -> String {
        let file = CurveFile { name: self.name.clone(), modes: self.modes.clone() };
        let mut s = serde_json::to_string_pretty(&file).expect("curve serializes");
        s.push('\n');
        s
    }

    /// Parse and validate a curve file.
    pub fn from_json(text: &str) -> Result<Self, CurveError> {
        let file: CurveFile = serde_json::from_str(text)?;
        Self::new(file.name, file.modes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CurveError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CurveError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct BBox {
    lo: Complex64,
    hi: Complex64,
}

impl BBox {
    fn overlaps(&self, o: &BBox) -> bool {
        self.lo.re <= o.hi.re && o.lo.re <= self.hi.re && self.lo.im <= o.hi.im && o.lo.im <= self.hi.im
    }
}

struct BoxNode {
    lo: usize,
    hi: usize,
    bbox: BBox,
    children: Option<(usize, usize)>,
}

/// Bounding-box hierarchy over the segments of a closed polyline.
struct BoxTree {
    nodes: Vec<BoxNode>,
}

const LEAF_SEGMENTS: usize = 8;

impl BoxTree {
    fn build(pts: &[Complex64], pad: f64) -> Self {
        let mut tree = BoxTree { nodes: Vec::new() };
        tree.build_range(pts, pad, 0, pts.len());
        tree
    }

    fn build_range(&mut self, pts: &[Complex64], pad: f64, lo: usize, hi: usize) -> usize {
        let n = pts.len();
        let idx = self.nodes.len();
        let mut bbox = BBox { lo: pts[lo], hi: pts[lo] };
        for i in lo..=hi {
            let p = pts[i % n];
            bbox.lo = Complex64::new(bbox.lo.re.min(p.re), bbox.lo.im.min(p.im));
            bbox.hi = Complex64::new(bbox.hi.re.max(p.re), bbox.hi.im.max(p.im));
        }
        bbox.lo -= Complex64::new(pad, pad);
        bbox.hi += Complex64::new(pad, pad);
        self.nodes.push(BoxNode { lo, hi, bbox, children: None });
        if hi - lo > LEAF_SEGMENTS {
            let mid = (lo + hi) / 2;
            let a = self.build_range(pts, pad, lo, mid);
            let b = self.build_range(pts, pad, mid, hi);
            self.nodes[idx].children = Some((a, b));
        }
        idx
    }

    /// Call `f(i, j)` for segment pairs `i ≤ j` whose padded boxes overlap;
    /// stops early once `f` returns true.
    fn pairs(&self, f: &mut dyn FnMut(usize, usize) -> bool) {
        self.visit(0, 0, f);
    }

    fn visit(&self, a: usize, b: usize, f: &mut dyn FnMut(usize, usize) -> bool) -> bool {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        if !na.bbox.overlaps(&nb.bbox) {
            return false;
        }
        match (na.children, nb.children) {
            (None, None) => {
                for i in na.lo..na.hi {
                    let start = if a == b { i + 1 } else { nb.lo };
                    for j in start..nb.hi {
                        if f(i, j) {
                            return true;
                        }
                    }
                }
                false
            }
            _ if a == b => {
                let (l, r) = na.children.unwrap();
                self.visit(l, l, f) || self.visit(r, r, f) || self.visit(l, r, f)
            }
            (Some((l, r)), _) if nb.children.is_none() || na.hi - na.lo >= nb.hi - nb.lo => {
                self.visit(l, b, f) || self.visit(r, b, f)
            }
            (_, Some((l, r))) => self.visit(a, l, f) || self.visit(a, r, f),
            _ => unreachable!(),
        }
    }
}

#[inline]
fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper intersection of segments `a0a1` and `b0b1`, as fractions along each.
pub(crate) fn segment_intersection(a0: Complex64, a1: Complex64, b0: Complex64, b1: Complex64) -> Option<(f64, f64)> {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = cross(da, db);
    if denom == 0.0 {
        return None;
    }
    let u = cross(b0 - a0, db) / denom;
    let v = cross(b0 - a0, da) / denom;
    ((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)).then_some((u, v))
}

pub(crate) fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let u = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * u)).norm()
}

fn segment_distance(a0: Complex64, a1: Complex64, b0: Complex64, b1: Complex64) -> f64 {
    if segment_intersection(a0, a1, b0, b1).is_some() {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

#[derive(Serialize, Deserialize)]
struct PolygonFile {
    name: String,
    vertices: Vec<[f64; 2]>,
}

/// A simple closed polygon; the closing edge is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonCurve {
    pub name: String,
    vertices: Vec<Complex64>,
}

impl PolygonCurve {
    pub fn new(name: impl Into<String>, vertices: Vec<Complex64>) -> Result<Self, CurveError> {
        let n = vertices.len();
        if n < 3 {
            return Err(CurveError::InvalidPolygon(format!("{n} vertices")));
        }
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(CurveError::InvalidPolygon(format!("repeated vertex at index {i}")));
            }
        }
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a0, a1) = (vertices[i], vertices[(i + 1) % n]);
                let (b0, b1) = (vertices[j], vertices[(j + 1) % n]);
                if segment_distance(a0, a1, b0, b1) == 0.0 {
                    return Err(CurveError::InvalidPolygon(format!("edges {i} and {j} meet")));
                }
            }
        }
        let poly = Self { name: name.into(), vertices };
        if poly.signed_area() == 0.0 {
            return Err(CurveError::InvalidPolygon("zero area".into()));
        }
        Ok(poly)
    }

    /// Axis-aligned square with the given side, centered at the origin.
    pub fn square(side: f64) -> Self {
        let h = 0.5 * side;
        Self::new(
            "square",
            vec![Complex64::new(-h, -h), Complex64::new(h, -h), Complex64::new(h, h), Complex64::new(-h, h)],
        )
        .expect("square is simple")
    }

    /// Regular `n`-gon with circumradius `r`.
    pub fn regular(n: usize, r: f64) -> Self {
        let verts = (0..n).map(|j| Complex64::from_polar(r, TAU * j as f64 / n as f64)).collect();
        Self::new(format!("regular{n}"), verts).expect("regular polygon is simple")
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        let o = self.vertices[0];
        0.5 * self.edges().map(|(a, b)| cross(a - o, b - o)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Distance from `p` to the polygon boundary.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// Counterclockwise copy.
    pub fn counterclockwise(&self) -> Self {
        let mut p = self.clone();
        if p.signed_area() < 0.0 {
            p.vertices.reverse();
        }
        p
    }

    /// Point at arc-length fraction `u ∈ [0, 1)` of the boundary.
    pub fn point_at(&self, u: f64) -> Complex64 {
        let target = u.rem_euclid(1.0) * self.perimeter();
        let mut acc = 0.0;
        for (a, b) in self.edges() {
            let len = (b - a).norm();
            if acc + len >= target {
                return a + (b - a) * ((target - acc) / len);
            }
            acc += len;
        }
        self.vertices[0]
    }

    pub fn to_json(&self) -> String {
        let file = PolygonFile { name: self.name.clone(), vertices: self.vertices.iter().map(|v| [v.re, v.im]).collect() };
        let mut s = serde_json::to_string_pretty(&file).expect("polygon serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CurveError> {
        let file: PolygonFile = serde_json::from_str(text)?;
        Self::new(file.name, file.vertices.iter().map(|v| Complex64::new(v[0], v[1])).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CurveError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CurveError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Smooth a polygon into an analytic Jordan curve of the same area.
///
/// The polygon is parametrized at constant speed over `[0, 2π)`; its Fourier
/// coefficients are exact (the second derivative is a sum of point masses at
/// the vertices), truncated to `|k| ≤ mode_count` and damped by
/// `exp(−smoothing·k²)`. A homothety about `c_0` then restores the polygon's
/// area.
pub fn smooth_approximate(polygon: &PolygonCurve, mode_count: usize, smoothing: f64) -> Result<JordanCurve, CurveError> {
    if mode_count < 8 {
        return Err(CurveError::InvalidArgument(format!("mode_count {mode_count} < 8")));
    }
    if !(smoothing > 0.0) {
        return Err(CurveError::InvalidArgument(format!("smoothing {smoothing} must be positive")));
    }
    let poly = polygon.counterclockwise();
    let verts = poly.vertices();
    let n = verts.len();
    let perimeter = poly.perimeter();
    // Knot parameters s_j and edge velocities u_j = dp/ds on [s_j, s_{j+1}].
    let mut knots = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    for (a, b) in poly.edges() {
        knots.push(TAU * acc / perimeter);
        acc += (b - a).norm();
    }
    knots.push(TAU);
    let vel: Vec<Complex64> = (0..n).map(|j| (verts[(j + 1) % n] - verts[j]) / (knots[j + 1] - knots[j])).collect();

    let mut c0 = Complex64::default();
    for j in 0..n {
        c0 += (verts[j] + verts[(j + 1) % n]) * (0.5 * (knots[j + 1] - knots[j]));
    }
    c0 /= TAU;

    let k_max = mode_count as i32;
    let mut raw = Vec::with_capacity(2 * mode_count);
    for k in (-k_max..=k_max).filter(|&k| k != 0) {
        let kf = k as f64;
        let mut sum = Complex64::default();
        for j in 0..n {
            let jump = vel[j] - vel[(j + n - 1) % n];
            sum += jump * Complex64::from_polar(1.0, -kf * knots[j]);
        }
        let c = -sum / (TAU * kf * kf) * (-smoothing * kf * kf).exp();
        raw.push((k, c));
    }
    // Symmetric polygons cancel whole residue classes only up to rounding.
    let cmax = raw.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    raw.retain(|(_, c)| c.norm() > 1e-14 * cmax);

    let draft = JordanCurve::new_unchecked(
        poly.name.clone(),
        raw.iter().map(|&(k, c)| Mode::new(k, c)).chain([Mode::new(0, c0)]),
    );
    let area = draft.enclosed_area();
    if !(area > 0.0) {
        return Err(CurveError::NotSimpleAfterSmoothing { mode_count, smoothing });
    }
    let lambda = (poly.area() / area).sqrt();
    let modes = raw.iter().map(|&(k, c)| Mode::new(k, c * lambda)).chain([Mode::new(0, c0)]);
    let name = format!("{}~{mode_count}/{smoothing:e}", poly.name);
    JordanCurve::new(name, modes).map_err(|e| match e {
        CurveError::NotSimple { .. } | CurveError::NotImmersed { .. } => {
            CurveError::NotSimpleAfterSmoothing { mode_count, smoothing }
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_circle() -> JordanCurve {
        JordanCurve::new("circle", [Mode::new(1, c(1.0, 0.0))]).unwrap()
    }

    fn ellipse_q() -> JordanCurve {
        JordanCurve::new("e", [Mode::new(1, c(1.0, 0.0)), Mode::new(-1, c(0.25, 0.0))]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((unit_circle().eval(0.0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((unit_circle().eval(PI / 2.0) - c(0.0, 1.0)).norm() < 1e-15);
        assert!((ellipse_q().eval(0.0) - c(1.25, 0.0)).norm() < 1e-15);
        let g = ellipse_q();
        assert!((g.eval(1.3) - g.eval(1.3 + TAU)).norm() < 1e-13);
    }

    #[test]
    fn derivative_examples() {
        assert!((unit_circle().derivative(0.0) - c(0.0, 1.0)).norm() < 1e-15);
        assert!((unit_circle().derivative(PI) - c(0.0, -1.0)).norm() < 1e-15);
        assert!((ellipse_q().derivative(0.0) - c(0.0, 0.75)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let g = JordanCurve::new_unchecked("w", [Mode::new(1, c(1.0, 0.0)), Mode::new(-3, c(0.05, 0.02)), Mode::new(2, c(0.1, 0.0))]);
        for &s in &[0.1, 1.7, 4.0] {
            let h = 1e-5;
            let fd = (g.eval(s + h) - g.eval(s - h)) / (2.0 * h);
            let (_, d1, d2) = g.jet(s);
            assert!((fd - d1).norm() < 1e-8);
            let fd2 = (g.derivative(s + h) - g.derivative(s - h)) / (2.0 * h);
            assert!((fd2 - d2).norm() < 1e-7);
        }
    }

    #[test]
    fn area_examples() {
        assert!((unit_circle().enclosed_area() - PI).abs() < 1e-15);
        // Oracle: shoelace quadrature at 1e5 samples.
        let g = ellipse_q();
        let pts = g.sample(100_000);
        let shoelace: f64 = 0.5 * (0..pts.len()).map(|j| cross(pts[j], pts[(j + 1) % pts.len()])).sum::<f64>();
        assert!((shoelace - 15.0 * PI / 16.0).abs() < 1e-8);
        assert!((g.enclosed_area() - 15.0 * PI / 16.0).abs() < 1e-14);
        assert!((g.scaled(3.0).enclosed_area() - 9.0 * g.enclosed_area()).abs() < 1e-12);
    }

    // Oracle for the radius: dense grid maximum of pairwise distance.
    fn grid_radius(g: &JordanCurve, n: usize) -> f64 {
        let pts = g.sample(n);
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max((pts[i] - pts[j]).norm_sqr());
            }
        }
        0.5 * best.sqrt()
    }

    #[test]
    fn radius_examples() {
        assert!((unit_circle().curve_radius() - 1.0).abs() < 1e-12);
        let e = ellipse_q();
        let oracle = grid_radius(&e, 4096);
        assert!((oracle - 1.25).abs() < 1e-9);
        assert!((e.curve_radius() - 1.25).abs() < 1.25e-9);
        let e21 = JordanCurve::ellipse(2.0, 1.0);
        assert!((grid_radius(&e21, 4096) - 2.0).abs() < 1e-9);
        assert!((e21.curve_radius() - 2.0).abs() < 2e-9);
    }

    #[test]
    fn length_examples() {
        assert!((unit_circle().curve_length() - TAU).abs() < 1e-12);
        assert!((JordanCurve::circle(2.0, c(0.0, 0.0)).curve_length() - 2.0 * TAU).abs() < 1e-12);
        // Oracle: composite Simpson on sqrt(a² sin² + b² cos²), independent of
        // the Fourier evaluation.
        let n = 200_000;
        let h = TAU / n as f64;
        let f = |s: f64| (4.0 * s.sin().powi(2) + s.cos().powi(2)).sqrt();
        let simpson: f64 = (0..n)
            .map(|j| {
                let a = j as f64 * h;
                (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h)) * h / 6.0
            })
            .sum();
        assert!((simpson - 9.688_448_220_5).abs() < 1e-9);
        let len = JordanCurve::ellipse(2.0, 1.0).curve_length();
        assert!((len - simpson).abs() < 1e-8 * simpson);
    }

    #[test]
    fn simplicity_examples() {
        assert!(unit_circle().is_simple());
        assert!(ellipse_q().is_simple());
        let limacon = JordanCurve::new_unchecked("limacon", [Mode::new(1, c(1.0, 0.0)), Mode::new(2, c(0.9, 0.0))]);
        // Oracle: dense pairwise sample distances between well-separated parameters.
        let n = 2000;
        let pts = limacon.sample(n);
        let mut close = false;
        for i in 0..n {
            for j in i + 50..n {
                if j - i < n - 50 && (pts[i] - pts[j]).norm() < 5e-3 {
                    close = true;
                }
            }
        }
        assert!(close);
        assert!(!limacon.is_simple());
        assert!(matches!(
            JordanCurve::new("limacon", limacon.modes().to_vec()),
            Err(CurveError::NotSimple { .. })
        ));
    }

    #[test]
    fn constructor_orients_counterclockwise() {
        let cw = JordanCurve::new("cw", [Mode::new(-1, c(1.0, 0.0))]).unwrap();
        assert!(cw.enclosed_area() > 0.0);
        assert_eq!(cw.modes()[0].k, 1);
    }

    #[test]
    fn constructor_rejects_cusps() {
        // Cardioid-like curve with a cusp: γ' vanishes at s = π.
        let r = JordanCurve::new("cusp", [Mode::new(1, c(1.0, 0.0)), Mode::new(2, c(0.5, 0.0))]);
        assert!(matches!(r, Err(CurveError::NotImmersed { .. })));
    }

    #[test]
    fn smoothing_square_matches_area_and_length() {
        let sq = PolygonCurve::square(2.0);
        let g = smooth_approximate(&sq, 64, 1e-3).unwrap();
        assert!((g.enclosed_area() - 4.0).abs() <= 4.0 * 1e-12);
        assert!(g.curve_length() <= 1.1 * sq.perimeter());
        assert!(g.is_simple());
    }

    #[test]
    fn smoothing_hexagon_is_close() {
        let hex = PolygonCurve::regular(6, 1.0);
        let g = smooth_approximate(&hex, 64, 1e-3).unwrap();
        // Oracle: sampled two-sided Hausdorff distance.
        let pts = g.sample(4096);
        let d1 = pts.iter().map(|&p| hex.distance_to(p)).fold(0.0, f64::max);
        let d2 = (0..4096)
            .map(|j| {
                let q = hex.point_at(j as f64 / 4096.0);
                pts.iter().map(|&p| (p - q).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        assert!(d1.max(d2) <= 0.05, "hausdorff {}", d1.max(d2));
    }

    #[test]
    fn heavy_smoothing_stays_simple() {
        let tri = PolygonCurve::new("tri", vec![c(0.0, 0.0), c(3.0, 0.0), c(0.5, 1.0)]).unwrap();
        for sm in [1e-2, 1e-1, 1.0, 10.0] {
            let g = smooth_approximate(&tri, 16, sm).unwrap();
            assert!(g.is_simple());
            assert!((g.enclosed_area() - tri.area()).abs() < 1e-12 * tri.area());
        }
    }

    #[test]
    fn smoothing_rejects_bad_arguments() {
        let sq = PolygonCurve::square(2.0);
        assert!(matches!(smooth_approximate(&sq, 4, 1e-3), Err(CurveError::InvalidArgument(_))));
        assert!(matches!(smooth_approximate(&sq, 16, 0.0), Err(CurveError::InvalidArgument(_))));
    }

    #[test]
    fn polygon_validation() {
        assert!(PolygonCurve::new("bow", vec![c(0.0, 0.0), c(1.0, 1.0), c(1.0, 0.0), c(0.0, 1.0)]).is_err());
        assert!(PolygonCurve::new("dup", vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(PolygonCurve::new("two", vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = smooth_approximate(&PolygonCurve::square(2.0), 32, 1e-3).unwrap();
        let text = g.to_json();
        let back = JordanCurve::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.modes(), g.modes());
        let poly = PolygonCurve::regular(5, 1.3);
        assert_eq!(PolygonCurve::from_json(&poly.to_json()).unwrap().to_json(), poly.to_json());
    }

    #[test]
    fn isoperimetric_sanity() {
        for g in [unit_circle(), ellipse_q(), JordanCurve::ellipse(2.0, 1.0)] {
            let (l, a) = (g.curve_length(), g.enclosed_area());
            assert!(l * l >= 4.0 * PI * a - 1e-9);
        }
        let (l, a) = (unit_circle().curve_length(), unit_circle().enclosed_area());
        assert!((l * l - 4.0 * PI * a).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn scaling_laws(lambda in prop::sample::select(vec![0.5, 2.0, 3.0]), b in 0.3f64..0.95) {
            let g = JordanCurve::ellipse(1.0, b);
            let h = g.scaled(lambda);
            prop_assert!((h.enclosed_area() - lambda * lambda * g.enclosed_area()).abs() < 1e-12 * h.enclosed_area());
            prop_assert!((h.curve_length() - lambda * g.curve_length()).abs() < 1e-10 * h.curve_length());
            prop_assert!((h.curve_radius() - lambda * g.curve_radius()).abs() < 1e-9 * h.curve_radius());
        }

        #[test]
        fn accepted_curves_satisfy_invariants(a in 0.0f64..0.15, b in 0.0f64..0.1, phase in 0.0f64..6.0) {
            let modes = [
                Mode::new(1, c(1.0, 0.0)),
                Mode::new(-2, Complex64::from_polar(a, phase)),
                Mode::new(3, Complex64::from_polar(b, 0.5 * phase)),
            ];
            if let Ok(g) = JordanCurve::new("p", modes) {
                prop_assert!(g.enclosed_area() > 0.0);
                prop_assert!(g.curve_length().is_finite());
                prop_assert!(g.is_simple());
                prop_assert!(g.min_speed(IMMERSION_GRID) > 0.0);
            }
        }
    }
}
