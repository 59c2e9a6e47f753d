//! Independent reference computations.
//!
//! The grid oracle works with the reduced problem in `(s, t)` only: the pair
//! `(γ(s), γ(t))` is turned back by `θ` about its midpoint and the two images
//! are measured against the curve by nearest-point distance. Inscribed
//! rectangles are the zeros of that distance pair. Nothing here calls the
//! four-parameter solver.

use num_complex::Complex64;
use peglab_core::curve::{JordanCurve, PolygonCurve};
use std::f64::consts::TAU;

/// Dense polyline used for nearest-point queries.
pub struct CurveSampler<'a> {
    curve: &'a JordanCurve,
    pts: Vec<Complex64>,
}

impl<'a> CurveSampler<'a> {
    pub fn new(curve: &'a JordanCurve, n: usize) -> Self {
        Self { curve, pts: (0..n).map(|j| curve.eval(TAU * j as f64 / n as f64)).collect() }
    }

    /// Parameter of the nearest sample.
    fn coarse(&self, p: Complex64) -> (f64, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (j, q) in self.pts.iter().enumerate() {
            let d = (q - p).norm_sqr();
            if d < best.1 {
                best = (j, d);
            }
        }
        (TAU * best.0 as f64 / self.pts.len() as f64, best.1)
    }

    /// Squared distance to the polyline through the samples.
    pub fn dist2_polyline(&self, p: Complex64) -> f64 {
        let n = self.pts.len();
        let (s, d2) = self.coarse(p);
        let j = ((s / TAU) * n as f64).round() as usize % n;
        let seg = |a: Complex64, b: Complex64| {
            let ab = b - a;
            let u = (((p - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
            (a + ab * u - p).norm_sqr()
        };
        d2.min(seg(self.pts[j], self.pts[(j + 1) % n])).min(seg(self.pts[(j + n - 1) % n], self.pts[j]))
    }

    /// Foot point parameter and signed distance (positive outside, counterclockwise curve).
    pub fn signed_distance(&self, p: Complex64) -> (f64, f64) {
        let (mut s, _) = self.coarse(p);
        for _ in 0..40 {
            let (g, d1, d2) = self.curve.jet(s);
            let r = g - p;
            let f = (r * d1.conj()).re;
            let df = d1.norm_sqr() + (r * d2.conj()).re;
            if df.abs() < 1e-300 {
                break;
            }
            let step = (f / df).clamp(-0.1, 0.1);
            s -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (g, d1, _) = self.curve.jet(s);
        // Outward normal of a counterclockwise curve is −i·γ′.
        let n = -Complex64::i() * d1 / d1.norm();
        (s, ((p - g) * n.conj()).re)
    }
}

/// `(z′, w′)` with `R_θ(z′, w′) = (z, w)`.
pub fn back_rotate(z: Complex64, w: Complex64, theta: f64) -> (Complex64, Complex64) {
    let m = 0.5 * (z + w);
    let d = 0.5 * (z - w) * Complex64::from_polar(1.0, -theta);
    (m + d, m - d)
}

/// A zero of the reduced problem.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleZero {
    pub s: f64,
    pub t: f64,
    /// Foot parameters of `z′` and `w′`.
    pub s2: f64,
    pub t2: f64,
    /// `[z′, z, w′, w]`.
    pub vertices: [Complex64; 4],
    pub residual: f64,
    /// The reduced Jacobian is singular: the zero sits in a family.
    pub degenerate: bool,
    /// Sub-threshold grid component containing the zero.
    pub component: usize,
}

#[derive(Clone, Debug)]
pub struct GridOracle {
    pub n: usize,
    pub theta: f64,
    /// `dist²(z′, γ) + dist²(w′, γ)` on the `n × n` grid, row-major in `s`.
    pub field: Vec<f64>,
    pub threshold: f64,
    /// Component label per cell, `usize::MAX` above threshold.
    pub labels: Vec<usize>,
    pub components: usize,
    /// Discrete 2D local minima below threshold.
    pub local_minima: usize,
    /// Zeros, deduplicated as geometric rectangles.
    pub zeros: Vec<OracleZero>,
}

impl GridOracle {
    /// Component of the cell nearest to `(s, t)`, looking one cell around it.
    pub fn component_at(&self, s: f64, t: f64) -> Option<usize> {
        let n = self.n as i64;
        let h = TAU / self.n as f64;
        let (i0, j0) = ((s / h).round() as i64, (t / h).round() as i64);
        let mut best: Option<(f64, usize)> = None;
        for di in -1..=1 {
            for dj in -1..=1 {
                let (i, j) = ((i0 + di).rem_euclid(n) as usize, (j0 + dj).rem_euclid(n) as usize);
                let l = self.labels[i * self.n + j];
                if l != usize::MAX && best.map_or(true, |b| self.field[i * self.n + j] < b.0) {
                    best = Some((self.field[i * self.n + j], l));
                }
            }
        }
        best.map(|b| b.1)
    }
}

fn reduced(sampler: &CurveSampler, curve: &JordanCurve, theta: f64, s: f64, t: f64) -> ([f64; 2], [[f64; 2]; 2], f64, f64, Complex64, Complex64) {
    let (z, w) = (curve.eval(s), curve.eval(t));
    let (zp, wp) = back_rotate(z, w, theta);
    let (s2, d1) = sampler.signed_distance(zp);
    let (t2, d2) = sampler.signed_distance(wp);
    let e = Complex64::from_polar(1.0, -theta);
    let (gs, gt) = (curve.derivative(s), curve.derivative(t));
    let dzp = [0.5 * (1.0 + e) * gs, 0.5 * (1.0 - e) * gt];
    let dwp = [0.5 * (1.0 - e) * gs, 0.5 * (1.0 + e) * gt];
    let normal = |u: f64| {
        let d = curve.derivative(u);
        -Complex64::i() * d / d.norm()
    };
    let (n1, n2) = (normal(s2), normal(t2));
    let dot = |a: Complex64, b: Complex64| (a * b.conj()).re;
    let jac = [[dot(dzp[0], n1), dot(dzp[1], n1)], [dot(dwp[0], n2), dot(dwp[1], n2)]];
    ([d1, d2], jac, s2, t2, zp, wp)
}

fn hausdorff4(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    let one = |p: &[Complex64; 4], q: &[Complex64; 4]| p.iter().map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max);
    one(a, b).max(one(b, a))
}

pub fn vertex_set_distance(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    hausdorff4(a, b)
}

/// Run the grid oracle at `theta` on an `n × n` grid.
pub fn grid_oracle(curve: &JordanCurve, theta: f64, n: usize) -> GridOracle {
    let sampler = CurveSampler::new(curve, 4096);
    let h = TAU / n as f64;
    let pts: Vec<Complex64> = (0..n).map(|i| curve.eval(h * i as f64)).collect();
    let mut field = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                field[i * n + j] = f64::INFINITY;
                continue;
            }
            let (zp, wp) = back_rotate(pts[i], pts[j], theta);
            field[i * n + j] = sampler.dist2_polyline(zp) + sampler.dist2_polyline(wp);
        }
    }
    let vmax = curve.max_speed(4096);
    let threshold = (h * vmax).powi(2);

    // Components of the sub-threshold set on the torus, 8-connected.
    let mut labels = vec![usize::MAX; n * n];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..n * n {
        if labels[start] != usize::MAX || !(field[start] < threshold) {
            continue;
        }
        labels[start] = components;
        stack.push(start);
        while let Some(c) = stack.pop() {
            let (i, j) = ((c / n) as i64, (c % n) as i64);
            for di in -1..=1 {
                for dj in -1..=1 {
                    let k = ((i + di).rem_euclid(n as i64) as usize) * n + (j + dj).rem_euclid(n as i64) as usize;
                    if labels[k] == usize::MAX && field[k] < threshold {
                        labels[k] = components;
                        stack.push(k);
                    }
                }
            }
        }
        components += 1;
    }

    // Seeds: sub-threshold cells that are minimal along their row or their
    // column. Valleys of near-degenerate solutions run diagonally and carry
    // several zeros, so full 2D minima alone would undersample them.
    let at = |i: usize, j: usize, di: i64, dj: i64| {
        field[((i as i64 + di).rem_euclid(n as i64) as usize) * n + (j as i64 + dj).rem_euclid(n as i64) as usize]
    };
    let mut minima = Vec::new();
    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let f = field[i * n + j];
            if !(f < threshold) {
                continue;
            }
            let row_min = f <= at(i, j, 0, 1) && f <= at(i, j, 0, -1);
            let col_min = f <= at(i, j, 1, 0) && f <= at(i, j, -1, 0);
            if row_min && col_min && f <= at(i, j, 1, 1) && f <= at(i, j, -1, -1) && f <= at(i, j, 1, -1) && f <= at(i, j, -1, 1) {
                minima.push((i, j));
            }
            if row_min || col_min {
                seeds.push((i, j));
            }
        }
    }
    let local_minima = minima.len();
    let mut zeros: Vec<OracleZero> = Vec::new();
    for (i, j) in seeds {
        let (mut s, mut t) = (h * i as f64, h * j as f64);
        let mut ok = false;
        for _ in 0..60 {
            let (g, jac, ..) = reduced(&sampler, curve, theta, s, t);
            // Levenberg step on the 2×2 system; the damping only matters inside families.
            let jtj = [
                [jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0], jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1]],
                [jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1], jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1]],
            ];
            let jtg = [jac[0][0] * g[0] + jac[1][0] * g[1], jac[0][1] * g[0] + jac[1][1] * g[1]];
            let mu = 1e-14 * (jtj[0][0] + jtj[1][1]);
            let (a, b, c, d) = (jtj[0][0] + mu, jtj[0][1], jtj[1][0], jtj[1][1] + mu);
            let det = a * d - b * c;
            if det == 0.0 {
                break;
            }
            let ds = (d * jtg[0] - b * jtg[1]) / det;
            let dt = (a * jtg[1] - c * jtg[0]) / det;
            let scale = (2.0 * h / ds.abs().max(dt.abs())).min(1.0);
            s -= scale * ds;
            t -= scale * dt;
            if g[0].abs().max(g[1].abs()) < 1e-13 {
                ok = true;
                break;
            }
        }
        let (g, jac, s2, t2, zp, wp) = reduced(&sampler, curve, theta, s, t);
        let residual = g[0].abs().max(g[1].abs());
        if !(ok || residual < 1e-11) {
            continue;
        }
        let (s, t) = (s.rem_euclid(TAU), t.rem_euclid(TAU));
        let (z, w) = (curve.eval(s), curve.eval(t));
        if (z - w).norm() < 1e-6 {
            continue;
        }
        let vertices = [zp, z, wp, w];
        let norm2 = jac.iter().flatten().map(|x| x * x).sum::<f64>();
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let degenerate = det.abs() < 1e-6 * norm2;
        if zeros.iter().any(|o| hausdorff4(&o.vertices, &vertices) < 1e-6) {
            continue;
        }
        let component = labels[i * n + j];
        zeros.push(OracleZero { s, t, s2: s2.rem_euclid(TAU), t2: t2.rem_euclid(TAU), vertices, residual, degenerate, component });
    }
    GridOracle { n, theta, field, threshold, labels, components, local_minima, zeros }
}

/// Residual of the reduced problem at `(s, t)`.
pub fn reduced_residual(curve: &JordanCurve, theta: f64, s: f64, t: f64) -> f64 {
    let sampler = CurveSampler::new(curve, 4096);
    let (g, ..) = reduced(&sampler, curve, theta, s, t);
    g[0].abs().max(g[1].abs())
}

/// Inscribed `θ`-rectangles of a polygon found by a direct search over
/// arclength pairs, with the widest one refined by compass search.
///
/// Returns the vertices `[z′, z, w′, w]` of the widest rectangle whose
/// residual falls below `tol`.
pub fn polygon_widest_rectangle(polygon: &PolygonCurve, theta: f64, n: usize, tol: f64) -> Option<[Complex64; 4]> {
    let pts: Vec<Complex64> = (0..n).map(|i| polygon.point_at(i as f64 / n as f64)).collect();
    let residual = |z: Complex64, w: Complex64| {
        let (zp, wp) = back_rotate(z, w, theta);
        polygon.distance_to(zp).max(polygon.distance_to(wp))
    };
    let h = 1.0 / n as f64;
    let mut candidates: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let r = residual(pts[i], pts[j]);
            if r < 2.0 * h * polygon.perimeter() {
                candidates.push(((pts[i] - pts[j]).norm(), i as f64 * h, j as f64 * h));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    for &(_, u0, v0) in candidates.iter().take(64) {
        let (mut u, mut v) = (u0, v0);
        let mut r = residual(polygon.point_at(u), polygon.point_at(v));
        let mut step = h;
        while step > 1e-15 && r > tol {
            let mut moved = false;
            for (du, dv) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step), (step, step), (-step, -step), (step, -step), (-step, step)] {
                let rn = residual(polygon.point_at(u + du), polygon.point_at(v + dv));
                if rn < r {
                    r = rn;
                    u += du;
                    v += dv;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if r <= tol {
            let (z, w) = (polygon.point_at(u), polygon.point_at(v));
            let (zp, wp) = back_rotate(z, w, theta);
            return Some([zp, z, wp, w]);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn back_rotation_inverts_the_flow() {
        let (z, w) = (Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
        let (zp, wp) = back_rotate(z, w, FRAC_PI_2);
        assert!((zp - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((wp - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn signed_distance_on_circle() {
        let c = JordanCurve::circle(1.0, Complex64::new(0.0, 0.0));
        let s = CurveSampler::new(&c, 1024);
        let (u, d) = s.signed_distance(Complex64::new(0.0, 1.5));
        assert!((u - FRAC_PI_2).abs() < 1e-12 && (d - 0.5).abs() < 1e-12);
        let (_, d) = s.signed_distance(Complex64::new(0.3, 0.0));
        assert!((d + 0.7).abs() < 1e-12);
    }

    #[test]
    fn square_polygon_widest_square_is_the_square() {
        let sq = PolygonCurve::square(2.0);
        let v = polygon_widest_rectangle(&sq, FRAC_PI_2, 200, 1e-12).unwrap();
        for p in v {
            assert!((p.re.abs() - 1.0).abs() < 1e-9 && (p.im.abs() - 1.0).abs() < 1e-9);
        }
    }
}
