//! Standalone SVG plots: curves with inscribed rectangles, and spectrum diagrams.
//!
//! Every document uses the same fixed view box. Plane pictures are scaled
//! uniformly to fit with a margin and drawn with `y` pointing up.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::action::is_elegant;
use crate::curve::{JordanCurve, PolygonCurve};
use crate::inscribe::InscribedRectangle;
use crate::spectral::SpectralFunction;
use crate::sweep::{BranchEnd, SpectrumDiagram};
use crate::wrap_angle;

pub const VIEW_SIZE: f64 = 800.0;
const MARGIN: f64 = 40.0;
/// Samples of the curve polyline.
pub const CURVE_SAMPLES: usize = 2048;
const ARC_SAMPLES: usize = 256;

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("nothing to draw")]
    Empty,
    #[error("writing {path}: {source}")]
    IoFailure { path: String, source: std::io::Error },
}

/// An SVG document under construction.
#[derive(Clone, Debug, Default)]
pub struct Svg {
    body: String,
}

impl Svg {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, element: &str) {
        self.body.push_str("  ");
        self.body.push_str(element);
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {VIEW_SIZE} {VIEW_SIZE}\" width=\"{VIEW_SIZE}\" height=\"{VIEW_SIZE}\">\n\
             <rect class=\"background\" x=\"0\" y=\"0\" width=\"{VIEW_SIZE}\" height=\"{VIEW_SIZE}\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SvgError> {
        let path = path.as_ref();
        std::fs::write(path, self.render()).map_err(|source| SvgError::IoFailure { path: path.display().to_string(), source })
    }
}

/// Affine map from data coordinates to the view box.
#[derive(Clone, Copy, Debug)]
struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn fit(xmin: f64, xmax: f64, ymin: f64, ymax: f64, uniform: bool) -> Self {
        let inner = VIEW_SIZE - 2.0 * MARGIN;
        let w = (xmax - xmin).max(1e-12);
        let h = (ymax - ymin).max(1e-12);
        let (mut sx, mut sy) = (inner / w, inner / h);
        let (mut x0, mut y0) = (xmin, ymin);
        if uniform {
            let s = sx.min(sy);
            x0 -= 0.5 * (inner / s - w);
            y0 -= 0.5 * (inner / s - h);
            sx = s;
            sy = s;
        }
        Self { x0, y0, sx, sy }
    }

    fn fit_points(points: &[Complex64]) -> Self {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            xmin = xmin.min(p.re);
            xmax = xmax.max(p.re);
            ymin = ymin.min(p.im);
            ymax = ymax.max(p.im);
        }
        Self::fit(xmin, xmax, ymin, ymax, true)
    }

    fn x(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.sx
    }

    fn y(&self, y: f64) -> f64 {
        VIEW_SIZE - MARGIN - (y - self.y0) * self.sy
    }

    fn pt(&self, p: Complex64) -> (f64, f64) {
        (self.x(p.re), self.y(p.im))
    }
}

fn points_attr(frame: &Frame, pts: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (k, (x, y)) in pts.into_iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let (px, py) = (frame.x(x), frame.y(y));
        let _ = write!(s, "{px:.3},{py:.3}");
    }
    s
}

fn plane_points(frame: &Frame, pts: &[Complex64]) -> String {
    points_attr(frame, pts.iter().map(|p| (p.re, p.im)))
}

fn curve_arc(curve: &JordanCurve, from: f64, to: f64) -> Vec<Complex64> {
    let len = wrap_angle(to - from);
    (0..=ARC_SAMPLES).map(|j| curve.eval(from + len * j as f64 / ARC_SAMPLES as f64)).collect()
}

fn draw_rectangle(svg: &mut Svg, frame: &Frame, curve: &JordanCurve, r: &InscribedRectangle) {
    let [zp, z, wp, w] = r.vertices;
    if is_elegant(curve, r) {
        let [s, t, s2, t2] = r.params;
        for (from, to) in [(s2, s), (t2, t)] {
            let mut pts = vec![r.center];
            pts.extend(curve_arc(curve, from, to));
            svg.push(&format!(
                "<polygon class=\"ice-cream\" points=\"{}\" fill=\"#f4a261\" fill-opacity=\"0.45\" stroke=\"none\"/>",
                plane_points(frame, &pts)
            ));
        }
    }
    svg.push(&format!(
        "<polygon class=\"rectangle\" points=\"{}\" fill=\"none\" stroke=\"#264653\" stroke-width=\"1.5\"/>",
        plane_points(frame, &r.vertices)
    ));
    for (a, b) in [(z, w), (zp, wp)] {
        let ((x1, y1), (x2, y2)) = (frame.pt(a), frame.pt(b));
        svg.push(&format!(
            "<line class=\"diagonal\" x1=\"{x1:.3}\" y1=\"{y1:.3}\" x2=\"{x2:.3}\" y2=\"{y2:.3}\" stroke=\"#2a9d8f\" stroke-dasharray=\"4 3\"/>"
        ));
    }
    // The trajectory: z′ and w′ turn about the center by θ onto z and w.
    let radius = r.rad * frame.sx;
    for (a, b) in [(zp, z), (wp, w)] {
        let ((x1, y1), (x2, y2)) = (frame.pt(a), frame.pt(b));
        let large = if r.theta > std::f64::consts::PI { 1 } else { 0 };
        svg.push(&format!(
            "<path class=\"arc\" d=\"M {x1:.3} {y1:.3} A {radius:.3} {radius:.3} 0 {large} 0 {x2:.3} {y2:.3}\" fill=\"none\" stroke=\"#e76f51\" stroke-width=\"1.2\"/>"
        ));
    }
    for v in r.vertices {
        let (x, y) = frame.pt(v);
        svg.push(&format!("<circle class=\"vertex\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3.5\" fill=\"#264653\"/>"));
    }
}

/// The curve with each rectangle, its diagonals, the trajectory arcs, vertex
/// markers and, for elegant inscriptions, the two shaded cones.
pub fn curve_svg(curve: &JordanCurve, rects: &[InscribedRectangle]) -> Svg {
    let pts = curve.sample(CURVE_SAMPLES);
    let mut extent = pts.clone();
    for r in rects {
        extent.extend([r.center + r.rad, r.center - r.rad, r.center + Complex64::i() * r.rad, r.center - Complex64::i() * r.rad]);
    }
    let frame = Frame::fit_points(&extent);
    let mut svg = Svg::new();
    let mut closed = pts.clone();
    closed.push(pts[0]);
    svg.push(&format!(
        "<polyline class=\"curve\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
        plane_points(&frame, &closed)
    ));
    for r in rects {
        draw_rectangle(&mut svg, &frame, curve, r);
    }
    svg
}

/// Approximants of a polygon with one tracked rectangle per level (`None` skips a level).
pub fn approximation_svg(polygon: &PolygonCurve, approximants: &[JordanCurve], tracked: &[Option<[Complex64; 4]>]) -> Svg {
    let mut extent: Vec<Complex64> = polygon.vertices().to_vec();
    let samples: Vec<Vec<Complex64>> = approximants.iter().map(|c| c.sample(CURVE_SAMPLES)).collect();
    for s in &samples {
        extent.extend_from_slice(s);
    }
    let frame = Frame::fit_points(&extent);
    let mut svg = Svg::new();
    svg.push(&format!(
        "<polygon class=\"target\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
        plane_points(&frame, polygon.vertices())
    ));
    let n = samples.len().max(1);
    for (k, s) in samples.iter().enumerate() {
        let mut closed = s.clone();
        closed.push(s[0]);
        let shade = 40 + (160 * k / n);
        svg.push(&format!(
            "<polyline class=\"approximant\" points=\"{}\" fill=\"none\" stroke=\"rgb({shade},{shade},220)\" stroke-width=\"1\"/>",
            plane_points(&frame, &closed)
        ));
    }
    for v in tracked.iter().flatten() {
        svg.push(&format!(
            "<polygon class=\"rectangle\" points=\"{}\" fill=\"none\" stroke=\"#e76f51\" stroke-width=\"1\"/>",
            plane_points(&frame, v)
        ));
    }
    svg
}

/// Action against `θ`, one path per branch, with birth and death markers and
/// an optional overlay of the selected spectral function.
pub fn spectrum_svg(diagram: &SpectrumDiagram, overlay: Option<&SpectralFunction>) -> Result<Svg, SvgError> {
    if diagram.branches.is_empty() {
        return Err(SvgError::Empty);
    }
    let vmax = diagram
        .branches
        .iter()
        .flat_map(|b| b.samples.iter().map(|s| s.action))
        .fold(diagram.curve_area, f64::max);
    let vmin = diagram.branches.iter().flat_map(|b| b.samples.iter().map(|s| s.action)).fold(0.0, f64::min);
    let frame = Frame::fit(0.0, std::f64::consts::PI, vmin, vmax, false);
    let mut svg = Svg::new();
    let (ax0, ay0) = (frame.x(0.0), frame.y(vmin));
    let (ax1, ay1) = (frame.x(std::f64::consts::PI), frame.y(vmax));
    svg.push(&format!(
        "<polyline class=\"axes\" points=\"{ax0:.3},{ay1:.3} {ax0:.3},{ay0:.3} {ax1:.3},{ay0:.3}\" fill=\"none\" stroke=\"gray\"/>"
    ));
    let ya = frame.y(diagram.curve_area);
    svg.push(&format!(
        "<line class=\"area-level\" x1=\"{ax0:.3}\" y1=\"{ya:.3}\" x2=\"{ax1:.3}\" y2=\"{ya:.3}\" stroke=\"gray\" stroke-dasharray=\"2 4\"/>"
    ));
    for b in &diagram.branches {
        let pts: Vec<(f64, f64)> = b.samples.iter().map(|s| (s.theta, s.action)).collect();
        let d = points_attr(&frame, pts.iter().copied());
        svg.push(&format!(
            "<path class=\"branch\" data-id=\"{}\" d=\"M {}\" fill=\"none\" stroke=\"#457b9d\" stroke-width=\"1\"/>",
            b.id,
            d.replace(' ', " L ")
        ));
        let ends = [(b.birth, b.samples.first()), (b.death, b.samples.last())];
        for (kind, (end, sample)) in ["birth", "death"].iter().zip(ends) {
            if let (true, Some(s)) = (end.is_event(), sample) {
                let (theta, action) = match end {
                    BranchEnd::Fold { theta, .. } => (theta, s.action),
                    _ => (s.theta, s.action),
                };
                let (x, y) = (frame.x(theta), frame.y(action));
                svg.push(&format!("<circle class=\"event {kind}\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2.5\" fill=\"#d62828\"/>"));
            }
        }
    }
    if let Some(f) = overlay {
        let d = points_attr(&frame, f.knots());
        svg.push(&format!(
            "<path class=\"spectral\" d=\"M {}\" fill=\"none\" stroke=\"#e9c46a\" stroke-width=\"2.5\" stroke-opacity=\"0.8\"/>",
            d.replace(' ', " L ")
        ));
    }
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inscribe::find_rectangles;
    use crate::sweep::{BranchSample, SpectrumBranch};
    use std::f64::consts::FRAC_PI_2;

    fn count(text: &str, needle: &str) -> usize {
        text.matches(needle).count()
    }

    #[test]
    fn circle_with_one_rectangle() {
        let c = JordanCurve::circle(1.0, Complex64::new(0.0, 0.0));
        let r = InscribedRectangle::from_params(&c, FRAC_PI_2, [0.0, std::f64::consts::PI, 1.5 * std::f64::consts::PI, FRAC_PI_2]);
        let text = curve_svg(&c, std::slice::from_ref(&r)).render();
        assert_eq!(count(&text, "<polyline"), 1);
        assert_eq!(count(&text, "class=\"vertex\""), 4);
        assert_eq!(count(&text, "class=\"arc\""), 2);
        assert_eq!(count(&text, "class=\"diagonal\""), 2);
        assert!(text.contains(&format!("viewBox=\"0 0 {VIEW_SIZE} {VIEW_SIZE}\"")));
    }

    #[test]
    fn elegant_inscription_is_shaded() {
        let c = JordanCurve::ellipse(2.0, 1.0);
        let rects = find_rectangles(&c, FRAC_PI_2, 64, 1e-11).unwrap();
        let r = rects.iter().find(|r| is_elegant(&c, r)).expect("an elegant square");
        let text = curve_svg(&c, std::slice::from_ref(r)).render();
        assert_eq!(count(&text, "class=\"ice-cream\""), 2);
    }

    #[test]
    fn spectrum_has_one_path_per_branch() {
        let branch = |id: usize, birth: BranchEnd| SpectrumBranch {
            id,
            samples: (0..5)
                .map(|i| BranchSample { theta: 0.5 + 0.1 * i as f64, params: [0.0; 4], action: i as f64 + id as f64, rad: 1.0, grid_index: Some(i) })
                .collect(),
            birth,
            death: BranchEnd::Boundary,
            stalled: false,
            birth_partner: None,
            death_partner: None,
        };
        let d = SpectrumDiagram {
            branches: vec![branch(0, BranchEnd::Boundary), branch(1, BranchEnd::Unresolved), branch(2, BranchEnd::Boundary)],
            curve_area: 3.0,
            curve_rad: 1.0,
            theta_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            cross_checks: Vec::new(),
            ambiguous_matches: 0,
        };
        let text = spectrum_svg(&d, None).unwrap().render();
        assert_eq!(count(&text, "class=\"branch\""), 3);
        assert_eq!(count(&text, "class=\"event birth\""), 1);
        let empty = SpectrumDiagram { branches: Vec::new(), ..d };
        assert!(matches!(spectrum_svg(&empty, None), Err(SvgError::Empty)));
    }

    #[test]
    fn save_reports_io_failure() {
        let svg = Svg::new();
        assert!(matches!(svg.save("/nonexistent-dir/x.svg"), Err(SvgError::IoFailure { .. })));
    }
}
