use std::f64::consts::PI;

use peglab_core::curve::{JordanCurve, PolygonCurve};
use peglab_core::shrinkout::approximate_and_track;
use peglab_core::spectral::{inscription_interval, select_spectral_function};
use peglab_core::sweep::{sweep_on_grid, SpectrumDiagram};

const STEPS: usize = 64;
const GRID_N: usize = 96;

fn grid(lo: f64, hi: f64) -> Vec<f64> {
    (0..STEPS).map(|i| lo + (hi - lo) * i as f64 / (STEPS - 1) as f64).collect()
}

/// Per grid angle, the sorted `(action, rad)` pairs of all branch samples.
fn layers(d: &SpectrumDiagram) -> Vec<(f64, Vec<(f64, f64)>)> {
    (0..d.theta_grid.len())
        .map(|i| {
            let mut v: Vec<(f64, f64)> = d.samples_at(i).iter().map(|(_, s)| (s.action, s.rad)).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            (d.theta_grid[i], v)
        })
        .collect()
}

#[test]
fn sweep_direction_does_not_matter() {
    let ellipse = JordanCurve::ellipse(2.0, 1.0);
    let up = grid(0.1, PI - 0.1);
    let down: Vec<f64> = up.iter().rev().copied().collect();
    let a = layers(&sweep_on_grid(&ellipse, &up, GRID_N).unwrap());
    let mut b = layers(&sweep_on_grid(&ellipse, &down, GRID_N).unwrap());
    b.reverse();
    assert_eq!(a.len(), b.len());
    for ((ta, la), (tb, lb)) in a.iter().zip(&b) {
        assert_eq!(ta, tb);
        assert_eq!(la.len(), lb.len(), "θ={ta}");
        for (x, y) in la.iter().zip(lb) {
            assert!((x.0 - y.0).abs() <= 1e-8 && (x.1 - y.1).abs() <= 1e-8, "θ={ta}: {x:?} vs {y:?}");
        }
    }
}

#[test]
fn spectral_function_scales_with_the_curve() {
    let ellipse = JordanCurve::ellipse(2.0, 1.0);
    let lambda = 1.5;
    let g = grid(0.05, PI - 0.05);
    let f = select_spectral_function(&sweep_on_grid(&ellipse, &g, GRID_N).unwrap()).unwrap();
    let fl = select_spectral_function(&sweep_on_grid(&ellipse.scaled(lambda), &g, GRID_N).unwrap()).unwrap();
    assert_eq!(f.samples.len(), fl.samples.len());
    for (s, sl) in f.samples.iter().zip(&fl.samples) {
        assert_eq!(s.theta, sl.theta);
        assert!((sl.value - lambda * lambda * s.value).abs() <= 1e-6 * sl.value.abs(), "θ={}: {} vs λ²·{}", s.theta, sl.value, s.value);
    }
    assert!(fl.validation.passed());
}

#[test]
fn ellipse_interval_reaches_the_area_bound() {
    let ellipse = JordanCurve::ellipse(2.0, 1.0);
    let f = select_spectral_function(&sweep_on_grid(&ellipse, &grid(0.05, PI - 0.05), GRID_N).unwrap()).unwrap();
    let area = 2.0 * PI;
    let interval = inscription_interval(&f, 1e-3 * area).unwrap();
    assert!(interval.meets_bound);
    assert!(interval.length >= area / 4.0 - 1e-2, "length {}", interval.length);
}

#[test]
fn shrinkout_diameters_stay_bounded() {
    for (polygon, theta) in [(PolygonCurve::square(2.0), PI / 2.0), (PolygonCurve::regular(6, 1.0), 1.0)] {
        let run = approximate_and_track(&polygon, theta, 3, 0.1).unwrap();
        let rad = run.approximants.iter().map(|c| c.curve_radius()).fold(0.0, f64::max);
        for l in &run.levels {
            let t = l.tracked.as_ref().unwrap_or_else(|| panic!("{}: level {} lost every rectangle", polygon.vertices().len(), l.level));
            assert!(t.action > 0.1 && t.action < l.area - 0.1);
            assert!(t.diameter >= 1e-2 * rad);
        }
    }
}
