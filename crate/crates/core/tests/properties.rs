use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use peglab_core::action::{action_value, action_value_with, build_capping, SpeedProfile};
use peglab_core::curve::{JordanCurve, Mode};
use peglab_core::geom::{diff_projection, winding_number, SampledLoop};
use peglab_core::inscribe::{estimate_width, find_rectangles, InscribedRectangle};
use proptest::prelude::*;

const SAMPLES: usize = 256;

/// An ellipse with a small third harmonic, simple for the sampled ranges.
fn wobbly(b: f64, c3: f64) -> JordanCurve {
    JordanCurve::new("wobbly", [Mode::new(1, Complex64::new(1.0, 0.0)), Mode::new(-1, Complex64::new(b, 0.0)), Mode::new(3, Complex64::new(0.0, c3))])
        .unwrap()
}

fn first_rectangles(curve: &JordanCurve, theta: f64) -> Vec<InscribedRectangle> {
    let mut rects = find_rectangles(curve, theta, 96, 1e-11).unwrap();
    rects.retain(|r| !r.is_degenerate());
    rects.truncate(3);
    rects
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn action_is_invariant_under_reparametrization(b in 0.1f64..0.4, c3 in 0.0f64..0.04, c in 0.0f64..TAU, theta in 0.4f64..2.7) {
        let curve = wobbly(b, c3);
        let shifted = curve.phase_shifted(c);
        for r in first_rectangles(&curve, theta) {
            let a = action_value(&curve, &r, SAMPLES).unwrap().value;
            let moved = InscribedRectangle::from_params(&shifted, theta, r.params.map(|p| p - c));
            let a2 = action_value(&shifted, &moved, SAMPLES).unwrap().value;
            prop_assert!((a - a2).abs() <= 1e-10, "{a} vs {a2}");
        }
    }

    #[test]
    fn action_is_invariant_under_rigid_motion(phi in 0.0f64..TAU, bx in -3.0f64..3.0, by in -3.0f64..3.0, theta in 0.4f64..2.7) {
        let curve = wobbly(0.3, 0.02);
        let moved = curve.rigid_motion(phi, Complex64::new(bx, by));
        for r in first_rectangles(&curve, theta) {
            let a = action_value(&curve, &r, SAMPLES).unwrap().value;
            let rm = InscribedRectangle::from_params(&moved, theta, r.params);
            let a2 = action_value(&moved, &rm, SAMPLES).unwrap().value;
            prop_assert!((a - a2).abs() <= 1e-8, "{a} vs {a2}");
        }
    }

    #[test]
    fn action_scales_quadratically(lambda in 0.2f64..5.0, theta in 0.4f64..2.7) {
        let curve = wobbly(0.25, 0.03);
        let big = curve.scaled(lambda);
        for r in first_rectangles(&curve, theta) {
            let a = action_value(&curve, &r, SAMPLES).unwrap().value;
            let rs = InscribedRectangle::from_params(&big, theta, r.params);
            let a2 = action_value(&big, &rs, SAMPLES).unwrap().value;
            prop_assert!((a2 - lambda * lambda * a).abs() <= 1e-9 * (lambda * lambda * a).abs(), "{a2} vs λ²·{a}");
        }
    }

    #[test]
    fn cappings_avoid_the_diagonal(b in 0.1f64..0.4, c3 in 0.0f64..0.04, theta in 0.4f64..2.7) {
        let curve = wobbly(b, c3);
        let area = curve.enclosed_area();
        for r in first_rectangles(&curve, theta) {
            let cap = build_capping(&curve, &r, SAMPLES).unwrap();
            let diffs: Vec<Complex64> = cap.loop_points(&curve).into_iter().map(diff_projection).collect();
            let lp = SampledLoop::new(diffs).unwrap();
            prop_assert_eq!(winding_number(&lp, Complex64::new(0.0, 0.0)).unwrap(), 0);
            prop_assert!(cap.min_diagonal_distance > 1e-6);
            let a = action_value(&curve, &r, SAMPLES).unwrap().value;
            prop_assert!(a > 0.0 && a < 2.0 * area, "action {a} outside (0, 2·{area})");
        }
    }
}

#[test]
fn speed_profiles_agree() {
    let curve = wobbly(0.3, 0.03);
    for theta in [0.5, 1.3, FRAC_PI_2, 2.5] {
        for r in first_rectangles(&curve, theta) {
            let u = action_value_with(&curve, &r, SAMPLES, SpeedProfile::Uniform).unwrap().value;
            let b = action_value_with(&curve, &r, SAMPLES, SpeedProfile::Bump).unwrap().value;
            assert!((u - b).abs() <= 1e-9, "θ={theta}: {u} vs {b}");
        }
    }
}

#[test]
fn diagonals_are_at_least_the_width() {
    for curve in [JordanCurve::ellipse(2.0, 1.0), wobbly(0.3, 0.03)] {
        let width = estimate_width(&curve, 32).unwrap();
        for k in 1..12 {
            let theta = k as f64 * PI / 12.0;
            for r in find_rectangles(&curve, theta, 96, 1e-11).unwrap() {
                assert!(2.0 * r.rad >= width - 1e-6, "θ={theta}: diagonal {} below width {width}", 2.0 * r.rad);
            }
        }
    }
}
