//! Built-in fixtures, pinned by the exact mode and vertex lists in `fixtures/`.

use peglab_core::curve::{JordanCurve, PolygonCurve};

pub const CIRCLE_JSON: &str = include_str!("../../../fixtures/circle.json");
pub const ELLIPSE21_JSON: &str = include_str!("../../../fixtures/ellipse21.json");
pub const SMOOTHED_SQUARE_JSON: &str = include_str!("../../../fixtures/smoothed_square.json");
pub const SQUARE_JSON: &str = include_str!("../../../fixtures/square.json");
pub const TENTACLE_JSON: &str = include_str!("../../../fixtures/tentacle.json");

pub fn circle() -> JordanCurve {
    JordanCurve::from_json(CIRCLE_JSON).expect("circle fixture")
}

/// Semi-axes 2 and 1.
pub fn ellipse21() -> JordanCurve {
    JordanCurve::from_json(ELLIPSE21_JSON).expect("ellipse fixture")
}

/// The side-2 square smoothed with 64 modes at smoothing 1e-3.
pub fn smoothed_square() -> JordanCurve {
    JordanCurve::from_json(SMOOTHED_SQUARE_JSON).expect("smoothed square fixture")
}

pub fn square() -> PolygonCurve {
    PolygonCurve::from_json(SQUARE_JSON).expect("square fixture")
}

pub fn tentacle() -> PolygonCurve {
    PolygonCurve::from_json(TENTACLE_JSON).expect("tentacle fixture")
}

/// The three analytic fixtures used by the spectral checks.
pub fn spectral_fixtures() -> Vec<JordanCurve> {
    vec![circle(), ellipse21(), smoothed_square()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use peglab_core::curve::smooth_approximate;

    #[test]
    fn fixtures_round_trip_byte_for_byte() {
        assert_eq!(circle().to_json(), CIRCLE_JSON);
        assert_eq!(ellipse21().to_json(), ELLIPSE21_JSON);
        assert_eq!(smoothed_square().to_json(), SMOOTHED_SQUARE_JSON);
        assert_eq!(square().to_json(), SQUARE_JSON);
        assert_eq!(tentacle().to_json(), TENTACLE_JSON);
    }

    #[test]
    fn fixtures_match_their_constructions() {
        assert_eq!(circle().modes(), JordanCurve::circle(1.0, Complex64::new(0.0, 0.0)).modes());
        assert_eq!(ellipse21().modes(), JordanCurve::ellipse(2.0, 1.0).modes());
        assert_eq!(smoothed_square().modes(), smooth_approximate(&square(), 64, 1e-3).unwrap().modes());
        assert!((ellipse21().enclosed_area() - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((smoothed_square().enclosed_area() - 4.0).abs() < 1e-12);
    }
}
