//! Rectangles along a sequence of smoothed approximations of a polygon.
//!
//! Each level smooths the polygon less than the one before while keeping its
//! area. At every level the rectangles with action in `(ε, Area − ε)` are kept
//! and the widest of them is tracked. The tracked diameters staying bounded
//! below and the tracked vertices settling down is the behaviour that rules out
//! a shrinking sequence.

use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::action_value;
use crate::curve::{smooth_approximate, CurveError, JordanCurve, PolygonCurve};
use crate::inscribe::{find_rectangles, newton_rectangle, system, InscribeError, InscribedRectangle};
use crate::linalg::null_direction4;

/// Gaussian damping below `e^{-23}` (about 1e-10) is dropped when choosing the mode count.
const DAMPING_CUTOFF: f64 = 23.0;

#[derive(Debug, Error)]
pub enum ShrinkoutError {
    #[error("need at least 3 levels, got {0}")]
    InvalidLevels(usize),
    #[error("epsilon {epsilon} outside (0, {half_area})")]
    InvalidEpsilon { epsilon: f64, half_area: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Inscribe(#[from] InscribeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkoutOptions {
    /// Smoothing of the coarsest level.
    pub base_smoothing: f64,
    /// Factor between consecutive smoothings.
    pub ratio: f64,
    pub max_modes: usize,
    pub grid_n: usize,
    pub tol: f64,
    pub action_samples: usize,
}

impl Default for ShrinkoutOptions {
    fn default() -> Self {
        Self { base_smoothing: 1e-2, ratio: 0.25, max_modes: 512, grid_n: 128, tol: 1e-11, action_samples: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedRectangle {
    pub params: [f64; 4],
    pub vertices: [Complex64; 4],
    /// `|z − w|`.
    pub diameter: f64,
    pub action: f64,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub smoothing: f64,
    pub mode_count: usize,
    pub area: f64,
    pub length: f64,
    pub theta: f64,
    /// Rectangles found at `theta`.
    pub found: usize,
    /// Rectangles with action in `(ε, Area − ε)`.
    pub filtered: usize,
    pub tracked: Option<TrackedRectangle>,
    /// Hausdorff distance between this level's tracked vertices and the previous level's.
    pub gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationRun {
    #[serde(skip)]
    pub target: PolygonCurve,
    pub target_area: f64,
    pub theta: f64,
    pub epsilon: f64,
    #[serde(skip)]
    pub approximants: Vec<JordanCurve>,
    pub levels: Vec<LevelRecord>,
    /// Largest deviation of an approximant's area from the polygon's.
    pub area_error: f64,
    /// Smallest tracked diameter over all levels, `None` if some level had no filtered rectangle.
    pub min_diameter: Option<f64>,
    /// Consecutive gaps at most double the previous gap (halving within a factor 4).
    pub cauchy: bool,
}

impl ApproximationRun {
    /// Tracked diameters stay at or above `floor` at every level.
    pub fn diameters_above(&self, floor: f64) -> bool {
        self.min_diameter.is_some_and(|d| d >= floor)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        #[derive(Serialize)]
        struct Row {
            level: usize,
            smoothing: f64,
            mode_count: usize,
            area: f64,
            length: f64,
            theta: f64,
            found: usize,
            filtered: usize,
            diameter: Option<f64>,
            action: Option<f64>,
            gap: Option<f64>,
        }
        let mut wtr = csv::Writer::from_writer(out);
        for l in &self.levels {
            wtr.serialize(Row {
                level: l.level,
                smoothing: l.smoothing,
                mode_count: l.mode_count,
                area: l.area,
                length: l.length,
                theta: l.theta,
                found: l.found,
                filtered: l.filtered,
                diameter: l.tracked.as_ref().map(|r| r.diameter),
                action: l.tracked.as_ref().map(|r| r.action),
                gap: l.gap,
            })?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run serializes")
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |p: &[Complex64], q: &[Complex64]| {
        p.iter().map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Upper bound `L'·r/2` on the area enclosed by a curve of length `L'` inside a disk of radius `r`.
pub fn disk_area_bound(length_bound: f64, disk_radius: f64) -> f64 {
    0.5 * length_bound * disk_radius
}

/// Mode count at which the damping `exp(−σk²)` falls below the cutoff.
pub fn mode_count_for(smoothing: f64, max_modes: usize) -> usize {
    ((DAMPING_CUTOFF / smoothing).sqrt().ceil() as usize).clamp(8, max_modes)
}

pub fn approximate_and_track(polygon: &PolygonCurve, theta: f64, levels: usize, epsilon: f64) -> Result<ApproximationRun, ShrinkoutError> {
    approximate_and_track_with(polygon, theta, levels, epsilon, &ShrinkoutOptions::default())
}

pub fn approximate_and_track_with(
    polygon: &PolygonCurve,
    theta: f64,
    levels: usize,
    epsilon: f64,
    opts: &ShrinkoutOptions,
) -> Result<ApproximationRun, ShrinkoutError> {
    if levels < 3 {
        return Err(ShrinkoutError::InvalidLevels(levels));
    }
    let area = polygon.area();
    if !(epsilon > 0.0 && epsilon < 0.5 * area) {
        return Err(ShrinkoutError::InvalidEpsilon { epsilon, half_area: 0.5 * area });
    }
    let theta = crate::clamp_theta(theta);

    let mut approximants = Vec::with_capacity(levels);
    let mut records: Vec<LevelRecord> = Vec::with_capacity(levels);
    for level in 0..levels {
        let smoothing = opts.base_smoothing * opts.ratio.powi(level as i32);
        let mode_count = mode_count_for(smoothing, opts.max_modes);
        let curve = smooth_approximate(polygon, mode_count, smoothing)?;
        let rects = find_rectangles(&curve, theta, opts.grid_n, opts.tol)?;
        let cap = curve.enclosed_area();
        let mut filtered: Vec<(InscribedRectangle, f64)> = Vec::new();
        for r in &rects {
            match action_value(&curve, r, opts.action_samples) {
                Ok(a) if a.value > epsilon && a.value < cap - epsilon => filtered.push((r.clone(), a.value)),
                Ok(_) => {}
                Err(e) => log::warn!("{}: skipping rectangle: {e}", curve.name()),
            }
        }
        let widest = filtered.iter().max_by(|a, b| a.0.diameter().total_cmp(&b.0.diameter())).cloned();
        let tracked = widest.map(|(r, action)| {
            let r = if r.is_degenerate() { widen_in_family(&curve, &r, opts.tol) } else { r };
            let action = action_value(&curve, &r, opts.action_samples).map_or(action, |a| a.value);
            TrackedRectangle { params: r.params, vertices: r.vertices, diameter: r.diameter(), action, condition: r.condition }
        });
        if tracked.is_none() {
            log::warn!("{}: no rectangle with action in ({epsilon}, {}) at θ = {theta}", curve.name(), cap - epsilon);
        }
        let gap = match (records.last().and_then(|l| l.tracked.as_ref()), tracked.as_ref()) {
            (Some(p), Some(q)) => Some(hausdorff(&p.vertices, &q.vertices)),
            _ => None,
        };
        records.push(LevelRecord {
            level,
            smoothing,
            mode_count,
            area: cap,
            length: curve.curve_length(),
            theta,
            found: rects.len(),
            filtered: filtered.len(),
            tracked,
            gap,
        });
        approximants.push(curve);
    }

    let area_error = records.iter().map(|l| (l.area - area).abs()).fold(0.0, f64::max);
    let min_diameter = records
        .iter()
        .map(|l| l.tracked.as_ref().map(|r| r.diameter))
        .collect::<Option<Vec<f64>>>()
        .map(|d| d.into_iter().fold(f64::INFINITY, f64::min));
    let gaps: Option<Vec<f64>> = records.iter().skip(1).map(|l| l.gap).collect();
    let cauchy = gaps.is_some_and(|g| g.windows(2).all(|w| w[1] <= 2.0 * w[0] + 1e-9));
    Ok(ApproximationRun {
        target: polygon.clone(),
        target_area: area,
        theta,
        epsilon,
        approximants,
        levels: records,
        area_error,
        min_diameter,
        cauchy,
    })
}

// Inside a degenerate family, follow the near-null direction of the Jacobian
// while the diameter grows, re-solving after each step.
fn widen_in_family(curve: &JordanCurve, rect: &InscribedRectangle, tol: f64) -> InscribedRectangle {
    let mut best = rect.clone();
    let mut h = 1e-2;
    while h > 1e-6 {
        let x = Vector4::from(best.params);
        let (_, j) = system(curve, best.theta, &x);
        let n = null_direction4(&j);
        let mut improved = false;
        for sign in [1.0, -1.0] {
            if let Some(sol) = newton_rectangle(curve, best.theta, x + n * (sign * h), tol) {
                let cand = InscribedRectangle::from_params(curve, best.theta, [sol.x[0], sol.x[1], sol.x[2], sol.x[3]]);
                if cand.diameter() > best.diameter() + 1e-12 {
                    best = cand;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best
}
