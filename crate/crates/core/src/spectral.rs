//! Candidate spectral function selected from an action spectrum.
//!
//! `ℓ̂(θ)` is a path through the diagram's grid samples, anchored at
//! `ℓ̂(0) = 0` and `ℓ̂(π) = Area`. A dynamic program picks the path with the
//! least monotonicity and Lipschitz violation; among equally good paths the
//! one with the smallest values wins. The result is a candidate, checked
//! against the constraints rather than certified by them.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sweep::SpectrumDiagram;

/// Relative slack on the Lipschitz constant `Rad²`.
pub const LIPSCHITZ_SLACK: f64 = 1e-2;
/// Adjacent decreases up to this fraction of the area count as monotone.
pub const MONOTONE_TOL: f64 = 1e-4;
/// Violations below this fraction of the area are treated as rounding.
const PENALTY_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("no spectrum samples at grid θ = {theta}")]
    EmptyLayer { theta: f64 },
    #[error("every path decreases by at least {decrease:e} (at θ = {theta}); penalty {penalty:e}")]
    NoAdmissiblePath { decrease: f64, theta: f64, penalty: f64 },
    #[error("epsilon {epsilon} outside (0, {half_area})")]
    InvalidEpsilon { epsilon: f64, half_area: f64 },
    #[error("need at least two samples")]
    TooFewSamples,
    #[error("empty interval ({a}, {b})")]
    IntervalEmpty { a: f64, b: f64 },
}

/// Weights of the selection penalty terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionWeights {
    /// Per unit of adjacent decrease.
    pub monotone: f64,
    /// Per unit of value change beyond `Rad²·Δθ`.
    pub lipschitz: f64,
    /// Applied to both terms on the edges to the anchors `(0, 0)` and `(π, Area)`.
    pub endpoint: f64,
}

impl Default for SelectionWeights {
    fn default() -> Self {
        Self { monotone: 1.0, lipschitz: 1.0, endpoint: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub theta: f64,
    pub value: f64,
    pub branch_id: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub max_decrease: f64,
    pub monotone: bool,
    pub max_slope: f64,
    pub lipschitz_bound: f64,
    pub lipschitz: bool,
    pub min_value: f64,
    pub max_value: f64,
    pub bounded: bool,
    /// The slopes to the anchors `(0, 0)` and `(π, Area)` also obey the bound.
    pub endpoints: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.lipschitz && self.bounded && self.endpoints
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    /// Always `"candidate"`.
    pub status: String,
    pub samples: Vec<SpectralSample>,
    pub area: f64,
    pub rad: f64,
    pub penalty: f64,
    pub weights: SelectionWeights,
    pub validation: ValidationReport,
}

impl SpectralFunction {
    /// Anchored breakpoints `(θ, ℓ̂)` including `(0, 0)` and `(π, Area)`.
    pub fn knots(&self) -> Vec<(f64, f64)> {
        let mut k = Vec::with_capacity(self.samples.len() + 2);
        k.push((0.0, 0.0));
        k.extend(self.samples.iter().map(|s| (s.theta, s.value)));
        k.push((PI, self.area));
        k
    }

    /// Piecewise-linear value at `theta ∈ [0, π]`.
    pub fn eval(&self, theta: f64) -> f64 {
        let k = self.knots();
        let theta = theta.clamp(0.0, PI);
        let j = k.partition_point(|p| p.0 <= theta).clamp(1, k.len() - 1);
        let (t0, v0) = k[j - 1];
        let (t1, v1) = k[j];
        if t1 == t0 {
            v1
        } else {
            v0 + (v1 - v0) * (theta - t0) / (t1 - t0)
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        #[derive(Serialize)]
        struct Row {
            theta: f64,
            ell: f64,
            branch_id: usize,
        }
        let mut wtr = csv::Writer::from_writer(out);
        for s in &self.samples {
            wtr.serialize(Row { theta: s.theta, ell: s.value, branch_id: s.branch_id })?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectral function serializes")
    }
}

fn edge_penalty(v0: f64, v1: f64, dtheta: f64, lip: f64, w: &SelectionWeights, floor: f64) -> f64 {
    let dec = (v0 - v1).max(0.0);
    let excess = ((v1 - v0).abs() - lip * dtheta).max(0.0);
    let p = w.monotone * dec + w.lipschitz * excess;
    if p <= floor {
        0.0
    } else {
        p
    }
}

#[derive(Clone, Copy)]
struct Cost {
    penalty: f64,
    sum: f64,
}

impl Cost {
    fn better_than(&self, other: &Cost) -> bool {
        self.penalty < other.penalty || (self.penalty == other.penalty && self.sum < other.sum)
    }
}

pub fn select_spectral_function(diagram: &SpectrumDiagram) -> Result<SpectralFunction, SpectralError> {
    select_spectral_function_with(diagram, &SelectionWeights::default())
}

pub fn select_spectral_function_with(diagram: &SpectrumDiagram, weights: &SelectionWeights) -> Result<SpectralFunction, SpectralError> {
    let area = diagram.curve_area;
    let rad = diagram.curve_rad;
    let lip = rad * rad;
    let floor = PENALTY_FLOOR * area;
    let grid = &diagram.theta_grid;
    if grid.len() < 2 {
        return Err(SpectralError::TooFewSamples);
    }
    // Work in increasing θ whatever the grid orientation.
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let layers: Vec<Vec<SpectralSample>> = order
        .iter()
        .map(|&i| {
            let mut v: Vec<SpectralSample> = diagram
                .samples_at(i)
                .into_iter()
                .map(|(id, s)| SpectralSample { theta: grid[i], value: s.action, branch_id: id })
                .collect();
            v.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.branch_id.cmp(&b.branch_id)));
            v
        })
        .collect();
    if let Some(k) = layers.iter().position(Vec::is_empty) {
        return Err(SpectralError::EmptyLayer { theta: grid[order[k]] });
    }

    let end_w = SelectionWeights {
        monotone: weights.monotone * weights.endpoint,
        lipschitz: weights.lipschitz * weights.endpoint,
        endpoint: 1.0,
    };
    let mut cost: Vec<Cost> = layers[0]
        .iter()
        .map(|s| Cost { penalty: edge_penalty(0.0, s.value, s.theta, lip, &end_w, floor), sum: s.value })
        .collect();
    let mut back: Vec<Vec<usize>> = vec![Vec::new()];
    for k in 1..layers.len() {
        let dtheta = layers[k][0].theta - layers[k - 1][0].theta;
        let mut next = Vec::with_capacity(layers[k].len());
        let mut from = Vec::with_capacity(layers[k].len());
        for s in &layers[k] {
            let mut best: Option<(Cost, usize)> = None;
            for (a, p) in layers[k - 1].iter().enumerate() {
                let c = Cost {
                    penalty: cost[a].penalty + edge_penalty(p.value, s.value, dtheta, lip, weights, floor),
                    sum: cost[a].sum + s.value,
                };
                if best.as_ref().map_or(true, |(b, _)| c.better_than(b)) {
                    best = Some((c, a));
                }
            }
            let (c, a) = best.expect("nonempty layer");
            next.push(c);
            from.push(a);
        }
        cost = next;
        back.push(from);
    }
    let last = layers.last().expect("nonempty grid");
    let (mut idx, total) = last
        .iter()
        .enumerate()
        .map(|(a, s)| {
            let c = Cost {
                penalty: cost[a].penalty + edge_penalty(s.value, area, PI - s.theta, lip, &end_w, floor),
                sum: cost[a].sum,
            };
            (a, c)
        })
        .reduce(|x, y| if y.1.better_than(&x.1) { y } else { x })
        .expect("nonempty layer");

    let mut samples = vec![layers[layers.len() - 1][idx]];
    for k in (1..layers.len()).rev() {
        idx = back[k][idx];
        samples.push(layers[k - 1][idx]);
    }
    samples.reverse();

    let mut f = SpectralFunction {
        status: "candidate".to_string(),
        samples,
        area,
        rad,
        penalty: total.penalty,
        weights: *weights,
        validation: ValidationReport {
            max_decrease: 0.0,
            monotone: true,
            max_slope: 0.0,
            lipschitz_bound: 0.0,
            lipschitz: true,
            min_value: 0.0,
            max_value: 0.0,
            bounded: true,
            endpoints: true,
        },
    };
    f.validation = validate_properties(&f, area, rad)?;
    if !f.validation.monotone {
        let theta = f
            .samples
            .windows(2)
            .max_by(|a, b| (a[0].value - a[1].value).total_cmp(&(b[0].value - b[1].value)))
            .map_or(f64::NAN, |w| w[1].theta);
        return Err(SpectralError::NoAdmissiblePath { decrease: f.validation.max_decrease, theta, penalty: f.penalty });
    }
    if total.penalty > 0.0 {
        log::warn!("selected spectral path carries penalty {:e}", total.penalty);
    }
    Ok(f)
}

/// Monotonicity, Lipschitz and range checks on the sampled function.
pub fn validate_properties(f: &SpectralFunction, area: f64, rad: f64) -> Result<ValidationReport, SpectralError> {
    let s = &f.samples;
    if s.len() < 2 {
        return Err(SpectralError::TooFewSamples);
    }
    let bound = rad * rad * (1.0 + LIPSCHITZ_SLACK);
    let mut max_decrease = 0.0f64;
    let mut max_slope = 0.0f64;
    for w in s.windows(2) {
        let (a, b) = if w[0].theta <= w[1].theta { (w[0], w[1]) } else { (w[1], w[0]) };
        max_decrease = max_decrease.max(a.value - b.value);
        let dt = b.theta - a.theta;
        if dt > 0.0 {
            max_slope = max_slope.max((b.value - a.value).abs() / dt);
        }
    }
    let min_value = s.iter().map(|x| x.value).fold(f64::INFINITY, f64::min);
    let max_value = s.iter().map(|x| x.value).fold(f64::NEG_INFINITY, f64::max);
    let tol = MONOTONE_TOL * area;
    let first = s.iter().min_by(|a, b| a.theta.total_cmp(&b.theta)).expect("nonempty");
    let last = s.iter().max_by(|a, b| a.theta.total_cmp(&b.theta)).expect("nonempty");
    let endpoints = first.value >= -tol
        && first.value <= bound * first.theta + tol
        && last.value <= area + tol
        && area - last.value <= bound * (PI - last.theta) + tol;
    Ok(ValidationReport {
        max_decrease,
        monotone: max_decrease <= tol,
        max_slope,
        lipschitz_bound: bound,
        lipschitz: max_slope <= bound,
        min_value,
        max_value,
        bounded: min_value >= -tol && max_value <= area + tol,
        endpoints,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InscriptionInterval {
    pub a: f64,
    pub b: f64,
    pub length: f64,
    pub epsilon: f64,
    /// `(Area − 2ε)/Rad²`.
    pub guaranteed: f64,
    /// Largest grid spacing, the resolution of `a` and `b`.
    pub slack: f64,
    pub meets_bound: bool,
}

/// `a = inf{θ : ℓ̂ ≥ ε}` and `b = sup{θ : ℓ̂ ≤ Area − ε}` on the anchored
/// piecewise-linear interpolant.
pub fn inscription_interval(f: &SpectralFunction, epsilon: f64) -> Result<InscriptionInterval, SpectralError> {
    let area = f.area;
    if !(epsilon > 0.0 && epsilon < 0.5 * area) {
        return Err(SpectralError::InvalidEpsilon { epsilon, half_area: 0.5 * area });
    }
    let k = f.knots();
    let cross = |p: (f64, f64), q: (f64, f64), level: f64| -> f64 {
        if q.1 == p.1 {
            p.0
        } else {
            p.0 + (q.0 - p.0) * (level - p.1) / (q.1 - p.1)
        }
    };
    let mut a = PI;
    for w in k.windows(2) {
        if w[1].1 >= epsilon {
            a = if w[0].1 >= epsilon { w[0].0 } else { cross(w[0], w[1], epsilon) };
            break;
        }
    }
    let top = area - epsilon;
    let mut b = 0.0;
    for w in k.windows(2).rev() {
        if w[0].1 <= top {
            b = if w[1].1 <= top { w[1].0 } else { cross(w[0], w[1], top) };
            break;
        }
    }
    if a >= b {
        return Err(SpectralError::IntervalEmpty { a, b });
    }
    let slack = k.windows(2).map(|w| w[1].0 - w[0].0).fold(0.0, f64::max);
    let guaranteed = (area - 2.0 * epsilon) / (f.rad * f.rad);
    let length = b - a;
    let meets_bound = length >= guaranteed - slack;
    if !meets_bound {
        log::warn!("inscription interval {length:.6} below the guaranteed {guaranteed:.6} minus slack {slack:.3e}");
    }
    Ok(InscriptionInterval { a, b, length, epsilon, guaranteed, slack, meets_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::{BranchEnd, BranchSample, SpectrumBranch};

    fn diagram(area: f64, rad: f64, grid: &[f64], branches: &[Vec<f64>]) -> SpectrumDiagram {
        SpectrumDiagram {
            branches: branches
                .iter()
                .enumerate()
                .map(|(id, vals)| SpectrumBranch {
                    id,
                    samples: vals
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| BranchSample { theta: grid[i], params: [0.0; 4], action: v, rad, grid_index: Some(i) })
                        .collect(),
                    birth: BranchEnd::Boundary,
                    death: BranchEnd::Boundary,
                    stalled: false,
                    birth_partner: None,
                    death_partner: None,
                })
                .collect(),
            curve_area: area,
            curve_rad: rad,
            theta_grid: grid.to_vec(),
            cross_checks: Vec::new(),
            ambiguous_matches: 0,
        }
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
    }

    #[test]
    fn identity_law_is_selected() {
        let grid = linspace(0.1, 3.0, 64);
        let law: Vec<f64> = grid.clone();
        let above: Vec<f64> = grid.iter().map(|t| t + 0.5).collect();
        let f = select_spectral_function(&diagram(PI, 1.0, &grid, &[above, law])).unwrap();
        assert_eq!(f.status, "candidate");
        assert_eq!(f.penalty, 0.0);
        for s in &f.samples {
            assert_eq!(s.value, s.theta);
            assert_eq!(s.branch_id, 1);
        }
        let v = &f.validation;
        assert!(v.passed());
        assert!((v.max_slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_branches_are_switched() {
        // Two lines crossing at θ = 1.5; the pointwise minimum is monotone.
        let grid = linspace(0.1, 3.0, 58);
        let up: Vec<f64> = grid.iter().map(|t| 0.9 * t).collect();
        let flat: Vec<f64> = grid.iter().map(|t| 1.35 + 0.1 * (t - 1.5)).collect();
        let f = select_spectral_function(&diagram(1.6, 1.0, &grid, &[up.clone(), flat.clone()])).unwrap();
        assert_eq!(f.penalty, 0.0);
        for (i, s) in f.samples.iter().enumerate() {
            assert_eq!(s.value, up[i].min(flat[i]));
        }
    }

    #[test]
    fn decreasing_spectrum_has_no_admissible_path() {
        let grid = linspace(0.1, 3.0, 64);
        let down: Vec<f64> = grid.iter().map(|t| 3.0 - t).collect();
        let err = select_spectral_function(&diagram(PI, 1.0, &grid, &[down])).unwrap_err();
        assert!(matches!(err, SpectralError::NoAdmissiblePath { .. }));
    }

    #[test]
    fn empty_layer_is_reported() {
        let grid = linspace(0.1, 3.0, 4);
        let mut d = diagram(PI, 1.0, &grid, &[grid.clone()]);
        d.branches[0].samples.remove(2);
        assert!(matches!(select_spectral_function(&d), Err(SpectralError::EmptyLayer { .. })));
    }

    fn function(area: f64, rad: f64, pts: &[(f64, f64)]) -> SpectralFunction {
        let samples: Vec<SpectralSample> = pts.iter().map(|&(theta, value)| SpectralSample { theta, value, branch_id: 0 }).collect();
        let mut f = SpectralFunction {
            status: "candidate".into(),
            samples,
            area,
            rad,
            penalty: 0.0,
            weights: SelectionWeights::default(),
            validation: ValidationReport {
                max_decrease: 0.0,
                monotone: true,
                max_slope: 0.0,
                lipschitz_bound: 0.0,
                lipschitz: true,
                min_value: 0.0,
                max_value: 0.0,
                bounded: true,
                endpoints: true,
            },
        };
        f.validation = validate_properties(&f, area, rad).unwrap();
        f
    }

    #[test]
    fn validation_examples() {
        let grid = linspace(0.1, 3.0, 64);
        let circle = function(PI, 1.0, &grid.iter().map(|&t| (t, t)).collect::<Vec<_>>());
        assert!(circle.validation.passed());

        // Ellipse-like: slope 4·sin²-shaped profile stays below Rad² = 4.
        let area = 2.0 * PI;
        let ell = function(area, 2.0, &grid.iter().map(|&t| (t, area * (t - t.sin() * t.cos()) / PI)).collect::<Vec<_>>());
        assert!(ell.validation.max_slope <= 4.0 * 1.01);
        assert!(ell.validation.monotone && ell.validation.bounded);

        let zero = function(PI, 1.0, &grid.iter().map(|&t| (t, 0.0)).collect::<Vec<_>>());
        assert!(zero.validation.monotone);
        assert!(!zero.validation.endpoints);
        assert!(!zero.validation.passed());

        assert!(matches!(validate_properties(&function(PI, 1.0, &[(1.0, 1.0), (2.0, 2.0)]), PI, 1.0), Ok(_)));
        let mut one = function(PI, 1.0, &[(1.0, 1.0), (2.0, 2.0)]);
        one.samples.pop();
        assert_eq!(validate_properties(&one, PI, 1.0), Err(SpectralError::TooFewSamples));
    }

    #[test]
    fn interval_examples() {
        let grid = linspace(0.05, PI - 0.05, 128);
        let circle = function(PI, 1.0, &grid.iter().map(|&t| (t, t)).collect::<Vec<_>>());
        let i = inscription_interval(&circle, 0.1).unwrap();
        assert!((i.a - 0.1).abs() < 1e-12 && (i.b - (PI - 0.1)).abs() < 1e-12);
        assert!((i.length - (PI - 0.2)).abs() < 1e-12);
        assert!(i.meets_bound);

        // Near ε = Area/2 the interval degenerates but stays nonnegative.
        let j = inscription_interval(&circle, 0.5 * PI - 1e-3).unwrap();
        assert!(j.length >= 0.0 && j.length < 3e-3);
        assert!(j.guaranteed >= 0.0);

        assert!(matches!(inscription_interval(&circle, 0.0), Err(SpectralError::InvalidEpsilon { .. })));
        assert!(matches!(inscription_interval(&circle, 2.0), Err(SpectralError::InvalidEpsilon { .. })));
    }

    #[test]
    fn eval_interpolates_between_anchors() {
        let f = function(PI, 1.0, &[(1.0, 1.0), (2.0, 2.0)]);
        assert_eq!(f.eval(0.0), 0.0);
        assert!((f.eval(0.5) - 0.5).abs() < 1e-15);
        assert!((f.eval(1.5) - 1.5).abs() < 1e-15);
        assert_eq!(f.eval(PI), PI);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("theta,ell,branch_id\n1.0,1.0,0\n"));
    }
}
