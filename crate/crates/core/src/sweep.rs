//! Branch continuation and the action spectrum across `θ`.
//!
//! Rectangles found on a `θ` grid are matched between neighbouring grid points
//! and stitched into branches. Branch ends between grid points are resolved by
//! pseudo-arclength continuation in `(θ, s, t, s2, t2)`: either the branch
//! folds back (a birth/death pair) or it reaches the next grid point, in which
//! case a match missed by the nearest-neighbour pass is repaired.

use std::collections::VecDeque;
use std::io::Write;

use nalgebra::{Matrix5, Vector4, Vector5};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::action_value;
use crate::curve::JordanCurve;
use crate::inscribe::{
    find_rectangles_with, newton_rectangle, quadruple_distance, system_theta, torus_distance, FindOptions, InscribeError,
    InscribedRectangle,
};
use crate::linalg::solve5;
use crate::{clamp_theta, wrap_angle, THETA_CLAMP};

/// Continuation gives up once the step would drop below this.
pub const STEP_FLOOR: f64 = 1e-6;
/// Residual accepted along branches.
pub const BRANCH_TOL: f64 = 1e-11;
/// Two branch ends fold together when their fold points agree this closely.
pub const FOLD_MATCH_TOL: f64 = 1e-4;
/// Samples per trajectory used for actions in the sweep.
pub const ACTION_SAMPLES: usize = 64;
const MAX_CONTINUATION_STEPS: usize = 20_000;
const CORRECTOR_ITERS: usize = 12;
/// Every `CROSS_CHECK_STRIDE`-th grid point is re-solved independently.
pub const CROSS_CHECK_STRIDE: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid θ range ({0}, {1})")]
    InvalidRange(f64, f64),
    #[error("n_steps {0} below the minimum of 64")]
    InvalidSteps(usize),
    #[error("seed residual {0:e} exceeds 1e-10")]
    InvalidSeed(f64),
    #[error("no inscribed rectangles at any θ")]
    EmptySpectrum,
    #[error(transparent)]
    Inscribe(#[from] InscribeError),
}

/// How a branch end was resolved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BranchEnd {
    /// The end of the `θ` range.
    Boundary,
    /// A turning point of the zero set in `θ`.
    Fold { theta: f64, params: [f64; 4] },
    /// Continuation neither folded nor reached a grid solution.
    Unresolved,
}

impl BranchEnd {
    pub fn is_event(&self) -> bool {
        !matches!(self, BranchEnd::Boundary)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub theta: f64,
    pub params: [f64; 4],
    pub action: f64,
    pub rad: f64,
    /// Index into the diagram's `θ` grid, when the sample sits on it.
    pub grid_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBranch {
    pub id: usize,
    pub samples: Vec<BranchSample>,
    pub birth: BranchEnd,
    pub death: BranchEnd,
    /// Continuation hit the step floor somewhere on this branch.
    pub stalled: bool,
    /// Branch ids sharing the birth and death fold points, if any.
    pub birth_partner: Option<usize>,
    pub death_partner: Option<usize>,
}

/// Result of re-solving one grid point independently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub grid_index: usize,
    pub theta: f64,
    /// Solver rectangles with no branch sample.
    pub missing: usize,
    /// Branch samples the solver did not reproduce.
    pub extra: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDiagram {
    pub branches: Vec<SpectrumBranch>,
    pub curve_area: f64,
    pub curve_rad: f64,
    pub theta_grid: Vec<f64>,
    pub cross_checks: Vec<CrossCheck>,
    /// Matches decided by action because two candidates were nearly equidistant.
    pub ambiguous_matches: usize,
}

impl SpectrumDiagram {
    /// `(branch id, sample)` pairs on grid point `i`.
    pub fn samples_at(&self, i: usize) -> Vec<(usize, &BranchSample)> {
        self.branches
            .iter()
            .flat_map(|b| b.samples.iter().filter(move |s| s.grid_index == Some(i)).map(move |s| (b.id, s)))
            .collect()
    }

    pub fn cross_check_passed(&self) -> bool {
        self.cross_checks.iter().all(|c| c.missing == 0 && c.extra == 0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        #[derive(Serialize)]
        struct Row<'a> {
            theta: f64,
            branch_id: usize,
            action: f64,
            s: f64,
            t: f64,
            s2: f64,
            t2: f64,
            rad: f64,
            event: &'a str,
        }
        let mut wtr = csv::Writer::from_writer(out);
        for b in &self.branches {
            let last = b.samples.len().saturating_sub(1);
            for (k, smp) in b.samples.iter().enumerate() {
                let event = if k == 0 && b.birth.is_event() {
                    "birth"
                } else if k == last && b.death.is_event() {
                    "death"
                } else {
                    "none"
                };
                let [s, t, s2, t2] = smp.params;
                wtr.serialize(Row { theta: smp.theta, branch_id: b.id, action: smp.action, s, t, s2, t2, rad: smp.rad, event })?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

#[inline]
fn params_of(x: &Vector5<f64>) -> [f64; 4] {
    [x[1], x[2], x[3], x[4]]
}

fn eval5(curve: &JordanCurve, x: &Vector5<f64>) -> (Vector4<f64>, Matrix5<f64>) {
    let (f, j, dth) = system_theta(curve, x[0], &Vector4::new(x[1], x[2], x[3], x[4]));
    let mut a = Matrix5::zeros();
    for r in 0..4 {
        a[(r, 0)] = dth[r];
        for c in 0..4 {
            a[(r, c + 1)] = j[(r, c)];
        }
    }
    (f, a)
}

/// Unit tangent to the zero set at `x`, oriented along `prev`.
fn tangent(curve: &JordanCurve, x: &Vector5<f64>, prev: &Vector5<f64>) -> Option<Vector5<f64>> {
    let (_, mut a) = eval5(curve, x);
    a.set_row(4, &prev.transpose());
    let t = solve5(&a, &Vector5::new(0.0, 0.0, 0.0, 0.0, 1.0))?.x;
    let n = t.norm();
    if !(n > 0.0) {
        return None;
    }
    let t = t / n;
    Some(if t.dot(prev) < 0.0 { -t } else { t })
}

/// Newton on the zero set intersected with the hyperplane through `xp` normal to `t`.
fn correct(curve: &JordanCurve, xp: &Vector5<f64>, t: &Vector5<f64>) -> Option<(Vector5<f64>, usize)> {
    let mut x = *xp;
    for it in 0..CORRECTOR_ITERS {
        let (f, mut a) = eval5(curve, &x);
        a.set_row(4, &t.transpose());
        let g = Vector5::new(f[0], f[1], f[2], f[3], t.dot(&(x - xp)));
        let step = solve5(&a, &(-g))?.x;
        if step.amax() > 0.5 {
            return None;
        }
        x += step;
        if step.amax() < 1e-10 {
            let (f, _) = eval5(curve, &x);
            if f.amax() <= BRANCH_TOL {
                return Some((x, it + 1));
            }
        }
    }
    let (f, _) = eval5(curve, &x);
    (f.amax() <= BRANCH_TOL).then_some((x, CORRECTOR_ITERS))
}

struct OneWay {
    points: Vec<Vector5<f64>>,
    end: BranchEnd,
    stalled: bool,
}

// Pseudo-arclength continuation from `x0`, initially heading in the θ
// direction `dir`, until θ leaves `range`, the branch folds, or the step
// collapses. `x0` itself is not included.
fn continue_one_way(curve: &JordanCurve, x0: Vector5<f64>, dir: f64, range: (f64, f64), step: f64) -> OneWay {
    let mut points = Vec::new();
    let e_theta = Vector5::new(dir, 0.0, 0.0, 0.0, 0.0);
    let Some(mut t) = tangent(curve, &x0, &e_theta) else {
        return OneWay { points, end: BranchEnd::Unresolved, stalled: true };
    };
    let mut x = x0;
    let mut h = step;
    for _ in 0..MAX_CONTINUATION_STEPS {
        let xp = x + t * h;
        let Some((xn, iters)) = correct(curve, &xp, &t) else {
            h *= 0.5;
            if h < STEP_FLOOR {
                log::warn!("{}: continuation stalled at θ = {:.6}", curve.name(), x[0]);
                return OneWay { points, end: BranchEnd::Unresolved, stalled: true };
            }
            continue;
        };
        if xn[0] < range.0 || xn[0] > range.1 {
            let bound = if xn[0] < range.0 { range.0 } else { range.1 };
            let frac = (bound - x[0]) / (xn[0] - x[0]);
            let guess = x + (xn - x) * frac;
            if let Some(sol) = newton_rectangle(curve, bound, Vector4::new(guess[1], guess[2], guess[3], guess[4]), BRANCH_TOL) {
                points.push(Vector5::new(bound, sol.x[0], sol.x[1], sol.x[2], sol.x[3]));
                return OneWay { points, end: BranchEnd::Boundary, stalled: false };
            }
            return OneWay { points, end: BranchEnd::Unresolved, stalled: false };
        }
        let Some(tn) = tangent(curve, &xn, &t) else {
            return OneWay { points, end: BranchEnd::Unresolved, stalled: true };
        };
        if tn[0] * t[0] < 0.0 {
            let fold = locate_fold(curve, &x, &t, h).unwrap_or(xn);
            return OneWay {
                points,
                end: BranchEnd::Fold { theta: fold[0], params: params_of(&fold).map(wrap_angle) },
                stalled: false,
            };
        }
        points.push(xn);
        x = xn;
        t = tn;
        if iters <= 3 {
            h = (1.5 * h).min(step);
        }
        if points.len() > 16 && (x - x0).amax() < 0.5 * step {
            // A closed loop of solutions.
            return OneWay { points, end: BranchEnd::Unresolved, stalled: false };
        }
    }
    OneWay { points, end: BranchEnd::Unresolved, stalled: true }
}

// Bisection on the arclength offset for the zero of the tangent's θ-component.
fn locate_fold(curve: &JordanCurve, x: &Vector5<f64>, t: &Vector5<f64>, h: f64) -> Option<Vector5<f64>> {
    let sign0 = t[0].signum();
    let (mut lo, mut hi) = (0.0, h);
    let mut best = None;
    for _ in 0..60 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (xm, _) = correct(curve, &(x + t * mid), t)?;
        let tm = tangent(curve, &xm, t)?;
        best = Some(xm);
        if tm[0] * sign0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}

fn sample_from(curve: &JordanCurve, x: &Vector5<f64>, grid_index: Option<usize>) -> Option<BranchSample> {
    let rect = InscribedRectangle::from_params(curve, x[0], params_of(x));
    match action_value(curve, &rect, ACTION_SAMPLES) {
        Ok(a) => Some(BranchSample { theta: rect.theta, params: rect.params, action: a.value, rad: rect.rad, grid_index }),
        Err(e) => {
            log::warn!("{}: dropping sample at θ = {:.6}: {e}", curve.name(), x[0]);
            None
        }
    }
}

/// Continue a branch through `seed` in both directions across `theta_range`.
pub fn continue_branch(
    curve: &JordanCurve,
    seed: &InscribedRectangle,
    theta_range: (f64, f64),
    step: f64,
) -> Result<SpectrumBranch, SweepError> {
    if seed.residual > 1e-10 {
        return Err(SweepError::InvalidSeed(seed.residual));
    }
    let range = (clamp_theta(theta_range.0), clamp_theta(theta_range.1));
    if !(range.0 < range.1) {
        return Err(SweepError::InvalidRange(theta_range.0, theta_range.1));
    }
    let x0 = Vector5::new(seed.theta, seed.params[0], seed.params[1], seed.params[2], seed.params[3]);
    let back = continue_one_way(curve, x0, -1.0, range, step);
    let fwd = continue_one_way(curve, x0, 1.0, range, step);
    let xs: Vec<Vector5<f64>> = back.points.iter().rev().chain(std::iter::once(&x0)).chain(fwd.points.iter()).copied().collect();
    let mut samples: Vec<BranchSample> = xs.iter().filter_map(|x| sample_from(curve, x, None)).collect();
    align_orientation(&mut samples);
    Ok(SpectrumBranch {
        id: 0,
        samples,
        birth: back.end,
        death: fwd.end,
        stalled: back.stalled || fwd.stalled,
        birth_partner: None,
        death_partner: None,
    })
}

/// Flip samples to the swap orientation closest to their predecessor.
fn align_orientation(samples: &mut [BranchSample]) {
    for k in 1..samples.len() {
        let prev = samples[k - 1].params;
        let [s, t, s2, t2] = samples[k].params;
        let swapped = [t, s, t2, s2];
        if torus_distance(&prev, &swapped) < torus_distance(&prev, &samples[k].params) {
            samples[k].params = swapped;
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    rect: InscribedRectangle,
    action: f64,
}

/// Sweep `[theta_min, theta_max]` (clamped away from 0 and π) on `n_steps`
/// equally spaced angles.
pub fn sweep_spectrum(
    curve: &JordanCurve,
    theta_min: f64,
    theta_max: f64,
    n_steps: usize,
    grid_n: usize,
) -> Result<SpectrumDiagram, SweepError> {
    if n_steps < 64 {
        return Err(SweepError::InvalidSteps(n_steps));
    }
    let (lo, hi) = (clamp_theta(theta_min), clamp_theta(theta_max));
    if !(theta_min > 0.0 && theta_max < std::f64::consts::PI && lo < hi) {
        return Err(SweepError::InvalidRange(theta_min, theta_max));
    }
    let grid: Vec<f64> = (0..n_steps).map(|i| lo + (hi - lo) * i as f64 / (n_steps - 1) as f64).collect();
    sweep_on_grid(curve, &grid, grid_n)
}

/// Sweep over an explicit monotone grid (ascending or descending).
pub fn sweep_on_grid(curve: &JordanCurve, grid: &[f64], grid_n: usize) -> Result<SpectrumDiagram, SweepError> {
    if grid.len() < 2 || grid.iter().any(|&t| !(THETA_CLAMP..=std::f64::consts::PI - THETA_CLAMP).contains(&t)) {
        return Err(SweepError::InvalidRange(grid.first().copied().unwrap_or(f64::NAN), grid.last().copied().unwrap_or(f64::NAN)));
    }
    let opts = FindOptions { grid_n, tol: BRANCH_TOL, all_generators: true };
    let layers: Vec<Vec<Node>> = grid
        .par_iter()
        .map(|&theta| -> Result<Vec<Node>, SweepError> {
            let rects = find_rectangles_with(curve, theta, &opts)?;
            Ok(rects
                .into_iter()
                .filter_map(|rect| match action_value(curve, &rect, ACTION_SAMPLES) {
                    Ok(a) => Some(Node { rect, action: a.value }),
                    Err(e) => {
                        log::warn!("{}: dropping rectangle at θ = {theta:.6}: {e}", curve.name());
                        None
                    }
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;
    if layers.iter().all(Vec::is_empty) {
        return Err(SweepError::EmptySpectrum);
    }

    let m = grid.len();
    // succ[i][a] = index in layer i+1; pred[i][b] = index in layer i-1.
    let mut succ: Vec<Vec<Option<usize>>> = layers.iter().map(|l| vec![None; l.len()]).collect();
    let mut pred: Vec<Vec<Option<usize>>> = layers.iter().map(|l| vec![None; l.len()]).collect();
    let mut ambiguous = 0;
    for i in 0..m - 1 {
        let (links, amb) = match_layers(&layers[i], &layers[i + 1]);
        ambiguous += amb;
        if amb > 0 {
            log::warn!("{}: {amb} ambiguous matches between θ = {:.6} and {:.6}", curve.name(), grid[i], grid[i + 1]);
        }
        for (a, b) in links {
            succ[i][a] = Some(b);
            pred[i + 1][b] = Some(a);
        }
    }

    // Resolve interior ends by continuation towards the neighbouring grid point.
    let mut death_end: Vec<Vec<BranchEnd>> = layers.iter().map(|l| vec![BranchEnd::Boundary; l.len()]).collect();
    let mut birth_end = death_end.clone();
    let mut stalled: Vec<Vec<bool>> = layers.iter().map(|l| vec![false; l.len()]).collect();
    for forward in [true, false] {
        let indices: Vec<usize> = if forward { (0..m - 1).collect() } else { (1..m).rev().collect() };
        for i in indices {
            let j = if forward { i + 1 } else { i - 1 };
            // Links confirmed by continuation may displace nearest-neighbour links;
            // a displaced node is queued for its own continuation.
            let mut confirmed = vec![false; layers[j].len()];
            let mut queue: VecDeque<usize> = (0..layers[i].len()).collect();
            while let Some(a) = queue.pop_front() {
                let linked = if forward { succ[i][a] } else { pred[i][a] };
                if linked.is_some() {
                    continue;
                }
                let rect = &layers[i][a].rect;
                let x0 = Vector5::new(rect.theta, rect.params[0], rect.params[1], rect.params[2], rect.params[3]);
                let dir = (grid[j] - grid[i]).signum();
                let range = (grid[i].min(grid[j]), grid[i].max(grid[j]));
                let step = 0.25 * (grid[j] - grid[i]).abs();
                let run = continue_one_way(curve, x0, dir, range, step);
                let mut end = run.end;
                if end == BranchEnd::Boundary {
                    let last = run.points.last().map(params_of).unwrap_or(rect.params).map(wrap_angle);
                    let reached_far_side = run.points.last().is_some_and(|x| (x[0] - grid[j]).abs() < 1e-12);
                    let partner = (0..layers[j].len())
                        .filter(|&b| !confirmed[b])
                        .map(|b| (quadruple_distance(&layers[j][b].rect.params, &last), b))
                        .filter(|&(d, _)| d < 1e-7)
                        .min_by(|x, y| x.0.total_cmp(&y.0))
                        .map(|(_, b)| b);
                    match partner {
                        Some(b) if reached_far_side => {
                            let owner = if forward { pred[j][b] } else { succ[j][b] };
                            if let Some(o) = owner {
                                if forward {
                                    succ[i][o] = None;
                                } else {
                                    pred[i][o] = None;
                                }
                                queue.push_back(o);
                            }
                            if forward {
                                succ[i][a] = Some(b);
                                pred[j][b] = Some(a);
                            } else {
                                pred[i][a] = Some(b);
                                succ[j][b] = Some(a);
                            }
                            confirmed[b] = true;
                            stalled[i][a] |= run.stalled;
                            continue;
                        }
                        _ => end = BranchEnd::Unresolved,
                    }
                }
                stalled[i][a] |= run.stalled;
                if forward {
                    death_end[i][a] = end;
                } else {
                    birth_end[i][a] = end;
                }
            }
        }
    }

    // Stitch chains into branches.
    let mut branches = Vec::new();
    for i in 0..m {
        for a in 0..layers[i].len() {
            if pred[i][a].is_some() {
                continue;
            }
            let mut samples = Vec::new();
            let mut any_stall = false;
            let (mut li, mut la) = (i, a);
            loop {
                let node = &layers[li][la];
                any_stall |= stalled[li][la];
                samples.push(BranchSample {
                    theta: node.rect.theta,
                    params: node.rect.params,
                    action: node.action,
                    rad: node.rect.rad,
                    grid_index: Some(li),
                });
                match succ[li][la] {
                    Some(b) => {
                        li += 1;
                        la = b;
                    }
                    None => break,
                }
            }
            align_orientation(&mut samples);
            branches.push(SpectrumBranch {
                id: branches.len(),
                samples,
                birth: birth_end[i][a],
                death: death_end[li][la],
                stalled: any_stall,
                birth_partner: None,
                death_partner: None,
            });
        }
    }
    link_fold_partners(&mut branches);

    let cross_checks = cross_check(curve, grid, grid_n, &branches)?;
    for c in cross_checks.iter().filter(|c| c.missing + c.extra > 0) {
        log::warn!(
            "{}: cross-check at θ = {:.6}: {} missing, {} extra",
            curve.name(),
            c.theta,
            c.missing,
            c.extra
        );
    }
    Ok(SpectrumDiagram {
        branches,
        curve_area: curve.enclosed_area(),
        curve_rad: curve.curve_radius(),
        theta_grid: grid.to_vec(),
        cross_checks,
        ambiguous_matches: ambiguous,
    })
}

/// Greedy nearest-neighbour matching between consecutive layers. Returns the
/// links and the number of ambiguous decisions.
fn match_layers(a: &[Node], b: &[Node]) -> (Vec<(usize, usize)>, usize) {
    if a.is_empty() || b.is_empty() {
        return (Vec::new(), 0);
    }
    let dist: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| quadruple_distance(&x.rect.params, &y.rect.params)).collect()).collect();
    let mut nearest: Vec<f64> = dist.iter().map(|row| row.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    nearest.extend((0..b.len()).map(|j| dist.iter().map(|row| row[j]).fold(f64::INFINITY, f64::min)));
    nearest.sort_by(f64::total_cmp);
    let median = nearest[nearest.len() / 2];
    let threshold = (3.0 * median).max(1e-9);

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, row) in dist.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if d <= threshold {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut links = Vec::new();
    let mut ambiguous = 0;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        let rivals_b: Vec<usize> = (0..b.len()).filter(|&k| !used_b[k] && dist[i][k] <= 1.1 * d).collect();
        let rivals_a: Vec<usize> = (0..a.len()).filter(|&k| !used_a[k] && dist[k][j] <= 1.1 * d).collect();
        let (ci, cj) = if rivals_b.len() > 1 {
            ambiguous += 1;
            let k = *rivals_b
                .iter()
                .min_by(|&&p, &&q| (a[i].action - b[p].action).abs().total_cmp(&(a[i].action - b[q].action).abs()))
                .expect("nonempty");
            (i, k)
        } else if rivals_a.len() > 1 {
            ambiguous += 1;
            let k = *rivals_a
                .iter()
                .min_by(|&&p, &&q| (a[p].action - b[j].action).abs().total_cmp(&(a[q].action - b[j].action).abs()))
                .expect("nonempty");
            (k, j)
        } else {
            (i, j)
        };
        used_a[ci] = true;
        used_b[cj] = true;
        links.push((ci, cj));
    }
    (links, ambiguous)
}

fn fold_distance(a: &BranchEnd, b: &BranchEnd) -> Option<f64> {
    match (a, b) {
        (BranchEnd::Fold { theta: ta, params: pa }, BranchEnd::Fold { theta: tb, params: pb }) => {
            Some((ta - tb).abs().max(quadruple_distance(pa, pb)))
        }
        _ => None,
    }
}

fn link_fold_partners(branches: &mut [SpectrumBranch]) {
    let n = branches.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if branches[i].death_partner.is_none()
                && fold_distance(&branches[i].death, &branches[j].death).is_some_and(|d| d < FOLD_MATCH_TOL)
            {
                branches[i].death_partner = Some(j);
            }
            if branches[i].birth_partner.is_none()
                && fold_distance(&branches[i].birth, &branches[j].birth).is_some_and(|d| d < FOLD_MATCH_TOL)
            {
                branches[i].birth_partner = Some(j);
            }
        }
    }
}

/// Re-solve every tenth grid point on a finer seed grid and compare with the
/// branch samples there. Degenerate solutions come in families whose
/// representatives are arbitrary; they are compared by half-diagonal only.
fn cross_check(curve: &JordanCurve, grid: &[f64], grid_n: usize, branches: &[SpectrumBranch]) -> Result<Vec<CrossCheck>, SweepError> {
    let opts = FindOptions { grid_n: grid_n + grid_n / 2, tol: BRANCH_TOL, all_generators: true };
    let picks: Vec<usize> = (0..grid.len()).step_by(CROSS_CHECK_STRIDE).collect();
    picks
        .par_iter()
        .map(|&i| {
            let theta = grid[i];
            let solver = find_rectangles_with(curve, theta, &opts)?;
            let samples: Vec<&BranchSample> =
                branches.iter().flat_map(|b| b.samples.iter().filter(|s| s.grid_index == Some(i))).collect();
            let same = |r: &InscribedRectangle, s: &BranchSample| {
                if r.is_degenerate() {
                    (r.rad - s.rad).abs() < 1e-8
                } else {
                    quadruple_distance(&r.params, &s.params) < 1e-6
                }
            };
            let missing = solver.iter().filter(|r| !samples.iter().any(|s| same(r, s))).count();
            let extra = samples.iter().filter(|s| !solver.iter().any(|r| same(r, s))).count();
            Ok(CrossCheck { grid_index: i, theta, missing, extra })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Mode;
    use crate::inscribe::find_rectangles;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn circle() -> JordanCurve {
        JordanCurve::new("circle", [Mode::new(1, Complex64::new(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn circle_branch_follows_action_law() {
        let c = circle();
        let seed = find_rectangles(&c, PI / 2.0, 64, 1e-11).unwrap().remove(0);
        let br = continue_branch(&c, &seed, (0.1, 3.0), 0.05).unwrap();
        assert_eq!(br.birth, BranchEnd::Boundary);
        assert_eq!(br.death, BranchEnd::Boundary);
        assert!((br.samples[0].theta - 0.1).abs() < 1e-12);
        assert!((br.samples.last().unwrap().theta - 3.0).abs() < 1e-12);
        for s in &br.samples {
            assert!((s.action - s.theta).abs() < 1e-6);
        }
    }

    #[test]
    fn ellipse_square_branch_spans_range() {
        let e = JordanCurve::ellipse(2.0, 1.0);
        let seed = find_rectangles(&e, PI / 2.0, 128, 1e-11).unwrap().remove(0);
        let br = continue_branch(&e, &seed, (0.1, PI - 0.1), 0.05).unwrap();
        assert_eq!((br.birth, br.death), (BranchEnd::Boundary, BranchEnd::Boundary));
        for w in br.samples.windows(2) {
            assert!(w[1].theta > w[0].theta);
            assert!(w[1].action > w[0].action);
        }
        for s in &br.samples {
            let r = crate::inscribe::rectangle_residual(&e, s.theta, s.params);
            assert!(r.iter().all(|v| v.abs() <= 1e-10));
        }
    }

    #[test]
    fn fold_ends_meet() {
        // Near-degenerate fold: a lopsided curve whose rectangle families turn in θ.
        let g = JordanCurve::new(
            "lopsided",
            [
                Mode::new(1, Complex64::new(1.0, 0.0)),
                Mode::new(-2, Complex64::new(0.12, 0.0)),
                Mode::new(3, Complex64::new(0.04, 0.02)),
            ],
        )
        .unwrap();
        let d = sweep_spectrum(&g, 0.05, PI - 0.05, 64, 96).unwrap();
        for b in &d.branches {
            if let (BranchEnd::Fold { .. }, Some(p)) = (b.death, b.death_partner) {
                let other = &d.branches[p];
                assert!(fold_distance(&b.death, &other.death).unwrap() < FOLD_MATCH_TOL);
            }
        }
    }

    #[test]
    fn circle_sweep() {
        let d = sweep_spectrum(&circle(), 0.1, 3.0, 64, 48).unwrap();
        for b in &d.branches {
            for s in &b.samples {
                assert!((s.action - s.theta).abs() < 1e-6);
            }
        }
        assert!((0..64).all(|i| !d.samples_at(i).is_empty()));
    }

    #[test]
    fn ellipse_sweep_is_complete_and_continuous() {
        let e = JordanCurve::ellipse(2.0, 1.0);
        let d = sweep_spectrum(&e, 0.1, PI - 0.1, 64, 96).unwrap();
        assert!((0..64).all(|i| !d.samples_at(i).is_empty()));
        assert!(d.cross_check_passed(), "{:?}", d.cross_checks);
        let step = d.theta_grid[1] - d.theta_grid[0];
        for b in &d.branches {
            for w in b.samples.windows(2) {
                assert!((w[1].action - w[0].action).abs() < 10.0 * step * d.curve_rad * d.curve_rad);
            }
        }
        // Reversed grid gives the same branches.
        let mut rev = d.theta_grid.clone();
        rev.reverse();
        let r = sweep_on_grid(&e, &rev, 96).unwrap();
        assert_eq!(r.branches.len(), d.branches.len());
        for b in &d.branches {
            let hit = r.branches.iter().any(|q| {
                q.samples.len() == b.samples.len()
                    && q.samples.iter().rev().zip(&b.samples).all(|(x, y)| {
                        (x.theta - y.theta).abs() < 1e-12 && quadruple_distance(&x.params, &y.params) < 1e-8
                    })
            });
            assert!(hit);
        }
    }

    #[test]
    fn bad_arguments() {
        assert_eq!(sweep_spectrum(&circle(), 0.1, 3.0, 10, 48), Err(SweepError::InvalidSteps(10)));
        assert!(matches!(sweep_spectrum(&circle(), 2.0, 1.0, 64, 48), Err(SweepError::InvalidRange(..))));
    }
}
