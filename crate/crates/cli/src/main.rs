//! `peglab`: inscribed rectangles, actions and spectral selection from the command line.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use log::{info, warn};
use peglab_core::action::{action_value, is_elegant, ActionReport};
use peglab_core::curve::{smooth_approximate, JordanCurve, PolygonCurve};
use peglab_core::inscribe::{find_binormals, find_rectangles, rectangles_to_json, write_rectangles_csv, Binormal};
use peglab_core::shrinkout::approximate_and_track;
use peglab_core::spectral::{inscription_interval, select_spectral_function, SpectralError};
use peglab_core::svg::{approximation_svg, curve_svg, spectrum_svg, Svg};
use peglab_core::sweep::sweep_spectrum;
use peglab_core::{clamp_theta, THETA_CLAMP};
use serde::Serialize;

/// Trajectory samples for each action evaluation.
const ACTION_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Inscribe,
    Binormals,
    Action,
    Sweep,
    Spectral,
    Approx,
    Shrinkout,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Csv,
    Json,
    Svg,
}

#[derive(Parser, Debug)]
#[command(version, about = "Inscribed rectangles, actions and spectral selection for Jordan curves")]
struct RunConfig {
    command: Command,
    /// Curve JSON (polygon JSON for `approx` and `shrinkout`).
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long, default_value_t = FRAC_PI_2)]
    theta: f64,
    /// Sweep range `a:b` inside (0, π).
    #[arg(long, default_value = "0.05:3.0915926535897933", value_parser = parse_range)]
    theta_range: (f64, f64),
    #[arg(long, default_value_t = 128)]
    grid_n: usize,
    #[arg(long, default_value_t = 128)]
    steps: usize,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Action threshold for `spectral` intervals and `shrinkout` filtering.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Smoothing levels for `shrinkout`.
    #[arg(long, default_value_t = 4)]
    levels: usize,
    /// Fourier modes for `approx`.
    #[arg(long, default_value_t = 64)]
    modes: usize,
    /// Gaussian damping for `approx`.
    #[arg(long, default_value_t = 1e-3)]
    smoothing: f64,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,json,svg")]
    emit: Vec<Emit>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

/// A run that completed but whose result violates a checked invariant (exit 2).
#[derive(Debug)]
struct ValidationFailure(String);

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "validation failed: {}", self.0)
    }
}

impl std::error::Error for ValidationFailure {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ValidationFailure(msg.into()).into()
}

struct Output<'a> {
    dir: &'a Path,
    emit: &'a [Emit],
}

impl Output<'_> {
    fn wants(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    fn text(&self, kind: Emit, name: &str, body: &str) -> Result<()> {
        if !self.wants(kind) {
            return Ok(());
        }
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn csv(&self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<()> {
        if !self.wants(Emit::Csv) {
            return Ok(());
        }
        let mut buf = Vec::new();
        write(&mut buf).with_context(|| format!("serializing {name}"))?;
        self.text(Emit::Csv, name, std::str::from_utf8(&buf)?)
    }

    fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        if !self.wants(Emit::Json) {
            return Ok(());
        }
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.text(Emit::Json, name, &body)
    }

    fn svg(&self, name: &str, svg: &Svg) -> Result<()> {
        if !self.wants(Emit::Svg) {
            return Ok(());
        }
        let path = self.dir.join(name);
        svg.save(&path)?;
        info!("wrote {}", path.display());
        Ok(())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<ValidationFailure>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("PEGLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("PEGLAB_THREADS={raw:?}"))?;
    if n == 0 {
        bail!("PEGLAB_THREADS must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn load_curve(cfg: &RunConfig) -> Result<JordanCurve> {
    let path = cfg.curve.as_ref().context("--curve is required")?;
    JordanCurve::load(path).with_context(|| format!("loading curve {}", path.display()))
}

fn load_polygon(cfg: &RunConfig) -> Result<PolygonCurve> {
    let path = cfg.curve.as_ref().context("--curve is required")?;
    PolygonCurve::load(path).with_context(|| format!("loading polygon {}", path.display()))
}

fn clamped(theta: f64) -> f64 {
    let c = clamp_theta(theta);
    if c != theta {
        warn!("θ = {theta} clamped to {c}");
    }
    c
}

fn run(cfg: &RunConfig) -> Result<()> {
    configure_threads()?;
    if !(cfg.tol > 0.0) || !(cfg.epsilon > 0.0) || !cfg.theta.is_finite() {
        bail!("tolerances must be positive and θ finite");
    }
    if cfg.command != Command::Verify {
        fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    }
    let out = Output { dir: &cfg.output_dir, emit: &cfg.emit };
    match cfg.command {
        Command::Inscribe => inscribe(cfg, &out),
        Command::Binormals => binormals(cfg, &out),
        Command::Action => action(cfg, &out),
        Command::Sweep => sweep(cfg, &out),
        Command::Spectral => spectral(cfg, &out),
        Command::Approx => approx(cfg, &out),
        Command::Shrinkout => shrinkout(cfg, &out),
        Command::Verify => verify(),
    }
}

fn inscribe(cfg: &RunConfig, out: &Output) -> Result<()> {
    let curve = load_curve(cfg)?;
    let theta = clamped(cfg.theta);
    let rects = find_rectangles(&curve, theta, cfg.grid_n, cfg.tol)?;
    println!("{} rectangles at θ = {theta}", rects.len());
    for r in &rects {
        println!("  rad {:.12}  residual {:.1e}{}", r.rad, r.residual, if r.is_degenerate() { "  (degenerate)" } else { "" });
    }
    out.csv("rectangles.csv", |buf| write_rectangles_csv(buf, &rects))?;
    out.text(Emit::Json, "rectangles.json", &(rectangles_to_json(&rects) + "\n"))?;
    out.svg("rectangles.svg", &curve_svg(&curve, &rects))
}

fn binormals(cfg: &RunConfig, out: &Output) -> Result<()> {
    let curve = load_curve(cfg)?;
    let bs = find_binormals(&curve, cfg.grid_n, cfg.tol)?;
    println!("{} ordered binormals", bs.len());
    for b in &bs {
        let idx = b.morse_index.map_or("degenerate".to_string(), |k| k.to_string());
        println!("  s {:.9}  t {:.9}  chord {:.12}  index {idx}", b.s, b.t, b.chord_length);
    }
    out.csv("binormals.csv", |buf| {
        let mut wtr = csv::Writer::from_writer(buf);
        for b in &bs {
            wtr.serialize(b)?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    out.json::<[Binormal]>("binormals.json", &bs)
}

fn action(cfg: &RunConfig, out: &Output) -> Result<()> {
    let curve = load_curve(cfg)?;
    let theta = clamped(cfg.theta);
    let rects = find_rectangles(&curve, theta, cfg.grid_n, cfg.tol)?;
    let mut reports = Vec::with_capacity(rects.len());
    for r in &rects {
        let a = action_value(&curve, r, ACTION_SAMPLES)?;
        let rep = ActionReport::new(r, &a, is_elegant(&curve, r));
        println!("  rad {:.12}  action {:.12}{}", rep.rad, rep.value, if rep.elegant { "  (elegant)" } else { "" });
        reports.push(rep);
    }
    println!("{} actions at θ = {theta}", reports.len());
    out.csv("actions.csv", |buf| {
        let mut wtr = csv::Writer::from_writer(buf);
        for r in &reports {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    out.json("actions.json", &reports)?;
    out.svg("actions.svg", &curve_svg(&curve, &rects))
}

fn sweep_range(cfg: &RunConfig) -> (f64, f64) {
    let (a, b) = cfg.theta_range;
    let lo = a.max(THETA_CLAMP);
    let hi = b.min(PI - THETA_CLAMP);
    if (lo, hi) != (a, b) {
        warn!("θ range {a}:{b} clamped to {lo}:{hi}");
    }
    (lo, hi)
}

fn sweep(cfg: &RunConfig, out: &Output) -> Result<()> {
    let curve = load_curve(cfg)?;
    let (lo, hi) = sweep_range(cfg);
    let diagram = sweep_spectrum(&curve, lo, hi, cfg.steps, cfg.grid_n)?;
    let empty = (0..diagram.theta_grid.len()).filter(|&i| diagram.samples_at(i).is_empty()).count();
    println!("{} branches over {} steps, {empty} empty steps", diagram.branches.len(), diagram.theta_grid.len());
    out.csv("spectrum.csv", |buf| diagram.write_csv(buf))?;
    out.json("spectrum.json", &diagram)?;
    if out.wants(Emit::Svg) {
        out.svg("spectrum.svg", &spectrum_svg(&diagram, None)?)?;
    }
    if !diagram.cross_check_passed() {
        return Err(invalid("independent re-solves disagree with the swept branches"));
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectralRun<'a> {
    function: &'a peglab_core::spectral::SpectralFunction,
    interval: Option<peglab_core::spectral::InscriptionInterval>,
}

fn spectral(cfg: &RunConfig, out: &Output) -> Result<()> {
    let curve = load_curve(cfg)?;
    let (lo, hi) = sweep_range(cfg);
    let diagram = sweep_spectrum(&curve, lo, hi, cfg.steps, cfg.grid_n)?;
    let f = match select_spectral_function(&diagram) {
        Ok(f) => f,
        Err(e @ SpectralError::NoAdmissiblePath { .. }) => return Err(invalid(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let v = &f.validation;
    println!(
        "ℓ̂: penalty {:.1e}, max decrease {:.1e}, max slope {:.6} (bound {:.6}), range [{:.6}, {:.6}]",
        f.penalty, v.max_decrease, v.max_slope, v.lipschitz_bound, v.min_value, v.max_value
    );
    let interval = inscription_interval(&f, cfg.epsilon).ok();
    if let Some(i) = &interval {
        println!("ε = {}: θ-rectangles inscribed for θ ∈ [{:.6}, {:.6}], length {:.6} (bound {:.6})", i.epsilon, i.a, i.b, i.length, i.guaranteed);
    }
    out.csv("spectral.csv", |buf| f.write_csv(buf))?;
    out.json("spectral.json", &SpectralRun { function: &f, interval })?;
    if out.wants(Emit::Svg) {
        out.svg("spectral.svg", &spectrum_svg(&diagram, Some(&f))?)?;
    }
    if !v.passed() {
        return Err(invalid("selected function violates the monotone, Lipschitz or range constraints"));
    }
    Ok(())
}

fn approx(cfg: &RunConfig, out: &Output) -> Result<()> {
    let polygon = load_polygon(cfg)?;
    let curve = smooth_approximate(&polygon, cfg.modes, cfg.smoothing)?;
    println!(
        "{} modes, area {:.12} (polygon {:.12}), length {:.9}",
        curve.modes().len(),
        curve.enclosed_area(),
        polygon.area(),
        curve.curve_length()
    );
    out.text(Emit::Json, "approx.json", &curve.to_json())?;
    out.svg("approx.svg", &approximation_svg(&polygon, std::slice::from_ref(&curve), &[None]))
}

fn shrinkout(cfg: &RunConfig, out: &Output) -> Result<()> {
    let polygon = load_polygon(cfg)?;
    let theta = clamped(cfg.theta);
    let run = approximate_and_track(&polygon, theta, cfg.levels, cfg.epsilon)?;
    for l in &run.levels {
        let d = l.tracked.as_ref().map_or("none".to_string(), |t| format!("{:.9}", t.diameter));
        println!("level {}: {} modes, {} of {} rectangles kept, widest diameter {d}", l.level, l.mode_count, l.filtered, l.found);
    }
    out.csv("shrinkout.csv", |buf| run.write_csv(buf))?;
    out.text(Emit::Json, "shrinkout.json", &(run.report_json() + "\n"))?;
    let tracked: Vec<_> = run.levels.iter().map(|l| l.tracked.as_ref().map(|t| t.vertices)).collect();
    out.svg("shrinkout.svg", &approximation_svg(&polygon, &run.approximants, &tracked))?;
    if run.min_diameter.is_none() {
        return Err(invalid("a level has no rectangle with action in (ε, Area − ε)"));
    }
    if !run.cauchy {
        return Err(invalid("tracked rectangles are not Cauchy across levels"));
    }
    Ok(())
}

fn verify() -> Result<()> {
    let reports = peglab_verify::criteria::run_all();
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        writeln!(stdout, "{r}")?;
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(stdout, "{passed} of {} criteria passed", reports.len())?;
    if passed != reports.len() {
        return Err(invalid(format!("{} criteria failed", reports.len() - passed)));
    }
    Ok(())
}
