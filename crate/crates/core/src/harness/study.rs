//! Study pipelines: boundedness sups, local estimates, the commutator
//! necessity test, vanishing preservation, and the single-shot commands.
//!
//! Every study runs on a refinement ladder: the base grid, then `h / 2^k`
//! and the extent scaled by `2^k` for `k = 1..=refine`. The tracked value
//! (sup ratio or fitted constant) is reported per level with its drift
//! from the base.

use std::collections::BTreeMap;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;

use super::config::{
    FieldSpec, LadderStep, LocalEstimate, NormMode, OperatorKind, PhiSpec, StudyConfig,
};
use super::families::{generate, TestFunction};
use super::report::{Level, Row, Stability, StudyReport};
use crate::error::{Error, Result};
use crate::exponent::{conjugate, sobolev_exponent, ExponentField};
use crate::field::ScalarField;
use crate::grid::{Ball, Grid, Point, Region};
use crate::hardy::{
    integrate_radial, zygmund_condition, RadialGrid, Tail, ZygmundData, ZygmundKind,
};
use crate::lebesgue::{luxemburg_norm, norm_value};
use crate::morrey::{gw_morrey_norm, vanishing_modulus, MorreyNormalizer, PhiFunction};
use crate::operators::{
    bmo_norm, bmo_norms, frac_maximal, maximal, maximal_commutator, maximal_op_commutator,
    riesz_commutator, riesz_potential, sharp_maximal,
};
use crate::weights::{apq_constant, spaced_centers, BallFamily};

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Command-line overrides.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub refine: Option<usize>,
    pub seed: Option<u64>,
}

impl RunOptions {
    /// Config with the overrides applied, as echoed in the report.
    pub fn apply(&self, cfg: &StudyConfig) -> StudyConfig {
        let mut cfg = cfg.clone();
        if let Some(r) = self.refine {
            cfg.study.refine = r;
        }
        if let Some(s) = self.seed {
            cfg.functions.seed = s;
        }
        cfg
    }
}

/// Config errors for an operator without its `alpha` or `b`.
fn require_operator(cfg: &StudyConfig) -> Result<()> {
    if cfg.operator.needs_alpha() && cfg.alpha.is_none() {
        return Err(Error::Config(format!(
            "operator {:?} needs alpha",
            cfg.operator
        )));
    }
    if cfg.operator.needs_b() && cfg.b.is_none() {
        return Err(Error::Config(format!(
            "operator {:?} needs b",
            cfg.operator
        )));
    }
    Ok(())
}

/// Everything a study needs on one grid.
#[derive(Clone, Debug)]
pub struct Setup {
    pub label: String,
    pub grid: Grid,
    pub p: ExponentField,
    pub q: ExponentField,
    /// Zero for operators without an order.
    pub alpha: f64,
    pub omega: ScalarField,
    pub b: Option<ScalarField>,
    pub balls: BallFamily,
}

impl Setup {
    /// Validates exponents, weight and operator requirements; every failure
    /// here is a config error.
    pub fn new(cfg: &StudyConfig, refine: usize, stretch: f64, label: &str) -> Result<Setup> {
        let grid = cfg.grid.build(refine, stretch)?;
        let p = cfg.p.build(&grid).map_err(config_err)?;
        p.check_bounds().map_err(config_err)?;
        let q = match (&cfg.q, cfg.alpha) {
            (Some(q), _) => q.build(&grid).map_err(config_err)?,
            (None, Some(a)) => sobolev_exponent(&p, a, &grid).map_err(config_err)?,
            (None, None) => p.clone(),
        };
        q.check_bounds().map_err(config_err)?;
        let omega = cfg.weight.build(&grid)?;
        omega.ensure_positive(&grid, "weight").map_err(config_err)?;
        let b = match &cfg.b {
            Some(spec) => {
                let b = spec.build(&grid)?;
                b.ensure_finite(&grid).map_err(config_err)?;
                Some(b)
            }
            None => None,
        };
        let balls = ball_family(cfg, &grid)?;
        Ok(Setup {
            label: label.to_string(),
            grid,
            p,
            q,
            alpha: cfg.alpha.unwrap_or(0.0),
            omega,
            b,
            balls,
        })
    }

    fn b(&self) -> Result<&ScalarField> {
        self.b
            .as_ref()
            .ok_or_else(|| Error::Config("this study needs b".into()))
    }

    fn level(&self, value: Option<f64>) -> Level {
        Level {
            label: self.label.clone(),
            h: self.grid.spacing(),
            extent: self.grid.extent().iter().map(|&(a, b)| [a, b]).collect(),
            value,
        }
    }

    fn region(&self, x: Point, r: f64) -> Region {
        self.grid.spans_region(&self.grid.ball_spans(x, r))
    }

    /// `T f` for the configured operator.
    pub fn apply(&self, op: OperatorKind, f: &ScalarField) -> Result<ScalarField> {
        let g = &self.grid;
        Ok(match op {
            OperatorKind::Maximal => maximal(f, g, &self.balls)?.values,
            OperatorKind::FracMaximal => frac_maximal(f, self.alpha, g, &self.balls)?.values,
            OperatorKind::Riesz => riesz_potential(f, self.alpha, g)?.values,
            OperatorKind::MaximalCommutator => {
                maximal_commutator(self.b()?, f, g, &self.balls)?.values
            }
            OperatorKind::RieszCommutator => riesz_commutator(self.b()?, f, self.alpha, g)?.values,
            OperatorKind::MaximalOpCommutator => {
                maximal_op_commutator(self.b()?, f, g, &self.balls)?.values
            }
        })
    }
}

/// Radii and centers are fixed by the base extent so that every ladder
/// level sees the same family.
fn ball_family(cfg: &StudyConfig, grid: &Grid) -> Result<BallFamily> {
    let spec = &cfg.balls;
    let narrowest = cfg
        .grid
        .extent
        .iter()
        .map(|[lo, hi]| hi - lo)
        .fold(f64::INFINITY, f64::min);
    let r_max = spec.r_max.unwrap_or(narrowest / 4.0);
    let r_min = spec.r_min.unwrap_or(r_max / 1000.0);
    if !(r_min > 0.0 && r_max >= r_min) || spec.radii == 0 {
        return Err(Error::Config(format!(
            "bad radius range [{r_min}, {r_max}] with {} radii",
            spec.radii
        )));
    }
    let radii: Vec<f64> = if spec.radii == 1 {
        vec![r_max]
    } else {
        (0..spec.radii)
            .map(|k| r_min * (r_max / r_min).powf(k as f64 / (spec.radii - 1) as f64))
            .collect()
    };
    let window = cfg.ball_window();
    let lo: Vec<f64> = window.iter().map(|w| w[0]).collect();
    let hi: Vec<f64> = window.iter().map(|w| w[1]).collect();
    let centers = spaced_centers(grid, spec.centers, &lo, &hi).map_err(config_err)?;
    BallFamily::new(grid, centers, radii).map_err(config_err)
}

/// `(label, refine factor, extent stretch)` per ladder level, base first.
pub fn ladder(cfg: &StudyConfig) -> Vec<(String, usize, f64)> {
    let mut out = vec![("base".to_string(), 1, 1.0)];
    for k in 1..=cfg.study.refine {
        let f = 1usize << k;
        for step in &cfg.study.ladder {
            out.push(match step {
                LadderStep::HalveH => (format!("h/{f}"), f, 1.0),
                LadderStep::DoubleExtent => (format!("extent x{f}"), 1, f as f64),
            });
        }
    }
    out
}

fn point_from(cfg: &StudyConfig, coords: &[f64]) -> Result<Point> {
    if coords.len() != cfg.grid.dim() {
        return Err(Error::Config(format!(
            "point {coords:?} has the wrong dimension"
        )));
    }
    Point::from_slice(coords).map_err(config_err)
}

fn eval_points(cfg: &StudyConfig) -> Result<Vec<Point>> {
    if cfg.study.points.is_empty() {
        Ok(vec![cfg.midpoint()])
    } else {
        cfg.study
            .points
            .iter()
            .map(|c| point_from(cfg, c))
            .collect()
    }
}

/// Distance from `x` to the nearest edge of the grid extent.
fn edge_distance(grid: &Grid, x: Point) -> f64 {
    grid.extent()
        .iter()
        .enumerate()
        .map(|(a, &(lo, hi))| (x.0[a] - lo).min(hi - x.0[a]))
        .fold(f64::INFINITY, f64::min)
}

fn radial_grid(
    cfg: &StudyConfig,
    grid: &Grid,
    x: Point,
    t_min: f64,
    extra: &[f64],
) -> Result<RadialGrid> {
    let t_max = cfg.radial.t_max.unwrap_or_else(|| edge_distance(grid, x));
    let rg = RadialGrid::geometric(t_min, t_max, cfg.radial.per_decade).map_err(config_err)?;
    let mut nodes = rg.nodes().to_vec();
    nodes.extend(extra.iter().copied().filter(|&t| t < t_max));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    RadialGrid::new(nodes, cfg.radial.tail).map_err(config_err)
}

fn zygmund<'a>(
    s: &'a Setup,
    phi1: &'a PhiFunction,
    phi2: &'a PhiFunction,
    x: Point,
) -> ZygmundData<'a> {
    ZygmundData {
        phi1,
        phi2,
        p: &s.p,
        q: Some(&s.q),
        omega: &s.omega,
        grid: &s.grid,
        x,
    }
}

/// `φ₂(t)` := left side of `kind` built from `φ₁` at `x`, log-log
/// interpolated between radial nodes and extended by the end slopes.
fn matched_phi(
    kind: ZygmundKind,
    phi1: &PhiFunction,
    s: &Setup,
    x: Point,
    rg: &RadialGrid,
) -> Result<PhiFunction> {
    let one = PhiFunction::constant(1.0);
    let rep = zygmund_condition(kind, &zygmund(s, phi1, &one, x), rg, &[])?;
    let pts: Vec<(f64, f64)> = rep.profile.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    if pts.len() < 2 || pts.iter().any(|&(_, v)| !v.is_finite()) {
        return Err(Error::Config(format!(
            "{} diverges for phi1; no matched phi2",
            kind.label()
        )));
    }
    Ok(PhiFunction::radial(move |r| {
        let u = r.ln();
        let i = pts
            .partition_point(|&(t, _)| t <= u)
            .clamp(1, pts.len() - 1);
        let ((t0, v0), (t1, v1)) = (pts[i - 1], pts[i]);
        (v0 + (v1 - v0) * (u - t0) / (t1 - t0)).exp()
    }))
}

/// `(φ₁, φ₂)`, with a matched `φ₂` resolved on the base grid.
fn phis(cfg: &StudyConfig, s: &Setup) -> Result<Option<(PhiFunction, PhiFunction)>> {
    let (Some(p1), Some(p2)) = (&cfg.phi1, &cfg.phi2) else {
        return Ok(None);
    };
    let phi1 = p1.build(&s.p, &s.grid).map_err(config_err)?;
    let phi2 = match p2 {
        PhiSpec::Matched { condition } => {
            let x = eval_points(cfg)?[0];
            let rg = radial_grid(cfg, &s.grid, x, cfg.radial.t_min, &[])?;
            matched_phi(*condition, &phi1, s, x, &rg)?
        }
        other => other.build(&s.q, &s.grid).map_err(config_err)?,
    };
    Ok(Some((phi1, phi2)))
}

fn require_phis(cfg: &StudyConfig, s: &Setup) -> Result<(PhiFunction, PhiFunction)> {
    phis(cfg, s)?.ok_or_else(|| Error::Config("this study needs phi1 and phi2".into()))
}

/// Weight-class constant and, with `φ`s, the operator's integral condition.
fn condition_constants(
    cfg: &StudyConfig,
    s: &Setup,
    phis: Option<&(PhiFunction, PhiFunction)>,
    kinds: &[ZygmundKind],
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    match apq_constant(&s.omega, &s.p, &s.q, &s.grid, &s.balls) {
        Ok(r) => {
            out.insert("A_pq".to_string(), r.constant);
        }
        Err(e) => warn!("weight constant unavailable: {e}"),
    }
    if let Some((phi1, phi2)) = phis {
        let x = eval_points(cfg)?[0];
        let rg = radial_grid(cfg, &s.grid, x, cfg.radial.t_min, &[])?;
        for &kind in kinds {
            let rep = zygmund_condition(kind, &zygmund(s, phi1, phi2, x), &rg, &cfg.radial.gammas)?;
            if kind.uses_gamma() {
                for &(g, c) in &rep.profile {
                    out.insert(format!("{}(gamma={g})", kind.label()), c);
                }
            } else {
                out.insert(kind.label().to_string(), rep.constant);
            }
            if !rep.is_finite() {
                warn!(
                    "condition {} is infinite; boundedness is not expected",
                    kind.label()
                );
            }
        }
    }
    Ok(out)
}

/// Ratio with the 0/0 guard: `None` when both vanish, an error when only
/// the denominator does.
fn guarded_ratio(num: f64, den: f64, what: &str) -> Result<Option<f64>> {
    if den > 0.0 {
        Ok(Some(num / den))
    } else if num == 0.0 {
        Ok(None)
    } else {
        Err(Error::Numeric(format!(
            "{what}: denominator 0 with numerator {num}"
        )))
    }
}

fn max_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values
        .flatten()
        .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

/// Runs `level` on every ladder rung and assembles the common report parts.
fn run_ladder(
    cfg: &StudyConfig,
    base: Setup,
    mut level: impl FnMut(&Setup) -> Result<(Option<f64>, Vec<Row>)>,
) -> Result<(Vec<Row>, Stability)> {
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for (i, (label, refine, stretch)) in ladder(cfg).into_iter().enumerate() {
        let setup = if i == 0 {
            base.clone()
        } else {
            Setup::new(cfg, refine, stretch, &label)?
        };
        info!("level {label}: {} cells", setup.grid.members().len());
        let (value, r) = level(&setup)?;
        if i == 0 {
            rows = r;
        }
        levels.push(setup.level(value));
    }
    Ok((rows, Stability::from_levels(levels)))
}

fn finish(cfg: &StudyConfig, started: Instant, mut report: StudyReport) -> Result<StudyReport> {
    report.config_echo = serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?;
    report.runtime_s = started.elapsed().as_secs_f64();
    Ok(report)
}

fn drift_check(cfg: &StudyConfig, stab: &Stability, what: &str, failures: &mut Vec<String>) {
    if let Some(d) = stab.drift_pct {
        if !(d <= cfg.study.max_drift_pct) {
            failures.push(format!(
                "{what} drifted {d:.2}% across the ladder (limit {}%)",
                cfg.study.max_drift_pct
            ));
        }
    }
}

/// A study input: the configured `f` or one member of the seeded family.
enum Input<'a> {
    Given(&'a FieldSpec),
    Family(TestFunction),
}

impl Input<'_> {
    fn name(&self) -> &'static str {
        match self {
            Input::Given(_) => "f",
            Input::Family(f) => f.name(),
        }
    }

    fn sample(&self, grid: &Grid) -> Result<ScalarField> {
        match self {
            Input::Given(spec) => spec.build(grid),
            Input::Family(f) => Ok(f.sample(grid)),
        }
    }
}

/// The single `f` if configured, else the test-function family.
fn inputs<'a>(cfg: &'a StudyConfig, s: &Setup) -> Result<Vec<Input<'a>>> {
    if let Some(spec) = &cfg.f {
        return Ok(vec![Input::Given(spec)]);
    }
    let fams = generate(
        &cfg.functions,
        cfg.functions.seed,
        &cfg.function_window(),
        s.p.p_plus(),
    )?;
    Ok(fams.into_iter().map(Input::Family).collect())
}

/// Sup over test functions of `‖Tf‖_target / ‖f‖_source`.
pub fn run_boundedness_study(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    require_operator(cfg)?;
    let base = Setup::new(cfg, 1, 1.0, "base")?;
    let fams = inputs(cfg, &base)?;
    let phis = phis(cfg, &base)?;
    if cfg.study.mode == NormMode::Morrey && phis.is_none() {
        return Err(Error::Config("Morrey mode needs phi1 and phi2".into()));
    }
    let conditions = condition_constants(cfg, &base, phis.as_ref(), &[cfg.operator.condition()])?;
    let (rows, stability) = run_ladder(cfg, base, |s| {
        let norms = match (&phis, cfg.study.mode) {
            (Some((phi1, phi2)), NormMode::Morrey) => Some((
                MorreyNormalizer::new(&s.p, phi1, &s.grid, &s.balls, Some(&s.omega))?,
                MorreyNormalizer::new(&s.q, phi2, &s.grid, &s.balls, Some(&s.omega))?,
            )),
            _ => None,
        };
        let rows = fams
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let fv = f.sample(&s.grid)?;
                let tf = s.apply(cfg.operator, &fv)?;
                let (src, tgt) = match &norms {
                    Some((n1, n2)) => (n1.norm(&fv, &s.grid)?.value, n2.norm(&tf, &s.grid)?.value),
                    None => (
                        norm_value(&fv, &s.p, &s.grid, Some(&s.omega))?,
                        norm_value(&tf, &s.q, &s.grid, Some(&s.omega))?,
                    ),
                };
                let ratio = guarded_ratio(tgt, src, "zero source norm")?;
                Ok(Row::new()
                    .with("function", i)
                    .with("family", f.name())
                    .with("source_norm", src)
                    .with("target_norm", tgt)
                    .with("ratio", ratio))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((max_of(rows.iter().map(|r| r.num("ratio"))), rows))
    })?;
    let mut report = StudyReport {
        sup_ratio: stability.levels[0].value,
        results: rows,
        condition_constants: conditions,
        ..Default::default()
    };
    drift_check(cfg, &stability, "sup ratio", &mut report.failures);
    report.stability = stability;
    finish(cfg, started, report)
}

/// `∫_t^∞ (1 + ln(s/t))^log ‖fχ_{B̃(x,s)}‖_{p,ω} / ‖ωχ_{B̃(x,s)}‖_q ds/s` from
/// the node tables `num`, `den`, starting at node `from`.
fn local_integral(
    nodes: &[f64],
    num: &[f64],
    den: &[f64],
    from: usize,
    log: bool,
    tail: Tail,
) -> Result<f64> {
    let g: Vec<f64> = nodes
        .iter()
        .zip(num.iter().zip(den))
        .map(|(s, (n, d))| n / d / s)
        .collect();
    integrate_radial(nodes, &g, from, log.then_some(nodes[from]), tail)
}

fn local_norm_rows(
    cfg: &StudyConfig,
    s: &Setup,
    fams: &[Input],
    commutator: bool,
) -> Result<Vec<Row>> {
    let op = if commutator {
        OperatorKind::RieszCommutator
    } else {
        OperatorKind::Riesz
    };
    let bmo = if commutator {
        bmo_norm(s.b()?, &s.grid, &s.balls)?
    } else {
        1.0
    };
    let ts = &cfg.study.radii;
    let t_lo = ts.iter().copied().fold(f64::INFINITY, f64::min);
    if ts.is_empty() || !(t_lo > 0.0) {
        return Err(Error::Config("study.radii must be positive".into()));
    }
    let mut tables = Vec::new();
    for x in eval_points(cfg)? {
        s.grid.member_cell(x).map_err(config_err)?;
        let rg = radial_grid(cfg, &s.grid, x, t_lo, ts)?;
        let nodes = rg.nodes().to_vec();
        let den = nodes
            .par_iter()
            .map(|&r| Ok(luxemburg_norm(&s.omega, &s.q, &s.grid, &s.region(x, r), None)?.value))
            .collect::<Result<Vec<f64>>>()?;
        tables.push((x, rg, nodes, den));
    }
    let per_f = fams
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let fv = f.sample(&s.grid)?;
            let tf = s.apply(op, &fv)?;
            let mut rows = Vec::new();
            for (x, rg, nodes, den) in &tables {
                let num = nodes
                    .iter()
                    .map(|&r| {
                        Ok(
                            luxemburg_norm(&fv, &s.p, &s.grid, &s.region(*x, r), Some(&s.omega))?
                                .value,
                        )
                    })
                    .collect::<Result<Vec<f64>>>()?;
                for &t in ts {
                    let Some(k) = nodes.iter().position(|&v| v == t) else {
                        return Err(Error::Config(format!(
                            "t = {t} lies beyond the radial grid"
                        )));
                    };
                    let lhs =
                        luxemburg_norm(&tf, &s.q, &s.grid, &s.region(*x, t), Some(&s.omega))?.value;
                    let rhs =
                        bmo * den[k] * local_integral(nodes, &num, den, k, commutator, rg.tail())?;
                    let ratio = guarded_ratio(lhs, rhs, "local estimate violated")?;
                    rows.push(
                        Row::new()
                            .with("function", i)
                            .with("family", f.name())
                            .with("x", x.x())
                            .with("t", t)
                            .with("lhs", lhs)
                            .with("rhs", rhs)
                            .with("ratio", ratio),
                    );
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_f.into_iter().flatten().collect())
}

fn sharp_commutator_rows(cfg: &StudyConfig, s: &Setup, fams: &[Input]) -> Result<Vec<Row>> {
    let b = s.b()?;
    let (alpha, sx, n) = (s.alpha, cfg.study.s, s.grid.dim() as f64);
    if !(alpha > 0.0 && sx * alpha < n) {
        return Err(Error::Config(format!(
            "need 0 < s·α < n, got s = {sx}, α = {alpha}"
        )));
    }
    let bmo = bmo_norm(b, &s.grid, &s.balls)?;
    fams.iter()
        .enumerate()
        .map(|(i, f)| {
            let fv = f.sample(&s.grid)?;
            let lhs = sharp_maximal(
                &riesz_commutator(b, &fv, alpha, &s.grid)?.values,
                &s.grid,
                &s.balls,
            )?
            .values;
            let i_f = riesz_potential(&fv, alpha, &s.grid)?.values;
            let m1 = maximal(&i_f.map(|v| v.abs().powf(sx)), &s.grid, &s.balls)?.values;
            let m2 =
                frac_maximal(&fv.map(|v| v.abs().powf(sx)), sx * alpha, &s.grid, &s.balls)?.values;
            let mut best: Option<(f64, Point)> = None;
            for &c in s.grid.members() {
                let rhs = bmo * (m1.values()[c].powf(1.0 / sx) + m2.values()[c].powf(1.0 / sx));
                if let Some(r) =
                    guarded_ratio(lhs.values()[c], rhs, "sharp commutator bound violated")?
                {
                    if best.map_or(true, |b| r > b.0) {
                        best = Some((r, s.grid.center(c)));
                    }
                }
            }
            Ok(Row::new()
                .with("function", i)
                .with("family", f.name())
                .with("ratio", best.map(|b| b.0))
                .with("argmax_x", best.map(|b| b.1.x())))
        })
        .collect()
}

fn sharp_function_rows(s: &Setup, fams: &[Input]) -> Result<Vec<Row>> {
    fams.par_iter()
        .enumerate()
        .map(|(i, f)| {
            let fv = f.sample(&s.grid)?;
            let lhs = norm_value(&fv, &s.p, &s.grid, Some(&s.omega))?;
            let sharp = sharp_maximal(&fv, &s.grid, &s.balls)?.values;
            let rhs = norm_value(&sharp, &s.p, &s.grid, Some(&s.omega))?;
            Ok(Row::new()
                .with("function", i)
                .with("family", f.name())
                .with("lhs", lhs)
                .with("rhs", rhs)
                .with(
                    "ratio",
                    guarded_ratio(lhs, rhs, "sharp-function bound violated")?,
                ))
        })
        .collect()
}

/// Fitted constant `C = max LHS/RHS` of a local or pointwise estimate.
pub fn run_local_estimate_check(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    let estimate = cfg.study.estimate;
    if matches!(
        estimate,
        LocalEstimate::Riesz | LocalEstimate::Commutator | LocalEstimate::SharpCommutator
    ) && cfg.alpha.is_none()
    {
        return Err(Error::Config("this local estimate needs alpha".into()));
    }
    let base = Setup::new(cfg, 1, 1.0, "base")?;
    if matches!(
        estimate,
        LocalEstimate::Commutator | LocalEstimate::SharpCommutator
    ) {
        base.b()?;
    }
    let fams = inputs(cfg, &base)?;
    let conditions = condition_constants(cfg, &base, None, &[])?;
    let (rows, stability) = run_ladder(cfg, base, |s| {
        let rows = match estimate {
            LocalEstimate::Riesz => local_norm_rows(cfg, s, &fams, false)?,
            LocalEstimate::Commutator => local_norm_rows(cfg, s, &fams, true)?,
            LocalEstimate::SharpCommutator => sharp_commutator_rows(cfg, s, &fams)?,
            LocalEstimate::SharpFunction => sharp_function_rows(s, &fams)?,
        };
        Ok((max_of(rows.iter().map(|r| r.num("ratio"))), rows))
    })?;
    let mut report = StudyReport {
        fitted_c: stability.levels[0].value,
        results: rows,
        condition_constants: conditions,
        ..Default::default()
    };
    drift_check(cfg, &stability, "fitted constant", &mut report.failures);
    if report.fitted_c.is_some_and(|c| !c.is_finite()) {
        report.failures.push("fitted constant is infinite".into());
    }
    report.stability = stability;
    finish(cfg, started, report)
}

/// Per ball, mean oscillation of `b` against the bound
/// `t^{−n−α}‖[b,I^α]χ_B̃‖_{q,ω}‖χ_B̃‖_{q',ω⁻¹}`; reports the sup of their ratio.
pub fn run_bmo_necessity_test(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    require_operator(cfg)?;
    if cfg.alpha.is_none() {
        return Err(Error::Config("the necessity test needs alpha".into()));
    }
    let base = Setup::new(cfg, 1, 1.0, "base")?;
    base.b()?;
    let conditions = condition_constants(cfg, &base, None, &[])?;
    let (rows, stability) = run_ladder(cfg, base, |s| {
        let b = s.b()?;
        let n = s.grid.dim() as i32;
        let q_dual = conjugate(&s.q, &s.grid)?;
        let inv = s.omega.reciprocal(&s.grid)?;
        let balls: Vec<Ball> = s.balls.balls().collect();
        let rows = balls
            .iter()
            .map(|ball| {
                let region = s.region(ball.center, ball.radius);
                let single = BallFamily::new(&s.grid, vec![ball.center], vec![ball.radius])?;
                let osc = bmo_norm(b, &s.grid, &single)?;
                let mut chi = vec![0.0; s.grid.len()];
                for &c in region.cells() {
                    chi[c] = 1.0;
                }
                let chi = ScalarField::from_values(&s.grid, chi)?;
                let comm = riesz_commutator(b, &chi, s.alpha, &s.grid)?.values;
                let bound = ball.radius.powf(-(n as f64) - s.alpha)
                    * norm_value(&comm, &s.q, &s.grid, Some(&s.omega))?
                    * norm_value(&chi, &q_dual, &s.grid, Some(&inv))?;
                Ok(Row::new()
                    .with("x", ball.center.x())
                    .with("t", ball.radius)
                    .with("oscillation", osc)
                    .with("bound", bound)
                    .with(
                        "ratio",
                        guarded_ratio(osc, bound, "oscillation without commutator mass")?,
                    ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((max_of(rows.iter().map(|r| r.num("ratio"))), rows))
    })?;
    let mut report = StudyReport {
        sup_ratio: stability.levels[0].value,
        results: rows,
        condition_constants: conditions,
        ..Default::default()
    };
    drift_check(
        cfg,
        &stability,
        "oscillation/bound ratio",
        &mut report.failures,
    );
    report.stability = stability;
    finish(cfg, started, report)
}

fn vanishing_radii(cfg: &StudyConfig) -> Result<Vec<f64>> {
    match &cfg.study.vanishing_radii {
        Some(r) if r.len() >= 2 && r.windows(2).all(|w| w[1] < w[0]) && r[r.len() - 1] > 0.0 => {
            Ok(r.clone())
        }
        Some(_) => Err(Error::Config(
            "vanishing_radii must be positive and strictly decreasing".into(),
        )),
        None => Ok((0..=8).map(|k| 10f64.powf(-(k as f64) / 4.0)).collect()),
    }
}

/// First modulus over last; `None` when the modulus is identically zero.
fn decay(modulus: &[f64]) -> Option<f64> {
    let (first, last) = (modulus[0], modulus[modulus.len() - 1]);
    if first == 0.0 && last == 0.0 {
        None
    } else if last == 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(first / last)
    }
}

/// Whether the operator keeps vanishing moduli vanishing on the configured
/// functions (the single `f` if given, else the family).
pub fn run_vanishing_study(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    require_operator(cfg)?;
    if !matches!(
        cfg.operator,
        OperatorKind::Riesz | OperatorKind::RieszCommutator
    ) {
        return Err(Error::Config(
            "the vanishing study covers riesz and riesz_commutator".into(),
        ));
    }
    let base = Setup::new(cfg, 1, 1.0, "base")?;
    let (phi1, phi2) = require_phis(cfg, &base)?;
    let radii = vanishing_radii(cfg)?;
    let kinds = match cfg.operator {
        OperatorKind::RieszCommutator => [ZygmundKind::Rv4, ZygmundKind::Rv5],
        _ => [ZygmundKind::RvPrime, ZygmundKind::Rv],
    };
    let conditions = condition_constants(cfg, &base, Some(&(phi1.clone(), phi2.clone())), &kinds)?;
    let fams = inputs(cfg, &base)?;
    let factor = cfg.study.decay_factor;
    let mut failures = Vec::new();
    let (rows, stability) = run_ladder(cfg, base, |s| {
        let centers = s.balls.centers();
        let rows = fams
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let fv = f.sample(&s.grid)?;
                let src = vanishing_modulus(&fv, &s.p, &phi1, &s.omega, &s.grid, centers, &radii)?;
                let src_decay = decay(&src.modulus);
                let mut row = Row::new()
                    .with("function", i)
                    .with("family", f.name())
                    .with("source_decay", src_decay);
                let (verdict, tgt_decay, tail) = match src_decay {
                    None => ("zero", None, Some(0.0)),
                    Some(d) if d < factor => ("hypothesis unmet", None, None),
                    Some(_) => {
                        let tf = s.apply(cfg.operator, &fv)?;
                        let tgt = vanishing_modulus(
                            &tf, &s.q, &phi2, &s.omega, &s.grid, centers, &radii,
                        )?;
                        let d = decay(&tgt.modulus);
                        let tail = d.map_or(Some(0.0), |d| Some(1.0 / d));
                        (
                            if d.map_or(true, |d| d >= factor) {
                                "preserved"
                            } else {
                                "violated"
                            },
                            d,
                            tail,
                        )
                    }
                };
                row = row
                    .with("target_decay", tgt_decay)
                    .with("target_tail_ratio", tail)
                    .with("verdict", verdict);
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((
            max_of(rows.iter().map(|r| r.num("target_tail_ratio"))),
            rows,
        ))
    })?;
    for r in &rows {
        if let Some(super::report::Cell::Text(v)) = r.get("verdict") {
            if v == "violated" {
                failures.push(format!(
                    "function {:?}: target modulus decays less than {factor}x",
                    r.get("function")
                ));
            }
        }
    }
    let mut report = StudyReport {
        sup_ratio: stability.levels[0].value,
        results: rows,
        condition_constants: conditions,
        failures,
        ..Default::default()
    };
    report.stability = stability;
    finish(cfg, started, report)
}

fn single_f(cfg: &StudyConfig, s: &Setup) -> Result<ScalarField> {
    cfg.f
        .as_ref()
        .ok_or_else(|| Error::Config("this command needs f".into()))?
        .build(&s.grid)
}

/// `‖f‖_{L^{p(·)}_ω}` and, with `phi1`, the weighted Morrey norm.
pub fn run_norm(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    let s = Setup::new(cfg, 1, 1.0, "base")?;
    let f = single_f(cfg, &s)?;
    let n = luxemburg_norm(&f, &s.p, &s.grid, &s.grid.full_region(), Some(&s.omega))?;
    let mut rows = vec![Row::new()
        .with("quantity", "lebesgue")
        .with("value", n.value)
        .with("modular_at_value", n.modular_at_value)
        .with("iterations", n.bisection_iterations)];
    if let Some(spec) = &cfg.phi1 {
        let phi = spec.build(&s.p, &s.grid)?;
        let m = gw_morrey_norm(&f, &s.p, &phi, &s.grid, &s.balls, Some(&s.omega))?;
        rows.push(
            Row::new()
                .with("quantity", "morrey")
                .with("value", m.value)
                .with("argmax_x", m.argmax.center.x())
                .with("argmax_r", m.argmax.radius),
        );
    }
    finish(
        cfg,
        started,
        StudyReport {
            results: rows,
            ..Default::default()
        },
    )
}

/// `T f` at every member cell.
pub fn run_operator(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    require_operator(cfg)?;
    let s = Setup::new(cfg, 1, 1.0, "base")?;
    let f = single_f(cfg, &s)?;
    let tf = s.apply(cfg.operator, &f)?;
    let rows = s
        .grid
        .members()
        .iter()
        .map(|&c| {
            let x = s.grid.center(c);
            let row = Row::new().with("x", x.x());
            let row = if s.grid.dim() == 2 {
                row.with("y", x.y())
            } else {
                row
            };
            row.with("f", f.values()[c]).with("tf", tf.values()[c])
        })
        .collect();
    finish(
        cfg,
        started,
        StudyReport {
            results: rows,
            ..Default::default()
        },
    )
}

/// `A_{p,q}` constant of `ω` and of `ω⁻¹` for `(q', p')`.
pub fn run_weights(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    let s = Setup::new(cfg, 1, 1.0, "base")?;
    let direct = apq_constant(&s.omega, &s.p, &s.q, &s.grid, &s.balls)?;
    let dual = apq_constant(
        &s.omega.reciprocal(&s.grid)?,
        &conjugate(&s.q, &s.grid)?,
        &conjugate(&s.p, &s.grid)?,
        &s.grid,
        &s.balls,
    )?;
    let rows = direct
        .profile
        .iter()
        .zip(&dual.profile)
        .map(|(&(r, a), &(_, d))| Row::new().with("r", r).with("apq", a).with("apq_dual", d))
        .collect();
    let conditions = [
        ("A_pq".to_string(), direct.constant),
        ("A_pq_dual".to_string(), dual.constant),
    ]
    .into();
    finish(
        cfg,
        started,
        StudyReport {
            results: rows,
            condition_constants: conditions,
            ..Default::default()
        },
    )
}

/// `‖b‖_BMO`, `‖b‖_{BMO_{p(·),ω}}` and their ratio.
pub fn run_bmo(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    let s = Setup::new(cfg, 1, 1.0, "base")?;
    let r = bmo_norms(s.b()?, &s.p, &s.omega, &s.grid, &s.balls)?;
    let rows = vec![Row::new()
        .with("bmo", r.bmo_norm)
        .with("bmo_pw", r.bmo_pw_norm)
        .with("ratio", r.ratio)];
    let mut conditions: BTreeMap<String, f64> = [
        ("bmo".to_string(), r.bmo_norm),
        ("bmo_pw".to_string(), r.bmo_pw_norm),
    ]
    .into();
    if let Some(q) = r.ratio {
        conditions.insert("ratio".into(), q);
    }
    finish(
        cfg,
        started,
        StudyReport {
            results: rows,
            condition_constants: conditions,
            ..Default::default()
        },
    )
}

/// Integral conditions on `(φ₁, φ₂, ω)` at the first evaluation point.
pub fn run_condition(cfg: &StudyConfig, opts: RunOptions) -> Result<StudyReport> {
    let started = Instant::now();
    let cfg = &opts.apply(cfg);
    let s = Setup::new(cfg, 1, 1.0, "base")?;
    let (phi1, phi2) = require_phis(cfg, &s)?;
    let x = eval_points(cfg)?[0];
    let kinds: Vec<ZygmundKind> = cfg
        .condition
        .map_or_else(|| ZygmundKind::ALL.to_vec(), |k| vec![k]);
    let rg = radial_grid(cfg, &s.grid, x, cfg.radial.t_min, &[])?;
    let mut rows = Vec::new();
    let mut conditions = BTreeMap::new();
    for kind in kinds {
        let rep = zygmund_condition(kind, &zygmund(&s, &phi1, &phi2, x), &rg, &cfg.radial.gammas)?;
        rows.push(
            Row::new()
                .with("kind", kind.label())
                .with("constant", rep.constant)
                .with("argmax", rep.argmax)
                .with("norms", rep.norms),
        );
        conditions.insert(kind.label().to_string(), rep.constant);
    }
    finish(
        cfg,
        started,
        StudyReport {
            results: rows,
            condition_constants: conditions,
            ..Default::default()
        },
    )
}
