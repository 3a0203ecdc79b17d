//! Weighted Hardy operators on `(0, ∞)`, the supremal operator, the
//! constants `B` of the Hardy inequalities on monotone functions, and the
//! Zygmund-type integral conditions on `(φ₁, φ₂, ω)`.
//!
//! `(0, ∞)` is sampled on a [`RadialGrid`]. Integrals use the trapezoid
//! rule in `ln s` over the nodes and a power law fitted to the last two
//! nodes beyond them. A tail exponent `≥ −1` means divergence and yields
//! `f64::INFINITY`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::exponent::ExponentField;
use crate::field::ScalarField;
use crate::grid::{Grid, Point};
use crate::lebesgue::sample_norm;
use crate::morrey::PhiFunction;

/// Tail exponents above this count as non-integrable.
const DIVERGENCE_EXPONENT: f64 = -1.0 - 1e-6;

/// A function of `r > 0`.
#[derive(Clone)]
pub struct RadialFunction(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialFunction")
    }
}

impl RadialFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialFunction(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        RadialFunction::new(move |_| c)
    }

    /// `c·r^a`.
    pub fn power(c: f64, a: f64) -> Self {
        RadialFunction::new(move |r| c * r.powf(a))
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Power law through the last two nodes, integrated to infinity.
    #[default]
    PowerLaw,
    /// Integrals stop at the last node.
    Truncate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    tail: Tail,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>, tail: Tail) -> Result<Self> {
        if nodes.len() < 2 {
            bail!(Argument, "a radial grid needs at least two nodes");
        }
        if !(nodes[0] > 0.0)
            || nodes.windows(2).any(|w| !(w[1] > w[0]))
            || !nodes[nodes.len() - 1].is_finite()
        {
            bail!(
                Argument,
                "radial nodes must be positive, finite and strictly increasing"
            );
        }
        Ok(RadialGrid { nodes, tail })
    }

    /// `t_min·10^{k/per_decade}` up to `t_max`, with a power-law tail.
    pub fn geometric(t_min: f64, t_max: f64, per_decade: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) || per_decade == 0 {
            bail!(
                Argument,
                "need 0 < t_min < t_max and a positive node density"
            );
        }
        let k_max = (per_decade as f64 * (t_max / t_min).log10() + 1e-9).floor() as usize;
        let nodes = (0..=k_max)
            .map(|k| t_min * 10f64.powf(k as f64 / per_decade as f64))
            .collect();
        RadialGrid::new(nodes, Tail::PowerLaw)
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same tail rule, nodes replaced (and `extra` merged in).
    fn merged(&self, extra: &[f64]) -> Result<RadialGrid> {
        let mut nodes: Vec<f64> = self.nodes.iter().chain(extra).copied().collect();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        RadialGrid::new(nodes, self.tail)
    }
}

/// `∫_{t_from}^∞ (1 + ln(s/anchor))·G(s) ds` with `G` sampled at `nodes`;
/// without an anchor the log factor is dropped.
pub fn integrate_radial(
    nodes: &[f64],
    values: &[f64],
    from: usize,
    anchor: Option<f64>,
    tail: Tail,
) -> Result<f64> {
    if nodes.len() != values.len() {
        bail!(
            Argument,
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        );
    }
    if from >= nodes.len() {
        bail!(Argument, "start index {from} beyond the grid");
    }
    if let Some(v) = values[from..].iter().find(|v| v.is_nan()) {
        bail!(Numeric, "integrand value {v}");
    }
    if values[from..].iter().any(|v| v.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    let lf = |s: f64| anchor.map_or(1.0, |t| 1.0 + (s / t).ln());
    let mut sum = 0.0;
    for i in from..nodes.len() - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let du = (b / a).ln();
        sum += 0.5 * du * (values[i] * a * lf(a) + values[i + 1] * b * lf(b));
    }
    if tail == Tail::Truncate {
        return Ok(sum);
    }
    let k = nodes.len() - 1;
    Ok(sum
        + power_tail(
            nodes[k - 1],
            values[k - 1],
            nodes[k],
            values[k],
            nodes[k],
            anchor,
        )?)
}

/// `∫_a^∞ (1 + ln(s/anchor))·G(s) ds` for the power law `G` through
/// `(t0, g0)` and `(t1, g1)`, with `a ≥ t1`.
fn power_tail(t0: f64, g0: f64, t1: f64, g1: f64, a: f64, anchor: Option<f64>) -> Result<f64> {
    if g1 == 0.0 {
        return Ok(0.0);
    }
    if g0 == 0.0 || g0.signum() != g1.signum() {
        bail!(
            Numeric,
            "integrand changes sign at the last nodes; no power-law tail"
        );
    }
    let e = (g1 / g0).ln() / (t1 / t0).ln();
    if e >= DIVERGENCE_EXPONENT {
        return Ok(g1.signum() * f64::INFINITY);
    }
    let m = -e - 1.0;
    let ga = g1 * (a / t1).powf(e);
    Ok(match anchor {
        None => ga * a / m,
        Some(t) => ga * a * ((1.0 + (a / t).ln()) / m + 1.0 / (m * m)),
    })
}

/// `H_w g(t) = ∫_t^∞ g w ds`, or `H*_w g(t) = ∫_t^∞ (1 + ln(s/t)) g w ds`
/// with `log_factor`.
pub fn hardy(
    g: &RadialFunction,
    w: &RadialFunction,
    t: f64,
    log_factor: bool,
    rg: &RadialGrid,
) -> Result<f64> {
    if !(t > 0.0) {
        bail!(Argument, "t must be positive, got {t}");
    }
    let nodes = rg.nodes();
    if t >= nodes[nodes.len() - 2] {
        bail!(
            Argument,
            "t = {t} leaves fewer than two grid nodes above it"
        );
    }
    let mut local = vec![t];
    local.extend(nodes.iter().copied().filter(|&s| s > t));
    let values: Vec<f64> = local.iter().map(|&s| g.eval(s) * w.eval(s)).collect();
    integrate_radial(&local, &values, 0, log_factor.then_some(t), rg.tail())
}

/// `H_w g` (or `H*_w g`) at every node where it is defined.
pub fn hardy_profile(
    g: &RadialFunction,
    w: &RadialFunction,
    log_factor: bool,
    rg: &RadialGrid,
) -> Result<Vec<(f64, f64)>> {
    let nodes = rg.nodes();
    let values: Vec<f64> = nodes.iter().map(|&s| g.eval(s) * w.eval(s)).collect();
    (0..nodes.len() - 1)
        .map(|i| {
            Ok((
                nodes[i],
                integrate_radial(nodes, &values, i, log_factor.then_some(nodes[i]), rg.tail())?,
            ))
        })
        .collect()
}

/// `S̄_u g(t) = sup_{0<s≤t} u(s)g(s)` over the nodes below `t` and `t` itself.
pub fn supremal(u: &RadialFunction, g: &RadialFunction, t: f64, rg: &RadialGrid) -> Result<f64> {
    if !(t > 0.0) {
        bail!(Argument, "t must be positive, got {t}");
    }
    let below: Vec<f64> = rg.nodes().iter().copied().filter(|&s| s <= t).collect();
    if below.is_empty() {
        bail!(Argument, "no grid node lies below t = {t}");
    }
    Ok(below
        .iter()
        .chain(std::iter::once(&t))
        .map(|&s| u.eval(s) * g.eval(s))
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `f64::INFINITY` when the condition diverges.
    #[serde(serialize_with = "crate::serde_ext::f64")]
    pub constant: f64,
    #[serde(serialize_with = "crate::serde_ext::f64")]
    pub argmax: f64,
    /// `(t, value)` pairs; `constant` is their sup.
    #[serde(serialize_with = "crate::serde_ext::pairs")]
    pub profile: Vec<(f64, f64)>,
    /// Which exponents appear in numerator/denominator norms, e.g. `"p/q"`.
    pub norms: &'static str,
}

impl ConditionReport {
    fn from_profile(profile: Vec<(f64, f64)>, norms: &'static str) -> Result<Self> {
        let mut best: Option<(f64, f64)> = None;
        for &(t, v) in &profile {
            if v.is_nan() {
                bail!(Numeric, "condition value NaN at t = {t}");
            }
            if best.map_or(true, |b| v > b.1) {
                best = Some((t, v));
            }
        }
        let Some((argmax, constant)) = best else {
            bail!(Argument, "condition has no evaluation points");
        };
        Ok(ConditionReport {
            constant,
            argmax,
            profile,
            norms,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite()
    }
}

fn running(values: &[f64], from_right: bool, pick: fn(f64, f64) -> f64) -> Vec<f64> {
    let mut out = values.to_vec();
    if from_right {
        for i in (0..out.len().saturating_sub(1)).rev() {
            out[i] = pick(out[i], out[i + 1]);
        }
    } else {
        for i in 1..out.len() {
            out[i] = pick(out[i], out[i - 1]);
        }
    }
    out
}

/// `B = sup_t v₂(t) ∫_t^∞ w(s) / V₁(s) ds`, where `V₁(s) = sup_{τ>s} v₁(τ)`;
/// with `log_factor`, `(1 + ln(s/t))` is inserted and `V₁(s) = sup_{τ<s} v₁(τ)`.
pub fn condition_b(
    v1: &RadialFunction,
    v2: &RadialFunction,
    w: &RadialFunction,
    log_factor: bool,
    rg: &RadialGrid,
) -> Result<ConditionReport> {
    let nodes = rg.nodes();
    let raw: Vec<f64> = nodes.iter().map(|&t| v1.eval(t)).collect();
    if let Some(v) = raw.iter().find(|v| !v.is_finite() || **v < 0.0) {
        bail!(
            Precondition,
            "v₁ must be non-negative and bounded on the grid, found {v}"
        );
    }
    let sup1 = running(&raw, !log_factor, f64::max);
    let integrand: Vec<f64> = nodes
        .iter()
        .zip(&sup1)
        .map(|(&s, &v)| {
            if v > 0.0 {
                w.eval(s) / v
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let profile = (0..nodes.len() - 1)
        .into_par_iter()
        .map(|i| {
            let t = nodes[i];
            let i_t = integrate_radial(nodes, &integrand, i, log_factor.then_some(t), rg.tail())?;
            Ok((t, v2.eval(t) * i_t))
        })
        .collect::<Result<Vec<_>>>()?;
    ConditionReport::from_profile(profile, "")
}

/// `sup_t v₂(t) sup_{s≤t} u(s) / ‖v₁‖_{L∞(0,s)}`.
pub fn supremal_condition(
    u: &RadialFunction,
    v1: &RadialFunction,
    v2: &RadialFunction,
    rg: &RadialGrid,
) -> Result<ConditionReport> {
    let nodes = rg.nodes();
    let raw: Vec<f64> = nodes.iter().map(|&t| v1.eval(t)).collect();
    let sup1 = running(&raw, false, f64::max);
    if let Some(i) = sup1.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        bail!(
            Precondition,
            "‖v₁‖_{{L∞(0,t)}} = {} at t = {} must lie in (0, ∞)",
            sup1[i],
            nodes[i]
        );
    }
    let ratio: Vec<f64> = nodes
        .iter()
        .zip(&sup1)
        .map(|(&s, &v)| u.eval(s) / v)
        .collect();
    let inner = running(&ratio, false, f64::max);
    let profile = nodes
        .iter()
        .zip(&inner)
        .map(|(&t, &s)| (t, v2.eval(t) * s))
        .collect();
    ConditionReport::from_profile(profile, "")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZygmundKind {
    #[serde(rename = "qhs1sh")]
    Qhs1sh,
    #[serde(rename = "qhs1shk")]
    Qhs1shk,
    #[serde(rename = "H1v")]
    H1v,
    #[serde(rename = "H1vk")]
    H1vk,
    #[serde(rename = "rv_prime")]
    RvPrime,
    #[serde(rename = "rv")]
    Rv,
    #[serde(rename = "rv4")]
    Rv4,
    #[serde(rename = "rv5")]
    Rv5,
}

impl ZygmundKind {
    pub const ALL: [ZygmundKind; 8] = [
        ZygmundKind::Qhs1sh,
        ZygmundKind::Qhs1shk,
        ZygmundKind::H1v,
        ZygmundKind::H1vk,
        ZygmundKind::RvPrime,
        ZygmundKind::Rv,
        ZygmundKind::Rv4,
        ZygmundKind::Rv5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ZygmundKind::Qhs1sh => "qhs1sh",
            ZygmundKind::Qhs1shk => "qhs1shk",
            ZygmundKind::H1v => "H1v",
            ZygmundKind::H1vk => "H1vk",
            ZygmundKind::RvPrime => "rv_prime",
            ZygmundKind::Rv => "rv",
            ZygmundKind::Rv4 => "rv4",
            ZygmundKind::Rv5 => "rv5",
        }
    }

    /// Exponents of the numerator and denominator weight norms.
    pub fn norms(self) -> &'static str {
        match self {
            ZygmundKind::Qhs1sh | ZygmundKind::Qhs1shk => "p/p",
            ZygmundKind::H1v | ZygmundKind::H1vk => "p/q",
            _ => "q/q",
        }
    }

    fn log_factor(self) -> bool {
        matches!(
            self,
            ZygmundKind::Qhs1shk | ZygmundKind::H1vk | ZygmundKind::Rv4 | ZygmundKind::Rv5
        )
    }

    /// Evaluated at a list of lower limits `γ` instead of against `φ₂`.
    pub fn uses_gamma(self) -> bool {
        matches!(self, ZygmundKind::RvPrime | ZygmundKind::Rv4)
    }

    fn needs_q(self) -> bool {
        !matches!(self, ZygmundKind::Qhs1sh | ZygmundKind::Qhs1shk)
    }
}

impl FromStr for ZygmundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ZygmundKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Argument(format!("unknown condition kind {s:?}")))
    }
}

/// Default lower limits for the "for every γ" conditions.
pub const DEFAULT_GAMMAS: [f64; 3] = [0.1, 1.0, 10.0];

/// Inputs shared by all Zygmund-type conditions at one point `x`.
#[derive(Clone, Debug)]
pub struct ZygmundData<'a> {
    pub phi1: &'a PhiFunction,
    pub phi2: &'a PhiFunction,
    pub p: &'a ExponentField,
    /// Required by every kind whose display has an `L^{q(·)}` norm.
    pub q: Option<&'a ExponentField>,
    pub omega: &'a ScalarField,
    pub grid: &'a Grid,
    pub x: Point,
}

/// Weight norms `‖ωχ_{B̃(x,r)}‖` at every node, `None` where `B̃` is empty.
fn weight_norms(
    data: &ZygmundData,
    exps: &ExponentField,
    nodes: &[f64],
) -> Result<Vec<Option<f64>>> {
    let grid = data.grid;
    let (wv, pv) = (data.omega.values(), exps.values());
    nodes
        .par_iter()
        .map(|&r| {
            let cells = grid.spans_region(&grid.ball_spans(data.x, r));
            if cells.is_empty() {
                return Ok(None);
            }
            Ok(Some(sample_norm(
                cells.cells().iter().map(|&c| (wv[c], pv[c])),
                grid.cell_measure(),
            )?))
        })
        .collect()
}

/// Constant of the named condition at `x`. For the `φ₂` kinds this is
/// `sup_t (left side at t)/φ₂(x,t)`; for `rv_prime` and `rv4` the profile
/// holds `C_γ` per `γ` and the constant is the largest.
pub fn zygmund_condition(
    kind: ZygmundKind,
    data: &ZygmundData,
    rg: &RadialGrid,
    gammas: &[f64],
) -> Result<ConditionReport> {
    data.p.check_bounds()?;
    data.omega.ensure_positive(data.grid, "weight")?;
    data.grid.member_cell(data.x)?;
    let q = match (kind.needs_q(), data.q) {
        (true, Some(q)) => {
            q.check_bounds()?;
            Some(q)
        }
        (true, None) => bail!(Argument, "condition {} needs the exponent q", kind.label()),
        (false, _) => None,
    };
    if kind.uses_gamma() && (gammas.is_empty() || gammas.iter().any(|g| !(*g > 0.0))) {
        bail!(
            Argument,
            "condition {} needs positive γ values",
            kind.label()
        );
    }
    // γ past the last node is integrated on the extrapolated tail alone
    let t_last = rg.nodes()[rg.len() - 1];
    let inner: Vec<f64> = gammas.iter().copied().filter(|&g| g <= t_last).collect();
    let rg = if kind.uses_gamma() {
        rg.merged(&inner)?
    } else {
        rg.clone()
    };
    let all_nodes = rg.nodes();
    let (num_exp, den_exp) = match kind.norms() {
        "p/p" => (data.p, data.p),
        "p/q" => (data.p, q.unwrap_or(data.p)),
        _ => (q.unwrap_or(data.p), q.unwrap_or(data.p)),
    };
    let num_norms = weight_norms(data, num_exp, all_nodes)?;
    let den_norms = if std::ptr::eq(num_exp, den_exp) {
        num_norms.clone()
    } else {
        weight_norms(data, den_exp, all_nodes)?
    };
    let keep: Vec<usize> = (0..all_nodes.len())
        .filter(|&i| num_norms[i].is_some() && den_norms[i].is_some())
        .collect();
    if keep.len() < all_nodes.len() {
        warn!(
            "{} radial nodes with empty B̃ skipped",
            all_nodes.len() - keep.len()
        );
    }
    if keep.len() < 2 {
        bail!(Argument, "fewer than two radial nodes meet the open set");
    }
    let nodes: Vec<f64> = keep.iter().map(|&i| all_nodes[i]).collect();
    let num: Vec<f64> = keep.iter().map(|&i| num_norms[i].unwrap_or(0.0)).collect();
    let den: Vec<f64> = keep.iter().map(|&i| den_norms[i].unwrap_or(0.0)).collect();
    let phi1: Vec<f64> = nodes
        .iter()
        .map(|&r| data.phi1.checked(data.x, r))
        .collect::<Result<_>>()?;
    // ess inf over r ≥ s of φ₁(x,r)‖ω‖_{B̃(x,r)}, as a running minimum from the right
    let lead: Vec<f64> = phi1.iter().zip(&num).map(|(a, b)| a * b).collect();
    let essinf = running(&lead, true, f64::min);
    let ratio: Vec<f64> = essinf.iter().zip(&den).map(|(e, d)| e / d).collect();
    let log = kind.log_factor();

    let profile: Vec<(f64, f64)> = match kind {
        ZygmundKind::Qhs1sh | ZygmundKind::Qhs1shk => (0..nodes.len())
            .map(|i| {
                let r = nodes[i];
                let sup = (i..nodes.len())
                    .map(|j| {
                        if log {
                            (1.0 + (nodes[j] / r).ln()) * ratio[j]
                        } else {
                            ratio[j]
                        }
                    })
                    .fold(0.0, f64::max);
                Ok((r, sup / data.phi2.checked(data.x, r)?))
            })
            .collect::<Result<_>>()?,
        _ => {
            let integrand: Vec<f64> = ratio.iter().zip(&nodes).map(|(v, s)| v / s).collect();
            if kind.uses_gamma() {
                gammas
                    .iter()
                    .map(|&g| {
                        let k = nodes.len() - 1;
                        if g > nodes[k] {
                            let c = match rg.tail() {
                                Tail::Truncate => 0.0,
                                Tail::PowerLaw => power_tail(
                                    nodes[k - 1],
                                    integrand[k - 1],
                                    nodes[k],
                                    integrand[k],
                                    g,
                                    log.then_some(g),
                                )?,
                            };
                            return Ok((g, c));
                        }
                        let Some(i) = nodes.iter().position(|&s| s == g) else {
                            bail!(Argument, "γ = {g} has an empty ball B̃(x,γ)");
                        };
                        let c = if i < k {
                            integrate_radial(&nodes, &integrand, i, log.then_some(g), rg.tail())?
                        } else {
                            power_tail(
                                nodes[k - 1],
                                integrand[k - 1],
                                nodes[k],
                                integrand[k],
                                g,
                                log.then_some(g),
                            )?
                        };
                        Ok((g, c))
                    })
                    .collect::<Result<_>>()?
            } else {
                (0..nodes.len() - 1)
                    .into_par_iter()
                    .map(|i| {
                        let t = nodes[i];
                        let v =
                            integrate_radial(&nodes, &integrand, i, log.then_some(t), rg.tail())?;
                        Ok((t, v / data.phi2.checked(data.x, t)?))
                    })
                    .collect::<Result<_>>()?
            }
        }
    };
    ConditionReport::from_profile(profile, kind.norms())
}
