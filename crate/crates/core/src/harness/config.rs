//! TOML study configuration.
//!
//! Every field, exponent and φ is either one of a few closed-form families
//! or an `expr` string evaluated with `evalexpr` in the variables `x`, `y`
//! (and `r` for φ). Integer literals stay integers in `evalexpr`, so write
//! `0.5` rather than `1/2`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::field::ScalarField;
use crate::grid::{Grid, Point};
use crate::hardy::{Tail, ZygmundKind};
use crate::morrey::{phi_from_lambda, PhiFunction};

fn config_err(msg: impl fmt::Display) -> Error {
    Error::Config(msg.to_string())
}

/// A parsed `evalexpr` expression.
#[derive(Clone)]
pub struct Expr {
    source: String,
    tree: Arc<Node<DefaultNumericTypes>>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        let tree = evalexpr::build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| config_err(format!("expression {source:?}: {e}")))?;
        Ok(Expr {
            source: source.to_string(),
            tree: Arc::new(tree),
        })
    }

    pub fn eval(&self, vars: &[(&str, f64)]) -> Result<f64> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for &(name, v) in vars {
            ctx.set_value(name.to_string(), Value::Float(v))
                .map_err(config_err)?;
        }
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| config_err(format!("expression {:?}: {e}", self.source)))
    }

    fn at_point(&self, x: Point) -> Result<f64> {
        self.eval(&[("x", x.x()), ("y", x.y())])
    }
}

fn sampled(grid: &Grid, f: impl Fn(Point) -> Result<f64>) -> Result<Vec<f64>> {
    (0..grid.len())
        .map(|c| {
            if grid.is_member(c) {
                f(grid.center(c))
            } else {
                Ok(0.0)
            }
        })
        .collect()
}

fn one() -> f64 {
    1.0
}

/// `|x − c|` with a center given by 0, 1 or 2 coordinates (missing ones are 0).
fn dist_from(x: Point, center: &[f64]) -> f64 {
    let c = Point([
        center.first().copied().unwrap_or(0.0),
        center.get(1).copied().unwrap_or(0.0),
    ]);
    x.dist(&c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant {
        value: f64,
    },
    /// `scale·|x − center|^exponent`
    Power {
        exponent: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `amplitude·χ` of the box `lo < x < hi`.
    Indicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `sign(x₁)`, zero at the origin.
    Sign,
    /// `x₁`
    Identity,
    Expr {
        expr: String,
    },
}

impl FieldSpec {
    pub fn build(&self, grid: &Grid) -> Result<ScalarField> {
        let values = match self {
            FieldSpec::Constant { value } => sampled(grid, |_| Ok(*value))?,
            FieldSpec::Power {
                exponent,
                center,
                scale,
            } => sampled(grid, |x| Ok(scale * dist_from(x, center).powf(*exponent)))?,
            FieldSpec::Indicator { lo, hi, amplitude } => {
                if lo.len() != grid.dim() || hi.len() != grid.dim() {
                    return Err(config_err("indicator box needs one bound per axis"));
                }
                sampled(grid, |x| {
                    let inside = (0..grid.dim()).all(|a| x.0[a] > lo[a] && x.0[a] < hi[a]);
                    Ok(if inside { *amplitude } else { 0.0 })
                })?
            }
            FieldSpec::Sign => sampled(grid, |x| {
                Ok(if x.x() == 0.0 { 0.0 } else { x.x().signum() })
            })?,
            FieldSpec::Identity => sampled(grid, |x| Ok(x.x()))?,
            FieldSpec::Expr { expr } => {
                let e = Expr::parse(expr)?;
                sampled(grid, |x| e.at_point(x))?
            }
        };
        ScalarField::from_values(grid, values)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentShape {
    Constant {
        value: f64,
    },
    /// `base + slope·x` (one slope per axis).
    Affine {
        base: f64,
        slope: Vec<f64>,
    },
    /// `base + amplitude·sin(frequency·x₁)`
    Sinusoidal {
        base: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `left` for `x₁ < at`, `right` otherwise.
    Step {
        left: f64,
        right: f64,
        at: f64,
    },
    /// `clamp(base + amplitude·ln(1 + |x|), lo, hi)`
    ClampedLog {
        base: f64,
        amplitude: f64,
        lo: f64,
        hi: f64,
    },
    Expr {
        expr: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSpec {
    #[serde(flatten)]
    pub shape: ExponentShape,
    /// Limit at infinity; defaults to the value at the member cell farthest
    /// from the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_infinity: Option<f64>,
}

impl ExponentSpec {
    pub fn constant(value: f64) -> Self {
        ExponentSpec {
            shape: ExponentShape::Constant { value },
            p_infinity: None,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<ExponentField> {
        let values = match &self.shape {
            ExponentShape::Constant { value } => sampled(grid, |_| Ok(*value))?,
            ExponentShape::Affine { base, slope } => sampled(grid, |x| {
                Ok(base
                    + slope
                        .iter()
                        .enumerate()
                        .map(|(a, s)| s * x.0[a])
                        .sum::<f64>())
            })?,
            ExponentShape::Sinusoidal {
                base,
                amplitude,
                frequency,
            } => sampled(grid, |x| Ok(base + amplitude * (frequency * x.x()).sin()))?,
            ExponentShape::Step { left, right, at } => {
                sampled(grid, |x| Ok(if x.x() < *at { *left } else { *right }))?
            }
            ExponentShape::ClampedLog {
                base,
                amplitude,
                lo,
                hi,
            } => sampled(grid, |x| {
                Ok((base + amplitude * (1.0 + x.norm()).ln()).clamp(*lo, *hi))
            })?,
            ExponentShape::Expr { expr } => {
                let e = Expr::parse(expr)?;
                sampled(grid, |x| e.at_point(x))?
            }
        };
        let p_inf = match self.p_infinity {
            Some(v) => v,
            None => {
                let far = grid
                    .members()
                    .iter()
                    .copied()
                    .max_by(|&a, &b| grid.center(a).norm().total_cmp(&grid.center(b).norm()))
                    .ok_or_else(|| config_err("grid has no member cells"))?;
                values[far]
            }
        };
        // non-members carry p(∞) so the field is valid everywhere
        let values = (0..grid.len())
            .map(|c| if grid.is_member(c) { values[c] } else { p_inf })
            .collect();
        ExponentField::from_values(grid, values, p_inf)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Constant {
        value: f64,
    },
    /// `scale·r^exponent`
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `r^exponent·(1 + |ln r|)^log_power`
    PowerLog {
        exponent: f64,
        log_power: f64,
    },
    /// The `φ` for which the norm is the `L^{p(·),λ(·)}` Morrey norm.
    FromLambda {
        lambda: FieldSpec,
    },
    /// Expression in `x`, `y`, `r`.
    Expr {
        expr: String,
    },
    /// The left side of an integral condition built from `phi1`, so that
    /// the condition holds with constant 1. Only valid for `phi2`.
    Matched {
        condition: ZygmundKind,
    },
}

impl PhiSpec {
    /// `Matched` is resolved by the study code, which knows `phi1`.
    pub fn build(&self, p: &ExponentField, grid: &Grid) -> Result<PhiFunction> {
        Ok(match self {
            PhiSpec::Constant { value } => PhiFunction::constant(*value),
            PhiSpec::Power { exponent, scale } => {
                let (a, c) = (*exponent, *scale);
                PhiFunction::radial(move |r| c * r.powf(a))
            }
            PhiSpec::PowerLog {
                exponent,
                log_power,
            } => {
                let (a, b) = (*exponent, *log_power);
                PhiFunction::radial(move |r| r.powf(a) * (1.0 + r.ln().abs()).powf(b))
            }
            PhiSpec::FromLambda { lambda } => phi_from_lambda(p, &lambda.build(grid)?, grid)?,
            PhiSpec::Expr { expr } => {
                let e = Expr::parse(expr)?;
                e.eval(&[("x", 0.0), ("y", 0.0), ("r", 1.0)])?;
                PhiFunction::new(move |x, r| {
                    e.eval(&[("x", x.x()), ("y", x.y()), ("r", r)])
                        .unwrap_or(f64::NAN)
                })
            }
            PhiSpec::Matched { .. } => {
                return Err(config_err("a matched φ is only allowed as phi2"))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub h: f64,
    /// One `[lo, hi]` per axis.
    pub extent: Vec<[f64; 2]>,
    /// Membership predicate in `x`, `y`; a cell is in the open set when the
    /// expression is positive at its center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    /// Grid with `h / refine` and the extent scaled by `stretch` about its
    /// midpoint.
    pub fn build(&self, refine: usize, stretch: f64) -> Result<Grid> {
        let extent: Vec<(f64, f64)> = self
            .extent
            .iter()
            .map(|[lo, hi]| {
                let (m, half) = (0.5 * (lo + hi), 0.5 * (hi - lo) * stretch);
                (m - half, m + half)
            })
            .collect();
        let grid = Grid::new(self.h / refine as f64, &extent).map_err(config_err)?;
        match &self.mask {
            None => Ok(grid),
            Some(src) => {
                let e = Expr::parse(src)?;
                e.at_point(Point::default())?;
                grid.with_mask(move |x| e.at_point(x).map(|v| v > 0.0).unwrap_or(false))
            }
        }
    }

    fn window(&self) -> Vec<[f64; 2]> {
        self.extent.clone()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `M`
    Maximal,
    /// `M^α`
    FracMaximal,
    /// `I^α`
    #[default]
    Riesz,
    /// `M_b`
    MaximalCommutator,
    /// `[b, I^α]`
    RieszCommutator,
    /// `[M, b]`
    MaximalOpCommutator,
}

impl OperatorKind {
    pub fn needs_alpha(self) -> bool {
        matches!(
            self,
            OperatorKind::FracMaximal | OperatorKind::Riesz | OperatorKind::RieszCommutator
        )
    }

    pub fn needs_b(self) -> bool {
        matches!(
            self,
            OperatorKind::MaximalCommutator
                | OperatorKind::RieszCommutator
                | OperatorKind::MaximalOpCommutator
        )
    }

    /// Integral condition that governs Morrey boundedness of the operator.
    pub fn condition(self) -> ZygmundKind {
        match self {
            OperatorKind::Maximal => ZygmundKind::Qhs1sh,
            OperatorKind::MaximalCommutator | OperatorKind::MaximalOpCommutator => {
                ZygmundKind::Qhs1shk
            }
            OperatorKind::FracMaximal | OperatorKind::Riesz => ZygmundKind::H1v,
            OperatorKind::RieszCommutator => ZygmundKind::H1vk,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Indicator,
    Step,
    PowerBump,
    Gaussian,
}

fn default_count() -> usize {
    50
}

fn all_families() -> Vec<FamilyKind> {
    vec![
        FamilyKind::Indicator,
        FamilyKind::Step,
        FamilyKind::PowerBump,
        FamilyKind::Gaussian,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_families")]
    pub kinds: Vec<FamilyKind>,
    /// Box holding the supports' centers; defaults to the middle half of
    /// the grid extent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<[f64; 2]>>,
    /// Adds `f = 0` as the first function.
    #[serde(default)]
    pub include_zero: bool,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            count: default_count(),
            seed: 0,
            kinds: all_families(),
            window: None,
            include_zero: false,
        }
    }
}

fn default_radii() -> usize {
    24
}

fn default_centers() -> usize {
    33
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    #[serde(default = "default_radii")]
    pub radii: usize,
    /// Defaults to `r_max / 1000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    /// Defaults to a quarter of the narrowest extent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Centers per axis.
    #[serde(default = "default_centers")]
    pub centers: usize,
    /// Box of ball centers; defaults to the grid extent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<[f64; 2]>>,
}

impl Default for BallSpec {
    fn default() -> Self {
        BallSpec {
            radii: default_radii(),
            r_min: None,
            r_max: None,
            centers: default_centers(),
            window: None,
        }
    }
}

fn default_t_min() -> f64 {
    1e-2
}

fn default_per_decade() -> usize {
    64
}

fn default_gammas() -> Vec<f64> {
    crate::hardy::DEFAULT_GAMMAS.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    /// Defaults to the distance from the evaluation point to the nearest
    /// edge of the extent, so every ball stays inside the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    #[serde(default)]
    pub tail: Tail,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
}

impl Default for RadialSpec {
    fn default() -> Self {
        RadialSpec {
            t_min: default_t_min(),
            t_max: None,
            per_decade: default_per_decade(),
            tail: Tail::PowerLaw,
            gammas: default_gammas(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    #[default]
    Lebesgue,
    Morrey,
}

/// What `study-local` compares.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalEstimate {
    /// Local norm of `I^α f` against the Hardy-type integral of `f`.
    #[default]
    Riesz,
    /// Same for `[b, I^α]` with the log-weighted integral and `‖b‖_BMO`.
    Commutator,
    /// Pointwise `M^♯([b, I^α]f)` against the `M` and `M^{sα}` bound.
    SharpCommutator,
    /// `‖fω‖_{p(·)}` against `‖ω M^♯f‖_{p(·)}`.
    SharpFunction,
}

/// One rung of the refinement ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderStep {
    HalveH,
    DoubleExtent,
}

fn default_refine() -> usize {
    1
}

fn default_ladder() -> Vec<LadderStep> {
    vec![LadderStep::HalveH, LadderStep::DoubleExtent]
}

fn default_drift() -> f64 {
    25.0
}

fn default_local_radii() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}

fn default_s() -> f64 {
    2.0
}

fn default_decay() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    #[serde(default)]
    pub mode: NormMode,
    #[serde(default)]
    pub estimate: LocalEstimate,
    /// Evaluation points; default is the center of the extent.
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Radii `t` of the local estimates.
    #[serde(default = "default_local_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<LadderStep>,
    #[serde(default = "default_drift")]
    pub max_drift_pct: f64,
    /// Exponent `s` of the sharp-commutator bound.
    #[serde(default = "default_s")]
    pub s: f64,
    /// Required decay of the vanishing modulus between its first and last radius.
    #[serde(default = "default_decay")]
    pub decay_factor: f64,
    /// Decreasing radii of the vanishing study; default `1 … 0.01`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanishing_radii: Option<Vec<f64>>,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            mode: NormMode::default(),
            estimate: LocalEstimate::default(),
            points: Vec::new(),
            radii: default_local_radii(),
            refine: default_refine(),
            ladder: default_ladder(),
            max_drift_pct: default_drift(),
            s: default_s(),
            decay_factor: default_decay(),
            vanishing_radii: None,
        }
    }
}

fn default_p() -> ExponentSpec {
    ExponentSpec::constant(2.0)
}

fn unit_weight() -> FieldSpec {
    FieldSpec::Constant { value: 1.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub grid: GridSpec,
    #[serde(default = "default_p")]
    pub p: ExponentSpec,
    /// Target exponent; derived from `alpha` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<ExponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default = "unit_weight")]
    pub weight: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<PhiSpec>,
    #[serde(default)]
    pub operator: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<FieldSpec>,
    /// Single input function for `norm`, `operator` and the vanishing study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FieldSpec>,
    #[serde(default)]
    pub functions: FamilySpec,
    #[serde(default)]
    pub balls: BallSpec,
    #[serde(default)]
    pub radial: RadialSpec,
    #[serde(default)]
    pub study: StudySpec,
    /// Condition evaluated by the `condition` command; all kinds when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ZygmundKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks that need no grid.
    pub fn validate(&self) -> Result<()> {
        let dim = self.grid.dim();
        if dim != 1 && dim != 2 {
            return Err(config_err(format!(
                "grid extent has {dim} axes; 1 or 2 supported"
            )));
        }
        if self.grid.extent.iter().any(|[lo, hi]| !(hi > lo)) || !(self.grid.h > 0.0) {
            return Err(config_err("grid extent must be increasing and h positive"));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < dim as f64) {
                return Err(config_err(format!("alpha = {a} must lie in (0, {dim})")));
            }
        }
        if self.study.refine == 0 && self.study.ladder.is_empty() {
            return Err(config_err("empty refinement ladder"));
        }
        if !(self.study.max_drift_pct >= 0.0)
            || !(self.study.s > 1.0)
            || !(self.study.decay_factor > 1.0)
        {
            return Err(config_err("study thresholds out of range"));
        }
        if self.functions.kinds.is_empty() {
            return Err(config_err("functions.kinds is empty"));
        }
        for w in [&self.functions.window, &self.balls.window]
            .into_iter()
            .flatten()
        {
            if w.len() != dim || w.iter().any(|[lo, hi]| !(hi > lo)) {
                return Err(config_err("windows need one increasing [lo, hi] per axis"));
            }
        }
        if matches!(self.phi1, Some(PhiSpec::Matched { .. })) {
            return Err(config_err("phi1 cannot be matched"));
        }
        if let Some(PhiSpec::Matched { condition }) = &self.phi2 {
            if matches!(condition, ZygmundKind::Qhs1sh | ZygmundKind::Qhs1shk)
                || condition.uses_gamma()
            {
                return Err(config_err(
                    "a matched phi2 needs an integral condition (H1v, H1vk, rv, rv5)",
                ));
            }
        }
        Ok(())
    }

    /// Window of test-function centers.
    pub fn function_window(&self) -> Vec<[f64; 2]> {
        self.functions.window.clone().unwrap_or_else(|| {
            self.grid
                .window()
                .iter()
                .map(|[lo, hi]| {
                    let q = 0.25 * (hi - lo);
                    [lo + q, hi - q]
                })
                .collect()
        })
    }

    pub fn ball_window(&self) -> Vec<[f64; 2]> {
        self.balls
            .window
            .clone()
            .unwrap_or_else(|| self.grid.window())
    }

    /// Center of the extent, the default evaluation point.
    pub fn midpoint(&self) -> Point {
        let c: Vec<f64> = self
            .grid
            .extent
            .iter()
            .map(|[lo, hi]| 0.5 * (lo + hi))
            .collect();
        Point([c[0], c.get(1).copied().unwrap_or(0.0)])
    }
}
