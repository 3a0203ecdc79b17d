//! Generalized (weighted) Morrey norms, the vanishing modulus, the
//! nontriviality quantities, and the Morrey norm over the measure
//! `dμ = ω^{p(y)} dy`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{bail, Result};
use crate::exponent::ExponentField;
use crate::field::ScalarField;
use crate::grid::{Ball, Grid, Point};
use crate::lebesgue::{bisect_unit_level, sample_norm, LuxemburgSolver};
use crate::weights::BallFamily;

/// A positive function of `(x, r)`.
#[derive(Clone)]
pub struct PhiFunction(Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>);

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PhiFunction")
    }
}

impl PhiFunction {
    pub fn new(f: impl Fn(Point, f64) -> f64 + Send + Sync + 'static) -> Self {
        PhiFunction(Arc::new(f))
    }

    /// A function of `r` alone.
    pub fn radial(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PhiFunction::new(move |_, r| f(r))
    }

    pub fn constant(c: f64) -> Self {
        PhiFunction::radial(move |_| c)
    }

    /// `r^a`.
    pub fn power(a: f64) -> Self {
        PhiFunction::radial(move |r| r.powf(a))
    }

    pub fn eval(&self, x: Point, r: f64) -> f64 {
        (self.0)(x, r)
    }

    /// Value at `(x, r)`, which must be positive and finite.
    pub fn checked(&self, x: Point, r: f64) -> Result<f64> {
        let v = self.eval(x, r);
        if !(v > 0.0 && v.is_finite()) {
            bail!(Domain, "φ({:?}, {r}) = {v} is not positive", x.0);
        }
        Ok(v)
    }
}

/// `φ(x,r) = r^{λ(x)/p(x) − θ_p(x,r)}`, the choice for which the
/// unweighted norm reduces to `sup t^{−λ(x)/p(x)} ‖fχ_{B̃(x,t)}‖_{p(·)}`.
pub fn phi_from_lambda(
    p: &ExponentField,
    lambda: &ScalarField,
    grid: &Grid,
) -> Result<PhiFunction> {
    let n = grid.dim() as f64;
    for &c in grid.members() {
        let l = lambda.values()[c];
        if !(0.0..=n).contains(&l) {
            bail!(Argument, "λ = {l} at cell {c} lies outside [0, {n}]");
        }
    }
    let (g, p, lambda) = (grid.clone(), p.clone(), lambda.clone());
    Ok(PhiFunction::new(move |x, r| match g.member_cell(x) {
        Ok(c) => {
            let px = p.values()[c];
            let theta = if r <= 1.0 { n / px } else { n / p.p_infinity() };
            r.powf(lambda.values()[c] / px - theta)
        }
        Err(_) => f64::NAN,
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorreyNorm {
    pub value: f64,
    pub argmax: Ball,
    /// Normalized local norm per ball, in family order (centers outer).
    pub profile: Vec<(Ball, f64)>,
}

/// Per-ball denominators `φ(x,r)·‖ωχ_{B̃}‖_{p(·)}` (or `φ(x,r)·r^{θ_p(x,r)}`
/// without a weight), computed once and reused across many functions.
#[derive(Clone, Debug)]
pub struct MorreyNormalizer {
    p: ExponentField,
    weight: Option<ScalarField>,
    balls: Vec<Ball>,
    denominators: Vec<Option<f64>>,
}

impl MorreyNormalizer {
    pub fn new(
        p: &ExponentField,
        phi: &PhiFunction,
        grid: &Grid,
        balls: &BallFamily,
        weight: Option<&ScalarField>,
    ) -> Result<Self> {
        p.check_bounds()?;
        if let Some(w) = weight {
            w.ensure_positive(grid, "weight")?;
        }
        let list: Vec<Ball> = balls.balls().collect();
        let cm = grid.cell_measure();
        let denominators = list
            .par_iter()
            .map(|ball| -> Result<Option<f64>> {
                let cells = grid.spans_region(&grid.ball_spans(ball.center, ball.radius));
                if cells.is_empty() {
                    return Ok(None);
                }
                let phi = phi.checked(ball.center, ball.radius)?;
                let scale = match weight {
                    Some(w) => sample_norm(
                        cells
                            .cells()
                            .iter()
                            .map(|&c| (w.values()[c], p.values()[c])),
                        cm,
                    )?,
                    None => ball.radius.powf(p.theta(grid, ball.center, ball.radius)?),
                };
                Ok(Some(phi * scale))
            })
            .collect::<Result<_>>()?;
        Ok(MorreyNormalizer {
            p: p.clone(),
            weight: weight.cloned(),
            balls: list,
            denominators,
        })
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    /// The Morrey norm of `f`.
    pub fn norm(&self, f: &ScalarField, grid: &Grid) -> Result<MorreyNorm> {
        f.ensure_finite(grid)?;
        let cm = grid.cell_measure();
        let (fv, pv) = (f.values(), self.p.values());
        let wv = self.weight.as_ref().map(|w| w.values());
        let profile: Vec<Option<(Ball, f64)>> = self
            .balls
            .par_iter()
            .zip(&self.denominators)
            .map(|(ball, den)| -> Result<Option<(Ball, f64)>> {
                let Some(den) = den else { return Ok(None) };
                let cells = grid.spans_region(&grid.ball_spans(ball.center, ball.radius));
                let num = sample_norm(
                    cells
                        .cells()
                        .iter()
                        .map(|&c| (fv[c] * wv.map_or(1.0, |w| w[c]), pv[c])),
                    cm,
                )?;
                Ok(Some((*ball, num / den)))
            })
            .collect::<Result<_>>()?;
        let profile: Vec<(Ball, f64)> = profile.into_iter().flatten().collect();
        let Some(&(argmax, value)) =
            profile
                .iter()
                .fold(None, |best: Option<&(Ball, f64)>, e| match best {
                    Some(b) if b.1 >= e.1 => Some(b),
                    _ => Some(e),
                })
        else {
            bail!(Argument, "no ball of the family meets the open set");
        };
        Ok(MorreyNorm {
            value,
            argmax,
            profile,
        })
    }
}

/// `sup_{x,r} ‖fχ_{B̃}‖_{L^{p(·)}_ω} / (φ(x,r)‖ωχ_{B̃}‖_{p(·)})` with a weight,
/// `sup_{x,r} ‖fχ_{B̃}‖_{p(·)} / (φ(x,r) r^{θ_p(x,r)})` without.
pub fn gw_morrey_norm(
    f: &ScalarField,
    p: &ExponentField,
    phi: &PhiFunction,
    grid: &Grid,
    balls: &BallFamily,
    weight: Option<&ScalarField>,
) -> Result<MorreyNorm> {
    MorreyNormalizer::new(p, phi, grid, balls, weight)?.norm(f, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanishingProfile {
    /// Strictly decreasing.
    pub radii: Vec<f64>,
    /// Sup over centers of the normalized local norm at each radius.
    pub modulus: Vec<f64>,
    /// Last modulus at most a tenth of the first.
    pub vanishing: bool,
}

/// Modulus `t ↦ sup_x ‖fχ_{B̃(x,t)}‖_{L^{p(·)}_ω} / (φ(x,t)‖ωχ_{B̃(x,t)}‖_{p(·)})`
/// over a decreasing radius list.
pub fn vanishing_modulus(
    f: &ScalarField,
    p: &ExponentField,
    phi: &PhiFunction,
    omega: &ScalarField,
    grid: &Grid,
    centers: &[Point],
    radii: &[f64],
) -> Result<VanishingProfile> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] < w[0])) {
        bail!(Argument, "radii must be nonempty and strictly decreasing");
    }
    let mut ascending = radii.to_vec();
    ascending.reverse();
    let fam = BallFamily::new(grid, centers.to_vec(), ascending)?;
    let norm = gw_morrey_norm(f, p, phi, grid, &fam, Some(omega))?;
    let modulus: Vec<f64> = radii
        .iter()
        .map(|&r| {
            norm.profile
                .iter()
                .filter(|(b, _)| b.radius == r)
                .map(|e| e.1)
                .fold(0.0, f64::max)
        })
        .collect();
    let vanishing = modulus[modulus.len() - 1] <= 0.1 * modulus[0];
    Ok(VanishingProfile {
        radii: radii.to_vec(),
        modulus,
        vanishing,
    })
}

/// `Q(t) = sup_x 1/‖ωχ_{B̃(x,t)}‖_{p(·)} · 1/inf_x φ(x,t)` with `x` over
/// `centers`; returns `(Q at the smallest radius, sup_t Q)`.
pub fn nontriviality_conditions(
    phi: &PhiFunction,
    p: &ExponentField,
    omega: &ScalarField,
    grid: &Grid,
    centers: &[Point],
    radii: &[f64],
) -> Result<(f64, f64)> {
    p.check_bounds()?;
    omega.ensure_positive(grid, "weight")?;
    if radii.is_empty() || centers.is_empty() {
        bail!(Argument, "need at least one center and one radius");
    }
    let cm = grid.cell_measure();
    let mut q = Vec::with_capacity(radii.len());
    for &t in radii {
        let mut inf_phi = f64::INFINITY;
        let mut inv_norm = 0.0f64;
        for &x in centers {
            grid.member_cell(x)?;
            inf_phi = inf_phi.min(phi.checked(x, t)?);
            let cells = grid.spans_region(&grid.ball_spans(x, t));
            let n = sample_norm(
                cells
                    .cells()
                    .iter()
                    .map(|&c| (omega.values()[c], p.values()[c])),
                cm,
            )?;
            if n > 0.0 {
                inv_norm = inv_norm.max(1.0 / n);
            }
        }
        q.push((t, inv_norm / inf_phi));
    }
    let smallest = q.iter().fold(q[0], |a, &b| if b.0 < a.0 { b } else { a }).1;
    let sup = q.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok((smallest, sup))
}

/// `inf{η > 0 : sup_B (t^λ/μ(B̃)) ∫_{B̃} (|f|/η)^{p(y)} dμ ≤ 1}` with
/// `dμ = ω^{p(y)} dy`.
pub fn mu_morrey_norm(
    f: &ScalarField,
    p: &ExponentField,
    lambda: f64,
    omega: &ScalarField,
    grid: &Grid,
    balls: &BallFamily,
) -> Result<f64> {
    let n = grid.dim() as f64;
    if !(0.0..n).contains(&lambda) {
        bail!(Argument, "λ = {lambda} must lie in [0, {n})");
    }
    p.check_bounds()?;
    omega.ensure_positive(grid, "weight")?;
    f.ensure_finite(grid)?;
    let (fv, wv, pv) = (f.values(), omega.values(), p.values());
    let cm = grid.cell_measure();
    // per ball: t^λ/μ(B̃) and the terms (p·ln|f| + p·ln ω, p) of its nonzero cells
    struct BallTerms {
        factor: f64,
        terms: Vec<(f64, f64)>,
    }
    let list: Vec<Ball> = balls.balls().collect();
    let per_ball: Vec<BallTerms> = list
        .par_iter()
        .filter_map(|ball| {
            let cells = grid.spans_region(&grid.ball_spans(ball.center, ball.radius));
            let mu: f64 = cells
                .cells()
                .iter()
                .map(|&c| wv[c].powf(pv[c]))
                .sum::<f64>()
                * cm;
            if !(mu > 0.0) {
                return None;
            }
            let terms: Vec<(f64, f64)> = cells
                .cells()
                .iter()
                .filter(|&&c| fv[c] != 0.0)
                .map(|&c| (pv[c] * (fv[c].abs().ln() + wv[c].ln()), pv[c]))
                .collect();
            Some(BallTerms {
                factor: ball.radius.powf(lambda) * cm / mu,
                terms,
            })
        })
        .filter(|b| !b.terms.is_empty())
        .collect();
    if per_ball.is_empty() {
        return Ok(0.0);
    }
    let level = |eta: f64| -> f64 {
        let le = eta.ln();
        per_ball
            .iter()
            .map(|b| {
                b.factor
                    * b.terms
                        .iter()
                        .map(|&(a, q)| (a - q * le).exp())
                        .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    let m = level(1.0);
    if !m.is_finite() {
        bail!(Numeric, "measure modular overflowed");
    }
    let (p_lo, p_hi) = (p.p_minus(), p.p_plus());
    let eta0 = m.powf(1.0 / p_lo) + m.powf(1.0 / p_hi);
    Ok(bisect_unit_level(level, eta0, &LuxemburgSolver::default())?.0)
}
