//! Modular and Luxemburg norm of the variable-exponent Lebesgue space.
//!
//! The norm of `f` over a region is the unique `η` with
//! `∫_region |f/η|^{p(x)} dx = 1`, found by bisection on the modular. A
//! weighted norm is the plain norm of `f·ω`.

use serde::Serialize;

use crate::error::{bail, Result};
use crate::exponent::{conjugate, ExponentField};
use crate::field::ScalarField;
use crate::grid::{integrate, Grid, Region};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub modular_at_value: f64,
    pub bisection_iterations: usize,
}

impl NormResult {
    const ZERO: NormResult = NormResult {
        value: 0.0,
        modular_at_value: 0.0,
        bisection_iterations: 0,
    };
}

/// `∫_region |f|^{p(x)} dx` by the midpoint rule.
pub fn modular(f: &ScalarField, p: &ExponentField, grid: &Grid, region: &Region) -> Result<f64> {
    let (fv, pv) = (f.values(), p.values());
    let mut sum = 0.0;
    for &c in region.cells() {
        let v = fv[c];
        if !v.is_finite() {
            bail!(Numeric, "field value {v} at cell {c}");
        }
        if v != 0.0 {
            sum += v.abs().powf(pv[c]);
        }
    }
    if !sum.is_finite() {
        bail!(Numeric, "modular overflowed");
    }
    Ok(sum * grid.cell_measure())
}

/// Bisection settings for the Luxemburg norm.
#[derive(Clone, Copy, Debug)]
pub struct LuxemburgSolver {
    pub rel_tol: f64,
    pub max_iterations: usize,
    pub max_expansions: usize,
}

impl Default for LuxemburgSolver {
    fn default() -> Self {
        LuxemburgSolver {
            rel_tol: 1e-10,
            max_iterations: 200,
            max_expansions: 200,
        }
    }
}

/// Nonzero samples `(ln|g|, p)` of a function on a region, the unit of work
/// for one norm evaluation.
#[derive(Clone, Debug, Default)]
pub(crate) struct NormTerms {
    log_abs: Vec<f64>,
    exps: Vec<f64>,
    constant_exp: Option<f64>,
    cell_measure: f64,
}

impl NormTerms {
    pub(crate) fn new(cell_measure: f64) -> Self {
        NormTerms {
            cell_measure,
            ..Default::default()
        }
    }

    pub(crate) fn push(&mut self, g: f64, p: f64) -> Result<()> {
        if !g.is_finite() {
            bail!(Numeric, "non-finite value {g} in norm");
        }
        if g == 0.0 {
            return Ok(());
        }
        self.constant_exp = match (self.log_abs.is_empty(), self.constant_exp) {
            (true, _) => Some(p),
            (false, Some(q)) if q == p => Some(q),
            _ => None,
        };
        self.log_abs.push(g.abs().ln());
        self.exps.push(p);
        Ok(())
    }

    pub(crate) fn collect(
        values: &[f64],
        weight: Option<&[f64]>,
        exps: &[f64],
        cells: &[usize],
        cell_measure: f64,
    ) -> Result<Self> {
        let mut t = NormTerms::new(cell_measure);
        for &c in cells {
            let g = match weight {
                Some(w) => values[c] * w[c],
                None => values[c],
            };
            t.push(g, exps[c])?;
        }
        Ok(t)
    }

    /// Modular of `g/η`.
    fn modular(&self, eta: f64) -> f64 {
        let le = eta.ln();
        let s: f64 = self
            .log_abs
            .iter()
            .zip(&self.exps)
            .map(|(&lg, &p)| (p * (lg - le)).exp())
            .sum();
        s * self.cell_measure
    }
}

impl LuxemburgSolver {
    pub fn new(rel_tol: f64) -> Result<Self> {
        if !(rel_tol >= 0.0) {
            bail!(Argument, "tolerance must be non-negative, got {rel_tol}");
        }
        Ok(LuxemburgSolver {
            rel_tol,
            ..Default::default()
        })
    }

    pub fn norm(
        &self,
        f: &ScalarField,
        p: &ExponentField,
        grid: &Grid,
        region: &Region,
        weight: Option<&ScalarField>,
    ) -> Result<NormResult> {
        if !(self.rel_tol >= 0.0) {
            bail!(
                Argument,
                "tolerance must be non-negative, got {}",
                self.rel_tol
            );
        }
        if let Some(w) = weight {
            w.ensure_positive(grid, "weight")?;
        }
        let terms = NormTerms::collect(
            f.values(),
            weight.map(|w| w.values()),
            p.values(),
            region.cells(),
            grid.cell_measure(),
        )?;
        self.solve(&terms)
    }

    pub(crate) fn solve(&self, terms: &NormTerms) -> Result<NormResult> {
        if terms.log_abs.is_empty() {
            return Ok(NormResult::ZERO);
        }
        if let Some(p0) = terms.constant_exp {
            // η^{p0} = ∫|g|^{p0}: closed form when the exponent is constant
            let m1 = terms.modular(1.0);
            let mut eta = m1.powf(1.0 / p0);
            let mut m = terms.modular(eta);
            if m > 1.0 {
                eta *= 1.0 + 4.0 * f64::EPSILON;
                m = terms.modular(eta);
            }
            if !(eta.is_finite() && eta > 0.0) {
                bail!(Numeric, "norm evaluated to {eta}");
            }
            return Ok(NormResult {
                value: eta,
                modular_at_value: m,
                bisection_iterations: 0,
            });
        }
        let (p_lo, p_hi) = terms
            .exps
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| {
                (a.min(p), b.max(p))
            });
        let m1 = terms.modular(1.0);
        let eta0 = m1.powf(1.0 / p_lo) + m1.powf(1.0 / p_hi);
        let solution = bisect_unit_level(|eta| terms.modular(eta), eta0, self)?;
        Ok(NormResult {
            value: solution.0,
            modular_at_value: solution.1,
            bisection_iterations: solution.2,
        })
    }
}

/// Finds `η` with `F(η) = 1` for a non-increasing `F`, starting from the
/// bracket `[η₀/2, 2η₀]` and expanding it by doubling. Returns the upper
/// end of the final bracket (where `F ≤ 1`), `F` there, and the iteration count.
pub(crate) fn bisect_unit_level(
    f: impl Fn(f64) -> f64,
    eta0: f64,
    solver: &LuxemburgSolver,
) -> Result<(f64, f64, usize)> {
    if !(eta0 > 0.0 && eta0.is_finite()) {
        bail!(Numeric, "initial norm estimate {eta0}");
    }
    let mut hi = 2.0 * eta0;
    let mut f_hi = f(hi);
    let mut n = 0;
    while f_hi > 1.0 {
        n += 1;
        if n > solver.max_expansions {
            bail!(
                Convergence,
                "upper bracket not found after {} doublings",
                solver.max_expansions
            );
        }
        hi *= 2.0;
        f_hi = f(hi);
    }
    let mut lo = 0.5 * eta0;
    let mut n = 0;
    while f(lo) < 1.0 {
        n += 1;
        if n > solver.max_expansions {
            bail!(
                Convergence,
                "lower bracket not found after {} halvings",
                solver.max_expansions
            );
        }
        lo *= 0.5;
    }
    let mut iterations = 0;
    while hi - lo > solver.rel_tol * hi {
        if iterations >= solver.max_iterations {
            bail!(
                Convergence,
                "bisection did not reach tolerance in {} steps",
                solver.max_iterations
            );
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm > 1.0 {
            lo = mid;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Ok((hi, f_hi, iterations))
}

/// Norm of `values·weight` restricted to `cells`, default solver, no bound check.
pub(crate) fn region_norm(
    values: &[f64],
    weight: Option<&[f64]>,
    p: &ExponentField,
    grid: &Grid,
    cells: &[usize],
) -> Result<f64> {
    let terms = NormTerms::collect(values, weight, p.values(), cells, grid.cell_measure())?;
    Ok(LuxemburgSolver::default().solve(&terms)?.value)
}

/// Norm of the function with samples `(g, p)`, one per cell.
pub(crate) fn sample_norm(
    samples: impl Iterator<Item = (f64, f64)>,
    cell_measure: f64,
) -> Result<f64> {
    let mut terms = NormTerms::new(cell_measure);
    for (g, p) in samples {
        terms.push(g, p)?;
    }
    Ok(LuxemburgSolver::default().solve(&terms)?.value)
}

/// Luxemburg norm of `f` (times `weight`, if given) over `region`, with the
/// default solver.
pub fn luxemburg_norm(
    f: &ScalarField,
    p: &ExponentField,
    grid: &Grid,
    region: &Region,
    weight: Option<&ScalarField>,
) -> Result<NormResult> {
    p.check_bounds()?;
    LuxemburgSolver::default().norm(f, p, grid, region, weight)
}

/// Norm over the whole open set, value only.
pub fn norm_value(
    f: &ScalarField,
    p: &ExponentField,
    grid: &Grid,
    weight: Option<&ScalarField>,
) -> Result<f64> {
    Ok(luxemburg_norm(f, p, grid, &grid.full_region(), weight)?.value)
}

/// Lower bound for `‖f‖_{p(·)}` by pairing against a dictionary of test
/// functions normalized in the conjugate space.
pub fn dual_pairing_lower_bound(
    f: &ScalarField,
    p: &ExponentField,
    grid: &Grid,
    dictionary: &[ScalarField],
) -> Result<f64> {
    if dictionary.is_empty() {
        bail!(Argument, "dictionary is empty");
    }
    let pc = conjugate(p, grid)?;
    let all = grid.full_region();
    let mut best: Option<f64> = None;
    for g in dictionary {
        let ng = luxemburg_norm(g, &pc, grid, &all, None)?.value;
        if ng == 0.0 {
            continue;
        }
        let unit = g.scale(1.0 / ng);
        let pairing = integrate(grid, &f.mul(&unit), &all)?.abs();
        let unit_norm = luxemburg_norm(&unit, &pc, grid, &all, None)?.value;
        let v = pairing / unit_norm.max(1.0);
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    match best {
        Some(v) => Ok(v),
        None => bail!(Argument, "every dictionary entry is identically zero"),
    }
}
