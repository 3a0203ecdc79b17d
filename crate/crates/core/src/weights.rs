//! Muckenhoupt-type weight constants `[ω]_{A_{p(·),q(·)}}` as sups over a
//! discrete family of balls.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{bail, Result};
use crate::exponent::{conjugate, ExponentField};
use crate::field::ScalarField;
use crate::grid::{ball_region, Ball, Grid, Point};
use crate::lebesgue::region_norm;

/// Default ratio of the geometric radius grid.
pub const DEFAULT_RADIUS_RATIO: f64 = 1.189_207_115_002_721; // 2^{1/4}

/// Balls below this many cells are skipped.
pub const MIN_BALL_CELLS: usize = 4;

/// Centers × radii used to discretize a sup over balls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallFamily {
    centers: Vec<Point>,
    radii: Vec<f64>,
}

impl BallFamily {
    pub fn new(grid: &Grid, centers: Vec<Point>, mut radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            bail!(Argument, "ball family needs at least one center");
        }
        if radii.is_empty() {
            bail!(Argument, "ball family needs at least one radius");
        }
        if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            bail!(Argument, "radius {r} is not positive");
        }
        for c in &centers {
            grid.member_cell(*c)?;
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Ok(BallFamily { centers, radii })
    }

    /// Radii `r_min·ρ^k ≤ r_max` with `ρ ∈ (1, 2]`.
    pub fn geometric(
        grid: &Grid,
        centers: Vec<Point>,
        r_min: f64,
        r_max: f64,
        ratio: f64,
    ) -> Result<Self> {
        BallFamily::new(grid, centers, geometric_radii(r_min, r_max, ratio)?)
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    /// Radii in increasing order.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn balls(&self) -> impl Iterator<Item = Ball> + '_ {
        self.centers.iter().flat_map(move |&c| {
            self.radii.iter().map(move |&r| Ball {
                center: c,
                radius: r,
            })
        })
    }

    /// Family with the union of both center and radius sets.
    pub fn union(&self, other: &BallFamily) -> BallFamily {
        let mut centers = self.centers.clone();
        for c in &other.centers {
            if !centers.contains(c) {
                centers.push(*c);
            }
        }
        let mut radii: Vec<f64> = self.radii.iter().chain(&other.radii).copied().collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        BallFamily { centers, radii }
    }
}

pub fn geometric_radii(r_min: f64, r_max: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_min.is_finite()) {
        bail!(Argument, "r_min must be positive, got {r_min}");
    }
    if !(r_max >= r_min && r_max.is_finite()) {
        bail!(Argument, "r_max = {r_max} must be at least r_min = {r_min}");
    }
    if !(ratio > 1.0 && ratio <= 2.0) {
        bail!(Argument, "radius ratio {ratio} must lie in (1, 2]");
    }
    let mut radii = Vec::new();
    let mut k = 0;
    loop {
        let r = r_min * ratio.powi(k);
        if r > r_max * (1.0 + 1e-12) {
            break;
        }
        radii.push(r);
        k += 1;
    }
    Ok(radii)
}

/// Member cell centers, every `stride`-th along each axis.
pub fn strided_centers(grid: &Grid, stride: usize) -> Vec<Point> {
    let stride = stride.max(1);
    grid.members()
        .iter()
        .copied()
        .filter(|&c| {
            let (ix, iy) = grid.coords(c);
            ix % stride == 0 && iy % stride == 0
        })
        .map(|c| grid.center(c))
        .collect()
}

/// Member cell centers nearest to an evenly spaced lattice of `count` points
/// per axis across the extent (duplicates removed).
pub fn spaced_centers(grid: &Grid, count: usize, lo: &[f64], hi: &[f64]) -> Result<Vec<Point>> {
    if count == 0 {
        bail!(Argument, "center count must be positive");
    }
    let axis_points = |a: usize| -> Vec<f64> {
        if count == 1 {
            vec![0.5 * (lo[a] + hi[a])]
        } else {
            (0..count)
                .map(|k| lo[a] + (hi[a] - lo[a]) * k as f64 / (count - 1) as f64)
                .collect()
        }
    };
    let xs = axis_points(0);
    let ys = if grid.dim() == 2 {
        axis_points(1)
    } else {
        vec![0.0]
    };
    let mut out: Vec<Point> = Vec::new();
    for &y in &ys {
        for &x in &xs {
            let p = Point([x, y]);
            if let Some(c) = grid.locate(p) {
                if grid.is_member(c) {
                    let cc = grid.center(c);
                    if !out.contains(&cc) {
                        out.push(cc);
                    }
                }
            }
        }
    }
    if out.is_empty() {
        bail!(Argument, "no lattice point falls inside the open set");
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightClassReport {
    pub constant: f64,
    pub argmax: Ball,
    /// `(r, max over centers)` per radius; NaN where every ball was skipped.
    #[serde(serialize_with = "crate::serde_ext::pairs")]
    pub profile: Vec<(f64, f64)>,
    /// Balls with fewer than [`MIN_BALL_CELLS`] cells.
    pub skipped: usize,
}

/// `sup_B |B|^{1/p(x)−1/q(x)−1} ‖ω‖_{L^{q(·)}(B̃)} ‖ω⁻¹‖_{L^{p'(·)}(B̃)}` over
/// the family, with `x` the ball center and `|B|` the full ball measure.
pub fn apq_constant(
    omega: &ScalarField,
    p: &ExponentField,
    q: &ExponentField,
    grid: &Grid,
    balls: &BallFamily,
) -> Result<WeightClassReport> {
    p.check_bounds()?;
    q.check_bounds()?;
    let inv = omega.reciprocal(grid)?;
    let pc = conjugate(p, grid)?;
    let all: Vec<Ball> = balls.balls().collect();
    let values: Vec<Option<f64>> = all
        .par_iter()
        .map(|ball| -> Result<Option<f64>> {
            let region = ball_region(grid, ball)?;
            if region.len() < MIN_BALL_CELLS {
                return Ok(None);
            }
            let cell = grid.member_cell(ball.center)?;
            let e = 1.0 / p.values()[cell] - 1.0 / q.values()[cell] - 1.0;
            let a = region_norm(omega.values(), None, q, grid, region.cells())?;
            let b = region_norm(inv.values(), None, &pc, grid, region.cells())?;
            Ok(Some(ball.measure(grid.dim()).powf(e) * a * b))
        })
        .collect::<Result<_>>()?;
    let nr = balls.radii().len();
    let mut profile: Vec<(f64, f64)> = balls.radii().iter().map(|&r| (r, f64::NAN)).collect();
    let mut best: Option<(f64, Ball)> = None;
    let mut skipped = 0;
    for (k, (v, ball)) in values.iter().zip(&all).enumerate() {
        match v {
            None => skipped += 1,
            Some(v) => {
                let slot = &mut profile[k % nr].1;
                if slot.is_nan() || *v > *slot {
                    *slot = *v;
                }
                if best.map_or(true, |(b, _)| *v > b) {
                    best = Some((*v, *ball));
                }
            }
        }
    }
    if skipped > 0 {
        warn!("{skipped} balls with fewer than {MIN_BALL_CELLS} cells skipped");
    }
    match best {
        Some((constant, argmax)) => Ok(WeightClassReport {
            constant,
            argmax,
            profile,
            skipped,
        }),
        None => bail!(
            Argument,
            "every ball in the family has fewer than {MIN_BALL_CELLS} cells"
        ),
    }
}

/// `[ω]_{A_{p(·)}}`, the case `q = p`.
pub fn ap_constant(
    omega: &ScalarField,
    p: &ExponentField,
    grid: &Grid,
    balls: &BallFamily,
) -> Result<WeightClassReport> {
    apq_constant(omega, p, p, grid, balls)
}

/// `ω ↦ ω⁻¹`, which maps `A_{p(·),q(·)}` to `A_{q'(·),p'(·)}`.
pub fn duality_image(omega: &ScalarField, grid: &Grid) -> Result<ScalarField> {
    omega.reciprocal(grid)
}

/// Outcome of comparing a constant across one refinement level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    Bounded,
    /// More than doubled under one refinement level.
    UnboundedNumerically,
}

pub fn divergence_verdict(coarse: f64, fine: f64) -> Divergence {
    if fine > 2.0 * coarse {
        Divergence::UnboundedNumerically
    } else {
        Divergence::Bounded
    }
}
