//! Maximal, fractional maximal, sharp maximal and Riesz potential operators,
//! their commutators, and the two BMO norms.
//!
//! Maximal-type operators take the sup over the radii of a [`BallFamily`]
//! at every member cell; the family's centers are only used by the BMO norms.
//! Normalizers use the full ball measure `|B(x,r)|` while integrals run over
//! `B̃(x,r)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{bail, Result};
use crate::exponent::ExponentField;
use crate::field::ScalarField;
use crate::grid::{ball_measure, BallSums, Grid, Point, Span};
use crate::lebesgue::sample_norm;
use crate::weights::BallFamily;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorOutput {
    pub values: ScalarField,
    /// Radius attaining the sup at each cell; NaN for non-maximal operators
    /// and for cells where no ball contributed.
    pub argmax_radius: Vec<f64>,
}

fn check_alpha_open(alpha: f64, grid: &Grid) -> Result<()> {
    let n = grid.dim() as f64;
    if !(alpha > 0.0 && alpha < n) {
        bail!(Argument, "α = {alpha} must lie in (0, {n})");
    }
    Ok(())
}

fn check_radii(balls: &BallFamily) -> Result<&[f64]> {
    if balls.radii().is_empty() {
        bail!(Argument, "empty radius grid");
    }
    Ok(balls.radii())
}

/// Runs `at(cell)` for every member cell in parallel.
fn pointwise(
    grid: &Grid,
    at: impl Fn(usize) -> Result<(f64, f64)> + Sync,
) -> Result<OperatorOutput> {
    let rows: Vec<(f64, f64)> = grid
        .members()
        .par_iter()
        .map(|&c| at(c))
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; grid.len()];
    let mut argmax = vec![f64::NAN; grid.len()];
    for (&c, (v, r)) in grid.members().iter().zip(rows) {
        if !v.is_finite() {
            bail!(Numeric, "operator value {v} at cell {c}");
        }
        values[c] = v;
        argmax[c] = r;
    }
    Ok(OperatorOutput {
        values: ScalarField::from_raw(values),
        argmax_radius: argmax,
    })
}

fn span_cells<'a>(grid: &'a Grid, spans: &'a [Span]) -> impl Iterator<Item = usize> + 'a {
    spans
        .iter()
        .flat_map(move |s| (s.start..s.end).map(move |ix| grid.index(ix, s.row)))
        .filter(move |&c| grid.is_member(c))
}

fn frac_maximal_cell(
    sums: &BallSums,
    alpha: f64,
    grid: &Grid,
    radii: &[f64],
    x: Point,
) -> (f64, f64) {
    let n = grid.dim() as f64;
    let mut best = (0.0, f64::NAN);
    for &r in radii {
        let (s, count) = sums.integral(&grid.ball_spans(x, r));
        if count == 0 {
            continue;
        }
        let v = ball_measure(grid.dim(), r).powf(alpha / n - 1.0) * s;
        if best.1.is_nan() || v > best.0 {
            best = (v, r);
        }
    }
    best
}

/// `M^α f(x) = sup_r |B(x,r)|^{α/n−1} ∫_{B̃(x,r)} |f|`; `α = 0` is the
/// Hardy-Littlewood maximal function.
pub fn frac_maximal(
    f: &ScalarField,
    alpha: f64,
    grid: &Grid,
    balls: &BallFamily,
) -> Result<OperatorOutput> {
    let n = grid.dim() as f64;
    if !(alpha >= 0.0 && alpha < n) {
        bail!(Argument, "α = {alpha} must lie in [0, {n})");
    }
    let radii = check_radii(balls)?;
    f.ensure_finite(grid)?;
    let sums = BallSums::new(grid, f.abs().values());
    pointwise(grid, |c| {
        Ok(frac_maximal_cell(&sums, alpha, grid, radii, grid.center(c)))
    })
}

/// `M^α f` at the member cell containing `x`, with its argmax radius.
pub fn frac_maximal_at(
    f: &ScalarField,
    alpha: f64,
    grid: &Grid,
    radii: &[f64],
    x: Point,
) -> Result<(f64, f64)> {
    let n = grid.dim() as f64;
    if !(alpha >= 0.0 && alpha < n) {
        bail!(Argument, "α = {alpha} must lie in [0, {n})");
    }
    if radii.is_empty() {
        bail!(Argument, "empty radius grid");
    }
    let c = grid.member_cell(x)?;
    let sums = BallSums::new(grid, f.abs().values());
    Ok(frac_maximal_cell(&sums, alpha, grid, radii, grid.center(c)))
}

/// Hardy-Littlewood maximal function.
pub fn maximal(f: &ScalarField, grid: &Grid, balls: &BallFamily) -> Result<OperatorOutput> {
    frac_maximal(f, 0.0, grid, balls)
}

/// Quadrature weights `hⁿ|x−y|^{α−n}` indexed by the absolute cell offset,
/// with the analytic integral over the equal-measure ball at offset zero.
struct RieszKernel {
    nx: usize,
    table: Vec<f64>,
}

impl RieszKernel {
    fn new(grid: &Grid, alpha: f64) -> Self {
        let [nx, ny] = grid.shape();
        let h = grid.spacing();
        let cm = grid.cell_measure();
        let n = grid.dim() as f64;
        let mut table = vec![0.0; nx * ny];
        for dy in 0..ny {
            for dx in 0..nx {
                let d = h * ((dx * dx + dy * dy) as f64).sqrt();
                table[dy * nx + dx] = cm * d.powf(alpha - n);
            }
        }
        table[0] = if grid.dim() == 1 {
            2.0 * (h / 2.0).powf(alpha) / alpha
        } else {
            let rho = h / std::f64::consts::PI.sqrt();
            2.0 * std::f64::consts::PI * rho.powf(alpha) / alpha
        };
        RieszKernel { nx, table }
    }

    fn at(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        self.table[a.1.abs_diff(b.1) * self.nx + a.0.abs_diff(b.0)]
    }
}

/// Nonzero samples as `(coords, cell, value)`.
fn support(grid: &Grid, f: &ScalarField) -> Vec<((usize, usize), usize, f64)> {
    grid.members()
        .iter()
        .filter(|&&c| f.values()[c] != 0.0)
        .map(|&c| (grid.coords(c), c, f.values()[c]))
        .collect()
}

/// `I^α f(x) = ∫_Ω |x−y|^{α−n} f(y) dy`.
pub fn riesz_potential(f: &ScalarField, alpha: f64, grid: &Grid) -> Result<OperatorOutput> {
    check_alpha_open(alpha, grid)?;
    f.ensure_finite(grid)?;
    let kernel = RieszKernel::new(grid, alpha);
    let supp = support(grid, f);
    pointwise(grid, |c| {
        let xc = grid.coords(c);
        Ok((
            supp.iter().map(|&(yc, _, v)| kernel.at(xc, yc) * v).sum(),
            f64::NAN,
        ))
    })
}

/// `I^α f` at the member cell containing `x`.
pub fn riesz_potential_at(f: &ScalarField, alpha: f64, grid: &Grid, x: Point) -> Result<f64> {
    check_alpha_open(alpha, grid)?;
    let xc = grid.coords(grid.member_cell(x)?);
    let kernel = RieszKernel::new(grid, alpha);
    Ok(support(grid, f)
        .iter()
        .map(|&(yc, _, v)| kernel.at(xc, yc) * v)
        .sum())
}

/// `[b, I^α] f(x) = ∫_Ω (b(x) − b(y)) f(y) |x−y|^{α−n} dy`; the self cell
/// contributes nothing.
pub fn riesz_commutator(
    b: &ScalarField,
    f: &ScalarField,
    alpha: f64,
    grid: &Grid,
) -> Result<OperatorOutput> {
    check_alpha_open(alpha, grid)?;
    f.ensure_finite(grid)?;
    b.ensure_finite(grid)?;
    let kernel = RieszKernel::new(grid, alpha);
    let supp = support(grid, f);
    let bv = b.values();
    pointwise(grid, |c| {
        let xc = grid.coords(c);
        let bx = bv[c];
        let s = supp
            .iter()
            .filter(|&&(_, y, _)| y != c)
            .map(|&(yc, y, v)| (bx - bv[y]) * v * kernel.at(xc, yc))
            .sum();
        Ok((s, f64::NAN))
    })
}

/// Mean of `f` over the member cells covered by `spans`, and their count.
fn span_mean(grid: &Grid, fv: &[f64], spans: &[Span]) -> (f64, usize) {
    let (mut s, mut n) = (0.0, 0usize);
    for c in span_cells(grid, spans) {
        s += fv[c];
        n += 1;
    }
    (if n > 0 { s / n as f64 } else { 0.0 }, n)
}

/// `|B|⁻¹ ∫_{B̃} |f − f_{B̃}|` and the cell count; `None` below two cells.
fn oscillation(grid: &Grid, fv: &[f64], x: Point, r: f64) -> Option<(f64, f64)> {
    let spans = grid.ball_spans(x, r);
    let (mean, n) = span_mean(grid, fv, &spans);
    if n < 2 {
        return None;
    }
    let dev: f64 = span_cells(grid, &spans).map(|c| (fv[c] - mean).abs()).sum();
    Some((
        dev * grid.cell_measure() / ball_measure(grid.dim(), r),
        mean,
    ))
}

fn sharp_cell(grid: &Grid, fv: &[f64], radii: &[f64], x: Point) -> (f64, f64) {
    let mut best = (0.0, f64::NAN);
    for &r in radii {
        if let Some((v, _)) = oscillation(grid, fv, x, r) {
            if best.1.is_nan() || v > best.0 {
                best = (v, r);
            }
        }
    }
    best
}

/// `M^♯f(x) = sup_r |B(x,r)|⁻¹ ∫_{B̃(x,r)} |f − f_{B̃(x,r)}|`, the mean
/// taken with `|B̃|`.
pub fn sharp_maximal(f: &ScalarField, grid: &Grid, balls: &BallFamily) -> Result<OperatorOutput> {
    let radii = check_radii(balls)?;
    f.ensure_finite(grid)?;
    pointwise(grid, |c| {
        Ok(sharp_cell(grid, f.values(), radii, grid.center(c)))
    })
}

pub fn sharp_maximal_at(
    f: &ScalarField,
    grid: &Grid,
    radii: &[f64],
    x: Point,
) -> Result<(f64, f64)> {
    let c = grid.member_cell(x)?;
    Ok(sharp_cell(grid, f.values(), radii, grid.center(c)))
}

fn maximal_commutator_cell(
    grid: &Grid,
    bv: &[f64],
    fv: &[f64],
    radii: &[f64],
    c: usize,
) -> (f64, f64) {
    let x = grid.center(c);
    let bx = bv[c];
    let rmax = radii[radii.len() - 1];
    let sq: Vec<f64> = radii.iter().map(|r| r * r).collect();
    let mut ring = vec![0.0; radii.len()];
    for y in span_cells(grid, &grid.ball_spans(x, rmax)) {
        let d2 = x.dist2(&grid.center(y));
        let k = sq.partition_point(|&r2| r2 <= d2);
        if k < ring.len() {
            ring[k] += (bx - bv[y]).abs() * fv[y].abs();
        }
    }
    let mut best = (0.0, f64::NAN);
    let mut acc = 0.0;
    for (k, &r) in radii.iter().enumerate() {
        acc += ring[k];
        let v = acc * grid.cell_measure() / ball_measure(grid.dim(), r);
        if best.1.is_nan() || v > best.0 {
            best = (v, r);
        }
    }
    best
}

/// `M_b f(x) = sup_r |B(x,r)|⁻¹ ∫_{B̃(x,r)} |b(x) − b(y)| |f(y)| dy`.
pub fn maximal_commutator(
    b: &ScalarField,
    f: &ScalarField,
    grid: &Grid,
    balls: &BallFamily,
) -> Result<OperatorOutput> {
    let radii = check_radii(balls)?;
    b.ensure_finite(grid)?;
    f.ensure_finite(grid)?;
    pointwise(grid, |c| {
        Ok(maximal_commutator_cell(
            grid,
            b.values(),
            f.values(),
            radii,
            c,
        ))
    })
}

pub fn maximal_commutator_at(
    b: &ScalarField,
    f: &ScalarField,
    grid: &Grid,
    radii: &[f64],
    x: Point,
) -> Result<(f64, f64)> {
    if radii.is_empty() {
        bail!(Argument, "empty radius grid");
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let c = grid.member_cell(x)?;
    Ok(maximal_commutator_cell(
        grid,
        b.values(),
        f.values(),
        &sorted,
        c,
    ))
}

/// `[M, b] f = M(bf) − b·M(f)`, both maximal functions over the same radii.
pub fn maximal_op_commutator(
    b: &ScalarField,
    f: &ScalarField,
    grid: &Grid,
    balls: &BallFamily,
) -> Result<OperatorOutput> {
    let mbf = maximal(&b.mul(f), grid, balls)?;
    let mf = maximal(f, grid, balls)?;
    let values = mbf.values.zip_map(&b.mul(&mf.values), |a, c| a - c);
    Ok(OperatorOutput {
        values,
        argmax_radius: vec![f64::NAN; grid.len()],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BmoReport {
    pub bmo_norm: f64,
    pub bmo_pw_norm: f64,
    /// `bmo_pw_norm / bmo_norm`, absent when `bmo_norm = 0`.
    pub ratio: Option<f64>,
}

/// `sup_B |B|⁻¹ ∫_{B̃} |b − b_{B̃}|` over the family.
pub fn bmo_norm(b: &ScalarField, grid: &Grid, balls: &BallFamily) -> Result<f64> {
    b.ensure_finite(grid)?;
    let bv = b.values();
    let all: Vec<_> = balls.balls().collect();
    Ok(all
        .par_iter()
        .filter_map(|ball| oscillation(grid, bv, ball.center, ball.radius).map(|o| o.0))
        .reduce(|| 0.0, f64::max))
}

/// Both BMO norms over the family: the mean oscillation one and the
/// `p(·), ω` one, `‖(b − b_{B̃})χ_{B̃}‖_{p(·),ω} / ‖χ_{B̃}‖_{p(·),ω}`.
pub fn bmo_norms(
    b: &ScalarField,
    p: &ExponentField,
    omega: &ScalarField,
    grid: &Grid,
    balls: &BallFamily,
) -> Result<BmoReport> {
    p.check_bounds()?;
    omega.ensure_positive(grid, "weight")?;
    b.ensure_finite(grid)?;
    let (bv, wv, pv) = (b.values(), omega.values(), p.values());
    let cm = grid.cell_measure();
    let all: Vec<_> = balls.balls().collect();
    let per_ball: Vec<Option<(f64, f64)>> = all
        .par_iter()
        .map(|ball| -> Result<Option<(f64, f64)>> {
            let Some((osc, mean)) = oscillation(grid, bv, ball.center, ball.radius) else {
                return Ok(None);
            };
            let spans = grid.ball_spans(ball.center, ball.radius);
            let num = sample_norm(
                span_cells(grid, &spans).map(|c| ((bv[c] - mean) * wv[c], pv[c])),
                cm,
            )?;
            let den = sample_norm(span_cells(grid, &spans).map(|c| (wv[c], pv[c])), cm)?;
            Ok(Some((osc, num / den)))
        })
        .collect::<Result<_>>()?;
    let (mut bmo, mut pw) = (0.0f64, 0.0f64);
    for (o, q) in per_ball.into_iter().flatten() {
        bmo = bmo.max(o);
        pw = pw.max(q);
    }
    Ok(BmoReport {
        bmo_norm: bmo,
        bmo_pw_norm: pw,
        ratio: (bmo > 0.0).then(|| pw / bmo),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::geometric_radii;
    use approx::assert_abs_diff_eq;

    fn chi(g: &Grid, a: f64, b: f64) -> ScalarField {
        ScalarField::from_fn(g, |p| if p.x() > a && p.x() < b { 1.0 } else { 0.0 })
    }

    fn sign(g: &Grid) -> ScalarField {
        ScalarField::from_fn(g, |p| p.x().signum())
    }

    fn linear_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    fn family(g: &Grid, radii: Vec<f64>) -> BallFamily {
        BallFamily::new(g, vec![Point::new1(0.0)], radii).unwrap()
    }

    #[test]
    fn frac_maximal_examples() {
        let g = Grid::interval(-6.0, 6.0, 1e-3).unwrap();
        let f = chi(&g, -1.0, 1.0);
        let radii = linear_radii(0.01, 5.0, 500);
        let (m0, _) = frac_maximal_at(&f, 0.0, &g, &radii, Point::new1(0.0)).unwrap();
        assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-2);
        let (m2, r2) = frac_maximal_at(&f, 0.0, &g, &radii, Point::new1(2.0)).unwrap();
        assert_abs_diff_eq!(m2, 1.0 / 3.0, epsilon = 1e-2);
        assert_abs_diff_eq!(r2, 3.0, epsilon = 0.05);
        let (mh, rh) = frac_maximal_at(&f, 0.5, &g, &radii, Point::new1(0.0)).unwrap();
        assert_abs_diff_eq!(mh, 2f64.sqrt(), epsilon = 1e-2);
        assert_abs_diff_eq!(rh, 1.0, epsilon = 0.02);
    }

    #[test]
    fn frac_maximal_argument_errors() {
        let g = Grid::interval(-1.0, 1.0, 0.1).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        let fam = family(&g, vec![0.5]);
        assert!(frac_maximal(&f, 1.0, &g, &fam).is_err());
        assert!(frac_maximal(&f, -0.1, &g, &fam).is_err());
        assert!(frac_maximal_at(&f, 0.0, &g, &[], Point::new1(0.0)).is_err());
    }

    #[test]
    fn field_and_point_maximal_agree() {
        let g = Grid::interval(-2.0, 2.0, 1e-2).unwrap();
        let f = ScalarField::from_fn(&g, |p| (3.0 * p.x()).sin());
        let radii = geometric_radii(0.02, 2.0, 1.3).unwrap();
        let fam = family(&g, radii.clone());
        let m = frac_maximal(&f, 0.25, &g, &fam).unwrap();
        for x in [-1.5, 0.0, 0.77] {
            let c = g.member_cell(Point::new1(x)).unwrap();
            let (v, r) = frac_maximal_at(&f, 0.25, &g, &radii, Point::new1(x)).unwrap();
            assert_eq!(m.values.values()[c], v);
            assert_eq!(m.argmax_radius[c], r);
        }
    }

    #[test]
    fn riesz_examples() {
        let g = Grid::interval(-4.0, 4.0, 1e-3).unwrap();
        let f = chi(&g, -1.0, 1.0);
        let out = riesz_potential(&f, 0.5, &g).unwrap();
        let at = |x: f64| out.values.value_at(&g, Point::new1(x)).unwrap();
        assert_abs_diff_eq!(at(0.0), 4.0, epsilon = 1e-2);
        assert_abs_diff_eq!(at(3.0), 4.0 - 2.0 * 2f64.sqrt(), epsilon = 1e-2);
        let zero = riesz_potential(&ScalarField::zeros(&g), 0.5, &g).unwrap();
        assert!(zero.values.values().iter().all(|&v| v == 0.0));
        assert!(riesz_potential(&f, 1.0, &g).is_err());
        assert!(riesz_potential(&f, 0.0, &g).is_err());
    }

    #[test]
    fn riesz_in_the_plane_matches_disc_integral() {
        // ∫_{|y|<1} |y|^{α−2} dy = 2π/α
        let g = Grid::rectangle((-1.5, 1.5), (-1.5, 1.5), 1.0 / 128.0).unwrap();
        let f = ScalarField::from_fn(&g, |p| if p.norm() < 1.0 { 1.0 } else { 0.0 });
        let alpha = 1.0;
        let v = riesz_potential_at(&f, alpha, &g, Point::new2(1e-9, 1e-9)).unwrap();
        let exact = 2.0 * std::f64::consts::PI / alpha;
        assert!((v - exact).abs() / exact < 2e-2, "{v} vs {exact}");
    }

    #[test]
    fn riesz_commutator_examples() {
        let g = Grid::interval(-2.0, 2.0, 1e-3).unwrap();
        let f = chi(&g, 0.0, 1.0);
        let out = riesz_commutator(&sign(&g), &f, 0.5, &g).unwrap();
        let v = out.values.value_at(&g, Point::new1(-1.0)).unwrap();
        assert_abs_diff_eq!(v, 4.0 - 4.0 * 2f64.sqrt(), epsilon = 1e-2);

        let c = riesz_commutator(&ScalarField::constant(&g, 3.7), &f, 0.5, &g).unwrap();
        assert!(c.values.values().iter().all(|&v| v == 0.0));

        // odd b, even f, at x = 0 with b(0) = 0
        let g = Grid::interval(-2.0, 2.0, 1e-3).unwrap();
        let b = ScalarField::from_fn(&g, |p| p.x().powi(3));
        let fe = ScalarField::from_fn(&g, |p| (-p.x() * p.x()).exp());
        let out = riesz_commutator(&b, &fe, 0.5, &g).unwrap();
        // the grid is symmetric about 0, so take the mean of the two central cells
        let l = out.values.value_at(&g, Point::new1(-5e-4)).unwrap();
        let r = out.values.value_at(&g, Point::new1(5e-4)).unwrap();
        assert!((l + r).abs() <= 1e-6 * out.values.sup_norm(&g).max(1.0));
    }

    #[test]
    fn riesz_commutator_is_linear_in_b() {
        let g = Grid::interval(-2.0, 2.0, 1e-2).unwrap();
        let f = chi(&g, -0.5, 1.2);
        let b1 = ScalarField::from_fn(&g, |p| p.x().sin());
        let b2 = ScalarField::from_fn(&g, |p| p.x().abs().sqrt());
        let sum = riesz_commutator(&b1.add(&b2), &f, 0.3, &g).unwrap().values;
        let parts = riesz_commutator(&b1, &f, 0.3, &g)
            .unwrap()
            .values
            .add(&riesz_commutator(&b2, &f, 0.3, &g).unwrap().values);
        for (a, b) in sum.values().iter().zip(parts.values()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn sharp_maximal_examples() {
        let g = Grid::interval(-2.0, 2.0, 1e-3).unwrap();
        let radii = linear_radii(0.01, 2.0, 200);
        let fam = family(&g, radii.clone());
        let c = sharp_maximal(&ScalarField::constant(&g, 2.5), &g, &fam).unwrap();
        assert!(c.values.sup_norm(&g) < 1e-12);
        let (s, _) = sharp_maximal_at(&sign(&g), &g, &radii, Point::new1(0.0)).unwrap();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-2);
        let x = ScalarField::from_fn(&g, |p| p.x());
        let (s, r) =
            sharp_maximal_at(&x, &g, &linear_radii(0.01, 1.5, 150), Point::new1(0.0)).unwrap();
        assert_abs_diff_eq!(s, 0.75, epsilon = 1e-2);
        assert_abs_diff_eq!(r, 1.5, epsilon = 1e-9);
    }

    #[test]
    fn maximal_commutator_examples() {
        let g = Grid::interval(-2.0, 2.0, 1e-3).unwrap();
        let radii = linear_radii(0.01, 4.0, 400);
        let b = sign(&g);
        let (v, r) = maximal_commutator_at(
            &b,
            &ScalarField::constant(&g, 1.0),
            &g,
            &radii,
            Point::new1(1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(v, 2.0 / 3.0, epsilon = 1e-2);
        assert_abs_diff_eq!(r, 3.0, epsilon = 0.02);
        let (v, r) =
            maximal_commutator_at(&b, &chi(&g, -1.0, 1.0), &g, &radii, Point::new1(1.0)).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-2);
        assert_abs_diff_eq!(r, 2.0, epsilon = 0.02);
        let fam = family(&g, radii);
        let z = maximal_commutator(
            &ScalarField::constant(&g, 4.0),
            &chi(&g, -1.0, 1.0),
            &g,
            &fam,
        )
        .unwrap();
        assert_eq!(z.values.sup_norm(&g), 0.0);
    }

    #[test]
    fn maximal_commutator_matches_direct_ball_sums() {
        let g = Grid::interval(-2.0, 2.0, 1e-2).unwrap();
        let b = ScalarField::from_fn(&g, |p| p.x().cos());
        let f = ScalarField::from_fn(&g, |p| p.x() - 0.3);
        let radii = geometric_radii(0.03, 3.0, 1.4).unwrap();
        let x = Point::new1(0.555);
        let (v, _) = maximal_commutator_at(&b, &f, &g, &radii, x).unwrap();
        let xc = g.center(g.member_cell(x).unwrap());
        let bx = b.value_at(&g, x).unwrap();
        let direct = radii
            .iter()
            .map(|&r| {
                let cells = g.members().iter().filter(|&&c| g.center(c).dist(&xc) < r);
                let s: f64 = cells
                    .map(|&c| (bx - b.values()[c]).abs() * f.values()[c].abs())
                    .sum();
                s * g.cell_measure() / (2.0 * r)
            })
            .fold(0.0, f64::max);
        assert!((v - direct).abs() < 1e-12);
    }

    #[test]
    fn maximal_op_commutator_examples() {
        let g = Grid::interval(-2.0, 2.0, 1e-3).unwrap();
        let radii = linear_radii(0.005, 2.0, 400);
        let fam = family(&g, radii);
        let f = chi(&g, 0.0, 1.0);
        let c = maximal_op_commutator(&ScalarField::constant(&g, 2.0), &f, &g, &fam).unwrap();
        assert!(c.values.sup_norm(&g) < 1e-12);
        let z = maximal_op_commutator(&sign(&g), &ScalarField::zeros(&g), &g, &fam).unwrap();
        assert_eq!(z.values.sup_norm(&g), 0.0);
        let s = maximal_op_commutator(&sign(&g), &f, &g, &fam).unwrap();
        assert_abs_diff_eq!(
            s.values.value_at(&g, Point::new1(0.5)).unwrap(),
            0.0,
            epsilon = 1e-2
        );
        assert!(s.values.value_at(&g, Point::new1(-0.5)).unwrap() > 0.1);
    }

    #[test]
    fn bmo_examples() {
        let g = Grid::interval(-2.0, 2.0, 1e-3).unwrap();
        let p = ExponentField::constant(&g, 2.0).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        let fam = BallFamily::new(&g, vec![Point::new1(0.0)], linear_radii(0.05, 2.0, 40)).unwrap();
        let r = bmo_norms(&ScalarField::constant(&g, 3.0), &p, &one, &g, &fam).unwrap();
        assert_eq!((r.bmo_norm, r.bmo_pw_norm, r.ratio), (0.0, 0.0, None));
        let r = bmo_norms(&sign(&g), &p, &one, &g, &fam).unwrap();
        assert_abs_diff_eq!(r.bmo_norm, 1.0, epsilon = 1e-2);
        assert_abs_diff_eq!(r.bmo_pw_norm, 1.0, epsilon = 1e-2);
        let x = ScalarField::from_fn(&g, |p| p.x());
        assert_abs_diff_eq!(bmo_norm(&x, &g, &fam).unwrap(), 1.0, epsilon = 1e-2);
    }

    #[test]
    fn sharp_is_dominated_by_twice_the_maximal_function() {
        let g = Grid::interval(-2.0, 2.0, 5e-3).unwrap();
        let f = ScalarField::from_fn(&g, |p| {
            (4.0 * p.x()).sin() + if p.x() > 0.3 { 1.0 } else { 0.0 }
        });
        let fam = family(&g, geometric_radii(0.02, 2.0, 1.2).unwrap());
        let s = sharp_maximal(&f, &g, &fam).unwrap();
        let m = maximal(&f, &g, &fam).unwrap();
        for &c in g.members() {
            assert!(s.values.values()[c] <= 2.0 * m.values.values()[c] + 1e-12);
        }
    }

    #[test]
    fn maximal_is_sublinear() {
        let g = Grid::interval(-2.0, 2.0, 5e-3).unwrap();
        let f = ScalarField::from_fn(&g, |p| (3.0 * p.x()).cos());
        let h = chi(&g, -0.4, 0.9).scale(-2.0);
        let fam = family(&g, geometric_radii(0.02, 2.0, 1.2).unwrap());
        let lhs = maximal(&f.add(&h), &g, &fam).unwrap().values;
        let rhs = maximal(&f, &g, &fam)
            .unwrap()
            .values
            .add(&maximal(&h, &g, &fam).unwrap().values);
        for &c in g.members() {
            assert!(lhs.values()[c] <= rhs.values()[c] + 1e-12);
        }
    }
}
