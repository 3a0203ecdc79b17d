//! Variable exponents `p(·)` with their limit at infinity, structural
//! constants, conjugates and Sobolev exponents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{bail, Result};
use crate::grid::{Grid, Point};

/// Exponent values per cell plus the user-supplied limit `p(∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentField {
    values: Vec<f64>,
    p_infinity: f64,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentField {
    pub fn from_fn(grid: &Grid, p: impl Fn(Point) -> f64, p_infinity: f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|c| {
                if grid.is_member(c) {
                    p(grid.center(c))
                } else {
                    p_infinity
                }
            })
            .collect();
        Self::from_values(grid, values, p_infinity)
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>, p_infinity: f64) -> Result<Self> {
        if values.len() != grid.len() {
            bail!(
                Argument,
                "exponent has {} values for a grid of {} cells",
                values.len(),
                grid.len()
            );
        }
        if !p_infinity.is_finite() {
            bail!(Argument, "p(∞) must be finite, got {p_infinity}");
        }
        let mut p_minus = f64::INFINITY;
        let mut p_plus = f64::NEG_INFINITY;
        for &c in grid.members() {
            let v = values[c];
            if !v.is_finite() {
                bail!(Numeric, "exponent value {v} at cell {c}");
            }
            p_minus = p_minus.min(v);
            p_plus = p_plus.max(v);
        }
        Ok(ExponentField {
            values,
            p_infinity,
            p_minus,
            p_plus,
        })
    }

    /// `p ≡ p0` with `p(∞) = p0`.
    pub fn constant(grid: &Grid, p0: f64) -> Result<Self> {
        Self::from_values(grid, vec![p0; grid.len()], p0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p_infinity(&self) -> f64 {
        self.p_infinity
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    pub fn value_at(&self, grid: &Grid, x: Point) -> Result<f64> {
        Ok(self.values[grid.member_cell(x)?])
    }

    /// Checks `1 < p₋ ≤ p(x) ≤ p₊ < ∞` and `p(∞) > 1`.
    pub fn check_bounds(&self) -> Result<()> {
        if !(self.p_minus > 1.0) {
            bail!(
                Invariant,
                "exponent must exceed 1 everywhere; p₋ = {}",
                self.p_minus
            );
        }
        if !(self.p_infinity > 1.0) {
            bail!(Invariant, "p(∞) must exceed 1, got {}", self.p_infinity);
        }
        Ok(())
    }

    /// `n/p(x)` for `r ≤ 1` and `n/p(∞)` for `r > 1`.
    pub fn theta(&self, grid: &Grid, x: Point, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            bail!(Argument, "radius must be positive, got {r}");
        }
        let n = grid.dim() as f64;
        if r <= 1.0 {
            Ok(n / self.value_at(grid, x)?)
        } else {
            Ok(n / self.p_infinity)
        }
    }

    fn map_checked(&self, grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::from_values(grid, values, f(self.p_infinity))
    }
}

/// Summary constants of an exponent on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    pub p_minus: f64,
    pub p_plus: f64,
    /// Local log-Hölder constant estimate; grows without bound under
    /// refinement for discontinuous exponents.
    pub log_holder_a: f64,
    /// Decay constant towards `p(∞)`.
    pub decay_a: f64,
}

/// Controls how the log-Hölder sup over pairs is estimated.
#[derive(Clone, Copy, Debug)]
pub struct LogHolderEstimator {
    /// Pair counts up to this value are enumerated exhaustively.
    pub exhaustive_pairs: usize,
    /// Number of random pairs drawn otherwise.
    pub samples: usize,
    pub seed: u64,
}

impl Default for LogHolderEstimator {
    fn default() -> Self {
        LogHolderEstimator {
            exhaustive_pairs: 20_000_000,
            samples: 1_000_000,
            seed: 0x5eed,
        }
    }
}

const LOG_HOLDER_RANGE: f64 = 0.5;

pub fn analyze(p: &ExponentField, grid: &Grid) -> Result<ExponentReport> {
    LogHolderEstimator::default().analyze(p, grid)
}

impl LogHolderEstimator {
    pub fn analyze(&self, p: &ExponentField, grid: &Grid) -> Result<ExponentReport> {
        p.check_bounds()?;
        let decay_a = grid
            .members()
            .iter()
            .map(|&c| (p.values[c] - p.p_infinity).abs() * (2.0 + grid.center(c).norm()).ln())
            .fold(0.0, f64::max);
        Ok(ExponentReport {
            p_minus: p.p_minus,
            p_plus: p.p_plus,
            log_holder_a: self.log_holder(p, grid),
            decay_a,
        })
    }

    fn log_holder(&self, p: &ExponentField, grid: &Grid) -> f64 {
        let h = grid.spacing();
        let reach = (LOG_HOLDER_RANGE / h).floor() as isize;
        // half-plane of offsets so that each unordered pair is visited once
        let mut offsets = Vec::new();
        let ry = if grid.dim() == 2 { reach } else { 0 };
        for dy in 0..=ry {
            for dx in -reach..=reach {
                if dy == 0 && dx <= 0 {
                    continue;
                }
                let d = h * ((dx * dx + dy * dy) as f64).sqrt();
                if d <= LOG_HOLDER_RANGE {
                    offsets.push((dx, dy, d));
                }
            }
        }
        let [nx, ny] = grid.shape();
        let pair_value = |c: usize, dx: isize, dy: isize, d: f64| -> f64 {
            let (ix, iy) = grid.coords(c);
            let jx = ix as isize + dx;
            let jy = iy as isize + dy;
            if jx < 0 || jy < 0 || jx >= nx as isize || jy >= ny as isize {
                return 0.0;
            }
            let j = grid.index(jx as usize, jy as usize);
            if !grid.is_member(j) {
                return 0.0;
            }
            (p.values[c] - p.values[j]).abs() * (-d.ln())
        };
        let total = grid.members().len().saturating_mul(offsets.len());
        if total <= self.exhaustive_pairs {
            let mut best = 0.0f64;
            for &c in grid.members() {
                for &(dx, dy, d) in &offsets {
                    best = best.max(pair_value(c, dx, dy, d));
                }
            }
            return best;
        }
        // nearest-neighbour pairs catch jumps; random pairs cover the rest
        let mut best = 0.0f64;
        let near: Vec<_> = offsets.iter().filter(|o| o.2 <= 1.5 * h).copied().collect();
        for &c in grid.members() {
            for &(dx, dy, d) in &near {
                best = best.max(pair_value(c, dx, dy, d));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let members = grid.members();
        for _ in 0..self.samples {
            let c = members[rng.random_range(0..members.len())];
            let (dx, dy, d) = offsets[rng.random_range(0..offsets.len())];
            best = best.max(pair_value(c, dx, dy, d));
        }
        best
    }
}

/// Pointwise `p' = p/(p-1)`, including `p(∞)`.
pub fn conjugate(p: &ExponentField, grid: &Grid) -> Result<ExponentField> {
    for &c in grid.members() {
        if !(p.values[c] > 1.0) {
            bail!(
                Domain,
                "conjugate exponent undefined where p = {} ≤ 1 (cell {c})",
                p.values[c]
            );
        }
    }
    if !(p.p_infinity > 1.0) {
        bail!(
            Domain,
            "conjugate exponent undefined for p(∞) = {}",
            p.p_infinity
        );
    }
    p.map_checked(grid, |v| v / (v - 1.0))
}

fn check_order(alpha: f64, n: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < n as f64) {
        bail!(Argument, "order α = {alpha} must lie in (0, {n})");
    }
    Ok(())
}

/// Sobolev exponent `1/q = 1/p − α/n`.
pub fn sobolev_exponent(p: &ExponentField, alpha: f64, grid: &Grid) -> Result<ExponentField> {
    let n = grid.dim();
    check_order(alpha, n)?;
    let bound = n as f64 / alpha;
    if p.p_plus >= bound {
        bail!(
            Precondition,
            "p₊ = {} must be below n/α = {bound}",
            p.p_plus
        );
    }
    if p.p_infinity >= bound {
        bail!(
            Precondition,
            "p(∞) = {} must be below n/α = {bound}",
            p.p_infinity
        );
    }
    let shift = alpha / n as f64;
    p.map_checked(grid, |v| 1.0 / (1.0 / v - shift))
}

/// Inverse of [`sobolev_exponent`]: `1/p = 1/q + α/n`.
pub fn sobolev_preimage(q: &ExponentField, alpha: f64, grid: &Grid) -> Result<ExponentField> {
    let n = grid.dim();
    check_order(alpha, n)?;
    let shift = alpha / n as f64;
    q.map_checked(grid, |v| 1.0 / (1.0 / v + shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn line(h: f64) -> Grid {
        Grid::interval(-2.0, 2.0, h).unwrap()
    }

    // independent oracle: plain double loop over every member pair
    fn brute_force_log_holder(p: &ExponentField, grid: &Grid) -> f64 {
        let m = grid.members();
        let mut best = 0.0f64;
        for (a, &i) in m.iter().enumerate() {
            for &j in &m[a + 1..] {
                let d = grid.center(i).dist(&grid.center(j));
                if d > 0.0 && d <= 0.5 {
                    best = best.max((p.values()[i] - p.values()[j]).abs() * -d.ln());
                }
            }
        }
        best
    }

    #[test]
    fn constant_exponent_has_zero_constants() {
        let g = line(1e-2);
        let p = ExponentField::constant(&g, 2.0).unwrap();
        let r = analyze(&p, &g).unwrap();
        assert_eq!(
            (r.p_minus, r.p_plus, r.log_holder_a, r.decay_a),
            (2.0, 2.0, 0.0, 0.0)
        );
    }

    #[test]
    fn smooth_exponent_matches_brute_force_pair_sup() {
        let g = line(1e-2);
        let p = ExponentField::from_fn(&g, |x| 2.0 + x.x().sin() / 4.0, 2.0).unwrap();
        let r = analyze(&p, &g).unwrap();
        let oracle = brute_force_log_holder(&p, &g);
        assert!(r.log_holder_a.is_finite());
        assert_relative_eq!(r.log_holder_a, oracle, max_relative = 1e-12);
        let top = g
            .members()
            .iter()
            .map(|&c| 2.0 + g.center(c).x().sin() / 4.0)
            .fold(f64::MIN, f64::max);
        assert_eq!(r.p_plus, top);
    }

    #[test]
    fn jump_exponent_constant_grows_like_log_of_spacing() {
        let mut prev = 0.0;
        for k in [4, 5, 6, 7] {
            let h = 2f64.powi(-k);
            let g = line(h);
            let p =
                ExponentField::from_fn(&g, |x| if x.x() > 0.0 { 3.0 } else { 2.0 }, 2.5).unwrap();
            let a = analyze(&p, &g).unwrap().log_holder_a;
            assert!(a >= -h.ln() - 1e-12, "A({h}) = {a}");
            if prev > 0.0 {
                assert!(a >= prev + 2f64.ln() - 1e-9);
            }
            prev = a;
        }
    }

    #[test]
    fn sampling_path_still_sees_the_jump() {
        let h = 2f64.powi(-12);
        let g = line(h);
        let p = ExponentField::from_fn(&g, |x| if x.x() > 0.0 { 3.0 } else { 2.0 }, 2.5).unwrap();
        let est = LogHolderEstimator {
            exhaustive_pairs: 1000,
            samples: 10_000,
            seed: 1,
        };
        let a = est.analyze(&p, &g).unwrap().log_holder_a;
        assert_abs_diff_eq!(a, -h.ln(), epsilon = 1e-9);
    }

    #[test]
    fn decay_constant_of_decaying_exponent() {
        let g = line(1e-2);
        let p = ExponentField::from_fn(&g, |x| 2.0 + 1.0 / (1.0 + x.x() * x.x()), 2.0).unwrap();
        let r = analyze(&p, &g).unwrap();
        let oracle = g
            .members()
            .iter()
            .map(|&c| {
                let x = g.center(c).x();
                (1.0 / (1.0 + x * x)) * (2.0 + x.abs()).ln()
            })
            .fold(0.0, f64::max);
        assert_relative_eq!(r.decay_a, oracle, max_relative = 1e-12);
    }

    #[test]
    fn exponent_at_most_one_is_rejected() {
        let g = line(1e-1);
        let p = ExponentField::from_fn(&g, |x| 0.9 + x.x().abs(), 2.0).unwrap();
        assert!(matches!(analyze(&p, &g), Err(crate::Error::Invariant(_))));
        let one = ExponentField::constant(&g, 1.0).unwrap();
        assert!(conjugate(&one, &g).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let g = line(1e-1);
        let two = conjugate(&ExponentField::constant(&g, 2.0).unwrap(), &g).unwrap();
        assert!(two.values().iter().all(|&v| v == 2.0));
        let four = conjugate(&ExponentField::constant(&g, 4.0).unwrap(), &g).unwrap();
        assert_relative_eq!(four.p_minus(), 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(four.p_infinity(), 4.0 / 3.0, max_relative = 1e-15);
        let step =
            ExponentField::from_fn(&g, |x| if x.x() > 0.0 { 3.0 } else { 2.0 }, 3.0).unwrap();
        let c = conjugate(&step, &g).unwrap();
        for &m in g.members() {
            let expect = if g.center(m).x() > 0.0 { 1.5 } else { 2.0 };
            assert_relative_eq!(c.values()[m], expect, max_relative = 1e-15);
        }
    }

    #[test]
    fn sobolev_examples() {
        let g1 = line(1e-1);
        let p = ExponentField::constant(&g1, 2.0).unwrap();
        let q = sobolev_exponent(&p, 0.25, &g1).unwrap();
        assert_relative_eq!(q.p_minus(), 4.0, max_relative = 1e-14);
        // 3 < 4 = n/α is admissible and gives 1/q = 1/3 − 1/4
        let p3 = ExponentField::constant(&g1, 3.0).unwrap();
        assert_relative_eq!(
            sobolev_exponent(&p3, 0.25, &g1).unwrap().p_plus(),
            12.0,
            max_relative = 1e-13
        );
        let p4 = ExponentField::constant(&g1, 4.0).unwrap();
        assert!(matches!(
            sobolev_exponent(&p4, 0.25, &g1),
            Err(crate::Error::Precondition(_))
        ));
        assert!(matches!(
            sobolev_exponent(&p, 1.0, &g1),
            Err(crate::Error::Argument(_))
        ));
        assert!(matches!(
            sobolev_exponent(&p, 0.0, &g1),
            Err(crate::Error::Argument(_))
        ));
    }

    #[test]
    fn theta_switches_at_unit_radius() {
        let g = line(1e-1);
        let p = ExponentField::from_values(&g, vec![2.0; g.len()], 3.0).unwrap();
        let x = Point::new1(0.05);
        assert_eq!(p.theta(&g, x, 0.5).unwrap(), 0.5);
        assert_eq!(p.theta(&g, x, 1.0).unwrap(), 0.5);
        assert_relative_eq!(p.theta(&g, x, 2.0).unwrap(), 1.0 / 3.0);
        let p2 = ExponentField::constant(&g, 2.0).unwrap();
        assert_eq!(p2.theta(&g, x, 2.0).unwrap(), 0.5);
        assert!(p.theta(&g, x, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conjugate_is_an_involution(base in 1.2f64..5.0, amp in 0.0f64..0.19, freq in 0.1f64..4.0) {
                let g = line(0.05);
                let p = ExponentField::from_fn(&g, |x| base + amp * (freq * x.x()).sin(), base).unwrap();
                let pc = conjugate(&p, &g).unwrap();
                let pcc = conjugate(&pc, &g).unwrap();
                for &c in g.members() {
                    let (a, b) = (p.values()[c], pc.values()[c]);
                    prop_assert!((1.0 / a + 1.0 / b - 1.0).abs() < 1e-12);
                    prop_assert!((pcc.values()[c] - a).abs() <= 1e-12 * a);
                }
            }

            #[test]
            fn sobolev_round_trip(base in 1.1f64..3.5, amp in 0.0f64..0.09, alpha in 0.01f64..0.2) {
                let g = line(0.05);
                let p = ExponentField::from_fn(&g, |x| base + amp * x.x().cos(), base).unwrap();
                prop_assume!(p.p_plus() < 1.0 / alpha);
                let q = sobolev_exponent(&p, alpha, &g).unwrap();
                let back = sobolev_preimage(&q, alpha, &g).unwrap();
                for &c in g.members() {
                    prop_assert!((back.values()[c] - p.values()[c]).abs() <= 1e-12 * p.values()[c]);
                    prop_assert!(q.values()[c] > p.values()[c]);
                }
            }
        }
    }
}
