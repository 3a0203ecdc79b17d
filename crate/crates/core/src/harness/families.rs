//! Seeded test-function families.
//!
//! Function `i` draws its parameters from a ChaCha8 stream keyed by `(seed, i)`,
//! so a family is independent of thread count and of the grid it is sampled on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{FamilyKind, FamilySpec};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Grid, Point};

/// Gaussians are cut to zero beyond this many standard deviations.
const GAUSSIAN_CUTOFF: f64 = 8.0;

/// Margin below `n/p₊` kept by power-bump exponents.
pub const BUMP_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunction {
    Zero,
    /// `amplitude·χ_{B(center, radius)}`
    Indicator {
        center: Point,
        radius: f64,
        amplitude: f64,
    },
    /// Piecewise constant on equal slabs of `B(center, radius)` along `x₁`.
    Step {
        center: Point,
        radius: f64,
        levels: Vec<f64>,
    },
    /// `amplitude·|x − center|^{−β}·χ_{B(center, radius)}`
    PowerBump {
        center: Point,
        radius: f64,
        beta: f64,
        amplitude: f64,
    },
    Gaussian {
        center: Point,
        sigma: f64,
        amplitude: f64,
    },
}

impl TestFunction {
    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Zero => "zero",
            TestFunction::Indicator { .. } => "indicator",
            TestFunction::Step { .. } => "step",
            TestFunction::PowerBump { .. } => "power_bump",
            TestFunction::Gaussian { .. } => "gaussian",
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        match self {
            TestFunction::Zero => 0.0,
            TestFunction::Indicator {
                center,
                radius,
                amplitude,
            } => {
                if x.dist2(center) < radius * radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            TestFunction::Step {
                center,
                radius,
                levels,
            } => {
                if x.dist2(center) >= radius * radius {
                    return 0.0;
                }
                let u = (x.x() - center.x() + radius) / (2.0 * radius);
                let k = ((u * levels.len() as f64).floor() as usize).min(levels.len() - 1);
                levels[k]
            }
            TestFunction::PowerBump {
                center,
                radius,
                beta,
                amplitude,
            } => {
                let d = x.dist(center);
                if d < *radius && d > 0.0 {
                    amplitude * d.powf(-beta)
                } else {
                    0.0
                }
            }
            TestFunction::Gaussian {
                center,
                sigma,
                amplitude,
            } => {
                let d2 = x.dist2(center);
                if d2 < (GAUSSIAN_CUTOFF * sigma).powi(2) {
                    amplitude * (-0.5 * d2 / (sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, grid: &Grid) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.eval(x))
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn amplitude(rng: &mut ChaCha8Rng) -> f64 {
    let a = log_uniform(rng, 0.5, 2.0);
    if rng.random_bool(0.5) {
        a
    } else {
        -a
    }
}

/// `dim` is the space dimension, `p_plus` bounds the power-bump exponents.
pub fn generate(
    spec: &FamilySpec,
    seed: u64,
    window: &[[f64; 2]],
    p_plus: f64,
) -> Result<Vec<TestFunction>> {
    let dim = window.len();
    let width = window
        .iter()
        .map(|[lo, hi]| hi - lo)
        .fold(f64::INFINITY, f64::min);
    if !(width > 0.0) {
        return Err(Error::Config("empty test-function window".into()));
    }
    let beta_max = dim as f64 / p_plus - BUMP_MARGIN;
    if !(beta_max > 0.0) {
        return Err(Error::Config(format!(
            "no integrable power bump for p₊ = {p_plus}"
        )));
    }
    let mut out = Vec::with_capacity(spec.count + 1);
    if spec.include_zero {
        out.push(TestFunction::Zero);
    }
    for i in 0..spec.count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut c = [0.0; 2];
        for (a, [lo, hi]) in window.iter().enumerate() {
            c[a] = rng.random_range(*lo..*hi);
        }
        let center = Point(c);
        let radius = log_uniform(&mut rng, width / 64.0, width / 4.0);
        let f = match spec.kinds[i % spec.kinds.len()] {
            FamilyKind::Indicator => TestFunction::Indicator {
                center,
                radius,
                amplitude: amplitude(&mut rng),
            },
            FamilyKind::Step => {
                let pieces = rng.random_range(2..=5);
                let levels = (0..pieces).map(|_| amplitude(&mut rng)).collect();
                TestFunction::Step {
                    center,
                    radius,
                    levels,
                }
            }
            FamilyKind::PowerBump => TestFunction::PowerBump {
                center,
                radius,
                beta: rng.random_range(0.05 * beta_max..beta_max),
                amplitude: amplitude(&mut rng),
            },
            FamilyKind::Gaussian => TestFunction::Gaussian {
                center,
                sigma: radius / 4.0,
                amplitude: amplitude(&mut rng),
            },
        };
        out.push(f);
    }
    Ok(out)
}
