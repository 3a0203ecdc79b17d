//! Uniform cell grids over an open set, truncated balls and midpoint quadrature.
//!
//! A [`Grid`] covers an axis-aligned extent with square cells of side `h`.
//! A membership mask marks the cells that belong to the open set; every
//! local quantity is taken over the member cells whose centers lie strictly
//! inside a ball.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::field::ScalarField;

/// A point in one or two dimensions. The second coordinate is zero in 1D.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point(pub [f64; 2]);

impl Point {
    pub fn new1(x: f64) -> Self {
        Point([x, 0.0])
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Point([x, y])
    }

    /// Builds a point from a coordinate slice of length 1 or 2.
    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        match coords {
            [x] => Ok(Point::new1(*x)),
            [x, y] => Ok(Point::new2(*x, *y)),
            _ => bail!(
                Argument,
                "points have 1 or 2 coordinates, got {}",
                coords.len()
            ),
        }
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.0[0] - other.0[0];
        let dy = self.0[1] - other.0[1];
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.dist(&Point::default())
    }
}

/// Full Lebesgue measure of a ball of radius `r` in dimension `dim`.
pub fn ball_measure(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0 * r,
        _ => std::f64::consts::PI * r * r,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            bail!(
                Argument,
                "ball radius must be positive and finite, got {radius}"
            );
        }
        Ok(Ball { center, radius })
    }

    /// Measure of the untruncated ball.
    pub fn measure(&self, dim: usize) -> f64 {
        ball_measure(dim, self.radius)
    }
}

/// Contiguous run of cells `start..end` in one grid row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub row: usize,
    pub start: usize,
    pub end: usize,
}

/// A set of member cells of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    cells: Vec<usize>,
    cell_measure: f64,
}

impl Region {
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.cell_measure
    }

    /// True if every cell of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &Region) -> bool {
        // both index lists are sorted
        let mut it = other.cells.iter().peekable();
        'outer: for c in &self.cells {
            while let Some(&&o) = it.peek() {
                if o == *c {
                    it.next();
                    continue 'outer;
                }
                if o > *c {
                    return false;
                }
                it.next();
            }
            return false;
        }
        true
    }
}

/// Uniform grid over an axis-aligned extent with a membership mask.
#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
    h: f64,
    lower: [f64; 2],
    shape: [usize; 2],
    member: Vec<bool>,
    members: Vec<usize>,
}

impl Grid {
    /// Grid with every cell of the extent in the open set. `extent` holds one
    /// `(lo, hi)` pair per axis; the cell count per axis is `round((hi-lo)/h)`.
    pub fn new(h: f64, extent: &[(f64, f64)]) -> Result<Self> {
        let dim = extent.len();
        if dim != 1 && dim != 2 {
            bail!(Argument, "grid dimension must be 1 or 2, got {dim}");
        }
        if !(h > 0.0 && h.is_finite()) {
            bail!(Argument, "grid spacing must be positive, got {h}");
        }
        let mut lower = [0.0; 2];
        let mut shape = [1usize; 2];
        for (axis, &(lo, hi)) in extent.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                bail!(
                    Argument,
                    "axis {axis} extent ({lo}, {hi}) is empty or non-finite"
                );
            }
            let n = ((hi - lo) / h).round();
            if !(1.0..=1e8).contains(&n) {
                bail!(Argument, "axis {axis} would have {n} cells");
            }
            lower[axis] = lo;
            shape[axis] = n as usize;
        }
        let len = shape[0] * shape[1];
        Ok(Grid {
            dim,
            h,
            lower,
            shape,
            member: vec![true; len],
            members: (0..len).collect(),
        })
    }

    /// Convenience constructor for an interval `(lo, hi)`.
    pub fn interval(lo: f64, hi: f64, h: f64) -> Result<Self> {
        Grid::new(h, &[(lo, hi)])
    }

    /// Convenience constructor for the rectangle `(x0, x1) × (y0, y1)`.
    pub fn rectangle(x: (f64, f64), y: (f64, f64), h: f64) -> Result<Self> {
        Grid::new(h, &[x, y])
    }

    /// Restricts the open set to cells whose centers satisfy `keep`.
    pub fn with_mask(mut self, keep: impl Fn(Point) -> bool) -> Result<Self> {
        for i in 0..self.len() {
            self.member[i] = keep(self.center(i));
        }
        self.members = (0..self.len()).filter(|&i| self.member[i]).collect();
        if self.members.is_empty() {
            bail!(Argument, "mask removes every cell from the grid");
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// `hⁿ`
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Total number of cells, members or not.
    pub fn len(&self) -> usize {
        self.member.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member.is_empty()
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn extent(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|a| (self.lower[a], self.lower[a] + self.shape[a] as f64 * self.h))
            .collect()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_member(&self, cell: usize) -> bool {
        self.member[cell]
    }

    pub fn member_mask(&self) -> &[bool] {
        &self.member
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.shape[0] + ix
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.shape[0], cell / self.shape[0])
    }

    fn axis_center(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i as f64 + 0.5) * self.h
    }

    pub fn center(&self, cell: usize) -> Point {
        let (ix, iy) = self.coords(cell);
        if self.dim == 1 {
            Point::new1(self.axis_center(0, ix))
        } else {
            Point::new2(self.axis_center(0, ix), self.axis_center(1, iy))
        }
    }

    /// Cell whose closed-open box contains `p`, if inside the extent.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let mut idx = [0usize; 2];
        for (axis, slot) in idx.iter_mut().enumerate().take(self.dim) {
            let t = (p.0[axis] - self.lower[axis]) / self.h;
            if !(t >= 0.0) || t >= self.shape[axis] as f64 {
                return None;
            }
            *slot = t.floor() as usize;
        }
        Some(self.index(idx[0], idx[1]))
    }

    /// Member cell containing `p`, or a domain error.
    pub fn member_cell(&self, p: Point) -> Result<usize> {
        match self.locate(p) {
            Some(c) if self.member[c] => Ok(c),
            _ => bail!(
                Domain,
                "point {:?} is not in the open set",
                &p.0[..self.dim]
            ),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.member_cell(p).is_ok()
    }

    /// Row spans (over all cells, members or not) whose centers lie strictly
    /// inside the ball `B(center, r)`.
    pub fn ball_spans(&self, center: Point, r: f64) -> Vec<Span> {
        let r2 = r * r;
        let mut spans = Vec::new();
        let rows = if self.dim == 1 {
            0..1
        } else {
            let (lo, hi) = self.axis_range(1, center.y(), r);
            lo..hi
        };
        for iy in rows {
            let dy = if self.dim == 1 {
                0.0
            } else {
                self.axis_center(1, iy) - center.y()
            };
            let rem = r2 - dy * dy;
            if rem <= 0.0 {
                continue;
            }
            let inside = |ix: usize| {
                let dx = self.axis_center(0, ix) - center.x();
                dx * dx + dy * dy < r2
            };
            let (mut start, mut end) = self.axis_range(0, center.x(), rem.sqrt());
            // tighten to the exact strict predicate
            while start > 0 && inside(start - 1) {
                start -= 1;
            }
            while end < self.shape[0] && inside(end) {
                end += 1;
            }
            while start < end && !inside(start) {
                start += 1;
            }
            while end > start && !inside(end - 1) {
                end -= 1;
            }
            if start < end {
                spans.push(Span {
                    row: iy,
                    start,
                    end,
                });
            }
        }
        spans
    }

    /// Approximate index range of cells on `axis` whose centers are within
    /// `half` of `c`, clamped to the grid.
    fn axis_range(&self, axis: usize, c: f64, half: f64) -> (usize, usize) {
        let n = self.shape[axis] as f64;
        let lo = ((c - half - self.lower[axis]) / self.h - 0.5)
            .floor()
            .clamp(0.0, n);
        let hi = ((c + half - self.lower[axis]) / self.h + 0.5)
            .ceil()
            .clamp(0.0, n);
        (lo as usize, hi as usize)
    }

    /// Member cells inside a ball, sorted by index.
    pub fn spans_region(&self, spans: &[Span]) -> Region {
        let mut cells = Vec::new();
        for s in spans {
            for ix in s.start..s.end {
                let c = self.index(ix, s.row);
                if self.member[c] {
                    cells.push(c);
                }
            }
        }
        Region {
            cells,
            cell_measure: self.cell_measure(),
        }
    }

    /// The whole open set as a region.
    pub fn full_region(&self) -> Region {
        Region {
            cells: self.members.clone(),
            cell_measure: self.cell_measure(),
        }
    }

    /// Region from an explicit list of member cells.
    pub fn region_from_cells(&self, mut cells: Vec<usize>) -> Result<Region> {
        cells.sort_unstable();
        cells.dedup();
        if let Some(&bad) = cells.iter().find(|&&c| c >= self.len() || !self.member[c]) {
            bail!(Argument, "cell {bad} is not a member of the grid");
        }
        Ok(Region {
            cells,
            cell_measure: self.cell_measure(),
        })
    }

    /// Member cells with centers in the axis-aligned box `lo < x < hi`.
    pub fn box_region(&self, lo: &[f64], hi: &[f64]) -> Region {
        let cells = self
            .members
            .iter()
            .copied()
            .filter(|&c| {
                let p = self.center(c);
                (0..self.dim).all(|a| p.0[a] > lo[a] && p.0[a] < hi[a])
            })
            .collect();
        Region {
            cells,
            cell_measure: self.cell_measure(),
        }
    }

    /// Same geometry with spacing divided by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let g = Grid::new(self.h / factor as f64, &self.extent())?;
        let parent = self.clone();
        g.with_mask(move |p| parent.locate(p).map(|c| parent.member[c]).unwrap_or(false))
    }
}

/// `B̃(x,r) = B(x,r) ∩ Ω` as a region of member cells.
pub fn ball_region(grid: &Grid, ball: &Ball) -> Result<Region> {
    if !(ball.radius > 0.0) {
        bail!(
            Argument,
            "ball radius must be positive, got {}",
            ball.radius
        );
    }
    grid.member_cell(ball.center)?;
    Ok(grid.spans_region(&grid.ball_spans(ball.center, ball.radius)))
}

/// Midpoint rule `hⁿ Σ_{cells in region} f(cell)`.
pub fn integrate(grid: &Grid, field: &ScalarField, region: &Region) -> Result<f64> {
    let v = field.values();
    let mut sum = 0.0;
    for &c in region.cells() {
        let x = v[c];
        if !x.is_finite() {
            bail!(Numeric, "field value {x} at cell {c}");
        }
        sum += x;
    }
    Ok(sum * grid.cell_measure())
}

/// Per-row prefix sums of a field restricted to member cells. Gives the
/// integral over any ball in O(rows) using [`Grid::ball_spans`].
#[derive(Clone, Debug)]
pub struct BallSums {
    row_len: usize,
    sums: Vec<f64>,
    counts: Vec<u32>,
    cell_measure: f64,
}

impl BallSums {
    pub fn new(grid: &Grid, values: &[f64]) -> Self {
        let [nx, ny] = grid.shape();
        let row_len = nx + 1;
        let mut sums = vec![0.0; row_len * ny];
        let mut counts = vec![0u32; row_len * ny];
        for iy in 0..ny {
            let base = iy * row_len;
            for ix in 0..nx {
                let c = grid.index(ix, iy);
                let (v, m) = if grid.is_member(c) {
                    (values[c], 1)
                } else {
                    (0.0, 0)
                };
                sums[base + ix + 1] = sums[base + ix] + v;
                counts[base + ix + 1] = counts[base + ix] + m;
            }
        }
        BallSums {
            row_len,
            sums,
            counts,
            cell_measure: grid.cell_measure(),
        }
    }

    /// `(∫_region f, member count)` over the cells covered by `spans`.
    pub fn integral(&self, spans: &[Span]) -> (f64, usize) {
        let mut s = 0.0;
        let mut n = 0usize;
        for sp in spans {
            let base = sp.row * self.row_len;
            s += self.sums[base + sp.end] - self.sums[base + sp.start];
            n += (self.counts[base + sp.end] - self.counts[base + sp.start]) as usize;
        }
        (s * self.cell_measure, n)
    }
}
