//! Uniform grids on boxes and nodal functions on them.
//!
//! Nodes sit at `lo + j h` on every axis and are numbered row-major (last
//! axis fastest). Cells are the `(count - 1)`-per-axis lattice of grid
//! boxes, also row-major, each identified by its lower corner. Gradients
//! are forward differences from that corner; cell values of a nodal function
//! are averages of the `2^n` corners, so both live at the cell center.
//!
//! Measures of super-level sets count nodes; integrals use cell quadrature.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::exponents::Exponent;
use crate::real::{abs, pow, round, sqrt};

/// A closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Uniform rectangular grid with the same spacing on every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    bounds: Vec<Interval>,
    h: f64,
    counts: Vec<usize>,
    strides: Vec<usize>,
}

const DIVISIBILITY_TOL: f64 = 1e-9;

impl Grid {
    /// Builds the grid on `bounds` with spacing `h`; every side length must be
    /// an integer multiple of `h` to within a relative `1e-9`.
    pub fn new(bounds: &[Interval], h: f64) -> Result<Self> {
        if bounds.is_empty() {
            bail!(Config, "grid needs at least one axis");
        }
        if !(h > 0.0) || !h.is_finite() {
            bail!(Config, "grid spacing must be positive, got {h}");
        }
        let mut counts = Vec::with_capacity(bounds.len());
        for (axis, iv) in bounds.iter().enumerate() {
            let len = iv.hi - iv.lo;
            if !(len > 0.0) || !len.is_finite() {
                bail!(Config, "axis {axis}: empty interval [{}, {}]", iv.lo, iv.hi);
            }
            let m = len / h;
            let mr = round(m);
            if mr < 1.0 || abs(m - mr) > DIVISIBILITY_TOL * m {
                bail!(Config, "axis {axis}: length {len} is not a multiple of h = {h}");
            }
            counts.push(mr as usize + 1);
        }
        let mut strides = vec![1usize; counts.len()];
        for i in (0..counts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        Ok(Self { bounds: bounds.to_vec(), h, counts, strides })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn node_count(&self) -> usize {
        self.counts.iter().product()
    }

    /// `h^n`.
    pub fn cell_volume(&self) -> f64 {
        pow(self.h, self.n() as f64)
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        self.counts.iter().map(|c| c.saturating_sub(1)).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_counts().iter().product()
    }

    /// Writes the coordinates of node `idx` into `out`.
    pub fn node_coords(&self, idx: usize, out: &mut [f64]) {
        for axis in 0..self.n() {
            let j = idx / self.strides[axis] % self.counts[axis];
            out[axis] = self.bounds[axis].lo + j as f64 * self.h;
        }
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        (0..self.n()).any(|axis| {
            let j = idx / self.strides[axis] % self.counts[axis];
            j == 0 || j + 1 == self.counts[axis]
        })
    }

    /// Node index of the lower corner of `cell`.
    pub fn cell_corner(&self, cell: usize) -> usize {
        let mut rem = cell;
        let mut node = 0;
        for axis in (0..self.n()).rev() {
            let cells_on_axis = self.counts[axis] - 1;
            let j = rem % cells_on_axis;
            rem /= cells_on_axis;
            node += j * self.strides[axis];
        }
        node
    }

    pub fn cell_center(&self, cell: usize, out: &mut [f64]) {
        self.node_coords(self.cell_corner(cell), out);
        for x in out.iter_mut() {
            *x += 0.5 * self.h;
        }
    }

    /// Node-index offsets of the `2^n` corners of a cell from its lower corner.
    pub fn corner_offsets(&self) -> Vec<usize> {
        let n = self.n();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .filter(|axis| mask & (1 << axis) != 0)
                    .map(|axis| self.strides[axis])
                    .sum()
            })
            .collect()
    }

    fn require_cells(&self) -> Result<()> {
        if self.counts.iter().any(|&c| c < 2) {
            bail!(Domain, "grid needs at least two nodes per axis");
        }
        Ok(())
    }

    /// Precomputed cell geometry for repeated sweeps.
    pub fn lattice(&self) -> Result<CellLattice> {
        self.require_cells()?;
        let n = self.n();
        let cells = self.cell_count();
        let mut corners = Vec::with_capacity(cells);
        let mut centers = vec![0.0; cells * n];
        for c in 0..cells {
            corners.push(self.cell_corner(c));
            self.cell_center(c, &mut centers[c * n..(c + 1) * n]);
        }
        Ok(CellLattice { n, corners, centers, offsets: self.corner_offsets() })
    }

    /// Whether the closed ball lies inside the grid box.
    pub fn contains_ball(&self, ball: &Ball) -> bool {
        ball.center.len() == self.n()
            && self.bounds.iter().zip(&ball.center).all(|(iv, &c)| {
                iv.lo <= c - ball.radius && c + ball.radius <= iv.hi
            })
    }

    pub fn require_ball(&self, ball: &Ball) -> Result<()> {
        if !self.contains_ball(ball) {
            bail!(Geometry, "ball of radius {} does not fit inside the grid box", ball.radius);
        }
        Ok(())
    }
}

/// Cell corners and centers of a grid, computed once.
#[derive(Clone, Debug)]
pub struct CellLattice {
    n: usize,
    corners: Vec<usize>,
    centers: Vec<f64>,
    offsets: Vec<usize>,
}

impl CellLattice {
    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn corner(&self, cell: usize) -> usize {
        self.corners[cell]
    }

    pub fn center(&self, cell: usize) -> &[f64] {
        &self.centers[cell * self.n..(cell + 1) * self.n]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Average of the corner values of `cell`.
    pub fn average(&self, cell: usize, values: &[f64]) -> f64 {
        let base = self.corners[cell];
        self.offsets.iter().map(|o| values[base + o]).sum::<f64>() / self.offsets.len() as f64
    }
}

/// Euclidean open ball `B_R(x0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            bail!(Geometry, "ball radius must be positive, got {radius}");
        }
        Ok(Self { center, radius })
    }

    /// Strict membership `|x - x0| < R`.
    pub fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        sqrt(d2) < self.radius
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(self.center.clone(), radius)
    }

    /// Fraction of the cube of side `h` centered at `x` that lies in the
    /// ball. Cubes straddling the sphere are sampled at
    /// `COVERAGE_SAMPLES^n` midpoints.
    pub fn coverage(&self, x: &[f64], h: f64) -> f64 {
        let n = x.len();
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        let dist = sqrt(d2);
        let half_diagonal = 0.5 * h * sqrt(n as f64);
        if dist + half_diagonal < self.radius {
            return 1.0;
        }
        if dist - half_diagonal >= self.radius {
            return 0.0;
        }
        let m = COVERAGE_SAMPLES;
        let total = m.pow(n as u32);
        let mut p = vec![0.0; n];
        let mut inside = 0usize;
        for idx in 0..total {
            let mut rest = idx;
            for (a, pa) in p.iter_mut().enumerate() {
                let j = rest % m;
                rest /= m;
                *pa = x[a] + h * ((j as f64 + 0.5) / m as f64 - 0.5);
            }
            if self.contains(&p) {
                inside += 1;
            }
        }
        inside as f64 / total as f64
    }
}

/// Samples per axis in [`Ball::coverage`].
pub const COVERAGE_SAMPLES: usize = 8;

/// Closed axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct SubBox {
    pub bounds: Vec<Interval>,
}

impl SubBox {
    pub fn new(bounds: Vec<Interval>) -> Self {
        Self { bounds }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bounds.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|iv| iv.hi - iv.lo).product()
    }

    /// Whether the box sits strictly inside the grid box.
    pub fn strictly_inside(&self, grid: &Grid) -> bool {
        self.bounds.len() == grid.n()
            && self
                .bounds
                .iter()
                .zip(grid.bounds())
                .all(|(b, g)| g.lo < b.lo && b.lo < b.hi && b.hi < g.hi)
    }
}

/// Real nodal values on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            bail!(Config, "expected {} nodal values, got {}", grid.node_count(), values.len());
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            bail!(Domain, "nodal value {i} is not finite");
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.node_count()];
        Self { grid, values }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; grid.n()];
        let values = (0..grid.node_count())
            .map(|i| {
                grid.node_coords(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        self.map(|v| t * v)
    }

    pub fn negated(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| -v).collect() }
    }

    /// Corner averages, one per cell.
    pub fn cell_values(&self) -> Result<Vec<f64>> {
        let lat = self.grid.lattice()?;
        Ok((0..lat.len()).map(|c| lat.average(c, &self.values)).collect())
    }

    /// Largest `|u|` over nodes strictly inside `ball`; 0 if there are none.
    pub fn max_abs_in_ball(&self, ball: &Ball) -> f64 {
        let mut x = vec![0.0; self.grid.n()];
        let mut best = 0.0f64;
        for (i, v) in self.values.iter().enumerate() {
            self.grid.node_coords(i, &mut x);
            if ball.contains(&x) {
                best = best.max(abs(*v));
            }
        }
        best
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        (0..self.values.len()).all(|i| !self.grid.is_boundary_node(i) || self.values[i] == 0.0)
    }
}

/// Tensor tent `Π_i max(0, 1 - |2(x_i - m_i)/w_i|)` supported on `bx`.
pub fn tent(grid: &Grid, bx: &SubBox) -> Result<GridFunction> {
    if bx.bounds.len() != grid.n() {
        bail!(Geometry, "box has {} axes, grid has {}", bx.bounds.len(), grid.n());
    }
    GridFunction::from_fn(grid.clone(), |x| {
        bx.bounds
            .iter()
            .zip(x)
            .map(|(iv, &v)| {
                let mid = 0.5 * (iv.lo + iv.hi);
                (1.0 - abs(2.0 * (v - mid) / (iv.hi - iv.lo))).max(0.0)
            })
            .product()
    })
}

/// One `n`-vector per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    n: usize,
    data: Vec<f64>,
}

impl VectorField {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn at(&self, cell: usize) -> &[f64] {
        &self.data[cell * self.n..(cell + 1) * self.n]
    }

    /// Component `i` over all cells.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.data.iter().skip(i).step_by(self.n).copied().collect()
    }
}

/// Forward-difference gradient on cells.
pub fn gradient(u: &GridFunction) -> Result<VectorField> {
    let grid = u.grid();
    let lat = grid.lattice()?;
    let n = grid.n();
    let mut data = Vec::with_capacity(lat.len() * n);
    for c in 0..lat.len() {
        let base = lat.corner(c);
        for axis in 0..n {
            data.push((u.values[base + grid.strides[axis]] - u.values[base]) / grid.h);
        }
    }
    Ok(VectorField { n, data })
}

/// Discrete `L^β` norm of cell values over cells whose centers satisfy `region`.
///
/// `(Σ |f|^β h^n)^{1/β}`, or the maximum of `|f|` when `β = ∞`. An empty
/// region gives 0.
pub fn lp_norm(
    grid: &Grid,
    cell_values: &[f64],
    beta: Exponent,
    region: impl Fn(&[f64]) -> bool,
) -> Result<f64> {
    if let Exponent::Finite(b) = beta {
        if !(b >= 1.0) {
            bail!(Domain, "norm exponent must be >= 1, got {b}");
        }
    }
    let mut x = vec![0.0; grid.n()];
    let mut acc = 0.0f64;
    for (c, &v) in cell_values.iter().enumerate() {
        grid.cell_center(c, &mut x);
        if !region(&x) {
            continue;
        }
        match beta {
            Exponent::Infinite => acc = acc.max(abs(v)),
            Exponent::Finite(b) => acc += pow(abs(v), b),
        }
    }
    Ok(match beta {
        Exponent::Infinite => acc,
        Exponent::Finite(b) => pow(acc * grid.cell_volume(), 1.0 / b),
    })
}

/// `h^n` times the number of nodes with `|x - x0| < R` and `u(x) > k`.
pub fn superlevel_measure(u: &GridFunction, k: f64, ball: &Ball) -> f64 {
    let grid = u.grid();
    let mut x = vec![0.0; grid.n()];
    let count = u
        .values
        .iter()
        .enumerate()
        .filter(|(i, &v)| {
            grid.node_coords(*i, &mut x);
            v > k && ball.contains(&x)
        })
        .count();
    count as f64 * grid.cell_volume()
}

/// Nodewise `max(u - k, 0)`.
pub fn truncate(u: &GridFunction, k: f64) -> GridFunction {
    GridFunction {
        grid: u.grid.clone(),
        values: u.values.iter().map(|&v| (v - k).max(0.0)).collect(),
    }
}
