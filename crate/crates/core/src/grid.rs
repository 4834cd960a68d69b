//! Uniform rectangular meshes, multi-species cell-averaged fields and the
//! index arithmetic used by the stencils.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Returns `i mod n` in `[0, n)`.
#[inline]
pub fn wrap_index(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    i.rem_euclid(n as isize) as usize
}

/// Treatment of indices that leave the grid along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    /// Cells outside the grid hold zero state.
    ZeroExtension,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n1: usize,
    n2: usize,
    x1_min: f64,
    x1_max: f64,
    x2_min: f64,
    x2_max: f64,
    dx1: f64,
    dx2: f64,
    boundary: Boundary,
}

impl Grid2D {
    pub fn new(n1: usize, n2: usize, domain: [f64; 4], boundary: Boundary) -> Result<Self> {
        let [x1_min, x1_max, x2_min, x2_max] = domain;
        if n1 == 0 || n2 == 0 {
            return Err(Error::invalid("grid needs at least one cell per axis"));
        }
        if !domain.iter().all(|v| v.is_finite()) || x1_max <= x1_min || x2_max <= x2_min {
            return Err(Error::invalid(format!("degenerate domain {domain:?}")));
        }
        Ok(Self {
            n1,
            n2,
            x1_min,
            x1_max,
            x2_min,
            x2_max,
            dx1: (x1_max - x1_min) / n1 as f64,
            dx2: (x2_max - x2_min) / n2 as f64,
            boundary,
        })
    }

    /// Periodic `n x n` grid on the square `[lo, hi]^2`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(n, n, [lo, hi, lo, hi], Boundary::Periodic)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn cells(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn dx1(&self) -> f64 {
        self.dx1
    }

    pub fn dx2(&self) -> f64 {
        self.dx2
    }

    pub fn cell_area(&self) -> f64 {
        self.dx1 * self.dx2
    }

    /// Aspect ratio `dx1 / dx2`.
    pub fn aspect(&self) -> f64 {
        self.dx1 / self.dx2
    }

    pub fn domain(&self) -> [f64; 4] {
        [self.x1_min, self.x1_max, self.x2_min, self.x2_max]
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn lengths(&self) -> [f64; 2] {
        [self.x1_max - self.x1_min, self.x2_max - self.x2_min]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x1_min + (i as f64 + 0.5) * self.dx1, self.x2_min + (j as f64 + 0.5) * self.dx2]
    }

    /// Midpoint of the interface between cells `(i, j)` and `(i + 1, j)`.
    pub fn x_interface(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x1_min + (i as f64 + 1.0) * self.dx1, self.x2_min + (j as f64 + 0.5) * self.dx2]
    }

    /// Midpoint of the interface between cells `(i, j)` and `(i, j + 1)`.
    pub fn y_interface(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x1_min + (i as f64 + 0.5) * self.dx1, self.x2_min + (j as f64 + 1.0) * self.dx2]
    }

    /// Neighbour index along an axis of length `n`, `None` when the index
    /// leaves a zero-extended grid.
    #[inline]
    pub fn shift(&self, i: usize, offset: isize, n: usize) -> Option<usize> {
        let s = i as isize + offset;
        match self.boundary {
            Boundary::Periodic => Some(wrap_index(s, n)),
            Boundary::ZeroExtension => (s >= 0 && (s as usize) < n).then_some(s as usize),
        }
    }

    /// Row-major offset of cell `(i, j)` within one species plane.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }
}

/// Closed state interval `[rho_m, rho_M]` on which a flux vanishes at the
/// end points. `rho_max = None` leaves it unbounded above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleInterval {
    rho_min: f64,
    rho_max: Option<f64>,
}

impl AdmissibleInterval {
    pub fn new(rho_min: f64, rho_max: Option<f64>) -> Result<Self> {
        if !(rho_min.is_finite() && rho_min >= 0.0) {
            return Err(Error::invalid(format!("rho_m must be finite and >= 0, got {rho_min}")));
        }
        if let Some(hi) = rho_max {
            if !(hi.is_finite() && hi > rho_min) {
                return Err(Error::invalid(format!("rho_M = {hi} must exceed rho_m = {rho_min}")));
            }
        }
        Ok(Self { rho_min, rho_max })
    }

    pub fn half_line() -> Self {
        Self { rho_min: 0.0, rho_max: None }
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rho_max(&self) -> Option<f64> {
        self.rho_max
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.rho_min && self.rho_max.is_none_or(|hi| rho <= hi)
    }

    pub fn clamp(&self, rho: f64) -> f64 {
        let lo = rho.max(self.rho_min);
        match self.rho_max {
            Some(hi) => lo.min(hi),
            None => lo,
        }
    }
}

/// Cell averages of `species` state variables at one time level.
///
/// Values are stored species-major, then row-major (`i` fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid2D,
    species: usize,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn zeros(grid: Grid2D, species: usize) -> Self {
        Self { grid, species, values: vec![0.0; species * grid.cells()], time: 0.0 }
    }

    pub fn from_values(grid: Grid2D, species: usize, values: Vec<f64>, time: f64) -> Result<Self> {
        if species == 0 {
            return Err(Error::invalid("field needs at least one species"));
        }
        if values.len() != species * grid.cells() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for {species} species on {}x{}, got {}",
                species * grid.cells(),
                grid.n1(),
                grid.n2(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at flat index {pos}")));
        }
        Ok(Self { grid, species, values, time })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn plane(&self, k: usize) -> &[f64] {
        let n = self.grid.cells();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn plane_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.grid.cells();
        &mut self.values[k * n..(k + 1) * n]
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[k * self.grid.cells() + self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let n = self.grid.cells();
        let idx = self.grid.idx(i, j);
        self.values[k * n + idx] = v;
    }

    /// Value at a possibly out-of-range cell, honouring the grid boundary.
    #[inline]
    pub fn get_shifted(&self, k: usize, i: usize, j: usize, di: isize, dj: isize) -> f64 {
        match (self.grid.shift(i, di, self.grid.n1()), self.grid.shift(j, dj, self.grid.n2())) {
            (Some(a), Some(b)) => self.get(k, a, b),
            _ => 0.0,
        }
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.species == other.species && self.grid == other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Periodic translation by `(s1, s2)` cells: `out(i + s1, j + s2) = self(i, j)`.
    pub fn translated(&self, s1: isize, s2: isize) -> Field {
        let mut out = self.clone();
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        for k in 0..self.species {
            for j in 0..n2 {
                for i in 0..n1 {
                    let ti = wrap_index(i as isize + s1, n1);
                    let tj = wrap_index(j as isize + s2, n2);
                    out.set(k, ti, tj, self.get(k, i, j));
                }
            }
        }
        out
    }

    /// Flat CSV with header `i,j,k,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,k,value")?;
        for k in 0..self.species {
            for j in 0..self.grid.n2() {
                for i in 0..self.grid.n1() {
                    writeln!(w, "{i},{j},{k},{:e}", self.get(k, i, j))?;
                }
            }
        }
        Ok(())
    }

    /// Dense matrix of one species: one line per `j`, values separated by
    /// single spaces.
    pub fn write_matrix<W: Write>(&self, k: usize, mut w: W) -> std::io::Result<()> {
        for j in 0..self.grid.n2() {
            let row = self.plane(k)[j * self.grid.n1()..(j + 1) * self.grid.n1()]
                .iter()
                .map(|v| format!("{v:e}"))
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// Parses the output of [`Field::write_csv`] back onto `grid`.
    pub fn read_csv(grid: Grid2D, text: &str) -> Result<Field> {
        let mut entries = Vec::new();
        let mut species = 0;
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns", lineno + 1)));
            }
            let parse_u =
                |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
            let (i, j, k) = (parse_u(parts[0])?, parse_u(parts[1])?, parse_u(parts[2])?);
            let v = parts[3].trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if i >= grid.n1() || j >= grid.n2() {
                return Err(Error::Parse(format!("line {}: cell ({i}, {j}) outside grid", lineno + 1)));
            }
            species = species.max(k + 1);
            entries.push((i, j, k, v));
        }
        let mut field = Field::zeros(grid, species.max(1));
        for (i, j, k, v) in entries {
            field.set(k, i, j, v);
        }
        if !field.is_finite() {
            return Err(Error::Parse("non-finite value in snapshot".into()));
        }
        Ok(field)
    }
}

/// How a pointwise profile is reduced to cell averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionRule {
    /// Sample at cell centres.
    #[default]
    Midpoint,
    /// Tensor-product Gauss-Legendre quadrature with the given number of
    /// points per axis.
    CellMean { order: usize },
}

/// Projects `profile(k, x)` onto the cells of `grid`.
pub fn project_initial_data<P>(profile: P, species: usize, grid: &Grid2D, rule: ProjectionRule) -> Result<Field>
where
    P: Fn(usize, [f64; 2]) -> f64,
{
    let mut field = Field::zeros(*grid, species);
    let (nodes, weights) = match rule {
        ProjectionRule::Midpoint => (vec![0.0], vec![2.0]),
        ProjectionRule::CellMean { order } => gauss_legendre(order)?,
    };
    for k in 0..species {
        for j in 0..grid.n2() {
            for i in 0..grid.n1() {
                let [c1, c2] = grid.cell_center(i, j);
                let mut acc = 0.0;
                for (a, wa) in nodes.iter().zip(&weights) {
                    for (b, wb) in nodes.iter().zip(&weights) {
                        let x = [c1 + 0.5 * a * grid.dx1(), c2 + 0.5 * b * grid.dx2()];
                        let v = profile(k, x);
                        if !v.is_finite() {
                            return Err(Error::invalid(format!(
                                "profile is not finite at ({}, {}) for species {k}",
                                x[0], x[1]
                            )));
                        }
                        acc += wa * wb * v;
                    }
                }
                field.set(k, i, j, 0.25 * acc);
            }
        }
    }
    Ok(field)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 || order > 64 {
        return Err(Error::invalid(format!("quadrature order {order} outside 1..=64")));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for r in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (r as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[r] = -x;
        nodes[n - 1 - r] = x;
        weights[r] = w;
        weights[n - 1 - r] = w;
    }
    Ok((nodes, weights))
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
