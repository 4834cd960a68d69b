//! Discrete convolutions sampled at cell interfaces.
//!
//! For channel `m` the value at the x-interface `(i + 1/2, j)` is
//!
//! ```text
//! R_m = dx1 dx2 * sum_k sum_{p,q} eta^{m,k}((p + 1/2) dx1, q dx2) rho^k_{i-p, j-q}
//! ```
//!
//! and analogously at y-interfaces with the half offset on the second axis.
//! Both a direct summation and an FFT-based circular convolution are
//! provided; they agree up to roundoff on periodic grids.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

pub type KernelFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

#[derive(Clone)]
struct Kernel {
    f: KernelFn,
    radius: f64,
}

/// `M x K` matrix of compactly supported convolution kernels. Missing
/// entries are identically zero.
#[derive(Clone)]
pub struct KernelSet {
    channels: usize,
    species: usize,
    kernels: Vec<Option<Kernel>>,
}

impl fmt::Debug for KernelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSet")
            .field("channels", &self.channels)
            .field("species", &self.species)
            .field("radii", &self.kernels.iter().map(|k| k.as_ref().map(|k| k.radius)).collect::<Vec<_>>())
            .finish()
    }
}

impl KernelSet {
    pub fn new(channels: usize, species: usize) -> Self {
        Self { channels, species, kernels: vec![None; channels * species] }
    }

    /// Installs `eta^{m,k}`. Evaluations outside `radius` are masked to zero.
    pub fn with_kernel<F>(mut self, m: usize, k: usize, radius: f64, f: F) -> Result<Self>
    where
        F: Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    {
        if m >= self.channels || k >= self.species {
            return Err(Error::invalid(format!("kernel index ({m}, {k}) out of range")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("support radius must be positive, got {radius}")));
        }
        self.kernels[m * self.species + k] = Some(Kernel { f: Arc::new(f), radius });
        Ok(self)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn support_radius(&self, m: usize, k: usize) -> Option<f64> {
        self.kernels[m * self.species + k].as_ref().map(|k| k.radius)
    }

    pub fn max_radius(&self) -> f64 {
        self.kernels.iter().flatten().map(|k| k.radius).fold(0.0, f64::max)
    }

    pub fn eval(&self, m: usize, k: usize, x: [f64; 2]) -> f64 {
        match &self.kernels[m * self.species + k] {
            Some(kern) if x[0].hypot(x[1]) <= kern.radius => (kern.f)(x),
            _ => 0.0,
        }
    }

    /// Sup-norms of the first and second derivatives, estimated by central
    /// differences on a `probe x probe` lattice covering the support. Each
    /// norm is the sup over points of the Frobenius norm across `(m, k)`.
    pub fn derivative_norms(&self, probe: usize) -> KernelDerivativeNorms {
        let r = self.max_radius();
        let mut out = KernelDerivativeNorms::default();
        if r == 0.0 || probe < 2 {
            return out;
        }
        let h = 1e-4 * r;
        let step = 2.0 * r / (probe - 1) as f64;
        let rows: Vec<KernelDerivativeNorms> = (0..probe)
            .into_par_iter()
            .map(|a| {
                let mut row = KernelDerivativeNorms::default();
                let y = -r + a as f64 * step;
                for b in 0..probe {
                    let x = -r + b as f64 * step;
                    let mut s = [0.0; 5];
                    for m in 0..self.channels {
                        for k in 0..self.species {
                            if self.kernels[m * self.species + k].is_none() {
                                continue;
                            }
                            let e = |dx: f64, dy: f64| self.eval(m, k, [x + dx, y + dy]);
                            let c = e(0.0, 0.0);
                            let d1 = (e(h, 0.0) - e(-h, 0.0)) / (2.0 * h);
                            let d2 = (e(0.0, h) - e(0.0, -h)) / (2.0 * h);
                            let d11 = (e(h, 0.0) - 2.0 * c + e(-h, 0.0)) / (h * h);
                            let d22 = (e(0.0, h) - 2.0 * c + e(0.0, -h)) / (h * h);
                            let d12 = (e(h, h) - e(h, -h) - e(-h, h) + e(-h, -h)) / (4.0 * h * h);
                            for (acc, d) in s.iter_mut().zip([d1, d2, d11, d12, d22]) {
                                *acc += d * d;
                            }
                        }
                    }
                    row.d1 = row.d1.max(s[0].sqrt());
                    row.d2 = row.d2.max(s[1].sqrt());
                    row.d11 = row.d11.max(s[2].sqrt());
                    row.d12 = row.d12.max(s[3].sqrt());
                    row.d22 = row.d22.max(s[4].sqrt());
                }
                row
            })
            .collect();
        for row in rows {
            out.d1 = out.d1.max(row.d1);
            out.d2 = out.d2.max(row.d2);
            out.d11 = out.d11.max(row.d11);
            out.d12 = out.d12.max(row.d12);
            out.d22 = out.d22.max(row.d22);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelDerivativeNorms {
    pub d1: f64,
    pub d2: f64,
    pub d11: f64,
    pub d12: f64,
    pub d22: f64,
}

/// One `(2P + 1) x (2Q + 1)` table of weighted kernel samples indexed by
/// offsets `p in -P..=P`, `q in -Q..=Q`.
#[derive(Debug, Clone)]
struct OffsetTable {
    half: [usize; 2],
    values: Vec<f64>,
    /// `(p, q, weight)` for every nonzero entry.
    nonzero: Vec<(isize, isize, f64)>,
}

impl OffsetTable {
    fn build(half: [usize; 2], sample: impl Fn(isize, isize) -> f64) -> Self {
        let (w1, w2) = (2 * half[0] + 1, 2 * half[1] + 1);
        let mut values = vec![0.0; w1 * w2];
        let mut nonzero = Vec::new();
        for b in 0..w2 {
            let q = b as isize - half[1] as isize;
            for a in 0..w1 {
                let p = a as isize - half[0] as isize;
                let v = sample(p, q);
                values[b * w1 + a] = v;
                if v != 0.0 {
                    nonzero.push((p, q, v));
                }
            }
        }
        Self { half, values, nonzero }
    }

    fn get(&self, p: isize, q: isize) -> f64 {
        let (h1, h2) = (self.half[0] as isize, self.half[1] as isize);
        if p.abs() > h1 || q.abs() > h2 {
            return 0.0;
        }
        self.values[((q + h2) as usize) * (2 * self.half[0] + 1) + (p + h1) as usize]
    }
}

/// Kernel samples at the staggered offsets used by the interface
/// convolutions, already scaled by the cell area.
#[derive(Clone)]
pub struct SampledKernelTables {
    grid: Grid2D,
    channels: usize,
    species: usize,
    x_face: Vec<OffsetTable>,
    y_face: Vec<OffsetTable>,
    spectra: Option<Arc<Spectra>>,
}

impl fmt::Debug for SampledKernelTables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledKernelTables")
            .field("grid", &self.grid)
            .field("channels", &self.channels)
            .field("species", &self.species)
            .finish_non_exhaustive()
    }
}

struct Spectra {
    fft: Fft2,
    x_face: Vec<Vec<Complex64>>,
    y_face: Vec<Vec<Complex64>>,
}

/// Samples every kernel at the x- and y-interface offsets of `grid`.
pub fn sample_kernels(kernels: &KernelSet, grid: &Grid2D) -> Result<SampledKernelTables> {
    let [l1, l2] = grid.lengths();
    if grid.is_periodic() {
        let r = kernels.max_radius();
        if r > 0.5 * l1 || r > 0.5 * l2 {
            return Err(Error::config(format!(
                "kernel support radius {r} exceeds half of the periodic domain ({}, {})",
                0.5 * l1,
                0.5 * l2
            )));
        }
    }
    let (dx1, dx2) = (grid.dx1(), grid.dx2());
    let area = grid.cell_area();
    let mut x_face = Vec::with_capacity(kernels.channels * kernels.species);
    let mut y_face = Vec::with_capacity(kernels.channels * kernels.species);
    for m in 0..kernels.channels {
        for k in 0..kernels.species {
            let r = kernels.support_radius(m, k).unwrap_or(0.0);
            let half = [(r / dx1).ceil() as usize + 1, (r / dx2).ceil() as usize + 1];
            let sample = |x: [f64; 2]| {
                if x[0].hypot(x[1]) <= r {
                    area * kernels.eval(m, k, x)
                } else {
                    0.0
                }
            };
            x_face.push(OffsetTable::build(half, |p, q| sample([(p as f64 + 0.5) * dx1, q as f64 * dx2])));
            y_face.push(OffsetTable::build(half, |p, q| sample([p as f64 * dx1, (q as f64 + 0.5) * dx2])));
        }
    }
    for t in x_face.iter().chain(&y_face) {
        if let Some(bad) = t.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("kernel sample {bad} is not finite")));
        }
    }
    let spectra = if grid.is_periodic() {
        let fft = Fft2::new(grid.n1(), grid.n2());
        let spectrum = |t: &OffsetTable| {
            let mut buf = vec![Complex64::new(0.0, 0.0); grid.cells()];
            for &(p, q, w) in &t.nonzero {
                let i = crate::grid::wrap_index(p, grid.n1());
                let j = crate::grid::wrap_index(q, grid.n2());
                buf[grid.idx(i, j)].re += w;
            }
            fft.forward(&mut buf);
            buf
        };
        let xs = x_face.iter().map(spectrum).collect();
        let ys = y_face.iter().map(spectrum).collect();
        Some(Arc::new(Spectra { fft, x_face: xs, y_face: ys }))
    } else {
        None
    };
    Ok(SampledKernelTables {
        grid: *grid,
        channels: kernels.channels,
        species: kernels.species,
        x_face,
        y_face,
        spectra,
    })
}

impl SampledKernelTables {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn species(&self) -> usize {
        self.species
    }

    /// Weighted sample at x-interface offset `(p, q)`; zero outside the table.
    pub fn x_face(&self, m: usize, k: usize, p: isize, q: isize) -> f64 {
        self.x_face[m * self.species + k].get(p, q)
    }

    pub fn y_face(&self, m: usize, k: usize, p: isize, q: isize) -> f64 {
        self.y_face[m * self.species + k].get(p, q)
    }

    /// Half extents `(P, Q)` of the `(m, k)` tables.
    pub fn half_extent(&self, m: usize, k: usize) -> [usize; 2] {
        self.x_face[m * self.species + k].half
    }

    fn check(&self, field: &Field) -> Result<()> {
        if *field.grid() != self.grid || field.species() != self.species {
            return Err(Error::ShapeMismatch(format!(
                "field ({} species on {}x{}) does not match kernel tables ({} species on {}x{})",
                field.species(),
                field.grid().n1(),
                field.grid().n2(),
                self.species,
                self.grid.n1(),
                self.grid.n2()
            )));
        }
        Ok(())
    }
}

/// Convolution values at every x- and y-interface, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceConvolutions {
    channels: usize,
    n1: usize,
    n2: usize,
    r_x: Vec<f64>,
    r_y: Vec<f64>,
    time: f64,
}

impl InterfaceConvolutions {
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `R_m` at the interface between `(i, j)` and `(i + 1, j)`.
    #[inline]
    pub fn rx(&self, m: usize, i: usize, j: usize) -> f64 {
        self.r_x[(m * self.n2 + j) * self.n1 + i]
    }

    /// `R_m` at the interface between `(i, j)` and `(i, j + 1)`.
    #[inline]
    pub fn ry(&self, m: usize, i: usize, j: usize) -> f64 {
        self.r_y[(m * self.n2 + j) * self.n1 + i]
    }

    pub fn rx_vec(&self, i: usize, j: usize, out: &mut [f64]) {
        for (m, o) in out.iter_mut().enumerate().take(self.channels) {
            *o = self.rx(m, i, j);
        }
    }

    pub fn ry_vec(&self, i: usize, j: usize, out: &mut [f64]) {
        for (m, o) in out.iter_mut().enumerate().take(self.channels) {
            *o = self.ry(m, i, j);
        }
    }

    pub fn x_values(&self) -> &[f64] {
        &self.r_x
    }

    pub fn y_values(&self) -> &[f64] {
        &self.r_y
    }

    pub fn max_abs(&self) -> f64 {
        self.r_x.iter().chain(&self.r_y).fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max_deviation(&self, other: &InterfaceConvolutions) -> f64 {
        self.r_x
            .iter()
            .zip(&other.r_x)
            .chain(self.r_y.iter().zip(&other.r_y))
            .fold(0.0, |a, (u, v)| a.max((u - v).abs()))
    }

    /// `max_{i,j} |R_{i+1/2,j} - R_{i-1/2,j}|_2` and the y analogue.
    pub fn max_interface_difference(&self) -> [f64; 2] {
        let (n1, n2) = (self.n1, self.n2);
        let mut out = [0.0f64; 2];
        for j in 0..n2 {
            for i in 0..n1 {
                let im = (i + n1 - 1) % n1;
                let jm = (j + n2 - 1) % n2;
                let (mut sx, mut sy) = (0.0, 0.0);
                for m in 0..self.channels {
                    sx += (self.rx(m, i, j) - self.rx(m, im, j)).powi(2);
                    sy += (self.ry(m, i, j) - self.ry(m, i, jm)).powi(2);
                }
                out[0] = out[0].max(sx.sqrt());
                out[1] = out[1].max(sy.sqrt());
            }
        }
        out
    }

    /// `max |R_{i+1,j-1/2} - R_{i,j-1/2} - R_{i+1,j+1/2} + R_{i,j+1/2}|_2`
    /// over all cells, using the y-interface values.
    pub fn max_second_difference(&self) -> f64 {
        let (n1, n2) = (self.n1, self.n2);
        let mut out = 0.0f64;
        for j in 0..n2 {
            let jm = (j + n2 - 1) % n2;
            for i in 0..n1 {
                let ip = (i + 1) % n1;
                let mut s = 0.0;
                for m in 0..self.channels {
                    let d = self.ry(m, ip, jm) - self.ry(m, i, jm) - self.ry(m, ip, j) + self.ry(m, i, j);
                    s += d * d;
                }
                out = out.max(s.sqrt());
            }
        }
        out
    }
}

/// Direct summation over the nonzero kernel samples.
pub fn convolve_direct(tables: &SampledKernelTables, field: &Field) -> Result<InterfaceConvolutions> {
    tables.check(field)?;
    let grid = tables.grid;
    let (n1, n2) = (grid.n1(), grid.n2());
    let compute = |faces: &[OffsetTable]| -> Vec<f64> {
        let mut out = vec![0.0; tables.channels * n1 * n2];
        out.par_chunks_mut(n1).enumerate().for_each(|(row, slot)| {
            let m = row / n2;
            let j = row % n2;
            for (i, s) in slot.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..tables.species {
                    for &(p, q, w) in &faces[m * tables.species + k].nonzero {
                        acc += w * field.get_shifted(k, i, j, -p, -q);
                    }
                }
                *s = acc;
            }
        });
        out
    };
    Ok(InterfaceConvolutions {
        channels: tables.channels,
        n1,
        n2,
        r_x: compute(&tables.x_face),
        r_y: compute(&tables.y_face),
        time: field.time(),
    })
}

/// Circular convolution through 2D FFTs. Falls back to [`convolve_direct`]
/// on zero-extended grids.
pub fn convolve_fast(tables: &SampledKernelTables, field: &Field) -> Result<InterfaceConvolutions> {
    tables.check(field)?;
    let Some(spectra) = tables.spectra.as_deref() else {
        return convolve_direct(tables, field);
    };
    let grid = tables.grid;
    let cells = grid.cells();
    let rho_hat: Vec<Vec<Complex64>> = (0..tables.species)
        .into_par_iter()
        .map(|k| {
            let mut buf: Vec<Complex64> = field.plane(k).iter().map(|&v| Complex64::new(v, 0.0)).collect();
            spectra.fft.forward(&mut buf);
            buf
        })
        .collect();
    let scale = 1.0 / cells as f64;
    let compute = |faces: &[Vec<Complex64>]| -> Vec<f64> {
        let planes: Vec<Vec<f64>> = (0..tables.channels)
            .into_par_iter()
            .map(|m| {
                let mut acc = vec![Complex64::new(0.0, 0.0); cells];
                for (k, rh) in rho_hat.iter().enumerate() {
                    for ((a, t), r) in acc.iter_mut().zip(&faces[m * tables.species + k]).zip(rh) {
                        *a += t * r;
                    }
                }
                spectra.fft.inverse(&mut acc);
                acc.iter().map(|c| c.re * scale).collect()
            })
            .collect();
        planes.concat()
    };
    Ok(InterfaceConvolutions {
        channels: tables.channels,
        n1: grid.n1(),
        n2: grid.n2(),
        r_x: compute(&spectra.x_face),
        r_y: compute(&spectra.y_face),
        time: field.time(),
    })
}

/// Unnormalised 2D complex FFT over a row-major `n1 x n2` buffer. The
/// spectrum is kept in transposed layout, which is fine because it is only
/// ever multiplied pointwise and transformed back.
struct Fft2 {
    n1: usize,
    n2: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n1: usize, n2: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n1,
            n2,
            row_fwd: planner.plan_fft_forward(n1),
            col_fwd: planner.plan_fft_forward(n2),
            row_inv: planner.plan_fft_inverse(n1),
            col_inv: planner.plan_fft_inverse(n2),
        }
    }

    fn forward(&self, buf: &mut Vec<Complex64>) {
        self.row_fwd.process(buf);
        *buf = transpose(buf, self.n1, self.n2);
        self.col_fwd.process(buf);
    }

    fn inverse(&self, buf: &mut Vec<Complex64>) {
        self.col_inv.process(buf);
        *buf = transpose(buf, self.n2, self.n1);
        self.row_inv.process(buf);
    }
}

/// Transposes a row-major matrix with rows of length `w` and `h` rows.
fn transpose(src: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for r in 0..h {
        for c in 0..w {
            out[c * h + r] = src[r * w + c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn unit_kernel(r: f64) -> KernelSet {
        KernelSet::new(1, 1).with_kernel(0, 0, r, |_| 1.0).unwrap()
    }

    #[test]
    fn constant_kernel_samples() {
        let g = Grid2D::square(16, 0.0, 16.0).unwrap();
        let t = sample_kernels(&unit_kernel(3.0), &g).unwrap();
        assert_eq!(t.x_face(0, 0, 0, 0), 1.0);
        assert_eq!(t.x_face(0, 0, 1, 2), 1.0); // (1.5, 2) inside radius 3
        assert_eq!(t.y_face(0, 0, 2, 1), 1.0);
        assert_eq!(t.x_face(0, 0, 2, 2), 0.0); // (2.5, 2) outside
        assert_eq!(t.x_face(0, 0, 10, 0), 0.0);
        assert_eq!(t.half_extent(0, 0), [4, 4]);
    }

    #[test]
    fn scaled_kernel_sample() {
        let ell = 2.0f64;
        let kernels = KernelSet::new(1, 1)
            .with_kernel(0, 0, ell, move |x| {
                (std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1]) / (2.0 * ell * ell)).cos().powi(3)
            })
            .unwrap();
        let g = Grid2D::square(50, -6.0, 6.0).unwrap();
        let t = sample_kernels(&kernels, &g).unwrap();
        let dx = g.dx1();
        let expected = dx * dx * (std::f64::consts::PI * (0.5 * dx).powi(2) / 8.0).cos().powi(3);
        assert!((t.x_face(0, 0, 0, 0) - expected).abs() < 1e-16);
    }

    #[test]
    fn oversized_support_rejected() {
        let g = Grid2D::square(8, 0.0, 4.0).unwrap();
        assert!(matches!(sample_kernels(&unit_kernel(2.5), &g), Err(Error::Config(_))));
        let z = Grid2D::new(8, 8, [0.0, 4.0, 0.0, 4.0], Boundary::ZeroExtension).unwrap();
        assert!(sample_kernels(&unit_kernel(2.5), &z).is_ok());
    }

    #[test]
    fn delta_field_picks_single_table_entry() {
        let g = Grid2D::square(4, 0.0, 4.0).unwrap();
        let kernels = KernelSet::new(1, 1).with_kernel(0, 0, 1.9, |x| 1.0 + x[0] + 10.0 * x[1]).unwrap();
        let t = sample_kernels(&kernels, &g).unwrap();
        let mut rho = Field::zeros(g, 1);
        rho.set(0, 0, 0, 1.0);
        let direct = convolve_direct(&t, &rho).unwrap();
        let fast = convolve_fast(&t, &rho).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                // R_{i+1/2,j} = sum_p T[p, q] rho_{i-p, j-q}: only i - p = 0 (mod 4)
                let mut ex = 0.0;
                let mut ey = 0.0;
                for p in -8isize..=8 {
                    for q in -8isize..=8 {
                        if (i as isize - p).rem_euclid(4) == 0 && (j as isize - q).rem_euclid(4) == 0 {
                            ex += t.x_face(0, 0, p, q);
                            ey += t.y_face(0, 0, p, q);
                        }
                    }
                }
                assert_eq!(direct.rx(0, i, j), ex);
                assert_eq!(direct.ry(0, i, j), ey);
                assert!((fast.rx(0, i, j) - ex).abs() < 1e-13);
                assert!((fast.ry(0, i, j) - ey).abs() < 1e-13);
            }
        }
        // by hand: R_{1/2,0} is the p = q = 0 sample at (0.5, 0)
        assert_eq!(direct.rx(0, 0, 0), 1.5);
        // R_{1+1/2,0} uses p = 1: offset (1.5, 0)
        assert_eq!(direct.rx(0, 1, 0), 2.5);
        // R_{0,1/2}: offset (0, 0.5)
        assert_eq!(direct.ry(0, 0, 0), 6.0);
    }

    #[test]
    fn zero_and_constant_fields() {
        let g = Grid2D::square(12, -3.0, 3.0).unwrap();
        let kernels = KernelSet::new(1, 1).with_kernel(0, 0, 1.2, |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let t = sample_kernels(&kernels, &g).unwrap();
        let z = convolve_direct(&t, &Field::zeros(g, 1)).unwrap();
        assert_eq!(z.max_abs(), 0.0);

        let c = 0.7;
        let f = Field::from_values(g, 1, vec![c; 144], 0.0).unwrap();
        let r = convolve_direct(&t, &f).unwrap();
        let sum: f64 = (-5..=5).flat_map(|p| (-5..=5).map(move |q| (p, q))).map(|(p, q)| t.x_face(0, 0, p, q)).sum();
        for v in r.x_values() {
            assert!((v - c * sum).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_extension_uses_fallback() {
        let g = Grid2D::new(8, 8, [0.0, 4.0, 0.0, 4.0], Boundary::ZeroExtension).unwrap();
        let t = sample_kernels(&unit_kernel(1.0), &g).unwrap();
        let f = Field::from_values(g, 1, (0..64).map(|v| v as f64).collect(), 0.0).unwrap();
        assert_eq!(convolve_fast(&t, &f).unwrap(), convolve_direct(&t, &f).unwrap());
        // corner cell sees fewer neighbours than an interior one
        let r = convolve_direct(&t, &Field::from_values(g, 1, vec![1.0; 64], 0.0).unwrap()).unwrap();
        assert!(r.rx(0, 0, 0) < r.rx(0, 3, 3));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = Grid2D::square(8, 0.0, 4.0).unwrap();
        let t = sample_kernels(&unit_kernel(1.0), &g).unwrap();
        let other = Field::zeros(Grid2D::square(4, 0.0, 4.0).unwrap(), 1);
        assert!(matches!(convolve_direct(&t, &other), Err(Error::ShapeMismatch(_))));
    }
}
