//! Explicit first-order update
//!
//! ```text
//! rho^{n+1}_{ij} = rho^n_{ij} - l1 (F_{i+1/2,j} - F_{i-1/2,j}) - l2 (F_{i,j+1/2} - F_{i,j-1/2})
//! ```
//!
//! with `l1 = dt/dx1`, `l2 = dt/dx2` and all interface fluxes frozen at the
//! convolution snapshot of `rho^n`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{discrete_mass, total_variation};
use crate::error::{Error, Result};
use crate::flux::{Axis, FluxModel, FrozenFlux, NumericalFluxChoice};
use crate::grid::{Field, Grid2D};
use crate::nonlocal::{convolve_direct, convolve_fast, InterfaceConvolutions, SampledKernelTables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    #[default]
    Forward,
    /// Integrates with the flux negated.
    Reversed,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Reversed => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvolutionPath {
    #[default]
    Fast,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub flux: NumericalFluxChoice,
    /// Fraction of the admissible CFL time step. Values above one are
    /// accepted so that unstable runs can be reproduced on purpose.
    pub cfl_factor: f64,
    /// `[[L11, L12], [L21, L22]]`: Lipschitz constants of the numerical flux
    /// in its two arguments, per direction.
    pub lipschitz: [[f64; 2]; 2],
    pub t_end: f64,
    pub direction: Direction,
    pub convolution: ConvolutionPath,
}

impl SchemeConfig {
    /// Config with Lipschitz constants derived from `model`.
    pub fn for_model(flux: NumericalFluxChoice, model: &dyn FluxModel, t_end: f64) -> Result<Self> {
        flux.validate(model)?;
        let cfg = Self {
            flux,
            cfl_factor: 1.0,
            lipschitz: flux.lipschitz_bounds(model),
            t_end,
            direction: Direction::Forward,
            convolution: ConvolutionPath::Fast,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_cfl(mut self, cfl_factor: f64) -> Self {
        self.cfl_factor = cfl_factor;
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: [[f64; 2]; 2]) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn with_convolution(mut self, path: ConvolutionPath) -> Self {
        self.convolution = path;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_factor.is_finite() && self.cfl_factor > 0.0) {
            return Err(Error::config(format!("cfl_factor must be positive, got {}", self.cfl_factor)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if self.lipschitz.iter().flatten().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::config(format!("invalid Lipschitz constants {:?}", self.lipschitz)));
        }
        Ok(())
    }

    /// True when the step size respects the CFL bound.
    pub fn cfl_respected(&self) -> bool {
        self.cfl_factor <= 1.0
    }
}

/// Time step `cfl * min(dx1 / (2 (L11 + L12)), dx2 / (2 (L21 + L22)))`.
pub fn compute_dt(config: &SchemeConfig, grid: &Grid2D) -> Result<f64> {
    config.validate()?;
    let [[l11, l12], [l21, l22]] = config.lipschitz;
    let b1 = if l11 + l12 > 0.0 { grid.dx1() / (2.0 * (l11 + l12)) } else { f64::INFINITY };
    let b2 = if l21 + l22 > 0.0 { grid.dx2() / (2.0 * (l21 + l22)) } else { f64::INFINITY };
    let dt = config.cfl_factor * b1.min(b2);
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config(format!(
            "time step {dt} is not positive and finite; check Lipschitz constants {:?}",
            config.lipschitz
        )));
    }
    Ok(dt)
}

/// Interface data frozen at one time level: convolution values, and for
/// multiplicative models the sign-adjusted velocity per species.
///
/// x-interfaces are stored as `(n1 + 1) x n2` with slot `s` being the
/// interface between cells `s - 1` and `s`; y-interfaces as `n1 x (n2 + 1)`.
pub struct FrozenState<'a> {
    model: &'a dyn FluxModel,
    grid: Grid2D,
    time: f64,
    sign: f64,
    channels: usize,
    rx: Vec<f64>,
    ry: Vec<f64>,
    vx: Option<Vec<f64>>,
    vy: Option<Vec<f64>>,
}

impl<'a> FrozenState<'a> {
    pub fn new(
        model: &'a dyn FluxModel,
        tables: &SampledKernelTables,
        conv: &InterfaceConvolutions,
        field: &Field,
        sign: f64,
    ) -> Self {
        let grid = *field.grid();
        let (n1, n2) = (grid.n1(), grid.n2());
        let mc = conv.channels();
        let mut rx = vec![0.0; (n1 + 1) * n2 * mc];
        let mut ry = vec![0.0; n1 * (n2 + 1) * mc];
        for j in 0..n2 {
            for s in 0..=n1 {
                for m in 0..mc {
                    rx[(j * (n1 + 1) + s) * mc + m] = if s > 0 {
                        conv.rx(m, s - 1, j)
                    } else if grid.is_periodic() {
                        conv.rx(m, n1 - 1, j)
                    } else {
                        boundary_value(tables, field, Axis::X1, m, j)
                    };
                }
            }
        }
        for s in 0..=n2 {
            for i in 0..n1 {
                for m in 0..mc {
                    ry[(s * n1 + i) * mc + m] = if s > 0 {
                        conv.ry(m, i, s - 1)
                    } else if grid.is_periodic() {
                        conv.ry(m, i, n2 - 1)
                    } else {
                        boundary_value(tables, field, Axis::X2, m, i)
                    };
                }
            }
        }
        let mut state = Self { model, grid, time: field.time(), sign, channels: mc, rx, ry, vx: None, vy: None };
        if let Some(mult) = model.multiplicative() {
            let species = model.species();
            let nx = (n1 + 1) * n2;
            let ny = n1 * (n2 + 1);
            let vx: Vec<f64> = (0..species * nx)
                .into_par_iter()
                .map(|flat| {
                    let (k, slot) = (flat / nx, flat % nx);
                    let (s, j) = (slot % (n1 + 1), slot / (n1 + 1));
                    let x = state.x_location(Axis::X1, s, j);
                    sign * mult.nu(state.time, x, k, state.r_slot(Axis::X1, s, j))[0]
                })
                .collect();
            let vy: Vec<f64> = (0..species * ny)
                .into_par_iter()
                .map(|flat| {
                    let (k, slot) = (flat / ny, flat % ny);
                    let (i, s) = (slot % n1, slot / n1);
                    let x = state.x_location(Axis::X2, i, s);
                    sign * mult.nu(state.time, x, k, state.r_slot(Axis::X2, i, s))[1]
                })
                .collect();
            state.vx = Some(vx);
            state.vy = Some(vy);
        }
        state
    }

    fn x_location(&self, axis: Axis, a: usize, b: usize) -> [f64; 2] {
        let [x1_min, _, x2_min, _] = self.grid.domain();
        match axis {
            Axis::X1 => [x1_min + a as f64 * self.grid.dx1(), x2_min + (b as f64 + 0.5) * self.grid.dx2()],
            Axis::X2 => [x1_min + (a as f64 + 0.5) * self.grid.dx1(), x2_min + b as f64 * self.grid.dx2()],
        }
    }

    fn r_slot(&self, axis: Axis, a: usize, b: usize) -> &[f64] {
        let mc = self.channels;
        match axis {
            Axis::X1 => {
                let o = (b * (self.grid.n1() + 1) + a) * mc;
                &self.rx[o..o + mc]
            }
            Axis::X2 => {
                let o = (b * self.grid.n1() + a) * mc;
                &self.ry[o..o + mc]
            }
        }
    }

    /// Frozen flux of species `k` at x-slot `(s, j)` or y-slot `(i, s)`.
    pub fn frozen(&self, axis: Axis, k: usize, a: usize, b: usize) -> FrozenFlux<'_> {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        match (axis, &self.vx, &self.vy, self.model.multiplicative()) {
            (Axis::X1, Some(vx), _, Some(m)) => {
                FrozenFlux::Split { model: m, k, v: vx[k * (n1 + 1) * n2 + b * (n1 + 1) + a] }
            }
            (Axis::X2, _, Some(vy), Some(m)) => {
                FrozenFlux::Split { model: m, k, v: vy[k * n1 * (n2 + 1) + b * n1 + a] }
            }
            _ => FrozenFlux::General {
                model: self.model,
                t: self.time,
                x: self.x_location(axis, a, b),
                k,
                r: self.r_slot(axis, a, b),
                axis,
                sign: self.sign,
            },
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
}

/// Convolution at the left (bottom) boundary interface of a zero-extended
/// grid, which the interface arrays do not cover.
fn boundary_value(tables: &SampledKernelTables, field: &Field, axis: Axis, m: usize, line: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..tables.species() {
        let [h1, h2] = tables.half_extent(m, k);
        for q in -(h2 as isize)..=h2 as isize {
            for p in -(h1 as isize)..=h1 as isize {
                let (w, ci, cj) = match axis {
                    Axis::X1 => (tables.x_face(m, k, p, q), -1 - p, line as isize - q),
                    Axis::X2 => (tables.y_face(m, k, p, q), line as isize - p, -1 - q),
                };
                if w == 0.0 || ci < 0 || cj < 0 {
                    continue;
                }
                let (ci, cj) = (ci as usize, cj as usize);
                if ci < field.grid().n1() && cj < field.grid().n2() {
                    acc += w * field.get(k, ci, cj);
                }
            }
        }
    }
    acc
}

pub fn convolve(config: &SchemeConfig, tables: &SampledKernelTables, field: &Field) -> Result<InterfaceConvolutions> {
    match config.convolution {
        ConvolutionPath::Fast => convolve_fast(tables, field),
        ConvolutionPath::Direct => convolve_direct(tables, field),
    }
}

/// States of species `k` as seen by the fluxes (clamped onto the admissible
/// interval) and the number of cells that had to be clamped.
pub fn flux_states<'f>(model: &dyn FluxModel, field: &'f Field, k: usize) -> (std::borrow::Cow<'f, [f64]>, usize) {
    let plane = field.plane(k);
    let Some(iv) = model.admissible(k) else {
        return (plane.into(), 0);
    };
    let outside = plane.iter().filter(|v| !iv.contains(**v)).count();
    if outside == 0 {
        (plane.into(), 0)
    } else {
        (plane.iter().map(|v| iv.clamp(*v)).collect::<Vec<_>>().into(), outside)
    }
}

/// Interface fluxes of one species: x-fluxes as `(n1 + 1) x n2` slots and
/// y-fluxes as `n1 x (n2 + 1)` slots.
pub fn interface_fluxes(
    choice: &NumericalFluxChoice,
    frozen: &FrozenState<'_>,
    states: &[f64],
    k: usize,
) -> (Vec<f64>, Vec<f64>) {
    let grid = *frozen.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let periodic = grid.is_periodic();
    let at = |i: isize, j: isize| -> f64 {
        match (grid.shift(0, i, n1), grid.shift(0, j, n2)) {
            (Some(a), Some(b)) => states[grid.idx(a, b)],
            _ => 0.0,
        }
    };
    let mut fx = vec![0.0; (n1 + 1) * n2];
    fx.par_chunks_mut(n1 + 1).enumerate().for_each(|(j, row)| {
        for (s, slot) in row.iter_mut().enumerate().skip(1) {
            let a = at(s as isize - 1, j as isize);
            let b = at(s as isize, j as isize);
            *slot = choice.eval(&frozen.frozen(Axis::X1, k, s, j), a, b);
        }
        row[0] =
            if periodic { row[n1] } else { choice.eval(&frozen.frozen(Axis::X1, k, 0, j), 0.0, at(0, j as isize)) };
    });
    let mut fy = vec![0.0; n1 * (n2 + 1)];
    fy.par_chunks_mut(n1).enumerate().for_each(|(s, row)| {
        if s == 0 {
            return;
        }
        for (i, slot) in row.iter_mut().enumerate() {
            let a = at(i as isize, s as isize - 1);
            let b = at(i as isize, s as isize);
            *slot = choice.eval(&frozen.frozen(Axis::X2, k, i, s), a, b);
        }
    });
    if periodic {
        let (head, tail) = fy.split_at_mut(n1);
        head.copy_from_slice(&tail[(n2 - 1) * n1..]);
    } else {
        for (i, slot) in fy[..n1].iter_mut().enumerate() {
            *slot = choice.eval(&frozen.frozen(Axis::X2, k, i, 0), 0.0, at(i as isize, 0));
        }
    }
    (fx, fy)
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub field: Field,
    /// Cells whose state had to be clamped onto the admissible interval
    /// before evaluating fluxes.
    pub clamped: usize,
}

/// One explicit step of size `dt`.
pub fn step(
    field: &Field,
    dt: f64,
    config: &SchemeConfig,
    model: &dyn FluxModel,
    tables: &SampledKernelTables,
) -> Result<StepOutput> {
    step_indexed(field, dt, config, model, tables, 0)
}

fn step_indexed(
    field: &Field,
    dt: f64,
    config: &SchemeConfig,
    model: &dyn FluxModel,
    tables: &SampledKernelTables,
    n: usize,
) -> Result<StepOutput> {
    if field.species() != model.species() {
        return Err(Error::ShapeMismatch(format!(
            "field has {} species, model expects {}",
            field.species(),
            model.species()
        )));
    }
    let conv = convolve(config, tables, field)?;
    let frozen = FrozenState::new(model, tables, &conv, field, config.direction.sign());
    let grid = *field.grid();
    let (n1, n2) = (grid.n1(), grid.n2());
    let (l1, l2) = (dt / grid.dx1(), dt / grid.dx2());
    let mut out = field.clone().with_time(field.time() + dt);
    let mut clamped = 0;
    for k in 0..field.species() {
        let (states, c) = flux_states(model, field, k);
        clamped += c;
        let (fx, fy) = interface_fluxes(&config.flux, &frozen, &states, k);
        out.plane_mut(k).par_chunks_mut(n1).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                let dfx = fx[j * (n1 + 1) + i + 1] - fx[j * (n1 + 1) + i];
                let dfy = fy[(j + 1) * n1 + i] - fy[j * n1 + i];
                *v -= l1 * dfx + l2 * dfy;
            }
        });
        if let Some(pos) = out.plane(k).iter().position(|v| !v.is_finite()) {
            return Err(Error::StepFailure { step: n, species: k, i: pos % n1, j: pos / n1 });
        }
    }
    debug_assert_eq!(out.plane(0).len(), n1 * n2);
    Ok(StepOutput { field: out, clamped })
}

/// Summary of one accepted step, also the JSONL step-log record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    pub dt: f64,
    pub mass: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub tv: Vec<f64>,
}

impl StepRecord {
    pub fn of(n: usize, dt: f64, field: &Field) -> Self {
        let species = field.species();
        let mut min = Vec::with_capacity(species);
        let mut max = Vec::with_capacity(species);
        for k in 0..species {
            min.push(field.plane(k).iter().copied().fold(f64::INFINITY, f64::min));
            max.push(field.plane(k).iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Self { n, t: field.time(), dt, mass: discrete_mass(field), min, max, tv: total_variation(field) }
    }
}

/// Writes one JSON object per line.
pub fn write_step_log<W: Write>(records: &[StepRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Parse(e.to_string()))?;
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub field: Field,
    /// Record 0 describes the initial state (with `dt = 0`).
    pub records: Vec<StepRecord>,
    pub clamped: usize,
}

/// Hook invoked after every accepted step with `(n, before, after, dt)`.
pub type StepObserver<'o> = dyn FnMut(usize, &Field, &Field, f64) -> Result<()> + 'o;

/// Integrates from `initial.time()` to `config.t_end`; the last step is
/// shortened to land on `t_end` exactly.
pub fn run(
    initial: &Field,
    config: &SchemeConfig,
    model: &dyn FluxModel,
    tables: &SampledKernelTables,
) -> Result<RunOutput> {
    run_observed(initial, config, model, tables, &mut |_, _, _, _| Ok(()))
}

pub fn run_observed(
    initial: &Field,
    config: &SchemeConfig,
    model: &dyn FluxModel,
    tables: &SampledKernelTables,
    observer: &mut StepObserver<'_>,
) -> Result<RunOutput> {
    config.flux.validate(model)?;
    if initial.grid() != tables.grid() {
        return Err(Error::ShapeMismatch("initial field and kernel tables use different grids".into()));
    }
    let dt = compute_dt(config, initial.grid())?;
    let mut field = initial.clone();
    let mut records = vec![StepRecord::of(0, 0.0, &field)];
    let mut clamped = 0;
    let mut n = 0;
    while field.time() < config.t_end {
        let remaining = config.t_end - field.time();
        let last = remaining <= dt * (1.0 + 1e-10);
        let h = if last { remaining } else { dt };
        n += 1;
        let out = step_indexed(&field, h, config, model, tables, n)?;
        let next = if last { out.field.with_time(config.t_end) } else { out.field };
        clamped += out.clamped;
        observer(n, &field, &next, h)?;
        records.push(StepRecord::of(n, h, &next));
        field = next;
    }
    Ok(RunOutput { field, records, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::{FluxVariant, Multiplicative};
    use crate::models::EncryptionModel;
    use crate::nonlocal::sample_kernels;

    fn unit_lipschitz_config(flux: NumericalFluxChoice) -> SchemeConfig {
        SchemeConfig {
            flux,
            cfl_factor: 1.0,
            lipschitz: [[1.0, 1.0], [1.0, 1.0]],
            t_end: 1.0,
            direction: Direction::Forward,
            convolution: ConvolutionPath::Fast,
        }
    }

    #[test]
    fn dt_examples() {
        let g = Grid2D::square(10, 0.0, 1.0).unwrap();
        let cfg = unit_lipschitz_config(NumericalFluxChoice::upwind());
        assert!((compute_dt(&cfg, &g).unwrap() - 0.25 * g.dx1()).abs() < 1e-16);
        let half = cfg.with_cfl(0.5);
        assert!((compute_dt(&half, &g).unwrap() - 0.125 * g.dx1()).abs() < 1e-16);
        let aniso = Grid2D::new(10, 20, [0.0, 1.0, 0.0, 1.0], crate::grid::Boundary::Periodic).unwrap();
        assert_eq!(aniso.dx1(), 2.0 * aniso.dx2());
        assert!((compute_dt(&cfg, &aniso).unwrap() - 0.25 * aniso.dx2()).abs() < 1e-16);
    }

    #[test]
    fn dt_rejects_bad_config() {
        let g = Grid2D::square(10, 0.0, 1.0).unwrap();
        let cfg = unit_lipschitz_config(NumericalFluxChoice::upwind());
        assert!(compute_dt(&cfg.with_cfl(0.0), &g).is_err());
        assert!(compute_dt(&cfg.with_lipschitz([[0.0; 2]; 2]), &g).is_err());
        assert!(compute_dt(&cfg.with_lipschitz([[-1.0, 1.0], [1.0, 1.0]]), &g).is_err());
    }

    #[test]
    fn zero_and_constant_fields_do_not_move() {
        let model = EncryptionModel::new(0.8, 5.0);
        let g = Grid2D::square(16, -1.0, 1.0).unwrap();
        let tables = sample_kernels(&model.kernels(), &g).unwrap();
        let flux = Multiplicative(model);
        for variant in [FluxVariant::Upwind, FluxVariant::LaxFriedrichsAcg] {
            let cfg = unit_lipschitz_config(NumericalFluxChoice::new(variant, 1.0));
            let dt = compute_dt(&cfg, &g).unwrap();
            let z = step(&Field::zeros(g, 1), dt, &cfg, &flux, &tables).unwrap();
            assert!(z.field.values().iter().all(|v| *v == 0.0));
            let c = Field::from_values(g, 1, vec![2.0; 256], 0.0).unwrap();
            let out = step(&c, dt, &cfg, &flux, &tables).unwrap();
            for v in out.field.values() {
                assert!((v - 2.0).abs() < 1e-13, "{variant}: {v}");
            }
        }
    }

    #[test]
    fn t_end_zero_returns_initial() {
        let model = EncryptionModel::new(0.8, 5.0);
        let g = Grid2D::square(8, -1.0, 1.0).unwrap();
        let tables = sample_kernels(&model.kernels(), &g).unwrap();
        let cfg = unit_lipschitz_config(NumericalFluxChoice::upwind()).with_t_end(0.0);
        let f = Field::from_values(g, 1, (0..64).map(|v| v as f64).collect(), 0.0).unwrap();
        let out = run(&f, &cfg, &Multiplicative(model), &tables).unwrap();
        assert_eq!(out.field, f);
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn final_step_lands_on_t_end() {
        let model = EncryptionModel::new(0.8, 5.0);
        let g = Grid2D::square(10, -1.0, 1.0).unwrap();
        let tables = sample_kernels(&model.kernels(), &g).unwrap();
        // dt = 0.05, 0.12 / 0.05 = 2.4 steps
        let cfg = unit_lipschitz_config(NumericalFluxChoice::upwind()).with_t_end(0.12);
        let f = Field::from_values(g, 1, vec![1.0; 100], 0.0).unwrap();
        let out = run(&f, &cfg, &Multiplicative(model), &tables).unwrap();
        let times: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 4);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 0.12);
        assert!((out.records[3].dt - 0.02).abs() < 1e-15);
    }

    #[test]
    fn nan_reports_cell() {
        let bad = crate::flux::FnFluxModel::new(1, 1, None, [1.0, 1.0], |_, x, _, rho, _| {
            if x[0] > 0.5 {
                [f64::NAN, 0.0]
            } else {
                [rho, 0.0]
            }
        });
        let g = Grid2D::square(4, 0.0, 1.0).unwrap();
        let kernels = crate::nonlocal::KernelSet::new(1, 1).with_kernel(0, 0, 0.25, |_| 1.0).unwrap();
        let tables = sample_kernels(&kernels, &g).unwrap();
        let cfg = unit_lipschitz_config(NumericalFluxChoice::new(FluxVariant::LaxFriedrichsAcg, 1.0));
        let f = Field::from_values(g, 1, vec![1.0; 16], 0.0).unwrap();
        match step(&f, 0.01, &cfg, &bad, &tables) {
            Err(Error::StepFailure { species: 0, i, j, .. }) => assert!(i < 4 && j < 4),
            other => panic!("expected step failure, got {other:?}"),
        }
    }
}
