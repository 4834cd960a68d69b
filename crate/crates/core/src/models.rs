//! The time-reversible encryption model
//!
//! ```text
//! d_t rho + div( rho * J grad(eta * rho) / sqrt(1 + |grad(eta * rho)|^2) ) = 0
//! ```
//!
//! with `J` the rotation by 90 degrees and `eta = A cos^3(pi |x|^2 / (2 l^2))`
//! on the open ball of radius `l`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::l1_distance;
use crate::error::{Error, Result};
use crate::flux::{FluxModel, FnFluxModel, GShape, Multiplicative, MultiplicativeFlux};
use crate::grid::{project_initial_data, AdmissibleInterval, Boundary, Field, Grid2D, ProjectionRule};
use crate::nonlocal::{KernelSet, SampledKernelTables};
use crate::scheme::{run, Direction, SchemeConfig};

/// `A cos^3(pi |x|^2 / (2 l^2))` inside the ball, zero outside.
pub fn kernel_value(ell: f64, amplitude: f64, x: [f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 >= ell * ell {
        return 0.0;
    }
    amplitude * (0.5 * PI * r2 / (ell * ell)).cos().powi(3)
}

/// Analytic gradient of [`kernel_value`].
pub fn kernel_gradient(ell: f64, amplitude: f64, x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 >= ell * ell {
        return [0.0, 0.0];
    }
    let u = 0.5 * PI * r2 / (ell * ell);
    let c = u.cos();
    let s = amplitude * 3.0 * c * c * (-u.sin()) * PI / (ell * ell);
    [s * x[0], s * x[1]]
}

/// `J r / sqrt(1 + |r|^2)` with `J = [[0, -1], [1, 0]]`.
pub fn rotated_velocity(r: [f64; 2]) -> [f64; 2] {
    let scale = 1.0 / (1.0 + r[0] * r[0] + r[1] * r[1]).sqrt();
    [-r[1] * scale, r[0] * scale]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncryptionModel {
    ell: f64,
    amplitude: f64,
    interval: Option<AdmissibleInterval>,
}

impl EncryptionModel {
    /// Model on the whole real line (no state clamping).
    pub fn new(ell: f64, amplitude: f64) -> Self {
        Self { ell, amplitude, interval: None }
    }

    pub fn with_interval(mut self, interval: Option<AdmissibleInterval>) -> Self {
        self.interval = interval;
        self
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell.is_finite() && self.ell > 0.0) {
            return Err(Error::Model(format!("kernel scale must be positive, got {}", self.ell)));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Model(format!("kernel amplitude must be finite, got {}", self.amplitude)));
        }
        Ok(())
    }

    /// Two channels: the partial derivatives of the kernel.
    pub fn kernels(&self) -> KernelSet {
        let (ell, amp) = (self.ell, self.amplitude);
        KernelSet::new(2, 1)
            .with_kernel(0, 0, ell, move |x| kernel_gradient(ell, amp, x)[0])
            .and_then(|k| k.with_kernel(1, 0, ell, move |x| kernel_gradient(ell, amp, x)[1]))
            .expect("kernel scale validated by caller")
    }
}

impl MultiplicativeFlux for EncryptionModel {
    fn species(&self) -> usize {
        1
    }

    fn channels(&self) -> usize {
        2
    }

    fn admissible(&self, _k: usize) -> Option<AdmissibleInterval> {
        self.interval
    }

    fn g(&self, _k: usize, rho: f64) -> f64 {
        rho
    }

    fn g_prime_bound(&self, _k: usize) -> f64 {
        1.0
    }

    fn g_shape(&self, _k: usize) -> GShape {
        GShape::Increasing
    }

    fn nu(&self, _t: f64, _x: [f64; 2], _k: usize, r: &[f64]) -> [f64; 2] {
        rotated_velocity([r[0], r[1]])
    }

    fn nu_bound(&self, _k: usize) -> [f64; 2] {
        [1.0, 1.0]
    }
}

type ProfileFn = dyn Fn([f64; 2]) -> f64 + Send + Sync;

/// Initial data for a single species.
#[derive(Clone)]
pub enum InitialProfile {
    /// `1 + (4 sin^2 x1 + 3 sin^2 x2)` on `|x| <= 3`, `1` elsewhere.
    Nonsmooth,
    /// `sin(pi x1 + pi/3) sin(pi x2 + pi/3)`.
    Smooth,
    Custom(Arc<ProfileFn>),
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialProfile::Nonsmooth => f.write_str("Nonsmooth"),
            InitialProfile::Smooth => f.write_str("Smooth"),
            InitialProfile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl InitialProfile {
    pub fn custom<F: Fn([f64; 2]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        InitialProfile::Custom(Arc::new(f))
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            InitialProfile::Nonsmooth => {
                let bump =
                    if x[0].hypot(x[1]) <= 3.0 { 4.0 * x[0].sin().powi(2) + 3.0 * x[1].sin().powi(2) } else { 0.0 };
                1.0 + bump
            }
            InitialProfile::Smooth => (PI * x[0] + PI / 3.0).sin() * (PI * x[1] + PI / 3.0).sin(),
            InitialProfile::Custom(f) => f(x),
        }
    }

    pub fn project(&self, grid: &Grid2D, rule: ProjectionRule) -> Result<Field> {
        project_initial_data(|_, x| self.eval(x), 1, grid, rule)
    }
}

/// Horizon used for the smooth preset.
pub const SMOOTH_HORIZON: f64 = 0.3;

/// How the flux is exposed to the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxForm {
    /// `g(rho) nu(R)`; every flux variant applies.
    #[default]
    Multiplicative,
    /// Opaque `f(t, x, rho, R)`; only the classical Lax-Friedrichs flux applies.
    General,
}

/// A named, fully pinned experiment.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub domain: [f64; 4],
    pub model: EncryptionModel,
    pub form: FluxForm,
    pub profile: InitialProfile,
    pub t_end: f64,
}

impl Preset {
    pub const NAMES: [&'static str; 2] = ["encdec-nonsmooth", "encdec-smooth"];

    pub fn nonsmooth() -> Self {
        Self {
            name: "encdec-nonsmooth".into(),
            domain: [-6.0, 6.0, -6.0, 6.0],
            model: EncryptionModel::new(2.0, 1.0).with_interval(Some(AdmissibleInterval::half_line())),
            form: FluxForm::Multiplicative,
            profile: InitialProfile::Nonsmooth,
            t_end: 0.75,
        }
    }

    /// The data change sign, so the model runs without an invariant interval.
    pub fn smooth() -> Self {
        Self {
            name: "encdec-smooth".into(),
            domain: [-1.0, 1.0, -1.0, 1.0],
            model: EncryptionModel::new(0.8, 5.0),
            form: FluxForm::Multiplicative,
            profile: InitialProfile::Smooth,
            t_end: SMOOTH_HORIZON,
        }
    }

    pub fn flux_model(&self) -> Box<dyn FluxModel> {
        match self.form {
            FluxForm::Multiplicative => Box::new(Multiplicative(self.model)),
            FluxForm::General => {
                let model = self.model;
                Box::new(FnFluxModel::new(1, 2, model.interval, [1.0, 1.0], move |_, _, _, rho, r| {
                    let v = rotated_velocity([r[0], r[1]]);
                    [rho * v[0], rho * v[1]]
                }))
            }
        }
    }

    pub fn grid(&self, n: usize) -> Result<Grid2D> {
        Grid2D::new(n, n, self.domain, Boundary::Periodic)
    }

    pub fn initial(&self, grid: &Grid2D) -> Result<Field> {
        self.profile.project(grid, ProjectionRule::Midpoint)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "encdec-nonsmooth" => Ok(Preset::nonsmooth()),
            "encdec-smooth" => Ok(Preset::smooth()),
            other => {
                Err(Error::config(format!("unknown preset '{other}', expected one of {}", Preset::NAMES.join(", "))))
            }
        }
    }
}

/// Forward run to time `t`.
pub fn encrypt(
    initial: &Field,
    model: &dyn FluxModel,
    tables: &SampledKernelTables,
    config: &SchemeConfig,
    t: f64,
) -> Result<Field> {
    let cfg = config.with_direction(Direction::Forward).with_t_end(initial.time() + t);
    Ok(run(initial, &cfg, model, tables)?.field)
}

/// Runs the negated flux for duration `t` and stamps the result with time 0.
pub fn decrypt(
    encrypted: &Field,
    model: &dyn FluxModel,
    tables: &SampledKernelTables,
    config: &SchemeConfig,
    t: f64,
) -> Result<Field> {
    let start = encrypted.clone().with_time(0.0);
    let cfg = config.with_direction(Direction::Reversed).with_t_end(t);
    Ok(run(&start, &cfg, model, tables)?.field.with_time(0.0))
}

/// `dx1 dx2 sum |decrypted - initial|` per species.
pub fn reconstruction_error(decrypted: &Field, initial: &Field) -> Result<Vec<f64>> {
    l1_distance(decrypted, initial)
}
