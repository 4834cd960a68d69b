//! Flux models `f^k(t, x, rho, R)` and the two-point numerical fluxes built
//! on the interface-frozen (reduced) flux.

use std::fmt;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AdmissibleInterval;

/// Coordinate direction of an interface flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
        }
    }
}

/// Shape information that lets the Riemann solver skip the numerical
/// search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GShape {
    Increasing,
    Decreasing,
    /// Concave with its maximum at the given state.
    Concave {
        argmax: f64,
    },
    /// Convex with its minimum at the given state.
    Convex {
        argmin: f64,
    },
    General,
}

/// A system flux `f^k(t, x, rho, R)` with values in R^2.
pub trait FluxModel: Send + Sync {
    fn species(&self) -> usize;

    /// Number of convolution channels `M` the flux reads.
    fn channels(&self) -> usize;

    /// Invariant interval for species `k`. `None` means the flux is defined
    /// on the whole real line and states are never clamped.
    fn admissible(&self, k: usize) -> Option<AdmissibleInterval>;

    fn evaluate(&self, t: f64, x: [f64; 2], k: usize, rho: f64, r: &[f64]) -> [f64; 2];

    /// Declared bound on `|d f_l / d rho|` per direction.
    fn lipschitz_rho(&self, k: usize) -> [f64; 2];

    fn multiplicative(&self) -> Option<&dyn MultiplicativeFlux> {
        None
    }
}

/// Fluxes of the form `g^k(rho) nu^k(t, x, R)`.
pub trait MultiplicativeFlux: Send + Sync {
    fn species(&self) -> usize;
    fn channels(&self) -> usize;
    fn admissible(&self, k: usize) -> Option<AdmissibleInterval>;
    fn g(&self, k: usize, rho: f64) -> f64;
    /// `sup |g'|` over the admissible interval.
    fn g_prime_bound(&self, k: usize) -> f64;
    fn g_shape(&self, _k: usize) -> GShape {
        GShape::General
    }
    fn nu(&self, t: f64, x: [f64; 2], k: usize, r: &[f64]) -> [f64; 2];
    /// `sup |nu_l|` per direction.
    fn nu_bound(&self, k: usize) -> [f64; 2];
}

/// Adapter turning a [`MultiplicativeFlux`] into a [`FluxModel`].
#[derive(Debug, Clone)]
pub struct Multiplicative<M>(pub M);

impl<M: MultiplicativeFlux> FluxModel for Multiplicative<M> {
    fn species(&self) -> usize {
        self.0.species()
    }

    fn channels(&self) -> usize {
        self.0.channels()
    }

    fn admissible(&self, k: usize) -> Option<AdmissibleInterval> {
        self.0.admissible(k)
    }

    fn evaluate(&self, t: f64, x: [f64; 2], k: usize, rho: f64, r: &[f64]) -> [f64; 2] {
        let g = self.0.g(k, rho);
        let nu = self.0.nu(t, x, k, r);
        [g * nu[0], g * nu[1]]
    }

    fn lipschitz_rho(&self, k: usize) -> [f64; 2] {
        let lg = self.0.g_prime_bound(k);
        let nb = self.0.nu_bound(k);
        [lg * nb[0], lg * nb[1]]
    }

    fn multiplicative(&self) -> Option<&dyn MultiplicativeFlux> {
        Some(&self.0)
    }
}

type FluxFn = dyn Fn(f64, [f64; 2], usize, f64, &[f64]) -> [f64; 2] + Send + Sync;

/// General flux model from a closure, for fluxes without a product
/// structure.
#[derive(Clone)]
pub struct FnFluxModel {
    species: usize,
    channels: usize,
    interval: Option<AdmissibleInterval>,
    lipschitz: [f64; 2],
    f: Arc<FluxFn>,
}

impl fmt::Debug for FnFluxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnFluxModel")
            .field("species", &self.species)
            .field("channels", &self.channels)
            .field("interval", &self.interval)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl FnFluxModel {
    pub fn new<F>(
        species: usize,
        channels: usize,
        interval: Option<AdmissibleInterval>,
        lipschitz: [f64; 2],
        f: F,
    ) -> Self
    where
        F: Fn(f64, [f64; 2], usize, f64, &[f64]) -> [f64; 2] + Send + Sync + 'static,
    {
        Self { species, channels, interval, lipschitz, f: Arc::new(f) }
    }
}

impl FluxModel for FnFluxModel {
    fn species(&self) -> usize {
        self.species
    }

    fn channels(&self) -> usize {
        self.channels
    }

    fn admissible(&self, _k: usize) -> Option<AdmissibleInterval> {
        self.interval
    }

    fn evaluate(&self, t: f64, x: [f64; 2], k: usize, rho: f64, r: &[f64]) -> [f64; 2] {
        (self.f)(t, x, k, rho, r)
    }

    fn lipschitz_rho(&self, _k: usize) -> [f64; 2] {
        self.lipschitz
    }
}

/// Samples the flux at the ends of the admissible interval and checks that
/// it vanishes there.
pub fn check_zero_endpoints(model: &dyn FluxModel, r_samples: &[Vec<f64>], tol: f64) -> Result<()> {
    for k in 0..model.species() {
        let Some(iv) = model.admissible(k) else { continue };
        let ends = std::iter::once(iv.rho_min()).chain(iv.rho_max());
        for rho in ends {
            for r in r_samples {
                for (t, x) in [(0.0, [0.0, 0.0]), (1.0, [0.5, -0.25])] {
                    let f = model.evaluate(t, x, k, rho, r);
                    if f[0].abs() > tol || f[1].abs() > tol {
                        return Err(Error::Model(format!("flux of species {k} does not vanish at rho = {rho}: {f:?}")));
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum FluxVariant {
    /// Classical Lax-Friedrichs on the reduced flux.
    LaxFriedrichsAcg,
    /// Lax-Friedrichs on `g sgn(V)` scaled by `|V|`.
    LaxFriedrichsSplit,
    Godunov,
    Upwind,
}

impl FluxVariant {
    pub fn name(self) -> &'static str {
        match self {
            FluxVariant::LaxFriedrichsAcg => "lxf",
            FluxVariant::LaxFriedrichsSplit => "lxf-split",
            FluxVariant::Godunov => "godunov",
            FluxVariant::Upwind => "upwind",
        }
    }

    pub fn needs_multiplicative(self) -> bool {
        !matches!(self, FluxVariant::LaxFriedrichsAcg)
    }
}

impl fmt::Display for FluxVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FluxVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lxf" | "lax-friedrichs" | "lax-friedrichs-acg" => Ok(FluxVariant::LaxFriedrichsAcg),
            "lxf-split" | "lax-friedrichs-split" => Ok(FluxVariant::LaxFriedrichsSplit),
            "godunov" => Ok(FluxVariant::Godunov),
            "upwind" => Ok(FluxVariant::Upwind),
            other => Err(Error::config(format!("unknown flux variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericalFluxChoice {
    pub variant: FluxVariant,
    /// Viscosity coefficient of the Lax-Friedrichs variants.
    pub alpha: f64,
}

impl NumericalFluxChoice {
    pub fn new(variant: FluxVariant, alpha: f64) -> Self {
        Self { variant, alpha }
    }

    pub fn upwind() -> Self {
        Self::new(FluxVariant::Upwind, 0.0)
    }

    pub fn godunov() -> Self {
        Self::new(FluxVariant::Godunov, 0.0)
    }

    /// Rejects variants that need a product structure the model lacks.
    pub fn validate(&self, model: &dyn FluxModel) -> Result<()> {
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::config(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if self.variant.needs_multiplicative() && model.multiplicative().is_none() {
            return Err(Error::config(format!(
                "flux `{}` requires a multiplicative flux model g(rho) nu(t, x, R)",
                self.variant
            )));
        }
        Ok(())
    }

    /// Smallest admissible viscosity for the Lax-Friedrichs variants, from
    /// the model's declared bounds. Zero for the other variants.
    pub fn required_alpha(&self, model: &dyn FluxModel) -> f64 {
        (0..model.species())
            .map(|k| match self.variant {
                FluxVariant::LaxFriedrichsAcg => {
                    let l = model.lipschitz_rho(k);
                    l[0].max(l[1])
                }
                FluxVariant::LaxFriedrichsSplit => model.multiplicative().map_or(f64::INFINITY, |m| m.g_prime_bound(k)),
                _ => 0.0,
            })
            .fold(0.0, f64::max)
    }

    pub fn alpha_condition_holds(&self, model: &dyn FluxModel) -> bool {
        self.alpha >= self.required_alpha(model)
    }

    /// Lipschitz constants `[[L11, L12], [L21, L22]]` of the numerical flux
    /// in its two state arguments, maximised over species.
    pub fn lipschitz_bounds(&self, model: &dyn FluxModel) -> [[f64; 2]; 2] {
        let mut out = [[0.0f64; 2]; 2];
        for k in 0..model.species() {
            for (d, row) in out.iter_mut().enumerate() {
                let l = match (self.variant, model.multiplicative()) {
                    (FluxVariant::LaxFriedrichsAcg, _) => 0.5 * (model.lipschitz_rho(k)[d] + self.alpha),
                    (FluxVariant::LaxFriedrichsSplit, Some(m)) => {
                        0.5 * (m.g_prime_bound(k) + self.alpha) * m.nu_bound(k)[d]
                    }
                    (_, Some(m)) => m.g_prime_bound(k) * m.nu_bound(k)[d],
                    (_, None) => f64::INFINITY,
                };
                row[0] = row[0].max(l);
                row[1] = row[1].max(l);
            }
        }
        out
    }

    /// Numerical flux `F(a, b)` through an interface with frozen data.
    ///
    /// Callers must have run [`NumericalFluxChoice::validate`] against the
    /// model behind `frozen`.
    #[inline]
    pub fn eval(&self, frozen: &FrozenFlux<'_>, a: f64, b: f64) -> f64 {
        match (self.variant, frozen) {
            (FluxVariant::LaxFriedrichsAcg, _) => {
                0.5 * (frozen.reduced(a) + frozen.reduced(b)) - 0.5 * self.alpha * (b - a)
            }
            (FluxVariant::LaxFriedrichsSplit, FrozenFlux::Split { model, k, v }) => {
                let s = sgn(*v);
                // 1/2 ((g(a) + g(b)) s - alpha (b - a)), grouped per argument
                let ga = 0.5 * (s * model.g(*k, a) + self.alpha * a);
                let gb = 0.5 * (s * model.g(*k, b) - self.alpha * b);
                (ga + gb) * v.abs()
            }
            (FluxVariant::Godunov, FrozenFlux::Split { model, k, v }) => {
                let star = godunov_riemann_state(|r| model.g(*k, r), sgn(*v), a, b, model.g_shape(*k));
                model.g(*k, star) * v
            }
            (FluxVariant::Upwind, FrozenFlux::Split { model, k, v }) => {
                if *v >= 0.0 {
                    model.g(*k, a) * v
                } else {
                    model.g(*k, b) * v
                }
            }
            (_, FrozenFlux::General { .. }) => f64::NAN,
        }
    }
}

/// `sgn` with `sgn(0) = 0`.
#[inline]
pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The flux at one interface with `t`, `x` and `R` frozen.
#[derive(Clone, Copy)]
pub enum FrozenFlux<'a> {
    General {
        model: &'a dyn FluxModel,
        t: f64,
        x: [f64; 2],
        k: usize,
        r: &'a [f64],
        axis: Axis,
        /// `-1` flips the flux for time-reversed integration.
        sign: f64,
    },
    /// Product form with the velocity component `V` already evaluated (and
    /// sign-adjusted).
    Split { model: &'a dyn MultiplicativeFlux, k: usize, v: f64 },
}

impl<'a> FrozenFlux<'a> {
    /// Freezes `model` at an interface, using the split form whenever the
    /// model provides one.
    pub fn new(model: &'a dyn FluxModel, t: f64, x: [f64; 2], k: usize, r: &'a [f64], axis: Axis, sign: f64) -> Self {
        match model.multiplicative() {
            Some(m) => FrozenFlux::Split { model: m, k, v: sign * m.nu(t, x, k, r)[axis.index()] },
            None => FrozenFlux::General { model, t, x, k, r, axis, sign },
        }
    }

    #[inline]
    pub fn reduced(&self, rho: f64) -> f64 {
        match self {
            FrozenFlux::General { model, t, x, k, r, axis, sign } => {
                sign * model.evaluate(*t, *x, *k, rho, r)[axis.index()]
            }
            FrozenFlux::Split { model, k, v } => model.g(*k, rho) * v,
        }
    }
}

fn clamp_state(model: &dyn FluxModel, k: usize, rho: f64) -> f64 {
    model.admissible(k).map_or(rho, |iv| iv.clamp(rho))
}

/// Reduced flux `f_axis(t, x, rho, R)`. States outside the admissible
/// interval are clamped onto it.
pub fn reduced_flux(
    model: &dyn FluxModel,
    t: f64,
    x: [f64; 2],
    k: usize,
    rho: f64,
    r: &[f64],
    axis: Axis,
) -> Result<f64> {
    let rho = clamp_state(model, k, rho);
    let v = model.evaluate(t, x, k, rho, r)[axis.index()];
    if !v.is_finite() {
        return Err(Error::Model(format!("flux evaluated to {v} at rho = {rho}, t = {t}, x = {x:?}")));
    }
    Ok(v)
}

/// Numerical flux `F(a, b)` through the interface at `x`, with the same
/// clamping rule as [`reduced_flux`].
#[allow(clippy::too_many_arguments)]
pub fn numerical_flux(
    choice: &NumericalFluxChoice,
    model: &dyn FluxModel,
    t: f64,
    x: [f64; 2],
    k: usize,
    a: f64,
    b: f64,
    r: &[f64],
    axis: Axis,
) -> Result<f64> {
    choice.validate(model)?;
    let frozen = FrozenFlux::new(model, t, x, k, r, axis, 1.0);
    let v = choice.eval(&frozen, clamp_state(model, k, a), clamp_state(model, k, b));
    if !v.is_finite() {
        return Err(Error::Model(format!("numerical flux evaluated to {v}")));
    }
    Ok(v)
}

/// State `rho*` whose flux `g(rho*) sign` is the Godunov flux of the scalar
/// Riemann problem with flux `rho -> sign g(rho)` and data `(a, b)`: the
/// minimum over `[a, b]` when `a <= b`, else the maximum over `[b, a]`.
pub fn godunov_riemann_state<G: Fn(f64) -> f64>(g: G, sign: f64, a: f64, b: f64, shape: GShape) -> f64 {
    if a == b || sign == 0.0 {
        return a;
    }
    let minimize = a <= b;
    let (lo, hi) = if minimize { (a, b) } else { (b, a) };
    let h = |r: f64| sign * g(r);
    // h is increasing/decreasing/concave/convex depending on g and the sign
    let shape = if sign > 0.0 {
        shape
    } else {
        match shape {
            GShape::Increasing => GShape::Decreasing,
            GShape::Decreasing => GShape::Increasing,
            GShape::Concave { argmax } => GShape::Convex { argmin: argmax },
            GShape::Convex { argmin } => GShape::Concave { argmax: argmin },
            GShape::General => GShape::General,
        }
    };
    let better = |x: f64, y: f64| {
        let (hx, hy) = (h(x), h(y));
        if (minimize && hy < hx) || (!minimize && hy > hx) {
            y
        } else {
            x
        }
    };
    match (shape, minimize) {
        (GShape::Increasing, true) | (GShape::Decreasing, false) => lo,
        (GShape::Increasing, false) | (GShape::Decreasing, true) => hi,
        (GShape::Concave { argmax }, false) => argmax.clamp(lo, hi),
        (GShape::Convex { argmin }, true) => argmin.clamp(lo, hi),
        (GShape::Concave { .. }, true) | (GShape::Convex { .. }, false) => better(a, b),
        (GShape::General, _) => {
            let interior = golden_section(&h, lo, hi, minimize);
            better(better(a, b), interior)
        }
    }
}

/// Coarse scan followed by golden-section refinement around the best
/// sample.
fn golden_section<H: Fn(f64) -> f64>(h: &H, lo: f64, hi: f64, minimize: bool) -> f64 {
    const SCAN: usize = 64;
    let key = |x: f64| if minimize { h(x) } else { -h(x) };
    let step = (hi - lo) / SCAN as f64;
    let best = (0..=SCAN).map(|s| lo + s as f64 * step).min_by(|x, y| key(*x).total_cmp(&key(*y))).unwrap_or(lo);
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if key(c) < key(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    let mid = 0.5 * (a + b);
    if key(best) <= key(mid) {
        best
    } else {
        mid
    }
}

/// Lax-Friedrichs viscosity estimated from `|d f / d rho|` on a 1024-point
/// state lattice over `[lo, hi]`, for each probe `R`, times 1.05.
pub fn estimate_alpha(model: &dyn FluxModel, lo: f64, hi: f64, r_probes: &[Vec<f64>]) -> f64 {
    const LATTICE: usize = 1024;
    let h = (hi - lo) / (LATTICE - 1) as f64;
    let mut sup = 0.0f64;
    for k in 0..model.species() {
        for r in r_probes {
            for axis in 0..2 {
                let mut prev = model.evaluate(0.0, [0.0, 0.0], k, lo, r)[axis];
                for s in 1..LATTICE {
                    let cur = model.evaluate(0.0, [0.0, 0.0], k, lo + s as f64 * h, r)[axis];
                    sup = sup.max(((cur - prev) / h).abs());
                    prev = cur;
                }
            }
        }
    }
    1.05 * sup
}

/// Sampling ranges for [`flux_contract_audit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub samples: usize,
    pub seed: u64,
    /// State range, intersected with the admissible interval.
    pub state_range: [f64; 2],
    /// Convolution values are drawn from `[-r_scale, r_scale]^M`.
    pub r_scale: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { samples: 100_000, seed: 0x5eed, state_range: [0.0, 2.0], r_scale: 4.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub variant: String,
    pub alpha: f64,
    pub samples: usize,
    pub alpha_condition: bool,
    /// Max of `|F(a, a) - f(a)| / scale` with `scale = max(|f(a)|, alpha |a| |V|, 1e-300)`.
    pub consistency_max: f64,
    pub monotonicity_violations: usize,
    /// Largest observed monotonicity defect.
    pub monotonicity_defect_max: f64,
    /// Empirical Lipschitz quotients in the first and second argument.
    pub lipschitz_max: [f64; 2],
    /// Max double-difference quotient in the first and second argument
    /// (multiplicative variants only).
    pub double_difference_max: Option<[f64; 2]>,
    /// Reference constant for the double-difference quotient.
    pub double_difference_estimate: Option<f64>,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Randomised check of the numerical flux contract: consistency,
/// monotonicity, Lipschitz quotients and, for the split forms, the
/// double-difference bound in the velocity.
pub fn flux_contract_audit(
    choice: &NumericalFluxChoice,
    model: &dyn FluxModel,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    choice.validate(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let m = model.channels();
    let mut report = AuditReport {
        variant: choice.variant.to_string(),
        alpha: choice.alpha,
        samples: opts.samples,
        alpha_condition: choice.alpha_condition_holds(model),
        ..Default::default()
    };
    let mut r = vec![0.0; m];
    for _ in 0..opts.samples {
        let k = rng.random_range(0..model.species());
        let [lo, hi] = state_bounds(model, k, opts.state_range);
        let t = rng.random_range(0.0..1.0);
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        for v in r.iter_mut() {
            *v = rng.random_range(-opts.r_scale..=opts.r_scale);
        }
        let axis = if rng.random_bool(0.5) { Axis::X1 } else { Axis::X2 };
        let frozen = FrozenFlux::new(model, t, x, k, &r, axis, 1.0);
        let mut draw = || rng.random_range(lo..=hi);
        let (a1, a2, b) = (draw(), draw(), draw());
        let (a1, a2) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };

        let f = frozen.reduced(a1);
        let vel = match frozen {
            FrozenFlux::Split { v, .. } => v.abs(),
            FrozenFlux::General { .. } => 1.0,
        };
        let scale = f.abs().max(choice.alpha * a1.abs() * vel).max(1e-300);
        let cons = (choice.eval(&frozen, a1, a1) - f).abs() / scale;
        report.consistency_max = report.consistency_max.max(cons);

        let f11 = choice.eval(&frozen, a1, b);
        let f21 = choice.eval(&frozen, a2, b);
        let g11 = choice.eval(&frozen, b, a1);
        let g21 = choice.eval(&frozen, b, a2);
        // nondecreasing in the first argument, nonincreasing in the second
        let d1 = f11 - f21;
        let d2 = g21 - g11;
        let tol1 = 1e-12 * (1.0 + f11.abs().max(f21.abs()));
        let tol2 = 1e-12 * (1.0 + g11.abs().max(g21.abs()));
        if d1 > tol1 || d2 > tol2 {
            report.monotonicity_violations += 1;
        }
        report.monotonicity_defect_max = report.monotonicity_defect_max.max(d1.max(d2));
        if a2 > a1 {
            report.lipschitz_max[0] = report.lipschitz_max[0].max((f21 - f11).abs() / (a2 - a1));
            report.lipschitz_max[1] = report.lipschitz_max[1].max((g21 - g11).abs() / (a2 - a1));
        }
    }

    if let Some(mult) = model.multiplicative() {
        let (dd, estimate) = double_difference(choice, mult, opts, &mut rng);
        report.double_difference_max = Some(dd);
        report.double_difference_estimate = Some(estimate);
        if !(dd[0].is_finite() && dd[1].is_finite()) || dd[0].max(dd[1]) > 10.0 * estimate {
            report.violations.push(format!("double-difference quotient {dd:?} exceeds 10x the estimate {estimate}"));
        }
    }

    if report.consistency_max > 1e-14 {
        report.violations.push(format!("consistency residual {:e}", report.consistency_max));
    }
    if report.monotonicity_violations > 0 {
        report.violations.push(format!(
            "{} monotonicity violations (max defect {:e})",
            report.monotonicity_violations, report.monotonicity_defect_max
        ));
    }
    if !report.alpha_condition {
        report.violations.push(format!("alpha = {} below the required {}", choice.alpha, choice.required_alpha(model)));
    }
    Ok(report)
}

fn state_bounds(model: &dyn FluxModel, k: usize, range: [f64; 2]) -> [f64; 2] {
    match model.admissible(k) {
        Some(iv) => {
            let lo = range[0].max(iv.rho_min());
            let hi = iv.rho_max().map_or(range[1], |m| range[1].min(m));
            if hi > lo {
                [lo, hi]
            } else {
                [iv.rho_min(), iv.rho_max().unwrap_or(iv.rho_min() + 1.0)]
            }
        }
        None => range,
    }
}

/// Max over samples of
/// `|F(a,c,V) - F(b,c,V) - F(a,c,W) + F(b,c,W)| / (|a - b| |V - W|)` and
/// the analogous quotient in the second argument, with `V`, `W` drawn over
/// the velocity range. Returns the maxima and the reference constant
/// `max(L_g, (L_g + alpha) / 2)`.
fn double_difference(
    choice: &NumericalFluxChoice,
    mult: &dyn MultiplicativeFlux,
    opts: &AuditOptions,
    rng: &mut ChaCha8Rng,
) -> ([f64; 2], f64) {
    let mut out = [0.0f64; 2];
    let mut estimate = 0.0f64;
    for k in 0..mult.species() {
        let lg = mult.g_prime_bound(k);
        estimate = estimate.max(match choice.variant {
            FluxVariant::LaxFriedrichsSplit => 0.5 * (lg + choice.alpha),
            FluxVariant::LaxFriedrichsAcg => 0.5 * (lg + choice.alpha),
            _ => lg,
        });
    }
    for _ in 0..opts.samples {
        let k = rng.random_range(0..mult.species());
        let [lo, hi] = match mult.admissible(k) {
            Some(iv) => {
                let lo = opts.state_range[0].max(iv.rho_min());
                let hi = iv.rho_max().map_or(opts.state_range[1], |m| opts.state_range[1].min(m));
                [lo, hi.max(lo + 1e-9)]
            }
            None => opts.state_range,
        };
        let vmax = mult.nu_bound(k)[0].max(mult.nu_bound(k)[1]).max(1e-12);
        let a = rng.random_range(lo..=hi);
        let b = rng.random_range(lo..=hi);
        let c = rng.random_range(lo..=hi);
        let v = rng.random_range(-vmax..=vmax);
        let w = rng.random_range(-vmax..=vmax);
        if a == b || v == w {
            continue;
        }
        let split = |v: f64| FrozenFlux::Split { model: mult, k, v };
        let (fv, fw) = (split(v), split(w));
        let denom = (a - b).abs() * (v - w).abs();
        let q1 = (choice.eval(&fv, a, c) - choice.eval(&fv, b, c) - choice.eval(&fw, a, c) + choice.eval(&fw, b, c))
            .abs()
            / denom;
        let q2 = (choice.eval(&fv, c, a) - choice.eval(&fv, c, b) - choice.eval(&fw, c, a) + choice.eval(&fw, c, b))
            .abs()
            / denom;
        out[0] = out[0].max(q1);
        out[1] = out[1].max(q2);
    }
    (out, estimate)
}
