//! Discrete norms, total variation, the cell entropy inequality, and a
//! run-level suite that checks the discrete stability properties of the
//! scheme.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{sgn, Axis, FluxModel};
use crate::grid::Field;
use crate::nonlocal::SampledKernelTables;
use crate::scheme::{compute_dt, convolve, flux_states, FrozenState, SchemeConfig};

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `dx1 dx2 sum |rho^k_ij|` per species.
pub fn discrete_l1(field: &Field) -> Vec<f64> {
    let area = field.grid().cell_area();
    (0..field.species()).map(|k| area * compensated_sum(field.plane(k).iter().map(|v| v.abs()))).collect()
}

/// `dx1 dx2 sum rho^k_ij` per species.
pub fn discrete_mass(field: &Field) -> Vec<f64> {
    let area = field.grid().cell_area();
    (0..field.species()).map(|k| area * compensated_sum(field.plane(k).iter().copied())).collect()
}

pub fn discrete_linf(field: &Field) -> Vec<f64> {
    (0..field.species()).map(|k| field.plane(k).iter().fold(0.0f64, |a, v| a.max(v.abs()))).collect()
}

/// `dx1 dx2 sum |a - b|` per species.
pub fn l1_distance(a: &Field, b: &Field) -> Result<Vec<f64>> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch("fields live on different grids".into()));
    }
    let area = a.grid().cell_area();
    Ok((0..a.species())
        .map(|k| area * compensated_sum(a.plane(k).iter().zip(b.plane(k)).map(|(x, y)| (x - y).abs())))
        .collect())
}

/// `sum |rho_{i+1,j} - rho_{ij}| dx2 + |rho_{i,j+1} - rho_{ij}| dx1` per
/// species. Jumps across the boundary are included: to the wrapped cell on
/// periodic grids, to zero otherwise.
pub fn total_variation(field: &Field) -> Vec<f64> {
    let g = field.grid();
    let (n1, n2) = (g.n1(), g.n2());
    (0..field.species())
        .map(|k| {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for j in 0..n2 {
                for i in 0..n1 {
                    let v = field.get(k, i, j);
                    sx += (field.get_shifted(k, i, j, 1, 0) - v).abs();
                    sy += (field.get_shifted(k, i, j, 0, 1) - v).abs();
                    if !g.is_periodic() {
                        if i == 0 {
                            sx += v.abs();
                        }
                        if j == 0 {
                            sy += v.abs();
                        }
                    }
                }
            }
            sx * g.dx2() + sy * g.dx1()
        })
        .collect()
}

/// 33 equispaced entropy levels spanning the state range of `plane`
/// widened by 10% on each side, cut to `interval` when given.
pub fn kappa_lattice(plane: &[f64], interval: Option<crate::grid::AdmissibleInterval>) -> Vec<f64> {
    const COUNT: usize = 33;
    let lo = plane.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = plane.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if hi > lo { hi - lo } else { 1.0 + lo.abs() };
    let (mut a, mut b) = (lo - 0.1 * range, hi + 0.1 * range);
    if let Some(iv) = interval {
        a = iv.clamp(a);
        b = iv.clamp(b);
    }
    (0..COUNT).map(|s| a + (b - a) * s as f64 / (COUNT - 1) as f64).collect()
}

/// Largest left-hand side of the discrete cell entropy inequality over all
/// cells, species and levels `kappas`. Nonpositive up to roundoff when
/// `after` is one valid step of `config` from `before`.
pub fn entropy_residual(
    before: &Field,
    after: &Field,
    model: &dyn FluxModel,
    config: &SchemeConfig,
    tables: &SampledKernelTables,
    kappas: &[f64],
) -> Result<f64> {
    if !before.same_shape(after) {
        return Err(Error::ShapeMismatch("before/after fields differ in shape".into()));
    }
    let dt = after.time() - before.time();
    let dt_max = compute_dt(config, before.grid())?;
    if !(dt > 0.0 && dt <= dt_max * (1.0 + 1e-9)) {
        return Err(Error::invalid(format!(
            "after (t = {}) is not one step of size <= {dt_max} from before (t = {})",
            after.time(),
            before.time()
        )));
    }
    let conv = convolve(config, tables, before)?;
    let frozen = FrozenState::new(model, tables, &conv, before, config.direction.sign());
    let g = *before.grid();
    let (n1, n2) = (g.n1(), g.n2());
    let (l1, l2) = (dt / g.dx1(), dt / g.dx2());
    let choice = config.flux;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..before.species() {
        let (states, _) = flux_states(model, before, k);
        let at = |i: isize, j: isize| match (g.shift(0, i, n1), g.shift(0, j, n2)) {
            (Some(a), Some(b)) => states[g.idx(a, b)],
            _ => 0.0,
        };
        for &kappa in kappas {
            // entropy flux G(u, w) = F(u v k, w v k) - F(u ^ k, w ^ k) and f(kappa)
            let mut gx = vec![0.0; (n1 + 1) * n2];
            let mut fkx = vec![0.0; (n1 + 1) * n2];
            for j in 0..n2 {
                for s in 0..=n1 {
                    let fr = frozen.frozen(Axis::X1, k, s, j);
                    let (u, w) = (at(s as isize - 1, j as isize), at(s as isize, j as isize));
                    let idx = j * (n1 + 1) + s;
                    gx[idx] =
                        choice.eval(&fr, u.max(kappa), w.max(kappa)) - choice.eval(&fr, u.min(kappa), w.min(kappa));
                    fkx[idx] = fr.reduced(kappa);
                }
            }
            let mut gy = vec![0.0; n1 * (n2 + 1)];
            let mut fky = vec![0.0; n1 * (n2 + 1)];
            for s in 0..=n2 {
                for i in 0..n1 {
                    let fr = frozen.frozen(Axis::X2, k, i, s);
                    let (u, w) = (at(i as isize, s as isize - 1), at(i as isize, s as isize));
                    let idx = s * n1 + i;
                    gy[idx] =
                        choice.eval(&fr, u.max(kappa), w.max(kappa)) - choice.eval(&fr, u.min(kappa), w.min(kappa));
                    fky[idx] = fr.reduced(kappa);
                }
            }
            if g.is_periodic() {
                for j in 0..n2 {
                    gx[j * (n1 + 1)] = gx[j * (n1 + 1) + n1];
                    fkx[j * (n1 + 1)] = fkx[j * (n1 + 1) + n1];
                }
                for i in 0..n1 {
                    gy[i] = gy[n2 * n1 + i];
                    fky[i] = fky[n2 * n1 + i];
                }
            }
            for j in 0..n2 {
                for i in 0..n1 {
                    let new = after.get(k, i, j);
                    let old = before.get(k, i, j);
                    let sx = j * (n1 + 1) + i;
                    let sy = j * n1 + i;
                    let sg = sgn(new - kappa);
                    let lhs = (new - kappa).abs() - (old - kappa).abs()
                        + l1 * (gx[sx + 1] - gx[sx])
                        + l1 * sg * (fkx[sx + 1] - fkx[sx])
                        + l2 * (gy[sy + n1] - gy[sy])
                        + l2 * sg * (fky[sy + n1] - fky[sy]);
                    worst = worst.max(lhs);
                }
            }
        }
    }
    Ok(worst)
}

/// Per-step measurements collected during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub n: usize,
    pub t: f64,
    pub dt: f64,
    /// `|mass(after) - mass(before)| / max(L1(before), tiny)`, max over species.
    pub mass_defect: f64,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub l1: Vec<f64>,
    pub tv_before: Vec<f64>,
    pub tv_after: Vec<f64>,
    pub linf: Vec<f64>,
    /// `|| rho^{n+1} - rho^n ||_{L1}` per species.
    pub l1_change: Vec<f64>,
    pub entropy_residual: Option<f64>,
}

/// Observer that records [`StepDiagnostics`] for every step and evaluates
/// the entropy residual every `cadence` steps.
pub struct DiagnosticsCollector<'a> {
    model: &'a dyn FluxModel,
    config: SchemeConfig,
    tables: &'a SampledKernelTables,
    cadence: usize,
    kappas: Vec<Vec<f64>>,
    pub initial_l1: Vec<f64>,
    pub initial_tv: Vec<f64>,
    pub initial_linf: Vec<f64>,
    pub initial_min: Vec<f64>,
    pub initial_max: Vec<f64>,
    pub steps: Vec<StepDiagnostics>,
}

/// Default entropy-check cadence: every step up to 200 cells per axis,
/// every tenth step beyond.
pub fn default_cadence(n: usize) -> usize {
    if n <= 200 {
        1
    } else {
        10
    }
}

impl<'a> DiagnosticsCollector<'a> {
    pub fn new(
        initial: &Field,
        model: &'a dyn FluxModel,
        config: &SchemeConfig,
        tables: &'a SampledKernelTables,
        cadence: usize,
    ) -> Self {
        let kappas = (0..initial.species()).map(|k| kappa_lattice(initial.plane(k), model.admissible(k))).collect();
        let (min, max) = min_max(initial);
        Self {
            model,
            config: *config,
            tables,
            cadence: cadence.max(1),
            kappas,
            initial_l1: discrete_l1(initial),
            initial_tv: total_variation(initial),
            initial_linf: discrete_linf(initial),
            initial_min: min,
            initial_max: max,
            steps: Vec::new(),
        }
    }

    pub fn observe(&mut self, n: usize, before: &Field, after: &Field, dt: f64) -> Result<()> {
        let entropy_residual = if n.is_multiple_of(self.cadence) || n == 1 {
            let mut worst = f64::NEG_INFINITY;
            for k in 0..before.species() {
                // one species at a time so that each uses its own lattice
                let r = entropy_residual(before, after, self.model, &self.config, self.tables, &self.kappas[k])?;
                worst = worst.max(r);
            }
            Some(worst)
        } else {
            None
        };
        let l1_before = discrete_l1(before);
        let mb = discrete_mass(before);
        let ma = discrete_mass(after);
        let mass_defect =
            mb.iter().zip(&ma).zip(&l1_before).map(|((b, a), l)| (a - b).abs() / l.max(1e-300)).fold(0.0, f64::max);
        let (min, max) = min_max(after);
        self.steps.push(StepDiagnostics {
            n,
            t: after.time(),
            dt,
            mass_defect,
            min,
            max,
            l1: discrete_l1(after),
            tv_before: total_variation(before),
            tv_after: total_variation(after),
            linf: discrete_linf(after),
            l1_change: l1_distance(after, before)?,
            entropy_residual,
        });
        Ok(())
    }

    pub fn report(&self, final_field: &Field, clamped: usize) -> DiagnosticsReport {
        let (min, max) = min_max(final_field);
        let mut tv_growth = 0.0f64;
        let mut time_continuity = 0.0f64;
        let mut linf_growth = 0.0f64;
        for s in &self.steps {
            for k in 0..s.tv_before.len() {
                let grow = (s.tv_after[k] - s.tv_before[k]) / (s.dt * (s.tv_before[k] + 1.0));
                tv_growth = tv_growth.max(grow);
                time_continuity = time_continuity.max(s.l1_change[k] / (s.dt * (s.tv_before[k] + 1.0)));
                if self.initial_linf[k] > 0.0 && s.t > 0.0 && s.linf[k] > 0.0 {
                    linf_growth = linf_growth.max((s.linf[k] / self.initial_linf[k]).ln() / s.t);
                }
            }
        }
        DiagnosticsReport {
            mass: discrete_mass(final_field),
            l1: discrete_l1(final_field),
            linf: discrete_linf(final_field),
            tv: total_variation(final_field),
            min,
            max,
            entropy_residual_max: self
                .steps
                .iter()
                .filter_map(|s| s.entropy_residual)
                .fold(f64::NEG_INFINITY, f64::max),
            mass_defect_max: self.steps.iter().map(|s| s.mass_defect).fold(0.0, f64::max),
            tv_growth_constant: tv_growth,
            time_continuity_constant: time_continuity,
            linf_growth_constant: linf_growth,
            clamped,
        }
    }

    /// Writes `n,t,dt,entropy_residual,mass_defect,min,max` (min/max over
    /// species).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,t,dt,entropy_residual,mass_defect,min,max")?;
        for s in &self.steps {
            let er = s.entropy_residual.map_or(String::new(), |v| format!("{v:e}"));
            let min = s.min.iter().copied().fold(f64::INFINITY, f64::min);
            let max = s.max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            writeln!(w, "{},{:e},{:e},{er},{:e},{:e},{:e}", s.n, s.t, s.dt, s.mass_defect, min, max)?;
        }
        Ok(())
    }
}

fn min_max(field: &Field) -> (Vec<f64>, Vec<f64>) {
    (0..field.species())
        .map(|k| {
            let p = field.plane(k);
            (p.iter().copied().fold(f64::INFINITY, f64::min), p.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        })
        .unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub mass: Vec<f64>,
    pub l1: Vec<f64>,
    pub linf: Vec<f64>,
    pub tv: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// `-inf` when no step was checked.
    pub entropy_residual_max: f64,
    pub mass_defect_max: f64,
    /// Smallest `C` with `TV^{n+1} <= (1 + C dt) TV^n + C dt` over the run.
    pub tv_growth_constant: f64,
    /// Smallest `C` with `|rho^{n+1} - rho^n|_{L1} <= dt C (TV^n + 1)`.
    pub time_continuity_constant: f64,
    /// Smallest `C` with `|rho^n|_inf <= exp(C t^n) |rho^0|_inf`.
    pub linf_growth_constant: f64,
    pub clamped: usize,
}

pub const MASS_TOL: f64 = 1e-12;
pub const BOUND_TOL: f64 = 1e-12;
pub const ENTROPY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub name: String,
    pub applicable: bool,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteVerdict {
    pub passed: bool,
    pub checks: Vec<CheckVerdict>,
    pub report: DiagnosticsReport,
}

impl SuiteVerdict {
    pub fn check(&self, name: &str) -> Option<&CheckVerdict> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serialises")
    }
}

/// Applies the run-level property checks to the collected diagnostics.
pub fn check_theorem_suite(
    collector: &DiagnosticsCollector<'_>,
    report: &DiagnosticsReport,
    periodic: bool,
) -> SuiteVerdict {
    let model = collector.model;
    let steps = &collector.steps;
    let mut checks = Vec::new();
    let verdict = |name: &str, applicable: bool, value: f64, threshold: f64, ok: bool, detail: String| CheckVerdict {
        name: name.to_string(),
        applicable,
        passed: !applicable || ok,
        value,
        threshold,
        detail,
    };

    checks.push(verdict(
        "conservation",
        periodic,
        report.mass_defect_max,
        MASS_TOL,
        report.mass_defect_max <= MASS_TOL,
        "max relative change of the discrete mass per step".into(),
    ));

    // maximum principle: only meaningful when the data start inside the interval
    let species = collector.initial_min.len();
    let mut mp_applicable = false;
    let mut mp_value = f64::NEG_INFINITY;
    for k in 0..species {
        let Some(iv) = model.admissible(k) else { continue };
        if !(iv.contains(collector.initial_min[k]) && iv.contains(collector.initial_max[k])) {
            continue;
        }
        mp_applicable = true;
        for s in steps {
            mp_value = mp_value.max(iv.rho_min() - s.min[k]);
            if let Some(hi) = iv.rho_max() {
                mp_value = mp_value.max(s.max[k] - hi);
            }
        }
    }
    checks.push(verdict(
        "maximum_principle",
        mp_applicable,
        mp_value,
        BOUND_TOL,
        mp_value <= BOUND_TOL,
        "largest excursion below rho_m or above rho_M".into(),
    ));

    let nonneg = collector.initial_min.iter().all(|m| *m >= 0.0);
    let l1_dev = steps
        .iter()
        .flat_map(|s| s.l1.iter().zip(&collector.initial_l1).map(|(a, b)| (a - b).abs() / b.max(1e-300)))
        .fold(0.0, f64::max);
    checks.push(verdict(
        "l1_bound",
        periodic && nonneg,
        l1_dev,
        MASS_TOL,
        l1_dev <= MASS_TOL,
        "relative deviation of the L1 norm from its initial value".into(),
    ));

    let er = report.entropy_residual_max;
    checks.push(verdict(
        "entropy_inequality",
        er.is_finite(),
        er,
        ENTROPY_TOL,
        er <= ENTROPY_TOL,
        "max cell entropy residual over the kappa lattice".into(),
    ));

    for (name, value, detail) in [
        ("bv_estimate", report.tv_growth_constant, "empirical TV growth constant"),
        ("time_continuity", report.time_continuity_constant, "empirical L1 time-continuity constant"),
        ("linf_bound", report.linf_growth_constant, "empirical sup-norm growth rate"),
    ] {
        checks.push(verdict(name, true, value, f64::INFINITY, value.is_finite(), detail.into()));
    }

    checks.push(verdict(
        "clamping",
        true,
        report.clamped as f64,
        0.0,
        report.clamped == 0,
        "cells clamped onto the admissible interval before flux evaluation".into(),
    ));

    let passed = checks.iter().all(|c| c.passed);
    SuiteVerdict { passed, checks, report: report.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    #[test]
    fn l1_examples() {
        let g = Grid2D::square(7, 0.0, 1.0).unwrap();
        assert_eq!(discrete_l1(&Field::zeros(g, 1)), vec![0.0]);
        let ones = Field::from_values(g, 1, vec![1.0; 49], 0.0).unwrap();
        assert!((discrete_l1(&ones)[0] - 1.0).abs() < 1e-15);

        let g3 = Grid2D::square(3, 0.0, 1.5).unwrap();
        let vals = vec![0.3, -1.2, 2.0, 0.0, 4.5, -0.7, 1.1, 0.9, -3.3];
        let f = Field::from_values(g3, 1, vals.clone(), 0.0).unwrap();
        let mut hand = 0.0;
        for v in &vals {
            hand += v.abs();
        }
        assert!((discrete_l1(&f)[0] - 0.25 * hand).abs() < 1e-15);
        assert!((discrete_mass(&f)[0] - 0.25 * vals.iter().sum::<f64>()).abs() < 1e-15);
    }

    #[test]
    fn tv_examples() {
        let g = Grid2D::square(4, 0.0, 1.0).unwrap();
        let c = Field::from_values(g, 1, vec![3.0; 16], 0.0).unwrap();
        assert_eq!(total_variation(&c), vec![0.0]);
        // left half 1, right half 0: two jump columns (one periodic) x 4 rows x dx2
        let mut stripe = Field::zeros(g, 1);
        for j in 0..4 {
            for i in 0..2 {
                stripe.set(0, i, j, 1.0);
            }
        }
        assert!((total_variation(&stripe)[0] - 2.0).abs() < 1e-15);
        let scaled = Field::from_values(g, 1, stripe.values().iter().map(|v| -2.5 * v).collect(), 0.0).unwrap();
        assert!((total_variation(&scaled)[0] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn kappa_lattice_spans_widened_range() {
        let k = kappa_lattice(&[1.0, 3.0, 2.0], None);
        assert_eq!(k.len(), 33);
        assert!((k[0] - 0.8).abs() < 1e-15);
        assert!((k[32] - 3.2).abs() < 1e-15);
        let cut = kappa_lattice(&[0.0, 1.0], Some(crate::grid::AdmissibleInterval::half_line()));
        assert_eq!(cut[0], 0.0);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let vals = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(vals.iter().copied()), 2.0);
    }
}
