//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nfv::diagnostics::{check_theorem_suite, default_cadence, DiagnosticsCollector, SuiteVerdict};
use nfv::flux::{
    flux_contract_audit, AuditOptions, Axis, FluxVariant, FrozenFlux, Multiplicative, NumericalFluxChoice,
};
use nfv::grid::{Field, Grid2D};
use nfv::harness::{
    builtin_golden, compare_golden, parse_golden, run_study, ConvergenceStudy, GoldenTolerance, StudyTable,
};
use nfv::models::{EncryptionModel, Preset};
use nfv::nonlocal::{convolve_direct, convolve_fast, sample_kernels};
use nfv::scheme::{run_observed, SchemeConfig};

const LADDER: [usize; 4] = [50, 100, 200, 400];

// Nonsmooth reference table, rows N = 50..400.
const NONSMOOTH_LXF: [f64; 4] = [47.8, 35.6, 26.0, 18.6];
const NONSMOOTH_LXF_RATES: [f64; 3] = [0.425, 0.451, 0.48];
const NONSMOOTH_UPWIND: [f64; 4] = [34.2, 26.3, 19.3, 13.6];
const NONSMOOTH_UPWIND_RATES: [f64; 3] = [0.377, 0.449, 0.505];

// Smooth reference table, rows N = 50..400.
const SMOOTH_LXF: [f64; 4] = [3.48e-1, 1.88e-1, 1.01e-1, 5.32e-2];
const SMOOTH_LXF_RATES: [f64; 3] = [0.886, 0.901, 0.919];
const SMOOTH_UPWIND: [f64; 4] = [1.68e-1, 9.85e-2, 5.38e-2, 2.82e-2];
const SMOOTH_UPWIND_RATES: [f64; 3] = [0.771, 0.873, 0.931];

const ERROR_REL_TOL: f64 = 0.10;
const RATE_ABS_TOL: f64 = 0.06;

struct Outcome {
    passed: bool,
    detail: String,
}

fn lxf() -> NumericalFluxChoice {
    NumericalFluxChoice::new(FluxVariant::LaxFriedrichsAcg, 1.0)
}

fn all_variants() -> [NumericalFluxChoice; 4] {
    [
        lxf(),
        NumericalFluxChoice::new(FluxVariant::LaxFriedrichsSplit, 1.0),
        NumericalFluxChoice::godunov(),
        NumericalFluxChoice::upwind(),
    ]
}

fn study(preset: Preset) -> StudyTable {
    let mut s = ConvergenceStudy::new(preset, LADDER.to_vec(), vec![lxf(), NumericalFluxChoice::upwind()]);
    s.parallel_rungs = true;
    run_study(&s)
}

/// Checks a study table against the expected columns, returning a line per
/// mismatch and a compact listing of observed values.
fn compare_columns(table: &StudyTable, columns: [(&str, [f64; 4], [f64; 3]); 2]) -> (Vec<String>, String) {
    let mut misses = Vec::new();
    let mut listing = Vec::new();
    for (variant, errors, rates) in columns {
        let mut obs = Vec::new();
        for (idx, n) in LADDER.iter().enumerate() {
            let row = table.get(*n, variant);
            let Some(err) = row.and_then(|r| r.error) else {
                misses.push(format!("N={n} {variant}: no result ({:?})", row.and_then(|r| r.failure.clone())));
                continue;
            };
            let rel = (err - errors[idx]) / errors[idx];
            if rel.abs() > ERROR_REL_TOL {
                misses.push(format!("N={n} {variant}: error {err:.4e} vs {:.4e}", errors[idx]));
            }
            obs.push(format!("{err:.3e}"));
            if idx > 0 {
                let rate = row.and_then(|r| r.rate);
                match rate {
                    Some(r) if (r - rates[idx - 1]).abs() <= RATE_ABS_TOL => obs.push(format!("[{r:.3}]")),
                    other => {
                        misses.push(format!("N={n} {variant}: rate {other:?} vs {}", rates[idx - 1]));
                        obs.push(format!("[{other:?}]"));
                    }
                }
            }
        }
        listing.push(format!("{variant} {}", obs.join(" ")));
    }
    (misses, listing.join("; "))
}

fn golden_agrees(preset: &str, columns: [(&str, [f64; 4], [f64; 3]); 2]) -> bool {
    let golden = parse_golden(builtin_golden(preset).unwrap()).unwrap();
    columns.iter().all(|(variant, errors, rates)| {
        LADDER.iter().enumerate().all(|(idx, n)| {
            golden.iter().any(|g| {
                g.n == *n
                    && g.variant == *variant
                    && g.error == errors[idx]
                    && (idx == 0 || g.rate == Some(rates[idx - 1]))
            })
        })
    })
}

fn criterion_1(table: &StudyTable) -> Outcome {
    let columns = [("lxf", NONSMOOTH_LXF, NONSMOOTH_LXF_RATES), ("upwind", NONSMOOTH_UPWIND, NONSMOOTH_UPWIND_RATES)];
    let (misses, listing) = compare_columns(table, columns);
    let golden_ok = golden_agrees("encdec-nonsmooth", columns);
    let golden = parse_golden(builtin_golden("encdec-nonsmooth").unwrap()).unwrap();
    let diffs = compare_golden(table, &golden, GoldenTolerance::default());
    Outcome {
        passed: misses.is_empty() && golden_ok && diffs.is_empty(),
        detail: if misses.is_empty() { listing } else { format!("{}; {listing}", misses.join("; ")) },
    }
}

fn criterion_2(table: &StudyTable) -> Outcome {
    let columns = [("lxf", SMOOTH_LXF, SMOOTH_LXF_RATES), ("upwind", SMOOTH_UPWIND, SMOOTH_UPWIND_RATES)];
    let (mut misses, listing) = compare_columns(table, columns);
    let last = table.get(400, "upwind").and_then(|r| r.rate);
    if last.is_none_or(|r| r < 0.90) {
        misses.push(format!("upwind rate at N=400 is {last:?}, below 0.90"));
    }
    let golden_ok = golden_agrees("encdec-smooth", columns);
    Outcome {
        passed: misses.is_empty() && golden_ok,
        detail: format!(
            "T={}; {}",
            Preset::smooth().t_end,
            if misses.is_empty() { listing } else { format!("{}; {listing}", misses.join("; ")) }
        ),
    }
}

fn criterion_3(table: &StudyTable) -> Outcome {
    let rates: Vec<(usize, String, Option<f64>)> =
        table.rows.iter().filter(|r| r.n > LADDER[0]).map(|r| (r.n, r.variant.clone(), r.rate)).collect();
    let min = rates.iter().map(|r| r.2.unwrap_or(f64::NEG_INFINITY)).fold(f64::INFINITY, f64::min);
    Outcome { passed: rates.len() == 6 && min >= 0.40, detail: format!("smallest nonsmooth rate {min:.4}") }
}

fn theorem_suite(preset: &Preset, n: usize, flux: NumericalFluxChoice, cfl: f64) -> SuiteVerdict {
    let grid = preset.grid(n).unwrap();
    let model = preset.flux_model();
    let tables = sample_kernels(&preset.model.kernels(), &grid).unwrap();
    let cfg = SchemeConfig::for_model(flux, model.as_ref(), preset.t_end).unwrap().with_cfl(cfl);
    let initial = preset.initial(&grid).unwrap();
    let mut collector = DiagnosticsCollector::new(&initial, model.as_ref(), &cfg, &tables, default_cadence(n));
    let out = run_observed(&initial, &cfg, model.as_ref(), &tables, &mut |k, a, b, dt| collector.observe(k, a, b, dt))
        .unwrap();
    let report = collector.report(&out.field, out.clamped);
    check_theorem_suite(&collector, &report, true)
}

fn criterion_4() -> Outcome {
    let mut fails = Vec::new();
    let mut worst_mass = 0.0f64;
    let mut worst_entropy = f64::NEG_INFINITY;
    let mut worst_min = f64::INFINITY;

    // discrete properties along full runs
    for preset in [Preset::nonsmooth(), Preset::smooth()] {
        for flux in all_variants() {
            let v = theorem_suite(&preset, 50, flux, 1.0);
            worst_mass = worst_mass.max(v.report.mass_defect_max);
            worst_entropy = worst_entropy.max(v.report.entropy_residual_max);
            if preset.model.with_interval(None) != preset.model {
                worst_min = worst_min.min(v.report.min[0]);
            }
            for c in v.checks.iter().filter(|c| !c.passed) {
                fails.push(format!("{} {}: {} = {:e}", preset.name, flux.variant, c.name, c.value));
            }
            let mp = v.check("maximum_principle").unwrap();
            if preset.name == "encdec-nonsmooth" && !mp.applicable {
                fails.push("maximum principle not evaluated on the nonsmooth preset".into());
            }
        }
    }
    if worst_mass > 1e-12 {
        fails.push(format!("mass defect {worst_mass:e}"));
    }
    if worst_entropy > 1e-10 {
        fails.push(format!("entropy residual {worst_entropy:e}"));
    }
    if worst_min < -1e-12 {
        fails.push(format!("minimum {worst_min:e}"));
    }

    // flux contract: consistency and monotonicity over 1e5 samples per variant
    let model = Multiplicative(EncryptionModel::new(0.8, 5.0));
    let opts = AuditOptions { samples: 100_000, state_range: [-2.0, 2.0], ..Default::default() };
    let mut worst_consistency = 0.0f64;
    let mut dd_ratio = 1.0f64;
    for flux in all_variants() {
        let a = flux_contract_audit(&flux, &model, &opts).unwrap();
        worst_consistency = worst_consistency.max(a.consistency_max);
        if a.consistency_max > 1e-14 {
            fails.push(format!("{} consistency {:e}", flux.variant, a.consistency_max));
        }
        if a.monotonicity_violations > 0 {
            fails.push(format!("{} monotonicity violations {}", flux.variant, a.monotonicity_violations));
        }
        // double-difference quotient: two independent batches
        if flux.variant != FluxVariant::LaxFriedrichsAcg {
            let b =
                flux_contract_audit(&flux, &model, &AuditOptions { seed: opts.seed ^ 0xdead_beef, ..opts }).unwrap();
            let (x, y) = (a.double_difference_max.unwrap(), b.double_difference_max.unwrap());
            for l in 0..2 {
                if !(x[l].is_finite() && y[l].is_finite()) {
                    fails.push(format!("{} double difference not finite", flux.variant));
                } else if x[l] > 0.0 || y[l] > 0.0 {
                    let ratio = x[l].max(y[l]) / x[l].min(y[l]).max(1e-300);
                    dd_ratio = dd_ratio.max(ratio);
                    if ratio > 2.0 {
                        fails.push(format!("{} double difference unstable: {x:?} vs {y:?}", flux.variant));
                    }
                }
            }
        }
    }

    // Godunov and LxF-split(1) against Upwind for linear g
    let em = EncryptionModel::new(0.8, 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let v = rng.random_range(-1.0..1.0);
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let fr = FrozenFlux::Split { model: &em, k: 0, v };
        let up = NumericalFluxChoice::upwind().eval(&fr, a, b);
        let go = NumericalFluxChoice::godunov().eval(&fr, a, b);
        let ls = NumericalFluxChoice::new(FluxVariant::LaxFriedrichsSplit, 1.0).eval(&fr, a, b);
        if go != up || ls != up {
            mismatches += 1;
        }
    }
    // also through the public interface-flux path with a frozen R
    let r = [0.3, -1.2];
    let fr = FrozenFlux::new(&model, 0.0, [0.0, 0.0], 0, &r, Axis::X2, 1.0);
    if NumericalFluxChoice::godunov().eval(&fr, 0.4, 1.7) != NumericalFluxChoice::upwind().eval(&fr, 0.4, 1.7) {
        mismatches += 1;
    }
    if mismatches > 0 {
        fails.push(format!("{mismatches} Godunov/LxF-split/Upwind mismatches"));
    }

    // fast against direct convolution
    let mut worst_conv = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, preset) in
        [(16, Preset::smooth()), (32, Preset::nonsmooth()), (64, Preset::smooth()), (128, Preset::nonsmooth())]
    {
        let g: Grid2D = preset.grid(n).unwrap();
        let tables = sample_kernels(&preset.model.kernels(), &g).unwrap();
        let values: Vec<f64> = (0..g.cells()).map(|_| rng.random_range(-1.0..4.0)).collect();
        let f = Field::from_values(g, 1, values, 0.0).unwrap();
        let (fast, direct) = (convolve_fast(&tables, &f).unwrap(), convolve_direct(&tables, &f).unwrap());
        let rel = fast.max_deviation(&direct) / (1.0 + direct.max_abs());
        worst_conv = worst_conv.max(rel);
        if rel > 1e-10 {
            fails.push(format!("fast/direct deviation {rel:e} at N={n}"));
        }
    }

    Outcome {
        passed: fails.is_empty(),
        detail: format!(
            "mass {worst_mass:.1e}, entropy {worst_entropy:.1e}, min {worst_min:.3e}, consistency {worst_consistency:.1e}, \
             double-difference ratio {dd_ratio:.3}, fast/direct {worst_conv:.1e}{}",
            if fails.is_empty() { String::new() } else { format!("; {}", fails.join("; ")) }
        ),
    }
}

fn criterion_5() -> Outcome {
    let v = theorem_suite(&Preset::nonsmooth(), 50, NumericalFluxChoice::upwind(), 4.0);
    let mp = v.check("maximum_principle").unwrap();
    let en = v.check("entropy_inequality").unwrap();
    let unstable = !mp.passed || !en.passed;

    let model = Multiplicative(EncryptionModel::new(0.8, 5.0));
    let opts = AuditOptions { samples: 100_000, state_range: [-2.0, 2.0], ..Default::default() };
    let audit =
        flux_contract_audit(&NumericalFluxChoice::new(FluxVariant::LaxFriedrichsAcg, 0.0), &model, &opts).unwrap();
    Outcome {
        passed: unstable && audit.monotonicity_violations > 0,
        detail: format!(
            "cfl=4: maximum principle {} ({:.2e}), entropy {} ({:.2e}); alpha=0 audit: {} monotonicity violations",
            if mp.passed { "held" } else { "violated" },
            mp.value,
            if en.passed { "held" } else { "violated" },
            en.value,
            audit.monotonicity_violations
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let nonsmooth = study(Preset::nonsmooth());
    let smooth = study(Preset::smooth());
    let results = [
        ("1 nonsmooth convergence table", criterion_1(&nonsmooth)),
        ("2 smooth convergence table", criterion_2(&smooth)),
        ("3 nonsmooth rates >= 0.40", criterion_3(&nonsmooth)),
        ("4 discrete property suite", criterion_4()),
        ("5 negative controls", criterion_5()),
    ];
    let mut all = true;
    for (name, o) in &results {
        all &= o.passed;
        println!("[{}] criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
