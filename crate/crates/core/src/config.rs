//! Run configuration and orchestration behind the `nfv` binary.
//!
//! A configuration is a TOML document merged with command-line overrides.
//! Every key is optional in the document; [`RunConfig::resolve`] checks the
//! merged result and names the offending key on failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::diagnostics::{check_theorem_suite, default_cadence, DiagnosticsCollector};
use crate::error::{Error, Result};
use crate::flux::{flux_contract_audit, AuditOptions, FluxVariant, NumericalFluxChoice};
use crate::grid::{AdmissibleInterval, Boundary, Field, Grid2D};
use crate::harness::{
    builtin_golden, compare_golden, doubling_ladder, load_golden, parse_golden, run_study, ConvergenceStudy,
    GoldenTolerance,
};
use crate::models::{reconstruction_error, EncryptionModel, FluxForm, InitialProfile, Preset};
use crate::nonlocal::{sample_kernels, SampledKernelTables};
use crate::scheme::{run, run_observed, write_step_log, ConvolutionPath, Direction, SchemeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Encrypt, decrypt, and write snapshots and step logs.
    Run,
    /// Convergence study with a golden comparison.
    Study,
    /// Randomised numerical flux audit.
    Audit,
    /// Forward run with the discrete property checks.
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Study => "study",
            Command::Audit => "audit",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileSpec {
    Nonsmooth,
    Smooth,
    Constant(f64),
}

/// User-defined variant of the encryption model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub name: Option<String>,
    pub ell: f64,
    pub amplitude: f64,
    pub domain: [f64; 4],
    pub t_end: f64,
    pub initial: ProfileSpec,
    #[serde(default)]
    pub form: FluxForm,
    /// `[rho_m]` or `[rho_m, rho_M]`.
    pub interval: Option<Vec<f64>>,
}

impl CustomModel {
    pub fn to_preset(&self) -> Result<Preset> {
        let interval = match self.interval.as_deref() {
            None => None,
            Some([lo]) => Some(AdmissibleInterval::new(*lo, None)?),
            Some([lo, hi]) => Some(AdmissibleInterval::new(*lo, Some(*hi))?),
            Some(other) => {
                return Err(Error::config(format!("custom.interval: expected 1 or 2 entries, got {}", other.len())))
            }
        };
        let model = EncryptionModel::new(self.ell, self.amplitude).with_interval(interval);
        model.validate().map_err(|e| Error::config(format!("custom: {e}")))?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::config(format!("custom.t_end: must be >= 0, got {}", self.t_end)));
        }
        let profile = match self.initial {
            ProfileSpec::Nonsmooth => InitialProfile::Nonsmooth,
            ProfileSpec::Smooth => InitialProfile::Smooth,
            ProfileSpec::Constant(c) => InitialProfile::custom(move |_| c),
        };
        Ok(Preset {
            name: self.name.clone().unwrap_or_else(|| "custom".into()),
            domain: self.domain,
            model,
            form: self.form,
            profile,
            t_end: self.t_end,
        })
    }
}

/// Parsed but unvalidated configuration. `None` means "not given".
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Named preset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Preset name or path to a TOML file holding a [`CustomModel`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomModel>,
    /// `N` or `N1xN2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flux: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub golden: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `lo:hi`, doubling from `lo`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cadence: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convolution: Option<ConvolutionPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel_rungs: Option<bool>,
}

pub const DEFAULT_SEED: u64 = 0x5eed;
pub const DEFAULT_LADDER: (usize, usize) = (50, 400);

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// Field-wise merge; values present in `overrides` win.
    pub fn merge(self, overrides: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: overrides.$f.or(self.$f)),* } };
        }
        pick!(
            command,
            preset,
            model,
            custom,
            grid,
            domain,
            boundary,
            flux,
            alpha,
            cfl,
            t_end,
            out,
            golden,
            seed,
            ladder,
            cadence,
            samples,
            convolution,
            parallel_rungs
        )
    }

    /// Validates every key and produces an executable plan.
    pub fn resolve(&self) -> Result<Plan> {
        let command = self.command.ok_or_else(|| Error::config("command: missing (run, study, audit or check)"))?;
        let given: Vec<&str> =
            [("preset", self.preset.is_some()), ("model", self.model.is_some()), ("custom", self.custom.is_some())]
                .iter()
                .filter(|(_, g)| *g)
                .map(|(n, _)| *n)
                .collect();
        let mut preset = match given.as_slice() {
            [] => return Err(Error::config("preset: missing (give one of preset, model or custom)")),
            ["preset"] => {
                self.preset.as_deref().unwrap().parse::<Preset>().map_err(|e| Error::config(format!("preset: {e}")))?
            }
            ["model"] => load_model(self.model.as_deref().unwrap())?,
            ["custom"] => self.custom.as_ref().unwrap().to_preset()?,
            many => return Err(Error::config(format!("{}: conflicting model sources", many.join(", ")))),
        };
        if let Some(d) = self.domain {
            if !(d.iter().all(|v| v.is_finite()) && d[1] > d[0] && d[3] > d[2]) {
                return Err(Error::config(format!("domain: invalid bounds {d:?}")));
            }
            preset.domain = d;
        }
        let (n1, n2) = match self.grid.as_deref() {
            None => (100, 100),
            Some(g) => parse_grid(g)?,
        };
        let boundary = self.boundary.unwrap_or(Boundary::Periodic);
        let grid = Grid2D::new(n1, n2, preset.domain, boundary).map_err(|e| Error::config(format!("grid: {e}")))?;

        let names = self.flux.clone().unwrap_or_else(|| match command {
            Command::Study => vec!["lxf".into(), "upwind".into()],
            _ => vec!["upwind".into()],
        });
        if names.is_empty() {
            return Err(Error::config("flux: empty list"));
        }
        let alpha = self.alpha.unwrap_or(1.0);
        let model = preset.flux_model();
        let mut fluxes = Vec::new();
        for name in &names {
            let variant: FluxVariant = name.parse().map_err(|e| Error::config(format!("flux: {e}")))?;
            let choice = match variant {
                FluxVariant::LaxFriedrichsAcg | FluxVariant::LaxFriedrichsSplit => {
                    NumericalFluxChoice::new(variant, alpha)
                }
                _ => NumericalFluxChoice::new(variant, 0.0),
            };
            choice.validate(model.as_ref()).map_err(|e| Error::config(format!("flux: {e}")))?;
            fluxes.push(choice);
        }

        let cfl = self.cfl.unwrap_or(1.0);
        if !(cfl.is_finite() && cfl > 0.0) {
            return Err(Error::config(format!("cfl: must be positive, got {cfl}")));
        }
        let t_end = self.t_end.unwrap_or(preset.t_end);
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(Error::config(format!("T: must be finite and >= 0, got {t_end}")));
        }
        let ladder = match self.ladder.as_deref() {
            None => doubling_ladder(DEFAULT_LADDER.0, DEFAULT_LADDER.1)?,
            Some(s) => parse_ladder(s)?,
        };
        if self.cadence == Some(0) {
            return Err(Error::config("cadence: must be positive"));
        }
        let samples = self.samples.unwrap_or(100_000);
        if samples == 0 {
            return Err(Error::config("samples: must be positive"));
        }
        Ok(Plan {
            command,
            preset,
            grid,
            fluxes,
            cfl,
            t_end,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("nfv-out")),
            golden: self.golden.clone(),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            ladder,
            cadence: self.cadence,
            samples,
            convolution: self.convolution.unwrap_or_default(),
            parallel_rungs: self.parallel_rungs.unwrap_or(false),
        })
    }
}

fn load_model(spec: &str) -> Result<Preset> {
    if Preset::NAMES.contains(&spec) {
        return spec.parse();
    }
    let text = fs::read_to_string(spec).map_err(|e| Error::config(format!("model: cannot read '{spec}': {e}")))?;
    let custom: CustomModel = toml::from_str(&text).map_err(|e| Error::config(format!("model: {e}")))?;
    custom.to_preset()
}

/// `N` or `N1xN2`.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::config(format!("grid: expected N or N1xN2, got '{s}'"));
    let mut parts = s.split(['x', 'X']);
    let a: usize = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let b: usize = match parts.next() {
        Some(p) => p.trim().parse().map_err(|_| bad())?,
        None => a,
    };
    if parts.next().is_some() || a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

/// `lo:hi`.
pub fn parse_ladder(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::config(format!("ladder: expected lo:hi, got '{s}'"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi.trim().parse().map_err(|_| bad())?;
    doubling_ladder(lo, hi).map_err(|e| Error::config(format!("ladder: {e}")))
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Plan {
    pub command: Command,
    pub preset: Preset,
    pub grid: Grid2D,
    pub fluxes: Vec<NumericalFluxChoice>,
    pub cfl: f64,
    pub t_end: f64,
    pub out: PathBuf,
    pub golden: Option<PathBuf>,
    pub seed: u64,
    pub ladder: Vec<usize>,
    pub cadence: Option<usize>,
    pub samples: usize,
    pub convolution: ConvolutionPath,
    pub parallel_rungs: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    /// `true` iff no assertion-level check failed.
    pub passed: bool,
    pub summary: serde_json::Value,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Builds the global worker pool, honouring `NFV_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("NFV_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::config(format!("NFV_THREADS: expected a positive integer, got '{v}'")))?;
    // a pool may already exist (tests, embedding); that is not an error
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the plan, writing artifacts under `plan.out`. On error a
/// `failure.json` report is written before the error is returned.
pub fn execute(plan: &Plan) -> Result<Outcome> {
    fs::create_dir_all(&plan.out)?;
    let result = match plan.command {
        Command::Run => execute_run(plan),
        Command::Study => execute_study(plan),
        Command::Audit => execute_audit(plan),
        Command::Check => execute_check(plan),
    };
    match result {
        Ok(outcome) => {
            write_json(&plan.out.join("summary.json"), &outcome.summary)?;
            Ok(outcome)
        }
        Err(e) => {
            write_failure_report(&plan.out, plan.command.name(), &e);
            Err(e)
        }
    }
}

/// Best effort; the original error takes precedence over I/O trouble here.
pub fn write_failure_report(dir: &Path, command: &str, err: &Error) {
    let report = json!({ "command": command, "passed": false, "error": err.to_string() });
    let _ = fs::create_dir_all(dir)
        .and_then(|_| fs::write(dir.join("failure.json"), serde_json::to_string_pretty(&report).unwrap_or_default()));
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_snapshot(dir: &Path, stem: &str, field: &Field) -> Result<()> {
    let mut w = create(&dir.join(format!("{stem}.csv")))?;
    field.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(&dir.join(format!("{stem}.matrix.txt")))?;
    field.write_matrix(0, &mut w)?;
    w.flush()?;
    Ok(())
}

fn flux_dir(plan: &Plan, flux: &NumericalFluxChoice) -> Result<PathBuf> {
    let dir = if plan.fluxes.len() > 1 { plan.out.join(flux.variant.name()) } else { plan.out.clone() };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

struct Setup {
    model: Box<dyn crate::flux::FluxModel>,
    tables: SampledKernelTables,
    initial: Field,
}

fn setup(plan: &Plan) -> Result<Setup> {
    plan.preset.model.validate()?;
    let model = plan.preset.flux_model();
    let tables = sample_kernels(&plan.preset.model.kernels(), &plan.grid)?;
    let initial = plan.preset.profile.project(&plan.grid, Default::default())?;
    Ok(Setup { model, tables, initial })
}

fn scheme_config(plan: &Plan, s: &Setup, flux: NumericalFluxChoice) -> Result<SchemeConfig> {
    Ok(SchemeConfig::for_model(flux, s.model.as_ref(), plan.t_end)?
        .with_cfl(plan.cfl)
        .with_convolution(plan.convolution))
}

fn execute_run(plan: &Plan) -> Result<Outcome> {
    let s = setup(plan)?;
    let mut results = Vec::new();
    for flux in &plan.fluxes {
        let dir = flux_dir(plan, flux)?;
        let cfg = scheme_config(plan, &s, *flux)?;
        write_snapshot(&dir, "initial", &s.initial)?;
        let forward = run(&s.initial, &cfg, s.model.as_ref(), &s.tables)?;
        write_snapshot(&dir, "encrypted", &forward.field)?;
        write_step_log(&forward.records, create(&dir.join("steps_encrypt.jsonl"))?)?;
        let back_cfg = cfg.with_direction(Direction::Reversed);
        let backward = run(&forward.field.clone().with_time(0.0), &back_cfg, s.model.as_ref(), &s.tables)?;
        let decrypted = backward.field.with_time(0.0);
        write_snapshot(&dir, "decrypted", &decrypted)?;
        write_step_log(&backward.records, create(&dir.join("steps_decrypt.jsonl"))?)?;
        let error = reconstruction_error(&decrypted, &s.initial)?;
        results.push(json!({
            "variant": flux.variant.name(),
            "alpha": flux.alpha,
            "steps": forward.records.len() - 1,
            "error": error,
            "clamped": forward.clamped + backward.clamped,
        }));
    }
    Ok(Outcome {
        passed: true,
        summary: json!({
            "command": "run",
            "preset": plan.preset.name,
            "grid": [plan.grid.n1(), plan.grid.n2()],
            "T": plan.t_end,
            "cfl": plan.cfl,
            "results": results,
        }),
    })
}

fn execute_check(plan: &Plan) -> Result<Outcome> {
    let s = setup(plan)?;
    let cadence = plan.cadence.unwrap_or_else(|| default_cadence(plan.grid.n1().max(plan.grid.n2())));
    let mut verdicts = Vec::new();
    let mut passed = true;
    for flux in &plan.fluxes {
        let dir = flux_dir(plan, flux)?;
        let cfg = scheme_config(plan, &s, *flux)?;
        let mut collector = DiagnosticsCollector::new(&s.initial, s.model.as_ref(), &cfg, &s.tables, cadence);
        let out = run_observed(&s.initial, &cfg, s.model.as_ref(), &s.tables, &mut |n, a, b, dt| {
            collector.observe(n, a, b, dt)
        })?;
        let report = collector.report(&out.field, out.clamped);
        let verdict = check_theorem_suite(&collector, &report, plan.grid.is_periodic());
        let mut w = create(&dir.join("diagnostics.csv"))?;
        collector.write_csv(&mut w)?;
        w.flush()?;
        fs::write(dir.join("verdict.json"), verdict.to_json() + "\n")?;
        passed &= verdict.passed;
        verdicts.push(json!({
            "variant": flux.variant.name(),
            "passed": verdict.passed,
            "failed": verdict.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect::<Vec<_>>(),
        }));
    }
    Ok(Outcome {
        passed,
        summary: json!({
            "command": "check",
            "preset": plan.preset.name,
            "grid": [plan.grid.n1(), plan.grid.n2()],
            "T": plan.t_end,
            "cfl": plan.cfl,
            "passed": passed,
            "verdicts": verdicts,
        }),
    })
}

fn execute_audit(plan: &Plan) -> Result<Outcome> {
    let model = plan.preset.flux_model();
    let state_range = match model.admissible(0) {
        Some(_) => [0.0, 2.0],
        None => [-2.0, 2.0],
    };
    let opts = AuditOptions { samples: plan.samples, seed: plan.seed, state_range, ..Default::default() };
    let mut reports = Vec::new();
    let mut passed = true;
    for flux in &plan.fluxes {
        let report = flux_contract_audit(flux, model.as_ref(), &opts)?;
        passed &= report.passed();
        let value = serde_json::to_value(&report).map_err(|e| Error::Parse(e.to_string()))?;
        write_json(&plan.out.join(format!("audit_{}.json", flux.variant.name())), &value)?;
        reports.push(json!({
            "variant": flux.variant.name(),
            "alpha": flux.alpha,
            "passed": report.passed(),
            "monotonicity_violations": report.monotonicity_violations,
            "violations": report.violations,
        }));
    }
    Ok(Outcome {
        passed,
        summary: json!({
            "command": "audit",
            "model": plan.preset.name,
            "seed": plan.seed,
            "samples": plan.samples,
            "passed": passed,
            "reports": reports,
        }),
    })
}

fn execute_study(plan: &Plan) -> Result<Outcome> {
    let mut study = ConvergenceStudy::new(plan.preset.clone(), plan.ladder.clone(), plan.fluxes.clone());
    study.cfl_factor = plan.cfl;
    study.t_end = Some(plan.t_end);
    study.parallel_rungs = plan.parallel_rungs;
    let table = run_study(&study);
    let mut w = create(&plan.out.join("study.csv"))?;
    table.write_csv(&mut w)?;
    w.flush()?;

    let golden = match &plan.golden {
        Some(path) => Some(load_golden(path)?),
        None => builtin_golden(&plan.preset.name).map(parse_golden).transpose()?,
    };
    let failures: Vec<String> =
        table.failures().map(|r| format!("N={} {}: {}", r.n, r.variant, r.failure.as_deref().unwrap_or(""))).collect();
    let diffs: Vec<String> = match &golden {
        Some(g) => compare_golden(&table, g, GoldenTolerance::default()).iter().map(|d| d.to_string()).collect(),
        None => Vec::new(),
    };
    fs::write(plan.out.join("golden_diff.txt"), diffs.iter().map(|d| format!("{d}\n")).collect::<String>())?;
    let passed = failures.is_empty() && diffs.is_empty();
    let rows = serde_json::to_value(&table.rows).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(Outcome {
        passed,
        summary: json!({
            "command": "study",
            "preset": plan.preset.name,
            "T": plan.t_end,
            "ladder": plan.ladder,
            "golden_compared": golden.is_some(),
            "passed": passed,
            "failures": failures,
            "golden_diff": diffs,
            "rows": rows,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(cmd: Command) -> RunConfig {
        RunConfig { command: Some(cmd), preset: Some("encdec-smooth".into()), ..Default::default() }
    }

    #[test]
    fn minimal_config_resolves() {
        let mut c = base(Command::Run);
        c.grid = Some("100".into());
        c.flux = Some(vec!["upwind".into()]);
        let plan = c.resolve().unwrap();
        assert_eq!((plan.grid.n1(), plan.grid.n2()), (100, 100));
        assert_eq!(plan.fluxes[0].variant, FluxVariant::Upwind);
    }

    #[test]
    fn godunov_on_general_model_is_rejected() {
        let text = r#"
command = "run"
flux = ["godunov"]
[custom]
ell = 0.5
amplitude = 1.0
domain = [-1.0, 1.0, -1.0, 1.0]
T = 0.1
initial = "smooth"
form = "general"
"#;
        // `T` is not a key of the custom table
        assert!(RunConfig::from_toml_str(text).is_err());
        let text = text.replace("T = 0.1", "t_end = 0.1");
        let err = RunConfig::from_toml_str(&text).unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("flux"), "{err}");
    }

    #[test]
    fn bad_values_name_their_key() {
        let mut c = base(Command::Run);
        c.cfl = Some(0.0);
        assert!(c.resolve().unwrap_err().to_string().contains("cfl"));
        let mut c = base(Command::Run);
        c.grid = Some("10y10".into());
        assert!(c.resolve().unwrap_err().to_string().contains("grid"));
        let mut c = base(Command::Run);
        c.model = Some("encdec-nonsmooth".into());
        assert!(c.resolve().unwrap_err().to_string().contains("conflicting"));
        assert!(RunConfig::default().resolve().unwrap_err().to_string().contains("command"));
        assert!(RunConfig::from_toml_str("colour = 3").is_err());
    }

    #[test]
    fn flags_win_and_round_trip() {
        let file = RunConfig::from_toml_str(
            "command = \"study\"\npreset = \"encdec-nonsmooth\"\ncfl = 0.5\nladder = \"50:200\"",
        )
        .unwrap();
        let flags = RunConfig { cfl: Some(0.25), flux: Some(vec!["lxf".into()]), ..Default::default() };
        let merged = file.merge(flags);
        assert_eq!(merged.cfl, Some(0.25));
        assert_eq!(merged.ladder.as_deref(), Some("50:200"));
        let again = RunConfig::from_toml_str(&merged.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, merged);
    }

    #[test]
    fn grid_and_ladder_parsing() {
        assert_eq!(parse_grid("64x32").unwrap(), (64, 32));
        assert!(parse_grid("0").is_err());
        assert_eq!(parse_ladder("50:400").unwrap(), vec![50, 100, 200, 400]);
        assert!(parse_ladder("50-400").is_err());
    }
}
