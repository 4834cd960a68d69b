//! Grid-refinement studies for the encryption presets and comparison of the
//! resulting error tables with stored reference values.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{FluxVariant, NumericalFluxChoice};
use crate::models::{decrypt, encrypt, reconstruction_error, Preset};
use crate::nonlocal::sample_kernels;
use crate::scheme::SchemeConfig;

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub preset: Preset,
    pub ladder: Vec<usize>,
    pub fluxes: Vec<NumericalFluxChoice>,
    pub cfl_factor: f64,
    /// Overrides the preset horizon.
    pub t_end: Option<f64>,
    /// Run rungs concurrently.
    pub parallel_rungs: bool,
}

impl ConvergenceStudy {
    pub fn new(preset: Preset, ladder: Vec<usize>, fluxes: Vec<NumericalFluxChoice>) -> Self {
        Self { preset, ladder, fluxes, cfl_factor: 1.0, t_end: None, parallel_rungs: false }
    }

    pub fn horizon(&self) -> f64 {
        self.t_end.unwrap_or(self.preset.t_end)
    }
}

/// `lo, 2 lo, 4 lo, ...` up to and including `hi`.
pub fn doubling_ladder(lo: usize, hi: usize) -> Result<Vec<usize>> {
    if lo == 0 || hi < lo {
        return Err(Error::config(format!("invalid ladder {lo}:{hi}")));
    }
    let mut out = vec![lo];
    while out[out.len() - 1] * 2 <= hi {
        out.push(out[out.len() - 1] * 2);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub variant: String,
    pub error: Option<f64>,
    pub rate: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
}

/// `log2(coarse / fine)`; `None` unless both errors are positive and finite.
pub fn observed_rate(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite()).then(|| (coarse / fine).log2())
}

impl StudyTable {
    pub fn get(&self, n: usize, variant: &str) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.n == n && r.variant == variant)
    }

    pub fn failures(&self) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(|r| r.failure.is_some())
    }

    /// Fills in rates between consecutive rungs of each variant (`N` must
    /// double between them).
    fn fill_rates(&mut self) {
        let mut by_variant: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (idx, r) in self.rows.iter().enumerate() {
            by_variant.entry(r.variant.clone()).or_default().push(idx);
        }
        for idxs in by_variant.values_mut() {
            idxs.sort_by_key(|&i| self.rows[i].n);
            for w in idxs.windows(2) {
                let (c, f) = (&self.rows[w[0]], &self.rows[w[1]]);
                let rate =
                    if f.n == 2 * c.n { c.error.zip(f.error).and_then(|(a, b)| observed_rate(a, b)) } else { None };
                self.rows[w[1]].rate = rate;
            }
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "N,variant,error,rate")?;
        for r in &self.rows {
            let err = r.error.map(|e| format!("{e:e}")).unwrap_or_else(|| "nan".into());
            let rate = r.rate.map(|c| format!("{c:.6}")).unwrap_or_else(|| "-".into());
            writeln!(w, "{},{},{},{}", r.n, r.variant, err, rate)?;
        }
        Ok(())
    }
}

fn run_rung(study: &ConvergenceStudy, n: usize, flux: NumericalFluxChoice) -> Result<f64> {
    let preset = &study.preset;
    preset.model.validate()?;
    let grid = preset.grid(n)?;
    let model = preset.flux_model();
    let tables = sample_kernels(&preset.model.kernels(), &grid)?;
    let t = study.horizon();
    let config = SchemeConfig::for_model(flux, model.as_ref(), t)?.with_cfl(study.cfl_factor);
    let initial = preset.initial(&grid)?;
    let encrypted = encrypt(&initial, model.as_ref(), &tables, &config, t)?;
    let decrypted = decrypt(&encrypted, model.as_ref(), &tables, &config, t)?;
    Ok(reconstruction_error(&decrypted, &initial)?[0])
}

/// Project, encrypt, decrypt and measure for every `(N, flux)` pair. A
/// failing rung is recorded and the study continues.
pub fn run_study(study: &ConvergenceStudy) -> StudyTable {
    let jobs: Vec<(usize, NumericalFluxChoice)> =
        study.ladder.iter().flat_map(|&n| study.fluxes.iter().map(move |&f| (n, f))).collect();
    let eval = |&(n, flux): &(usize, NumericalFluxChoice)| {
        let (error, failure) = match run_rung(study, n, flux) {
            Ok(e) => (Some(e), None),
            Err(e) => (None, Some(e.to_string())),
        };
        StudyRow { n, variant: flux.variant.name().to_string(), error, rate: None, failure }
    };
    let rows: Vec<StudyRow> =
        if study.parallel_rungs { jobs.par_iter().map(eval).collect() } else { jobs.iter().map(eval).collect() };
    let mut table = StudyTable { rows };
    table.fill_rates();
    table
}

/// Reference error and rate for one `(N, variant)` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenEntry {
    pub n: usize,
    pub variant: String,
    pub error: f64,
    pub rate: Option<f64>,
}

/// Parses `N,variant,error,rate` CSV. Lines starting with `#` are comments;
/// a rate of `-` means none.
pub fn parse_golden(text: &str) -> Result<Vec<GoldenEntry>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("N,") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Parse(format!("golden line {}: '{line}'", lineno + 1));
        if parts.len() != 4 {
            return Err(bad());
        }
        let n = parts[0].parse().map_err(|_| bad())?;
        let variant: FluxVariant = parts[1].parse().map_err(|_| bad())?;
        let error = parts[2].parse().map_err(|_| bad())?;
        let rate = match parts[3] {
            "-" | "" => None,
            r => Some(r.parse().map_err(|_| bad())?),
        };
        out.push(GoldenEntry { n, variant: variant.name().to_string(), error, rate });
    }
    Ok(out)
}

pub fn load_golden(path: &Path) -> Result<Vec<GoldenEntry>> {
    parse_golden(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenTolerance {
    /// Relative tolerance on errors.
    pub error_rel: f64,
    /// Absolute tolerance on rates.
    pub rate_abs: f64,
}

impl Default for GoldenTolerance {
    fn default() -> Self {
        Self { error_rel: 0.10, rate_abs: 0.06 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GoldenDiff {
    Missing { n: usize, variant: String },
    Error { n: usize, variant: String, observed: f64, expected: f64, rel: f64 },
    Rate { n: usize, variant: String, observed: Option<f64>, expected: f64 },
}

impl fmt::Display for GoldenDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoldenDiff::Missing { n, variant } => write!(f, "N={n} {variant}: no result"),
            GoldenDiff::Error { n, variant, observed, expected, rel } => {
                write!(f, "N={n} {variant}: error {observed:.4e} vs {expected:.4e} (rel {rel:+.3})")
            }
            GoldenDiff::Rate { n, variant, observed: Some(o), expected } => {
                write!(f, "N={n} {variant}: rate {o:.4} vs {expected:.4}")
            }
            GoldenDiff::Rate { n, variant, observed: None, expected } => {
                write!(f, "N={n} {variant}: rate undefined vs {expected:.4}")
            }
        }
    }
}

/// Compares every golden entry whose `N` appears in the table. Entries at
/// rungs outside the table's ladder are skipped; entries at a rung the
/// table covers but without a result are flagged.
pub fn compare_golden(table: &StudyTable, golden: &[GoldenEntry], tol: GoldenTolerance) -> Vec<GoldenDiff> {
    let rungs: Vec<usize> = table.rows.iter().map(|r| r.n).collect();
    let variants: Vec<&str> = table.rows.iter().map(|r| r.variant.as_str()).collect();
    let mut diffs = Vec::new();
    for g in golden {
        if !rungs.contains(&g.n) || !variants.contains(&g.variant.as_str()) {
            continue;
        }
        let Some(row) = table.get(g.n, &g.variant) else {
            diffs.push(GoldenDiff::Missing { n: g.n, variant: g.variant.clone() });
            continue;
        };
        let Some(err) = row.error else {
            diffs.push(GoldenDiff::Missing { n: g.n, variant: g.variant.clone() });
            continue;
        };
        let rel = (err - g.error) / g.error;
        if rel.abs() > tol.error_rel {
            diffs.push(GoldenDiff::Error { n: g.n, variant: g.variant.clone(), observed: err, expected: g.error, rel });
        }
        if let Some(expected) = g.rate {
            let coarse_present = rungs.contains(&(g.n / 2));
            if coarse_present && row.rate.is_none_or(|r| (r - expected).abs() > tol.rate_abs) {
                diffs.push(GoldenDiff::Rate { n: g.n, variant: g.variant.clone(), observed: row.rate, expected });
            }
        }
    }
    diffs
}

/// Reference table for the nonsmooth preset.
pub const GOLDEN_NONSMOOTH: &str = include_str!("../golden/encdec-nonsmooth.csv");
/// Reference table for the smooth preset.
pub const GOLDEN_SMOOTH: &str = include_str!("../golden/encdec-smooth.csv");

pub fn builtin_golden(preset: &str) -> Option<&'static str> {
    match preset {
        "encdec-nonsmooth" => Some(GOLDEN_NONSMOOTH),
        "encdec-smooth" => Some(GOLDEN_SMOOTH),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder() {
        assert_eq!(doubling_ladder(50, 400).unwrap(), vec![50, 100, 200, 400]);
        assert_eq!(doubling_ladder(50, 399).unwrap(), vec![50, 100, 200]);
        assert!(doubling_ladder(0, 4).is_err());
    }

    #[test]
    fn golden_rates_follow_from_golden_errors() {
        for text in [GOLDEN_NONSMOOTH, GOLDEN_SMOOTH] {
            let g = parse_golden(text).unwrap();
            assert_eq!(g.len(), 18);
            for e in &g {
                if let Some(rate) = e.rate {
                    let coarse = g.iter().find(|c| c.n * 2 == e.n && c.variant == e.variant).unwrap();
                    // Errors are printed to three significant digits; widen by
                    // the worst-case effect of that rounding on the rate.
                    let half_ulp = |v: f64| 0.5 * 10f64.powf(v.log10().floor() - 2.0);
                    let slack =
                        (half_ulp(coarse.error) / coarse.error + half_ulp(e.error) / e.error) / std::f64::consts::LN_2;
                    let r = observed_rate(coarse.error, e.error).unwrap();
                    assert!((r - rate).abs() <= 0.005 + slack, "N={} {}: {r} vs {rate}", e.n, e.variant);
                }
            }
        }
    }

    fn table(rows: &[(usize, &str, f64)]) -> StudyTable {
        let mut t = StudyTable {
            rows: rows
                .iter()
                .map(|&(n, v, e)| StudyRow { n, variant: v.into(), error: Some(e), rate: None, failure: None })
                .collect(),
        };
        t.fill_rates();
        t
    }

    #[test]
    fn compare_matches_and_flags() {
        let golden = parse_golden(GOLDEN_NONSMOOTH).unwrap();
        let ok = table(&[(50, "lxf", 47.8), (100, "lxf", 35.6)]);
        assert!(compare_golden(&ok, &golden, GoldenTolerance::default()).is_empty());
        let off = table(&[(50, "lxf", 47.8 * 1.2), (100, "lxf", 35.6 * 1.2)]);
        let d = compare_golden(&off, &golden, GoldenTolerance::default());
        assert_eq!(d.len(), 2);
        assert!(d[0].to_string().starts_with("N=50 lxf"));
    }

    #[test]
    fn zero_errors_have_no_rate() {
        let t = table(&[(8, "upwind", 0.0), (16, "upwind", 0.0)]);
        assert!(t.rows.iter().all(|r| r.rate.is_none()));
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("16,upwind,0e0,-"));
    }
}
