use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfv::config::{execute, init_threads, write_failure_report, Command, RunConfig};
use nfv::grid::Boundary;
use nfv::scheme::ConvolutionPath;

/// Finite-volume solver for nonlocal conservation laws.
#[derive(Parser)]
#[command(name = "nfv", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Encrypt and decrypt one preset, writing snapshots and step logs
    Run(Flags),
    /// Grid-refinement study compared against a golden table
    Study(Flags),
    /// Randomised audit of the numerical flux contract
    Audit(Flags),
    /// Forward run with the discrete property checks
    Check(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// TOML configuration file; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// encdec-nonsmooth or encdec-smooth
    #[arg(long)]
    preset: Option<String>,
    /// Preset name or path to a custom model TOML file
    #[arg(long)]
    model: Option<String>,
    /// Grid size, `N` or `N1xN2`
    #[arg(long)]
    grid: Option<String>,
    /// Square grid size, same as `--grid N`
    #[arg(long = "N", conflicts_with = "grid")]
    n: Option<usize>,
    /// Domain bounds `x1min,x1max,x2min,x2max`
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    domain: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    /// Comma-separated list of lxf, lxf-split, godunov, upwind
    #[arg(long, value_delimiter = ',')]
    flux: Option<Vec<String>>,
    /// Lax-Friedrichs viscosity
    #[arg(long)]
    alpha: Option<f64>,
    /// Fraction of the CFL time step
    #[arg(long)]
    cfl: Option<f64>,
    /// Final time
    #[arg(long = "T")]
    t_end: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Golden CSV for `study`
    #[arg(long)]
    golden: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Study ladder `lo:hi`
    #[arg(long)]
    ladder: Option<String>,
    /// Entropy check every this many steps
    #[arg(long)]
    cadence: Option<usize>,
    /// Audit sample count
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_parser = parse_convolution)]
    convolution: Option<ConvolutionPath>,
    /// Run study rungs concurrently
    #[arg(long)]
    parallel_rungs: bool,
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    match s {
        "periodic" => Ok(Boundary::Periodic),
        "zero" | "zero-extension" => Ok(Boundary::ZeroExtension),
        other => Err(format!("unknown boundary '{other}'")),
    }
}

fn parse_convolution(s: &str) -> Result<ConvolutionPath, String> {
    match s {
        "fast" | "fft" => Ok(ConvolutionPath::Fast),
        "direct" => Ok(ConvolutionPath::Direct),
        other => Err(format!("unknown convolution path '{other}'")),
    }
}

impl Flags {
    fn overrides(&self, command: Command) -> RunConfig {
        RunConfig {
            command: Some(command),
            preset: self.preset.clone(),
            model: self.model.clone(),
            custom: None,
            grid: self.grid.clone().or(self.n.map(|n| n.to_string())),
            domain: self.domain.as_ref().map(|d| [d[0], d[1], d[2], d[3]]),
            boundary: self.boundary,
            flux: self.flux.clone(),
            alpha: self.alpha,
            cfl: self.cfl,
            t_end: self.t_end,
            out: self.out.clone(),
            golden: self.golden.clone(),
            seed: self.seed,
            ladder: self.ladder.clone(),
            cadence: self.cadence,
            samples: self.samples,
            convolution: self.convolution,
            parallel_rungs: self.parallel_rungs.then_some(true),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::Run(f) => (Command::Run, f),
        Sub::Study(f) => (Command::Study, f),
        Sub::Audit(f) => (Command::Audit, f),
        Sub::Check(f) => (Command::Check, f),
    };
    let out_dir = flags.out.clone().unwrap_or_else(|| PathBuf::from("nfv-out"));
    let fail = |e: nfv::Error, dir: &std::path::Path| {
        eprintln!("nfv {}: {e}", command.name());
        write_failure_report(dir, command.name(), &e);
        ExitCode::from(2)
    };
    if let Err(e) = init_threads() {
        return fail(e, &out_dir);
    }
    let file = match &flags.config {
        Some(path) => match RunConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => return fail(e, &out_dir),
        },
        None => RunConfig::default(),
    };
    let merged = file.merge(flags.overrides(command));
    let plan = match merged.resolve() {
        Ok(p) => p,
        Err(e) => return fail(e, merged.out.as_deref().unwrap_or(&out_dir)),
    };
    match execute(&plan) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("nfv {}: assertion failed, see {}", command.name(), plan.out.display());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("nfv {}: {e}", command.name());
            ExitCode::from(2)
        }
    }
}
