//! Argument parsing and dispatch.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lacunary_core::circle::{parse_trig_poly, TrigPoly, DEFAULT_Q};
use lacunary_core::extremality::{OracleOptions, Weight};
use lacunary_core::spectra::SpectralSet;
use serde_json::json;

use crate::commands::{self, Outcome};
use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};
use crate::report::Report;
use crate::scan;

#[derive(Debug, Parser)]
#[command(name = "lacunary", version, about = "Extreme points of the unit ball in lacunary L¹ and L∞")]
pub struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SetArg {
    /// Spectral set descriptor, e.g. `Z \ {0,5}` or `AP(3,0)|AP(3,1)`.
    #[arg(long)]
    pub set: String,
}

#[derive(Debug, Args)]
pub struct FnArg {
    /// Trigonometric polynomial, e.g. `(1 + z^2)/2` or `zbar^3`.
    #[arg(long = "f")]
    pub f: String,
    /// Rescale `f` to unit norm in the command's space first.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct GridArg {
    /// Quadrature grids have `2^q` nodes.
    #[arg(long = "grid-exp", default_value_t = DEFAULT_Q)]
    pub grid_exp: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Families, period and members of a spectral set.
    SetInfo {
        #[command(flatten)]
        set: SetArg,
        #[arg(long, default_value_t = 16)]
        band: i64,
    },
    /// L¹ non-extremality witness.
    WitnessL1 {
        #[command(flatten)]
        set: SetArg,
        #[command(flatten)]
        f: FnArg,
        #[arg(long, default_value_t = 8)]
        degree: i64,
        #[command(flatten)]
        grid: GridArg,
    },
    /// L∞ non-extremality witness for a cofinite set.
    WitnessLinf {
        #[command(flatten)]
        set: SetArg,
        #[command(flatten)]
        f: FnArg,
        #[command(flatten)]
        grid: GridArg,
    },
    /// Extremality in H¹ (outer functions).
    ClassifyH1 {
        #[command(flatten)]
        f: FnArg,
        #[command(flatten)]
        grid: GridArg,
    },
    /// Extremality in H∞-type spaces.
    ClassifyHinf {
        #[arg(long, default_value = "Zplus")]
        set: String,
        #[command(flatten)]
        f: FnArg,
        #[command(flatten)]
        grid: GridArg,
    },
    /// Extremality in L∞_Λ for cofinite Λ.
    ClassifyLinf {
        #[command(flatten)]
        set: SetArg,
        #[command(flatten)]
        f: FnArg,
        #[command(flatten)]
        grid: GridArg,
    },
    /// Extremality from the measure of {|f| = 1}.
    DsetCheck {
        #[command(flatten)]
        set: SetArg,
        #[command(flatten)]
        f: FnArg,
        #[command(flatten)]
        grid: GridArg,
    },
    /// ∫ log(1 - |f|).
    LogIntegral {
        #[command(flatten)]
        f: FnArg,
        #[command(flatten)]
        grid: GridArg,
    },
    /// Kernel of the Toeplitz operator with symbol φ among polynomials of degree <= cap.
    ToeplitzKernel {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        cap: i64,
    },
    /// LP search for an L∞ perturbation in the span of a basis.
    Oracle {
        #[command(flatten)]
        set: SetArg,
        #[command(flatten)]
        f: FnArg,
        /// Comma-separated expressions; defaults to `1, z, …, z^N` for `Z` minus `N` points.
        #[arg(long)]
        basis: Option<String>,
        #[arg(long, value_enum, default_value_t = WeightArg::Deficit)]
        weight: WeightArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random objectives.
        #[arg(long, default_value_t = 8)]
        reps: usize,
        /// Polygon sides.
        #[arg(long, default_value_t = 64)]
        k: usize,
    },
    /// Seeded random trials from a JSON config.
    Scan {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's trial count.
        #[arg(long)]
        reps: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum WeightArg {
    None,
    Deficit,
}

impl From<WeightArg> for Weight {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::None => Weight::None,
            WeightArg::Deficit => Weight::Deficit,
        }
    }
}

fn parse_set(s: &str) -> CliResult<SpectralSet> {
    s.parse().map_err(|e| CliError::Input(format!("--set {s:?}: {e}")))
}

fn parse_poly(flag: &str, s: &str) -> CliResult<TrigPoly> {
    parse_trig_poly(s).map_err(|e| CliError::Input(format!("{flag} {s:?}: {e}")))
}

enum Norm {
    L1,
    Linf,
}

fn function(arg: &FnArg, norm: Norm, q: u32) -> CliResult<TrigPoly> {
    let f = parse_poly("--f", &arg.f)?;
    if !arg.normalize {
        return Ok(f);
    }
    let n = match norm {
        Norm::L1 => lacunary_core::circle::norm_l1(&f, q)?.value,
        Norm::Linf => lacunary_core::circle::norm_linf(&f, q)?.value,
    };
    if !(n > 0.0) {
        return Err(CliError::Input("--normalize: f has zero norm".into()));
    }
    Ok(f.scale_real(1.0 / n))
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: Cli) -> CliResult<u8> {
    let start = Instant::now();
    let (name, input, outcome): (&str, serde_json::Value, Outcome) = match &cli.command {
        Command::SetInfo { set, band } => {
            let s = parse_set(&set.set)?;
            ("set-info", json!({ "set": set.set, "band": band }), commands::set_info(&s, *band)?)
        }
        Command::WitnessL1 { set, f, degree, grid } => {
            let s = parse_set(&set.set)?;
            let p = function(f, Norm::L1, grid.grid_exp)?;
            let input = json!({ "set": set.set, "f": p, "degree": degree, "grid_exp": grid.grid_exp });
            ("witness-l1", input, commands::witness_l1(&p, &s, *degree, grid.grid_exp)?)
        }
        Command::WitnessLinf { set, f, grid } => {
            let s = parse_set(&set.set)?;
            let p = function(f, Norm::Linf, grid.grid_exp)?;
            let input = json!({ "set": set.set, "f": p, "grid_exp": grid.grid_exp });
            ("witness-linf", input, commands::witness_linf(&p, &s, grid.grid_exp)?)
        }
        Command::ClassifyH1 { f, grid } => {
            let p = function(f, Norm::L1, grid.grid_exp)?;
            let input = json!({ "f": p, "grid_exp": grid.grid_exp });
            ("classify-h1", input, commands::classify_h1(&p, grid.grid_exp)?)
        }
        Command::ClassifyHinf { set, f, grid } => {
            let s = parse_set(set)?;
            let p = function(f, Norm::Linf, grid.grid_exp)?;
            let input = json!({ "set": set, "f": p, "grid_exp": grid.grid_exp });
            ("classify-hinf", input, commands::classify_hinf(&p, &s, grid.grid_exp)?)
        }
        Command::ClassifyLinf { set, f, grid } => {
            let s = parse_set(&set.set)?;
            let p = function(f, Norm::Linf, grid.grid_exp)?;
            let input = json!({ "set": set.set, "f": p, "grid_exp": grid.grid_exp });
            ("classify-linf", input, commands::classify_linf(&p, &s, grid.grid_exp)?)
        }
        Command::DsetCheck { set, f, grid } => {
            let s = parse_set(&set.set)?;
            let p = function(f, Norm::Linf, grid.grid_exp)?;
            let input = json!({ "set": set.set, "f": p, "grid_exp": grid.grid_exp });
            ("dset-check", input, commands::dset_check(&p, &s, grid.grid_exp)?)
        }
        Command::LogIntegral { f, grid } => {
            let p = function(f, Norm::Linf, grid.grid_exp)?;
            let input = json!({ "f": p, "grid_exp": grid.grid_exp });
            ("log-integral", input, commands::log_integral_report(&p, grid.grid_exp)?)
        }
        Command::ToeplitzKernel { phi, cap } => {
            let p = parse_poly("--phi", phi)?;
            ("toeplitz-kernel", json!({ "phi": p, "cap": cap }), commands::toeplitz_kernel(&p, *cap)?)
        }
        Command::Oracle { set, f, basis, weight, seed, reps, k } => {
            let s = parse_set(&set.set)?;
            let p = function(f, Norm::Linf, DEFAULT_Q)?;
            let basis = match basis {
                Some(text) => text
                    .split(',')
                    .map(|e| parse_poly("--basis", e.trim()))
                    .collect::<CliResult<Vec<_>>>()?,
                None => commands::deficit_basis(&s).ok_or_else(|| {
                    CliError::Input("--basis is required unless the set is Z minus finitely many points".into())
                })?,
            };
            let opts = OracleOptions {
                k: *k,
                reps: *reps,
                seed: *seed,
                weight: (*weight).into(),
                ..OracleOptions::default()
            };
            let input = json!({ "set": set.set, "f": p, "basis": basis, "options": opts });
            ("oracle", input, commands::oracle(&p, &basis, &s, &opts)?)
        }
        Command::Scan { config, seed, reps } => return run_scan(&cli, config, *seed, *reps),
    };
    let report = Report::new(name, input, outcome, start.elapsed().as_secs_f64() * 1e3);
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => report.to_csv()?,
    };
    emit(&cli, &text)?;
    Ok(0)
}

fn run_scan(cli: &Cli, path: &PathBuf, seed: Option<u64>, reps: Option<usize>) -> CliResult<u8> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut config = ExperimentConfig::from_json(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        if let crate::config::FunctionSource::Random { seed, .. } = &mut config.function {
            *seed = s;
        }
    }
    if let Some(r) = reps {
        config.search.reps = r;
    }
    let out = cli.out.clone().or_else(|| config.output.path.clone());
    let format = cli.format.unwrap_or(config.output.format);
    let v = config.validate()?;
    let rows = scan::run(&v);
    let summary = scan::summary(&v, &rows);
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            scan::write_csv(&rows, &mut buf)?;
            match &out {
                Some(p) => {
                    fs::write(p, &buf)?;
                    let mut side = p.clone().into_os_string();
                    side.push(".summary.json");
                    fs::write(side, serde_json::to_string_pretty(&summary)? + "\n")?;
                }
                None => {
                    print!("{}", String::from_utf8_lossy(&buf));
                    eprintln!("{}", serde_json::to_string_pretty(&summary)?);
                }
            }
        }
        Format::Json => {
            let doc = json!({
                "schema_version": crate::report::SCHEMA_VERSION,
                "library_version": lacunary_core::VERSION,
                "command": "scan",
                "summary": summary,
                "trials": rows,
            });
            let text = serde_json::to_string_pretty(&doc)? + "\n";
            match &out {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(0)
}
