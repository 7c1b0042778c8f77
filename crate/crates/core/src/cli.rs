//! Command-line driver: `bands`, `trace`, `reconstruct`, `validate`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 validation failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io;
use crate::momentum_dynamics::DecoupledPropagator;
use crate::observables::{self, localization_interval};
use crate::oracle::{fidelity, project_to_bands};
use crate::position_space::{mass_within, reconstruct};
use crate::validation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bloch-lab", version, about = "Bloch oscillations of wave-packets in a tilted lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the band structure and write the band file
    Bands(RunArgs),
    /// Write the observable trace (tau, mean_k, dx, dS, sigma, chi) as CSV
    Trace(RunArgs),
    /// Write position-space packets at the configured snapshot times
    Reconstruct(RunArgs),
    /// Compare against the split-step oracle and the closed forms
    Validate(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Run configuration (TOML)
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override a config value, e.g. `grids.n_k=128` (repeatable)
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            }
        }
    }
}

type Handler = fn(&RunConfig, &Path) -> Result<i32>;

pub fn run(command: &Command) -> Result<i32> {
    let (args, f): (&RunArgs, Handler) = match command {
        Command::Bands(a) => (a, cmd_bands),
        Command::Trace(a) => (a, cmd_trace),
        Command::Reconstruct(a) => (a, cmd_reconstruct),
        Command::Validate(a) => (a, cmd_validate),
    };
    let cfg = RunConfig::load(&args.config, &args.overrides)?;
    std::fs::create_dir_all(&args.out)?;
    f(&cfg, &args.out)
}

pub fn cmd_bands(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let bands = cfg.build_bands()?;
    let path = out.join(&cfg.output.bands);
    io::write_band_structure(&bands, &path)?;
    println!("wrote {}", path.display());
    for n in 1..=bands.n_bands() {
        let width = bands.width(n)?;
        if n < bands.n_bands() {
            println!("band {n}: width {width:.12}, gap above {:.12}", bands.gap_above(n)?);
        } else {
            println!("band {n}: width {width:.12}");
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_trace(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let bands = cfg.build_bands()?;
    let init = cfg.build_state()?;
    let trace = observables::trace(&init, &bands, cfg.force, &cfg.tau_grid(), &cfg.units)?;
    let path = out.join(&cfg.output.trace);
    io::save_trace_csv(&trace, &path)?;
    let peak = |f: fn(&observables::TraceRow) -> f64| {
        trace.rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    };
    println!("wrote {} ({} rows)", path.display(), trace.rows.len());
    println!(
        "S0 = {:.9}, max dx = {:.9}, max sigma = {:.9}, max chi = {:.9}",
        trace.initial_spread,
        peak(|r| r.dx),
        peak(|r| r.sigma),
        peak(|r| r.chi)
    );
    Ok(EXIT_OK)
}

pub fn cmd_reconstruct(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let bands = cfg.build_bands()?;
    if !bands.has_basis() {
        return Err(Error::Config(
            "reconstruction needs a real-space potential (cosine or fourier), not an analytic band".into(),
        ));
    }
    let init = cfg.build_state()?;
    let x_grid = cfg.x_grid(&bands)?;
    let d = cfg.period();
    let band = init.lowest_occupied_band();
    let prop = DecoupledPropagator::new(&bands, cfg.force)?;
    let mut first_abs: Option<Vec<f64>> = None;
    for (i, &tau) in cfg.snapshot_taus().iter().enumerate() {
        let pkt = reconstruct(&init, &bands, cfg.force, tau, &x_grid)?;
        let path = out.join(format!("{}_{i:03}.csv", cfg.output.packet_prefix));
        io::save_packet_csv(&pkt, &path)?;
        let reach = localization_interval(&bands, band, tau)? / cfg.force + 10.0 * d;
        let lo = (-reach).max(x_grid.start);
        let hi = reach.min(x_grid.end());
        let mass = mass_within(&pkt, (lo, hi))?;
        let proj = project_to_bands(&pkt, &bands, bands.n_bands(), 1.0)?;
        let expected = prop.evolve(&init, tau)?;
        let fid = fidelity(&expected.state, &proj.state)?;
        println!(
            "tau = {tau:.6}: {} norm {:.9}, mass within ±{reach:.3} {mass:.9}, projection fidelity {fid:.12}",
            path.display(),
            pkt.norm_sqr()
        );
        let abs: Vec<f64> = pkt.values.iter().map(|v| v.norm()).collect();
        match &first_abs {
            None if tau == 0.0 => first_abs = Some(abs),
            Some(a0) if (tau / cfg.tau_bloch() - (tau / cfg.tau_bloch()).round()).abs() < 1e-12 => {
                let gap = a0.iter().zip(&abs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                println!("  |psi| recurrence against tau = 0: max difference {gap:.3e}");
            }
            _ => {}
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let report = validation::run(cfg)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let path = out.join(&cfg.output.report);
    std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    println!("wrote {}", path.display());
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_VALIDATION })
}
