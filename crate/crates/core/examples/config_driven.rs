//! Runs the `trace` and `bands` commands from an inline configuration with
//! an override, exactly as the command-line tool would.
//!
//! `cargo run --release --example config_driven`

use bloch_lab::cli;
use bloch_lab::config::RunConfig;
use bloch_lab::io::read_trace_csv;

const CONFIG: &str = r#"
F = 0.05

[potential]
kind = "analytic_cosine_band"
d = 1.0
width = 1.0

[initial_state]
kind = "gaussian"
rho = 0.1
"#;

fn main() -> bloch_lab::Result<()> {
    let out = std::env::temp_dir().join("bloch-lab-example");
    std::fs::create_dir_all(&out)?;
    let cfg = RunConfig::from_toml_str(CONFIG, &["grids.tau_periods=1".to_string()])?;
    cli::cmd_bands(&cfg, &out)?;
    cli::cmd_trace(&cfg, &out)?;
    let rows = read_trace_csv(&out.join(&cfg.output.trace))?;
    let peak = rows.iter().max_by(|a, b| a.dx.total_cmp(&b.dx)).expect("non-empty trace");
    println!("peak dx {:.6} at tau {:.6}", peak.dx, peak.tau);
    println!("effective config:\n{}", cfg.to_toml_string()?);
    Ok(())
}
