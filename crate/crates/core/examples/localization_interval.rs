//! Half-width χ(τ) of the instantaneous localization interval on a cosine
//! band against Δ|sin(τ/2)|, and the same quantity on a solved lattice.
//!
//! `cargo run --release --example localization_interval`

use bloch_lab::observables::localization_interval;
use bloch_lab::{solve_bands, BandStructure, CrystalPotential, UnitSystem};

fn main() -> bloch_lab::Result<()> {
    let cos_band = BandStructure::analytic_cosine_band(1.0, 1.0, 256)?;
    let pot = CrystalPotential::cosine(2.0, -2.5)?;
    let lattice = solve_bands(&pot, &UnitSystem::default(), 256, 32, 2)?;
    println!("{:>8} {:>14} {:>14} {:>14}", "tau/tB", "chi cosine", "|sin(tau/2)|", "chi lattice");
    for i in 0..=8 {
        let frac = i as f64 / 8.0;
        let a = localization_interval(&cos_band, 1, frac * cos_band.grid().zone_width())?;
        let b = localization_interval(&lattice, 1, frac * lattice.grid().zone_width())?;
        let sin = (frac * std::f64::consts::PI).sin().abs();
        println!("{frac:>8.3} {a:>14.10} {sin:>14.10} {b:>14.10}");
    }
    println!("lattice band width {:.10}", lattice.width(1)?);
    Ok(())
}
