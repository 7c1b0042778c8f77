//! Closed-form centroid and spread of the three standard initial states on
//! a cosine band (width 1, d = 1, F = 0.05): the Wannier packet breathes in
//! place, the narrow Gaussian translates by about Δ/F.
//!
//! `cargo run --release --example breathing_and_soliton`

use std::f64::consts::PI;

use bloch_lab::observables::trace;
use bloch_lab::{gaussian_state, wannier_state, BandStructure, MomentumState, UnitSystem};

fn main() -> bloch_lab::Result<()> {
    let (width, d, force, n_k) = (1.0, 1.0, 0.05, 256);
    let bands = BandStructure::analytic_cosine_band(width, d, n_k)?;
    let dk = bands.grid().dk();
    let taus: Vec<f64> = (0..=n_k).map(|j| j as f64 * dk).collect();
    let states: [(&str, MomentumState); 3] = [
        ("wannier", wannier_state(d, n_k, 1)?),
        ("gaussian rho=1", gaussian_state(1.0, 0.0, d, n_k)?),
        ("gaussian rho=0.1", gaussian_state(0.1, 0.0, d, n_k)?),
    ];
    println!("{:<18} {:>10} {:>12} {:>12} {:>10}", "state", "S0", "dx(pi)", "dS(pi)", "sigma(pi)");
    for (name, s) in &states {
        let t = trace(s, &bands, force, &taus, &UnitSystem::default())?;
        let mid = t.rows.iter().find(|r| (r.tau - PI).abs() < 1e-12).expect("pi is on the grid");
        println!(
            "{name:<18} {:>10.4} {:>12.6} {:>12.6} {:>10.5}",
            t.initial_spread, mid.dx, mid.ds, mid.sigma
        );
    }
    println!("Wannier dS(pi) closed form Δ²/(2F²) = {}", width * width / (2.0 * force * force));
    Ok(())
}
