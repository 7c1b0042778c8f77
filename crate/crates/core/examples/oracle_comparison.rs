//! Decoupled-band prediction against a split-step integration of the full
//! tilted-lattice equation over one Bloch period, for a few field strengths.
//!
//! `cargo run --release --example oracle_comparison [F ...]`

use bloch_lab::validation::oracle_point;
use bloch_lab::{solve_bands, CrystalPotential, UnitSystem};

fn main() -> bloch_lab::Result<()> {
    let forces: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("field strengths must be numbers"))
        .collect();
    let forces = if forces.is_empty() { vec![0.08, 0.04] } else { forces };
    let units = UnitSystem::default();
    let pot = CrystalPotential::cosine(2.0, -2.5)?;
    let bands = solve_bands(&pot, &units, 256, 32, 4)?;
    for f in forces {
        let p = oracle_point(&pot, &bands, &units, f, 0.1, 0.005, Some(1e-3))?;
        println!(
            "F = {f}: 1 - fidelity {:.3e}, out of band {:.3e}, absorbed {:.2e}, halving {:.2e}, {} steps",
            p.infidelity, p.out_of_band, p.absorbed, p.halving_discrepancy, p.steps
        );
    }
    Ok(())
}
