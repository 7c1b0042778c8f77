//! Band structure of a cosine lattice: widths, gaps, cutoff sensitivity and
//! the diagonal Berry connection of the lowest band.
//!
//! `cargo run --release --example band_structure`

use bloch_lab::band_structure::berry::normalization_residue;
use bloch_lab::{solve_bands, BandSolver, CrystalPotential, UnitSystem};

fn main() -> bloch_lab::Result<()> {
    let units = UnitSystem::default();
    let pot = CrystalPotential::cosine(2.0, -2.5)?;
    let bands = solve_bands(&pot, &units, 256, 32, 3)?;
    for n in 1..=bands.n_bands() {
        print!("band {n}: width {:.9}", bands.width(n)?);
        if n < bands.n_bands() {
            print!(", gap above {:.9}", bands.gap_above(n)?);
        }
        println!();
    }

    let finer = solve_bands(&pot, &units, 256, 64, 3)?;
    let moved = (1..=3)
        .flat_map(|n| {
            let (a, b) = (bands.energies(n).unwrap(), finer.energies(n).unwrap());
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    println!("largest energy change from M_cut 32 -> 64: {moved:.2e}");

    let x1 = bands.berry(1)?;
    let peak = x1.iter().map(|v| v.abs()).fold(0.0, f64::max);
    println!(
        "band 1 Berry connection: max |X_11| = {peak:.2e} (inversion symmetric), residue {:.2e}",
        normalization_residue(&bands, 1)?
    );

    // a tiny plane-wave cutoff on a deep lattice trips the truncation check
    let deep = CrystalPotential::cosine(1.0, -40.0)?;
    let coarse = BandSolver::new(64, 4, 3).with_cutoff_check(1e-8).solve(&deep, &units)?;
    for w in coarse.warnings() {
        println!("warning: {w}");
    }
    Ok(())
}
