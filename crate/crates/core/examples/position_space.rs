//! Wannier packet on a gapped lattice rebuilt in position space at a few
//! times: norm, moments and the mass inside ±(χ/F + 10d).
//!
//! `cargo run --release --example position_space`

use bloch_lab::observables::{centroid_shift, localization_interval, variance_shift};
use bloch_lab::position_space::{direct_moments, mass_within, reconstruct, XGrid};
use bloch_lab::{solve_bands, wannier_state, CrystalPotential, UnitSystem};

fn main() -> bloch_lab::Result<()> {
    let (d, force) = (2.0, 0.05);
    let pot = CrystalPotential::cosine(d, -2.5)?;
    let bands = solve_bands(&pot, &UnitSystem::default(), 256, 32, 3)?;
    let init = wannier_state(d, 256, 1)?;
    let x_grid = XGrid::default_for(bands.width(1)?, force, d)?;
    let tau_b = bands.grid().zone_width();
    for frac in [0.0, 0.25, 0.5, 1.0] {
        let tau = frac * tau_b;
        let pkt = reconstruct(&init, &bands, force, tau, &x_grid)?;
        let m = direct_moments(&pkt)?;
        let reach = localization_interval(&bands, 1, tau)? / force + 10.0 * d;
        println!(
            "tau = {frac:.2} tB: norm {:.8}, <x> {:+.6} (closed form {:+.6}), var {:.4} (closed-form shift {:.4}), mass in ±{reach:.1} {:.8}",
            m.norm,
            m.mean,
            centroid_shift(&init, &bands, force, tau)?,
            m.variance,
            variance_shift(&init, &bands, force, tau)?,
            mass_within(&pkt, (-reach, reach))?
        );
    }
    Ok(())
}
