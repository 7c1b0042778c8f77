//! Decoupled-band evolution of a Gaussian: the acceleration theorem, the
//! Bloch-period recurrence of |φ(k)| and the uniform residual phase.
//!
//! `cargo run --release --example decoupled_evolution`

use bloch_lab::{gaussian_state, mean_crystal_momentum, solve_bands, CrystalPotential, DecoupledPropagator, UnitSystem};

fn main() -> bloch_lab::Result<()> {
    let pot = CrystalPotential::cosine(2.0, -2.5)?;
    let bands = solve_bands(&pot, &UnitSystem::default(), 256, 32, 2)?;
    let grid = *bands.grid();
    let init = gaussian_state(0.3, 0.4, grid.period(), grid.len())?;
    let prop = DecoupledPropagator::new(&bands, 0.05)?;
    let k0 = mean_crystal_momentum(&init, 0.4);
    for steps in [0, 32, 64, 128, 200, 256] {
        let tau = steps as f64 * grid.dk();
        let s = prop.evolve(&init, tau)?.state;
        println!("tau = {tau:.5}: <k> - <k>0 = {:.12}", mean_crystal_momentum(&s, 0.4 + tau) - k0);
    }

    let tau_b = grid.zone_width();
    let after = prop.evolve(&init, tau_b)?.state;
    let (a0, a1) = (&init.amplitudes()[0], &after.amplitudes()[0]);
    let modulus = a0.iter().zip(a1).map(|(p, q)| (p.norm() - q.norm()).abs()).fold(0.0, f64::max);
    let phases: Vec<f64> = a0
        .iter()
        .zip(a1)
        .filter(|(p, _)| p.norm() > 1e-6)
        .map(|(p, q)| (q / p).arg())
        .collect();
    let spread = phases.iter().map(|p| (p - phases[0]).abs()).fold(0.0, f64::max);
    println!("after one Bloch period: max ||φ| - |φ0|| = {modulus:.2e}, residual phase {:.6} (spread {spread:.2e})", phases[0]);
    Ok(())
}
