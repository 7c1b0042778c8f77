//! Split-step integrator against closed-form free and uniformly accelerated
//! motion, plus synthesis/projection identities and gauge robustness.

use std::f64::consts::PI;

use num_complex::Complex64;

use bloch_lab::oracle::{
    fidelity, project_to_bands, split_step_evolve, synthesize_position_state, OracleConfig,
};
use bloch_lab::position_space::{mass_within, PositionWavepacket, XGrid};
use bloch_lab::{
    gaussian_state, solve_bands, wannier_state, BandStructure, CrystalPotential, DecoupledPropagator,
    MomentumState, UnitSystem,
};

fn free_box(dtau: f64) -> OracleConfig {
    OracleConfig {
        half_length: 204.8,
        x_step: 0.1,
        dtau,
        splitting_order: 2,
        absorber_width: 0.1,
        absorber_strength: 1.0,
        center: 0.0,
        absorbed_budget: 1e-6,
        halving_tolerance: None,
    }
}

fn gaussian_packet(grid: XGrid, x0: f64, sigma: f64, p0: f64) -> PositionWavepacket {
    let a = (2.0 * PI * sigma * sigma).powf(-0.25);
    let values = grid
        .points()
        .iter()
        .map(|&x| {
            let env = a * (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(env, p0 * x)
        })
        .collect();
    PositionWavepacket::new(grid, values, 0.0).unwrap()
}

fn mean_and_variance(p: &PositionWavepacket) -> (f64, f64) {
    let dx = p.x_grid.step;
    let rho = p.density();
    let norm: f64 = rho.iter().sum::<f64>() * dx;
    let mean = rho.iter().enumerate().map(|(i, r)| p.x_grid.x(i) * r).sum::<f64>() * dx / norm;
    let var = rho
        .iter()
        .enumerate()
        .map(|(i, r)| (p.x_grid.x(i) - mean).powi(2) * r)
        .sum::<f64>()
        * dx
        / norm;
    (mean, var)
}

#[test]
fn free_gaussian_follows_spreading_law() {
    let units = UnitSystem::new(1.0, 0.5).unwrap();
    let force = 1e-3;
    let cfg = free_box(2e-5);
    let psi0 = gaussian_packet(cfg.x_grid().unwrap(), 0.0, 2.0, 0.0);
    let pot = CrystalPotential::zero(1.0).unwrap();
    let taus = [0.005, 0.01, 0.02];
    let run = split_step_evolve(&pot, force, &psi0, &taus, &cfg, &units).unwrap();
    let (_, var0) = mean_and_variance(&psi0);
    for (snap, &tau) in run.snapshots.iter().zip(&taus) {
        let t = tau * units.hbar / force;
        // σ² = σ0² + (κt/(ħσ0))² with κ = ħ²/2m
        let exact = var0 + (units.kinetic_coeff * t / (units.hbar * var0.sqrt())).powi(2);
        let (_, var) = mean_and_variance(snap);
        assert!((var - exact).abs() / exact < 1e-6, "t = {t}: {var} vs {exact}");
    }
    assert!(run.absorbed < 1e-12);
}

#[test]
fn linear_potential_gives_uniform_acceleration() {
    let units = UnitSystem::default();
    let force = 0.05;
    let cfg = free_box(0.01);
    let (x0, p0) = (-10.0, 0.3);
    let psi0 = gaussian_packet(cfg.x_grid().unwrap(), x0, 2.0, p0);
    let pot = CrystalPotential::zero(1.0).unwrap();
    let taus = [0.25, 0.5, 1.0];
    let run = split_step_evolve(&pot, force, &psi0, &taus, &cfg, &units).unwrap();
    for (snap, &tau) in run.snapshots.iter().zip(&taus) {
        let t = tau * units.hbar / force;
        // ẋ = 2κp/ħ², ṗ = F
        let v0 = 2.0 * units.kinetic_coeff * p0 / units.hbar;
        let exact = x0 + v0 * t + units.kinetic_coeff * force * t * t / (units.hbar * units.hbar);
        let (mean, _) = mean_and_variance(snap);
        assert!((mean - exact).abs() < 1e-8, "t = {t}: {mean} vs {exact}");
    }
}

#[test]
fn splitting_is_second_order() {
    let units = UnitSystem::default();
    let pot = CrystalPotential::cosine(2.0, -2.5).unwrap();
    let bands = solve_bands(&pot, &units, 64, 16, 2).unwrap();
    let init = gaussian_state(0.3, 0.0, 2.0, 64).unwrap();
    let force = 0.1;
    let run_at = |dtau: f64| {
        let mut cfg = OracleConfig::for_bands(&bands, dtau);
        cfg.absorber_strength = 0.0;
        let psi0 = synthesize_position_state(&init, &bands, &cfg.x_grid().unwrap()).unwrap();
        let run = split_step_evolve(&pot, force, &psi0, &[0.2], &cfg, &units).unwrap();
        run.snapshots.into_iter().next().unwrap()
    };
    let reference = run_at(0.0125e-2);
    let dist = |a: &PositionWavepacket| {
        let overlap: Complex64 = a.values.iter().zip(&reference.values).map(|(p, q)| p.conj() * q).sum();
        (a.norm_sqr() + reference.norm_sqr() - 2.0 * overlap.norm() * a.x_grid.step).max(0.0).sqrt()
    };
    let e1 = dist(&run_at(0.2e-2));
    let e2 = dist(&run_at(0.1e-2));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "error ratio {ratio} ({e1:.3e} / {e2:.3e})");
}

fn gapped() -> (CrystalPotential, BandStructure) {
    let pot = CrystalPotential::cosine(2.0, -2.5).unwrap();
    let bands = solve_bands(&pot, &UnitSystem::default(), 128, 24, 4).unwrap();
    (pot, bands)
}

#[test]
fn synthesis_and_projection_are_inverse() {
    let (_, bands) = gapped();
    let cfg = OracleConfig::for_bands(&bands, 0.01);
    let x = cfg.x_grid().unwrap();
    let mut amps = gaussian_state(0.4, 0.3, 2.0, 128).unwrap().amplitudes().to_vec();
    // a little weight in band 2 with a complex profile
    amps.push(
        (0..128)
            .map(|j| Complex64::from_polar(0.05 * (-(j as f64 - 40.0).powi(2) / 200.0).exp(), 0.01 * j as f64))
            .collect(),
    );
    let s = MomentumState::new(*bands.grid(), amps).unwrap();
    let psi = synthesize_position_state(&s, &bands, &x).unwrap();
    assert!((psi.norm_sqr() - s.norm_sqr()).abs() < 1e-10);
    let proj = project_to_bands(&psi, &bands, 4, 1e-8).unwrap();
    for (a, b) in s.amplitudes().iter().zip(proj.state.amplitudes()) {
        for (p, q) in a.iter().zip(b) {
            assert!((p - q).norm() < 1e-8);
        }
    }
    let f = fidelity(&s, &proj.state).unwrap() / s.norm_sqr();
    assert!(f >= 1.0 - 1e-8, "fidelity {f}");
}

#[test]
fn wannier_packet_sits_on_a_few_cells() {
    let (_, bands) = gapped();
    let d = bands.period();
    let x = XGrid::centered(0.0, 30.0 * d, d / 16.0).unwrap();
    let psi = synthesize_position_state(&wannier_state(d, 128, 1).unwrap(), &bands, &x).unwrap();
    assert!((psi.norm_sqr() - 1.0).abs() < 1e-6);
    let near = mass_within(&psi, (-5.0 * d, 5.0 * d)).unwrap();
    assert!(near >= 0.95, "mass within 5 cells {near}");
}

#[test]
fn plane_wave_lands_in_one_bin() {
    let pot = CrystalPotential::zero(1.0).unwrap();
    let bands = solve_bands(&pot, &UnitSystem::default(), 64, 8, 3).unwrap();
    let cfg = OracleConfig::for_bands(&bands, 0.01);
    let x = cfg.x_grid().unwrap();
    let k = bands.grid().k(23);
    let values = x.points().iter().map(|&xi| Complex64::from_polar(0.1, k * xi)).collect();
    let pkt = PositionWavepacket::new(x, values, 0.0).unwrap();
    let proj = project_to_bands(&pkt, &bands, 3, 1e-10).unwrap();
    let weights: Vec<(usize, usize, f64)> = proj
        .state
        .amplitudes()
        .iter()
        .enumerate()
        .flat_map(|(n, a)| a.iter().enumerate().map(move |(j, c)| (n, j, c.norm_sqr())))
        .collect();
    let total: f64 = weights.iter().map(|w| w.2).sum();
    let top = weights.iter().cloned().fold((0, 0, 0.0), |b, w| if w.2 > b.2 { w } else { b });
    assert_eq!((top.0, top.1), (0, 23));
    assert!((total - top.2) / total < 1e-20);
}

#[test]
fn fidelity_is_gauge_independent() {
    let (pot, bands) = gapped();
    let units = UnitSystem::default();
    let force = 0.08;
    let tau_b = bands.grid().zone_width();
    let init = gaussian_state(0.1, 0.0, 2.0, 128).unwrap();
    let delta = bands.width(1).unwrap();
    let cfg = OracleConfig::for_bands(&bands, force * 0.01).with_center(delta / (2.0 * force));
    let x = cfg.x_grid().unwrap();
    let psi0 = synthesize_position_state(&init, &bands, &x).unwrap();
    let run = split_step_evolve(&pot, force, &psi0, &[tau_b], &cfg, &units).unwrap();
    let end = &run.snapshots[0];

    let compare = |b: &BandStructure, start: &MomentumState| {
        let oracle = project_to_bands(end, b, 4, 1.0).unwrap().state;
        let decoupled = DecoupledPropagator::new(b, force).unwrap().evolve(start, tau_b).unwrap().state;
        fidelity(&decoupled, &oracle).unwrap()
    };
    let before = compare(&bands, &init);

    // u_1 -> e^{iχ} u_1 rotates the band-1 amplitudes of the same ψ by e^{-iχ}
    let d = bands.period();
    let chi = |k: f64| (0.7 * (k * d).sin() + 0.2 * (2.0 * k * d).cos(), 0.7 * d * (k * d).cos() - 0.4 * d * (2.0 * k * d).sin());
    let regauged = bands.regauged(1, chi).unwrap();
    let rotated: Vec<Vec<Complex64>> = init
        .amplitudes()
        .iter()
        .map(|a| {
            a.iter()
                .zip(bands.grid().points())
                .map(|(c, k)| c * Complex64::from_polar(1.0, -chi(k).0))
                .collect()
        })
        .collect();
    let init2 = MomentumState::new(*bands.grid(), rotated).unwrap();
    let after = compare(&regauged, &init2);
    assert!((before - after).abs() < 1e-10, "{before} vs {after}");
    assert!(before > 0.99);
}
