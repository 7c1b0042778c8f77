//! Closed-form observables of a decoupled-band wave-packet.
//!
//! Everything here is expressed through the initial amplitudes `φ_n⁰` and
//! the band functions; the evolved amplitudes are never needed because the
//! phase factor drops out of these moments. Position moments follow the
//! crystal-momentum convention `x ↔ i∂_k`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::band_structure::{refine_extremum, BandStructure, UnitSystem};
use crate::error::{ensure, Result};
use crate::initial_states::MomentumState;
use crate::momentum_dynamics::{mean_crystal_momentum, DecoupledPropagator};
use crate::spectral::{self, PeriodicSeries};

fn check_compatible(init: &MomentumState, bands: &BandStructure) -> Result<()> {
    ensure(init.grid().same_as(bands.grid()), || {
        "state and band structure use different k-grids".into()
    })?;
    ensure(init.n_bands() <= bands.n_bands(), || {
        format!(
            "state occupies {} bands, band structure has {}",
            init.n_bands(),
            bands.n_bands()
        )
    })
}

/// `Σ_n ∫ |φ_n⁰(k)|² g_n(k) dk` for per-band samples `g_n`.
fn weighted_sum(init: &MomentumState, per_band: impl Fn(usize) -> Result<Vec<f64>>) -> Result<f64> {
    let dk = init.grid().dk();
    let mut acc = 0.0;
    for (idx, amp) in init.amplitudes().iter().enumerate() {
        if amp.iter().all(|c| c.norm() == 0.0) {
            continue;
        }
        let g = per_band(idx + 1)?;
        acc += amp.iter().zip(&g).map(|(c, v)| c.norm_sqr() * v).sum::<f64>();
    }
    Ok(acc * dk)
}

fn energy_increments(bands: &BandStructure, n: usize, tau: f64) -> Result<Vec<f64>> {
    let e = bands.energies(n)?;
    let ahead = spectral::advanced_real(bands.grid(), e, tau);
    Ok(ahead.iter().zip(e).map(|(a, b)| a - b).collect())
}

/// `⟨x⟩^τ - ⟨x⟩⁰ = (1/F) Σ_n ∫ |φ_n⁰(k)|² [E_n(k+τ) - E_n(k)] dk`.
pub fn centroid_shift(init: &MomentumState, bands: &BandStructure, force: f64, tau: f64) -> Result<f64> {
    check_compatible(init, bands)?;
    ensure(force > 0.0, || format!("F must be positive, got {force}"))?;
    Ok(weighted_sum(init, |n| energy_increments(bands, n, tau))? / force)
}

/// Mean energy `⟨E(k + τ)⟩⁰` over the initial distribution.
pub fn mean_energy(init: &MomentumState, bands: &BandStructure, tau: f64) -> Result<f64> {
    check_compatible(init, bands)?;
    weighted_sum(init, |n| {
        Ok(spectral::advanced_real(bands.grid(), bands.energies(n)?, tau))
    })
}

/// Same quantity as [`centroid_shift`] written as a difference of mean
/// energies, `(⟨E(k+τ)⟩⁰ - ⟨E(k)⟩⁰)/F`.
pub fn centroid_shift_from_mean_energies(
    init: &MomentumState,
    bands: &BandStructure,
    force: f64,
    tau: f64,
) -> Result<f64> {
    ensure(force > 0.0, || format!("F must be positive, got {force}"))?;
    Ok((mean_energy(init, bands, tau)? - mean_energy(init, bands, 0.0)?) / force)
}

/// `⟨x⟩⁰ = Σ_n ∫ conj(φ_n⁰) i∂_kφ_n⁰ dk`; vanishes for real amplitudes.
pub fn initial_position(init: &MomentumState) -> f64 {
    let grid = init.grid();
    let mut acc = 0.0;
    for amp in init.amplitudes() {
        let da = spectral::derivative(grid, amp, 1);
        acc += amp
            .iter()
            .zip(&da)
            .map(|(a, b)| (a.conj() * Complex64::i() * b).re)
            .sum::<f64>();
    }
    acc * grid.dk()
}

/// `S^τ - S⁰` for a real-valued initial state:
/// `-(Δ⟨x⟩)² - 2⟨x⟩⁰Δ⟨x⟩ + (1/F²) Σ_n ∫ [E_n(k+τ) - E_n(k)]² |φ_n⁰|² dk`.
pub fn variance_shift(init: &MomentumState, bands: &BandStructure, force: f64, tau: f64) -> Result<f64> {
    init.require_real()?;
    let dx = centroid_shift(init, bands, force, tau)?;
    let second = weighted_sum(init, |n| {
        Ok(energy_increments(bands, n, tau)?.into_iter().map(|v| v * v).collect())
    })? / (force * force);
    let x0 = initial_position(init);
    Ok(second - dx * dx - 2.0 * x0 * dx)
}

/// `S⁰ = Σ_n ∫ |∂_k φ_n⁰|² dk` with a spectral derivative.
pub fn initial_spread(init: &MomentumState) -> Result<f64> {
    init.require_real()?;
    let grid = init.grid();
    let mut acc = 0.0;
    for amp in init.amplitudes() {
        let da = spectral::derivative(grid, amp, 1);
        acc += da.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    Ok(acc * grid.dk())
}

/// `d⟨x⟩/dt = (1/ħ) ⟨∂_k E(k + τ)⟩⁰`.
pub fn mean_velocity(init: &MomentumState, bands: &BandStructure, tau: f64, units: &UnitSystem) -> Result<f64> {
    check_compatible(init, bands)?;
    let v = weighted_sum(init, |n| {
        let de = bands.energy_derivative(n, 1)?;
        Ok(spectral::advanced_real(bands.grid(), &de, tau))
    })?;
    Ok(v / units.hbar)
}

/// `d²⟨x⟩/dt² = (F/ħ²) ⟨∂²_k E(k + τ)⟩⁰`.
pub fn mean_acceleration(
    init: &MomentumState,
    bands: &BandStructure,
    force: f64,
    tau: f64,
    units: &UnitSystem,
) -> Result<f64> {
    check_compatible(init, bands)?;
    let a = weighted_sum(init, |n| {
        let d2e = bands.energy_derivative(n, 2)?;
        Ok(spectral::advanced_real(bands.grid(), &d2e, tau))
    })?;
    Ok(force * a / (units.hbar * units.hbar))
}

/// `χ(τ) = max_k [E_n(k) - E_n(k - τ)]`: the grid maximum, refined off-grid
/// by a parabola through the best three samples and Newton polishing on
/// the band interpolant.
pub fn localization_interval(bands: &BandStructure, n: usize, tau: f64) -> Result<f64> {
    let grid = *bands.grid();
    let e = bands.energies(n)?;
    if tau == 0.0 {
        return Ok(0.0);
    }
    let behind = spectral::advanced_real(&grid, e, -tau);
    let g: Vec<f64> = e.iter().zip(&behind).map(|(a, b)| a - b).collect();
    let best = (0..g.len()).fold(0, |b, j| if g[j] > g[b] { j } else { b });
    let series = PeriodicSeries::from_real(grid, &g);
    let chi = refine_extremum(&series, grid.k(best), 1.0, grid.dk());
    Ok(chi.max(0.0))
}

/// One row of an [`ObservableTrace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub tau: f64,
    pub mean_k: f64,
    pub dx: f64,
    #[serde(rename = "dS")]
    pub ds: f64,
    pub sigma: f64,
    pub chi: f64,
}

/// Time series of the observables over a τ-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTrace {
    pub initial_spread: f64,
    pub rows: Vec<TraceRow>,
}

impl ObservableTrace {
    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Evaluates every observable at each `τ` (sorted on output).
pub fn trace(
    init: &MomentumState,
    bands: &BandStructure,
    force: f64,
    tau_grid: &[f64],
    units: &UnitSystem,
) -> Result<ObservableTrace> {
    check_compatible(init, bands)?;
    units.validate()?;
    ensure(init.is_real_valued(), || {
        "trace needs a real-valued initial state for the variance column".into()
    })?;
    let s0 = initial_spread(init)?;
    let k0 = mean_crystal_momentum(init, 0.0);
    let band = init.lowest_occupied_band();
    let propagator = DecoupledPropagator::new(bands, force)?;
    let mut taus = tau_grid.to_vec();
    taus.sort_by(f64::total_cmp);
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let evolved = propagator.evolve(init, tau)?;
            let mean_k = mean_crystal_momentum(&evolved.state, k0 + tau);
            let dx = centroid_shift(init, bands, force, tau)?;
            let ds = variance_shift(init, bands, force, tau)?;
            let chi = localization_interval(bands, band, tau)?;
            Ok(TraceRow {
                tau,
                mean_k,
                dx,
                ds,
                sigma: (s0 + ds).max(0.0).sqrt(),
                chi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ObservableTrace {
        initial_spread: s0,
        rows,
    })
}
