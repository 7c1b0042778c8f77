//! Decoupled-band evolution in the crystal-momentum representation.
//!
//! Each band evolves in closed form,
//!
//! ```text
//! φ_n(k, τ) = exp(iθ_n(k, τ)) φ_n⁰(k - τ),
//! θ_n(k, τ) = -(1/F) ∫_{k-τ}^{k} [E_n(q) - F X_nn(q)] dq,
//! ```
//!
//! so there is no time stepping: a translation of the samples by `τ`
//! followed by a pointwise phase.

use num_complex::Complex64;

use crate::band_structure::{band_antiderivative, BandStructure, PhaseTable};
use crate::error::{ensure, Result};
use crate::initial_states::MomentumState;
use crate::spectral;

/// How the translation `k -> k - τ` is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftMode {
    /// `τ` must be a multiple of `Δk`; translation is an index rotation.
    #[default]
    Exact,
    /// Arbitrary `τ` via the band-limited interpolant of the samples.
    Interpolated,
}

#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub state: MomentumState,
    pub tau: f64,
    pub force: f64,
}

/// Phase tables for every band of a structure at one field strength.
#[derive(Debug, Clone)]
pub struct DecoupledPropagator {
    tables: Vec<PhaseTable>,
    force: f64,
    mode: ShiftMode,
}

impl DecoupledPropagator {
    pub fn new(bands: &BandStructure, force: f64) -> Result<Self> {
        let tables = (1..=bands.n_bands())
            .map(|n| band_antiderivative(bands, force, n))
            .collect::<Result<_>>()?;
        Ok(Self {
            tables,
            force,
            mode: ShiftMode::Exact,
        })
    }

    pub fn with_mode(mut self, mode: ShiftMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn table(&self, n: usize) -> Option<&PhaseTable> {
        n.checked_sub(1).and_then(|i| self.tables.get(i))
    }

    pub fn force(&self) -> f64 {
        self.force
    }

    /// Evolves `init` to time `tau`.
    pub fn evolve(&self, init: &MomentumState, tau: f64) -> Result<EvolvedState> {
        let grid = *init.grid();
        ensure(init.n_bands() <= self.tables.len(), || {
            format!(
                "state occupies {} bands, propagator has {}",
                init.n_bands(),
                self.tables.len()
            )
        })?;
        ensure(grid.same_as(self.tables[0].grid()), || {
            "state and band structure use different k-grids".into()
        })?;
        if tau == 0.0 {
            return Ok(EvolvedState {
                state: init.clone(),
                tau,
                force: self.force,
            });
        }
        let n = grid.len();
        let steps = match self.mode {
            ShiftMode::Exact => Some(grid.steps_or_err(tau)?),
            ShiftMode::Interpolated => grid.steps_for(tau),
        };
        let amps: Vec<Vec<Complex64>> = init
            .amplitudes()
            .iter()
            .zip(&self.tables)
            .map(|(a, table)| match steps {
                Some(s) => (0..n)
                    .map(|j| {
                        let src = a[grid.wrap_index(j as i64 - s)];
                        src * Complex64::from_polar(1.0, table.phase_index(j, s))
                    })
                    .collect(),
                None => {
                    let shifted = spectral::shift(&grid, a, tau);
                    shifted
                        .into_iter()
                        .enumerate()
                        .map(|(j, v)| v * Complex64::from_polar(1.0, table.phase(grid.k(j), tau)))
                        .collect()
                }
            })
            .collect();
        Ok(EvolvedState {
            state: MomentumState::new(grid, amps)?,
            tau,
            force: self.force,
        })
    }
}

/// One-shot evolution; builds the phase tables on every call.
pub fn evolve_decoupled(init: &MomentumState, bands: &BandStructure, force: f64, tau: f64) -> Result<EvolvedState> {
    DecoupledPropagator::new(bands, force)?.evolve(init, tau)
}

/// `θ_n(k, τ)` from a phase table.
pub fn phase_factor(table: &PhaseTable, k: f64, tau: f64) -> f64 {
    table.phase(k, tau)
}

/// `Σ_n ∫ k̃ |φ_n(k)|² dk` with `k̃` the representative of `k` in
/// `[c - π/d, c + π/d)`; a sample sitting exactly on the branch cut counts
/// half at each end, i.e. contributes `c`.
pub fn mean_crystal_momentum(state: &MomentumState, branch_center: f64) -> f64 {
    let grid = state.grid();
    let w = grid.zone_width();
    let lo = branch_center - 0.5 * w;
    let cut_tol = 1e-9 * grid.dk();
    let density = state.density();
    let mut acc = 0.0;
    for (j, &rho) in density.iter().enumerate() {
        if rho == 0.0 {
            continue;
        }
        let offset = (grid.k(j) - lo).rem_euclid(w);
        let rep = if offset < cut_tol || w - offset < cut_tol {
            branch_center
        } else {
            lo + offset
        };
        acc += rep * rho;
    }
    acc * grid.dk()
}
