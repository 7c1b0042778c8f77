//! Initial crystal-momentum distributions: flat Wannier amplitude, the
//! periodized Gaussian, and its narrow near-Bloch limit.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{ensure, Error, Result};
use crate::grid::KGrid;

/// How a [`MomentumState`] was built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKind {
    Wannier,
    Gaussian {
        rho: f64,
        k0: f64,
        /// Closed-form constant `[√π ρ erf(π/(ρd))]^{-1/2}`.
        closed_form_constant: f64,
        /// Constant actually used after periodization and renormalization.
        constant: f64,
    },
    /// Narrow Gaussian standing in for a pure Bloch state; results carry an
    /// error of order `width²` relative to the exact limit.
    NearBloch { k0: f64, width: f64 },
    Custom,
}

/// Per-band amplitudes `φ_n(k)` on a zone grid; `amplitudes[n-1]` is band `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumState {
    grid: KGrid,
    amplitudes: Vec<Vec<Complex64>>,
    kind: StateKind,
}

/// Tolerance on `max |Im φ|` for a state to count as real-valued.
pub const REAL_TOLERANCE: f64 = 1e-12;

impl MomentumState {
    pub fn new(grid: KGrid, amplitudes: Vec<Vec<Complex64>>) -> Result<Self> {
        ensure(!amplitudes.is_empty(), || "state needs at least one band".into())?;
        for a in &amplitudes {
            ensure(a.len() == grid.len(), || {
                format!("amplitude length {} differs from N_k = {}", a.len(), grid.len())
            })?;
        }
        Ok(Self {
            grid,
            amplitudes,
            kind: StateKind::Custom,
        })
    }

    pub(crate) fn with_kind(mut self, kind: StateKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    pub fn n_bands(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Vec<Complex64>] {
        &self.amplitudes
    }

    /// Band `n` (1-based).
    pub fn band(&self, n: usize) -> Option<&[Complex64]> {
        n.checked_sub(1).and_then(|i| self.amplitudes.get(i)).map(|v| v.as_slice())
    }

    /// `Σ_n ∫ |φ_n|² dk` by the rectangle rule.
    pub fn norm_sqr(&self) -> f64 {
        let dk = self.grid.dk();
        self.amplitudes
            .iter()
            .flat_map(|a| a.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            * dk
    }

    pub fn max_imag(&self) -> f64 {
        self.amplitudes
            .iter()
            .flat_map(|a| a.iter())
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_real_valued(&self) -> bool {
        self.max_imag() < REAL_TOLERANCE
    }

    pub fn require_real(&self) -> Result<()> {
        let max_imag = self.max_imag();
        if max_imag < REAL_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NotRealValued { max_imag })
        }
    }

    /// Lowest band carrying weight.
    pub fn lowest_occupied_band(&self) -> usize {
        self.amplitudes
            .iter()
            .position(|a| a.iter().any(|c| c.norm() > 0.0))
            .map(|i| i + 1)
            .unwrap_or(1)
    }

    /// Probability density `Σ_n |φ_n(k_j)|²` per grid point.
    pub fn density(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.grid.len()];
        for a in &self.amplitudes {
            for (wj, c) in w.iter_mut().zip(a) {
                *wj += c.norm_sqr();
            }
        }
        w
    }
}

fn single_band(grid: KGrid, band: usize, values: Vec<Complex64>) -> Result<MomentumState> {
    ensure(band >= 1, || "band index starts at 1".into())?;
    let mut amps = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; band];
    amps[band - 1] = values;
    MomentumState::new(grid, amps)
}

/// Flat amplitude `√(d/2π)` on band `n`: a state localized on one cell.
pub fn wannier_state(d: f64, n_k: usize, band: usize) -> Result<MomentumState> {
    let grid = KGrid::new(d, n_k)?;
    let a = Complex64::new((d / (2.0 * PI)).sqrt(), 0.0);
    Ok(single_band(grid, band, vec![a; n_k])?.with_kind(StateKind::Wannier))
}

/// `[√π ρ erf(π/(ρd))]^{-1/2}`, the normalization of `exp(-k²/2ρ²)` over
/// the symmetric zone without periodization.
pub fn gaussian_normalization(rho: f64, d: f64) -> f64 {
    (PI.sqrt() * rho * erf(PI / (rho * d))).powf(-0.5)
}

/// Periodized Gaussian `c·Σ_p exp(-(k - k0 - p·2π/d)²/2ρ²)` on band 1,
/// renormalized so the grid norm is exactly one.
pub fn gaussian_state(rho: f64, k0: f64, d: f64, n_k: usize) -> Result<MomentumState> {
    gaussian_state_on_band(rho, k0, d, n_k, 1)
}

pub fn gaussian_state_on_band(rho: f64, k0: f64, d: f64, n_k: usize, band: usize) -> Result<MomentumState> {
    ensure(rho > 0.0 && rho.is_finite(), || format!("rho must be positive, got {rho}"))?;
    let grid = KGrid::new(d, n_k)?;
    let c = gaussian_normalization(rho, d);
    let g = grid.zone_width();
    let center = grid.wrap(k0);
    let profile = |k: f64| (-(k * k) / (2.0 * rho * rho)).exp();
    let mut values: Vec<f64> = grid.points().iter().map(|&k| c * profile(k - center)).collect();
    // add images until the added tail is negligible
    let mut p = 1;
    loop {
        let mut added = 0.0_f64;
        for (v, &k) in values.iter_mut().zip(grid.points().iter()) {
            let t = c * (profile(k - center - p as f64 * g) + profile(k - center + p as f64 * g));
            *v += t;
            added = added.max(t);
        }
        if added < 1e-16 || p > 10_000 {
            break;
        }
        p += 1;
    }
    let norm = (values.iter().map(|v| v * v).sum::<f64>() * grid.dk()).sqrt();
    let scale = 1.0 / norm;
    let amps = values.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
    Ok(single_band(grid, band, amps)?.with_kind(StateKind::Gaussian {
        rho,
        k0,
        closed_form_constant: c,
        constant: c * scale,
    }))
}

/// Narrow Gaussian of the given width approximating a pure Bloch state at `k0`.
pub fn near_bloch_state(k0: f64, width: f64, d: f64, n_k: usize) -> Result<MomentumState> {
    let grid = KGrid::new(d, n_k)?;
    ensure(width >= 2.0 * grid.dk() * (1.0 - 1e-12), || {
        format!(
            "width {width} is below the resolvable minimum of two grid spacings ({})",
            2.0 * grid.dk()
        )
    })?;
    let s = gaussian_state(width, k0, d, n_k)?;
    Ok(s.with_kind(StateKind::NearBloch { k0, width }))
}
