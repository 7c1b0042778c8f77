//! Independent check of the decoupled-band dynamics: a split-step
//! integrator for the full tilted-lattice Schrödinger equation and the
//! projection of position-space packets back onto the Bloch basis.
//!
//! Only band data is shared with the rest of the crate; nothing here goes
//! through the crystal-momentum propagator.

mod split_step;

pub use split_step::{split_step_evolve, OracleRun};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band_structure::BandStructure;
use crate::error::{ensure, Error, Result};
use crate::initial_states::MomentumState;
use crate::position_space::{synthesize_on_grid, PositionWavepacket, XGrid};

/// Box, resolution, step and absorber settings for [`split_step_evolve`].
///
/// The box is `[center - half_length, center + half_length)` sampled with
/// spacing `x_step`; choosing `2·half_length = N_k·d` makes projection onto
/// the band grid an exact discrete transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub half_length: f64,
    pub x_step: f64,
    /// Step in rescaled time `τ`.
    pub dtau: f64,
    pub splitting_order: u32,
    /// Fraction of the box length covered by the ramp at each end.
    pub absorber_width: f64,
    /// Absorption rate at the box edge, per unit physical time.
    pub absorber_strength: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_absorbed_budget")]
    pub absorbed_budget: f64,
    /// When set, the run is repeated with `dtau/2` and the terminal states
    /// must agree to this L2 distance.
    #[serde(default)]
    pub halving_tolerance: Option<f64>,
}

fn default_absorbed_budget() -> f64 {
    1e-6
}

impl OracleConfig {
    /// Box of one k-sum period `N_k·d` at 16 points per cell.
    pub fn for_bands(bands: &BandStructure, dtau: f64) -> Self {
        let d = bands.period();
        Self {
            half_length: 0.5 * bands.grid().len() as f64 * d,
            x_step: d / 16.0,
            dtau,
            splitting_order: 2,
            absorber_width: 0.1,
            absorber_strength: 1.0,
            center: 0.0,
            absorbed_budget: default_absorbed_budget(),
            halving_tolerance: None,
        }
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| -> Result<()> {
            ensure(v > 0.0 && v.is_finite(), || format!("{name} must be positive, got {v}"))
        };
        pos(self.half_length, "half_length")?;
        pos(self.x_step, "x_step")?;
        pos(self.dtau, "dtau")?;
        ensure(self.splitting_order == 2, || {
            format!("only second-order splitting is available, got {}", self.splitting_order)
        })?;
        ensure((0.0..0.5).contains(&self.absorber_width), || {
            format!("absorber_width must lie in [0, 0.5), got {}", self.absorber_width)
        })?;
        ensure(self.absorber_strength >= 0.0, || "absorber_strength must be non-negative".into())?;
        ensure(self.center.is_finite(), || "center must be finite".into())?;
        let cells = 2.0 * self.half_length / self.x_step;
        ensure((cells - cells.round()).abs() < 1e-9 * cells, || {
            format!("x_step {} does not divide the box length {}", self.x_step, 2.0 * self.half_length)
        })?;
        Ok(())
    }

    /// Sample points of the box (right end excluded).
    pub fn x_grid(&self) -> Result<XGrid> {
        self.validate()?;
        let len = (2.0 * self.half_length / self.x_step).round() as usize;
        XGrid::new(self.center - self.half_length, self.x_step, len)
    }
}

/// `ψ⁰(x) = Σ_n ∫ φ_n⁰(k) φ_n(k, x) dk` on `x_grid`.
pub fn synthesize_position_state(
    init: &MomentumState,
    bands: &BandStructure,
    x_grid: &XGrid,
) -> Result<PositionWavepacket> {
    ensure(bands.has_basis(), || "synthesis needs a band structure with u_n coefficients".into())?;
    ensure(init.grid().same_as(bands.grid()), || {
        "state and band structure use different k-grids".into()
    })?;
    synthesize_on_grid(init.amplitudes(), bands, x_grid, 0.0)
}

/// Result of [`project_to_bands`].
#[derive(Debug, Clone)]
pub struct Projection {
    pub state: MomentumState,
    /// `1 - Σ_n ∫|φ_n|² dk` relative to the packet norm: weight outside the
    /// kept bands.
    pub residual: f64,
}

/// `φ_n(k) = ∫ ψ(x) conj(φ_n(k, x)) dx` for bands `1..=n_bands`.
///
/// Fails when the weight left outside the kept bands exceeds `threshold`.
pub fn project_to_bands(
    pkt: &PositionWavepacket,
    bands: &BandStructure,
    n_bands: usize,
    threshold: f64,
) -> Result<Projection> {
    ensure(bands.has_basis(), || "projection needs a band structure with u_n coefficients".into())?;
    let g = pkt.x_grid;
    let amps = bands.project(&pkt.values, &g.points(), g.step, n_bands)?;
    let state = MomentumState::new(*bands.grid(), amps)?;
    let residual = 1.0 - state.norm_sqr() / pkt.norm_sqr();
    if residual > threshold {
        return Err(Error::BandResidual { residual, threshold });
    }
    Ok(Projection { state, residual })
}

/// `|Σ_n ∫ conj(φ_n^a) φ_n^b dk|`; bands missing from one state count as zero.
pub fn fidelity(a: &MomentumState, b: &MomentumState) -> Result<f64> {
    if !a.grid().same_as(b.grid()) {
        return Err(Error::GridMismatch("states live on different k-grids".into()));
    }
    let s: Complex64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| p.conj() * q))
        .sum();
    Ok(s.norm() * a.grid().dk())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_states::{gaussian_state, wannier_state};

    #[test]
    fn fidelity_basics() {
        let s = gaussian_state(0.3, 0.0, 1.0, 64).unwrap();
        assert!((fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-12);
        let w1 = wannier_state(1.0, 64, 1).unwrap();
        let w2 = wannier_state(1.0, 64, 2).unwrap();
        assert_eq!(fidelity(&w1, &w2).unwrap(), 0.0);
        let other = gaussian_state(0.3, 0.0, 1.0, 32).unwrap();
        assert!(matches!(fidelity(&s, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn config_validation() {
        let b = BandStructure::analytic_cosine_band(1.0, 1.0, 64).unwrap();
        let cfg = OracleConfig::for_bands(&b, 0.01);
        let g = cfg.x_grid().unwrap();
        assert_eq!(g.len, 1024);
        assert_eq!(g.start, -32.0);
        let mut bad = cfg;
        bad.splitting_order = 4;
        assert!(bad.validate().is_err());
        bad = cfg;
        bad.x_step = 0.3;
        assert!(bad.validate().is_err());
    }
}
