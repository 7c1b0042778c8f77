//! Position-space wave-packets: reconstruction from crystal-momentum
//! amplitudes, direct moments on the x-grid, and localization masses.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band_structure::BandStructure;
use crate::error::{ensure, Error, Result};
use crate::initial_states::MomentumState;
use crate::momentum_dynamics::DecoupledPropagator;

/// Uniform real-space grid `x_i = start + i·step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl XGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        ensure(step > 0.0 && step.is_finite(), || format!("x step must be positive, got {step}"))?;
        ensure(len >= 2, || "x-grid needs at least two points".into())?;
        ensure(start.is_finite(), || "x-grid start must be finite".into())?;
        Ok(Self { start, step, len })
    }

    /// Grid over `[center - half_extent, center + half_extent]` whose step
    /// divides the extent (rounded up to an integer count).
    pub fn centered(center: f64, half_extent: f64, step: f64) -> Result<Self> {
        ensure(half_extent > 0.0, || format!("extent must be positive, got {half_extent}"))?;
        let cells = (2.0 * half_extent / step - 1e-9).ceil() as usize;
        Self::new(center - 0.5 * cells as f64 * step, step, cells + 1)
    }

    /// Spacing `d/16` and extent `±(Δ/F + 20d)`.
    pub fn default_for(width: f64, force: f64, d: f64) -> Result<Self> {
        ensure(force > 0.0, || format!("F must be positive, got {force}"))?;
        Self::centered(0.0, width / force + 20.0 * d, d / 16.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.x(self.len - 1)
    }

    /// Length covered by the samples as a periodic box (`len·step`).
    pub fn span(&self) -> f64 {
        self.len as f64 * self.step
    }

    pub fn same_as(&self, other: &XGrid) -> bool {
        self.len == other.len
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.start - other.start).abs() <= 1e-9 * self.step
    }
}

/// Samples `ψ(x)` on an [`XGrid`] at rescaled time `tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionWavepacket {
    pub x_grid: XGrid,
    pub values: Vec<Complex64>,
    pub tau: f64,
}

impl PositionWavepacket {
    pub fn new(x_grid: XGrid, values: Vec<Complex64>, tau: f64) -> Result<Self> {
        ensure(values.len() == x_grid.len, || {
            format!("{} samples for an x-grid of {}", values.len(), x_grid.len)
        })?;
        Ok(Self { x_grid, values, tau })
    }

    /// `∫|ψ|² dx` by the rectangle rule.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.x_grid.step
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `max(|ψ|² at the two ends) / max |ψ|²`.
    pub fn edge_ratio(&self) -> f64 {
        let rho = self.density();
        let peak = rho.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        rho[0].max(rho[rho.len() - 1]) / peak
    }
}

/// Maximum tolerated edge density relative to the peak for direct moments.
pub const EDGE_TOLERANCE: f64 = 1e-8;

/// Rectangle-rule moments of a packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub mean: f64,
    /// `⟨x²⟩ - ⟨x⟩²`.
    pub variance: f64,
}

/// `ψ(x, τ) = Σ_n ∫ φ_n⁰(k - τ) e^{iθ_n(k,τ)} φ_n(k, x) dk` on `x_grid`.
///
/// The k-sum is periodic in `x` with period `N_k·d`, so the grid must fit
/// inside one such period. A grid narrower than the breathing excursion
/// `max_n Δ_n/F + 10d` only logs a warning with the mass deficit.
pub fn reconstruct(
    init: &MomentumState,
    bands: &BandStructure,
    force: f64,
    tau: f64,
    x_grid: &XGrid,
) -> Result<PositionWavepacket> {
    ensure(bands.has_basis(), || "reconstruction needs a band structure with u_n coefficients".into())?;
    let evolved = DecoupledPropagator::new(bands, force)?.evolve(init, tau)?;
    let pkt = synthesize_on_grid(evolved.state.amplitudes(), bands, x_grid, tau)?;

    let d = bands.period();
    let mut reach = 0.0_f64;
    for n in 1..=init.n_bands() {
        if init.band(n).is_some_and(|a| a.iter().any(|c| c.norm() > 0.0)) {
            reach = reach.max(bands.width(n)? / force);
        }
    }
    let needed = reach + 10.0 * d;
    if x_grid.start > -needed || x_grid.end() < needed {
        let deficit = 1.0 - pkt.norm_sqr() / init.norm_sqr();
        log::warn!(
            "x-grid [{:.3}, {:.3}] is narrower than ±{needed:.3}; mass deficit {deficit:.3e}",
            x_grid.start,
            x_grid.end()
        );
    }
    Ok(pkt)
}

/// Synthesis of arbitrary per-band amplitudes; the x-grid must fit in one
/// period `N_k·d` of the k-sum.
pub fn synthesize_on_grid(
    amplitudes: &[Vec<Complex64>],
    bands: &BandStructure,
    x_grid: &XGrid,
    tau: f64,
) -> Result<PositionWavepacket> {
    let period = bands.grid().len() as f64 * bands.period();
    ensure(x_grid.span() <= period * (1.0 + 1e-12), || {
        format!(
            "x-grid spans {:.4}, more than the k-sum period N_k·d = {period:.4}; the packet would alias",
            x_grid.span()
        )
    })?;
    let values = bands.synthesize(amplitudes, &x_grid.points())?;
    PositionWavepacket::new(*x_grid, values, tau)
}

/// Norm, mean and variance of `|ψ|²` on the grid.
pub fn direct_moments(pkt: &PositionWavepacket) -> Result<Moments> {
    let ratio = pkt.edge_ratio();
    if ratio > EDGE_TOLERANCE {
        return Err(Error::EdgeMass { ratio });
    }
    let dx = pkt.x_grid.step;
    let rho = pkt.density();
    let norm = rho.iter().sum::<f64>() * dx;
    ensure(norm > 0.0, || "packet has zero norm".into())?;
    // moments about the grid center keep the sums well conditioned
    let c = 0.5 * (pkt.x_grid.start + pkt.x_grid.end());
    let (mut m1, mut m2) = (0.0, 0.0);
    for (i, r) in rho.iter().enumerate() {
        let y = pkt.x_grid.x(i) - c;
        m1 += y * r;
        m2 += y * y * r;
    }
    let mean = m1 * dx / norm;
    let variance = m2 * dx / norm - mean * mean;
    Ok(Moments {
        norm,
        mean: mean + c,
        variance,
    })
}

/// `∫_lo^hi |ψ|² dx` over grid points inside the closed interval.
pub fn mass_within(pkt: &PositionWavepacket, interval: (f64, f64)) -> Result<f64> {
    let (lo, hi) = interval;
    let g = pkt.x_grid;
    let slack = 1e-9 * g.step;
    if lo < g.start - slack || hi > g.end() + slack {
        return Err(Error::IntervalOutsideGrid {
            lo,
            hi,
            grid_lo: g.start,
            grid_hi: g.end(),
        });
    }
    if hi <= lo {
        return Ok(0.0);
    }
    let mass = pkt
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let x = g.x(*i);
            x >= lo - slack && x <= hi + slack
        })
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>();
    Ok(mass * g.step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_packet(center: f64, width: f64) -> PositionWavepacket {
        let g = XGrid::centered(0.0, 40.0, 0.05).unwrap();
        let a = (2.0 * std::f64::consts::PI * width * width).powf(-0.25);
        let v = g
            .points()
            .iter()
            .map(|&x| Complex64::new(a * (-(x - center).powi(2) / (4.0 * width * width)).exp(), 0.0))
            .collect();
        PositionWavepacket::new(g, v, 0.0).unwrap()
    }

    #[test]
    fn centered_grid_layout() {
        let g = XGrid::centered(1.0, 2.0, 0.5).unwrap();
        assert_eq!(g.len, 9);
        assert_eq!(g.start, -1.0);
        assert_eq!(g.end(), 3.0);
        assert!(XGrid::new(0.0, -1.0, 4).is_err());
    }

    #[test]
    fn default_grid_extent() {
        let g = XGrid::default_for(1.0, 0.05, 1.0).unwrap();
        assert_eq!(g.step, 1.0 / 16.0);
        assert!(g.start <= -40.0 && g.end() >= 40.0);
    }

    #[test]
    fn gaussian_moments() {
        let p = gaussian_packet(3.0, 1.5);
        let m = direct_moments(&p).unwrap();
        assert!((m.norm - 1.0).abs() < 1e-12);
        assert!((m.mean - 3.0).abs() < 1e-12);
        assert!((m.variance - 2.25).abs() < 1e-10);
    }

    #[test]
    fn symmetric_packet_is_centered() {
        let m = direct_moments(&gaussian_packet(0.0, 2.0)).unwrap();
        assert!(m.mean.abs() < 1e-14);
    }

    #[test]
    fn edge_mass_rejected() {
        let p = gaussian_packet(35.0, 3.0);
        assert!(matches!(direct_moments(&p), Err(Error::EdgeMass { .. })));
    }

    #[test]
    fn mass_within_cases() {
        let p = gaussian_packet(0.0, 1.0);
        let g = p.x_grid;
        assert!((mass_within(&p, (g.start, g.end())).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mass_within(&p, (1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(mass_within(&p, (2.0, 1.0)).unwrap(), 0.0);
        // one standard deviation each side
        let one_sigma = mass_within(&p, (-1.0, 1.0)).unwrap();
        assert!((one_sigma - 0.6827).abs() < 2e-2);
        assert!(mass_within(&p, (-50.0, 0.0)).is_err());
    }
}
