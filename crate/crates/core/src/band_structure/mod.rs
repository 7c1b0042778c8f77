//! Band functions, cell-periodic Bloch parts and the diagonal Berry
//! connection of a one-dimensional periodic potential.
//!
//! Bands are indexed from 1, lowest energy first. Cell-periodic parts are
//! stored as plane-wave coefficient vectors `c_m(k)`, `m = -M..=M`, with
//!
//! ```text
//! u_n(k, x) = d^{-1/2} Σ_m c_m(k) exp(2πi m x / d),    ∫_cell |u_n|² dx = 1
//! φ_n(k, x) = (d/2π)^{1/2} exp(ikx) u_n(k, x)
//! ```
//!
//! so that `∫ conj(φ_m(k', x)) φ_n(k, x) dx = δ_mn δ(k - k')` and the
//! expansion `ψ = Σ_n ∫ φ_n(k) φ_n(k, ·) dk` is norm preserving.

mod basis;
pub mod berry;
mod gauge;
mod phase;
mod potential;
mod solver;

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

pub use berry::berry_connection_diag;
pub use phase::{band_antiderivative, PhaseTable};
pub use potential::{CrystalPotential, FieldParams, UnitSystem};
pub use solver::{solve_bands, BandSolver};

use crate::error::{ensure, Error, Result};
use crate::grid::KGrid;
use crate::spectral::{self, PeriodicSeries};

/// Samples of one band on the k-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub(crate) energies: Vec<f64>,
    pub(crate) berry: Vec<f64>,
    pub(crate) berry_reliable: Vec<bool>,
    /// Plane-wave coefficients of `u_n(k_j, ·)`, one vector per grid point.
    pub(crate) coeffs: Option<Vec<Vec<Complex64>>>,
    /// Whether the stored gauge satisfies `u(k + 2π/d) = exp(-2πix/d) u(k)`
    /// smoothly across the zone edge.
    pub(crate) periodic_gauge: bool,
}

impl Band {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn berry(&self) -> &[f64] {
        &self.berry
    }

    pub fn berry_reliable(&self) -> &[bool] {
        &self.berry_reliable
    }

    pub fn coeffs(&self) -> Option<&[Vec<Complex64>]> {
        self.coeffs.as_deref()
    }

    pub fn periodic_gauge(&self) -> bool {
        self.periodic_gauge
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub(crate) grid: KGrid,
    pub(crate) m_cut: Option<usize>,
    pub(crate) bands: Vec<Band>,
    pub(crate) berry_filled: bool,
    #[serde(default)]
    pub(crate) warnings: Vec<String>,
}

impl BandStructure {
    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    pub fn period(&self) -> f64 {
        self.grid.period()
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn m_cut(&self) -> Option<usize> {
        self.m_cut
    }

    pub fn has_basis(&self) -> bool {
        self.bands.iter().all(|b| b.coeffs.is_some())
    }

    pub fn berry_filled(&self) -> bool {
        self.berry_filled
    }

    /// Diagnostics collected while solving (cutoff sensitivity, gauge issues).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Band `n`, counted from 1.
    pub fn band(&self, n: usize) -> Result<&Band> {
        ensure(n >= 1 && n <= self.bands.len(), || {
            format!("band index {n} outside 1..={}", self.bands.len())
        })?;
        Ok(&self.bands[n - 1])
    }

    pub fn energies(&self, n: usize) -> Result<&[f64]> {
        Ok(self.band(n)?.energies())
    }

    pub fn berry(&self, n: usize) -> Result<&[f64]> {
        Ok(self.band(n)?.berry())
    }

    pub(crate) fn band_coeffs(&self, n: usize) -> Result<&[Vec<Complex64>]> {
        self.band(n)?
            .coeffs
            .as_deref()
            .ok_or(Error::MissingBasis { band: n })
    }

    /// Band energy at arbitrary `k` from the trigonometric interpolant.
    pub fn energy_at(&self, n: usize, k: f64) -> Result<f64> {
        Ok(self.energy_series(n)?.eval(k).re)
    }

    pub fn energy_series(&self, n: usize) -> Result<PeriodicSeries> {
        Ok(PeriodicSeries::from_real(self.grid, self.energies(n)?))
    }

    /// Spectral `order`-th derivative of `E_n` on the grid.
    pub fn energy_derivative(&self, n: usize, order: u32) -> Result<Vec<f64>> {
        Ok(spectral::derivative_real(&self.grid, self.energies(n)?, order))
    }

    /// Width `max E_n - min E_n`, refined off-grid on the interpolant.
    pub fn width(&self, n: usize) -> Result<f64> {
        let series = self.energy_series(n)?;
        let e = self.energies(n)?;
        let (imax, imin) = argmax_argmin(e);
        let hi = refine_extremum(&series, self.grid.k(imax), 1.0, self.grid.dk());
        let lo = refine_extremum(&series, self.grid.k(imin), -1.0, self.grid.dk());
        Ok(hi - lo)
    }

    /// `min E_{n+1} - max E_n` on the grid; negative when bands overlap.
    pub fn gap_above(&self, n: usize) -> Result<f64> {
        let lo = self.energies(n)?.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let hi = self.energies(n + 1)?.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(hi - lo)
    }

    /// Array lengths agree with the grid and cutoff; used on loaded data.
    pub(crate) fn check_consistency(&self) -> Result<()> {
        KGrid::new(self.grid.period(), self.grid.len())?;
        let n = self.grid.len();
        ensure(!self.bands.is_empty(), || "band structure has no bands".into())?;
        for (i, b) in self.bands.iter().enumerate() {
            ensure(
                b.energies.len() == n && b.berry.len() == n && b.berry_reliable.len() == n,
                || format!("band {} arrays do not match N_k = {n}", i + 1),
            )?;
            if let Some(c) = &b.coeffs {
                let dim = 2 * self.m_cut.unwrap_or(0) + 1;
                ensure(self.m_cut.is_some() && c.len() == n && c.iter().all(|v| v.len() == dim), || {
                    format!("band {} coefficient matrix does not match the grid and cutoff", i + 1)
                })?;
            }
        }
        Ok(())
    }

    /// Applies the k-dependent phase change `u_n(k) -> exp(iχ(k)) u_n(k)`.
    ///
    /// `gauge` returns `(χ(k), χ'(k))`; χ must be periodic over the zone.
    /// The Berry connection transforms exactly as `X -> X - χ'`.
    pub fn regauged(&self, n: usize, gauge: impl Fn(f64) -> (f64, f64)) -> Result<BandStructure> {
        let mut out = self.clone();
        let grid = self.grid;
        let band = &mut out.bands[n - 1];
        let coeffs = band.coeffs.as_mut().ok_or(Error::MissingBasis { band: n })?;
        for (j, c) in coeffs.iter_mut().enumerate() {
            let (chi, dchi) = gauge(grid.k(j));
            let ph = Complex64::from_polar(1.0, chi);
            c.iter_mut().for_each(|v| *v *= ph);
            band.berry[j] -= dchi;
        }
        Ok(out)
    }

    /// Single cosine band `E(k) = Δ/2 · (1 - cos(kd))` with `X ≡ 0` and no
    /// cell-periodic basis.
    pub fn analytic_cosine_band(width: f64, d: f64, n_k: usize) -> Result<Self> {
        ensure(width > 0.0 && width.is_finite(), || {
            format!("band width must be positive, got {width}")
        })?;
        let grid = KGrid::new(d, n_k)?;
        let energies = grid
            .points()
            .iter()
            .map(|&k| 0.5 * width * (1.0 - (k * d).cos()))
            .collect();
        Ok(Self {
            grid,
            m_cut: None,
            bands: vec![Band {
                energies,
                berry: vec![0.0; n_k],
                berry_reliable: vec![true; n_k],
                coeffs: None,
                periodic_gauge: true,
            }],
            berry_filled: true,
            warnings: Vec::new(),
        })
    }
}

fn argmax_argmin(v: &[f64]) -> (usize, usize) {
    let mut imax = 0;
    let mut imin = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[imax] {
            imax = i;
        }
        if x < v[imin] {
            imin = i;
        }
    }
    (imax, imin)
}

/// Polishes a grid extremum of a periodic interpolant: a three-point
/// parabola gives the first estimate, Newton steps on `f'` finish it.
/// `sign` is `+1` for a maximum and `-1` for a minimum.
pub(crate) fn refine_extremum(series: &PeriodicSeries, k_grid: f64, sign: f64, dk: f64) -> f64 {
    let f = |k: f64| series.eval(k).re;
    let (fm, f0, fp) = (f(k_grid - dk), f(k_grid), f(k_grid + dk));
    let denom = fm - 2.0 * f0 + fp;
    let mut k = if denom.abs() > 0.0 && sign * denom < 0.0 {
        let off = 0.5 * (fm - fp) / denom;
        k_grid + off.clamp(-1.0, 1.0) * dk
    } else {
        k_grid
    };
    for _ in 0..20 {
        let d1 = series.eval_derivative(k, 1).re;
        let d2 = series.eval_derivative(k, 2).re;
        if d2 == 0.0 || sign * d2 > 0.0 {
            break;
        }
        let step = d1 / d2;
        if step.abs() > dk {
            break;
        }
        k -= step;
        if step.abs() < 1e-15 * k.abs().max(1.0) {
            break;
        }
    }
    let best = f(k);
    if sign * (best - f0) >= 0.0 {
        best
    } else {
        f0
    }
}
