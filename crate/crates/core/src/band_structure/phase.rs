use super::BandStructure;
use crate::error::{ensure, Result};
use crate::grid::KGrid;
use crate::spectral::PeriodicSeries;

/// Antiderivative `A_n(k)` of `E_n(q) - F·X_nn(q)`, split into a linear ramp
/// `Ē·(k - k_0)` and a spectrally integrated periodic part.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    band: usize,
    force: f64,
    grid: KGrid,
    mean: f64,
    series: PeriodicSeries,
    samples: Vec<f64>,
}

/// Builds the phase table of band `n` for field strength `force`.
pub fn band_antiderivative(bands: &BandStructure, force: f64, n: usize) -> Result<PhaseTable> {
    ensure(force > 0.0 && force.is_finite(), || format!("F must be positive, got {force}"))?;
    ensure(bands.berry_filled(), || {
        "Berry connection not computed; run berry_connection_diag first".into()
    })?;
    let band = bands.band(n)?;
    let integrand: Vec<f64> = band
        .energies
        .iter()
        .zip(&band.berry)
        .map(|(e, x)| e - force * x)
        .collect();
    let grid = *bands.grid();
    let series = PeriodicSeries::from_real(grid, &integrand);
    let mean = series.mean().re;
    let samples = series.antiderivative_samples().into_iter().map(|c| c.re).collect();
    Ok(PhaseTable {
        band: n,
        force,
        grid,
        mean,
        series,
        samples,
    })
}

impl PhaseTable {
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn force(&self) -> f64 {
        self.force
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    /// Zone average `Ē` of the integrand `E_n - F·X_nn`.
    pub fn mean_integrand(&self) -> f64 {
        self.mean
    }

    /// `A_n(k)` for any real `k`.
    pub fn antiderivative(&self, k: f64) -> f64 {
        self.series.eval_antiderivative(k).re
    }

    /// `A_n(k_0 + i·Δk)` for any integer `i`, using the grid samples and the
    /// exact ramp across zones.
    pub fn antiderivative_index(&self, i: i64) -> f64 {
        let n = self.grid.len() as i64;
        let zone = i.div_euclid(n);
        self.samples[i.rem_euclid(n) as usize] + zone as f64 * self.mean * self.grid.zone_width()
    }

    /// `θ_n(k, τ) = -(A_n(k) - A_n(k - τ)) / F`.
    pub fn phase(&self, k: f64, tau: f64) -> f64 {
        if tau == 0.0 {
            return 0.0;
        }
        -(self.antiderivative(k) - self.antiderivative(k - tau)) / self.force
    }

    /// Phase at grid point `j` after `steps` grid spacings of evolution.
    pub fn phase_index(&self, j: usize, steps: i64) -> f64 {
        if steps == 0 {
            return 0.0;
        }
        let j = j as i64;
        -(self.antiderivative_index(j) - self.antiderivative_index(j - steps)) / self.force
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_band_antiderivative() {
        let b = BandStructure::analytic_cosine_band(1.0, 1.0, 256).unwrap();
        let t = band_antiderivative(&b, 0.3, 1).unwrap();
        let a0 = t.antiderivative(0.0);
        for &k in &[-3.0, -1.0, 0.4, 2.9, 9.0] {
            assert!((t.antiderivative(k) - a0 - (k / 2.0 - k.sin() / 2.0)).abs() < 1e-13);
        }
        assert!((t.mean_integrand() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ramp_is_exact_across_zones() {
        let b = BandStructure::analytic_cosine_band(1.3, 1.0, 64).unwrap();
        let t = band_antiderivative(&b, 0.1, 1).unwrap();
        for i in [-130_i64, -64, -1, 0, 5, 63, 64, 200] {
            let step = t.antiderivative_index(i + 64) - t.antiderivative_index(i);
            assert!((step - t.mean_integrand() * 2.0 * PI).abs() < 1e-12);
            let via_series = t.antiderivative(t.grid().k_min() + i as f64 * t.grid().dk());
            assert!((via_series - t.antiderivative_index(i)).abs() < 1e-11);
        }
    }

    #[test]
    fn constant_band() {
        let mut b = BandStructure::analytic_cosine_band(1.0, 1.0, 32).unwrap();
        b.bands[0].energies = vec![2.5; 32];
        let t = band_antiderivative(&b, 1.0, 1).unwrap();
        let a0 = t.antiderivative(0.0);
        assert!((t.antiderivative(1.7) - a0 - 2.5 * 1.7).abs() < 1e-13);
    }
}
