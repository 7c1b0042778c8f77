use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::BandStructure;
use crate::error::{ensure, Error, Result};

/// Harmonics whose coefficients never exceed this fraction of the largest
/// one are skipped in sums over the plane-wave index.
const HARMONIC_CUTOFF: f64 = 1e-18;

impl BandStructure {
    fn reciprocal(&self) -> f64 {
        2.0 * PI / self.period()
    }

    /// Range `-m_eff..=m_eff` of harmonics carrying weight in `vectors`.
    fn effective_harmonics<'a>(&self, vectors: impl Iterator<Item = &'a Vec<Complex64>>) -> usize {
        let m_cut = self.m_cut.unwrap_or(0);
        let mut peak = vec![0.0_f64; 2 * m_cut + 1];
        for v in vectors {
            for (p, c) in peak.iter_mut().zip(v) {
                *p = p.max(c.norm());
            }
        }
        let top = peak.iter().cloned().fold(0.0, f64::max);
        (0..=m_cut)
            .rev()
            .find(|&m| peak[m_cut + m] > HARMONIC_CUTOFF * top || peak[m_cut - m] > HARMONIC_CUTOFF * top)
            .unwrap_or(0)
    }

    /// Cell-periodic part `u_n(k_j, x)`, normalized over one cell.
    pub fn eval_cell_periodic(&self, n: usize, j: usize, x: f64) -> Result<Complex64> {
        let coeffs = self.band_coeffs(n)?;
        ensure(j < self.grid.len(), || format!("k index {j} out of range"))?;
        let m_cut = self.m_cut.unwrap_or(0) as i64;
        let g = self.reciprocal();
        let sum: Complex64 = coeffs[j]
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, g * (i as i64 - m_cut) as f64 * x))
            .sum();
        Ok(sum / self.period().sqrt())
    }

    /// Bloch function `φ_n(k_j, x) = (d/2π)^{1/2} exp(i k_j x) u_n(k_j, x)`.
    pub fn eval_bloch(&self, n: usize, j: usize, x: f64) -> Result<Complex64> {
        let u = self.eval_cell_periodic(n, j, x)?;
        let k = self.grid.k(j);
        Ok(u * Complex64::from_polar((self.period() / (2.0 * PI)).sqrt(), k * x))
    }

    /// Bloch function at a crystal momentum on the grid (wrapped first).
    pub fn eval_bloch_at(&self, n: usize, k: f64, x: f64) -> Result<Complex64> {
        let j = self.grid.index_of(k).ok_or_else(|| {
            Error::InvalidParameter(format!("k = {k} is not on the band grid"))
        })?;
        // φ is periodic in k, so the wrapped index represents k exactly
        self.eval_bloch(n, j, x)
    }

    /// `ψ(x) = Σ_n Σ_j Δk · a_n(k_j) φ_n(k_j, x)` at every `x` in `xs`;
    /// `amplitudes[n-1]` holds band `n` (missing bands count as zero).
    pub fn synthesize(&self, amplitudes: &[Vec<Complex64>], xs: &[f64]) -> Result<Vec<Complex64>> {
        ensure(amplitudes.len() <= self.n_bands(), || {
            format!(
                "state has {} bands but the band structure only {}",
                amplitudes.len(),
                self.n_bands()
            )
        })?;
        let nk = self.grid.len();
        let m_cut = self.m_cut.unwrap_or(0);
        let dim = 2 * m_cut + 1;
        // b_{j,m} = Σ_n a_{n,j} c^{(n)}_{j,m}
        let mut combined = vec![vec![Complex64::new(0.0, 0.0); dim]; nk];
        for (idx, amp) in amplitudes.iter().enumerate() {
            ensure(amp.len() == nk, || "amplitude length differs from the k-grid".into())?;
            if amp.iter().all(|a| a.norm() == 0.0) {
                continue;
            }
            let coeffs = self.band_coeffs(idx + 1)?;
            for j in 0..nk {
                for (b, c) in combined[j].iter_mut().zip(&coeffs[j]) {
                    *b += amp[j] * c;
                }
            }
        }
        let m_eff = self.effective_harmonics(combined.iter());
        let g = self.reciprocal();
        let dk = self.grid.dk();
        let k0 = self.grid.k_min();
        let pref = dk / (2.0 * PI).sqrt();
        let values = xs
            .par_iter()
            .map(|&x| {
                let harm = harmonic_phases(g * x, m_eff);
                let step = Complex64::from_polar(1.0, dk * x);
                let mut ek = Complex64::from_polar(1.0, k0 * x);
                let mut acc = Complex64::new(0.0, 0.0);
                for b in &combined {
                    let inner: Complex64 = b[m_cut - m_eff..=m_cut + m_eff]
                        .iter()
                        .zip(&harm)
                        .map(|(c, h)| c * h)
                        .sum();
                    acc += ek * inner;
                    ek *= step;
                }
                acc * pref
            })
            .collect();
        Ok(values)
    }

    /// Rectangle-rule projection `a_n(k_j) = Σ_x ψ(x) conj(φ_n(k_j, x)) dx`
    /// onto the first `n_bands` bands.
    pub fn project(&self, psi: &[Complex64], xs: &[f64], dx: f64, n_bands: usize) -> Result<Vec<Vec<Complex64>>> {
        ensure(psi.len() == xs.len(), || "psi and x-grid lengths differ".into())?;
        ensure(n_bands >= 1 && n_bands <= self.n_bands(), || {
            format!("cannot project onto {n_bands} bands")
        })?;
        let coeffs: Vec<&[Vec<Complex64>]> = (1..=n_bands).map(|n| self.band_coeffs(n)).collect::<Result<_>>()?;
        let m_cut = self.m_cut.unwrap_or(0);
        let m_eff = self.effective_harmonics(coeffs.iter().flat_map(|c| c.iter()));
        let g = self.reciprocal();
        let width = 2 * m_eff + 1;
        // ψ(x)·exp(-iG_m x) for every x and harmonic
        let weighted: Vec<Complex64> = xs
            .par_iter()
            .zip(psi)
            .flat_map_iter(|(&x, &p)| harmonic_phases(-g * x, m_eff).into_iter().map(move |h| p * h))
            .collect();
        let grid = self.grid;
        let pref = dx / (2.0 * PI).sqrt();
        let per_k: Vec<Vec<Complex64>> = (0..grid.len())
            .into_par_iter()
            .map(|j| {
                let k = grid.k(j);
                let mut sums = vec![Complex64::new(0.0, 0.0); width];
                for (i, &x) in xs.iter().enumerate() {
                    let e = Complex64::from_polar(1.0, -k * x);
                    let row = &weighted[i * width..(i + 1) * width];
                    sums.iter_mut().zip(row).for_each(|(s, w)| *s += e * w);
                }
                (0..n_bands)
                    .map(|n| {
                        let c = &coeffs[n][j][m_cut - m_eff..=m_cut + m_eff];
                        c.iter().zip(&sums).map(|(c, s)| c.conj() * s).sum::<Complex64>() * pref
                    })
                    .collect()
            })
            .collect();
        Ok((0..n_bands)
            .map(|n| per_k.iter().map(|row| row[n]).collect())
            .collect())
    }
}

/// `exp(i·m·θ)` for `m = -m_eff..=m_eff`.
fn harmonic_phases(theta: f64, m_eff: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0); 2 * m_eff + 1];
    let w = Complex64::from_polar(1.0, theta);
    for m in 1..=m_eff {
        out[m_eff + m] = out[m_eff + m - 1] * w;
        out[m_eff - m] = out[m_eff - m + 1] * w.conj();
    }
    out
}
