use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Action scale and kinetic prefactor `ħ²/2m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitSystem {
    pub hbar: f64,
    pub kinetic_coeff: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            kinetic_coeff: 1.0,
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, kinetic_coeff: f64) -> Result<Self> {
        let u = Self { hbar, kinetic_coeff };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.hbar > 0.0 && self.hbar.is_finite(), || {
            format!("hbar must be positive, got {}", self.hbar)
        })?;
        ensure(
            self.kinetic_coeff > 0.0 && self.kinetic_coeff.is_finite(),
            || format!("kinetic_coeff must be positive, got {}", self.kinetic_coeff),
        )
    }
}

/// Field strength and the derived Bloch periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub force: f64,
    /// Dimensionless period in `τ = F t / ħ`, equal to `2π/d`.
    pub tau_b: f64,
    /// Physical period `2πħ/(F d)`.
    pub t_b: f64,
}

impl FieldParams {
    pub fn new(force: f64, d: f64, units: &UnitSystem) -> Result<Self> {
        ensure(force > 0.0 && force.is_finite(), || format!("F must be positive, got {force}"))?;
        ensure(d > 0.0, || format!("period d must be positive, got {d}"))?;
        Ok(Self {
            force,
            tau_b: 2.0 * PI / d,
            t_b: 2.0 * PI * units.hbar / (force * d),
        })
    }

    /// Physical time for a rescaled time `tau`.
    pub fn time_of(&self, tau: f64, units: &UnitSystem) -> f64 {
        tau * units.hbar / self.force
    }
}

/// Real periodic potential `V(x) = Σ_m V̂_m exp(2πi m x / d)`, `|m| ≤ M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalPotential {
    d: f64,
    /// `V̂_m` for `m = -M..=M`.
    coeffs: Vec<Complex64>,
}

impl CrystalPotential {
    pub fn new(d: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        ensure(d > 0.0 && d.is_finite(), || format!("period d must be positive, got {d}"))?;
        ensure(coeffs.len() % 2 == 1, || {
            "Fourier coefficients must cover m = -M..=M (odd length)".to_string()
        })?;
        let m = coeffs.len() / 2;
        let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        for j in 0..=m {
            let (lo, hi) = (coeffs[m - j], coeffs[m + j]);
            ensure((lo - hi.conj()).norm() <= 1e-13 * scale, || {
                format!("potential is not real: V̂_-{j} != conj(V̂_{j})")
            })?;
        }
        Ok(Self { d, coeffs })
    }

    pub fn zero(d: f64) -> Result<Self> {
        Self::new(d, vec![Complex64::new(0.0, 0.0)])
    }

    /// `V(x) = amplitude · cos(2πx/d)`.
    pub fn cosine(d: f64, amplitude: f64) -> Result<Self> {
        let h = Complex64::new(0.5 * amplitude, 0.0);
        Self::new(d, vec![h, Complex64::new(0.0, 0.0), h])
    }

    pub fn period(&self) -> f64 {
        self.d
    }

    pub fn max_harmonic(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `V̂_m`, zero outside the stored range.
    pub fn coeff(&self, m: i64) -> Complex64 {
        let big_m = self.max_harmonic() as i64;
        if m.abs() > big_m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(m + big_m) as usize]
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let big_m = self.max_harmonic() as i64;
        let g = 2.0 * PI / self.d;
        (-big_m..=big_m)
            .map(|m| (self.coeff(m) * Complex64::from_polar(1.0, g * m as f64 * x)).re)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_params_satisfy_period_relation() {
        let units = UnitSystem::new(1.3, 0.7).unwrap();
        let f = FieldParams::new(0.05, 2.0, &units).unwrap();
        assert!((f.t_b * f.force * 2.0 - 2.0 * PI * 1.3).abs() < 1e-12);
        assert!((f.tau_b - PI).abs() < 1e-15);
        assert!((f.time_of(f.tau_b, &units) - f.t_b).abs() < 1e-9);
    }

    #[test]
    fn cosine_potential_values() {
        let p = CrystalPotential::cosine(1.0, 2.0).unwrap();
        assert!((p.eval(0.0) - 2.0).abs() < 1e-14);
        assert!((p.eval(0.5) + 2.0).abs() < 1e-14);
        assert!((p.eval(0.3) - p.eval(1.3)).abs() < 1e-13);
    }

    #[test]
    fn rejects_complex_potential() {
        let c = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.5)];
        assert!(CrystalPotential::new(1.0, c).is_err());
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(FieldParams::new(-1.0, 1.0, &UnitSystem::default()).is_err());
    }
}
