//! Fourier tools for smooth periodic functions sampled on a [`KGrid`].
//!
//! Samples `f_j = f(k_0 + j·Δk)` are represented by their trigonometric
//! interpolant
//!
//! ```text
//! f(k) = (1/N) Σ_m F_m exp(i·m·d·(k - k_0))
//! ```
//!
//! with signed frequencies `m ∈ (-N/2, N/2)` and the Nyquist mode carried
//! as a cosine so that real samples give a real interpolant. Derivatives,
//! antiderivatives and shifts act on that interpolant exactly.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::KGrid;

fn fft_forward(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(data.len()).process(data);
}

fn fft_inverse(data: &mut [Complex64]) {
    let n = data.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(data);
    let scale = 1.0 / n as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

fn signed(m: usize, n: usize) -> i64 {
    if m <= n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Trigonometric interpolant of periodic samples.
#[derive(Debug, Clone)]
pub struct PeriodicSeries {
    grid: KGrid,
    /// Unnormalized DFT coefficients `F_m`, FFT ordering.
    coeffs: Vec<Complex64>,
}

impl PeriodicSeries {
    pub fn from_complex(grid: KGrid, samples: &[Complex64]) -> Self {
        assert_eq!(samples.len(), grid.len());
        let mut coeffs = samples.to_vec();
        fft_forward(&mut coeffs);
        Self { grid, coeffs }
    }

    pub fn from_real(grid: KGrid, samples: &[f64]) -> Self {
        let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_complex(grid, &c)
    }

    pub fn grid(&self) -> &KGrid {
        &self.grid
    }

    /// Zone average of the function.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0] / self.grid.len() as f64
    }

    /// `order`-th derivative of the interpolant evaluated at arbitrary `k`.
    pub fn eval_derivative(&self, k: f64, order: u32) -> Complex64 {
        let n = self.grid.len();
        let d = self.grid.period();
        let s = k - self.grid.k_min();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &c) in self.coeffs.iter().enumerate() {
            if m == n / 2 {
                // cos(w s) carries the Nyquist mode
                let w = (n / 2) as f64 * d;
                let (sn, cs) = (w * s).sin_cos();
                let v = match order % 4 {
                    0 => cs,
                    1 => -sn,
                    2 => -cs,
                    _ => sn,
                } * w.powi(order as i32);
                acc += c * v;
                continue;
            }
            let w = signed(m, n) as f64 * d;
            let factor = Complex64::new(0.0, w).powu(order);
            acc += c * factor * Complex64::from_polar(1.0, w * s);
        }
        acc / n as f64
    }

    pub fn eval(&self, k: f64) -> Complex64 {
        self.eval_derivative(k, 0)
    }

    /// Exact antiderivative of the interpolant: `mean·(k - k_0) + periodic(k)`,
    /// where the periodic part has no constant term.
    pub fn eval_antiderivative(&self, k: f64) -> Complex64 {
        let n = self.grid.len();
        let d = self.grid.period();
        let s = k - self.grid.k_min();
        let mut acc = self.coeffs[0] * s;
        for (m, &c) in self.coeffs.iter().enumerate().skip(1) {
            if m == n / 2 {
                let w = (n / 2) as f64 * d;
                acc += c * ((w * s).sin() / w);
                continue;
            }
            let w = signed(m, n) as f64 * d;
            acc += c * Complex64::from_polar(1.0, w * s) / Complex64::new(0.0, w);
        }
        acc / n as f64
    }

    /// Antiderivative sampled on the grid, same convention as
    /// [`eval_antiderivative`](Self::eval_antiderivative).
    pub fn antiderivative_samples(&self) -> Vec<Complex64> {
        let n = self.grid.len();
        let d = self.grid.period();
        let mut spec = self.coeffs.clone();
        spec[0] = Complex64::new(0.0, 0.0);
        for (m, c) in spec.iter_mut().enumerate().skip(1) {
            if m == n / 2 {
                // sin(w s_j) vanishes on every grid point
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= Complex64::new(0.0, signed(m, n) as f64 * d);
            }
        }
        fft_inverse(&mut spec);
        let mean = self.mean();
        spec.iter()
            .enumerate()
            .map(|(j, &p)| p + mean * (j as f64 * self.grid.dk()))
            .collect()
    }
}

/// `order`-th spectral derivative of complex periodic samples.
pub fn derivative(grid: &KGrid, samples: &[Complex64], order: u32) -> Vec<Complex64> {
    let n = grid.len();
    let d = grid.period();
    let mut spec = samples.to_vec();
    fft_forward(&mut spec);
    for (m, c) in spec.iter_mut().enumerate() {
        if m == n / 2 {
            if order % 2 == 1 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                let w = (n / 2) as f64 * d;
                *c *= w.powi(order as i32) * if order.is_multiple_of(4) { 1.0 } else { -1.0 };
            }
        } else {
            *c *= Complex64::new(0.0, signed(m, n) as f64 * d).powu(order);
        }
    }
    fft_inverse(&mut spec);
    spec
}

/// First spectral derivative of samples spaced `spacing` apart, treated as
/// one period of a periodic sequence.
pub(crate) fn line_derivative(samples: &[Complex64], spacing: f64) -> Vec<Complex64> {
    let n = samples.len();
    let w = 2.0 * std::f64::consts::PI / (n as f64 * spacing);
    let mut spec = samples.to_vec();
    fft_forward(&mut spec);
    for (m, c) in spec.iter_mut().enumerate() {
        if n.is_multiple_of(2) && m == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, signed(m, n) as f64 * w);
        }
    }
    fft_inverse(&mut spec);
    spec
}

pub fn derivative_real(grid: &KGrid, samples: &[f64], order: u32) -> Vec<f64> {
    let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    derivative(grid, &c, order).into_iter().map(|v| v.re).collect()
}

/// Values of the interpolant at `k_j - delta` for every grid point.
pub fn shift(grid: &KGrid, samples: &[Complex64], delta: f64) -> Vec<Complex64> {
    let n = grid.len();
    let d = grid.period();
    let mut spec = samples.to_vec();
    fft_forward(&mut spec);
    for (m, c) in spec.iter_mut().enumerate() {
        if m == n / 2 {
            *c *= ((n / 2) as f64 * d * delta).cos();
        } else {
            *c *= Complex64::from_polar(1.0, -(signed(m, n) as f64) * d * delta);
        }
    }
    fft_inverse(&mut spec);
    spec
}

pub fn shift_real(grid: &KGrid, samples: &[f64], delta: f64) -> Vec<f64> {
    let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    shift(grid, &c, delta).into_iter().map(|v| v.re).collect()
}

/// Samples at `k_j + tau`: an index rotation when `tau` is a multiple of the
/// grid spacing, the band-limited interpolant otherwise.
pub fn advanced_real(grid: &KGrid, samples: &[f64], tau: f64) -> Vec<f64> {
    match grid.steps_for(tau) {
        Some(s) => (0..grid.len())
            .map(|j| samples[grid.wrap_index(j as i64 + s)])
            .collect(),
        None => shift_real(grid, samples, -tau),
    }
}
