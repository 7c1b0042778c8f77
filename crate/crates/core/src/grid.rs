use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Uniform sampling of one Brillouin zone, `k_j = -π/d + j·Δk` for `j < n`.
///
/// The canonical zone is `[-π/d, π/d)`; every crystal momentum is wrapped
/// into it on entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    d: f64,
    n: usize,
}

impl KGrid {
    pub fn new(d: f64, n: usize) -> Result<Self> {
        ensure(d > 0.0 && d.is_finite(), || format!("period d must be positive, got {d}"))?;
        ensure(n >= 4 && n.is_multiple_of(2), || format!("N_k must be even and >= 4, got {n}"))?;
        Ok(Self { d, n })
    }

    pub fn period(&self) -> f64 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Width of the zone, `2π/d`.
    pub fn zone_width(&self) -> f64 {
        2.0 * PI / self.d
    }

    pub fn dk(&self) -> f64 {
        self.zone_width() / self.n as f64
    }

    pub fn k_min(&self) -> f64 {
        -PI / self.d
    }

    pub fn k(&self, j: usize) -> f64 {
        self.k_min() + j as f64 * self.dk()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.k(j)).collect()
    }

    /// Representative of `k` in `[-π/d, π/d)`.
    pub fn wrap(&self, k: f64) -> f64 {
        let w = self.zone_width();
        let s = (k - self.k_min()).rem_euclid(w);
        self.k_min() + s
    }

    /// Grid index of `k` if it lies on the grid (after wrapping).
    pub fn index_of(&self, k: f64) -> Option<usize> {
        let s = (self.wrap(k) - self.k_min()) / self.dk();
        let j = s.round();
        if (s - j).abs() < 1e-9 {
            Some((j as usize) % self.n)
        } else {
            None
        }
    }

    /// Number of grid steps spanned by `tau`, if `tau` is commensurate.
    pub fn steps_for(&self, tau: f64) -> Option<i64> {
        let s = tau / self.dk();
        let r = s.round();
        if (s - r).abs() <= 1e-9 * r.abs().max(1.0) {
            Some(r as i64)
        } else {
            None
        }
    }

    pub fn steps_or_err(&self, tau: f64) -> Result<i64> {
        self.steps_for(tau).ok_or(Error::IncommensurateTau {
            tau,
            dk: self.dk(),
        })
    }

    /// Wraps an arbitrary integer index into `0..n`.
    pub fn wrap_index(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    pub fn same_as(&self, other: &KGrid) -> bool {
        self.n == other.n && (self.d - other.d).abs() <= 1e-14 * self.d
    }
}
