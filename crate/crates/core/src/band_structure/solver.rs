use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use super::berry::berry_connection_diag;
use super::gauge::{align_degenerate, fix_gauge};
use super::{Band, BandStructure, CrystalPotential, UnitSystem};
use crate::error::{ensure, Error, Result};
use crate::grid::KGrid;

/// Plane-wave diagonalization of `H(k)` on a uniform zone grid.
#[derive(Debug, Clone)]
pub struct BandSolver {
    pub n_k: usize,
    pub m_cut: usize,
    pub n_bands: usize,
    /// When set, re-solve at `2·m_cut` and warn if any kept energy moves by
    /// more than this.
    pub cutoff_tolerance: Option<f64>,
    /// Minimum neighbor overlap for gauge alignment.
    pub overlap_threshold: f64,
    /// Relative eigenvalue gap below which levels are treated as degenerate.
    pub degeneracy_tolerance: f64,
}

impl Default for BandSolver {
    fn default() -> Self {
        Self {
            n_k: 256,
            m_cut: 32,
            n_bands: 4,
            cutoff_tolerance: None,
            overlap_threshold: 0.5,
            degeneracy_tolerance: 1e-9,
        }
    }
}

struct KSolution {
    values: Vec<f64>,
    /// Eigenvectors as plane-wave coefficient vectors, ascending energy.
    vectors: Vec<Vec<Complex64>>,
}

fn hamiltonian(pot: &CrystalPotential, units: &UnitSystem, k: f64, m_cut: usize) -> DMatrix<Complex64> {
    let dim = 2 * m_cut + 1;
    let g = 2.0 * std::f64::consts::PI / pot.period();
    DMatrix::from_fn(dim, dim, |r, c| {
        let (m, mp) = (r as i64 - m_cut as i64, c as i64 - m_cut as i64);
        let mut v = pot.coeff(m - mp);
        if r == c {
            let q = k + g * m as f64;
            v += units.kinetic_coeff * q * q;
        }
        v
    })
}

fn diagonalize(
    pot: &CrystalPotential,
    units: &UnitSystem,
    k: f64,
    m_cut: usize,
    keep: usize,
    with_vectors: bool,
) -> Result<KSolution> {
    let h = hamiltonian(pot, units, k, m_cut);
    let dim = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 100 * dim * dim)
        .ok_or(Error::EigenConvergence { k })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let keep = keep.min(dim);
    let mut values = Vec::with_capacity(keep);
    let mut vectors = Vec::new();
    for &i in order.iter().take(keep) {
        let v: Vec<Complex64> = eig.eigenvectors.column(i).iter().cloned().collect();
        // Rayleigh quotient with the unit eigenvector; its roundoff is set by
        // the weights on large diagonal entries, which are tiny for low bands.
        let hv = &h * nalgebra::DVector::from_column_slice(&v);
        let rq: Complex64 = v.iter().zip(hv.iter()).map(|(a, b)| a.conj() * b).sum();
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        values.push(rq.re / norm);
        if with_vectors {
            vectors.push(v);
        }
    }
    Ok(KSolution { values, vectors })
}

impl BandSolver {
    pub fn new(n_k: usize, m_cut: usize, n_bands: usize) -> Self {
        Self {
            n_k,
            m_cut,
            n_bands,
            ..Self::default()
        }
    }

    pub fn with_cutoff_check(mut self, tolerance: f64) -> Self {
        self.cutoff_tolerance = Some(tolerance);
        self
    }

    fn validate(&self) -> Result<()> {
        ensure(self.n_bands >= 1, || "need at least one band".into())?;
        ensure(self.m_cut >= 2, || format!("M_cut must be >= 2, got {}", self.m_cut))?;
        ensure(self.n_bands + 2 <= 2 * self.m_cut, || {
            format!(
                "N_b = {} exceeds 2·M_cut - 2 = {}; eigenpairs near the cutoff are untrusted",
                self.n_bands,
                2 * self.m_cut - 2
            )
        })
    }

    /// Energies of the kept bands at one crystal momentum (wrapped first).
    pub fn energies_at(&self, pot: &CrystalPotential, units: &UnitSystem, k: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let grid = KGrid::new(pot.period(), self.n_k)?;
        Ok(diagonalize(pot, units, grid.wrap(k), self.m_cut, self.n_bands, false)?.values)
    }

    /// Diagonalizes on the grid and fixes the gauge; the Berry connection
    /// is left empty (see [`berry_connection_diag`]).
    pub fn solve(&self, pot: &CrystalPotential, units: &UnitSystem) -> Result<BandStructure> {
        self.validate()?;
        units.validate()?;
        let grid = KGrid::new(pot.period(), self.n_k)?;
        let dim = 2 * self.m_cut + 1;
        let keep = (self.n_bands + 4).min(dim);

        let mut sols: Vec<KSolution> = (0..self.n_k)
            .into_par_iter()
            .map(|j| diagonalize(pot, units, grid.k(j), self.m_cut, keep, true))
            .collect::<Result<_>>()?;

        // Degenerate levels are rotated toward the neighbor's vectors.
        for j in 0..self.n_k {
            let reference = if j == 0 { 1 } else { j - 1 };
            let (refs, cur) = if reference < j {
                let (a, b) = sols.split_at_mut(j);
                (&a[reference].vectors, &mut b[0])
            } else {
                let (a, b) = sols.split_at_mut(reference);
                (&b[0].vectors, &mut a[j])
            };
            align_degenerate(&cur.values, &mut cur.vectors, refs, self.n_bands, self.degeneracy_tolerance);
        }

        let mut warnings = Vec::new();
        let mut bands = Vec::with_capacity(self.n_bands);
        for n in 0..self.n_bands {
            let energies: Vec<f64> = sols.iter().map(|s| s.values[n]).collect();
            let mut coeffs: Vec<Vec<Complex64>> = sols.iter().map(|s| s.vectors[n].clone()).collect();
            let outcome = fix_gauge(&mut coeffs, self.overlap_threshold);
            if !outcome.periodic {
                warnings.push(format!(
                    "band {}: no smooth periodic gauge (alignment breaks at k indices {:?})",
                    n + 1,
                    outcome.breaks
                ));
            }
            bands.push(Band {
                energies,
                berry: vec![0.0; self.n_k],
                berry_reliable: vec![false; self.n_k],
                coeffs: Some(coeffs),
                periodic_gauge: outcome.periodic,
            });
        }

        if let Some(tol) = self.cutoff_tolerance {
            let doubled = 2 * self.m_cut;
            let shifts: Vec<f64> = (0..self.n_k)
                .into_par_iter()
                .map(|j| {
                    diagonalize(pot, units, grid.k(j), doubled, self.n_bands, false).map(|s| {
                        s.values
                            .iter()
                            .zip(bands.iter())
                            .map(|(e2, b)| (e2 - b.energies[j]).abs())
                            .fold(0.0, f64::max)
                    })
                })
                .collect::<Result<_>>()?;
            let worst = shifts.iter().cloned().fold(0.0, f64::max);
            if worst > tol {
                let msg = format!(
                    "cutoff sensitivity: doubling M_cut {} -> {} shifts kept energies by {worst:.3e} (> {tol:.1e})",
                    self.m_cut, doubled
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }

        for w in &warnings {
            log::debug!("{w}");
        }

        Ok(BandStructure {
            grid,
            m_cut: Some(self.m_cut),
            bands,
            berry_filled: false,
            warnings,
        })
    }
}

/// Diagonalizes, fixes the gauge and fills the diagonal Berry connection.
pub fn solve_bands(
    pot: &CrystalPotential,
    units: &UnitSystem,
    n_k: usize,
    m_cut: usize,
    n_bands: usize,
) -> Result<BandStructure> {
    let bands = BandSolver::new(n_k, m_cut, n_bands).solve(pot, units)?;
    berry_connection_diag(&bands)
}
