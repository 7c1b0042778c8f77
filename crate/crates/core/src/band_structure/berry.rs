use num_complex::Complex64;

use super::gauge::{overlap, shift_down, shift_up};
use super::BandStructure;
use crate::error::{Error, Result};
use crate::grid::KGrid;
use crate::spectral;

/// Overlap magnitude below which a neighbor is not trusted for differencing.
const NEIGHBOR_THRESHOLD: f64 = 0.5;
/// Largest tolerated `|Re⟨u|∂_k u⟩|` (it vanishes for normalized u) in
/// units of `d`; larger values are reported as a warning.
const RESIDUE_TOLERANCE: f64 = 1e-8;

/// `⟨u|∂_k u⟩` per grid point plus a reliability flag.
struct Connection {
    z: Vec<Complex64>,
    reliable: Vec<bool>,
}

/// Fills `X_nn(k) = i⟨u_n(k)|∂_k u_n(k)⟩` from the stored gauge-fixed
/// vectors.
///
/// In a smooth periodic gauge the coefficients satisfy
/// `c_m(k + 2π/d) = c_{m+1}(k)`, so they are samples of one function of the
/// extended-zone momentum `k + 2πm/d`, which is differentiated spectrally.
/// Otherwise centered differences between neighbors are used; a point whose
/// neighbor overlap is too small on one side (band crossing) falls back to a
/// one-sided difference and is flagged unreliable, and both sides failing is
/// an error.
pub fn berry_connection_diag(bands: &BandStructure) -> Result<BandStructure> {
    let mut out = bands.clone();
    let grid = bands.grid;
    let n = grid.len();
    let d = grid.period();
    let mut worst_residue = 0.0_f64;
    let mut worst_band = 0;
    for b in 0..out.bands.len() {
        let band = &bands.bands[b];
        let Some(coeffs) = band.coeffs.as_ref() else {
            out.bands[b].berry = vec![0.0; n];
            out.bands[b].berry_reliable = vec![true; n];
            continue;
        };
        let conn = if band.periodic_gauge {
            extended_zone_connection(coeffs, &grid)
        } else {
            differenced_connection(coeffs, &grid, b + 1)?
        };
        let mut reliable = conn.reliable;
        for (j, z) in conn.z.iter().enumerate() {
            if reliable[j] && z.re.abs() > worst_residue {
                worst_residue = z.re.abs();
                worst_band = b + 1;
            }
        }
        // near-degenerate points are flagged too
        for (j, flag) in reliable.iter_mut().enumerate() {
            let e = band.energies[j];
            let close = |other: Option<&super::Band>| {
                other.is_some_and(|o| (o.energies[j] - e).abs() < 1e-6 * e.abs().max(1.0))
            };
            if close(bands.bands.get(b + 1)) || (b > 0 && close(bands.bands.get(b - 1))) {
                *flag = false;
            }
        }
        out.bands[b].berry = conn.z.iter().map(|z| -z.im).collect();
        out.bands[b].berry_reliable = reliable;
    }
    if worst_residue * d > RESIDUE_TOLERANCE {
        let msg = format!("Berry connection: normalization residue {worst_residue:.3e} on band {worst_band}");
        log::warn!("{msg}");
        out.warnings.push(msg);
    }
    out.berry_filled = true;
    Ok(out)
}

/// Largest `|Re⟨u_n|∂_k u_n⟩|` over reliable points, the part that
/// normalization forces to zero; a measure of differentiation error.
pub fn normalization_residue(bands: &BandStructure, n: usize) -> Result<f64> {
    let coeffs = bands.band_coeffs(n)?;
    let conn = if bands.band(n)?.periodic_gauge {
        extended_zone_connection(coeffs, &bands.grid)
    } else {
        differenced_connection(coeffs, &bands.grid, n)?
    };
    Ok(conn
        .z
        .iter()
        .zip(&conn.reliable)
        .filter(|(_, &r)| r)
        .map(|(z, _)| z.re.abs())
        .fold(0.0, f64::max))
}

fn extended_zone_connection(coeffs: &[Vec<Complex64>], grid: &KGrid) -> Connection {
    let n = grid.len();
    let dim = coeffs[0].len();
    // entry (m, j) sits at extended momentum k_j + 2π(m - M)/d
    let mut line = vec![Complex64::new(0.0, 0.0); dim * n];
    for (j, c) in coeffs.iter().enumerate() {
        for (m, v) in c.iter().enumerate() {
            line[m * n + j] = *v;
        }
    }
    let dline = spectral::line_derivative(&line, grid.dk());
    let z = (0..n)
        .map(|j| (0..dim).map(|m| line[m * n + j].conj() * dline[m * n + j]).sum())
        .collect();
    Connection {
        z,
        reliable: vec![true; n],
    }
}

fn differenced_connection(coeffs: &[Vec<Complex64>], grid: &KGrid, band: usize) -> Result<Connection> {
    let n = grid.len();
    let dk = grid.dk();
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    let mut reliable = vec![true; n];
    for j in 0..n {
        let next = if j + 1 < n {
            coeffs[j + 1].clone()
        } else {
            shift_up(&coeffs[0])
        };
        let prev = if j > 0 {
            coeffs[j - 1].clone()
        } else {
            shift_down(&coeffs[n - 1])
        };
        let op = overlap(&coeffs[j], &next);
        let om = overlap(&coeffs[j], &prev);
        let ok_p = op.norm() >= NEIGHBOR_THRESHOLD;
        let ok_m = om.norm() >= NEIGHBOR_THRESHOLD;
        z[j] = match (ok_p, ok_m) {
            (true, true) => (op - om) / (2.0 * dk),
            (true, false) => (op - 1.0) / dk,
            (false, true) => (1.0 - om) / dk,
            (false, false) => {
                return Err(Error::GaugeAlignment {
                    band,
                    index: j,
                    overlap: op.norm().max(om.norm()),
                })
            }
        };
        reliable[j] = ok_p && ok_m;
    }
    Ok(Connection { z, reliable })
}

/// Centered-difference connection, kept as an independent check on the
/// spectral route.
pub fn differenced_berry(bands: &BandStructure, n: usize) -> Result<Vec<f64>> {
    let conn = differenced_connection(bands.band_coeffs(n)?, &bands.grid, n)?;
    Ok(conn.z.iter().map(|z| -z.im).collect())
}
