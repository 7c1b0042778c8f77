//! Cross-checks behind the `validate` command: decoupled dynamics against
//! the split-step oracle, closed-form moments against reconstructed
//! packets, and the localization of a breathing Wannier state.

use rayon::prelude::*;
use serde::Serialize;

use crate::band_structure::{BandStructure, CrystalPotential, UnitSystem};
use crate::config::RunConfig;
use crate::error::{ensure, Error, Result};
use crate::initial_states::{gaussian_state, wannier_state, MomentumState};
use crate::momentum_dynamics::{mean_crystal_momentum, DecoupledPropagator};
use crate::observables::{centroid_shift, variance_shift};
use crate::oracle::{fidelity, project_to_bands, split_step_evolve, synthesize_position_state, OracleConfig};
use crate::position_space::{direct_moments, mass_within, reconstruct, synthesize_on_grid, XGrid};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `max_τ |⟨k⟩^τ - ⟨k⟩⁰ - τ|` over `taus`.
pub fn acceleration_residual(init: &MomentumState, bands: &BandStructure, force: f64, taus: &[f64]) -> Result<f64> {
    let prop = DecoupledPropagator::new(bands, force)?;
    let k0 = mean_crystal_momentum(init, 0.0);
    taus.par_iter()
        .map(|&tau| {
            let s = prop.evolve(init, tau)?;
            Ok((mean_crystal_momentum(&s.state, k0 + tau) - k0 - tau).abs())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Outcome of one decoupled-versus-oracle comparison after one Bloch period.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub force: f64,
    /// `1 - fidelity`.
    pub infidelity: f64,
    /// Weight outside band 1 in the oracle state.
    pub out_of_band: f64,
    pub absorbed: f64,
    pub halving_discrepancy: f64,
    pub steps: usize,
}

/// Oracle settings used by [`oracle_point`]: one k-sum period of box,
/// centered on the middle of the Bloch excursion.
pub fn oracle_config(bands: &BandStructure, force: f64, dt: f64, units: &UnitSystem) -> Result<OracleConfig> {
    let excursion = bands.width(1)? / force;
    Ok(OracleConfig::for_bands(bands, force * dt / units.hbar).with_center(0.5 * excursion))
}

/// Evolves a Gaussian of width `rho` on band 1 for one Bloch period with
/// both the decoupled propagator and the split-step oracle.
pub fn oracle_point(
    pot: &CrystalPotential,
    bands: &BandStructure,
    units: &UnitSystem,
    force: f64,
    rho: f64,
    dt: f64,
    halving_tolerance: Option<f64>,
) -> Result<SweepPoint> {
    let grid = bands.grid();
    let init = gaussian_state(rho, 0.0, grid.period(), grid.len())?;
    let mut cfg = oracle_config(bands, force, dt, units)?;
    cfg.halving_tolerance = halving_tolerance;
    let x_grid = cfg.x_grid()?;
    let psi0 = synthesize_position_state(&init, bands, &x_grid)?;
    let tau_b = grid.zone_width();
    let run = split_step_evolve(pot, force, &psi0, &[tau_b], &cfg, units)?;
    let last = run.snapshots.last().expect("one snapshot requested");
    let proj = project_to_bands(last, bands, bands.n_bands(), 1.0)?;
    let band1: f64 = proj.state.amplitudes()[0].iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dk();
    let decoupled = DecoupledPropagator::new(bands, force)?.evolve(&init, tau_b)?;
    let fid = fidelity(&decoupled.state, &proj.state)?;
    Ok(SweepPoint {
        force,
        infidelity: 1.0 - fid,
        out_of_band: 1.0 - band1 / last.norm_sqr(),
        absorbed: run.absorbed,
        halving_discrepancy: run.halving_discrepancy.unwrap_or(f64::NAN),
        steps: run.steps,
    })
}

/// Closed-form and direct moments at one time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentComparison {
    pub tau: f64,
    pub centroid_closed: f64,
    pub centroid_direct: f64,
    pub variance_closed: f64,
    pub variance_direct: f64,
}

impl MomentComparison {
    pub fn centroid_error(&self) -> f64 {
        relative(self.centroid_direct, self.centroid_closed)
    }

    pub fn variance_error(&self) -> f64 {
        relative(self.variance_direct, self.variance_closed)
    }
}

fn relative(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

/// Compares `Δ⟨x⟩` and `ΔS` of reconstructed packets with the closed forms.
pub fn moment_comparison(
    init: &MomentumState,
    bands: &BandStructure,
    force: f64,
    taus: &[f64],
    x_grid: &XGrid,
) -> Result<Vec<MomentComparison>> {
    let m0 = direct_moments(&reconstruct(init, bands, force, 0.0, x_grid)?)?;
    taus.iter()
        .map(|&tau| {
            let m = direct_moments(&reconstruct(init, bands, force, tau, x_grid)?)?;
            Ok(MomentComparison {
                tau,
                centroid_closed: centroid_shift(init, bands, force, tau)?,
                centroid_direct: m.mean - m0.mean,
                variance_closed: variance_shift(init, bands, force, tau)?,
                variance_direct: m.variance - m0.variance,
            })
        })
        .collect()
}

/// Centroid shift of the packet rebuilt from `φ⁰(k - τ)` with the phase
/// factor dropped; the control case of the moment comparison.
fn phase_free_centroid(init: &MomentumState, bands: &BandStructure, tau: f64, x_grid: &XGrid) -> Result<f64> {
    let grid = init.grid();
    let steps = grid.steps_or_err(tau)?;
    let shifted: Vec<Vec<_>> = init
        .amplitudes()
        .iter()
        .map(|a| (0..grid.len()).map(|j| a[grid.wrap_index(j as i64 - steps)]).collect())
        .collect();
    let m = direct_moments(&synthesize_on_grid(&shifted, bands, x_grid, tau)?)?;
    let m0 = direct_moments(&synthesize_on_grid(init.amplitudes(), bands, x_grid, 0.0)?)?;
    Ok(m.mean - m0.mean)
}

/// Mass of a band-1 Wannier state within `±(Δ/F + margin)` at half a
/// Bloch period.
pub fn breathing_mass(bands: &BandStructure, force: f64, margin: f64, x_grid: &XGrid) -> Result<f64> {
    let grid = bands.grid();
    let init = wannier_state(grid.period(), grid.len(), 1)?;
    let pkt = reconstruct(&init, bands, force, 0.5 * grid.zone_width(), x_grid)?;
    let reach = bands.width(1)? / force + margin;
    mass_within(&pkt, (-reach, reach))
}

/// Runs every check configured in `cfg.validation`.
pub fn run(cfg: &RunConfig) -> Result<ValidationReport> {
    let spec = &cfg.validation;
    let pot = cfg
        .potential
        .potential()?
        .ok_or_else(|| Error::Config("validation needs a real-space potential, not an analytic band".into()))?;
    let bands = cfg.build_bands()?;
    let init = cfg.build_state()?;
    let d = cfg.period();
    let tau_b = cfg.tau_bloch();
    let mut report = ValidationReport::default();

    let res = acceleration_residual(&init, &bands, cfg.force, &cfg.tau_grid())?;
    report.push(
        "acceleration theorem",
        res < 1e-10,
        format!("max |<k>(tau) - <k>(0) - tau| = {res:.3e} (limit 1e-10)"),
    );

    let mut points: Vec<SweepPoint> = spec
        .forces
        .par_iter()
        .map(|&f| oracle_point(&pot, &bands, &cfg.units, f, spec.oracle_rho, spec.oracle_dt, Some(spec.halving_tolerance)))
        .collect::<Result<_>>()?;
    points.sort_by(|a, b| b.force.total_cmp(&a.force));
    let weakest = points.last().expect("non-empty force list");
    report.push(
        "oracle fidelity",
        1.0 - weakest.infidelity >= spec.min_fidelity,
        format!(
            "F = {}: fidelity {:.9} (limit {}), absorbed {:.2e}, halving discrepancy {:.2e}",
            weakest.force,
            1.0 - weakest.infidelity,
            spec.min_fidelity,
            weakest.absorbed,
            weakest.halving_discrepancy
        ),
    );
    report.push(
        "oracle out-of-band residual",
        weakest.out_of_band < spec.max_residual,
        format!("F = {}: {:.3e} (limit {:.1e})", weakest.force, weakest.out_of_band, spec.max_residual),
    );
    let monotone = points.windows(2).all(|w| w[1].infidelity < w[0].infidelity);
    let listing: Vec<String> = points.iter().map(|p| format!("F={}: {:.3e}", p.force, p.infidelity)).collect();
    report.push("small-F trend", monotone, format!("1 - fidelity: {}", listing.join(", ")));

    let x_grid = cfg.x_grid(&bands)?;
    let taus = [0.25 * tau_b, 0.5 * tau_b];
    ensure(init.is_real_valued(), || "moment comparison needs a real initial state".into())?;
    let comparisons = moment_comparison(&init, &bands, cfg.force, &taus, &x_grid)?;
    for c in &comparisons {
        let ok = c.centroid_error() < spec.moment_tolerance && c.variance_error() < spec.moment_tolerance;
        report.push(
            &format!("moments at tau = {:.4}", c.tau),
            ok,
            format!(
                "dx {:.6} vs {:.6} ({:.2e} rel), dS {:.6} vs {:.6} ({:.2e} rel), tolerance {}",
                c.centroid_direct,
                c.centroid_closed,
                c.centroid_error(),
                c.variance_direct,
                c.variance_closed,
                c.variance_error(),
                spec.moment_tolerance
            ),
        );
    }
    for c in &comparisons {
        let control = phase_free_centroid(&init, &bands, c.tau, &x_grid)?;
        let miss = relative(control, c.centroid_closed);
        report.push(
            &format!("phase-free control at tau = {:.4}", c.tau),
            miss > spec.control_factor * spec.moment_tolerance,
            format!(
                "dx without phase {control:.6} vs {:.6}: {miss:.3} rel, must exceed {}",
                c.centroid_closed,
                spec.control_factor * spec.moment_tolerance
            ),
        );
    }

    let margin = spec.margin_cells * d;
    let reach = bands.width(1)? / cfg.force + margin;
    let wide = XGrid::centered(0.0, reach + 10.0 * d, d / 16.0)?;
    let mass = breathing_mass(&bands, cfg.force, margin, &wide)?;
    report.push(
        "breathing localization",
        mass >= spec.mass_threshold,
        format!("mass within ±{reach:.3} at tau_B/2: {mass:.6} (limit {})", spec.mass_threshold),
    );
    Ok(report)
}
