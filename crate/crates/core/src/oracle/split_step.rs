use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::OracleConfig;
use crate::band_structure::{CrystalPotential, UnitSystem};
use crate::error::{ensure, Error, Result};
use crate::position_space::{PositionWavepacket, XGrid};

/// Snapshots and bookkeeping of one oracle run.
#[derive(Debug, Clone)]
pub struct OracleRun {
    /// One packet per requested `τ`, in ascending order.
    pub snapshots: Vec<PositionWavepacket>,
    /// Norm removed by the absorber over the whole run.
    pub absorbed: f64,
    pub steps: usize,
    /// L2 distance, up to a global phase, between the terminal states at
    /// `dtau` and `dtau/2`.
    pub halving_discrepancy: Option<f64>,
}

/// Integrates `iF ∂_τ ψ = [-κ∂² + V(x) - Fx] ψ` by Strang splitting: half a
/// potential step, an exact kinetic step in the spatial-frequency domain,
/// another half potential step, then the edge absorber.
///
/// Each interval between requested times is covered by equal steps no
/// longer than `cfg.dtau`.
pub fn split_step_evolve(
    pot: &CrystalPotential,
    force: f64,
    psi0: &PositionWavepacket,
    tau_grid: &[f64],
    cfg: &OracleConfig,
    units: &UnitSystem,
) -> Result<OracleRun> {
    let mut run = integrate(pot, force, psi0, tau_grid, cfg, units)?;
    if let Some(tolerance) = cfg.halving_tolerance {
        let mut fine = *cfg;
        fine.dtau = cfg.dtau / 2.0;
        fine.halving_tolerance = None;
        let other = integrate(pot, force, psi0, tau_grid, &fine, units)?;
        let discrepancy = match (run.snapshots.last(), other.snapshots.last()) {
            (Some(a), Some(b)) => l2_distance(a, b),
            _ => 0.0,
        };
        run.halving_discrepancy = Some(discrepancy);
        if discrepancy > tolerance {
            return Err(Error::StepHalving { discrepancy, tolerance });
        }
    }
    Ok(run)
}

/// `min_φ ‖a - e^{iφ} b‖`.
fn l2_distance(a: &PositionWavepacket, b: &PositionWavepacket) -> f64 {
    let overlap: Complex64 = a.values.iter().zip(&b.values).map(|(p, q)| p.conj() * q).sum();
    let dist = a.norm_sqr() + b.norm_sqr() - 2.0 * overlap.norm() * a.x_grid.step;
    dist.max(0.0).sqrt()
}

struct Stepper {
    h: f64,
    potential_half: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    mask: Vec<f64>,
}

fn build_stepper(grid: &XGrid, pot: &CrystalPotential, force: f64, h: f64, cfg: &OracleConfig, units: &UnitSystem) -> Stepper {
    let n = grid.len;
    let potential_half = (0..n)
        .map(|i| {
            let x = grid.x(i);
            Complex64::from_polar(1.0, -(pot.eval(x) - force * x) * h / (2.0 * force))
        })
        .collect();
    let dq = 2.0 * PI / grid.span();
    let kinetic = (0..n)
        .map(|m| {
            let s = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            let q = s * dq;
            Complex64::from_polar(1.0, -units.kinetic_coeff * q * q * h / force)
        })
        .collect();
    // raised-cosine ramp over the outer fraction of the box
    let ramp = cfg.absorber_width * grid.span();
    let dt = h * units.hbar / force;
    let mask = (0..n)
        .map(|i| {
            if ramp <= 0.0 || cfg.absorber_strength == 0.0 {
                return 1.0;
            }
            let x = grid.x(i);
            let depth = ((grid.start + ramp - x).max(x - (grid.start + grid.span() - ramp)) / ramp).clamp(0.0, 1.0);
            let profile = 0.5 * (1.0 - (PI * depth).cos());
            (-cfg.absorber_strength * dt * profile).exp()
        })
        .collect();
    Stepper {
        h,
        potential_half,
        kinetic,
        mask,
    }
}

fn integrate(
    pot: &CrystalPotential,
    force: f64,
    psi0: &PositionWavepacket,
    tau_grid: &[f64],
    cfg: &OracleConfig,
    units: &UnitSystem,
) -> Result<OracleRun> {
    ensure(force > 0.0 && force.is_finite(), || format!("F must be positive, got {force}"))?;
    units.validate()?;
    let grid = cfg.x_grid()?;
    if !grid.same_as(&psi0.x_grid) {
        return Err(Error::GridMismatch(
            "initial packet is not sampled on the oracle box".into(),
        ));
    }
    let mut taus = tau_grid.to_vec();
    taus.sort_by(f64::total_cmp);
    ensure(taus.iter().all(|t| t.is_finite() && *t >= psi0.tau), || {
        "requested times must be finite and not before the initial packet".into()
    })?;

    let n = grid.len;
    let mut planner = FftPlanner::new();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(n);
    let inverse: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
    let inv_n = 1.0 / n as f64;

    let mut psi = psi0.values.clone();
    let mut now = psi0.tau;
    let mut absorbed = 0.0;
    let mut steps = 0;
    let mut stepper: Option<Stepper> = None;
    let mut snapshots = Vec::with_capacity(taus.len());
    for &target in &taus {
        let span = target - now;
        let count = if span > 0.0 { (span / cfg.dtau - 1e-9).ceil().max(1.0) as usize } else { 0 };
        if count > 0 {
            let h = span / count as f64;
            if stepper.as_ref().is_none_or(|s| (s.h - h).abs() > 1e-15 * h) {
                stepper = Some(build_stepper(&grid, pot, force, h, cfg, units));
            }
            let st = stepper.as_ref().expect("stepper built above");
            for _ in 0..count {
                psi.iter_mut().zip(&st.potential_half).for_each(|(p, f)| *p *= f);
                forward.process_with_scratch(&mut psi, &mut scratch);
                psi.iter_mut().zip(&st.kinetic).for_each(|(p, f)| *p *= f * inv_n);
                inverse.process_with_scratch(&mut psi, &mut scratch);
                psi.iter_mut().zip(&st.potential_half).for_each(|(p, f)| *p *= f);
                let mut lost = 0.0;
                for (p, &m) in psi.iter_mut().zip(&st.mask) {
                    if m < 1.0 {
                        let before = p.norm_sqr();
                        *p *= m;
                        lost += before - p.norm_sqr();
                    }
                }
                absorbed += lost * grid.step;
            }
            steps += count;
        }
        now = target;
        snapshots.push(PositionWavepacket::new(grid, psi.clone(), target)?);
    }
    if absorbed > cfg.absorbed_budget {
        return Err(Error::AbsorbedMass {
            absorbed,
            budget: cfg.absorbed_budget,
        });
    }
    Ok(OracleRun {
        snapshots,
        absorbed,
        steps,
        halving_discrepancy: None,
    })
}
