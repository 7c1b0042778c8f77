//! Run configuration: one TOML file per run, with dotted `key=value`
//! overrides applied before parsing.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band_structure::{berry_connection_diag, BandSolver, BandStructure, CrystalPotential, UnitSystem};
use crate::error::{Error, Result};
use crate::initial_states::{gaussian_state_on_band, near_bloch_state, wannier_state, MomentumState};
use crate::position_space::XGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `E(k) = Δ/2 (1 - cos kd)` with no position-space basis.
    AnalyticCosineBand { d: f64, width: f64 },
    /// `V(x) = amplitude · cos(2πx/d)`.
    Cosine { d: f64, amplitude: f64 },
    /// Fourier coefficients `[re, im]` of `V` for `m = -M..=M`.
    Fourier { d: f64, coeffs: Vec<[f64; 2]> },
}

impl PotentialSpec {
    pub fn period(&self) -> f64 {
        match self {
            Self::AnalyticCosineBand { d, .. } | Self::Cosine { d, .. } | Self::Fourier { d, .. } => *d,
        }
    }

    /// Real-space potential; `None` for the analytic band.
    pub fn potential(&self) -> Result<Option<CrystalPotential>> {
        match self {
            Self::AnalyticCosineBand { .. } => Ok(None),
            Self::Cosine { d, amplitude } => CrystalPotential::cosine(*d, *amplitude).map(Some),
            Self::Fourier { d, coeffs } => {
                let c = coeffs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                CrystalPotential::new(*d, c).map(Some)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Wannier {
        #[serde(default = "one")]
        band: usize,
    },
    Gaussian {
        rho: f64,
        #[serde(default)]
        k0: f64,
        #[serde(default = "one")]
        band: usize,
    },
    NearBloch { k0: f64, width: f64 },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub n_k: usize,
    pub m_cut: usize,
    pub n_bands: usize,
    /// Length of the τ range in Bloch periods.
    pub tau_periods: f64,
    /// τ step in units of the k spacing.
    pub tau_stride: usize,
    /// Position-grid step; defaults to `d/16`.
    pub x_step: Option<f64>,
    /// Half extent of the position grid; defaults to `Δ/F + 20d`.
    pub x_extent: Option<f64>,
    /// Reconstruction times as fractions of the Bloch period.
    pub snapshots: Vec<f64>,
    /// Warn when doubling `m_cut` moves kept energies by more than this;
    /// `0` disables the extra solve.
    pub cutoff_check: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_k: 256,
            m_cut: 32,
            n_bands: 4,
            tau_periods: 2.0,
            tau_stride: 1,
            x_step: None,
            x_extent: None,
            snapshots: vec![0.0, 0.25, 0.5, 1.0],
            cutoff_check: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub bands: String,
    pub trace: String,
    pub packet_prefix: String,
    pub report: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            bands: "bands.json".into(),
            trace: "trace.csv".into(),
            packet_prefix: "packet".into(),
            report: "validation.json".into(),
        }
    }
}

/// Settings of the `validate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSpec {
    /// Field strengths of the oracle sweep; the last one is judged against
    /// the fidelity and residual thresholds.
    pub forces: Vec<f64>,
    /// Width of the Gaussian used in the oracle sweep.
    pub oracle_rho: f64,
    /// Oracle step in physical time; `δτ = F·dt/ħ`.
    pub oracle_dt: f64,
    pub halving_tolerance: f64,
    pub min_fidelity: f64,
    pub max_residual: f64,
    /// Relative tolerance of the position-space cross-check.
    pub moment_tolerance: f64,
    /// The phase-free control must miss the centroid by this multiple of
    /// `moment_tolerance`.
    pub control_factor: f64,
    pub mass_threshold: f64,
    /// Margin added to `Δ/F`, in lattice periods.
    pub margin_cells: f64,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        Self {
            forces: vec![0.08, 0.04, 0.02, 0.01],
            oracle_rho: 0.1,
            oracle_dt: 0.005,
            halving_tolerance: 1e-3,
            min_fidelity: 0.99,
            max_residual: 1e-3,
            moment_tolerance: 0.02,
            control_factor: 10.0,
            mass_threshold: 0.99,
            margin_cells: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub units: UnitSystem,
    #[serde(rename = "F")]
    pub force: f64,
    pub initial_state: StateSpec,
    #[serde(default)]
    pub grids: GridSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub validation: ValidationSpec,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Parses the value of a `key=value` override as a TOML value, falling back
/// to a bare string.
fn parse_override_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Applies `a.b.c=value` to a TOML table, creating missing tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override {assignment:?} is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').map(str::trim).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key {key:?} is malformed")));
    }
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override {key:?}: {part:?} is not a table")))?;
    }
    node.insert(path[path.len() - 1].to_string(), parse_override_value(value));
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(config_err)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(config_err)
    }

    pub fn period(&self) -> f64 {
        self.potential.period()
    }

    /// `τ_B = 2π/d`.
    pub fn tau_bloch(&self) -> f64 {
        2.0 * PI / self.period()
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::Config(msg)) };
        let d = self.period();
        check(d > 0.0 && d.is_finite(), format!("potential.d must be positive, got {d}"))?;
        if let PotentialSpec::AnalyticCosineBand { width, .. } = self.potential {
            check(width > 0.0, format!("potential.width must be positive, got {width}"))?;
        }
        self.units.validate().map_err(config_err)?;
        check(self.force > 0.0 && self.force.is_finite(), format!("F must be positive, got {}", self.force))?;
        let g = &self.grids;
        check(g.n_k >= 4 && g.n_k.is_multiple_of(2), format!("grids.n_k must be even and at least 4, got {}", g.n_k))?;
        check(g.cutoff_check >= 0.0, "grids.cutoff_check must be non-negative".into())?;
        check(g.tau_stride >= 1, "grids.tau_stride must be at least 1".into())?;
        check(g.tau_periods >= 0.0, "grids.tau_periods must be non-negative".into())?;
        let steps = g.tau_periods * g.n_k as f64 / g.tau_stride as f64;
        check(
            (steps - steps.round()).abs() < 1e-9,
            format!(
                "τ range of {} periods is not a whole number of strides of {} k-steps",
                g.tau_periods, g.tau_stride
            ),
        )?;
        if let Some(s) = g.x_step {
            check(s > 0.0, format!("grids.x_step must be positive, got {s}"))?;
        }
        if let Some(e) = g.x_extent {
            check(e > 0.0, format!("grids.x_extent must be positive, got {e}"))?;
        }
        match self.initial_state {
            StateSpec::Wannier { band } | StateSpec::Gaussian { band, .. } => {
                check(band >= 1, "initial_state.band starts at 1".into())?;
                if !matches!(self.potential, PotentialSpec::AnalyticCosineBand { .. }) {
                    check(band <= g.n_bands, format!("initial_state.band {band} exceeds grids.n_bands"))?;
                }
            }
            StateSpec::NearBloch { .. } => {}
        }
        if let StateSpec::Gaussian { rho, .. } = self.initial_state {
            check(rho > 0.0, format!("initial_state.rho must be positive, got {rho}"))?;
        }
        let v = &self.validation;
        check(
            !v.forces.is_empty() && v.forces.iter().all(|f| *f > 0.0),
            "validation.forces must be positive and non-empty".into(),
        )?;
        check(v.oracle_dt > 0.0 && v.oracle_rho > 0.0, "validation.oracle_dt and oracle_rho must be positive".into())?;
        Ok(())
    }

    /// Band structure described by the config (solved or analytic).
    pub fn build_bands(&self) -> Result<BandStructure> {
        let g = &self.grids;
        match &self.potential {
            PotentialSpec::AnalyticCosineBand { d, width } => BandStructure::analytic_cosine_band(*width, *d, g.n_k),
            _ => {
                let pot = self.potential.potential()?.expect("non-analytic potential");
                let mut solver = BandSolver::new(g.n_k, g.m_cut, g.n_bands);
                if g.cutoff_check > 0.0 {
                    solver = solver.with_cutoff_check(g.cutoff_check);
                }
                berry_connection_diag(&solver.solve(&pot, &self.units)?)
            }
        }
    }

    pub fn build_state(&self) -> Result<MomentumState> {
        let d = self.period();
        let n_k = self.grids.n_k;
        match self.initial_state {
            StateSpec::Wannier { band } => wannier_state(d, n_k, band),
            StateSpec::Gaussian { rho, k0, band } => gaussian_state_on_band(rho, k0, d, n_k, band),
            StateSpec::NearBloch { k0, width } => near_bloch_state(k0, width, d, n_k),
        }
    }

    /// `τ = i · stride · Δk` covering `[0, tau_periods · τ_B]`.
    pub fn tau_grid(&self) -> Vec<f64> {
        let g = &self.grids;
        let dk = 2.0 * PI / (self.period() * g.n_k as f64);
        let count = (g.tau_periods * g.n_k as f64 / g.tau_stride as f64).round() as usize;
        (0..=count).map(|i| (i * g.tau_stride) as f64 * dk).collect()
    }

    /// Snapshot times rounded to the nearest k-grid step.
    pub fn snapshot_taus(&self) -> Vec<f64> {
        let n = self.grids.n_k as f64;
        let dk = self.tau_bloch() / n;
        self.grids.snapshots.iter().map(|f| (f * n).round() * dk).collect()
    }

    pub fn x_grid(&self, bands: &BandStructure) -> Result<XGrid> {
        let d = self.period();
        let step = self.grids.x_step.unwrap_or(d / 16.0);
        let extent = match self.grids.x_extent {
            Some(e) => e,
            None => {
                let n = match self.initial_state {
                    StateSpec::Wannier { band } | StateSpec::Gaussian { band, .. } => band,
                    StateSpec::NearBloch { .. } => 1,
                };
                bands.width(n)? / self.force + 20.0 * d
            }
        };
        XGrid::centered(0.0, extent, step)
    }
}
