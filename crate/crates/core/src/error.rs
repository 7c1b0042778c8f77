use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigensolver failed to converge at k = {k}")]
    EigenConvergence { k: f64 },

    #[error("band {band} has no cell-periodic basis (analytic band structure)")]
    MissingBasis { band: usize },

    #[error(
        "gauge alignment failed for band {band} at k index {index}: neighbor overlap {overlap:.3e} below threshold"
    )]
    GaugeAlignment {
        band: usize,
        index: usize,
        overlap: f64,
    },

    #[error("tau = {tau} is not a multiple of the k-grid spacing {dk} (enable interpolation)")]
    IncommensurateTau { tau: f64, dk: f64 },

    #[error("initial state is not real-valued (max |Im| = {max_imag:.3e})")]
    NotRealValued { max_imag: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("packet not contained in grid: edge density ratio {ratio:.3e}")]
    EdgeMass { ratio: f64 },

    #[error("interval [{lo}, {hi}] exceeds grid [{grid_lo}, {grid_hi}]")]
    IntervalOutsideGrid {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("absorbed mass {absorbed:.3e} exceeds budget {budget:.3e}")]
    AbsorbedMass { absorbed: f64, budget: f64 },

    #[error("step-halving discrepancy {discrepancy:.3e} exceeds tolerance {tolerance:.3e}")]
    StepHalving { discrepancy: f64, tolerance: f64 },

    #[error("band truncation residual {residual:.3e} exceeds threshold {threshold:.3e}")]
    BandResidual { residual: f64, threshold: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
