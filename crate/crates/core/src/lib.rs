//! Bloch oscillations of wave-packets in a tilted periodic potential.
//!
//! The crate evolves crystal-momentum amplitudes with the exact
//! decoupled-band propagator (translation of `k` plus a `k`-dependent
//! phase), evaluates centroid, variance and localization observables in
//! closed form, reconstructs the packet in position space, and checks the
//! whole chain against a split-step integrator of the full Schrödinger
//! equation.
//!
//! Conventions: `τ = F t / ħ` is the rescaled time, the canonical zone is
//! `[-π/d, π/d)`, bands are numbered from 1.

pub mod band_structure;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod initial_states;
pub mod io;
pub mod momentum_dynamics;
pub mod observables;
pub mod oracle;
pub mod position_space;
pub mod spectral;
pub mod validation;

pub use band_structure::{
    band_antiderivative, berry_connection_diag, solve_bands, BandSolver, BandStructure, CrystalPotential,
    FieldParams, PhaseTable, UnitSystem,
};
pub use error::{Error, Result};
pub use grid::KGrid;
pub use initial_states::{gaussian_state, near_bloch_state, wannier_state, MomentumState, StateKind};
pub use momentum_dynamics::{
    evolve_decoupled, mean_crystal_momentum, phase_factor, DecoupledPropagator, EvolvedState, ShiftMode,
};
