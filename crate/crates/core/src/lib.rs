//! Photon-number filtering of a single cavity mode by a sequence of
//! two-level atoms whose Jaynes-Cummings detuning and coupling are swept in
//! time.
//!
//! Each atom couples the cavity states pairwise into families
//! `{|n-1, +>, |n, ->}` with coupling `g(t) sqrt(n)`. After the atom has left
//! the cavity and been detected in one of its levels, the photon distribution
//! is multiplied by a *filter function* of `n` (and shifted by one photon for
//! an upper-level detection). Repeating the process with fresh atoms sharpens
//! the filter.
//!
//! * [`pulses`]: Landau-Zener and Demkov-Kunike sweeps, closed-form filters.
//! * [`propagator`]: adaptive Runge-Kutta integration of a single family.
//! * [`field`]: photon-number distributions and their statistics.
//! * [`filtering`]: measurement projections and outcome sequences.
//! * [`analysis`]: maxima, zeros, widths and parameter sweeps.
//! * [`cli`]: the `cavity-filter` command-line front end.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod field;
pub mod filtering;
mod numerics;
pub mod propagator;
pub mod pulses;

pub use error::{Error, Result};
pub use field::PhotonDistribution;
pub use filtering::{
    apply_outcome, apply_sequence, AtomInjectionCase, FilterTable, FilteredState,
    MeasurementSequence, Outcome,
};
pub use propagator::{FamilyAmplitudes, IntegrationConfig};
pub use pulses::{DKParams, LZParams, PulseModel, TransferMatrix};

/// Crate version, embedded in every output file header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
