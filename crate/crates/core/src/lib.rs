//! Event-level simulator and analysis pipeline for a collinear type-II
//! parametric-downconversion source of polarization-entangled photon pairs.
//!
//! The crate is organized around the stages of the bench:
//!
//! - [`polcore`] — exact polarization-state algebra: pair states, wave-plate
//!   and polarizing-beam-splitter operators, joint detection probabilities,
//!   and the closed-form coincidence curves used as oracles for the Monte
//!   Carlo code.
//! - [`source`] — stochastic generation of photon-pair and background event
//!   streams: Poisson pair arrivals, position-dependent birefringent walkoff,
//!   half-length timing compensation, crystal fluorescence, and the
//!   aperture/bandwidth → indistinguishability map.
//! - [`bench`] — the optical bench as a discrete-event machine: 50/50
//!   beam-splitter routing, four analyzer/detector chains with efficiency,
//!   dark counts, dead time and jitter, AND-logic coincidence windows, and
//!   start-stop histograms.
//! - [`analysis`] — the statistical pipeline: accidental subtraction,
//!   visibility, Poisson-weighted sinusoidal fits, derived coincidences,
//!   the CHSH correlation E and parameter S with uncertainty propagation,
//!   and analyzer-convention calibration.
//! - [`io`] — columnar text formats for event/click streams, scan CSVs with
//!   header blocks, histogram CSVs, and key:value reports.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod polcore;
pub mod seeding;
pub mod source;

pub use error::{Error, Result};
