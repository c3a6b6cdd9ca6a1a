//! Baseband simulator of a single-antenna full-duplex direct-conversion
//! transceiver, with a digital self-interference canceller built on an
//! orthogonalized least-squares fit.
//!
//! The crate is organised along the signal path:
//!
//! * [`config`] holds every numeric parameter and converts datasheet figures
//!   (dB gains, IIP2/IIP3, IRR) into complex model gains.
//! * [`waveform`] produces the OFDM transmit packet and the desired signal.
//! * [`impairments`] implements each analog block as a pure transform.
//! * [`chain`] wires the blocks into the full transmit/receive path.
//! * [`canceller`] builds the regressor matrix, solves the least-squares
//!   problem and implements the baseline cancellers.
//! * [`harness`] runs seeded Monte Carlo sweeps and writes CSV.

pub mod canceller;
pub mod chain;
pub mod config;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod impairments;
pub mod measure;
pub mod rng;
pub mod signal;
pub mod waveform;

pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use signal::ComplexBasebandSignal;
