//! OFDM packet generation and demapping.
//!
//! Each symbol places square-QAM points on the used subcarriers, runs an
//! inverse DFT of size `n_subcarriers * oversampling_factor` (ideal
//! zero-insertion interpolation) and prepends an oversampled cyclic prefix.
//! Every `oversampling_factor`-th output sample is therefore exactly the
//! symbol-rate OFDM signal.

use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;

use crate::config::{dbm_to_amplitude, WaveformParams};
use crate::dsp::{fft, ifft};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::signal::{mean_square, ComplexBasebandSignal};

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    /// Oversampled transmit signal with unit average power.
    pub signal: ComplexBasebandSignal,
    /// Training samples at the oversampled rate.
    pub training_range: Range<usize>,
    pub payload_range: Range<usize>,
    /// Start index of each OFDM symbol, cyclic prefix included.
    pub symbol_boundaries: Vec<usize>,
    /// QAM indices per symbol, in [`used_subcarriers`] order.
    pub symbols: Vec<Vec<usize>>,
    pub oversampling_factor: usize,
}

impl Packet {
    /// The same packet at the symbol rate.
    pub fn symbol_rate_signal(&self) -> ComplexBasebandSignal {
        decimate(&self.signal, self.oversampling_factor)
    }

    pub fn training_range_symbol_rate(&self) -> Range<usize> {
        self.training_range.start / self.oversampling_factor
            ..self.training_range.end / self.oversampling_factor
    }

    pub fn payload_range_symbol_rate(&self) -> Range<usize> {
        self.payload_range.start / self.oversampling_factor
            ..self.payload_range.end / self.oversampling_factor
    }
}

/// Keeps every `factor`-th sample starting at index 0.
pub fn decimate(sig: &ComplexBasebandSignal, factor: usize) -> ComplexBasebandSignal {
    let factor = factor.max(1);
    let samples = sig.samples().iter().step_by(factor).copied().collect();
    ComplexBasebandSignal::from_parts_unchecked(samples, sig.sample_rate_hz() / factor as f64)
}

/// Signed frequency indices of the data-bearing subcarriers. Guard
/// subcarriers are taken from the band edges, Nyquist bin first.
pub fn used_subcarriers(wp: &WaveformParams) -> Vec<isize> {
    let n = wp.n_subcarriers as isize;
    let mut bins: Vec<isize> = (-(n / 2)..n - n / 2).collect();
    let mut by_edge = bins.clone();
    by_edge.sort_by_key(|&k| (std::cmp::Reverse(k.abs()), k));
    let guards: Vec<isize> = by_edge.into_iter().take(wp.guard_subcarriers).collect();
    bins.retain(|k| !guards.contains(k));
    bins
}

fn qam_side(order: usize) -> usize {
    (order as f64).sqrt().round() as usize
}

fn qam_scale(order: usize) -> f64 {
    (2.0 * (order as f64 - 1.0) / 3.0).sqrt()
}

/// Unit-energy square-QAM point for `index`.
pub fn qam_point(index: usize, order: usize) -> Complex64 {
    let side = qam_side(order);
    let level = |a: usize| (2 * a) as f64 - (side as f64 - 1.0);
    Complex64::new(level(index % side), level(index / side)) / qam_scale(order)
}

/// Nearest square-QAM index for a unit-energy point.
pub fn qam_decide(point: Complex64, order: usize) -> usize {
    let side = qam_side(order);
    let p = point * qam_scale(order);
    let pick = |v: f64| {
        let a = ((v + side as f64 - 1.0) / 2.0).round();
        a.clamp(0.0, side as f64 - 1.0) as usize
    };
    pick(p.re) + side * pick(p.im)
}

fn bin_index(k: isize, m: usize) -> usize {
    k.rem_euclid(m as isize) as usize
}

pub fn generate_packet(wp: &WaveformParams, seed: u64) -> Result<Packet> {
    if let Some(v) = wp.violations().into_iter().next() {
        return Err(Error::Config(format!("{}: {}", v.field, v.message)));
    }
    let os = wp.oversampling_factor;
    let m = wp.n_subcarriers * os;
    let cp = wp.cp_len * os;
    let used = used_subcarriers(wp);
    let amp = m as f64 / (used.len() as f64).sqrt();
    let mut rng = rng_from_seed(seed);

    let mut samples = Vec::with_capacity(wp.symbols_per_packet * (m + cp));
    let mut boundaries = Vec::with_capacity(wp.symbols_per_packet);
    let mut symbols = Vec::with_capacity(wp.symbols_per_packet);
    for _ in 0..wp.symbols_per_packet {
        let idx: Vec<usize> = (0..used.len())
            .map(|_| rng.random_range(0..wp.constellation_order))
            .collect();
        let mut spec = vec![Complex64::new(0.0, 0.0); m];
        for (&k, &i) in used.iter().zip(&idx) {
            spec[bin_index(k, m)] = qam_point(i, wp.constellation_order) * amp;
        }
        let body = ifft(&spec);
        boundaries.push(samples.len());
        samples.extend_from_slice(&body[m - cp..]);
        samples.extend_from_slice(&body);
        symbols.push(idx);
    }
    let train_end = wp.training_symbols() * (m + cp);
    let total = samples.len();
    Ok(Packet {
        signal: ComplexBasebandSignal::from_parts_unchecked(samples, wp.sample_rate_hz()),
        training_range: 0..train_end,
        payload_range: train_end..total,
        symbol_boundaries: boundaries,
        symbols,
        oversampling_factor: os,
    })
}

/// Recovers QAM indices from a signal sampled at `oversampling` times the
/// symbol rate, assuming unit average power and no channel.
pub fn demap(
    samples: &[Complex64],
    wp: &WaveformParams,
    oversampling: usize,
) -> Result<Vec<Vec<usize>>> {
    let m = wp.n_subcarriers * oversampling;
    let cp = wp.cp_len * oversampling;
    let sym_len = m + cp;
    if !samples.len().is_multiple_of(sym_len) {
        return Err(Error::InvalidArgument(format!(
            "length {} is not a whole number of {}-sample symbols",
            samples.len(),
            sym_len
        )));
    }
    let used = used_subcarriers(wp);
    let amp = m as f64 / (used.len() as f64).sqrt();
    Ok(samples
        .chunks(sym_len)
        .map(|sym| {
            let spec = fft(&sym[cp..]);
            used.iter()
                .map(|&k| qam_decide(spec[bin_index(k, m)] / amp, wp.constellation_order))
                .collect()
        })
        .collect())
}

/// Scales `sig` so that its average power is `target_dbm`. A target of
/// `-inf` returns an all-zero signal.
pub fn scale_to_power(
    sig: &ComplexBasebandSignal,
    target_dbm: f64,
    ref_impedance_ohm: f64,
) -> Result<ComplexBasebandSignal> {
    if sig.is_empty() {
        return Err(Error::EmptySignal);
    }
    if target_dbm == f64::NEG_INFINITY {
        return Ok(ComplexBasebandSignal::zeros(
            sig.len(),
            sig.sample_rate_hz(),
        ));
    }
    let ms = sig.mean_square();
    if ms == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let want = dbm_to_amplitude(target_dbm, ref_impedance_ohm).powi(2);
    Ok(sig.scaled(Complex64::new((want / ms).sqrt(), 0.0)))
}

/// Peak-to-average power ratio in dB.
pub fn papr(sig: &ComplexBasebandSignal) -> Result<f64> {
    if sig.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mean = mean_square(sig.samples());
    if mean == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let peak = sig
        .samples()
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}
