//! Power and intercept measurements on simulated signals.

use num_complex::Complex64;

use crate::config::{amplitude_to_dbm, watts_to_dbm};
use crate::dsp::{fft, signed_bin};
use crate::error::{Error, Result};
use crate::signal::ComplexBasebandSignal;

/// Complex amplitude of the component at `freq_hz`, exact when the tone
/// completes a whole number of cycles over the block.
pub fn tone_amplitude(samples: &[Complex64], sample_rate_hz: f64, freq_hz: f64) -> Complex64 {
    let w = -2.0 * std::f64::consts::PI * freq_hz / sample_rate_hz;
    let sum: Complex64 = samples
        .iter()
        .enumerate()
        .map(|(n, &v)| v * Complex64::from_polar(1.0, w * n as f64))
        .sum();
    sum / samples.len() as f64
}

/// Power of the component at `freq_hz` in dBm.
pub fn tone_power_dbm(sig: &ComplexBasebandSignal, freq_hz: f64, ref_impedance_ohm: f64) -> f64 {
    let a = tone_amplitude(sig.samples(), sig.sample_rate_hz(), freq_hz);
    amplitude_to_dbm(a.norm(), ref_impedance_ohm)
}

/// Mean power inside `±band_hz/2` in dBm. A zero signal gives `-inf`.
pub fn measure_power_dbm(
    sig: &ComplexBasebandSignal,
    band_hz: f64,
    ref_impedance_ohm: f64,
) -> Result<f64> {
    if sig.is_empty() {
        return Err(Error::EmptySignal);
    }
    let n = sig.len();
    let ms = if band_hz >= sig.sample_rate_hz() {
        sig.mean_square()
    } else {
        let spec = fft(sig.samples());
        let df = sig.sample_rate_hz() / n as f64;
        let half = band_hz / 2.0 * (1.0 + 1e-12);
        let energy: f64 = spec
            .iter()
            .enumerate()
            .filter(|(k, _)| (signed_bin(*k, n) as f64 * df).abs() <= half)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        energy / (n as f64 * n as f64)
    };
    Ok(watts_to_dbm(ms / (2.0 * ref_impedance_ohm)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub offset: f64,
}

impl LineFit {
    pub fn at(&self, x: f64) -> f64 {
        self.offset + self.slope * x
    }
}

/// Ordinary least-squares straight line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "fit_line inputs",
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            available: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        offset: my - slope * mx,
    })
}

/// Result of a sweep-and-extrapolate intercept measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intercept {
    pub fundamental: LineFit,
    pub distortion: LineFit,
    /// Input level where the two fitted lines cross.
    pub input_dbm: f64,
}

/// Fits straight lines to the fundamental and distortion output powers
/// against input power and returns their crossing.
pub fn extrapolate_intercept(
    input_dbm: &[f64],
    fundamental_dbm: &[f64],
    distortion_dbm: &[f64],
) -> Result<Intercept> {
    let fundamental = fit_line(input_dbm, fundamental_dbm)?;
    let distortion = fit_line(input_dbm, distortion_dbm)?;
    let ds = fundamental.slope - distortion.slope;
    if ds.abs() < 1e-9 {
        return Err(Error::InvalidArgument("fitted lines are parallel".into()));
    }
    Ok(Intercept {
        fundamental,
        distortion,
        input_dbm: (distortion.offset - fundamental.offset) / ds,
    })
}
