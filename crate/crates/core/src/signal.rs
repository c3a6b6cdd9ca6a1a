//! The complex-envelope signal type shared by every block, plus the raw
//! dump format used by the CLI.
//!
//! Samples are voltages of the complex envelope; a sample of magnitude `a`
//! stands for a passband sinusoid of peak `a`, so the average power at a
//! reference impedance `R` is `mean|s|² / (2R)`.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Magic bytes at the start of a signal dump.
pub const DUMP_MAGIC: [u8; 4] = *b"FDXS";
/// Size of the dump header in bytes.
pub const DUMP_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBasebandSignal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl ComplexBasebandSignal {
    /// Wraps samples, rejecting NaN/Inf values and nonpositive rates.
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if samples
            .iter()
            .any(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn zeros(len: usize, sample_rate_hz: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            sample_rate_hz,
        }
    }

    /// Builds a signal of the same rate from new samples. Internal blocks
    /// only produce finite values from finite inputs, so this is unchecked.
    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        Self {
            samples,
            sample_rate_hz,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of `|s|²` in V².
    pub fn mean_square(&self) -> f64 {
        mean_square(&self.samples)
    }

    /// Mean power in watts at the given impedance.
    pub fn power_watts(&self, ref_impedance_ohm: f64) -> f64 {
        self.mean_square() / (2.0 * ref_impedance_ohm)
    }

    pub fn scaled(&self, gain: Complex64) -> Self {
        self.with_samples(self.samples.iter().map(|s| s * gain).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// Copy of the samples in `range`, at the same rate.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        self.with_samples(self.samples[range].to_vec())
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                what: "signal",
                left: self.len(),
                right: other.len(),
            });
        }
        if (self.sample_rate_hz - other.sample_rate_hz).abs() > 1e-9 * self.sample_rate_hz {
            return Err(Error::SampleRateMismatch(
                self.sample_rate_hz,
                other.sample_rate_hz,
            ));
        }
        Ok(())
    }

    /// Writes the dump format: 16-byte header (`FDXS`, u32 sample count,
    /// f64 sample rate) followed by interleaved little-endian f64 I/Q.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let count = u32::try_from(self.samples.len())
            .map_err(|_| Error::InvalidArgument("signal too long for dump format".into()))?;
        w.write_all(&DUMP_MAGIC)?;
        w.write_all(&count.to_le_bytes())?;
        w.write_all(&self.sample_rate_hz.to_le_bytes())?;
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; DUMP_HEADER_LEN];
        r.read_exact(&mut header)?;
        if header[..4] != DUMP_MAGIC {
            return Err(Error::Parse("bad dump magic".into()));
        }
        let count = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let rate = f64::from_le_bytes(header[8..16].try_into().unwrap());
        let mut samples = Vec::with_capacity(count);
        let mut buf = [0u8; 16];
        for _ in 0..count {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            samples.push(Complex64::new(re, im));
        }
        Self::new(samples, rate)
    }
}

pub fn mean_square(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_finite() {
        let s = vec![Complex64::new(f64::NAN, 0.0)];
        assert!(matches!(
            ComplexBasebandSignal::new(s, 1.0),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn dump_header_is_sixteen_bytes() {
        let sig = ComplexBasebandSignal::new(vec![Complex64::new(1.0, -2.0)], 80e6).unwrap();
        let mut buf = Vec::new();
        sig.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), DUMP_HEADER_LEN + 16);
        assert_eq!(&buf[..4], b"FDXS");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(buf[8..16].try_into().unwrap()), 80e6);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), -2.0);
    }

    proptest! {
        #[test]
        fn dump_round_trip(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..64),
                           rate in 1.0f64..1e9) {
            let sig = ComplexBasebandSignal::new(
                v.iter().map(|&(a, b)| Complex64::new(a, b)).collect(), rate).unwrap();
            let mut buf = Vec::new();
            sig.write_dump(&mut buf).unwrap();
            let back = ComplexBasebandSignal::read_dump(&buf[..]).unwrap();
            prop_assert_eq!(back, sig);
        }
    }
}
