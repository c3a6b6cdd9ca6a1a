//! Analog impairment blocks as pure transforms on complex envelopes.
//!
//! Odd-order RF nonlinearities are represented by the envelope terms that
//! survive the receive low-pass filter, e.g. `3·β₃·|s|²·s` for a cubic.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{dbm_to_amplitude, EvenOrderForm, GainSet};
use crate::dsp::{brickwall_lowpass, sparse_fir};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::signal::ComplexBasebandSignal;

/// Oscillator phase, one value per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseNoiseTrace {
    pub theta: Vec<f64>,
}

impl PhaseNoiseTrace {
    pub fn zeros(len: usize) -> Self {
        Self {
            theta: vec![0.0; len],
        }
    }

    /// Wiener phase noise of a free-running oscillator with the given
    /// 3 dB linewidth.
    pub fn wiener(len: usize, linewidth_hz: f64, sample_rate_hz: f64, seed: u64) -> Self {
        let mut theta = vec![0.0; len];
        if linewidth_hz > 0.0 && len > 1 {
            let sigma = (2.0 * std::f64::consts::PI * linewidth_hz / sample_rate_hz).sqrt();
            let mut rng = rng_from_seed(seed);
            for n in 1..len {
                let step: f64 = rng.sample(StandardNormal);
                theta[n] = theta[n - 1] + sigma * step;
            }
        }
        Self { theta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Static polynomial followed by a FIR memory filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Hammerstein {
    pub beta1: Complex64,
    pub beta3: Complex64,
    pub memory: Vec<Complex64>,
    /// Distance in samples between memory taps.
    pub tap_spacing: usize,
}

impl Hammerstein {
    pub fn memoryless(beta1: Complex64, beta3: Complex64) -> Self {
        Self {
            beta1,
            beta3,
            memory: vec![Complex64::new(1.0, 0.0)],
            tap_spacing: 1,
        }
    }

    pub fn apply(&self, s: &ComplexBasebandSignal) -> ComplexBasebandSignal {
        let poly = odd_order_envelope(s.samples(), &[(1, self.beta1), (3, self.beta3)]);
        let out = if self.memory.len() == 1 && self.memory[0] == Complex64::new(1.0, 0.0) {
            poly
        } else {
            sparse_fir(&poly, &self.memory, self.tap_spacing)
        };
        s.with_samples(out)
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// In-band envelope of `Σ β_q (s e^{jΔ} + s̄ e^{-jΔ})^q` for odd `q`:
/// `Σ β_q · C(q, (q+1)/2) · s^{(q+1)/2} · s̄^{(q-1)/2}`.
pub fn odd_order_envelope(s: &[Complex64], terms: &[(u32, Complex64)]) -> Vec<Complex64> {
    let coefs: Vec<(u32, Complex64)> = terms
        .iter()
        .filter(|(_, b)| b.norm() != 0.0)
        .map(|&(q, b)| {
            assert!(
                !q.is_multiple_of(2),
                "only odd orders have an in-band envelope term"
            );
            (q, b * binomial(q, (q + 1) / 2))
        })
        .collect();
    s.iter()
        .map(|&v| {
            let p = v.norm_sqr();
            coefs
                .iter()
                .map(|&(q, c)| c * v * p.powi(((q - 1) / 2) as i32))
                .sum()
        })
        .collect()
}

fn check_len(what: &'static str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { what, left, right });
    }
    Ok(())
}

/// `(γ·x + λ·x̄)·e^{jθ}`.
pub fn tx_iq_modulate(
    x: &ComplexBasebandSignal,
    gains: &GainSet,
    pn: &PhaseNoiseTrace,
) -> Result<ComplexBasebandSignal> {
    check_len("phase noise trace", x.len(), pn.len())?;
    let out = x
        .samples()
        .iter()
        .zip(&pn.theta)
        .map(|(&v, &th)| {
            (gains.gamma_tx * v + gains.lambda_tx * v.conj()) * Complex64::from_polar(1.0, th)
        })
        .collect();
    Ok(x.with_samples(out))
}

pub fn pa_apply(s: &ComplexBasebandSignal, h: &Hammerstein) -> ComplexBasebandSignal {
    h.apply(s)
}

pub fn lna_apply(s: &ComplexBasebandSignal, h: &Hammerstein) -> ComplexBasebandSignal {
    h.apply(s)
}

/// Removes the receive oscillator phase, low-pass filters, then applies
/// the receive IQ imbalance. `None` for the cutoff keeps the full band.
pub fn rx_downconvert(
    s: &ComplexBasebandSignal,
    pn: &PhaseNoiseTrace,
    gains: &GainSet,
    lpf_bw_hz: Option<f64>,
) -> Result<ComplexBasebandSignal> {
    check_len("phase noise trace", s.len(), pn.len())?;
    let nyquist = s.sample_rate_hz() / 2.0;
    let mut v: Vec<Complex64> = s
        .samples()
        .iter()
        .zip(&pn.theta)
        .map(|(&v, &th)| v * Complex64::from_polar(1.0, -th))
        .collect();
    if let Some(bw) = lpf_bw_hz {
        if !(bw > 0.0) || bw > nyquist {
            return Err(Error::InvalidArgument(format!(
                "low-pass cutoff {bw} Hz outside (0, {nyquist}] Hz"
            )));
        }
        if bw < nyquist {
            v = brickwall_lowpass(&v, s.sample_rate_hz(), bw);
        }
    }
    let out = v
        .into_iter()
        .map(|r| gains.gamma_rx * r + gains.lambda_rx * r.conj())
        .collect();
    Ok(s.with_samples(out))
}

/// `β₀ + β₁·r + β₂·r²` (or `β₂·|r|²`), where `β₀` is the DC offset.
pub fn bb_apply(
    s: &ComplexBasebandSignal,
    beta_bb: &[Complex64; 3],
    form: EvenOrderForm,
) -> ComplexBasebandSignal {
    let [b0, b1, b2] = *beta_bb;
    let out = s
        .samples()
        .iter()
        .map(|&r| {
            let even = match form {
                EvenOrderForm::Square => r * r,
                EvenOrderForm::AbsSquare => Complex64::new(r.norm_sqr(), 0.0),
            };
            b0 + b1 * r + b2 * even
        })
        .collect();
    s.with_samples(out)
}

/// ADC full scale for a signal: complex RMS plus the configured headroom.
pub fn adc_full_scale(s: &ComplexBasebandSignal, papr_db: f64) -> f64 {
    s.mean_square().sqrt() * 10f64.powf(papr_db / 20.0)
}

/// Clips I and Q to `±full_scale` and rounds each to one of `2^bits`
/// mid-rise levels.
pub fn adc_quantize(
    s: &ComplexBasebandSignal,
    bits: u32,
    full_scale: f64,
) -> Result<ComplexBasebandSignal> {
    if !(full_scale > 0.0 && full_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "full scale must be positive, got {full_scale}"
        )));
    }
    if !(1..=52).contains(&bits) {
        return Err(Error::InvalidArgument(format!(
            "adc bits must be in 1..=52, got {bits}"
        )));
    }
    let half = 2f64.powi(bits as i32 - 1);
    let step = full_scale / half;
    let q = |v: f64| ((v / step).floor().clamp(-half, half - 1.0) + 0.5) * step;
    let out = s
        .samples()
        .iter()
        .map(|v| Complex64::new(q(v.re), q(v.im)))
        .collect();
    Ok(s.with_samples(out))
}

/// Circular complex Gaussian noise whose power inside `±band_hz/2` is
/// `noise_dbm`. With `band_hz` at or above the sample rate the noise is
/// white over the whole simulated band.
pub fn noise(
    len: usize,
    sample_rate_hz: f64,
    noise_dbm: f64,
    band_hz: f64,
    ref_impedance_ohm: f64,
    seed: u64,
) -> ComplexBasebandSignal {
    if noise_dbm == f64::NEG_INFINITY || len == 0 {
        return ComplexBasebandSignal::zeros(len, sample_rate_hz);
    }
    let inband_ms = dbm_to_amplitude(noise_dbm, ref_impedance_ohm).powi(2);
    let limited = band_hz < sample_rate_hz;
    let total_ms = if limited {
        inband_ms * sample_rate_hz / band_hz
    } else {
        inband_ms
    };
    let sigma = (total_ms / 2.0).sqrt();
    let mut rng = rng_from_seed(seed);
    let mut v: Vec<Complex64> = (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * sigma
        })
        .collect();
    if limited {
        v = brickwall_lowpass(&v, sample_rate_hz, band_hz / 2.0);
    }
    ComplexBasebandSignal::from_parts_unchecked(v, sample_rate_hz)
}

pub fn add_noise(
    s: &ComplexBasebandSignal,
    noise_dbm: f64,
    band_hz: f64,
    ref_impedance_ohm: f64,
    seed: u64,
) -> ComplexBasebandSignal {
    if noise_dbm == f64::NEG_INFINITY {
        return s.clone();
    }
    let n = noise(
        s.len(),
        s.sample_rate_hz(),
        noise_dbm,
        band_hz,
        ref_impedance_ohm,
        seed,
    );
    let out = s
        .samples()
        .iter()
        .zip(n.samples())
        .map(|(a, b)| a + b)
        .collect();
    s.with_samples(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{derive_gains, TransceiverParams};
    use crate::measure::{measure_power_dbm, tone_amplitude};
    use std::f64::consts::PI;

    const FS: f64 = 80e6;

    fn tone(n: usize, bin: isize, amp: f64) -> ComplexBasebandSignal {
        let v = (0..n)
            .map(|k| Complex64::from_polar(amp, 2.0 * PI * bin as f64 * k as f64 / n as f64))
            .collect();
        ComplexBasebandSignal::new(v, FS).unwrap()
    }

    fn bin_amp(s: &ComplexBasebandSignal, bin: isize) -> f64 {
        let f = bin as f64 * FS / s.len() as f64;
        tone_amplitude(s.samples(), FS, f).norm()
    }

    fn gains() -> GainSet {
        derive_gains(&TransceiverParams::default()).unwrap()
    }

    fn close(a: &ComplexBasebandSignal, b: &ComplexBasebandSignal, tol: f64) -> bool {
        a.samples()
            .iter()
            .zip(b.samples())
            .all(|(u, v)| (u - v).norm() <= tol)
    }

    #[test]
    fn wiener_increments_have_expected_variance() {
        let pn = PhaseNoiseTrace::wiener(200_000, 1e4, FS, 3);
        assert_eq!(pn.theta[0], 0.0);
        let inc: Vec<f64> = pn.theta.windows(2).map(|w| w[1] - w[0]).collect();
        let var = inc.iter().map(|d| d * d).sum::<f64>() / inc.len() as f64;
        let want = 2.0 * PI * 1e4 / FS;
        assert!((var / want - 1.0).abs() < 0.02, "{var} vs {want}");
        assert!(PhaseNoiseTrace::wiener(10, 0.0, FS, 1)
            .theta
            .iter()
            .all(|&t| t == 0.0));
    }

    #[test]
    fn ideal_modulator_is_identity() {
        let mut g = gains();
        g.lambda_tx = Complex64::new(0.0, 0.0);
        let x = tone(64, 3, 0.5);
        let y = tx_iq_modulate(&x, &g, &PhaseNoiseTrace::zeros(64)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn real_input_with_balanced_gains_only_rotates() {
        let mut g = gains();
        g.gamma_tx = Complex64::new(0.5, 0.0);
        g.lambda_tx = Complex64::new(0.5, 0.0);
        let v = (0..32)
            .map(|k| Complex64::new((k as f64).cos(), 0.0))
            .collect();
        let x = ComplexBasebandSignal::new(v, FS).unwrap();
        let pn = PhaseNoiseTrace::wiener(32, 1e5, FS, 4);
        let y = tx_iq_modulate(&x, &g, &pn).unwrap();
        for ((a, b), th) in x.samples().iter().zip(y.samples()).zip(&pn.theta) {
            assert!((a * Complex64::from_polar(1.0, *th) - b).norm() < 1e-15);
        }
    }

    #[test]
    fn modulator_image_is_irr_below_tone() {
        let y = tx_iq_modulate(
            &tone(1024, 37, 1.0),
            &gains(),
            &PhaseNoiseTrace::zeros(1024),
        )
        .unwrap();
        let ratio = 20.0 * (bin_amp(&y, 37) / bin_amp(&y, -37)).log10();
        assert!((ratio - 30.0).abs() < 1e-9, "{ratio}");
    }

    #[test]
    fn length_mismatch_is_reported() {
        let x = tone(16, 1, 1.0);
        assert!(matches!(
            tx_iq_modulate(&x, &gains(), &PhaseNoiseTrace::zeros(15)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn linear_pa_is_pure_gain_and_fir() {
        let x = tone(64, 5, 0.3);
        let h = Hammerstein::memoryless(Complex64::new(2.0, 1.0), Complex64::new(0.0, 0.0));
        assert!(close(
            &pa_apply(&x, &h),
            &x.scaled(Complex64::new(2.0, 1.0)),
            1e-15
        ));

        let taps = vec![Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.0)];
        let h = Hammerstein {
            beta1: Complex64::new(1.0, 0.0),
            beta3: Complex64::new(0.0, 0.0),
            memory: taps.clone(),
            tap_spacing: 1,
        };
        let y = pa_apply(&x, &h);
        let s = x.samples();
        for n in 0..s.len() {
            let want = s[n]
                + if n > 0 {
                    s[n - 1] * 0.2
                } else {
                    Complex64::new(0.0, 0.0)
                };
            assert!((y.samples()[n] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn lna_compression_is_small_at_minus_thirty_dbm() {
        let g = gains();
        let h = Hammerstein::memoryless(g.beta_lna_1, g.beta_lna_3);
        let a = dbm_to_amplitude(-30.0, 50.0);
        let x = tone(256, 9, a);
        let y = lna_apply(&x, &h);
        let gain_db = 20.0 * (bin_amp(&y, 9) / a).log10();
        let comp = 20.0 - gain_db;
        assert!((0.0..0.1).contains(&comp), "compression {comp} dB");
    }

    #[test]
    fn third_order_part_scales_as_cube() {
        let g = gains();
        let h = Hammerstein::memoryless(g.beta_lna_1, g.beta_lna_3);
        let x: Vec<Complex64> = (0..64)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()) * 0.05)
            .collect();
        let x = ComplexBasebandSignal::new(x, FS).unwrap();
        let cubic = |s: &ComplexBasebandSignal| {
            let lin = s.scaled(g.beta_lna_1);
            lna_apply(s, &h).sub(&lin).unwrap().mean_square()
        };
        let ratio = cubic(&x.scaled(Complex64::new(2.0, 0.0))) / cubic(&x);
        assert!((ratio - 64.0).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn shared_oscillator_cancels_phase_noise() {
        let mut g = gains();
        g.lambda_tx = Complex64::new(0.0, 0.0);
        g.lambda_rx = Complex64::new(0.0, 0.0);
        let x = tone(128, 7, 0.2);
        let pn = PhaseNoiseTrace::wiener(128, 1e6, FS, 8);
        let up = tx_iq_modulate(&x, &g, &pn).unwrap();
        let down = rx_downconvert(&up, &pn, &g, None).unwrap();
        assert!(close(&down, &x, 1e-15));
    }

    #[test]
    fn ideal_downconverter_is_identity() {
        let mut g = gains();
        g.lambda_rx = Complex64::new(0.0, 0.0);
        let x = tone(64, 3, 1.0);
        let y = rx_downconvert(&x, &PhaseNoiseTrace::zeros(64), &g, Some(FS / 2.0)).unwrap();
        assert_eq!(x, y);
        assert!(rx_downconvert(&x, &PhaseNoiseTrace::zeros(64), &g, Some(FS)).is_err());
    }

    #[test]
    fn lowpass_keeps_band_fraction_of_white_noise() {
        let mut g = gains();
        g.lambda_rx = Complex64::new(0.0, 0.0);
        let w = noise(1 << 15, FS, -50.0, FS, 50.0, 21);
        let y = rx_downconvert(&w, &PhaseNoiseTrace::zeros(w.len()), &g, Some(10e6)).unwrap();
        let ratio = y.mean_square() / w.mean_square();
        assert!((ratio / 0.25 - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn demodulator_image_is_irr_below_tone() {
        let y = rx_downconvert(
            &tone(1024, -50, 1.0),
            &PhaseNoiseTrace::zeros(1024),
            &gains(),
            None,
        )
        .unwrap();
        let ratio = 20.0 * (bin_amp(&y, -50) / bin_amp(&y, 50)).log10();
        assert!((ratio - 30.0).abs() < 1e-9, "{ratio}");
    }

    #[test]
    fn baseband_block() {
        let x = tone(64, 4, 0.1);
        let lin = [
            Complex64::new(0.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert!(close(
            &bb_apply(&x, &lin, EvenOrderForm::Square),
            &x.scaled(Complex64::new(3.0, 0.0)),
            1e-15
        ));

        let dc = Complex64::new(0.01, -0.02);
        let z = bb_apply(
            &ComplexBasebandSignal::zeros(8, FS),
            &[dc, Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)],
            EvenOrderForm::Square,
        );
        assert!(z.samples().iter().all(|&v| v == dc));

        let y = bb_apply(
            &x,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            EvenOrderForm::Square,
        );
        assert!((bin_amp(&y, 8) - 0.5 * 0.01).abs() < 1e-15);
        let y = bb_apply(
            &x,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            EvenOrderForm::AbsSquare,
        );
        assert!((bin_amp(&y, 0) - 0.5 * 0.01).abs() < 1e-15);
    }

    #[test]
    fn twelve_bit_sqnr_of_full_scale_tone() {
        // Full-scale sinusoid on each rail.
        let x = tone(1 << 14, 333, 1.0);
        let y = adc_quantize(&x, 12, 1.0).unwrap();
        let err = y.sub(&x).unwrap().mean_square();
        let sqnr = 10.0 * (x.mean_square() / err).log10();
        assert!((sqnr - 74.0).abs() < 1.5, "{sqnr}");
    }

    #[test]
    fn fifty_two_bits_is_transparent_and_rails_clip() {
        let x = tone(256, 11, 0.7);
        let y = adc_quantize(&x, 52, 1.0).unwrap();
        assert!(close(&x, &y, 1e-12));
        let big = ComplexBasebandSignal::new(vec![Complex64::new(5.0, -5.0)], FS).unwrap();
        let q = adc_quantize(&big, 8, 1.0).unwrap().samples()[0];
        assert!((q.re - 1.0).abs() < 1.0 / 128.0 && (q.im + 1.0).abs() < 1.0 / 128.0);
        assert!(adc_quantize(&x, 8, 0.0).is_err());
    }

    #[test]
    fn noise_level_seed_and_sentinel() {
        let s = ComplexBasebandSignal::zeros(1 << 16, FS);
        let y = add_noise(&s, -101.0, 20e6, 50.0, 5);
        let p = measure_power_dbm(&y, 20e6, 50.0).unwrap();
        assert!((p + 101.0).abs() < 0.2, "{p}");
        // Band-limited: nothing outside ±10 MHz.
        let total = measure_power_dbm(&y, FS, 50.0).unwrap();
        assert!((total - p).abs() < 1e-6);
        assert_eq!(y, add_noise(&s, -101.0, 20e6, 50.0, 5));
        assert_ne!(y, add_noise(&s, -101.0, 20e6, 50.0, 6));
        let x = tone(64, 1, 1.0);
        assert_eq!(add_noise(&x, f64::NEG_INFINITY, 20e6, 50.0, 1), x);
    }

    #[test]
    fn envelope_binomials() {
        let s = [Complex64::new(0.3, -0.4)];
        let e = odd_order_envelope(
            &s,
            &[
                (1, Complex64::new(1.0, 0.0)),
                (3, Complex64::new(1.0, 0.0)),
                (5, Complex64::new(1.0, 0.0)),
            ],
        );
        let p = s[0].norm_sqr();
        let want = s[0] * (1.0 + 3.0 * p + 10.0 * p * p);
        assert!((e[0] - want).norm() < 1e-15);
    }
}
