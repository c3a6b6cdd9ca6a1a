//! Independent reference computations shared by the integration tests and
//! the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use fdx_sim::config::{
    amplitude_to_dbm, dbm_to_amplitude, derive_gains, EvenOrderForm, GainSet, SimConfig,
};
use fdx_sim::impairments::{bb_apply, Hammerstein};
use fdx_sim::measure::{extrapolate_intercept, tone_amplitude, Intercept};
use fdx_sim::{Complex64, ComplexBasebandSignal};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    // Box-Muller, kept local so the oracle does not share code with the crate.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    Complex64::new(r * (2.0 * PI * u2).cos(), r * (2.0 * PI * u2).sin()) / 2f64.sqrt()
}

/// `(ΨᴴΨ)⁻¹Ψᴴy` by a dense LU solve.
pub fn normal_equations(columns: &[Vec<Complex64>], y: &[Complex64]) -> Vec<Complex64> {
    let n = y.len();
    let w = columns.len();
    let psi = DMatrix::from_fn(n, w, |i, j| columns[j][i]);
    let gram = psi.adjoint() * &psi;
    let rhs = psi.adjoint() * DVector::from_column_slice(y);
    let sol = gram.lu().solve(&rhs).expect("singular normal equations");
    sol.iter().copied().collect()
}

pub fn residual_power(columns: &[Vec<Complex64>], y: &[Complex64], w: &[Complex64]) -> f64 {
    (0..y.len())
        .map(|i| {
            let fit: Complex64 = columns.iter().zip(w).map(|(c, wk)| c[i] * wk).sum();
            (y[i] - fit).norm_sqr()
        })
        .sum::<f64>()
        / y.len() as f64
}

pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum();
    let den: f64 = b.iter().map(|v| v.norm_sqr()).sum();
    (num / den).sqrt()
}

fn fft(x: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(x.len()).process(x);
        let s = 1.0 / x.len() as f64;
        x.iter_mut().for_each(|v| *v *= s);
    } else {
        planner.plan_fft_forward(x.len()).process(x);
    }
}

/// Periodic envelope whose spectrum occupies DFT bins `-band..=band`.
pub fn random_envelope(n: usize, band: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for k in -(band as isize)..=band as isize {
        spec[k.rem_euclid(n as isize) as usize] = gaussian(rng) * n as f64;
    }
    fft(&mut spec, true);
    let rms = (spec.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    spec.iter().map(|v| v * scale / rms).collect()
}

/// Real passband nonlinearity applied numerically: forms
/// `a·e^{jΔ} + ā·e^{-jΔ}`, raises it to each power `q` with real gain
/// `β_q`, multiplies by `e^{-jΔ}` and keeps only bins within `±cutoff`.
/// `Δ(n)` is a carrier at bin `carrier` plus a slow periodic phase wobble.
pub fn passband_pipeline(
    a: &[Complex64],
    betas: &[(u32, f64)],
    carrier: usize,
    cutoff: usize,
) -> Vec<Complex64> {
    let n = a.len();
    let delta = |i: usize| {
        let t = i as f64 / n as f64;
        2.0 * PI * carrier as f64 * t + 0.3 * (2.0 * PI * t).sin()
    };
    let mut mixed: Vec<Complex64> = (0..n)
        .map(|i| {
            let rf = (a[i] * Complex64::from_polar(1.0, delta(i))).re * 2.0;
            let out: f64 = betas.iter().map(|&(q, b)| b * rf.powi(q as i32)).sum();
            Complex64::from_polar(out, -delta(i))
        })
        .collect();
    fft(&mut mixed, false);
    for (k, v) in mixed.iter_mut().enumerate() {
        let f = if k <= n / 2 { k } else { n - k };
        if f > cutoff {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    fft(&mut mixed, true);
    mixed
}

pub fn tone_pair(n: usize, bins: &[isize], amp: f64, fs: f64) -> ComplexBasebandSignal {
    let v = (0..n)
        .map(|k| {
            bins.iter()
                .map(|&b| Complex64::from_polar(amp, 2.0 * PI * b as f64 * k as f64 / n as f64))
                .sum()
        })
        .collect();
    ComplexBasebandSignal::new(v, fs).unwrap()
}

pub fn bin_dbm(s: &ComplexBasebandSignal, bin: isize, r: f64) -> f64 {
    let f = bin as f64 * s.sample_rate_hz() / s.len() as f64;
    amplitude_to_dbm(tone_amplitude(s.samples(), s.sample_rate_hz(), f).norm(), r)
}

const N: usize = 1024;
const FS: f64 = 80e6;

/// Two-tone third-order intercept of a memoryless block, tones at bins 20
/// and 27, product at 13, swept over `levels` (per-tone input dBm).
pub fn two_tone_iip3(h: &Hammerstein, levels: &[f64], r: f64) -> Intercept {
    let (mut fund, mut imd) = (Vec::new(), Vec::new());
    for &p in levels {
        let x = tone_pair(N, &[20, 27], dbm_to_amplitude(p, r), FS);
        let y = h.apply(&x);
        fund.push(bin_dbm(&y, 20, r));
        imd.push(bin_dbm(&y, 13, r));
    }
    input_referred(levels, &fund, &imd)
}

/// Second-order intercept of the baseband block. With the `r²` form the
/// product is the second harmonic of a single tone; with `|r|²` it is the
/// difference product of two tones.
pub fn bb_iip2(gains: &GainSet, form: EvenOrderForm, levels: &[f64], r: f64) -> Intercept {
    let beta = [Complex64::new(0.0, 0.0), gains.beta_bb[1], gains.beta_bb[2]];
    let (mut fund, mut prod) = (Vec::new(), Vec::new());
    for &p in levels {
        let a = dbm_to_amplitude(p, r);
        let (x, f, d) = match form {
            EvenOrderForm::Square => (tone_pair(N, &[15], a, FS), 15, 30),
            EvenOrderForm::AbsSquare => (tone_pair(N, &[15, 22], a, FS), 15, 7),
        };
        let y = bb_apply(&x, &beta, form);
        fund.push(bin_dbm(&y, f, r));
        prod.push(bin_dbm(&y, d, r));
    }
    input_referred(levels, &fund, &prod)
}

/// Intercept on the input axis: distortion and fundamental lines meet
/// where the output levels coincide.
fn input_referred(levels: &[f64], fund: &[f64], dist: &[f64]) -> Intercept {
    extrapolate_intercept(levels, fund, dist).unwrap()
}

pub fn pa_block(cfg: &SimConfig) -> Hammerstein {
    let g = derive_gains(&cfg.transceiver).unwrap();
    Hammerstein::memoryless(g.beta_pa_1, g.beta_pa_3)
}

pub fn lna_block(cfg: &SimConfig) -> Hammerstein {
    let g = derive_gains(&cfg.transceiver).unwrap();
    Hammerstein::memoryless(g.beta_lna_1, g.beta_lna_3)
}

/// Ratio in dB of the tone at `bin` to its image at `-bin`.
pub fn image_rejection_db(s: &ComplexBasebandSignal, bin: isize) -> f64 {
    bin_dbm(s, bin, 50.0) - bin_dbm(s, -bin, 50.0)
}

/// Which impairments the model-matched floor scenario keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloorScenario {
    /// Transmit and receive IQ imbalance, cubic PA, DC offset.
    TxCubic,
    /// Transmit and receive IQ imbalance, square-law baseband, DC offset.
    RxSquare,
}

/// Noise-free, line-of-sight chain whose nonlinearities the proposed
/// single-lag basis spans exactly.
pub fn floor_config(scenario: FloorScenario, bits: u32) -> SimConfig {
    let mut c = SimConfig::default();
    let t = &mut c.transceiver;
    t.thermal_noise_dbm = f64::NEG_INFINITY;
    t.lna_iip3_dbm = f64::INFINITY;
    t.n_nlos_taps = 0;
    t.adc_bits = bits;
    t.tx_image_phase_rad = 0.3;
    t.rx_image_phase_rad = -0.7;
    match scenario {
        FloorScenario::TxCubic => t.bb_iip2_dbm = f64::INFINITY,
        FloorScenario::RxSquare => {
            t.pa_iip3_dbm = f64::INFINITY;
            // Strong enough to matter, weak enough not to clip the converter.
            t.bb_iip2_dbm = 20.0;
        }
    }
    c
}

pub struct Floor {
    /// Payload residual relative to the self-interference, dB.
    pub residual_dbc: f64,
    /// Payload residual over payload quantization error, dB.
    pub over_quantization_db: f64,
}

pub fn model_matched_floor(scenario: FloorScenario, bits: u32, seed: u64) -> Floor {
    use fdx_sim::canceller::{cancel, BasisSpec};
    use fdx_sim::chain::{run_chain, SiChannel};
    use fdx_sim::signal::mean_square;
    use fdx_sim::waveform::generate_packet;

    let cfg = floor_config(scenario, bits);
    let pkt = generate_packet(&cfg.waveform, seed).unwrap();
    let ch = SiChannel::line_of_sight(cfg.transceiver.total_suppression_db());
    let out = run_chain(&pkt, None, &cfg, &ch, seed ^ 0x5a).unwrap();
    let spec = BasisSpec::proposed(1);
    let (e, _) = cancel(&out.y, &out.x, &spec, out.training_range.clone(), None).unwrap();
    let p = out.payload_range.clone();
    let res = mean_square(&e.samples()[p.clone()]);
    let si = mean_square(&out.si_only.samples()[p.clone()]);
    let q = mean_square(&out.quantization_error.samples()[p]);
    Floor {
        residual_dbc: 10.0 * (res / si).log10(),
        over_quantization_db: 10.0 * (res / q).log10(),
    }
}

/// Decibel gap `a − b` of two mean squares.
pub fn db_ratio(a: f64, b: f64) -> f64 {
    10.0 * (a / b).log10()
}

/// Relative change of `y` and of the self-interference component when the
/// shared oscillator goes from ideal to `linewidth_hz`, on a line-of-sight
/// chain with no noise, no far-end signal and a 52-bit converter.
pub fn phase_noise_invariance(linewidth_hz: f64, seed: u64) -> (f64, f64) {
    use fdx_sim::chain::{run_chain, SiChannel};
    use fdx_sim::waveform::generate_packet;

    let mut cfg = SimConfig::default();
    cfg.transceiver.thermal_noise_dbm = f64::NEG_INFINITY;
    cfg.transceiver.n_nlos_taps = 0;
    cfg.transceiver.adc_bits = 52;
    cfg.transceiver.shared_oscillator = true;
    let pkt = generate_packet(&cfg.waveform, seed).unwrap();
    let ch = SiChannel::line_of_sight(cfg.transceiver.total_suppression_db());
    cfg.transceiver.pn_linewidth_hz = 0.0;
    let clean = run_chain(&pkt, None, &cfg, &ch, seed).unwrap();
    cfg.transceiver.pn_linewidth_hz = linewidth_hz;
    let noisy = run_chain(&pkt, None, &cfg, &ch, seed).unwrap();
    (
        relative_error(noisy.y.samples(), clean.y.samples()),
        relative_error(noisy.si_only.samples(), clean.si_only.samples()),
    )
}
