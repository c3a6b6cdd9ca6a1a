//! The full transmit, self-interference channel and receive path.
//!
//! Everything up to the ADC runs at the oversampled rate. The receiver then
//! keeps every `oversampling_factor`-th sample and quantizes. Besides the
//! ADC output the chain re-runs the receive path on each input alone so
//! that residual self-interference, desired signal and noise can be
//! separated exactly when scoring a canceller.

use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::{
    db_to_amplitude_ratio, db_to_power_ratio, derive_gains, GainSet, SimConfig, TransceiverParams,
};
use crate::dsp::sparse_fir;
use crate::error::{Error, Result};
use crate::impairments::{
    adc_full_scale, adc_quantize, bb_apply, lna_apply, noise, pa_apply, rx_downconvert,
    tx_iq_modulate, Hammerstein, PhaseNoiseTrace,
};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::signal::ComplexBasebandSignal;
use crate::waveform::{decimate, scale_to_power, Packet};

pub use crate::measure::measure_power_dbm;

/// Leakage path from the PA output to the LNA input.
#[derive(Debug, Clone, PartialEq)]
pub struct SiChannel {
    /// Circulator leakage tap followed by the diffuse taps, before RF
    /// cancellation.
    pub taps: Vec<Complex64>,
    /// Samples between taps at the simulation rate.
    pub tap_spacing: usize,
    pub k_factor_db: f64,
    pub rf_cancel_db: f64,
}

impl SiChannel {
    /// A single zero-delay tap with the given total attenuation.
    pub fn line_of_sight(attenuation_db: f64) -> Self {
        Self {
            taps: vec![Complex64::new(db_to_amplitude_ratio(-attenuation_db), 0.0)],
            tap_spacing: 1,
            k_factor_db: f64::INFINITY,
            rf_cancel_db: 0.0,
        }
    }

    /// Taps including the RF cancellation attenuation.
    pub fn composite_taps(&self) -> Vec<Complex64> {
        let g = db_to_amplitude_ratio(-self.rf_cancel_db);
        self.taps.iter().map(|t| t * g).collect()
    }

    /// Power of the first tap over the summed power of the rest.
    pub fn los_to_nlos_ratio(&self) -> f64 {
        let nlos: f64 = self.taps[1..].iter().map(|t| t.norm_sqr()).sum();
        self.taps[0].norm_sqr() / nlos
    }

    pub fn apply(&self, s: &ComplexBasebandSignal) -> ComplexBasebandSignal {
        s.with_samples(sparse_fir(
            s.samples(),
            &self.composite_taps(),
            self.tap_spacing,
        ))
    }
}

/// Rician leakage channel: a deterministic real tap at the circulator
/// isolation and `n_nlos_taps` Gaussian taps one symbol apart whose total
/// power sits `k_factor_db` below it.
pub fn draw_channel(params: &TransceiverParams, tap_spacing: usize, seed: u64) -> SiChannel {
    let los = db_to_amplitude_ratio(-params.circulator_isolation_db);
    let mut taps = vec![Complex64::new(los, 0.0)];
    if params.n_nlos_taps > 0 {
        let mut rng = rng_from_seed(seed);
        let raw: Vec<Complex64> = (0..params.n_nlos_taps)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let energy: f64 = raw.iter().map(|t| t.norm_sqr()).sum();
        let target = los * los / db_to_power_ratio(params.k_factor_db);
        let g = (target / energy).sqrt();
        taps.extend(raw.into_iter().map(|t| t * g));
    }
    SiChannel {
        taps,
        tap_spacing: tap_spacing.max(1),
        k_factor_db: params.k_factor_db,
        rf_cancel_db: params.rf_cancellation_db,
    }
}

/// Oversampled signals at the named block outputs for the combined input.
#[derive(Debug, Clone, PartialEq)]
pub struct StageCaptures {
    pub pa: ComplexBasebandSignal,
    pub lna: ComplexBasebandSignal,
    pub bb: ComplexBasebandSignal,
    pub adc: ComplexBasebandSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Pa,
    Lna,
    Bb,
    Adc,
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pa" => Ok(Stage::Pa),
            "lna" => Ok(Stage::Lna),
            "bb" => Ok(Stage::Bb),
            "adc" => Ok(Stage::Adc),
            other => Err(Error::Parse(format!("unknown stage {other:?}"))),
        }
    }
}

impl StageCaptures {
    pub fn get(&self, stage: Stage) -> &ComplexBasebandSignal {
        match stage {
            Stage::Pa => &self.pa,
            Stage::Lna => &self.lna,
            Stage::Bb => &self.bb,
            Stage::Adc => &self.adc,
        }
    }
}

/// ADC output plus its exact decomposition, all at the symbol rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub y: ComplexBasebandSignal,
    /// Receive path driven by the self-interference alone (DC included).
    pub si_only: ComplexBasebandSignal,
    pub desired_only: ComplexBasebandSignal,
    /// Receiver noise as seen after the chain, plus the quantization error
    /// of `y`.
    pub noise_only: ComplexBasebandSignal,
    /// Known digital transmit samples (unit average power).
    pub x: ComplexBasebandSignal,
    pub training_range: Range<usize>,
    pub payload_range: Range<usize>,
    pub gains: GainSet,
    pub channel: SiChannel,
    pub adc_full_scale: f64,
    /// `y` minus the unquantized receiver output.
    pub quantization_error: ComplexBasebandSignal,
    pub stages: StageCaptures,
}

struct Receiver<'a> {
    lna: Hammerstein,
    pn: &'a PhaseNoiseTrace,
    gains: &'a GainSet,
    params: &'a TransceiverParams,
    os: usize,
}

impl Receiver<'_> {
    /// Returns the LNA output, the baseband output and the decimated signal.
    fn run(
        &self,
        r: &ComplexBasebandSignal,
    ) -> Result<(
        ComplexBasebandSignal,
        ComplexBasebandSignal,
        ComplexBasebandSignal,
    )> {
        let lna = lna_apply(r, &self.lna);
        let mixed = rx_downconvert(&lna, self.pn, self.gains, self.params.rx_lpf_bw_hz)?;
        let bb = bb_apply(&mixed, &self.gains.beta_bb, self.params.even_order_form);
        let dec = decimate(&bb, self.os);
        Ok((lna, bb, dec))
    }
}

fn desired_at_input(
    desired: &Packet,
    cfg: &SimConfig,
    len: usize,
    fs: f64,
    training_end: usize,
) -> Result<ComplexBasebandSignal> {
    let sig = &desired.signal;
    if sig.len() != len {
        return Err(Error::LengthMismatch {
            what: "desired packet",
            left: len,
            right: sig.len(),
        });
    }
    if sig.sample_rate_hz() != fs {
        return Err(Error::SampleRateMismatch(fs, sig.sample_rate_hz()));
    }
    let p = &cfg.transceiver;
    let level = p.input_noise_dbm() + cfg.link.desired_snr_db;
    let mut d = scale_to_power(sig, level, p.ref_impedance_ohm)?.into_samples();
    if !cfg.link.desired_in_training {
        d[..training_end].fill(Complex64::new(0.0, 0.0));
    }
    Ok(ComplexBasebandSignal::from_parts_unchecked(d, fs))
}

/// Runs one packet through the transceiver.
///
/// Phase-noise and thermal-noise draws are keyed from `seed`, so repeated
/// calls with the same arguments give identical outputs.
pub fn run_chain(
    packet: &Packet,
    desired: Option<&Packet>,
    cfg: &SimConfig,
    channel: &SiChannel,
    seed: u64,
) -> Result<ChainOutput> {
    cfg.validate()?;
    let p = &cfg.transceiver;
    let wp = &cfg.waveform;
    let os = wp.oversampling_factor;
    let fs = wp.sample_rate_hz();
    if packet.signal.sample_rate_hz() != fs {
        return Err(Error::SampleRateMismatch(
            fs,
            packet.signal.sample_rate_hz(),
        ));
    }
    if packet.oversampling_factor != os {
        return Err(Error::InvalidArgument(format!(
            "packet oversampling {} differs from configured {os}",
            packet.oversampling_factor
        )));
    }
    let n = packet.signal.len();
    let gains = derive_gains(p)?;

    let pn_tx = PhaseNoiseTrace::wiener(
        n,
        p.pn_linewidth_hz,
        fs,
        derive_seed(seed, stream::TX_PHASE_NOISE),
    );
    let pn_rx = if p.shared_oscillator {
        pn_tx.clone()
    } else {
        PhaseNoiseTrace::wiener(
            n,
            p.pn_linewidth_hz,
            fs,
            derive_seed(seed, stream::RX_PHASE_NOISE),
        )
    };

    // Transmitter.
    let x_dac = scale_to_power(&packet.signal, p.dac_output_dbm, p.ref_impedance_ohm)?;
    let z = tx_iq_modulate(&x_dac, &gains, &pn_tx)?.scaled(gains.beta_vga);
    let pa = Hammerstein {
        beta1: gains.beta_pa_1,
        beta3: gains.beta_pa_3,
        memory: p.pa_memory_taps.clone(),
        tap_spacing: os,
    };
    let pa_out = pa_apply(&z, &pa);
    let si = channel.apply(&pa_out);

    // Receiver inputs.
    let desired_in = match desired {
        Some(d) => desired_at_input(d, cfg, n, fs, packet.training_range.end)?,
        None => ComplexBasebandSignal::zeros(n, fs),
    };
    let thermal = noise(
        n,
        fs,
        p.input_noise_dbm(),
        wp.bandwidth_hz,
        p.ref_impedance_ohm,
        derive_seed(seed, stream::THERMAL_NOISE),
    );
    let total_in = si.add(&desired_in)?.add(&thermal)?;

    let rx = Receiver {
        lna: Hammerstein::memoryless(gains.beta_lna_1, gains.beta_lna_3),
        pn: &pn_rx,
        gains: &gains,
        params: p,
        os,
    };
    let (lna_out, bb_out, total) = rx.run(&total_in)?;
    let full_scale = adc_full_scale(&total, p.papr_db);
    if !(full_scale > 0.0) {
        return Err(Error::ZeroSignal);
    }
    let y = adc_quantize(&total, p.adc_bits, full_scale)?;
    let quant_err = y.sub(&total)?;

    let (_, _, idle) = rx.run(&ComplexBasebandSignal::zeros(n, fs))?;
    let (_, _, si_only) = rx.run(&si)?;
    let desired_only = rx.run(&desired_in)?.2.sub(&idle)?;
    let noise_only = rx.run(&thermal)?.2.sub(&idle)?.add(&quant_err)?;

    Ok(ChainOutput {
        x: packet.symbol_rate_signal(),
        training_range: packet.training_range_symbol_rate(),
        payload_range: packet.payload_range_symbol_rate(),
        stages: StageCaptures {
            pa: pa_out,
            lna: lna_out,
            bb: bb_out,
            adc: y.clone(),
        },
        y,
        si_only,
        desired_only,
        noise_only,
        gains,
        channel: channel.clone(),
        adc_full_scale: full_scale,
        quantization_error: quant_err,
    })
}
