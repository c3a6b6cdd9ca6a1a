//! Parameters, unit conversions and the mapping from datasheet figures to
//! complex model gains.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Peak amplitude (V) of a sinusoid carrying `p_dbm` into `ref_impedance_ohm`.
pub fn dbm_to_amplitude(p_dbm: f64, ref_impedance_ohm: f64) -> f64 {
    (2.0 * 10f64.powf((p_dbm - 30.0) / 10.0) * ref_impedance_ohm).sqrt()
}

/// Inverse of [`dbm_to_amplitude`]. Zero amplitude maps to `-inf`.
pub fn amplitude_to_dbm(amplitude: f64, ref_impedance_ohm: f64) -> f64 {
    watts_to_dbm(amplitude * amplitude / (2.0 * ref_impedance_ohm))
}

pub fn watts_to_dbm(p_watts: f64) -> f64 {
    10.0 * p_watts.log10() + 30.0
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn db_to_power_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn db_to_amplitude_ratio(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn power_ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// How the third-order gain is derived from the linear gain and IIP3.
///
/// The in-band envelope term produced by a cubic is `3·β₃·|s|²·s`. The
/// forms differ only in the constant relating `β₃` to `β₁ / A²_IIP3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdOrderForm {
    /// `β₃ = −β₁ / (3·A²)`: a two-tone test extrapolates exactly to the
    /// configured IIP3.
    #[default]
    Intercept,
    /// `β₃ = −β₁ / A²`, the bare intercept relation.
    Raw,
    /// `β₃ = −4·β₁ / (3·A²)`, the passband textbook relation.
    Textbook,
}

impl ThirdOrderForm {
    fn factor(self) -> f64 {
        match self {
            ThirdOrderForm::Intercept => 1.0 / 3.0,
            ThirdOrderForm::Raw => 1.0,
            ThirdOrderForm::Textbook => 4.0 / 3.0,
        }
    }
}

/// Which envelope term models the baseband second-order distortion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvenOrderForm {
    /// `β₂·r²`
    #[default]
    Square,
    /// `β₂·|r|²`
    AbsSquare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformParams {
    pub bandwidth_hz: f64,
    /// Bookkeeping only; the simulation is baseband-equivalent.
    pub carrier_freq_hz: f64,
    pub constellation_order: usize,
    pub n_subcarriers: usize,
    /// Unused subcarriers around the IDFT Nyquist bin.
    pub guard_subcarriers: usize,
    pub cp_len: usize,
    pub symbols_per_packet: usize,
    pub training_fraction: f64,
    pub oversampling_factor: usize,
}

impl Default for WaveformParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 20e6,
            carrier_freq_hz: 2.4e9,
            constellation_order: 16,
            n_subcarriers: 64,
            guard_subcarriers: 0,
            cp_len: 16,
            symbols_per_packet: 20,
            training_fraction: 0.08,
            oversampling_factor: 4,
        }
    }
}

impl WaveformParams {
    pub fn sample_rate_hz(&self) -> f64 {
        self.bandwidth_hz * self.oversampling_factor as f64
    }

    /// Samples per OFDM symbol at the symbol rate, cyclic prefix included.
    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }

    /// Number of training symbols at the start of each packet.
    pub fn training_symbols(&self) -> usize {
        // Subtract a hair so that 0.08 * 25 = 2.0000000000000004 rounds to 2.
        let exact = self.training_fraction * self.symbols_per_packet as f64;
        ((exact - 1e-9).ceil() as usize).clamp(1, self.symbols_per_packet)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            v.push(Violation::new("bandwidth_hz", "must be positive"));
        }
        if !(self.carrier_freq_hz.is_finite() && self.carrier_freq_hz > 0.0) {
            v.push(Violation::new("carrier_freq_hz", "must be positive"));
        }
        let order = self.constellation_order;
        let side = (order as f64).sqrt().round() as usize;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            v.push(Violation::new(
                "constellation_order",
                "must be a square QAM order (4, 16, 64, ...)",
            ));
        }
        if self.n_subcarriers == 0 {
            v.push(Violation::new("n_subcarriers", "must be positive"));
        }
        if self.cp_len >= self.n_subcarriers {
            v.push(Violation::new(
                "cp_len",
                "must be smaller than n_subcarriers",
            ));
        }
        if self.guard_subcarriers >= self.n_subcarriers {
            v.push(Violation::new(
                "guard_subcarriers",
                "must leave at least one data subcarrier",
            ));
        }
        if self.symbols_per_packet == 0 {
            v.push(Violation::new("symbols_per_packet", "must be positive"));
        }
        if !(self.training_fraction > 0.0 && self.training_fraction <= 1.0) {
            v.push(Violation::new("training_fraction", "must lie in (0, 1]"));
        } else if self.training_fraction * (self.symbols_per_packet as f64) < 1.0 - 1e-9 {
            v.push(Violation::new(
                "training_fraction",
                "must yield at least one training symbol",
            ));
        }
        if self.oversampling_factor < 2 {
            v.push(Violation::new(
                "oversampling_factor",
                "oversampling must be at least 2",
            ));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransceiverParams {
    pub tx_power_dbm: f64,
    /// Average power of the DAC output that feeds the IQ modulator.
    pub dac_output_dbm: f64,
    pub vga_gain_db: f64,
    pub pa_gain_db: f64,
    pub pa_iip3_dbm: f64,
    pub pa_memory_taps: Vec<Complex64>,
    pub tx_irr_db: f64,
    pub tx_image_phase_rad: f64,

    pub lna_gain_db: f64,
    pub lna_iip3_dbm: f64,
    pub bb_gain_db: f64,
    pub bb_iip2_dbm: f64,
    pub bb_dc_offset: Complex64,
    pub rx_irr_db: f64,
    pub rx_image_phase_rad: f64,
    pub rx_noise_figure_db: f64,
    /// In-band thermal noise over the signal bandwidth.
    pub thermal_noise_dbm: f64,
    pub adc_bits: u32,
    pub papr_db: f64,
    /// One-sided cutoff of the downconversion filter; `None` passes the
    /// whole simulated band.
    pub rx_lpf_bw_hz: Option<f64>,

    pub pn_linewidth_hz: f64,
    pub shared_oscillator: bool,

    pub circulator_isolation_db: f64,
    pub rf_cancellation_db: f64,
    pub k_factor_db: f64,
    pub n_nlos_taps: usize,

    pub ref_impedance_ohm: f64,
    pub third_order_form: ThirdOrderForm,
    pub even_order_form: EvenOrderForm,
}

impl Default for TransceiverParams {
    fn default() -> Self {
        let ref_impedance_ohm = 50.0;
        let mut p = Self {
            tx_power_dbm: 25.0,
            dac_output_dbm: -35.0,
            vga_gain_db: 0.0,
            pa_gain_db: 27.0,
            pa_iip3_dbm: 13.0,
            pa_memory_taps: vec![Complex64::new(1.0, 0.0)],
            tx_irr_db: 30.0,
            tx_image_phase_rad: 0.0,
            lna_gain_db: 20.0,
            lna_iip3_dbm: -3.0,
            bb_gain_db: 0.0,
            bb_iip2_dbm: 50.0,
            bb_dc_offset: Complex64::new(dbm_to_amplitude(-40.0, ref_impedance_ohm), 0.0),
            rx_irr_db: 30.0,
            rx_image_phase_rad: 0.0,
            rx_noise_figure_db: 4.1,
            thermal_noise_dbm: -101.0,
            adc_bits: 12,
            papr_db: 10.0,
            rx_lpf_bw_hz: None,
            pn_linewidth_hz: 100.0,
            shared_oscillator: true,
            circulator_isolation_db: 15.0,
            rf_cancellation_db: 35.0,
            k_factor_db: 30.0,
            n_nlos_taps: 4,
            ref_impedance_ohm,
            third_order_form: ThirdOrderForm::default(),
            even_order_form: EvenOrderForm::default(),
        };
        p.set_tx_power(25.0);
        p
    }
}

impl TransceiverParams {
    /// Sets the transmit power and the VGA gain that produces it.
    pub fn set_tx_power(&mut self, tx_power_dbm: f64) {
        self.tx_power_dbm = tx_power_dbm;
        self.vga_gain_db = tx_power_dbm - self.pa_gain_db - self.dac_output_dbm;
    }

    /// Sets the RF cancellation so that isolation plus cancellation equals
    /// `total_db`.
    pub fn set_total_suppression(&mut self, total_db: f64) {
        self.rf_cancellation_db = total_db - self.circulator_isolation_db;
    }

    pub fn total_suppression_db(&self) -> f64 {
        self.circulator_isolation_db + self.rf_cancellation_db
    }

    /// Noise injected at the LNA input: thermal floor plus noise figure.
    pub fn input_noise_dbm(&self) -> f64 {
        self.thermal_noise_dbm + self.rx_noise_figure_db
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.ref_impedance_ohm.is_finite() && self.ref_impedance_ohm > 0.0) {
            v.push(Violation::new("ref_impedance_ohm", "must be positive"));
        }
        if self.adc_bits < 1 {
            v.push(Violation::new("adc_bits", "must be at least 1"));
        }
        if self.adc_bits > 52 {
            v.push(Violation::new("adc_bits", "must not exceed 52"));
        }
        if self.tx_irr_db.is_nan() || self.tx_irr_db < 0.0 {
            v.push(Violation::new("tx_irr_db", "must be nonnegative"));
        }
        if self.rx_irr_db.is_nan() || self.rx_irr_db < 0.0 {
            v.push(Violation::new("rx_irr_db", "must be nonnegative"));
        }
        match self.pa_memory_taps.first() {
            None => v.push(Violation::new("pa_memory_taps", "must be nonempty")),
            Some(t) if t.norm() == 0.0 => v.push(Violation::new(
                "pa_memory_taps",
                "first tap must be nonzero",
            )),
            _ => {}
        }
        if self.rf_cancellation_db.is_nan() || self.rf_cancellation_db < 0.0 {
            v.push(Violation::new("rf_cancellation_db", "must be nonnegative"));
        }
        if self.pn_linewidth_hz.is_nan() || self.pn_linewidth_hz < 0.0 {
            v.push(Violation::new("pn_linewidth_hz", "must be nonnegative"));
        }
        if !self.papr_db.is_finite() || self.papr_db < 0.0 {
            v.push(Violation::new("papr_db", "must be finite and nonnegative"));
        }
        if let Some(bw) = self.rx_lpf_bw_hz {
            if !(bw.is_finite() && bw > 0.0) {
                v.push(Violation::new("rx_lpf_bw_hz", "must be positive"));
            }
        }
        let implied = self.dac_output_dbm + self.vga_gain_db + self.pa_gain_db;
        if self.tx_power_dbm.is_finite() && (implied - self.tx_power_dbm).abs() > 1e-6 {
            v.push(Violation::new(
                "tx_power_dbm",
                "must equal dac_output_dbm + vga_gain_db + pa_gain_db",
            ));
        }
        for (name, val) in [
            ("pa_gain_db", self.pa_gain_db),
            ("lna_gain_db", self.lna_gain_db),
            ("bb_gain_db", self.bb_gain_db),
            ("circulator_isolation_db", self.circulator_isolation_db),
            ("k_factor_db", self.k_factor_db),
            ("rx_noise_figure_db", self.rx_noise_figure_db),
        ] {
            if !val.is_finite() {
                v.push(Violation::new(name, "must be finite"));
            }
        }
        v
    }
}

/// Level of the desired (far-end) signal and how it overlaps training.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    /// Desired-signal SNR at the receiver input used for SINR experiments.
    pub desired_snr_db: f64,
    /// Minimum SNR the link budget asks for. Informational.
    pub snr_requirement_db: f64,
    /// Whether the far end is already transmitting during the local
    /// training symbols.
    pub desired_in_training: bool,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            desired_snr_db: 15.0,
            snr_requirement_db: 10.0,
            desired_in_training: false,
        }
    }
}

/// Lag depth of each regressor family used by the harness cancellers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CancellerMemory {
    /// Lags of the linear and conjugate terms.
    pub linear: usize,
    /// Lags of the dominant transmit-side third-order term.
    pub third_order: usize,
    /// Lags of every remaining product term.
    pub other: usize,
}

impl Default for CancellerMemory {
    fn default() -> Self {
        Self {
            linear: 5,
            third_order: 5,
            other: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimConfig {
    pub waveform: WaveformParams,
    pub transceiver: TransceiverParams,
    pub link: LinkParams,
    pub canceller: CancellerMemory,
}

impl SimConfig {
    /// Full-length packets (120 symbols) as in the reference setup.
    pub fn full_scale() -> Self {
        let mut c = Self::default();
        c.waveform.symbols_per_packet = 120;
        c
    }

    pub fn validate(&self) -> std::result::Result<(), ValidationErrors> {
        let mut v = self.waveform.violations();
        v.extend(self.transceiver.violations());
        if let Some(bw) = self.transceiver.rx_lpf_bw_hz {
            if bw > self.waveform.sample_rate_hz() / 2.0 {
                v.push(Violation::new(
                    "rx_lpf_bw_hz",
                    "exceeds the Nyquist frequency",
                ));
            }
        }
        let m = self.canceller;
        if m.linear == 0 || m.third_order == 0 || m.other == 0 {
            v.push(Violation::new(
                "canceller",
                "memory lengths must be positive",
            ));
        }
        if self.transceiver.n_nlos_taps > 0 && !self.transceiver.k_factor_db.is_finite() {
            v.push(Violation::new(
                "k_factor_db",
                "must be finite when nLOS taps exist",
            ));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ValidationErrors(v))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = file.apply(Self::default());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl Violation {
    fn new(field: &'static str, message: &str) -> Self {
        Self {
            field,
            message: message.to_string(),
        }
    }
}

/// Every violated invariant of a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<Violation>);

impl ValidationErrors {
    pub fn fields(&self) -> Vec<&'static str> {
        self.0.iter().map(|v| v.field).collect()
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|v| format!("{}: {}", v.field, v.message))
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl std::error::Error for ValidationErrors {}

/// Complex model gains derived from a [`TransceiverParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub gamma_tx: Complex64,
    pub lambda_tx: Complex64,
    pub gamma_rx: Complex64,
    pub lambda_rx: Complex64,
    pub beta_vga: Complex64,
    pub beta_pa_1: Complex64,
    pub beta_pa_3: Complex64,
    pub beta_lna_1: Complex64,
    pub beta_lna_3: Complex64,
    /// Orders 0 (DC offset), 1 and 2.
    pub beta_bb: [Complex64; 3],
}

fn third_order_gain(beta1: Complex64, iip3_dbm: f64, r: f64, form: ThirdOrderForm) -> Complex64 {
    if iip3_dbm == f64::INFINITY {
        return Complex64::new(0.0, 0.0);
    }
    let a = dbm_to_amplitude(iip3_dbm, r);
    -beta1 * form.factor() / (a * a)
}

/// Converts datasheet figures into model gains.
pub fn derive_gains(params: &TransceiverParams) -> Result<GainSet> {
    let r = params.ref_impedance_ohm;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Config(format!(
            "ref_impedance_ohm must be positive, got {r}"
        )));
    }
    if params.adc_bits < 1 {
        return Err(Error::Config("adc_bits must be at least 1".into()));
    }
    let gain = |db: f64| Complex64::new(db_to_amplitude_ratio(db), 0.0);
    let image =
        |irr_db: f64, phase: f64| Complex64::from_polar(db_to_amplitude_ratio(-irr_db), phase);

    let beta_pa_1 = gain(params.pa_gain_db);
    let beta_lna_1 = gain(params.lna_gain_db);
    let beta_bb_1 = gain(params.bb_gain_db);
    let beta_bb_2 = if params.bb_iip2_dbm == f64::INFINITY {
        Complex64::new(0.0, 0.0)
    } else {
        beta_bb_1 / dbm_to_amplitude(params.bb_iip2_dbm, r)
    };
    Ok(GainSet {
        gamma_tx: Complex64::new(1.0, 0.0),
        lambda_tx: image(params.tx_irr_db, params.tx_image_phase_rad),
        gamma_rx: Complex64::new(1.0, 0.0),
        lambda_rx: image(params.rx_irr_db, params.rx_image_phase_rad),
        beta_vga: gain(params.vga_gain_db),
        beta_pa_1,
        beta_pa_3: third_order_gain(beta_pa_1, params.pa_iip3_dbm, r, params.third_order_form),
        beta_lna_1,
        beta_lna_3: third_order_gain(beta_lna_1, params.lna_iip3_dbm, r, params.third_order_form),
        beta_bb: [params.bb_dc_offset, beta_bb_1, beta_bb_2],
    })
}

// ---------------------------------------------------------------------------
// Configuration file

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    waveform: Option<WaveformSection>,
    tx: Option<TxSection>,
    rx: Option<RxSection>,
    oscillator: Option<OscillatorSection>,
    channel: Option<ChannelSection>,
    system: Option<SystemSection>,
    link: Option<LinkSection>,
    canceller: Option<CancellerSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaveformSection {
    bandwidth_hz: Option<f64>,
    carrier_freq_hz: Option<f64>,
    constellation_order: Option<usize>,
    n_subcarriers: Option<usize>,
    guard_subcarriers: Option<usize>,
    cp_len: Option<usize>,
    symbols_per_packet: Option<usize>,
    training_fraction: Option<f64>,
    oversampling_factor: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TxSection {
    power_dbm: Option<f64>,
    dac_output_dbm: Option<f64>,
    vga_gain_db: Option<f64>,
    pa_gain_db: Option<f64>,
    pa_iip3_dbm: Option<f64>,
    pa_memory_taps: Option<Vec<[f64; 2]>>,
    irr_db: Option<f64>,
    image_phase_deg: Option<f64>,
    third_order_form: Option<ThirdOrderForm>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RxSection {
    lna_gain_db: Option<f64>,
    lna_iip3_dbm: Option<f64>,
    bb_gain_db: Option<f64>,
    bb_iip2_dbm: Option<f64>,
    dc_offset: Option<[f64; 2]>,
    irr_db: Option<f64>,
    image_phase_deg: Option<f64>,
    noise_figure_db: Option<f64>,
    thermal_noise_dbm: Option<f64>,
    adc_bits: Option<u32>,
    papr_db: Option<f64>,
    lpf_bw_hz: Option<f64>,
    even_order_form: Option<EvenOrderForm>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OscillatorSection {
    pn_linewidth_hz: Option<f64>,
    shared: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    circulator_isolation_db: Option<f64>,
    rf_cancellation_db: Option<f64>,
    k_factor_db: Option<f64>,
    n_nlos_taps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    ref_impedance_ohm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSection {
    desired_snr_db: Option<f64>,
    snr_requirement_db: Option<f64>,
    desired_in_training: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CancellerSection {
    linear_memory: Option<usize>,
    third_order_memory: Option<usize>,
    other_memory: Option<usize>,
}

fn set<T>(dst: &mut T, src: Option<T>) {
    if let Some(v) = src {
        *dst = v;
    }
}

impl ConfigFile {
    fn apply(self, mut cfg: SimConfig) -> SimConfig {
        if let Some(w) = self.waveform {
            let p = &mut cfg.waveform;
            set(&mut p.bandwidth_hz, w.bandwidth_hz);
            set(&mut p.carrier_freq_hz, w.carrier_freq_hz);
            set(&mut p.constellation_order, w.constellation_order);
            set(&mut p.n_subcarriers, w.n_subcarriers);
            set(&mut p.guard_subcarriers, w.guard_subcarriers);
            set(&mut p.cp_len, w.cp_len);
            set(&mut p.symbols_per_packet, w.symbols_per_packet);
            set(&mut p.training_fraction, w.training_fraction);
            set(&mut p.oversampling_factor, w.oversampling_factor);
        }
        if let Some(r) = self.system {
            set(&mut cfg.transceiver.ref_impedance_ohm, r.ref_impedance_ohm);
        }
        let t = &mut cfg.transceiver;
        let mut power = None;
        let mut vga = None;
        if let Some(tx) = self.tx {
            power = tx.power_dbm;
            vga = tx.vga_gain_db;
            set(&mut t.dac_output_dbm, tx.dac_output_dbm);
            set(&mut t.pa_gain_db, tx.pa_gain_db);
            set(&mut t.pa_iip3_dbm, tx.pa_iip3_dbm);
            if let Some(taps) = tx.pa_memory_taps {
                t.pa_memory_taps = taps
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
            }
            set(&mut t.tx_irr_db, tx.irr_db);
            if let Some(deg) = tx.image_phase_deg {
                t.tx_image_phase_rad = deg.to_radians();
            }
            set(&mut t.third_order_form, tx.third_order_form);
        }
        match (power, vga) {
            (Some(p), Some(g)) => {
                t.tx_power_dbm = p;
                t.vga_gain_db = g;
            }
            (None, Some(g)) => {
                t.vga_gain_db = g;
                t.tx_power_dbm = t.dac_output_dbm + g + t.pa_gain_db;
            }
            (p, None) => {
                let p = p.unwrap_or(t.tx_power_dbm);
                t.set_tx_power(p);
            }
        }
        if let Some(rx) = self.rx {
            set(&mut t.lna_gain_db, rx.lna_gain_db);
            set(&mut t.lna_iip3_dbm, rx.lna_iip3_dbm);
            set(&mut t.bb_gain_db, rx.bb_gain_db);
            set(&mut t.bb_iip2_dbm, rx.bb_iip2_dbm);
            if let Some([re, im]) = rx.dc_offset {
                t.bb_dc_offset = Complex64::new(re, im);
            }
            set(&mut t.rx_irr_db, rx.irr_db);
            if let Some(deg) = rx.image_phase_deg {
                t.rx_image_phase_rad = deg.to_radians();
            }
            set(&mut t.rx_noise_figure_db, rx.noise_figure_db);
            set(&mut t.thermal_noise_dbm, rx.thermal_noise_dbm);
            set(&mut t.adc_bits, rx.adc_bits);
            set(&mut t.papr_db, rx.papr_db);
            if rx.lpf_bw_hz.is_some() {
                t.rx_lpf_bw_hz = rx.lpf_bw_hz;
            }
            set(&mut t.even_order_form, rx.even_order_form);
        }
        if let Some(o) = self.oscillator {
            set(&mut t.pn_linewidth_hz, o.pn_linewidth_hz);
            set(&mut t.shared_oscillator, o.shared);
        }
        if let Some(c) = self.channel {
            set(&mut t.circulator_isolation_db, c.circulator_isolation_db);
            set(&mut t.rf_cancellation_db, c.rf_cancellation_db);
            set(&mut t.k_factor_db, c.k_factor_db);
            set(&mut t.n_nlos_taps, c.n_nlos_taps);
        }
        if let Some(l) = self.link {
            set(&mut cfg.link.desired_snr_db, l.desired_snr_db);
            set(&mut cfg.link.snr_requirement_db, l.snr_requirement_db);
            set(&mut cfg.link.desired_in_training, l.desired_in_training);
        }
        if let Some(c) = self.canceller {
            set(&mut cfg.canceller.linear, c.linear_memory);
            set(&mut cfg.canceller.third_order, c.third_order_memory);
            set(&mut cfg.canceller.other, c.other_memory);
        }
        cfg
    }
}
