//! Small FFT and filtering helpers shared by the waveform, chain and
//! measurement code.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward DFT, no scaling.
pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// Inverse DFT scaled by `1/N`, so `ifft(fft(x)) == x`.
pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new()
        .plan_fft_inverse(buf.len())
        .process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Signed frequency index of DFT bin `k` for a length-`n` transform.
pub fn signed_bin(k: usize, n: usize) -> isize {
    if k <= n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Causal FIR filter with zero initial state; output has the input length.
pub fn fir(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    if taps.len() == 1 {
        return x.iter().map(|&v| v * taps[0]).collect();
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for (n, out) in y.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &h) in taps.iter().enumerate().take(n + 1) {
            acc += h * x[n - k];
        }
        *out = acc;
    }
    y
}

/// Causal FIR filter whose taps sit `spacing` samples apart.
pub fn sparse_fir(x: &[Complex64], taps: &[Complex64], spacing: usize) -> Vec<Complex64> {
    let spacing = spacing.max(1);
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for (k, &h) in taps.iter().enumerate() {
        let d = k * spacing;
        if d >= x.len() {
            break;
        }
        for n in d..x.len() {
            y[n] += h * x[n - d];
        }
    }
    y
}

/// Zeroes every DFT bin with `|f| > cutoff_hz`. Treats the block as one
/// period, so it is exact for periodic signals and a close approximation
/// for long aperiodic ones.
pub fn brickwall_lowpass(x: &[Complex64], sample_rate_hz: f64, cutoff_hz: f64) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut spec = fft(x);
    let df = sample_rate_hz / n as f64;
    for (k, v) in spec.iter_mut().enumerate() {
        let f = signed_bin(k, n) as f64 * df;
        if f.abs() > cutoff_hz * (1.0 + 1e-12) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(&spec)
}
