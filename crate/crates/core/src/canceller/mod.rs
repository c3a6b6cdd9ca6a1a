//! Digital self-interference cancellation by least squares on a regressor
//! matrix built from the known transmit samples.

mod basis;
mod qr;

use std::io::Write;
use std::ops::Range;

use num_complex::Complex64;

pub use basis::{
    baseline_spec, build_design_matrix, proposed_factor_sets, BasisSpec, BasisTerm, CancellerKind,
    ColumnBlock, DesignMatrix, Factor, Lags,
};
pub use qr::{mgs, solve, LeastSquares, QrFactors, DROP_TOLERANCE};

use crate::config::watts_to_dbm;
use crate::error::{Error, Result};
use crate::signal::{mean_square, ComplexBasebandSignal};

/// Fitted canceller.
#[derive(Debug, Clone, PartialEq)]
pub struct CancellerEstimate {
    pub spec: BasisSpec,
    pub w_hat: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    pub qr: QrFactors,
    /// Mean square of `y − Ψŵ` over the fitted rows.
    pub residual_mean_square: f64,
    pub labels: Vec<(String, Vec<usize>)>,
}

impl CancellerEstimate {
    pub fn residual_power_dbm(&self, ref_impedance_ohm: f64) -> f64 {
        watts_to_dbm(self.residual_mean_square / (2.0 * ref_impedance_ohm))
    }

    pub fn dropped_columns(&self) -> &[usize] {
        &self.qr.dropped
    }

    /// Norm of each design-matrix column.
    pub fn condition_diag(&self) -> &[f64] {
        &self.qr.column_norms
    }

    /// One line per coefficient: term, lag tuple, real and imaginary part.
    pub fn write_table<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "term\tlags\tre\tim")?;
        for ((label, lags), w) in self.labels.iter().zip(&self.w_hat) {
            let lags: Vec<String> = lags.iter().map(usize::to_string).collect();
            writeln!(out, "{label}\t({})\t{:e}\t{:e}", lags.join(","), w.re, w.im)?;
        }
        Ok(())
    }
}

/// Least-squares fit of `y` on an already built design matrix.
pub fn qr_solve(
    psi: &DesignMatrix,
    y: &[Complex64],
    spec: &BasisSpec,
) -> Result<CancellerEstimate> {
    if psi.rows <= psi.width() {
        return Err(Error::Underdetermined {
            rows: psi.rows,
            cols: psi.width(),
        });
    }
    let qr = mgs(&psi.columns);
    let ls = solve(&qr, y)?;
    Ok(CancellerEstimate {
        spec: spec.clone(),
        residual_mean_square: mean_square(&ls.residual),
        w_hat: ls.w,
        mu: ls.mu,
        qr,
        labels: psi.column_labels(),
    })
}

/// Fits `spec` on the `training` samples of `y` against the known transmit
/// signal `x`.
pub fn fit(
    y: &[Complex64],
    x: &[Complex64],
    spec: &BasisSpec,
    training: Range<usize>,
) -> Result<CancellerEstimate> {
    if y.len() != x.len() {
        return Err(Error::LengthMismatch {
            what: "received and transmitted samples",
            left: y.len(),
            right: x.len(),
        });
    }
    if training.end > y.len() {
        return Err(Error::InsufficientSamples {
            needed: training.end,
            available: y.len(),
        });
    }
    let psi = build_design_matrix(x, spec, training.clone())?;
    qr_solve(&psi, &y[training], spec)
}

/// Regenerates the self-interference estimate for all of `x`.
pub fn regenerate(x: &[Complex64], est: &CancellerEstimate) -> Result<Vec<Complex64>> {
    let psi = build_design_matrix(x, &est.spec, 0..x.len())?;
    Ok(psi.apply(&est.w_hat))
}

/// Subtracts the regenerated self-interference from the whole of `y`.
/// Without an estimate the canceller is first fitted on `training` only.
pub fn cancel(
    y: &ComplexBasebandSignal,
    x: &ComplexBasebandSignal,
    spec: &BasisSpec,
    training: Range<usize>,
    est: Option<&CancellerEstimate>,
) -> Result<(ComplexBasebandSignal, CancellerEstimate)> {
    y.check_compatible(x)?;
    let est = match est {
        Some(e) => e.clone(),
        None => fit(y.samples(), x.samples(), spec, training)?,
    };
    let si_hat = regenerate(x.samples(), &est)?;
    let e = y
        .samples()
        .iter()
        .zip(&si_hat)
        .map(|(a, b)| a - b)
        .collect();
    Ok((
        ComplexBasebandSignal::from_parts_unchecked(e, y.sample_rate_hz()),
        est,
    ))
}
