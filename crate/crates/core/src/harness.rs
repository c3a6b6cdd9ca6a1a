//! Seeded Monte Carlo sweeps over suppression or transmit power.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::canceller::{cancel, BasisSpec, CancellerKind};
use crate::chain::{draw_channel, run_chain, ChainOutput};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::signal::mean_square;
use crate::waveform::generate_packet;

pub const CSV_HEADER: &str = "sweep,canceller,residual_db,sinr_db,std_db,n";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Circulator isolation plus RF cancellation, in dB.
    RfSuppressionDb,
    TxPowerDbm,
}

impl SweepVariable {
    /// Returns `base` with the swept parameter set to `value`.
    pub fn apply(self, base: &SimConfig, value: f64) -> SimConfig {
        let mut cfg = base.clone();
        match self {
            SweepVariable::RfSuppressionDb => cfg.transceiver.set_total_suppression(value),
            SweepVariable::TxPowerDbm => cfg.transceiver.set_tx_power(value),
        }
        cfg
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" => Ok(SweepVariable::RfSuppressionDb),
            "power" => Ok(SweepVariable::TxPowerDbm),
            other => Err(Error::Parse(format!(
                "unknown sweep {other:?}, expected rf or power"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub n_runs: usize,
    pub base_params: SimConfig,
    pub canceller_set: Vec<CancellerKind>,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.sweep_values.is_empty() {
            return Err(Error::InvalidArgument("sweep values are empty".into()));
        }
        if self.sweep_values.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidArgument("sweep values must be sorted".into()));
        }
        if self.n_runs == 0 {
            return Err(Error::InvalidArgument(
                "at least one run is required".into(),
            ));
        }
        if self.canceller_set.is_empty() {
            return Err(Error::InvalidArgument("no canceller selected".into()));
        }
        for &v in &self.sweep_values {
            self.sweep_variable.apply(&self.base_params, v).validate()?;
        }
        Ok(())
    }

    /// Seed of run `run`. Runs share realizations across sweep points.
    pub fn run_seed(&self, run: usize) -> u64 {
        derive_seed(self.master_seed, run as u64)
    }
}

/// Aggregated result for one sweep point and canceller.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub sweep_value: f64,
    pub canceller: CancellerKind,
    /// Mean over runs of the payload residual plus noise relative to noise.
    pub residual_above_floor_db: f64,
    pub sinr_db: f64,
    /// Standard deviation across runs of the swept figure: residual for
    /// suppression sweeps, SINR for power sweeps.
    pub std_dev_db: f64,
    pub n_runs: usize,
}

/// Scores of one canceller on one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub residual_above_floor_db: f64,
    pub sinr_db: f64,
    /// Mean square of `y − Ψŵ` over the training rows.
    pub training_residual: f64,
    /// Mean square of the residual self-interference over the payload.
    pub residual_si_power: f64,
    pub noise_power: f64,
    pub desired_power: f64,
}

/// `10·log10(desired / (residual + noise))`.
pub fn sinr(desired_p: f64, residual_si_p: f64, noise_p: f64) -> Result<f64> {
    if !(noise_p > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise power must be positive, got {noise_p}"
        )));
    }
    if desired_p < 0.0 || residual_si_p < 0.0 {
        return Err(Error::InvalidArgument("powers must be nonnegative".into()));
    }
    Ok(10.0 * (desired_p / (residual_si_p + noise_p)).log10())
}

/// Draws the channel and packets for `seed` and runs the chain.
pub fn simulate(cfg: &SimConfig, seed: u64) -> Result<ChainOutput> {
    let wp = &cfg.waveform;
    let si = generate_packet(wp, derive_seed(seed, stream::SI_PACKET))?;
    let desired = generate_packet(wp, derive_seed(seed, stream::DESIRED_PACKET))?;
    let channel = draw_channel(
        &cfg.transceiver,
        wp.oversampling_factor,
        derive_seed(seed, stream::CHANNEL),
    );
    run_chain(
        &si,
        Some(&desired),
        cfg,
        &channel,
        derive_seed(seed, stream::CHAIN),
    )
}

/// Fits `spec` on the training symbols of `out` and scores the payload.
pub fn score(out: &ChainOutput, spec: &BasisSpec) -> Result<RunMetrics> {
    let (e, est) = cancel(&out.y, &out.x, spec, out.training_range.clone(), None)?;
    let p = out.payload_range.clone();
    let e = &e.samples()[p.clone()];
    let d = &out.desired_only.samples()[p.clone()];
    let nz = &out.noise_only.samples()[p];
    let res: Vec<_> = e
        .iter()
        .zip(d)
        .zip(nz)
        .map(|((a, b), c)| a - b - c)
        .collect();
    let residual_si_power = mean_square(&res);
    let noise_power = mean_square(nz);
    let desired_power = mean_square(d);
    if !(noise_power > 0.0) {
        return Err(Error::InvalidArgument(
            "noise floor is zero; cannot score".into(),
        ));
    }
    Ok(RunMetrics {
        residual_above_floor_db: 10.0 * ((residual_si_power + noise_power) / noise_power).log10(),
        sinr_db: sinr(desired_power, residual_si_power, noise_power)?,
        training_residual: est.residual_mean_square,
        residual_si_power,
        noise_power,
        desired_power,
    })
}

/// Runs every selected canceller on one realization.
pub fn run_once(cfg: &SimConfig, kinds: &[CancellerKind], seed: u64) -> Result<Vec<RunMetrics>> {
    let out = simulate(cfg, seed)?;
    kinds
        .iter()
        .map(|&k| score(&out, &BasisSpec::for_experiment(k, &cfg.canceller)))
        .collect()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-run metrics for every sweep point: `[point][run][canceller]`.
pub fn run_raw(plan: &ExperimentPlan) -> Result<Vec<Vec<Vec<RunMetrics>>>> {
    plan.validate()?;
    let jobs: Vec<(usize, usize)> = (0..plan.sweep_values.len())
        .flat_map(|i| (0..plan.n_runs).map(move |r| (i, r)))
        .collect();
    let results: Vec<Result<Vec<RunMetrics>>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let cfg = plan
                .sweep_variable
                .apply(&plan.base_params, plan.sweep_values[i]);
            let seed = plan.run_seed(r);
            run_once(&cfg, &plan.canceller_set, seed).map_err(|e| Error::RunFailed {
                run: r,
                seed,
                source: Box::new(e),
            })
        })
        .collect();
    let mut grid = vec![Vec::with_capacity(plan.n_runs); plan.sweep_values.len()];
    for (&(i, _), res) in jobs.iter().zip(results) {
        grid[i].push(res?);
    }
    Ok(grid)
}

pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<MetricRecord>> {
    let grid = run_raw(plan)?;
    let mut records = Vec::new();
    for (i, runs) in grid.iter().enumerate() {
        for (k, &kind) in plan.canceller_set.iter().enumerate() {
            let res: Vec<f64> = runs.iter().map(|r| r[k].residual_above_floor_db).collect();
            let sinrs: Vec<f64> = runs.iter().map(|r| r[k].sinr_db).collect();
            let (res_mean, res_std) = mean_std(&res);
            let (sinr_mean, sinr_std) = mean_std(&sinrs);
            records.push(MetricRecord {
                sweep_value: plan.sweep_values[i],
                canceller: kind,
                residual_above_floor_db: res_mean,
                sinr_db: sinr_mean,
                std_dev_db: match plan.sweep_variable {
                    SweepVariable::RfSuppressionDb => res_std,
                    SweepVariable::TxPowerDbm => sinr_std,
                },
                n_runs: runs.len(),
            });
        }
    }
    Ok(records)
}

impl fmt::Display for MetricRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.sweep_value,
            self.canceller,
            self.residual_above_floor_db,
            self.sinr_db,
            self.std_dev_db,
            self.n_runs
        )
    }
}

pub fn write_csv<W: Write>(records: &[MetricRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[MetricRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file))
}

pub fn parse_csv<R: BufRead>(input: R) -> Result<Vec<MetricRecord>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim) != Some(CSV_HEADER) {
        return Err(Error::Parse("missing or wrong CSV header".into()));
    }
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    };
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Parse(format!("expected 6 fields: {line:?}")));
        }
        out.push(MetricRecord {
            sweep_value: num(f[0])?,
            canceller: f[1].parse()?,
            residual_above_floor_db: num(f[2])?,
            sinr_db: num(f[3])?,
            std_dev_db: num(f[4])?,
            n_runs: f[5]
                .parse()
                .map_err(|e| Error::Parse(format!("{:?}: {e}", f[5])))?,
        });
    }
    Ok(out)
}

/// Parses `a:b:step` (inclusive), a comma list, or a single value.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(Error::Parse(format!("bad range {spec:?}")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => Err(Error::Parse(format!("bad value list {spec:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinr_examples() {
        assert!((sinr(10f64.powf(1.5), 0.0, 1.0).unwrap() - 15.0).abs() < 1e-12);
        assert!((sinr(10f64.powf(1.5), 1.0, 1.0).unwrap() - 11.99).abs() < 0.005);
        assert_eq!(sinr(0.0, 1.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(sinr(1.0, 0.0, 0.0).is_err());
    }

    fn record(v: f64, k: CancellerKind) -> MetricRecord {
        MetricRecord {
            sweep_value: v,
            canceller: k,
            residual_above_floor_db: 3.25 + v / 7.0,
            sinr_db: f64::NEG_INFINITY,
            std_dev_db: 0.1,
            n_runs: 50,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_round_trip() {
        let recs: Vec<MetricRecord> = [50.0, 55.0, 60.0]
            .iter()
            .flat_map(|&v| {
                [
                    record(v, CancellerKind::Proposed),
                    record(v, CancellerKind::Cascaded),
                ]
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 7);
        assert_eq!(parse_csv(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn value_ranges() {
        assert_eq!(
            parse_values("50:75:5").unwrap(),
            vec![50.0, 55.0, 60.0, 65.0, 70.0, 75.0]
        );
        assert_eq!(
            parse_values("-5:25:10").unwrap(),
            vec![-5.0, 5.0, 15.0, 25.0]
        );
        assert_eq!(parse_values("60").unwrap(), vec![60.0]);
        assert_eq!(parse_values("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_values("5:1:1").is_err());
        assert!(parse_values("a:b").is_err());
    }

    #[test]
    fn plan_validation() {
        let mut plan = ExperimentPlan {
            sweep_variable: SweepVariable::RfSuppressionDb,
            sweep_values: vec![50.0, 60.0],
            n_runs: 1,
            base_params: SimConfig::default(),
            canceller_set: vec![CancellerKind::Proposed],
            master_seed: 1,
        };
        plan.validate().unwrap();
        plan.sweep_values = vec![60.0, 50.0];
        assert!(plan.validate().is_err());
        plan.sweep_values = vec![50.0];
        plan.n_runs = 0;
        assert!(plan.validate().is_err());
    }
}
