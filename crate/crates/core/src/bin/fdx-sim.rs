use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdx_sim::canceller::CancellerKind;
use fdx_sim::chain::Stage;
use fdx_sim::config::SimConfig;
use fdx_sim::harness::{
    emit_csv, parse_values, run_experiment, simulate, ExperimentPlan, SweepVariable,
};
use fdx_sim::Error;

#[derive(Parser)]
#[command(
    name = "fdx-sim",
    version,
    about = "Full-duplex self-interference cancellation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write one CSV row per point and canceller.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML parameter file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Swept quantity: total suppression (rf) or transmit power (power).
    #[arg(long)]
    sweep: String,
    /// start:stop:step (inclusive), a comma list, or one value.
    #[arg(long)]
    values: String,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// all, or a comma list of proposed, linear, wlinear, nonlinear, cascaded.
    #[arg(long, default_value = "all")]
    canceller: String,
    /// Write the first run's signal after this block (pa, lna, bb or adc).
    #[arg(long)]
    dump_stage: Option<String>,
    /// Destination of the stage dump; defaults to <out>.<stage>.bin.
    #[arg(long)]
    dump: Option<PathBuf>,
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

fn parse_cancellers(s: &str) -> Result<Vec<CancellerKind>, Error> {
    if s == "all" {
        return Ok(CancellerKind::ALL.to_vec());
    }
    s.split(',').map(|k| k.trim().parse()).collect()
}

fn build_plan(args: &RunArgs) -> Result<(ExperimentPlan, Option<Stage>), Error> {
    let base = match &args.config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    let plan = ExperimentPlan {
        sweep_variable: args.sweep.parse::<SweepVariable>()?,
        sweep_values: parse_values(&args.values)?,
        n_runs: args.runs,
        base_params: base,
        canceller_set: parse_cancellers(&args.canceller)?,
        master_seed: args.seed,
    };
    plan.validate()?;
    let stage = args.dump_stage.as_deref().map(str::parse).transpose()?;
    Ok((plan, stage))
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let (plan, stage) = build_plan(&args).map_err(Failure::Config)?;
    let records = run_experiment(&plan).map_err(Failure::Runtime)?;
    emit_csv(&records, &args.out).map_err(Failure::Runtime)?;

    if let Some(stage) = stage {
        let cfg = plan
            .sweep_variable
            .apply(&plan.base_params, plan.sweep_values[0]);
        let out = simulate(&cfg, plan.run_seed(0)).map_err(Failure::Runtime)?;
        let name = format!(
            "{}.{}.bin",
            args.out.display(),
            args.dump_stage.as_deref().unwrap_or("stage")
        );
        let path = args.dump.clone().unwrap_or_else(|| PathBuf::from(name));
        let file = std::fs::File::create(&path).map_err(|e| Failure::Runtime(e.into()))?;
        out.stages
            .get(stage)
            .write_dump(std::io::BufWriter::new(file))
            .map_err(Failure::Runtime)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("fdx-sim: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("fdx-sim: {e}");
            ExitCode::from(3)
        }
    }
}
