//! Thin command-line front end; all logic lives in the library.

use clap::{Args, Parser, Subcommand};
use multibreath::cli::{
    cmd_run, cmd_sweep, cmd_synth, load_scene, RunInput, RunOutcome, SweepAxis,
};
use multibreath::estimate::{PersonCount, PipelineOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "multibreath",
    about = "Multi-person breathing rate estimation from CSI phase-difference traces"
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace CSV plus its ground-truth sidecar.
    Synth(SynthArgs),
    /// Run the estimation pipeline on a trace (or a synthesized scene).
    Run(RunArgs),
    /// Batch-evaluate success rates across a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Scene config file (flat key-value format).
    #[arg(long)]
    scene: PathBuf,
    /// Output trace CSV path; the truth sidecar lands next to it.
    #[arg(long)]
    output: PathBuf,
    /// Override the scene seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    /// Trace CSV path, or `synth` to synthesize from --scene.
    #[arg(long)]
    input: String,
    /// Scene config; required with `--input synth`, otherwise supplies the
    /// sampling rate for CSV ingestion (default 20 Hz).
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Person count, or `auto` to estimate from the tensor spectrum.
    #[arg(long, default_value = "auto")]
    persons: String,
    /// Pipeline seed (decomposition initialization).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Base scene config file.
    #[arg(long)]
    scene: PathBuf,
    /// Grid in the form `axis=v1,v2,...` with axis one of noise_std,
    /// sampling_rate, window_packets, persons.
    #[arg(long)]
    sweep: String,
    /// Seeded trials per grid point.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Base seed; trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
}

fn parse_persons(text: &str) -> Result<PersonCount, String> {
    if text == "auto" {
        return Ok(PersonCount::Auto);
    }
    text.parse::<usize>()
        .map(PersonCount::Known)
        .map_err(|_| format!("--persons must be a positive integer or `auto`, got `{text}`"))
}

fn real_main() -> Result<ExitCode, multibreath::Error> {
    let cli = CliArgs::parse();
    match cli.command {
        Command::Synth(args) => {
            let mut cfg = load_scene(&args.scene)?;
            if let Some(seed) = args.seed {
                cfg.seed = seed;
            }
            let truth = cmd_synth(&cfg, &args.output)?;
            eprintln!(
                "wrote {} and {}",
                args.output.display(),
                truth.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => {
            let persons = parse_persons(&args.persons).map_err(multibreath::Error::Config)?;
            let scene = args.scene.as_deref().map(load_scene).transpose()?;
            let opts = PipelineOptions {
                seed: args.seed,
                ..PipelineOptions::default()
            };
            let (report, outcome) = if args.input == "synth" {
                let mut cfg = scene.ok_or_else(|| {
                    multibreath::Error::Config("--input synth requires --scene".into())
                })?;
                cfg.seed = args.seed;
                cmd_run(
                    RunInput::Synth(&cfg),
                    cfg.sampling_rate_hz,
                    persons,
                    &opts,
                    args.output.as_deref(),
                )?
            } else {
                let fs = scene.map(|s| s.sampling_rate_hz).unwrap_or(20.0);
                cmd_run(
                    RunInput::Trace(args.input.as_ref()),
                    fs,
                    persons,
                    &opts,
                    args.output.as_deref(),
                )?
            };
            if args.output.is_none() {
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
            Ok(match outcome {
                RunOutcome::Ok => ExitCode::SUCCESS,
                RunOutcome::Failed => ExitCode::from(1),
            })
        }
        Command::Sweep(args) => {
            let cfg = load_scene(&args.scene)?;
            let (axis_name, values_text) = args.sweep.split_once('=').ok_or_else(|| {
                multibreath::Error::Config("--sweep must look like axis=v1,v2,...".into())
            })?;
            let axis = SweepAxis::parse(axis_name.trim())?;
            let values: Vec<f64> = values_text
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        multibreath::Error::Config(format!("bad sweep value `{v}`"))
                    })
                })
                .collect::<Result<_, _>>()?;
            let rows = cmd_sweep(
                &cfg,
                axis,
                &values,
                args.trials,
                args.seed,
                Some(&args.output),
            )?;
            for row in &rows {
                eprintln!(
                    "{}={}: success_rate={:.3} mean_error_bpm={:.3}",
                    row.param, row.value, row.success_rate, row.mean_error_bpm
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
