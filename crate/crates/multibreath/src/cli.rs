//! File formats and the synth / run / sweep commands behind the binary.
//!
//! Formats:
//! - trace CSV: header `packet,sc_0,...,sc_{K-1}`, one row per packet,
//!   radians as decimal floats (shortest exact representation);
//! - truth JSON: `{"rates_bpm":[...]}`, written next to the trace as
//!   `<stem>.truth.json` and picked up automatically by `run`;
//! - report JSON: [`BreathingReport`] serialization;
//! - sweep CSV: header `param,value,success_rate,mean_error_bpm`.
//!
//! A trace CSV carries no sampling rate; `run` takes it from the scene
//! file when one is supplied and defaults to 20 Hz otherwise.

use crate::error::{Error, Result};
use crate::estimate::{
    run_pipeline, score_report, BreathingReport, PersonCount, PipelineOptions,
};
use crate::model::{
    parse_scene_config, synth_phase_difference_matrix, PersonSource, PhaseDifferenceMatrix,
    SceneConfig, TrendSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

/// Ground-truth sidecar contents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthFile {
    pub rates_bpm: Vec<f64>,
}

/// Sidecar truth path for a trace: `trace.csv` -> `trace.truth.json`.
pub fn truth_path_for(trace: &Path) -> PathBuf {
    trace.with_extension("truth.json")
}

/// Outcome of `run`, mapped to the process exit code by the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// Success, or no ground truth to judge against.
    Ok,
    /// Ground truth present and the 2 bpm criterion failed, or the
    /// pipeline flagged the run.
    Failed,
}

/// Generate a trace from a scene and write the CSV plus the truth sidecar.
pub fn cmd_synth(cfg: &SceneConfig, output: &Path) -> Result<PathBuf> {
    let (matrix, truth) = synth_phase_difference_matrix(cfg)?;
    let mut buf = Vec::new();
    matrix.write_csv(&mut buf)?;
    fs::write(output, buf)?;
    let truth_path = truth_path_for(output);
    fs::write(
        &truth_path,
        serde_json::to_string(&TruthFile { rates_bpm: truth })?,
    )?;
    Ok(truth_path)
}

/// Input source for `run`.
pub enum RunInput<'a> {
    /// Read a trace CSV; ground truth is read from the sidecar when
    /// present.
    Trace(&'a Path),
    /// Synthesize the scene in memory and use its ground truth directly.
    Synth(&'a SceneConfig),
}

/// Execute the pipeline on a trace and score it against ground truth when
/// available. Writes the report JSON to `output` when given.
pub fn cmd_run(
    input: RunInput<'_>,
    sampling_rate_hz: f64,
    persons: PersonCount,
    opts: &PipelineOptions,
    output: Option<&Path>,
) -> Result<(BreathingReport, RunOutcome)> {
    let (matrix, truth): (PhaseDifferenceMatrix, Option<Vec<f64>>) = match input {
        RunInput::Trace(path) => {
            let file = fs::File::open(path)?;
            let matrix = PhaseDifferenceMatrix::read_csv(BufReader::new(file), sampling_rate_hz)?;
            let truth_path = truth_path_for(path);
            let truth = if truth_path.exists() {
                let text = fs::read_to_string(&truth_path)?;
                let t: TruthFile = serde_json::from_str(&text)?;
                Some(t.rates_bpm)
            } else {
                None
            };
            (matrix, truth)
        }
        RunInput::Synth(cfg) => {
            let (matrix, truth) = synth_phase_difference_matrix(cfg)?;
            (matrix, Some(truth))
        }
    };

    let mut report = run_pipeline(&matrix, persons, opts)?;
    if let Some(truth) = truth {
        score_report(&mut report, &truth)?;
    }
    let outcome = if report.success == Some(false) {
        RunOutcome::Failed
    } else {
        RunOutcome::Ok
    };
    if let Some(path) = output {
        fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok((report, outcome))
}

/// Sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepAxis {
    NoiseStd,
    SamplingRate,
    WindowPackets,
    Persons,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<SweepAxis> {
        match name {
            "noise_std" => Ok(SweepAxis::NoiseStd),
            "sampling_rate" => Ok(SweepAxis::SamplingRate),
            "window_packets" => Ok(SweepAxis::WindowPackets),
            "persons" => Ok(SweepAxis::Persons),
            other => Err(Error::Config(format!(
                "unknown sweep axis `{other}`; expected noise_std, sampling_rate, window_packets, or persons"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::NoiseStd => "noise_std",
            SweepAxis::SamplingRate => "sampling_rate",
            SweepAxis::WindowPackets => "window_packets",
            SweepAxis::Persons => "persons",
        }
    }
}

/// One row of the sweep output.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: f64,
    pub success_rate: f64,
    /// Mean per-person error over the trials that produced a full set of
    /// rates; NaN when none did.
    pub mean_error_bpm: f64,
}

/// Draw `count` rates uniformly from `[lo, hi]` bpm, pairwise at least
/// `min_sep` apart, by rejection sampling.
pub fn draw_distinct_rates(
    rng: &mut ChaCha8Rng,
    count: usize,
    lo: f64,
    hi: f64,
    min_sep: f64,
) -> Vec<f64> {
    loop {
        let mut rates: Vec<f64> = (0..count).map(|_| rng.random_range(lo..hi)).collect();
        rates.sort_by(f64::total_cmp);
        if count < 2 || rates.windows(2).all(|w| w[1] - w[0] >= min_sep) {
            return rates;
        }
    }
}

/// Derive the scene for one grid point. The window in seconds is taken
/// from the base scene, so a sampling-rate sweep keeps the observation
/// time fixed.
fn scene_for_point(base: &SceneConfig, axis: SweepAxis, value: f64) -> SceneConfig {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::NoiseStd => cfg.noise_std_rad = value,
        SweepAxis::SamplingRate => {
            let window_s = base.duration_packets as f64 / base.sampling_rate_hz;
            cfg.sampling_rate_hz = value;
            cfg.duration_packets = (window_s * value).round() as usize;
        }
        SweepAxis::WindowPackets => cfg.duration_packets = value.round() as usize,
        SweepAxis::Persons => {
            let n = value.round() as usize;
            let amp = base.persons.first().map(|p| p.amplitude).unwrap_or(0.2);
            cfg.persons = (0..n)
                .map(|_| PersonSource {
                    rate_bpm: 12.0, // replaced per trial
                    phase_rad: 0.0,
                    amplitude: amp,
                })
                .collect();
        }
    }
    cfg
}

/// Scene for one trial: fresh rates in [10, 30] bpm at least 2 bpm apart,
/// fresh phases, and the default slow trend recomputed for the drawn
/// rates when the base scene uses a sinusoid trend.
fn scene_for_trial(point: &SceneConfig, trial_seed: u64) -> SceneConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let mut cfg = point.clone();
    cfg.seed = trial_seed;
    let rates = draw_distinct_rates(&mut rng, cfg.persons.len(), 10.0, 30.0, 2.0);
    for (person, rate) in cfg.persons.iter_mut().zip(rates) {
        person.rate_bpm = rate;
        person.phase_rad = rng.random_range(0.0..std::f64::consts::TAU);
    }
    if matches!(cfg.dc_trend, TrendSpec::Sinusoid { .. }) {
        cfg.dc_trend = TrendSpec::slow_sinusoid_for(&cfg.persons);
    }
    cfg
}

/// Run `trials` seeded trials per grid point. Trials run in parallel;
/// per-trial seeds are `seed + trial_index`, so results do not depend on
/// scheduling. Failed trials count as unsuccessful.
pub fn cmd_sweep(
    base: &SceneConfig,
    axis: SweepAxis,
    values: &[f64],
    trials: usize,
    seed: u64,
    output: Option<&Path>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Config("sweep values must be nonempty".into()));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let point = scene_for_point(base, axis, value);
        let results: Vec<(bool, Option<f64>)> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let trial_seed = seed.wrapping_add(trial as u64);
                let cfg = scene_for_trial(&point, trial_seed);
                let r = cfg.persons.len();
                let opts = PipelineOptions {
                    seed: trial_seed,
                    ..PipelineOptions::default()
                };
                let truth = cfg.true_rates();
                match synth_phase_difference_matrix(&cfg)
                    .and_then(|(m, _)| run_pipeline(&m, PersonCount::Known(r), &opts))
                {
                    Ok(mut report) => {
                        if score_report(&mut report, &truth).is_err() {
                            return (false, None);
                        }
                        let mean_err = report
                            .errors_bpm
                            .as_ref()
                            .map(|e| e.iter().sum::<f64>() / e.len() as f64);
                        (report.success == Some(true), mean_err)
                    }
                    Err(_) => (false, None),
                }
            })
            .collect();
        let successes = results.iter().filter(|(ok, _)| *ok).count();
        let errs: Vec<f64> = results.iter().filter_map(|(_, e)| *e).collect();
        rows.push(SweepRow {
            param: axis.name(),
            value,
            success_rate: successes as f64 / trials as f64,
            mean_error_bpm: if errs.is_empty() {
                f64::NAN
            } else {
                errs.iter().sum::<f64>() / errs.len() as f64
            },
        });
    }
    if let Some(path) = output {
        let mut text = String::from("param,value,success_rate,mean_error_bpm\n");
        for row in &rows {
            text.push_str(&format!(
                "{},{},{},{}\n",
                row.param, row.value, row.success_rate, row.mean_error_bpm
            ));
        }
        fs::write(path, text)?;
    }
    Ok(rows)
}

/// Load a scene config file.
pub fn load_scene(path: &Path) -> Result<SceneConfig> {
    let text = fs::read_to_string(path)?;
    parse_scene_config(&text)
}
