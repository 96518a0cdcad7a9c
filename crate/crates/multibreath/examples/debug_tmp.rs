// temp scratch: time pipeline runs at R=3 and R=5
use multibreath::cli::draw_distinct_rates;
use multibreath::estimate::{evaluate, run_pipeline, PersonCount, PipelineOptions};
use multibreath::model::{
    noise_std_for_snr, synth_phase_difference_matrix, PersonSource, SceneConfig, TrendSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    for r in [3usize, 5] {
        let t0 = Instant::now();
        let mut ok = 0;
        let trials = 6;
        for trial in 0..trials {
            let seed = 9000 + trial as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rates = draw_distinct_rates(&mut rng, r, 10.0, 30.0, 2.0);
            let persons: Vec<PersonSource> = rates
                .iter()
                .map(|&rate| PersonSource {
                    rate_bpm: rate,
                    phase_rad: rng.random_range(0.0..std::f64::consts::TAU),
                    amplitude: 0.2,
                })
                .collect();
            let noise = noise_std_for_snr(&persons, 10.0);
            let dc_trend = TrendSpec::slow_sinusoid_for(&persons);
            let cfg = SceneConfig {
                persons,
                sampling_rate_hz: 20.0,
                duration_packets: 599,
                subcarriers: 60,
                noise_std_rad: noise,
                dc_trend,
                seed,
            };
            let (m, truth) = synth_phase_difference_matrix(&cfg).unwrap();
            let opts = PipelineOptions { seed, ..Default::default() };
            if let Ok(report) = run_pipeline(&m, PersonCount::Known(r), &opts) {
                if report.rates_bpm.len() == r {
                    let e = evaluate(&report.rates_bpm, &truth).unwrap();
                    if e.success { ok += 1; }
                }
            }
        }
        println!("R={r}: {ok}/{trials} in {:.2}s  ({:.2} s/trial)", t0.elapsed().as_secs_f64(), t0.elapsed().as_secs_f64()/trials as f64);
    }
}
