//! Domain types and the synthetic multi-person breathing scene generator.
//!
//! The generator stands in for the radio link: it produces per-subcarrier
//! phase-difference time series in which each person contributes a cosine
//! at their breathing frequency, mixed with positive per-subcarrier channel
//! gains and per-subcarrier phase offsets, plus an optional slow DC trend
//! and Gaussian measurement noise. Ground truth rates are returned next to
//! the data, so every downstream stage can be scored without hardware.

use crate::error::{Error, Result};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::TAU;
use std::io::{BufRead, Write};

/// Lowest and highest breathing rates the pipeline is designed for, in bpm.
pub const BREATHING_BAND_BPM: (f64, f64) = (6.0, 60.0);

/// One breathing person in a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonSource {
    /// Breathing rate in breaths per minute, within [6, 60].
    pub rate_bpm: f64,
    /// Base phase in radians, in [0, 2*pi).
    pub phase_rad: f64,
    /// Chest-motion amplitude in radians of phase difference.
    pub amplitude: f64,
}

impl PersonSource {
    pub fn new(rate_bpm: f64, phase_rad: f64, amplitude: f64) -> Result<Self> {
        let p = PersonSource {
            rate_bpm,
            phase_rad,
            amplitude,
        };
        p.validate()?;
        Ok(p)
    }

    /// Angular frequency in rad/s, `w = 2*pi*rate/60`.
    pub fn angular_freq(&self) -> f64 {
        TAU * self.rate_bpm / 60.0
    }

    fn validate(&self) -> Result<()> {
        if !(BREATHING_BAND_BPM.0..=BREATHING_BAND_BPM.1).contains(&self.rate_bpm) {
            return Err(Error::Config(format!(
                "rate_bpm {} outside [{}, {}]",
                self.rate_bpm, BREATHING_BAND_BPM.0, BREATHING_BAND_BPM.1
            )));
        }
        if !self.rate_bpm.is_finite() || !self.phase_rad.is_finite() || !self.amplitude.is_finite()
        {
            return Err(Error::Config("person fields must be finite".into()));
        }
        if self.amplitude <= 0.0 {
            return Err(Error::Config("amplitude must be positive".into()));
        }
        Ok(())
    }
}

/// DC trend added to every subcarrier column.
#[derive(Debug, Clone, PartialEq)]
pub enum TrendSpec {
    None,
    /// Linear drift, radians per packet.
    Linear { slope_rad_per_packet: f64 },
    /// Slow sinusoid, `amplitude_rad * cos(2*pi*t_sec/period_s)`.
    Sinusoid { amplitude_rad: f64, period_s: f64 },
}

impl TrendSpec {
    /// Default trend for a scene: a sinusoid with period 10x the longest
    /// breathing period and amplitude 5x the largest breathing amplitude.
    pub fn slow_sinusoid_for(persons: &[PersonSource]) -> TrendSpec {
        let min_rate = persons
            .iter()
            .map(|p| p.rate_bpm)
            .fold(f64::INFINITY, f64::min);
        let max_amp = persons.iter().map(|p| p.amplitude).fold(0.0, f64::max);
        if !min_rate.is_finite() || max_amp <= 0.0 {
            return TrendSpec::None;
        }
        TrendSpec::Sinusoid {
            amplitude_rad: 5.0 * max_amp,
            period_s: 10.0 * 60.0 / min_rate,
        }
    }

    fn value_at(&self, packet: usize, sampling_rate_hz: f64) -> f64 {
        match self {
            TrendSpec::None => 0.0,
            TrendSpec::Linear {
                slope_rad_per_packet,
            } => slope_rad_per_packet * packet as f64,
            TrendSpec::Sinusoid {
                amplitude_rad,
                period_s,
            } => {
                let t = packet as f64 / sampling_rate_hz;
                amplitude_rad * (TAU * t / period_s).cos()
            }
        }
    }
}

/// Full description of a synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub persons: Vec<PersonSource>,
    pub sampling_rate_hz: f64,
    pub duration_packets: usize,
    pub subcarriers: usize,
    pub noise_std_rad: f64,
    pub dc_trend: TrendSpec,
    pub seed: u64,
}

impl SceneConfig {
    /// Scene with the standard link parameters: 20 Hz sampling, 599 packets,
    /// 60 subcarriers, no noise, and the default slow-sinusoid trend.
    pub fn new(persons: Vec<PersonSource>, seed: u64) -> Result<Self> {
        let dc_trend = TrendSpec::slow_sinusoid_for(&persons);
        let cfg = SceneConfig {
            persons,
            sampling_rate_hz: 20.0,
            duration_packets: 599,
            subcarriers: 60,
            noise_std_rad: 0.0,
            dc_trend,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.persons.is_empty() {
            return Err(Error::Config("persons must be nonempty".into()));
        }
        for p in &self.persons {
            p.validate()?;
        }
        if !(self.sampling_rate_hz.is_finite() && self.sampling_rate_hz > 0.0) {
            return Err(Error::Config("sampling_rate_hz must be positive".into()));
        }
        if self.duration_packets < 3 {
            return Err(Error::Config("duration_packets must be >= 3".into()));
        }
        if self.subcarriers < 2 {
            return Err(Error::Config("subcarriers must be >= 2".into()));
        }
        if !(self.noise_std_rad.is_finite() && self.noise_std_rad >= 0.0) {
            return Err(Error::Config("noise_std_rad must be non-negative".into()));
        }
        Ok(())
    }

    /// Ground-truth rates sorted ascending.
    pub fn true_rates(&self) -> Vec<f64> {
        let mut rates: Vec<f64> = self.persons.iter().map(|p| p.rate_bpm).collect();
        rates.sort_by(f64::total_cmp);
        rates
    }
}

/// Calibratable observable: packets x subcarriers, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDifferenceMatrix {
    pub data: Array2<f64>,
    pub sampling_rate_hz: f64,
}

impl PhaseDifferenceMatrix {
    pub fn new(data: Array2<f64>, sampling_rate_hz: f64) -> Result<Self> {
        if data.nrows() < 3 || data.ncols() < 2 {
            return Err(Error::Dimension(format!(
                "phase-difference matrix needs >= 3 packets and >= 2 subcarriers, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("phase-difference matrix"));
        }
        if !(sampling_rate_hz.is_finite() && sampling_rate_hz > 0.0) {
            return Err(Error::Config("sampling_rate_hz must be positive".into()));
        }
        Ok(PhaseDifferenceMatrix {
            data,
            sampling_rate_hz,
        })
    }

    pub fn packets(&self) -> usize {
        self.data.nrows()
    }

    pub fn subcarriers(&self) -> usize {
        self.data.ncols()
    }

    /// Write as CSV with header `packet,sc_0,...,sc_{K-1}`. Floats use the
    /// shortest representation that round-trips exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let k = self.subcarriers();
        let mut header = String::from("packet");
        for j in 0..k {
            header.push_str(&format!(",sc_{j}"));
        }
        writeln!(w, "{header}")?;
        for (i, row) in self.data.rows().into_iter().enumerate() {
            let mut line = i.to_string();
            for v in row {
                line.push(',');
                line.push_str(&format!("{v}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Parse the CSV trace format. Malformed input is reported with the
    /// offending row and column (both 0-indexed, header is row 0).
    pub fn read_csv<R: BufRead>(r: R, sampling_rate_hz: f64) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::CsvFormat {
                row: 0,
                col: 0,
                msg: "empty file".into(),
            })?
            .map_err(Error::Io)?;
        let fields: Vec<&str> = header.trim_end().split(',').collect();
        if fields.first() != Some(&"packet") {
            return Err(Error::CsvFormat {
                row: 0,
                col: 0,
                msg: format!("expected header to start with `packet`, got `{header}`"),
            });
        }
        let k = fields.len() - 1;
        for (j, f) in fields.iter().skip(1).enumerate() {
            let expected = format!("sc_{j}");
            if *f != expected {
                return Err(Error::CsvFormat {
                    row: 0,
                    col: j + 1,
                    msg: format!("expected header field `{expected}`, got `{f}`"),
                });
            }
        }
        let mut rows: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for (i, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.trim_end().split(',').collect();
            if cells.len() != k + 1 {
                return Err(Error::CsvFormat {
                    row: i + 1,
                    col: cells.len().saturating_sub(1),
                    msg: format!("expected {} fields, got {}", k + 1, cells.len()),
                });
            }
            let packet: usize = cells[0].parse().map_err(|_| Error::CsvFormat {
                row: i + 1,
                col: 0,
                msg: format!("invalid packet index `{}`", cells[0]),
            })?;
            if packet != n {
                return Err(Error::CsvFormat {
                    row: i + 1,
                    col: 0,
                    msg: format!("packet index {packet} out of order, expected {n}"),
                });
            }
            for (j, cell) in cells.iter().skip(1).enumerate() {
                let v: f64 = cell.parse().map_err(|_| Error::CsvFormat {
                    row: i + 1,
                    col: j + 1,
                    msg: format!("non-numeric value `{cell}`"),
                })?;
                rows.push(v);
            }
            n += 1;
        }
        let data = Array2::from_shape_vec((n, k), rows)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        PhaseDifferenceMatrix::new(data, sampling_rate_hz)
    }
}

/// Per-(person, subcarrier) channel mixing drawn deterministically from the
/// scene seed: positive gains in [0.5, 1.5], and one phase offset per
/// (person, antenna pair).
///
/// The gains model per-path attenuation. The subcarrier streams come from
/// two antenna pairs — the first and second half of the columns — whose
/// propagation paths differ, so each person carries an independent phase
/// offset on each half. This two-group structure is what makes the mode-3
/// factor of the CSI tensor well-conditioned (its k-rank is at least 2)
/// while keeping the tensor rank at exactly two per person.
#[derive(Debug, Clone)]
pub struct MixingProfile {
    /// persons x subcarriers.
    pub gains: Array2<f64>,
    /// persons x subcarriers; constant on each antenna-pair half.
    pub phase_offsets: Array2<f64>,
}

/// Regenerate the mixing profile for a scene. The generator uses this
/// function internally, so callers can reproduce columns elementwise.
pub fn mixing_profile(cfg: &SceneConfig) -> MixingProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    draw_mixing(&mut rng, cfg.persons.len(), cfg.subcarriers)
}

fn draw_mixing(rng: &mut ChaCha8Rng, p: usize, k: usize) -> MixingProfile {
    let mut gains = Array2::zeros((p, k));
    let mut phase_offsets = Array2::zeros((p, k));
    for i in 0..p {
        for r in 0..k {
            gains[[i, r]] = rng.random_range(0.5..1.5);
        }
    }
    let half = k / 2;
    for i in 0..p {
        let first = rng.random_range(0.0..TAU);
        let second = rng.random_range(0.0..TAU);
        for r in 0..k {
            phase_offsets[[i, r]] = if r < half { first } else { second };
        }
    }
    MixingProfile {
        gains,
        phase_offsets,
    }
}

/// Generate the phase-difference matrix for a scene along with the ground
/// truth rates (sorted ascending).
///
/// Column `r` is `sum_i gain[i,r] * A_i * cos(w_i t + phi_i + theta[i,r])
/// + trend(t) + noise`, with `t` in seconds.
pub fn synth_phase_difference_matrix(
    cfg: &SceneConfig,
) -> Result<(PhaseDifferenceMatrix, Vec<f64>)> {
    cfg.validate()?;
    // The noise stream continues where the mixing draws left off.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mix = draw_mixing(&mut rng, cfg.persons.len(), cfg.subcarriers);
    let normal = Normal::new(0.0, cfg.noise_std_rad.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Config(e.to_string()))?;

    let n = cfg.duration_packets;
    let k = cfg.subcarriers;
    let fs = cfg.sampling_rate_hz;
    let mut data = Array2::zeros((n, k));
    for r in 0..k {
        for t in 0..n {
            let t_sec = t as f64 / fs;
            let mut v = cfg.dc_trend.value_at(t, fs);
            for (i, person) in cfg.persons.iter().enumerate() {
                v += mix.gains[[i, r]]
                    * person.amplitude
                    * (person.angular_freq() * t_sec
                        + person.phase_rad
                        + mix.phase_offsets[[i, r]])
                        .cos();
            }
            if cfg.noise_std_rad > 0.0 {
                v += normal.sample(&mut rng);
            }
            data[[t, r]] = v;
        }
    }
    let matrix = PhaseDifferenceMatrix::new(data, fs)?;
    Ok((matrix, cfg.true_rates()))
}

/// Noise standard deviation that realizes `snr_db` for a set of persons,
/// where SNR is mean per-subcarrier signal power over noise variance and
/// the expected squared mixing gain is E[U(0.5,1.5)^2] = 13/12.
pub fn noise_std_for_snr(persons: &[PersonSource], snr_db: f64) -> f64 {
    let mean_gain_sq = 13.0 / 12.0;
    let signal_power: f64 = persons
        .iter()
        .map(|p| mean_gain_sq * p.amplitude * p.amplitude / 2.0)
        .sum();
    (signal_power * 10f64.powf(-snr_db / 10.0)).sqrt()
}

/// Parameters of the per-packet phase error model: packet boundary
/// detection delay, sampling frequency offset, and carrier frequency
/// offset, plus the per-antenna PLL offsets.
#[derive(Debug, Clone)]
pub struct PhaseErrorParams {
    /// FFT size of the OFDM demodulator.
    pub fft_size: usize,
    /// Packet boundary detection delay is drawn uniform in [0, this] samples.
    pub boundary_delay_max: f64,
    /// Relative sampling period mismatch (T' - T) / T.
    pub sfo_ratio: f64,
    /// Data symbol length in seconds (T_u).
    pub data_symbol_len_s: f64,
    /// Total symbol length including guard interval in seconds (T_s).
    pub symbol_len_s: f64,
    /// Center frequency difference between transmitter and receiver, Hz.
    pub freq_offset_hz: f64,
    /// Per-packet sampling time offset n is drawn uniform in [0, this).
    pub sampling_offset_max: u64,
    /// PLL initial phase offset of antenna a, radians.
    pub beta_a: f64,
    /// PLL initial phase offset of antenna b, radians.
    pub beta_b: f64,
}

impl Default for PhaseErrorParams {
    fn default() -> Self {
        // 20 MHz OFDM numbers; the frequency offset is large enough that
        // the CFO term wraps many turns packet to packet.
        PhaseErrorParams {
            fft_size: 64,
            boundary_delay_max: 2.0,
            sfo_ratio: 25e-6,
            data_symbol_len_s: 3.2e-6,
            symbol_len_s: 4.0e-6,
            freq_offset_hz: 61.7e3,
            sampling_offset_max: 4096,
            beta_a: 0.7,
            beta_b: 2.9,
        }
    }
}

/// Two per-antenna measured phase series for one subcarrier, kept unwrapped,
/// together with every error term that went into them.
///
/// The per-packet terms `lambda_p + lambda_s` (scaled by the subcarrier
/// index) and `lambda_c` are identical across the two antennas, so they
/// cancel exactly in `phase_a - phase_b`.
#[derive(Debug, Clone)]
pub struct RawPhasePair {
    pub phase_a: Vec<f64>,
    pub phase_b: Vec<f64>,
    pub lambda_p: Vec<f64>,
    pub lambda_s: Vec<f64>,
    pub lambda_c: Vec<f64>,
    pub beta_a: f64,
    pub beta_b: f64,
    pub noise_a: Vec<f64>,
    pub noise_b: Vec<f64>,
    /// The breathing-plus-trend phase difference without offsets or noise.
    pub clean_difference: Vec<f64>,
}

impl RawPhasePair {
    /// `phase_a - phase_b` per packet.
    pub fn difference(&self) -> Vec<f64> {
        self.phase_a
            .iter()
            .zip(&self.phase_b)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Generate a raw per-antenna phase pair for one subcarrier with the
/// default error model.
pub fn synth_raw_phase_pair(cfg: &SceneConfig, subcarrier_index: usize) -> Result<RawPhasePair> {
    synth_raw_phase_pair_with(cfg, subcarrier_index, &PhaseErrorParams::default())
}

/// Generate a raw per-antenna phase pair for one subcarrier.
///
/// Antenna b observes a static path; antenna a additionally observes the
/// breathing-modulated path, so the true phase difference equals the clean
/// scene column for this subcarrier. Static path phases are absorbed into
/// the beta offsets.
pub fn synth_raw_phase_pair_with(
    cfg: &SceneConfig,
    subcarrier_index: usize,
    params: &PhaseErrorParams,
) -> Result<RawPhasePair> {
    cfg.validate()?;
    if subcarrier_index >= cfg.subcarriers {
        return Err(Error::Config(format!(
            "subcarrier_index {} out of range 0..{}",
            subcarrier_index, cfg.subcarriers
        )));
    }
    let mix = mixing_profile(cfg);
    let n = cfg.duration_packets;
    let fs = cfg.sampling_rate_hz;
    let m_i = (subcarrier_index + 1) as f64;

    let mut rng =
        ChaCha8Rng::seed_from_u64(cfg.seed ^ (subcarrier_index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let normal = Normal::new(0.0, cfg.noise_std_rad.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut pair = RawPhasePair {
        phase_a: Vec::with_capacity(n),
        phase_b: Vec::with_capacity(n),
        lambda_p: Vec::with_capacity(n),
        lambda_s: Vec::with_capacity(n),
        lambda_c: Vec::with_capacity(n),
        beta_a: params.beta_a,
        beta_b: params.beta_b,
        noise_a: Vec::with_capacity(n),
        noise_b: Vec::with_capacity(n),
        clean_difference: Vec::with_capacity(n),
    };

    for t in 0..n {
        let t_sec = t as f64 / fs;
        let mut clean = cfg.dc_trend.value_at(t, fs);
        for (i, person) in cfg.persons.iter().enumerate() {
            clean += mix.gains[[i, subcarrier_index]]
                * person.amplitude
                * (person.angular_freq() * t_sec
                    + person.phase_rad
                    + mix.phase_offsets[[i, subcarrier_index]])
                    .cos();
        }

        let delta_t = rng.random_range(0.0..=params.boundary_delay_max);
        let n_off = rng.random_range(0..params.sampling_offset_max) as f64;
        let lambda_p = TAU * delta_t / params.fft_size as f64;
        let lambda_s =
            TAU * params.sfo_ratio * (params.symbol_len_s / params.data_symbol_len_s) * n_off;
        let lambda_c = TAU * params.freq_offset_hz * params.symbol_len_s * n_off;
        // The shared term can grow to thousands of radians; reduce it mod
        // 2*pi (identically for both antennas) so the difference cancels at
        // full double precision.
        let shared = ((lambda_p + lambda_s) * m_i + lambda_c).rem_euclid(TAU);

        let (z_a, z_b) = if cfg.noise_std_rad > 0.0 {
            (normal.sample(&mut rng), normal.sample(&mut rng))
        } else {
            (0.0, 0.0)
        };

        pair.phase_a.push(clean + shared + params.beta_a + z_a);
        pair.phase_b.push(shared + params.beta_b + z_b);
        pair.lambda_p.push(lambda_p);
        pair.lambda_s.push(lambda_s);
        pair.lambda_c.push(lambda_c);
        pair.noise_a.push(z_a);
        pair.noise_b.push(z_b);
        pair.clean_difference.push(clean);
    }
    Ok(pair)
}

/// Circular standard deviation of a phase sample, `sqrt(-2 ln |R|)` where
/// `R` is the mean resultant of the unit phasors.
pub fn circular_std(phases: &[f64]) -> f64 {
    if phases.is_empty() {
        return 0.0;
    }
    let (mut c, mut s) = (0.0, 0.0);
    for &p in phases {
        c += p.cos();
        s += p.sin();
    }
    let r = (c * c + s * s).sqrt() / phases.len() as f64;
    if r <= 0.0 {
        f64::INFINITY
    } else {
        (-2.0 * r.ln()).max(0.0).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Flat key-value scene files
// ---------------------------------------------------------------------------

/// Parse a scene config from the flat key-value format.
///
/// Keys match the `SceneConfig` field names exactly:
///
/// ```text
/// persons = 12:0.0:0.2, 17:1.5:0.2, 25:3.0:0.2   # rate_bpm:phase_rad:amplitude
/// sampling_rate_hz = 20
/// duration_packets = 599
/// subcarriers = 60
/// noise_std_rad = 0.05
/// dc_trend = sinusoid:1.0:60.0                    # none | linear:<slope> | sinusoid:<amp>:<period_s>
/// seed = 42
/// ```
///
/// `persons` entries may also be bare rates (`persons = 12, 17, 25`), which
/// use phase 0 and amplitude 0.2. A missing `dc_trend` selects the default
/// slow sinusoid; other missing keys take the standard link defaults.
pub fn parse_scene_config(text: &str) -> Result<SceneConfig> {
    let mut persons: Option<Vec<PersonSource>> = None;
    let mut sampling_rate_hz = 20.0;
    let mut duration_packets = 599usize;
    let mut subcarriers = 60usize;
    let mut noise_std_rad = 0.0;
    let mut dc_trend: Option<TrendSpec> = None;
    let mut seed = 0u64;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("scene line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let ctx = |what: &str| Error::Config(format!("scene line {}: {what}", lineno + 1));
        match key {
            "persons" => {
                let mut list = Vec::new();
                for entry in value.split(',') {
                    let entry = entry.trim();
                    if entry.is_empty() {
                        continue;
                    }
                    let parts: Vec<&str> = entry.split(':').collect();
                    let person = match parts.as_slice() {
                        [rate] => PersonSource::new(
                            rate.trim().parse().map_err(|_| ctx("bad rate"))?,
                            0.0,
                            0.2,
                        )?,
                        [rate, phase, amp] => PersonSource::new(
                            rate.trim().parse().map_err(|_| ctx("bad rate"))?,
                            phase.trim().parse().map_err(|_| ctx("bad phase"))?,
                            amp.trim().parse().map_err(|_| ctx("bad amplitude"))?,
                        )?,
                        _ => {
                            return Err(ctx("person entry must be `rate` or `rate:phase:amplitude`"))
                        }
                    };
                    list.push(person);
                }
                persons = Some(list);
            }
            "sampling_rate_hz" => {
                sampling_rate_hz = value.parse().map_err(|_| ctx("bad sampling_rate_hz"))?
            }
            "duration_packets" => {
                duration_packets = value.parse().map_err(|_| ctx("bad duration_packets"))?
            }
            "subcarriers" => subcarriers = value.parse().map_err(|_| ctx("bad subcarriers"))?,
            "noise_std_rad" => {
                noise_std_rad = value.parse().map_err(|_| ctx("bad noise_std_rad"))?
            }
            "seed" => seed = value.parse().map_err(|_| ctx("bad seed"))?,
            "dc_trend" => {
                let parts: Vec<&str> = value.split(':').collect();
                let spec = match parts.as_slice() {
                    ["none"] => TrendSpec::None,
                    ["linear", slope] => TrendSpec::Linear {
                        slope_rad_per_packet: slope.trim().parse().map_err(|_| ctx("bad slope"))?,
                    },
                    ["sinusoid", amp, period] => TrendSpec::Sinusoid {
                        amplitude_rad: amp.trim().parse().map_err(|_| ctx("bad amplitude"))?,
                        period_s: period.trim().parse().map_err(|_| ctx("bad period"))?,
                    },
                    _ => return Err(ctx("dc_trend must be none, linear:<s>, or sinusoid:<a>:<p>")),
                };
                dc_trend = Some(spec);
            }
            other => return Err(ctx(&format!("unknown key `{other}`"))),
        }
    }

    let persons = persons.ok_or_else(|| Error::Config("scene file missing `persons`".into()))?;
    let dc_trend = dc_trend.unwrap_or_else(|| TrendSpec::slow_sinusoid_for(&persons));
    let cfg = SceneConfig {
        persons,
        sampling_rate_hz,
        duration_packets,
        subcarriers,
        noise_std_rad,
        dc_trend,
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Render a scene config in the flat key-value format parsed by
/// [`parse_scene_config`].
pub fn write_scene_config(cfg: &SceneConfig) -> String {
    let persons = cfg
        .persons
        .iter()
        .map(|p| format!("{}:{}:{}", p.rate_bpm, p.phase_rad, p.amplitude))
        .collect::<Vec<_>>()
        .join(", ");
    let trend = match &cfg.dc_trend {
        TrendSpec::None => "none".to_string(),
        TrendSpec::Linear {
            slope_rad_per_packet,
        } => format!("linear:{slope_rad_per_packet}"),
        TrendSpec::Sinusoid {
            amplitude_rad,
            period_s,
        } => format!("sinusoid:{amplitude_rad}:{period_s}"),
    };
    format!(
        "persons = {persons}\nsampling_rate_hz = {}\nduration_packets = {}\nsubcarriers = {}\nnoise_std_rad = {}\ndc_trend = {trend}\nseed = {}\n",
        cfg.sampling_rate_hz, cfg.duration_packets, cfg.subcarriers, cfg.noise_std_rad, cfg.seed
    )
}
