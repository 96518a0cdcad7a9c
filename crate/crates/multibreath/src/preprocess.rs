//! Calibration and Hankelization: from phase-difference series to the
//! third-order CSI tensor.
//!
//! Calibration is two Hampel passes with the standard MAD deviation test:
//! a wide window with a tiny threshold extracts the basic trend (DC and
//! drift), and after subtracting it a narrow window with a small threshold
//! knocks down high-frequency noise. Each calibrated series is then mapped
//! onto a square Hankel matrix, and the per-subcarrier Hankel matrices are
//! stacked into the tensor.

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::PhaseDifferenceMatrix;
use ndarray::{Array2, Array3};

/// Trend extraction window half-width: 150-sample wide window.
pub const TREND_HALF_WINDOW: usize = 75;
/// Trend extraction threshold (MAD multiplier).
pub const TREND_THRESHOLD: f64 = 0.001;
/// Denoise window half-width: 6-sample wide window.
pub const DENOISE_HALF_WINDOW: usize = 3;
/// Denoise threshold (MAD multiplier).
pub const DENOISE_THRESHOLD: f64 = 0.01;

/// Consistency constant relating MAD to the standard deviation of a
/// Gaussian sample.
const MAD_SCALE: f64 = 1.4826;

/// Square Hankel matrix built from one calibrated subcarrier series.
#[derive(Debug, Clone)]
pub struct HankelMatrix {
    pub data: Array2<f64>,
    pub source_subcarrier: usize,
}

/// Third-order CSI tensor, I x J x K; frontal slice k is the Hankel matrix
/// of subcarrier k.
#[derive(Debug, Clone)]
pub struct CsiTensor {
    pub data: Array3<f64>,
}

impl CsiTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        let s = self.data.dim();
        (s.0, s.1, s.2)
    }

    /// Stack per-subcarrier Hankel matrices into a tensor. All slices must
    /// share dimensions.
    pub fn from_slices(slices: &[HankelMatrix]) -> Result<CsiTensor> {
        if slices.len() < 2 {
            return Err(Error::Dimension(
                "a CSI tensor needs at least 2 subcarrier slices".into(),
            ));
        }
        let (i, j) = slices[0].data.dim();
        let mut data = Array3::zeros((i, j, slices.len()));
        for (k, h) in slices.iter().enumerate() {
            if h.data.dim() != (i, j) {
                return Err(Error::Dimension(format!(
                    "slice {k} has shape {:?}, expected {:?}",
                    h.data.dim(),
                    (i, j)
                )));
            }
            data.slice_mut(ndarray::s![.., .., k]).assign(&h.data);
        }
        Ok(CsiTensor { data })
    }

    /// Mean of the frontal slices.
    pub fn mean_slice(&self) -> Array2<f64> {
        let (i, j, k) = self.shape();
        let mut m = Array2::zeros((i, j));
        for s in 0..k {
            m += &self.data.slice(ndarray::s![.., .., s]);
        }
        m / k as f64
    }
}

/// Hampel filter: sample `t` is replaced by the window median whenever
/// `|x_t - median| > threshold * 1.4826 * MAD` of the window
/// `[t - half_window, t + half_window]`, truncated at the boundaries.
pub fn hampel_filter(series: &[f64], half_window: usize, threshold: f64) -> Result<Vec<f64>> {
    if half_window == 0 {
        return Err(Error::Config("half_window must be >= 1".into()));
    }
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Config("threshold must be >= 0".into()));
    }
    let n = series.len();
    if n <= 2 * half_window {
        return Err(Error::SeriesTooShort {
            len: n,
            min: 2 * half_window + 1,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("hampel input"));
    }

    let mut out = series.to_vec();
    // Sorted sliding window maintained incrementally; MAD per position via
    // quickselect on a scratch buffer.
    let mut window: Vec<f64> = Vec::with_capacity(2 * half_window + 1);
    let mut scratch: Vec<f64> = Vec::with_capacity(2 * half_window + 1);
    let mut lo = 0usize;
    let mut hi = 0usize; // window covers series[lo..hi]

    for t in 0..n {
        let new_lo = t.saturating_sub(half_window);
        let new_hi = (t + half_window + 1).min(n);
        while hi < new_hi {
            let v = series[hi];
            let pos = window.partition_point(|&w| w < v);
            window.insert(pos, v);
            hi += 1;
        }
        while lo < new_lo {
            let v = series[lo];
            let pos = window.partition_point(|&w| w < v);
            // All values are finite, so the value is present.
            debug_assert!(window[pos] == v);
            window.remove(pos);
            lo += 1;
        }
        let med = median_of_sorted(&window);
        scratch.clear();
        scratch.extend(window.iter().map(|&w| (w - med).abs()));
        let mad = median_by_select(&mut scratch);
        if (series[t] - med).abs() > threshold * MAD_SCALE * mad {
            out[t] = med;
        }
    }
    Ok(out)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn median_by_select(values: &mut [f64]) -> f64 {
    let n = values.len();
    let (_, mid, _) = values.select_nth_unstable_by(n / 2, f64::total_cmp);
    let mid = *mid;
    if n % 2 == 1 {
        mid
    } else {
        let lower = values[..n / 2]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lower + mid) / 2.0
    }
}

/// Calibrate one phase-difference series: extract the basic trend with the
/// wide Hampel pass, subtract it, then denoise with the narrow pass.
///
/// Series shorter than the nominal 151-sample trend window fall back to the
/// widest odd window that fits, so short captures (low sampling rates)
/// still get detrended.
pub fn calibrate(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    let min_len = 2 * DENOISE_HALF_WINDOW + 2;
    if n < min_len {
        return Err(Error::SeriesTooShort { len: n, min: min_len });
    }
    let trend_hw = TREND_HALF_WINDOW.min((n - 1) / 2);
    let trend = hampel_filter(series, trend_hw, TREND_THRESHOLD)?;
    let detrended: Vec<f64> = series.iter().zip(&trend).map(|(x, t)| x - t).collect();
    hampel_filter(&detrended, DENOISE_HALF_WINDOW, DENOISE_THRESHOLD)
}

/// Map a length-N series onto an I x J Hankel matrix with
/// `data[i][j] = series[i + j]` and `I + J - 1 = N`.
pub fn hankelize(series: &[f64], i_rows: usize, j_cols: usize) -> Result<Array2<f64>> {
    if i_rows == 0 || j_cols == 0 || i_rows + j_cols != series.len() + 1 {
        return Err(Error::Dimension(format!(
            "hankelize: need I + J - 1 == N, got I={i_rows}, J={j_cols}, N={}",
            series.len()
        )));
    }
    Ok(Array2::from_shape_fn((i_rows, j_cols), |(i, j)| {
        series[i + j]
    }))
}

/// Calibrate every subcarrier column and stack the square Hankel matrices
/// into the CSI tensor. An even packet count drops the final packet so
/// that `I = J = (N + 1) / 2`.
pub fn build_csi_tensor(matrix: &PhaseDifferenceMatrix) -> Result<CsiTensor> {
    let k = matrix.subcarriers();
    if k < 2 {
        return Err(Error::Dimension("need at least 2 subcarriers".into()));
    }
    let mut n = matrix.packets();
    if n % 2 == 0 {
        n -= 1;
    }
    let i = (n + 1) / 2;
    let mut slices = Vec::with_capacity(k);
    for s in 0..k {
        let col: Vec<f64> = matrix.data.column(s).iter().take(n).copied().collect();
        let cal = calibrate(&col)?;
        slices.push(HankelMatrix {
            data: hankelize(&cal, i, i)?,
            source_subcarrier: s,
        });
    }
    CsiTensor::from_slices(&slices)
}

/// Estimated even component count together with a confidence flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentEstimate {
    /// Smallest even count whose leading singular values reach the energy
    /// threshold; always >= 2.
    pub count: usize,
    /// Set when the spectrum is flat at the cut (`sigma_{2R+1}/sigma_{2R} >
    /// 0.9`), meaning the estimate carries little evidence.
    pub low_confidence: bool,
}

/// Estimate the number of signal components (2R) from the singular spectrum
/// of the mean frontal slice: the smallest even count capturing at least
/// `energy_threshold` of the spectral energy.
pub fn estimate_component_count(tensor: &CsiTensor, energy_threshold: f64) -> Result<ComponentEstimate> {
    if !(energy_threshold > 0.0 && energy_threshold < 1.0) {
        return Err(Error::Config(
            "energy_threshold must be in (0, 1)".into(),
        ));
    }
    let mean = tensor.mean_slice();
    let sv = linalg::singular_values(&mean);
    let total: f64 = sv.iter().map(|s| s * s).sum();
    if total <= 0.0 {
        return Ok(ComponentEstimate {
            count: 2,
            low_confidence: true,
        });
    }
    let mut acc = 0.0;
    let mut count = sv.len().max(2);
    for (idx, s) in sv.iter().enumerate() {
        acc += s * s;
        let c = idx + 1;
        if c % 2 == 0 && acc / total >= energy_threshold {
            count = c;
            break;
        }
    }
    let count = count.max(2);
    let low_confidence = match (sv.get(count - 1), sv.get(count)) {
        (Some(&at), Some(&next)) if at > 0.0 => next / at > 0.9,
        _ => false,
    };
    Ok(ComponentEstimate {
        count,
        low_confidence,
    })
}
