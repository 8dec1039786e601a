//! Blink segmentation on the filtered ELA signal: k-means clustering of
//! derivative peaks, flank pairing, blink-window construction, merged-blink
//! rejection, and the sliding-window scheduler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{central_derivative, local_extrema, ElaSeries};

/// Minimum number of derivative peaks per sign for a stable 2-means split.
pub const MIN_PEAKS_FOR_CLUSTERING: usize = 4;

/// Default trailing analysis window, seconds.
pub const DEFAULT_WINDOW_SPAN: f64 = 90.0;
/// Default analysis period, seconds.
pub const DEFAULT_PERIOD: f64 = 60.0;

/// A detected blink on an ELA series. Frame indices refer to the series the
/// blink was detected on (the global sample grid when produced by
/// [`sliding_analysis`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blink {
    /// Inclusive window start: nearest local maximum at or before `m1_index`.
    pub i_start: usize,
    /// Inclusive window end: first local maximum at or after `m2_index`.
    pub i_end: usize,
    /// Frame of maximum descent.
    pub m1_index: usize,
    /// Frame of maximum ascent.
    pub m2_index: usize,
    /// Maximum descent rate, degrees/second (negative).
    pub m1: f64,
    /// Maximum ascent rate, degrees/second (positive).
    pub m2: f64,
    /// Signal value at `i_start`, degrees.
    pub ela_start: f64,
    /// Signal value at `i_end`, degrees.
    pub ela_end: f64,
    /// Minimum over the window, degrees.
    pub ela_min: f64,
}

impl Blink {
    /// Type invariants: index ordering, sign of the flank rates, and the
    /// minimum not exceeding either endpoint.
    pub fn invariants_hold(&self) -> bool {
        self.i_start <= self.m1_index
            && self.m1_index < self.m2_index
            && self.m2_index <= self.i_end
            && self.m1 < 0.0
            && self.m2 > 0.0
            && self.ela_min <= self.ela_start.min(self.ela_end) + 1e-12
    }
}

/// One scheduled analysis window and the blinks newly attributed to it.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisEpoch {
    /// Seconds since the start of the stream.
    pub epoch_end_time: f64,
    /// Trailing window length, seconds.
    pub window_span: f64,
    /// Scheduling period, seconds.
    pub period: f64,
    /// Blinks first detected in this epoch, sorted by window start; blinks
    /// already claimed by an earlier epoch are not repeated.
    pub blinks: Vec<Blink>,
}

/// 1D 2-means on absolute peak magnitudes. Returns `(blink, noise)` index
/// sets into `peak_values`; the cluster with the larger mean magnitude is
/// the blink class. Centroids start at the magnitude extremes, which makes
/// the clustering deterministic; `_seed` is kept for interface stability and
/// is not consumed.
pub fn cluster_peaks(peak_values: &[f64], _seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if peak_values.len() < MIN_PEAKS_FOR_CLUSTERING {
        return Err(Error::InsufficientData(format!(
            "{} derivative peaks, need at least {MIN_PEAKS_FOR_CLUSTERING} for 2-means",
            peak_values.len()
        )));
    }
    let mags: Vec<f64> = peak_values.iter().map(|v| v.abs()).collect();
    let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        // All peaks identical: a single effective cluster, all blink class.
        return Ok(((0..mags.len()).collect(), Vec::new()));
    }
    let mut centroids = [lo, hi];
    // true = blink (high) cluster
    let mut assign: Vec<bool> = mags
        .iter()
        .map(|&m| (m - centroids[1]).abs() <= (m - centroids[0]).abs())
        .collect();
    for _ in 0..100 {
        let mut sums = [0.0; 2];
        let mut counts = [0usize; 2];
        for (i, &m) in mags.iter().enumerate() {
            let c = usize::from(assign[i]);
            sums[c] += m;
            counts[c] += 1;
        }
        for c in 0..2 {
            if counts[c] > 0 {
                centroids[c] = sums[c] / counts[c] as f64;
            }
        }
        let next: Vec<bool> = mags
            .iter()
            .map(|&m| (m - centroids[1]).abs() <= (m - centroids[0]).abs())
            .collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    let blink: Vec<usize> = (0..mags.len()).filter(|&i| assign[i]).collect();
    let noise: Vec<usize> = (0..mags.len()).filter(|&i| !assign[i]).collect();
    Ok((blink, noise))
}

/// Pairs each descending peak with the earliest unconsumed ascending peak
/// after it; peaks left without a partner are discarded.
pub fn pair_flanks(neg_peaks: &[usize], pos_peaks: &[usize]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut pos_iter = pos_peaks.iter().copied().peekable();
    for &neg in neg_peaks {
        while let Some(&pos) = pos_iter.peek() {
            if pos > neg {
                pairs.push((neg, pos));
                pos_iter.next();
                break;
            }
            pos_iter.next();
        }
    }
    pairs
}

/// Builds the blink window around a flank pair: from the nearest local
/// maximum of the signal at or before the maximum descent to the first local
/// maximum at or after the maximum ascent, clamped to the segment bounds.
pub fn build_blink_window(
    signal: &ElaSeries,
    derivative: &[f64],
    m1_index: usize,
    m2_index: usize,
) -> Blink {
    let v = &signal.values;
    let (maxima, _) = local_extrema(v);
    let i_start = maxima
        .iter()
        .rev()
        .find(|&&i| i <= m1_index)
        .copied()
        .unwrap_or(0);
    let i_end = maxima
        .iter()
        .find(|&&i| i >= m2_index)
        .copied()
        .unwrap_or(v.len() - 1);
    let ela_min = v[i_start..=i_end]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Blink {
        i_start,
        i_end,
        m1_index,
        m2_index,
        m1: derivative[m1_index],
        m2: derivative[m2_index],
        ela_start: v[i_start],
        ela_end: v[i_end],
        ela_min,
    }
}

/// True when the window holds an erroneously merged pair of blinks: the
/// signal maximum strictly between the falling and rising edges exceeds the
/// start amplitude or the end amplitude.
pub fn reject_merged(signal: &ElaSeries, blink: &Blink) -> bool {
    if blink.m2_index <= blink.m1_index + 1 {
        return false;
    }
    let interior_max = signal.values[blink.m1_index + 1..blink.m2_index]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    interior_max > blink.ela_start || interior_max > blink.ela_end
}

/// Full blink segmentation of one smoothed series: derivative -> extrema ->
/// per-sign peak clustering -> flank pairing -> window construction ->
/// merged-blink rejection. Returns a sorted, non-overlapping blink set;
/// series with too few derivative peaks yield no blinks.
pub fn detect_blinks(signal: &ElaSeries, seed: u64) -> Vec<Blink> {
    let Ok(derivative) = central_derivative(signal) else {
        return Vec::new();
    };
    let (d_maxima, d_minima) = local_extrema(&derivative);
    let neg_peaks: Vec<usize> = d_minima
        .into_iter()
        .filter(|&i| derivative[i] < 0.0)
        .collect();
    let pos_peaks: Vec<usize> = d_maxima
        .into_iter()
        .filter(|&i| derivative[i] > 0.0)
        .collect();
    let neg_values: Vec<f64> = neg_peaks.iter().map(|&i| derivative[i]).collect();
    let pos_values: Vec<f64> = pos_peaks.iter().map(|&i| derivative[i]).collect();
    // Descent and ascent speeds differ systematically, so the two signs are
    // clustered separately.
    let (Ok((neg_blink, _)), Ok((pos_blink, _))) = (
        cluster_peaks(&neg_values, seed),
        cluster_peaks(&pos_values, seed),
    ) else {
        return Vec::new();
    };
    let neg_selected: Vec<usize> = neg_blink.into_iter().map(|i| neg_peaks[i]).collect();
    let pos_selected: Vec<usize> = pos_blink.into_iter().map(|i| pos_peaks[i]).collect();
    let mut blinks = Vec::new();
    for (m1_index, m2_index) in pair_flanks(&neg_selected, &pos_selected) {
        let blink = build_blink_window(signal, &derivative, m1_index, m2_index);
        if !blink.invariants_hold() || reject_merged(signal, &blink) {
            continue;
        }
        if let Some(prev) = blinks.last() {
            let prev: &Blink = prev;
            if blink.i_start < prev.i_end {
                continue;
            }
        }
        blinks.push(blink);
    }
    blinks
}

/// Scheduling and gap handling knobs for [`sliding_analysis`].
#[derive(Debug, Clone, Copy)]
pub struct SlidingParams {
    /// Trailing window, seconds.
    pub window_span: f64,
    /// Period between epochs, seconds.
    pub period: f64,
    pub seed: u64,
}

impl Default for SlidingParams {
    fn default() -> Self {
        Self {
            window_span: DEFAULT_WINDOW_SPAN,
            period: DEFAULT_PERIOD,
            seed: 0,
        }
    }
}

/// Runs blink detection on a schedule over a smoothed, gap-split sample
/// grid: one epoch per elapsed `period`, each analyzing the trailing
/// `window_span` seconds. A blink detected by several overlapping windows is
/// attributed to the earliest epoch (deduplicated by its maximum-descent
/// frame, within one frame). Returned blink indices are grid-global.
///
/// `segments` must be smoothed series carrying their global offset as
/// `(first_slot, series)`; `grid_len` is the total grid length in frames.
pub fn sliding_analysis(
    segments: &[(usize, ElaSeries)],
    fps: f64,
    grid_len: usize,
    params: SlidingParams,
) -> Vec<AnalysisEpoch> {
    let duration = grid_len as f64 / fps;
    let mut epochs = Vec::new();
    let mut claimed: Vec<usize> = Vec::new(); // m1 grid indices of kept blinks
    let mut k = 1u64;
    while (k as f64) * params.period <= duration + 1e-9 {
        let end = k as f64 * params.period;
        let w_start = (end - params.window_span).max(0.0);
        let lo = (w_start * fps).ceil() as usize;
        let hi = ((end * fps) as usize).min(grid_len.saturating_sub(1));
        let mut epoch_blinks = Vec::new();
        for &(first_slot, ref series) in segments {
            let seg_end = first_slot + series.len(); // exclusive
            let s = lo.max(first_slot);
            let e = hi.min(seg_end.saturating_sub(1));
            if e <= s || e - s + 1 < 3 {
                continue;
            }
            let local_start = s - first_slot;
            let local_end = e - first_slot;
            let slice = ElaSeries {
                values: series.values[local_start..=local_end].to_vec(),
                fps,
                start_time: series.start_time + local_start as f64 / fps,
                segment_id: series.segment_id,
            };
            for blink in detect_blinks(&slice, params.seed) {
                let offset = s;
                let global = Blink {
                    i_start: blink.i_start + offset,
                    i_end: blink.i_end + offset,
                    m1_index: blink.m1_index + offset,
                    m2_index: blink.m2_index + offset,
                    ..blink
                };
                let duplicate = claimed
                    .iter()
                    .any(|&m| m.abs_diff(global.m1_index) <= 1);
                if !duplicate {
                    claimed.push(global.m1_index);
                    epoch_blinks.push(global);
                }
            }
        }
        epoch_blinks.sort_by_key(|b| b.i_start);
        epochs.push(AnalysisEpoch {
            epoch_end_time: end,
            window_span: params.window_span,
            period: params.period,
            blinks: epoch_blinks,
        });
        k += 1;
    }
    epochs
}
