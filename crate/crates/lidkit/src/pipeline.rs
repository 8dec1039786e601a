//! Stage glue: landmark frames -> per-frame ELA samples -> gap-split,
//! uniformly resampled grids -> smoothed segments -> blinks -> features ->
//! epoch vectors.
//!
//! Streams are treated as constant-rate at their mean FPS. Undetected
//! frames leave gaps in the grid: gaps of at most [`MAX_GAP_SECONDS`] are
//! filled by linear interpolation so a blink spanning a brief dropout stays
//! continuous, while longer gaps split the stream into independent segments
//! so that no blink is fabricated across them.

use crate::blink::{self, AnalysisEpoch, Blink, SlidingParams};
use crate::drowsiness::{aggregate_epoch, EpochFeatureVector};
use crate::error::{Error, Result};
use crate::features::{compute_feature_sequence, BlinkFeatures, DEFAULT_PERCLOS_THRESHOLD};
use crate::geometry::{ela_sample, ElaSample};
use crate::landmarks::{normalize_frame_with, select_eyelids, EyelidIndexConfig, RawLandmarkFrame};
use crate::signal::{gaussian_smooth_with_sigma, ElaSeries};

/// Longest undetected stretch bridged by interpolation, seconds.
pub const MAX_GAP_SECONDS: f64 = 0.5;

/// Options for the landmark -> ELA stage.
#[derive(Debug, Clone)]
pub struct ElaOptions {
    pub eyelid_config: EyelidIndexConfig,
    pub z_scale: f64,
}

impl Default for ElaOptions {
    fn default() -> Self {
        Self {
            eyelid_config: EyelidIndexConfig::mediapipe_face_mesh_v2(),
            z_scale: crate::landmarks::DEFAULT_Z_SCALE,
        }
    }
}

/// Computes one ELA sample per detected frame. Frames where both eyes are
/// degenerate are skipped; the number of skipped frames is returned.
pub fn ela_samples_from_frames(
    frames: &[RawLandmarkFrame],
    opts: &ElaOptions,
) -> Result<(Vec<ElaSample>, usize)> {
    let mut samples = Vec::new();
    let mut skipped = 0usize;
    for frame in frames.iter().filter(|f| f.detected) {
        let norm = normalize_frame_with(frame, opts.z_scale)?;
        let lids = select_eyelids(&norm, &opts.eyelid_config)?;
        match ela_sample(norm.timestamp, &lids, norm.yaw) {
            Ok(sample) => samples.push(sample),
            Err(Error::NoSample(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((samples, skipped))
}

/// One gap-split segment with its offset on the global frame grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Grid index of the segment's first sample.
    pub first_slot: usize,
    pub series: ElaSeries,
}

/// A uniformly resampled combined-ELA stream: grid slot `k` sits at
/// `t0 + k / fps`. Gaps longer than the interpolation limit split the grid
/// into segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub t0: f64,
    pub fps: f64,
    /// Total grid length in frames (last occupied slot + 1).
    pub len: usize,
    pub segments: Vec<Segment>,
}

impl SampleGrid {
    /// The segment containing the inclusive slot range, if a single one does.
    pub fn segment_containing(&self, start: usize, end: usize) -> Option<&Segment> {
        self.segments.iter().find(|seg| {
            start >= seg.first_slot && end < seg.first_slot + seg.series.len()
        })
    }

    pub fn duration(&self) -> f64 {
        self.len as f64 / self.fps
    }
}

/// Mean FPS of a timestamped sample stream.
pub fn estimate_fps(samples: &[ElaSample]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: samples.len(),
            min: 2,
        });
    }
    let span = samples.last().unwrap().timestamp - samples[0].timestamp;
    if span <= 0.0 {
        return Err(Error::InvalidConfig(
            "sample timestamps do not advance".into(),
        ));
    }
    Ok((samples.len() - 1) as f64 / span)
}

/// Builds the uniform grid from timestamped samples, filling short gaps by
/// linear interpolation and splitting at long ones. `fps` falls back to the
/// stream's mean rate.
pub fn build_grid(samples: &[ElaSample], fps: Option<f64>, max_gap_s: f64) -> Result<SampleGrid> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no ELA samples"));
    }
    let fps = match fps {
        Some(f) if f > 0.0 => f,
        Some(_) => return Err(Error::InvalidConfig("fps must be positive".into())),
        None => estimate_fps(samples)?,
    };
    let t0 = samples[0].timestamp;
    let mut slots: Vec<Option<f64>> = Vec::new();
    for s in samples {
        let k = ((s.timestamp - t0) * fps).round();
        if k < 0.0 {
            continue;
        }
        let k = k as usize;
        if k >= slots.len() {
            slots.resize(k + 1, None);
        }
        // Colliding samples (variable-rate input) keep the last value.
        slots[k] = Some(s.ela_combined);
    }
    let len = slots.len();
    let max_gap_frames = (max_gap_s * fps).floor() as usize;

    let mut segments: Vec<Segment> = Vec::new();
    let mut current: Option<(usize, Vec<f64>)> = None;
    let mut k = 0usize;
    while k < len {
        match slots[k] {
            Some(v) => {
                match current.as_mut() {
                    Some((_, values)) => values.push(v),
                    None => current = Some((k, vec![v])),
                }
                k += 1;
            }
            None => {
                // Measure the gap run.
                let gap_start = k;
                while k < len && slots[k].is_none() {
                    k += 1;
                }
                let gap_len = k - gap_start;
                match current.as_mut() {
                    Some((_, values)) if k < len && gap_len <= max_gap_frames => {
                        // Bridge: linear interpolation between neighbors.
                        let prev = *values.last().unwrap();
                        let next = slots[k].unwrap();
                        for j in 0..gap_len {
                            let u = (j + 1) as f64 / (gap_len + 1) as f64;
                            values.push(prev + u * (next - prev));
                        }
                    }
                    Some(_) => {
                        // Too long: close the running segment.
                        let (first_slot, values) = current.take().unwrap();
                        segments.push(make_segment(first_slot, values, fps, t0, segments.len()));
                    }
                    None => {}
                }
            }
        }
    }
    if let Some((first_slot, values)) = current.take() {
        segments.push(make_segment(first_slot, values, fps, t0, segments.len()));
    }
    Ok(SampleGrid {
        t0,
        fps,
        len,
        segments,
    })
}

fn make_segment(
    first_slot: usize,
    values: Vec<f64>,
    fps: f64,
    t0: f64,
    segment_id: usize,
) -> Segment {
    Segment {
        first_slot,
        series: ElaSeries {
            values,
            fps,
            start_time: t0 + first_slot as f64 / fps,
            segment_id,
        },
    }
}

/// Gaussian-smooths every segment in place. `sigma_override` is in samples;
/// the default is `fps / 30`.
pub fn smooth_grid(grid: &SampleGrid, sigma_override: Option<f64>) -> SampleGrid {
    let mut out = grid.clone();
    for seg in &mut out.segments {
        let sigma = sigma_override.unwrap_or_else(|| seg.series.default_sigma());
        seg.series = gaussian_smooth_with_sigma(&seg.series, sigma);
    }
    out
}

/// Sliding-window blink analysis over a smoothed grid; blink indices are
/// global grid slots.
pub fn analyze_grid(grid: &SampleGrid, params: SlidingParams) -> Vec<AnalysisEpoch> {
    let segments: Vec<(usize, ElaSeries)> = grid
        .segments
        .iter()
        .map(|s| (s.first_slot, s.series.clone()))
        .collect();
    blink::sliding_analysis(&segments, grid.fps, grid.len, params)
}

/// Whole-stream blink detection (no scheduling): every segment is analyzed
/// once; indices are global grid slots.
pub fn detect_grid(grid: &SampleGrid, seed: u64) -> Vec<Blink> {
    let mut blinks = Vec::new();
    for seg in &grid.segments {
        for b in blink::detect_blinks(&seg.series, seed) {
            blinks.push(Blink {
                i_start: b.i_start + seg.first_slot,
                i_end: b.i_end + seg.first_slot,
                m1_index: b.m1_index + seg.first_slot,
                m2_index: b.m2_index + seg.first_slot,
                ..b
            });
        }
    }
    blinks.sort_by_key(|b| b.i_start);
    blinks
}

fn localize(blink: &Blink, seg: &Segment) -> Blink {
    Blink {
        i_start: blink.i_start - seg.first_slot,
        i_end: blink.i_end - seg.first_slot,
        m1_index: blink.m1_index - seg.first_slot,
        m2_index: blink.m2_index - seg.first_slot,
        ..*blink
    }
}

/// Computes blink features for grid-global blinks, chaining previous-blink
/// context within each segment. Returns `(blink index, features)` pairs for
/// accepted blinks and `(blink index, diagnostic)` for dropped ones.
pub fn features_on_grid(
    grid: &SampleGrid,
    blinks: &[Blink],
    perclos_threshold: f64,
) -> (Vec<(usize, BlinkFeatures)>, Vec<(usize, String)>) {
    let mut out = Vec::new();
    let mut dropped = Vec::new();
    for seg in &grid.segments {
        let seg_range =
            |b: &Blink| b.i_start >= seg.first_slot && b.i_end < seg.first_slot + seg.series.len();
        let indexed: Vec<(usize, Blink)> = blinks
            .iter()
            .enumerate()
            .filter(|(_, b)| seg_range(b))
            .map(|(i, b)| (i, localize(b, seg)))
            .collect();
        let local: Vec<Blink> = indexed.iter().map(|(_, b)| *b).collect();
        let (features, seg_dropped) =
            compute_feature_sequence(&seg.series, &local, perclos_threshold);
        for (local_idx, f) in features {
            out.push((indexed[local_idx].0, f));
        }
        for (local_idx, why) in seg_dropped {
            dropped.push((indexed[local_idx].0, why));
        }
    }
    out.sort_by_key(|(i, _)| *i);
    dropped.sort_by_key(|(i, _)| *i);
    (out, dropped)
}

/// How blinks are grouped into epochs for drowsiness aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochMode {
    /// One epoch per detected blink, aggregating over the trailing span;
    /// this mirrors per-blink clip scoring on short recordings.
    PerBlink,
    /// Fixed schedule: one epoch per period over the trailing span.
    Sliding,
}

/// Groups blink features into epoch vectors using their `t1` anchor times.
pub fn epoch_vectors(
    features: &[BlinkFeatures],
    mode: EpochMode,
    span: f64,
    period: f64,
    stream_duration: f64,
) -> Vec<EpochFeatureVector> {
    let mut epochs = Vec::new();
    let collect = |end: f64| -> Vec<BlinkFeatures> {
        features
            .iter()
            .filter(|f| f.t1 >= end - span && f.t1 <= end)
            .copied()
            .collect()
    };
    match mode {
        EpochMode::PerBlink => {
            for f in features {
                let end = f.t4;
                let in_window: Vec<BlinkFeatures> = features
                    .iter()
                    .filter(|g| g.t1 >= end - span && g.t1 <= end)
                    .copied()
                    .collect();
                if let Ok(v) = aggregate_epoch(end, &in_window) {
                    epochs.push(v);
                }
            }
        }
        EpochMode::Sliding => {
            let mut k = 1u64;
            while (k as f64) * period <= stream_duration + 1e-9 {
                let end = k as f64 * period;
                let in_window = collect(end);
                if let Ok(v) = aggregate_epoch(end, &in_window) {
                    epochs.push(v);
                }
                k += 1;
            }
        }
    }
    epochs
}

/// End-to-end helper for a generated or ingested sample stream: grid,
/// smoothing, detection (sliding when the stream covers at least one
/// period, whole-stream otherwise), features and epoch vectors.
pub struct StreamAnalysis {
    pub grid: SampleGrid,
    pub smoothed: SampleGrid,
    pub epochs: Vec<AnalysisEpoch>,
    pub blinks: Vec<Blink>,
    pub features: Vec<(usize, BlinkFeatures)>,
    pub dropped: Vec<(usize, String)>,
}

/// Analysis knobs shared by the CLI and the evaluation suites.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub seed: u64,
    pub window_span: f64,
    pub period: f64,
    pub max_gap_s: f64,
    pub smooth_sigma_override: Option<f64>,
    pub perclos_threshold: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            window_span: blink::DEFAULT_WINDOW_SPAN,
            period: blink::DEFAULT_PERIOD,
            max_gap_s: MAX_GAP_SECONDS,
            smooth_sigma_override: None,
            perclos_threshold: DEFAULT_PERCLOS_THRESHOLD,
        }
    }
}

/// Runs grid building, smoothing, blink detection and feature extraction
/// over one sample stream. Streams shorter than one scheduling period fall
/// back to a single whole-stream analysis so short fixtures still produce
/// blinks.
pub fn analyze_samples(
    samples: &[ElaSample],
    fps: Option<f64>,
    opts: &AnalysisOptions,
) -> Result<StreamAnalysis> {
    let grid = build_grid(samples, fps, opts.max_gap_s)?;
    let smoothed = smooth_grid(&grid, opts.smooth_sigma_override);
    let (epochs, blinks) = if smoothed.duration() + 1e-9 >= opts.period {
        let epochs = analyze_grid(
            &smoothed,
            SlidingParams {
                window_span: opts.window_span,
                period: opts.period,
                seed: opts.seed,
            },
        );
        let mut blinks: Vec<Blink> = epochs.iter().flat_map(|e| e.blinks.clone()).collect();
        blinks.sort_by_key(|b| b.i_start);
        (epochs, blinks)
    } else {
        (Vec::new(), detect_grid(&smoothed, opts.seed))
    };
    let (features, dropped) = features_on_grid(&smoothed, &blinks, opts.perclos_threshold);
    Ok(StreamAnalysis {
        grid,
        smoothed,
        epochs,
        blinks,
        features,
        dropped,
    })
}
