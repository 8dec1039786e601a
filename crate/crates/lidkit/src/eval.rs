//! Scoring: overlap-based blink detection accuracy, reconstruction error
//! sweeps over set angles and poses, the ELA-vs-EAR variance comparison and
//! the frame-rate bias report.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::drowsiness::FEATURE_NAMES;
use crate::error::{Error, Result};
use crate::features::BlinkFeatures;
use crate::geometry::ear;
use crate::pipeline::{analyze_samples, ela_samples_from_frames, AnalysisOptions, ElaOptions};
use crate::synth::{
    generate_landmark_sequence, model_index_config, sample_plan, SignalPlan, SynthScenario,
    MODEL_LEFT_EAR_INDICES,
};

/// An inclusive frame range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameWindow {
    pub start_frame: usize,
    pub end_frame: usize,
}

impl FrameWindow {
    pub fn new(start_frame: usize, end_frame: usize) -> Self {
        Self {
            start_frame,
            end_frame,
        }
    }

    fn overlaps(&self, other: &FrameWindow) -> bool {
        self.start_frame <= other.end_frame && other.start_frame <= self.end_frame
    }
}

/// Detection counts and the resulting accuracy percentage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    /// Detections overlapping at least one label.
    pub tp: usize,
    /// Detections overlapping no label.
    pub fp: usize,
    /// Labels overlapping no detection.
    pub fn_: usize,
    /// `100 * tp / (tp + fn + fp)`.
    pub da: f64,
    /// Labels hit by at least one detection (context, not part of `da`).
    pub labels_hit: usize,
}

fn check_sorted_disjoint(list: &'static str, windows: &[FrameWindow]) -> Result<Vec<FrameWindow>> {
    let mut sorted = windows.to_vec();
    sorted.sort_by_key(|w| w.start_frame);
    for pair in sorted.windows(2) {
        if pair[0].end_frame < pair[0].start_frame {
            return Err(Error::InvalidConfig(format!(
                "window in {list} ends before it starts"
            )));
        }
        // Two consecutive blink windows may share a boundary frame (the
        // local maximum between them); anything beyond that is an overlap.
        if pair[1].start_frame < pair[0].end_frame {
            return Err(Error::OverlappingWindows {
                list,
                a_start: pair[0].start_frame,
                a_end: pair[0].end_frame,
                b_start: pair[1].start_frame,
                b_end: pair[1].end_frame,
            });
        }
    }
    Ok(sorted)
}

/// Scores detected blink windows against ground-truth windows with overlap
/// set semantics: every detection overlapping any label is one true
/// positive (so two detections on one long label are two TPs), detections
/// overlapping nothing are false positives, labels with no overlapping
/// detection are false negatives.
pub fn detection_accuracy(
    detected: &[FrameWindow],
    ground_truth: &[FrameWindow],
) -> Result<DetectionScore> {
    let detected = check_sorted_disjoint("detections", detected)?;
    let labels = check_sorted_disjoint("labels", ground_truth)?;
    let tp = detected
        .iter()
        .filter(|d| labels.iter().any(|l| d.overlaps(l)))
        .count();
    let fp = detected.len() - tp;
    let labels_hit = labels
        .iter()
        .filter(|l| detected.iter().any(|d| d.overlaps(l)))
        .count();
    let fn_ = labels.len() - labels_hit;
    let denom = tp + fn_ + fp;
    let da = if denom > 0 {
        100.0 * tp as f64 / denom as f64
    } else {
        0.0
    };
    Ok(DetectionScore {
        tp,
        fp,
        fn_,
        da,
        labels_hit,
    })
}

/// Error statistics of one (set angle, pose bin) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub set_ela_deg: f64,
    /// Lower edge of the 5-degree pose bin, degrees along the swept axis.
    pub pose_bin_deg: f64,
    pub mae_deg: f64,
    pub mse_deg2: f64,
    pub samples: usize,
}

/// Per-angle aggregate of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub set_ela_deg: f64,
    pub mae_deg: f64,
    pub mse_deg2: f64,
}

/// Reconstruction-error sweep report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub rows: Vec<SweepRow>,
    /// Variance of the measured ELA across the whole sweep.
    pub var_ela: f64,
    /// Variance of the EAR baseline across the whole sweep.
    pub var_ear: f64,
}

const POSE_BIN_DEG: f64 = 5.0;

fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64
}

/// Measured per-frame ELA and EAR over one constant-angle pose sweep, via
/// the full landmark -> normalization -> geometry path.
pub fn measure_sweep(scenario: &SynthScenario, set_ela: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = scenario.frame_count();
    let true_ela = vec![set_ela; n];
    let (frames, _) = generate_landmark_sequence(&true_ela, scenario)?;
    let opts = ElaOptions {
        eyelid_config: model_index_config(),
        z_scale: crate::landmarks::DEFAULT_Z_SCALE,
    };
    let (samples, _) = ela_samples_from_frames(&frames, &opts)?;
    if samples.len() != n {
        return Err(Error::InsufficientData(format!(
            "sweep lost frames: {} of {n} measurable",
            samples.len()
        )));
    }
    let measured_ela: Vec<f64> = samples.iter().map(|s| s.ela_combined).collect();
    // EAR on the 2D projection of the posed left-eye points.
    let mut ears = Vec::with_capacity(n);
    for frame in &frames {
        let p: Vec<Vector2<f64>> = MODEL_LEFT_EAR_INDICES
            .iter()
            .map(|&i| Vector2::new(frame.landmarks[i].x, frame.landmarks[i].y))
            .collect();
        ears.push(ear(&[p[0], p[1], p[2], p[3], p[4], p[5]])?);
    }
    Ok((measured_ela, ears))
}

/// Sweeps set angles across a pose trajectory and reports the measured-ELA
/// error per angle and per 5-degree pose bin.
pub fn ela_error_sweep(set_elas: &[f64], scenario: &SynthScenario) -> Result<SweepReport> {
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    let mut all_ela = Vec::new();
    let mut all_ear = Vec::new();
    for &set_ela in set_elas {
        let (measured, ears) = measure_sweep(scenario, set_ela)?;
        let mut bins: std::collections::BTreeMap<i64, Vec<f64>> = std::collections::BTreeMap::new();
        for (i, &m) in measured.iter().enumerate() {
            let t = i as f64 / scenario.fps;
            let (pitch, yaw) = scenario.pose_at(t);
            // Bin along the axis that actually sweeps.
            let angle = if yaw.abs() >= pitch.abs() { yaw } else { pitch };
            let bin = (angle / POSE_BIN_DEG).floor() as i64;
            bins.entry(bin).or_default().push((m - set_ela).abs());
        }
        let mut abs_errors = Vec::new();
        for (bin, errors) in &bins {
            let mae = errors.iter().sum::<f64>() / errors.len() as f64;
            let mse = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
            cells.push(SweepCell {
                set_ela_deg: set_ela,
                pose_bin_deg: *bin as f64 * POSE_BIN_DEG,
                mae_deg: mae,
                mse_deg2: mse,
                samples: errors.len(),
            });
            abs_errors.extend_from_slice(errors);
        }
        rows.push(SweepRow {
            set_ela_deg: set_ela,
            mae_deg: abs_errors.iter().sum::<f64>() / abs_errors.len() as f64,
            mse_deg2: abs_errors.iter().map(|e| e * e).sum::<f64>() / abs_errors.len() as f64,
        });
        all_ela.extend(measured);
        all_ear.extend(ears);
    }
    Ok(SweepReport {
        cells,
        rows,
        var_ela: variance(&all_ela),
        var_ear: variance(&all_ear),
    })
}

/// Variance of the measured ELA and of the EAR baseline over one
/// constant-angle sweep.
pub fn ear_ela_variance(scenario: &SynthScenario, set_ela: f64) -> Result<(f64, f64)> {
    let (measured, ears) = measure_sweep(scenario, set_ela)?;
    Ok((variance(&measured), variance(&ears)))
}

/// Mean per-feature values of the full pipeline at one frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpsRow {
    pub fps: f64,
    pub detected_blinks: usize,
    /// Mean of each scalar feature over the detected blinks, in
    /// [`FEATURE_NAMES`] order.
    pub mean_features: Vec<f64>,
}

/// Runs the detection + feature pipeline on the same continuous waveform
/// sampled at each listed rate and tabulates the mean feature values.
pub fn framerate_bias_report(
    plan: &SignalPlan,
    fps_list: &[f64],
    opts: &AnalysisOptions,
) -> Result<Vec<FpsRow>> {
    if fps_list.len() < 2 {
        return Err(Error::InsufficientData(
            "frame-rate report needs at least two rates".into(),
        ));
    }
    let mut rows = Vec::new();
    for &fps in fps_list {
        let (series, _) = sample_plan(plan, fps, 0.0, opts.seed);
        let samples: Vec<crate::geometry::ElaSample> = series
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| crate::geometry::ElaSample {
                timestamp: series.time_of(i),
                ela_left: Some(v),
                ela_right: Some(v),
                ela_combined: v,
                yaw: 0.0,
            })
            .collect();
        let analysis = analyze_samples(&samples, Some(fps), opts)?;
        let features: Vec<BlinkFeatures> =
            analysis.features.iter().map(|(_, f)| *f).collect();
        let mut mean_features = vec![0.0; FEATURE_NAMES.len()];
        if !features.is_empty() {
            let agg = crate::drowsiness::aggregate_epoch(0.0, &features)?;
            for (d, m) in mean_features.iter_mut().enumerate() {
                *m = agg.values[2 * d];
            }
        }
        rows.push(FpsRow {
            fps,
            detected_blinks: analysis.blinks.len(),
            mean_features,
        });
    }
    Ok(rows)
}

/// Index of a feature column in [`FEATURE_NAMES`].
pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|&n| n == name)
}
