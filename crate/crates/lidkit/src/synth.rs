//! Seeded ground-truth generators: ELA blink waveforms, full alert/drowsy
//! signals, and parametric 3D eyelid landmark sequences with head-pose
//! trajectories. These stand in for rendered video so that the whole
//! pipeline can be scored against known truth.
//!
//! A blink waveform is a continuous function of time, assembled from a
//! linear closing flank, a flat closed phase, a linear reopening flank and a
//! C1 parabolic blend back up to a small landing crest, plus a gentle
//! pre-blink crest. The crests sit `OVERSHOOT_FRAC` of the amplitude above
//! baseline and give the blink window well-defined local maxima; the two
//! linear flanks are exactly the tangents that the feature stage fits, so
//! the annotated durations are recovered exactly on the noiseless waveform.

use nalgebra::{Matrix3, Vector3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::drowsiness::DrowsinessLabel;
use crate::error::{Error, Result};
use crate::landmarks::{EyeIndices, EyelidIndexConfig, RawLandmarkFrame, DEFAULT_Z_SCALE};
use crate::signal::ElaSeries;

/// Pre-blink crest rise, as a fraction of the closing duration.
const RISE_FRAC: f64 = 0.3;
/// Crest height above baseline, as a fraction of the blink amplitude.
const OVERSHOOT_FRAC: f64 = 0.02;
/// Fraction of the reopening amplitude covered by the linear flank before
/// the parabolic blend takes over.
const LINEAR_REOPEN_FRAC: f64 = 0.8;
/// Duration of the parabolic blend, as a fraction of the reopening duration.
const CAP_FRAC: f64 = 0.4;
/// Post-crest decay back to baseline, as a fraction of the reopening
/// duration.
const DECAY_FRAC: f64 = 0.4;

/// Truncated normal over `[min, max]`, sampled by redrawing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationDistribution {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl DurationDistribution {
    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min > 0.0 && self.max >= self.min && self.std >= 0.0 && self.mean.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "distribution `{name}` needs 0 < min <= max and std >= 0"
            )));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        if self.std == 0.0 {
            return Ok(self.mean.clamp(self.min, self.max));
        }
        let normal = Normal::new(self.mean, self.std)
            .map_err(|_| Error::InvalidConfig("invalid normal parameters".into()))?;
        for _ in 0..100 {
            let x = normal.sample(rng);
            if (self.min..=self.max).contains(&x) {
                return Ok(x);
            }
        }
        Err(Error::SamplingFailed(
            "truncated normal rejected every draw",
        ))
    }
}

/// Blink dynamics of one vigilance state: baseline and minimum angle plus
/// the duration and inter-blink-interval distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlinkShapeParams {
    pub baseline_ela_deg: f64,
    pub min_ela_deg: f64,
    pub closing: DurationDistribution,
    pub closed: DurationDistribution,
    pub reopening: DurationDistribution,
    pub inter_blink_interval: DurationDistribution,
}

impl BlinkShapeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_ela_deg >= self.baseline_ela_deg {
            return Err(Error::InvalidConfig(
                "min_ela_deg must be below baseline_ela_deg".into(),
            ));
        }
        self.closing.validate("closing")?;
        self.closed.validate("closed")?;
        self.reopening.validate("reopening")?;
        self.inter_blink_interval.validate("inter_blink_interval")
    }
}

/// Distribution parameters for both states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    pub alert: BlinkShapeParams,
    pub drowsy: BlinkShapeParams,
}

impl StateParams {
    pub fn for_state(&self, state: DrowsinessLabel) -> &BlinkShapeParams {
        match state {
            DrowsinessLabel::Alert => &self.alert,
            _ => &self.drowsy,
        }
    }
}

/// One concrete blink: durations in seconds, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlinkShape {
    pub baseline_ela: f64,
    pub min_ela: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl BlinkShape {
    /// Crest value: baseline plus the small overshoot.
    pub fn crest(&self) -> f64 {
        self.baseline_ela + OVERSHOOT_FRAC * (self.baseline_ela - self.min_ela)
    }

    /// Time from the onset crest to the landing crest.
    pub fn annotated_span(&self) -> f64 {
        self.d1 + self.d2 + (LINEAR_REOPEN_FRAC + CAP_FRAC) * self.d3
    }

    /// Lead-in before the onset crest.
    pub fn lead(&self) -> f64 {
        RISE_FRAC * self.d1
    }

    /// Tail after the landing crest.
    pub fn tail(&self) -> f64 {
        DECAY_FRAC * self.d3
    }

    /// Waveform value at `t` seconds after the onset crest. Outside the
    /// support the value is the baseline.
    pub fn value_at(&self, t: f64) -> f64 {
        let b = self.baseline_ela;
        let crest = self.crest();
        let amplitude = crest - self.min_ela;
        let lead = self.lead();
        let t2 = self.d1 + self.d2;
        let t3 = t2 + LINEAR_REOPEN_FRAC * self.d3;
        let t4 = t2 + (LINEAR_REOPEN_FRAC + CAP_FRAC) * self.d3;
        let smoothstep = |u: f64| u * u * (3.0 - 2.0 * u);
        if t < -lead || t > t4 + self.tail() {
            b
        } else if t < 0.0 {
            // Gentle rise into the onset crest.
            b + (crest - b) * smoothstep((t + lead) / lead)
        } else if t < self.d1 {
            // Linear closing flank; this line is the descent tangent.
            crest - amplitude * t / self.d1
        } else if t < t2 {
            self.min_ela
        } else if t < t3 {
            // Linear reopening flank; this line is the ascent tangent and
            // reaches the crest exactly d3 after leaving the minimum.
            self.min_ela + amplitude * (t - t2) / self.d3
        } else if t < t4 {
            // C1 parabolic blend onto the landing crest.
            let u = (t - t3) / (CAP_FRAC * self.d3);
            crest - (1.0 - LINEAR_REOPEN_FRAC) * amplitude * (1.0 - u) * (1.0 - u)
        } else {
            // Decay from the landing crest back to baseline.
            b + (crest - b) * (1.0 - smoothstep((t - t4) / self.tail()))
        }
    }
}

/// Ground-truth annotation of one generated blink: the frame window from
/// onset crest to landing crest plus the true phase durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlinkAnnotation {
    pub start_frame: usize,
    pub end_frame: usize,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Ground truth accompanying a generated signal or landmark sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Noiseless per-frame ELA, degrees.
    pub true_ela: Vec<f64>,
    pub annotations: Vec<BlinkAnnotation>,
    pub state: Option<DrowsinessLabel>,
}

/// Samples one blink waveform at `fps`, from lead-in to tail. Durations
/// shorter than one frame are still emitted (the caller sees them through
/// the annotation).
pub fn generate_blink_waveform(shape: &BlinkShape, fps: f64) -> (Vec<f64>, BlinkAnnotation) {
    let lead = shape.lead();
    let total = lead + shape.annotated_span() + shape.tail();
    let n = (total * fps).ceil() as usize + 1;
    let values = (0..n)
        .map(|i| shape.value_at(i as f64 / fps - lead))
        .collect();
    let annotation = BlinkAnnotation {
        start_frame: (lead * fps).round() as usize,
        end_frame: ((lead + shape.annotated_span()) * fps).round() as usize,
        d1: shape.d1,
        d2: shape.d2,
        d3: shape.d3,
    };
    (values, annotation)
}

/// A head-pose keyframe; poses between keyframes are linearly interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseKeyframe {
    /// Seconds.
    pub t: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
}

/// How landmark coordinates are emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkMode {
    /// `z_raw` is chosen so the ingest normalization reconstructs the true
    /// posed 3D geometry exactly.
    #[default]
    Exact,
    /// Mimics monocular inference: `z_raw` is the depth relative to the
    /// landmark centroid, scaled by the face width.
    Projected,
}

/// A generation scenario: duration, rate, noise, seed, head-pose trajectory
/// and the optional constant-angle benchmark mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthScenario {
    pub duration_s: f64,
    pub fps: f64,
    #[serde(default)]
    pub noise_std_deg: f64,
    #[serde(default)]
    pub seed: u64,
    /// Empty means identity pose throughout.
    #[serde(default)]
    pub pose: Vec<PoseKeyframe>,
    /// Benchmark mode: hold the true ELA constant at this angle.
    #[serde(default)]
    pub set_ela_deg: Option<f64>,
    /// Standard deviation of 3D landmark jitter, model units.
    #[serde(default)]
    pub landmark_jitter: f64,
    #[serde(default)]
    pub landmark_mode: LandmarkMode,
}

impl SynthScenario {
    pub fn validate(&self) -> Result<()> {
        if self.duration_s <= 0.0 || self.fps <= 0.0 {
            return Err(Error::InvalidConfig(
                "scenario duration and fps must be positive".into(),
            ));
        }
        for k in &self.pose {
            if k.t < 0.0 || k.t > self.duration_s {
                return Err(Error::InvalidConfig(format!(
                    "pose keyframe at t = {} outside [0, {}]",
                    k.t, self.duration_s
                )));
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.fps).round() as usize
    }

    /// Interpolated pose at `t`, degrees `(pitch, yaw)`.
    pub fn pose_at(&self, t: f64) -> (f64, f64) {
        if self.pose.is_empty() {
            return (0.0, 0.0);
        }
        let first = &self.pose[0];
        if t <= first.t {
            return (first.pitch_deg, first.yaw_deg);
        }
        for pair in self.pose.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if t <= b.t {
                let u = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 1.0 };
                return (
                    a.pitch_deg + u * (b.pitch_deg - a.pitch_deg),
                    a.yaw_deg + u * (b.yaw_deg - a.yaw_deg),
                );
            }
        }
        let last = self.pose.last().unwrap();
        (last.pitch_deg, last.yaw_deg)
    }
}

/// Full scenario configuration as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub state: DrowsinessLabel,
    #[serde(flatten)]
    pub scenario: SynthScenario,
    pub params: StateParams,
}

/// Bundled example scenario with illustrative alert/drowsy distributions.
const EXAMPLE_SCENARIO: &str = include_str!("../assets/scenario_example.toml");

impl ScenarioConfig {
    /// The bundled example scenario (drowsy, 180 s at 30 fps).
    pub fn example() -> Self {
        Self::from_toml(EXAMPLE_SCENARIO).expect("bundled scenario is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.scenario.validate()?;
        cfg.params.alert.validate()?;
        cfg.params.drowsy.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// A laid-out blink train: onset crest times plus the concrete shapes. The
/// plan is a continuous-time description; sampling it at different rates
/// yields consistent signals.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalPlan {
    pub baseline_ela: f64,
    pub duration_s: f64,
    pub blinks: Vec<(f64, BlinkShape)>,
    pub state: DrowsinessLabel,
}

impl SignalPlan {
    /// Noiseless value at time `t`. Blink supports never overlap.
    pub fn value_at(&self, t: f64) -> f64 {
        for &(crest_t, ref shape) in &self.blinks {
            if t >= crest_t - shape.lead()
                && t <= crest_t + shape.annotated_span() + shape.tail()
            {
                return shape.value_at(t - crest_t);
            }
        }
        self.baseline_ela
    }
}

/// Lays out blinks over the scenario duration: durations and inter-blink
/// intervals are drawn from the state-conditional truncated normals.
pub fn plan_signal(
    state: DrowsinessLabel,
    scenario: &SynthScenario,
    params: &BlinkShapeParams,
) -> Result<SignalPlan> {
    scenario.validate()?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut blinks = Vec::new();
    let mut t = params.inter_blink_interval.sample(&mut rng)?;
    loop {
        let shape = BlinkShape {
            baseline_ela: params.baseline_ela_deg,
            min_ela: params.min_ela_deg,
            d1: params.closing.sample(&mut rng)?,
            d2: params.closed.sample(&mut rng)?,
            d3: params.reopening.sample(&mut rng)?,
        };
        let crest_t = t + shape.lead();
        let support_end = crest_t + shape.annotated_span() + shape.tail();
        if support_end >= scenario.duration_s {
            break;
        }
        blinks.push((crest_t, shape));
        t = support_end + params.inter_blink_interval.sample(&mut rng)?;
    }
    Ok(SignalPlan {
        baseline_ela: params.baseline_ela_deg,
        duration_s: scenario.duration_s,
        blinks,
        state,
    })
}

/// Samples a plan at `fps`, optionally adding zero-mean Gaussian noise on
/// top of the assembled signal. Annotations carry the true durations.
pub fn sample_plan(
    plan: &SignalPlan,
    fps: f64,
    noise_std: f64,
    seed: u64,
) -> (ElaSeries, GroundTruth) {
    let n = (plan.duration_s * fps).round() as usize;
    let true_ela: Vec<f64> = (0..n).map(|i| plan.value_at(i as f64 / fps)).collect();
    let values = if noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let normal = Normal::new(0.0, noise_std).expect("positive std");
        true_ela.iter().map(|v| v + normal.sample(&mut rng)).collect()
    } else {
        true_ela.clone()
    };
    let annotations = plan
        .blinks
        .iter()
        .map(|&(crest_t, ref shape)| BlinkAnnotation {
            start_frame: (crest_t * fps).round() as usize,
            end_frame: ((crest_t + shape.annotated_span()) * fps).round() as usize,
            d1: shape.d1,
            d2: shape.d2,
            d3: shape.d3,
        })
        .collect();
    (
        ElaSeries::new(values, fps, 0.0),
        GroundTruth {
            true_ela,
            annotations,
            state: Some(plan.state),
        },
    )
}

/// Plans and samples a state-conditioned ELA signal in one step.
pub fn generate_ela_signal(
    state: DrowsinessLabel,
    scenario: &SynthScenario,
    params: &BlinkShapeParams,
) -> Result<(ElaSeries, GroundTruth)> {
    let plan = plan_signal(state, scenario, params)?;
    Ok(sample_plan(
        &plan,
        scenario.fps,
        scenario.noise_std_deg,
        scenario.seed,
    ))
}

// ---------------------------------------------------------------------------
// Parametric eye model
// ---------------------------------------------------------------------------

/// Canonical eye geometry: interocular distance 1.0 model units, eye
/// centers at x = +/- 0.5, canthi 0.15 from each center, lid bulge 0.35 of
/// the eye width. Absolute scale is irrelevant: the eyelid angle is
/// scale-invariant.
const EYE_HALF_WIDTH: f64 = 0.15;
const LID_BULGE: f64 = 0.35 * 2.0 * EYE_HALF_WIDTH;
/// Landmarks per frame: 2 canthi + 7 upper + 7 lower, per eye.
pub const MODEL_LANDMARK_COUNT: usize = 32;

/// Eyelid index layout of the generated landmark frames.
pub fn model_index_config() -> EyelidIndexConfig {
    EyelidIndexConfig {
        left: EyeIndices {
            upper: [2, 3, 4, 5, 6, 7, 8],
            lower: [9, 10, 11, 12, 13, 14, 15],
        },
        right: EyeIndices {
            upper: [18, 19, 20, 21, 22, 23, 24],
            lower: [25, 26, 27, 28, 29, 30, 31],
        },
    }
}

/// Indices of the six EAR points of the left eye in the generated frames:
/// outer corner, two upper-lid, inner corner, two lower-lid.
pub const MODEL_LEFT_EAR_INDICES: [usize; 6] = [1, 4, 6, 0, 13, 11];

/// The unposed eye model at a given eyelid angle. The two lids of each eye
/// are flat 7-point arcs hinged on the canthus axis, splayed symmetrically
/// by half the angle each; the fitted lid planes then meet at exactly
/// `ela_deg`.
pub fn eye_model(ela_deg: f64) -> Vec<Vector3<f64>> {
    let half = (ela_deg.to_radians() / 2.0).clamp(0.0, std::f64::consts::FRAC_PI_2);
    // Half-plane directions for the upper (toward -y, camera at -z) and
    // lower lids, rotated about the canthus (x) axis.
    let dir_upper = Vector3::new(0.0, -half.sin(), -half.cos());
    let dir_lower = Vector3::new(0.0, half.sin(), -half.cos());
    let mut points = Vec::with_capacity(MODEL_LANDMARK_COUNT);
    for eye_center_x in [0.5f64, -0.5] {
        let center = Vector3::new(eye_center_x, 0.0, 0.0);
        let inner_x = -eye_center_x.signum() * EYE_HALF_WIDTH;
        // Canthi: inner (nose side) first, then outer.
        points.push(center + Vector3::new(inner_x, 0.0, 0.0));
        points.push(center + Vector3::new(-inner_x, 0.0, 0.0));
        for dir in [dir_upper, dir_lower] {
            for i in 0..7 {
                let s = (i as f64 + 1.0) / 8.0;
                let along = inner_x + (-2.0 * inner_x) * s;
                let bulge = LID_BULGE * (s * std::f64::consts::PI).sin();
                points.push(center + Vector3::new(along, 0.0, 0.0) + dir * bulge);
            }
        }
    }
    points
}

fn rotation_matrix(pitch_deg: f64, yaw_deg: f64) -> Matrix3<f64> {
    let (p, y) = (pitch_deg.to_radians(), yaw_deg.to_radians());
    let ry = Matrix3::new(
        y.cos(), 0.0, y.sin(),
        0.0, 1.0, 0.0,
        -y.sin(), 0.0, y.cos(),
    );
    let rx = Matrix3::new(
        1.0, 0.0, 0.0,
        0.0, p.cos(), -p.sin(),
        0.0, p.sin(), p.cos(),
    );
    ry * rx
}

/// Generates one landmark frame per true-ELA value, posing the canonical
/// eye model by the scenario's interpolated head rotation and emitting the
/// stream format of the ingest stage, including a transform that the depth
/// normalization round-trips through.
pub fn generate_landmark_sequence(
    true_ela: &[f64],
    scenario: &SynthScenario,
) -> Result<(Vec<RawLandmarkFrame>, GroundTruth)> {
    scenario.validate()?;
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(scenario.seed ^ 0x51ed_2701_89ab_cdef);
    let jitter = if scenario.landmark_jitter > 0.0 {
        Some(Normal::new(0.0, scenario.landmark_jitter).expect("positive std"))
    } else {
        None
    };
    let mut frames = Vec::with_capacity(true_ela.len());
    for (i, &ela) in true_ela.iter().enumerate() {
        if !(0.0..=90.0).contains(&ela) {
            return Err(Error::InvalidConfig(format!(
                "true ELA {ela} out of [0, 90] at frame {i}"
            )));
        }
        let t = i as f64 / scenario.fps;
        let (pitch, yaw) = scenario.pose_at(t);
        if pitch.abs() > 89.0 {
            return Err(Error::PoseOutOfRange {
                axis: "pitch",
                degrees: pitch,
            });
        }
        if yaw.abs() > 89.0 {
            return Err(Error::PoseOutOfRange {
                axis: "yaw",
                degrees: yaw,
            });
        }
        let rot = rotation_matrix(pitch, yaw);
        let mut posed: Vec<Vector3<f64>> = eye_model(ela).iter().map(|p| rot * p).collect();
        if let Some(dist) = &jitter {
            for p in &mut posed {
                for c in 0..3 {
                    p[c] += dist.sample(&mut jitter_rng);
                }
            }
        }
        let mut transform = [
            [rot[(0, 0)], rot[(0, 1)], rot[(0, 2)], 0.0],
            [rot[(1, 0)], rot[(1, 1)], rot[(1, 2)], 0.0],
            [rot[(2, 0)], rot[(2, 1)], rot[(2, 2)], 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let landmarks = match scenario.landmark_mode {
            LandmarkMode::Exact => {
                let t22 = transform[2][2];
                posed
                    .iter()
                    .map(|p| Vector3::new(p.x, p.y, p.z / (DEFAULT_Z_SCALE * t22)))
                    .collect()
            }
            LandmarkMode::Projected => {
                // Depth relative to the landmark centroid, scaled by the
                // face width, as a monocular detector would report it. The
                // transform row is what the depth heuristic divides back
                // out, so the reconstruction error grows with pose.
                let centroid_z =
                    posed.iter().map(|p| p.z).sum::<f64>() / posed.len() as f64;
                let (min_x, max_x) = posed.iter().fold((f64::MAX, f64::MIN), |(lo, hi), p| {
                    (lo.min(p.x), hi.max(p.x))
                });
                let width = (max_x - min_x).max(1e-6);
                transform[2][2] = width / DEFAULT_Z_SCALE;
                posed
                    .iter()
                    .map(|p| Vector3::new(p.x, p.y, (p.z - centroid_z) / width))
                    .collect()
            }
        };
        frames.push(RawLandmarkFrame {
            frame_index: i as u64,
            timestamp: t,
            detected: true,
            landmarks,
            transform,
            image_width: 1000,
            image_height: 1000,
        });
    }
    Ok((
        frames,
        GroundTruth {
            true_ela: true_ela.to_vec(),
            annotations: Vec::new(),
            state: None,
        },
    ))
}

// ---------------------------------------------------------------------------
// Animation curve export
// ---------------------------------------------------------------------------

/// Writes `(time_s, ela_deg)` keyframes for driving an external facial rig.
/// Values are printed with shortest-round-trip formatting, so re-parsing
/// reproduces them bit-exactly.
pub fn export_animation_curve<W: Write>(series: &ElaSeries, mut out: W) -> Result<()> {
    writeln!(out, "time_s,ela_deg")?;
    for (i, v) in series.values.iter().enumerate() {
        writeln!(out, "{},{}", series.time_of(i), v)?;
    }
    Ok(())
}

/// Parses a file written by [`export_animation_curve`].
pub fn parse_animation_curve<R: BufRead>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "time_s,ela_deg" {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `time_s,ela_deg`, found `{line}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected two comma-separated values".into(),
            })?
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("{e}"),
            })
        };
        let t = parse(parts.next())?;
        let v = parse(parts.next())?;
        rows.push((t, v));
    }
    Ok(rows)
}
