//! Landmark stream ingest: parsing, coordinate normalization, detection
//! ratio and eyelid subset selection.
//!
//! Input streams carry per-frame 3D landmarks as produced by a monocular
//! face-landmark detector: `x`/`y` normalized to image width/height, a raw
//! unitless depth `z_raw`, and the detector's 4x4 inference transform `T`.
//! [`normalize_frame`] applies the aspect-ratio correction to `y` and the
//! heuristic depth rescaling `z = 1.7 * z_raw * T[2][2]`, and extracts the
//! yaw angle from the rotation block of `T`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::io::BufRead;

use crate::error::{Error, Result};

/// Default heuristic depth rescaling factor.
pub const DEFAULT_Z_SCALE: f64 = 1.7;

/// One frame as read from a landmark stream, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLandmarkFrame {
    pub frame_index: u64,
    /// Seconds.
    pub timestamp: f64,
    pub detected: bool,
    /// `(x, y, z_raw)` per landmark; empty when `detected` is false.
    pub landmarks: Vec<Vector3<f64>>,
    /// Row-major 4x4 inference transform.
    pub transform: [[f64; 4]; 4],
    pub image_width: u32,
    pub image_height: u32,
}

/// A detected frame after coordinate normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    pub frame_index: u64,
    pub timestamp: f64,
    /// Normalized 3D landmarks: `y` aspect-corrected, `z` rescaled.
    pub landmarks: Vec<Vector3<f64>>,
    /// Yaw rotation about the vertical y-axis, radians in [-pi, pi].
    pub yaw: f64,
    pub image_width: u32,
    pub image_height: u32,
}

/// Ordered landmark indices for the four eyelids, inner corner -> outer
/// corner, seven per lid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyelidIndexConfig {
    pub left: EyeIndices,
    pub right: EyeIndices,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EyeIndices {
    pub upper: [usize; 7],
    pub lower: [usize; 7],
}

/// Bundled default: MediaPipe Face Mesh V2 eyelid contours, inner -> outer,
/// excluding the shared eye-corner landmarks.
const MEDIAPIPE_FACE_MESH_V2: &str = include_str!("../assets/eyelid_mediapipe_v2.toml");

impl EyelidIndexConfig {
    /// Eyelid indices of the MediaPipe Face Mesh V2 topology (478 landmarks).
    pub fn mediapipe_face_mesh_v2() -> Self {
        Self::from_toml(MEDIAPIPE_FACE_MESH_V2).expect("bundled eyelid config is valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: EyelidIndexConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Checks that no index repeats within a lid.
    pub fn validate(&self) -> Result<()> {
        for (name, lid) in self.lids() {
            let mut seen = lid;
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate landmark index within {name} lid"
                )));
            }
        }
        Ok(())
    }

    /// Checks every index against a stream's landmark count.
    pub fn validate_for(&self, landmark_count: usize) -> Result<()> {
        for (_, lid) in self.lids() {
            for &index in &lid {
                if index >= landmark_count {
                    return Err(Error::IndexOutOfRange {
                        index,
                        count: landmark_count,
                    });
                }
            }
        }
        Ok(())
    }

    fn lids(&self) -> [(&'static str, [usize; 7]); 4] {
        [
            ("left upper", self.left.upper),
            ("left lower", self.left.lower),
            ("right upper", self.right.upper),
            ("right lower", self.right.lower),
        ]
    }
}

/// The four eyelid point sets of one frame, each ordered inner -> outer.
#[derive(Debug, Clone, PartialEq)]
pub struct EyelidPoints {
    pub left_upper: [Vector3<f64>; 7],
    pub left_lower: [Vector3<f64>; 7],
    pub right_upper: [Vector3<f64>; 7],
    pub right_lower: [Vector3<f64>; 7],
}

/// Stream formats accepted by [`parse_landmark_stream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    frame: u64,
    t: f64,
    detected: bool,
    w: u32,
    h: u32,
    /// 16 reals, row-major.
    #[serde(rename = "T", default)]
    transform: Option<Vec<f64>>,
    /// Flat sequence of x, y, z triples.
    #[serde(default)]
    lm: Option<Vec<f64>>,
}

const IDENTITY4: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Parses a landmark stream into frames, validating timestamp order and a
/// consistent landmark count across detected frames. Undetected frames are
/// preserved with `detected = false` and no landmarks.
pub fn parse_landmark_stream<R: BufRead>(
    source: R,
    format: StreamFormat,
) -> Result<Vec<RawLandmarkFrame>> {
    let frames = match format {
        StreamFormat::Jsonl => parse_jsonl(source)?,
        StreamFormat::Csv => parse_csv(source)?,
    };
    validate_stream(&frames)?;
    Ok(frames)
}

fn parse_jsonl<R: BufRead>(source: R) -> Result<Vec<RawLandmarkFrame>> {
    let mut frames = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        frames.push(record_to_frame(rec, line_no)?);
    }
    Ok(frames)
}

fn record_to_frame(rec: JsonRecord, line: usize) -> Result<RawLandmarkFrame> {
    let transform = match rec.transform {
        Some(t) => {
            if t.len() != 16 {
                return Err(Error::Parse {
                    line,
                    message: format!("field `T` must hold 16 values, found {}", t.len()),
                });
            }
            let mut m = [[0.0; 4]; 4];
            for r in 0..4 {
                for c in 0..4 {
                    m[r][c] = t[4 * r + c];
                }
            }
            m
        }
        None if !rec.detected => IDENTITY4,
        None => {
            return Err(Error::Parse {
                line,
                message: "detected frame is missing field `T`".into(),
            })
        }
    };
    let landmarks = match rec.lm {
        Some(flat) => {
            if flat.len() % 3 != 0 {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "field `lm` must hold x,y,z triples; {} values is not a multiple of 3",
                        flat.len()
                    ),
                });
            }
            flat.chunks_exact(3)
                .map(|c| Vector3::new(c[0], c[1], c[2]))
                .collect()
        }
        None if !rec.detected => Vec::new(),
        None => {
            return Err(Error::Parse {
                line,
                message: "detected frame is missing field `lm`".into(),
            })
        }
    };
    Ok(RawLandmarkFrame {
        frame_index: rec.frame,
        timestamp: rec.t,
        detected: rec.detected,
        landmarks,
        transform,
        image_width: rec.w,
        image_height: rec.h,
    })
}

/// Wide CSV: `frame,t,detected,w,h,T00..T33,lm0_x,lm0_y,lm0_z,...`; the
/// header declares how many landmarks each row carries.
fn parse_csv<R: BufRead>(source: R) -> Result<Vec<RawLandmarkFrame>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header_len = reader.headers()?.len();
    if header_len < 21 || (header_len - 21) % 3 != 0 {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "CSV header must be frame,t,detected,w,h,T00..T33,lm<i>_x/y/z; found {header_len} columns"
            ),
        });
    }
    let lm_count = (header_len - 21) / 3;
    let mut frames = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after header
        let record = record?;
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing column {idx}"),
            })
        };
        let parse_f64 = |idx: usize, name: &str| -> Result<f64> {
            field(idx)?.trim().parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("column `{name}`: {e}"),
            })
        };
        let detected = match field(2)?.trim() {
            "true" | "1" => true,
            "false" | "0" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("column `detected`: expected true/false, found `{other}`"),
                })
            }
        };
        let mut transform = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                transform[r][c] = parse_f64(5 + 4 * r + c, &format!("T{r}{c}"))?;
            }
        }
        let landmarks = if detected {
            let mut pts = Vec::with_capacity(lm_count);
            for k in 0..lm_count {
                let base = 21 + 3 * k;
                pts.push(Vector3::new(
                    parse_f64(base, &format!("lm{k}_x"))?,
                    parse_f64(base + 1, &format!("lm{k}_y"))?,
                    parse_f64(base + 2, &format!("lm{k}_z"))?,
                ));
            }
            pts
        } else {
            Vec::new()
        };
        frames.push(RawLandmarkFrame {
            frame_index: parse_f64(0, "frame")? as u64,
            timestamp: parse_f64(1, "t")?,
            detected,
            landmarks,
            transform,
            image_width: parse_f64(3, "w")? as u32,
            image_height: parse_f64(4, "h")? as u32,
        });
    }
    Ok(frames)
}

fn validate_stream(frames: &[RawLandmarkFrame]) -> Result<()> {
    let mut prev_t: Option<f64> = None;
    let mut lm_count: Option<usize> = None;
    for (i, frame) in frames.iter().enumerate() {
        let line = i + 1;
        if let Some(prev) = prev_t {
            if frame.timestamp <= prev {
                return Err(Error::NonMonotonicTimestamp {
                    line,
                    t: frame.timestamp,
                    prev,
                });
            }
        }
        prev_t = Some(frame.timestamp);
        if frame.detected {
            if frame.landmarks.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "detected frame carries no landmarks".into(),
                });
            }
            if frame.landmarks.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
                return Err(Error::NonFinite("landmark coordinates"));
            }
            match lm_count {
                None => lm_count = Some(frame.landmarks.len()),
                Some(expected) if expected != frame.landmarks.len() => {
                    return Err(Error::InconsistentLandmarkCount {
                        line,
                        expected,
                        found: frame.landmarks.len(),
                    })
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Serializes one frame back to the JSONL record format.
pub fn frame_to_jsonl(frame: &RawLandmarkFrame) -> String {
    let rec = JsonRecord {
        frame: frame.frame_index,
        t: frame.timestamp,
        detected: frame.detected,
        w: frame.image_width,
        h: frame.image_height,
        transform: Some(frame.transform.iter().flatten().copied().collect()),
        lm: Some(
            frame
                .landmarks
                .iter()
                .flat_map(|p| [p.x, p.y, p.z])
                .collect(),
        ),
    };
    serde_json::to_string(&rec).expect("frame record serializes")
}

/// Normalizes a detected frame with the default depth factor 1.7.
pub fn normalize_frame(frame: &RawLandmarkFrame) -> Result<LandmarkFrame> {
    normalize_frame_with(frame, DEFAULT_Z_SCALE)
}

/// Normalizes a detected frame:
/// `y' = y * (h / w)`, `z' = z_scale * z_raw * T[2][2]`, `x` unchanged.
/// Yaw is extracted from the orthonormalized rotation block of `T`.
pub fn normalize_frame_with(frame: &RawLandmarkFrame, z_scale: f64) -> Result<LandmarkFrame> {
    if !frame.detected {
        return Err(Error::NoSample("frame has no detection"));
    }
    if frame.image_width == 0 || frame.image_height == 0 {
        return Err(Error::ZeroImageDimension {
            width: frame.image_width,
            height: frame.image_height,
        });
    }
    if frame.transform.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("transform entries"));
    }
    let aspect = f64::from(frame.image_height) / f64::from(frame.image_width);
    let t22 = frame.transform[2][2];
    let landmarks = frame
        .landmarks
        .iter()
        .map(|p| Vector3::new(p.x, p.y * aspect, z_scale * p.z * t22))
        .collect();
    Ok(LandmarkFrame {
        frame_index: frame.frame_index,
        timestamp: frame.timestamp,
        landmarks,
        yaw: yaw_from_transform(&frame.transform),
        image_width: frame.image_width,
        image_height: frame.image_height,
    })
}

/// Yaw about the vertical y-axis from the rotation block of `T`:
/// `beta = atan2(-R[2][0], sqrt(R[2][1]^2 + R[2][2]^2))` after
/// orthonormalizing the block (nearest rotation by polar decomposition).
pub fn yaw_from_transform(transform: &[[f64; 4]; 4]) -> f64 {
    let block = Matrix3::from_fn(|r, c| transform[r][c]);
    let rot = nearest_rotation(&block);
    (-rot[(2, 0)]).atan2((rot[(2, 1)].powi(2) + rot[(2, 2)].powi(2)).sqrt())
}

/// Nearest proper rotation to `m` in the Frobenius norm: `U * V^T` from the
/// SVD, with the last column of `U` flipped when the determinant is negative.
fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Matrix3::identity();
    };
    let mut u = u;
    if (u * v_t).determinant() < 0.0 {
        let mut col = u.column_mut(2);
        col *= -1.0;
    }
    u * v_t
}

/// Fraction of frames with a successful detection.
pub fn detection_ratio(frames: &[RawLandmarkFrame]) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::EmptyInput("detection_ratio on empty stream"));
    }
    let detected = frames.iter().filter(|f| f.detected).count();
    Ok(detected as f64 / frames.len() as f64)
}

/// Copies the four configured eyelid point sets out of a frame, preserving
/// the configured inner -> outer order.
pub fn select_eyelids(frame: &LandmarkFrame, cfg: &EyelidIndexConfig) -> Result<EyelidPoints> {
    cfg.validate_for(frame.landmarks.len())?;
    let pick = |indices: &[usize; 7]| -> [Vector3<f64>; 7] {
        std::array::from_fn(|i| frame.landmarks[indices[i]])
    };
    Ok(EyelidPoints {
        left_upper: pick(&cfg.left.upper),
        left_lower: pick(&cfg.left.lower),
        right_upper: pick(&cfg.right.upper),
        right_lower: pick(&cfg.right.lower),
    })
}
