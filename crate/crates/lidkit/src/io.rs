//! File formats: ELA CSV, blink JSONL, feature CSV, ground-truth blink
//! annotations and drowsiness label manifests.
//!
//! Floating-point values are written with Rust's shortest-round-trip
//! formatting, so identical data always serializes to identical bytes and
//! re-parsing reproduces every value bit-exactly.

use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

use crate::blink::Blink;
use crate::drowsiness::DrowsinessLabel;
use crate::error::{Error, Result};
use crate::eval::FrameWindow;
use crate::features::BlinkFeatures;
use crate::geometry::ElaSample;

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_line_f64(s: &str, line: usize, column: &str) -> Result<f64> {
    s.trim().parse().map_err(|e| Error::Parse {
        line,
        message: format!("column `{column}`: {e}"),
    })
}

fn parse_opt_f64(s: &str, line: usize, column: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_line_f64(s, line, column).map(Some)
    }
}

pub const ELA_CSV_HEADER: &str = "timestamp,ela_left,ela_right,ela_combined,yaw";

/// Writes one row per ELA sample; absent per-eye angles leave the field
/// empty.
pub fn write_ela_csv<W: Write>(samples: &[ElaSample], mut out: W) -> Result<()> {
    writeln!(out, "{ELA_CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.timestamp,
            fmt_opt(s.ela_left),
            fmt_opt(s.ela_right),
            s.ela_combined,
            s.yaw
        )?;
    }
    Ok(())
}

pub fn read_ela_csv<R: BufRead>(reader: R) -> Result<Vec<ElaSample>> {
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != ELA_CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header `{ELA_CSV_HEADER}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 5 columns, found {}", fields.len()),
            });
        }
        samples.push(ElaSample {
            timestamp: parse_line_f64(fields[0], i + 1, "timestamp")?,
            ela_left: parse_opt_f64(fields[1], i + 1, "ela_left")?,
            ela_right: parse_opt_f64(fields[2], i + 1, "ela_right")?,
            ela_combined: parse_line_f64(fields[3], i + 1, "ela_combined")?,
            yaw: parse_line_f64(fields[4], i + 1, "yaw")?,
        });
    }
    Ok(samples)
}

/// Writes blinks as JSONL, one object per blink mirroring [`Blink`].
pub fn write_blinks_jsonl<W: Write>(blinks: &[Blink], mut out: W) -> Result<()> {
    for b in blinks {
        writeln!(out, "{}", serde_json::to_string(b)?)?;
    }
    Ok(())
}

pub fn read_blinks_jsonl<R: BufRead>(reader: R) -> Result<Vec<Blink>> {
    let mut blinks = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let blink: Blink = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        blinks.push(blink);
    }
    Ok(blinks)
}

pub const FEATURES_CSV_HEADER: &str = "t1,t2,t3,t4,closing_d1,closed_d2,reopening_d3,\
previous_time,amplitude,av_ratio,normal_area,perclos,peropening";

/// Writes one row per blink with the columns of [`BlinkFeatures`].
pub fn write_features_csv<W: Write>(features: &[BlinkFeatures], mut out: W) -> Result<()> {
    writeln!(out, "{FEATURES_CSV_HEADER}")?;
    for f in features {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f.t1,
            f.t2,
            f.t3,
            f.t4,
            f.closing_d1,
            f.closed_d2,
            f.reopening_d3,
            fmt_opt(f.previous_time),
            f.amplitude,
            f.av_ratio,
            f.normal_area,
            f.perclos,
            f.peropening
        )?;
    }
    Ok(())
}

pub fn read_features_csv<R: BufRead>(reader: R) -> Result<Vec<BlinkFeatures>> {
    let mut features = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != FEATURES_CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: "unexpected features CSV header".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 13 columns, found {}", fields.len()),
            });
        }
        let n = i + 1;
        features.push(BlinkFeatures {
            t1: parse_line_f64(fields[0], n, "t1")?,
            t2: parse_line_f64(fields[1], n, "t2")?,
            t3: parse_line_f64(fields[2], n, "t3")?,
            t4: parse_line_f64(fields[3], n, "t4")?,
            closing_d1: parse_line_f64(fields[4], n, "closing_d1")?,
            closed_d2: parse_line_f64(fields[5], n, "closed_d2")?,
            reopening_d3: parse_line_f64(fields[6], n, "reopening_d3")?,
            previous_time: parse_opt_f64(fields[7], n, "previous_time")?,
            amplitude: parse_line_f64(fields[8], n, "amplitude")?,
            av_ratio: parse_line_f64(fields[9], n, "av_ratio")?,
            normal_area: parse_line_f64(fields[10], n, "normal_area")?,
            perclos: parse_line_f64(fields[11], n, "perclos")?,
            peropening: parse_line_f64(fields[12], n, "peropening")?,
        });
    }
    Ok(features)
}

/// A ground-truth annotation row: a frame window plus a label string
/// (DMD-style frame-level blink windows use `blink`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub start_frame: usize,
    pub end_frame: usize,
    pub label: String,
}

pub fn write_annotations_jsonl<W: Write>(
    annotations: &[AnnotationRecord],
    mut out: W,
) -> Result<()> {
    for a in annotations {
        writeln!(out, "{}", serde_json::to_string(a)?)?;
    }
    Ok(())
}

pub fn read_annotations_jsonl<R: BufRead>(reader: R) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Annotation windows restricted to blink-like labels.
pub fn annotation_windows(annotations: &[AnnotationRecord]) -> Vec<FrameWindow> {
    annotations
        .iter()
        .filter(|a| a.label == "blink")
        .map(|a| FrameWindow::new(a.start_frame, a.end_frame))
        .collect()
}

/// One row of a drowsiness label manifest: a per-recording features file,
/// its state label and an optional subject id for grouped cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub file: String,
    pub label: DrowsinessLabel,
    pub subject: Option<String>,
}

/// Reads `file,label[,subject]` rows; a `file,label,subject` header row is
/// skipped when present.
pub fn read_labels_csv<R: BufRead>(reader: R) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if i == 0 && trimmed.starts_with("file,") {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 2 {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected `file,label[,subject]`".into(),
            });
        }
        out.push(LabelRecord {
            file: fields[0].trim().to_string(),
            label: DrowsinessLabel::parse(fields[1])?,
            subject: fields.get(2).map(|s| s.trim().to_string()).filter(|s| !s.is_empty()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ela_csv_round_trip_is_bit_exact() {
        let samples = vec![
            ElaSample {
                timestamp: 0.0,
                ela_left: Some(40.123456789012345),
                ela_right: None,
                ela_combined: 40.123456789012345,
                yaw: -0.017453292519943295,
            },
            ElaSample {
                timestamp: 1.0 / 30.0,
                ela_left: None,
                ela_right: Some(39.9),
                ela_combined: 39.9,
                yaw: 0.0,
            },
        ];
        let mut buffer = Vec::new();
        write_ela_csv(&samples, &mut buffer).unwrap();
        let parsed = read_ela_csv(&buffer[..]).unwrap();
        assert_eq!(samples, parsed);
    }

    #[test]
    fn blink_jsonl_round_trip() {
        let blinks = vec![Blink {
            i_start: 10,
            i_end: 30,
            m1_index: 15,
            m2_index: 25,
            m1: -321.5,
            m2: 287.25,
            ela_start: 40.0,
            ela_end: 39.5,
            ela_min: 8.125,
        }];
        let mut buffer = Vec::new();
        write_blinks_jsonl(&blinks, &mut buffer).unwrap();
        assert_eq!(read_blinks_jsonl(&buffer[..]).unwrap(), blinks);
    }

    #[test]
    fn annotations_round_trip_and_filter() {
        let annotations = vec![
            AnnotationRecord { start_frame: 5, end_frame: 12, label: "blink".into() },
            AnnotationRecord { start_frame: 40, end_frame: 90, label: "microsleep".into() },
        ];
        let mut buffer = Vec::new();
        write_annotations_jsonl(&annotations, &mut buffer).unwrap();
        let parsed = read_annotations_jsonl(&buffer[..]).unwrap();
        assert_eq!(parsed, annotations);
        assert_eq!(annotation_windows(&parsed).len(), 1);
    }

    #[test]
    fn labels_manifest_parses_with_and_without_header() {
        let text = "file,label,subject\na.csv,alert,s1\nb.csv,drowsy,s2\n";
        let rows = read_labels_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].label, DrowsinessLabel::Alert);
        assert_eq!(rows[1].subject.as_deref(), Some("s2"));

        let bare = "a.csv,low_vigilant\n";
        let rows = read_labels_csv(bare.as_bytes()).unwrap();
        assert_eq!(rows[0].label, DrowsinessLabel::LowVigilant);
        assert!(rows[0].subject.is_none());
    }

    #[test]
    fn malformed_label_is_reported() {
        assert!(matches!(
            read_labels_csv(&b"a.csv,sleepy\n"[..]),
            Err(Error::InvalidConfig(_))
        ));
    }

    proptest! {
        /// Feature CSV rows survive a write/read cycle bit-exactly.
        #[test]
        fn features_csv_round_trip(
            t1 in -1.0e3f64..1.0e3,
            d1 in 1e-4f64..2.0,
            d2 in 0.0f64..2.0,
            d3 in 1e-4f64..2.0,
            amp in 0.0f64..1.0,
            prev in proptest::option::of(0.01f64..100.0),
        ) {
            let f = BlinkFeatures {
                t1,
                t2: t1 + d1,
                t3: t1 + d1 + d2,
                t4: t1 + d1 + d2 + d3,
                closing_d1: d1,
                closed_d2: d2,
                reopening_d3: d3,
                previous_time: prev,
                amplitude: amp,
                av_ratio: d3 / 2.0,
                normal_area: 0.75,
                perclos: amp / 2.0,
                peropening: d3 / (d1 + d2 + d3),
            };
            let mut buffer = Vec::new();
            write_features_csv(&[f], &mut buffer).unwrap();
            let parsed = read_features_csv(&buffer[..]).unwrap();
            prop_assert_eq!(parsed.len(), 1);
            let g = parsed[0];
            prop_assert_eq!(g.t1.to_bits(), f.t1.to_bits());
            prop_assert_eq!(g.closing_d1.to_bits(), f.closing_d1.to_bits());
            prop_assert_eq!(g.peropening.to_bits(), f.peropening.to_bits());
            prop_assert_eq!(g.previous_time.map(f64::to_bits), f.previous_time.map(f64::to_bits));
        }
    }
}
