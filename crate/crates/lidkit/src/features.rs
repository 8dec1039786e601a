//! Per-blink features from tangent intersections on the filtered ELA
//! signal.
//!
//! The closing flank of a blink holds only a handful of samples, so flank
//! regression is unstable; instead a tangent is placed through the point of
//! maximum descent (slope `m1`) and another through the point of maximum
//! ascent (slope `m2`). Their intersections with the start, minimum and end
//! levels of the blink delimit the closing, closed and reopening phases.

use serde::{Deserialize, Serialize};

use crate::blink::Blink;
use crate::error::{Error, Result};
use crate::signal::ElaSeries;

/// Eye-closure threshold used by PERCLOS, degrees.
pub const DEFAULT_PERCLOS_THRESHOLD: f64 = 20.0;

/// The feature record of one blink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlinkFeatures {
    /// Tangent-intersection timestamps, seconds: descent tangent at the
    /// start level (`t1`) and minimum level (`t2`), ascent tangent at the
    /// minimum level (`t3`) and end level (`t4`).
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    /// `t2 - t1`, seconds.
    pub closing_d1: f64,
    /// `t3 - t2`, seconds.
    pub closed_d2: f64,
    /// `t4 - t3`, seconds.
    pub reopening_d3: f64,
    /// This blink's `t1` minus the previous blink's `t1`; absent for the
    /// first blink of a segment.
    pub previous_time: Option<f64>,
    /// `(max - min) / max` over the blink window.
    pub amplitude: f64,
    /// Reopening amplitude over maximum reopening velocity, seconds.
    pub av_ratio: f64,
    /// Shape of the reopening phase: area above the minimum level over
    /// `[t3, t3 + 2 d3]` normalized by `(ela_end - ela_min) * 2 d3`.
    pub normal_area: f64,
    /// Fraction of frames below the closure threshold between the end of
    /// the previous blink and the end of this one.
    pub perclos: f64,
    /// `d3 / (d1 + d2 + d3)`.
    pub peropening: f64,
}

/// Solves the two tangent lines for the four phase boundaries.
///
/// The descending tangent passes through `(t_m1, ELA(t_m1))` with slope
/// `m1`; `t1` solves it against the start level, `t2` against the minimum
/// level. The ascending tangent through `(t_m2, ELA(t_m2))` with slope `m2`
/// gives `t3` (minimum level) and `t4` (end level).
pub fn tangent_intersections(signal: &ElaSeries, blink: &Blink) -> Result<(f64, f64, f64, f64)> {
    if blink.m1 == 0.0 || blink.m2 == 0.0 {
        return Err(Error::DegenerateBlink("zero tangent slope".into()));
    }
    let t_m1 = signal.time_of(blink.m1_index);
    let t_m2 = signal.time_of(blink.m2_index);
    let v_m1 = signal.values[blink.m1_index];
    let v_m2 = signal.values[blink.m2_index];
    let t1 = t_m1 + (blink.ela_start - v_m1) / blink.m1;
    let mut t2 = t_m1 + (blink.ela_min - v_m1) / blink.m1;
    let mut t3 = t_m2 + (blink.ela_min - v_m2) / blink.m2;
    let t4 = t_m2 + (blink.ela_end - v_m2) / blink.m2;
    if t3 < t2 {
        // On undersampled blinks the two tangents cross above the minimum
        // level and the closed phase is unresolvable; it collapses to the
        // crossing point of the tangents (d2 = 0).
        let cross =
            (v_m2 - v_m1 + blink.m1 * t_m1 - blink.m2 * t_m2) / (blink.m1 - blink.m2);
        t2 = cross;
        t3 = cross;
    }
    if !(t1 <= t2 && t2 <= t3 && t3 <= t4) {
        return Err(Error::DegenerateBlink(format!(
            "tangent intersections out of order: {t1:.4} {t2:.4} {t3:.4} {t4:.4}"
        )));
    }
    Ok((t1, t2, t3, t4))
}

/// Linear interpolation of the signal at an arbitrary time inside the
/// sampled range.
fn value_at(signal: &ElaSeries, t: f64) -> f64 {
    let x = (t - signal.start_time) * signal.fps;
    let n = signal.values.len();
    if x <= 0.0 {
        return signal.values[0];
    }
    let i = x.floor() as usize;
    if i + 1 >= n {
        return signal.values[n - 1];
    }
    let frac = x - i as f64;
    signal.values[i] * (1.0 - frac) + signal.values[i + 1] * frac
}

/// Trapezoidal integral of `max(signal - level, 0)`-free area
/// `(signal(t) - level)` over `[a, b]`, with linear interpolation at the
/// fractional endpoints.
fn area_above(signal: &ElaSeries, level: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fps = signal.fps;
    let first_idx = ((a - signal.start_time) * fps).floor() as i64 + 1;
    let last_idx = ((b - signal.start_time) * fps).ceil() as i64 - 1;
    let mut knots = vec![a];
    for i in first_idx..=last_idx {
        if i >= 0 && (i as usize) < signal.values.len() {
            let t = signal.time_of(i as usize);
            if t > a && t < b {
                knots.push(t);
            }
        }
    }
    knots.push(b);
    let mut area = 0.0;
    for w in knots.windows(2) {
        let f0 = value_at(signal, w[0]) - level;
        let f1 = value_at(signal, w[1]) - level;
        area += 0.5 * (f0 + f1) * (w[1] - w[0]);
    }
    area
}

/// Context linking a blink to its predecessor for the chained features.
#[derive(Debug, Clone, Copy, Default)]
pub struct PreviousBlink {
    /// Previous blink's `t1`, seconds.
    pub t1: f64,
    /// Previous blink's window end, a frame index on `signal`.
    pub i_end: usize,
}

/// Computes the full feature record for one blink. `previous` chains
/// `previous_time` and the PERCLOS interval; for the first blink of a
/// segment the interval starts at the segment start and `previous_time` is
/// absent.
pub fn compute_features(
    signal: &ElaSeries,
    blink: &Blink,
    previous: Option<PreviousBlink>,
    perclos_threshold: f64,
) -> Result<BlinkFeatures> {
    let (t1, t2, t3, t4) = tangent_intersections(signal, blink)?;
    let d1 = t2 - t1;
    let d2 = t3 - t2;
    let d3 = t4 - t3;
    if d1 + d2 + d3 <= 0.0 {
        return Err(Error::DegenerateBlink("zero total duration".into()));
    }

    let window = &signal.values[blink.i_start..=blink.i_end];
    let w_max = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w_min = window.iter().cloned().fold(f64::INFINITY, f64::min);
    if w_max <= 0.0 {
        return Err(Error::DegenerateBlink("non-positive window maximum".into()));
    }
    let amplitude = (w_max - w_min) / w_max;

    let reopen_amplitude = blink.ela_end - blink.ela_min;
    let av_ratio = reopen_amplitude / blink.m2;

    let normal_area = if d3 > 0.0 && reopen_amplitude > 0.0 {
        let window_end_t = signal.time_of(blink.i_end);
        let b = (t3 + 2.0 * d3).min(window_end_t);
        area_above(signal, blink.ela_min, t3, b) / (reopen_amplitude * 2.0 * d3)
    } else {
        return Err(Error::DegenerateBlink("flat reopening phase".into()));
    };

    // Frames between the end of the previous blink (exclusive) and the end
    // of this blink (inclusive); the segment start for the first blink.
    let perclos_from = previous.map_or(0, |p| p.i_end + 1);
    let perclos_range = &signal.values[perclos_from.min(blink.i_end)..=blink.i_end];
    let below = perclos_range
        .iter()
        .filter(|&&v| v < perclos_threshold)
        .count();
    let perclos = below as f64 / perclos_range.len() as f64;

    Ok(BlinkFeatures {
        t1,
        t2,
        t3,
        t4,
        closing_d1: d1,
        closed_d2: d2,
        reopening_d3: d3,
        previous_time: previous.map(|p| t1 - p.t1),
        amplitude,
        av_ratio,
        normal_area,
        perclos,
        peropening: d3 / (d1 + d2 + d3),
    })
}

/// Computes features for a sorted blink sequence on one series, chaining
/// `previous_time` and the PERCLOS interval through the accepted blinks.
/// Degenerate blinks are dropped; their indices and diagnostics are returned
/// alongside.
pub fn compute_feature_sequence(
    signal: &ElaSeries,
    blinks: &[Blink],
    perclos_threshold: f64,
) -> (Vec<(usize, BlinkFeatures)>, Vec<(usize, String)>) {
    let mut out = Vec::new();
    let mut dropped = Vec::new();
    let mut previous: Option<PreviousBlink> = None;
    for (idx, blink) in blinks.iter().enumerate() {
        match compute_features(signal, blink, previous, perclos_threshold) {
            Ok(features) => {
                previous = Some(PreviousBlink {
                    t1: features.t1,
                    i_end: blink.i_end,
                });
                out.push((idx, features));
            }
            Err(e) => dropped.push((idx, e.to_string())),
        }
    }
    (out, dropped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::central_derivative;
    use approx::assert_relative_eq;

    use crate::blink::Blink;

    /// An exact trapezoid blink sampled at `fps`: linear close from
    /// `baseline` to `floor` over `d1` starting at `t_on`, flat over `d2`,
    /// linear reopen over `d3`. The surroundings ramp gently (1 deg/s)
    /// into the onset corner and away from the landing corner, so both
    /// corners are strict local maxima without distorting the flank
    /// slopes.
    fn trapezoid(
        fps: f64,
        t_on: f64,
        d1: f64,
        d2: f64,
        d3: f64,
        baseline: f64,
        floor: f64,
        n: usize,
    ) -> ElaSeries {
        const GENTLE: f64 = 1.0; // deg/s
        let t_off = t_on + d1 + d2 + d3;
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / fps;
            let val = if t < t_on {
                baseline - GENTLE * (t_on - t)
            } else if t < t_on + d1 {
                baseline + (floor - baseline) * (t - t_on) / d1
            } else if t < t_on + d1 + d2 {
                floor
            } else if t < t_off {
                floor + (baseline - floor) * (t - t_on - d1 - d2) / d3
            } else {
                baseline - GENTLE * (t - t_off)
            };
            v.push(val);
        }
        ElaSeries::new(v, fps, 0.0)
    }

    fn detect_on(signal: &ElaSeries) -> Blink {
        let d = central_derivative(signal).unwrap();
        let (dmax, dmin) = crate::signal::local_extrema(&d);
        let m1 = *dmin
            .iter()
            .min_by(|&&a, &&b| d[a].partial_cmp(&d[b]).unwrap())
            .unwrap();
        let m2 = *dmax
            .iter()
            .max_by(|&&a, &&b| d[a].partial_cmp(&d[b]).unwrap())
            .unwrap();
        crate::blink::build_blink_window(signal, &d, m1, m2)
    }

    #[test]
    fn trapezoid_corners_are_recovered() {
        let fps = 1000.0;
        let (t_on, d1, d2, d3) = (1.0, 0.1, 0.05, 0.15);
        let s = trapezoid(fps, t_on, d1, d2, d3, 40.0, 10.0, 2500);
        let blink = detect_on(&s);
        let (t1, t2, t3, t4) = tangent_intersections(&s, &blink).unwrap();
        let dt = 2.0 / fps;
        // ela_start is the raised corner (40.5), which the descent tangent
        // crosses one sample early; tolerance of a couple of samples.
        assert_relative_eq!(t1, t_on, epsilon = 0.02);
        assert_relative_eq!(t2, t_on + d1, epsilon = dt + 0.001);
        assert_relative_eq!(t3, t_on + d1 + d2, epsilon = dt + 0.001);
        assert_relative_eq!(t4, t_on + d1 + d2 + d3, epsilon = 0.02);
    }

    #[test]
    fn symmetric_v_blink_has_no_closed_phase() {
        let fps = 500.0;
        let s = trapezoid(fps, 1.0, 0.1, 0.0, 0.1, 40.0, 10.0, 1500);
        let blink = detect_on(&s);
        let (_, t2, t3, _) = tangent_intersections(&s, &blink).unwrap();
        assert!(t3 - t2 < 3.0 / fps, "closed duration {}", t3 - t2);
    }

    #[test]
    fn crossed_tangents_collapse_the_closed_phase() {
        // A one-sample dip at 10 fps: the descent and ascent tangents use
        // two-frame average slopes and meet above the minimum, so the
        // closed phase must collapse to their crossing point.
        let fps = 10.0;
        let mut v = vec![40.0; 40];
        for (i, val) in v.iter_mut().enumerate() {
            *val += 0.3 * (i as f64 * 1.3).sin();
        }
        v[20] = 10.0;
        let s = ElaSeries::new(v, fps, 0.0);
        let blink = detect_on(&s);
        let (t1, t2, t3, t4) = tangent_intersections(&s, &blink).unwrap();
        assert!(t1 <= t2 && t2 <= t3 && t3 <= t4);
        assert_eq!(t2, t3);
        let f = compute_features(&s, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();
        assert_eq!(f.closed_d2, 0.0);
    }

    #[test]
    fn zero_slope_is_degenerate() {
        let s = trapezoid(100.0, 1.0, 0.1, 0.05, 0.15, 40.0, 10.0, 250);
        let mut blink = detect_on(&s);
        blink.m1 = 0.0;
        assert!(matches!(
            tangent_intersections(&s, &blink),
            Err(Error::DegenerateBlink(_))
        ));
    }

    #[test]
    fn feature_arithmetic_on_the_trapezoid() {
        let fps = 1000.0;
        let (d1, d2, d3) = (0.1, 0.05, 0.15);
        let s = trapezoid(fps, 1.0, d1, d2, d3, 40.0, 10.0, 2500);
        let blink = detect_on(&s);
        let f = compute_features(&s, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();

        // peropening = d3 / (d1 + d2 + d3) = 0.5
        assert_relative_eq!(f.peropening, 0.5, epsilon = 0.02);
        // amplitude = (max - min) / max = (40 - 10) / 40.
        assert_relative_eq!(f.amplitude, 0.75, epsilon = 1e-3);
        // The window ends at the landing corner, so the reopening-area
        // domain [t3, t3 + 2 d3] is clipped to one d3 of linear rise:
        // 0.5*D*d3 / (2*D*d3) = 0.25.
        assert_relative_eq!(f.normal_area, 0.25, epsilon = 0.02);
        // A/V ratio: (ela_end - ela_min) / m2 = 30 / 200 = 0.15 s.
        assert_relative_eq!(f.av_ratio, 0.15, epsilon = 5e-3);
        assert!(f.previous_time.is_none());
    }

    #[test]
    fn normal_area_closed_form_with_flat_tail() {
        // Reopening linear from the minimum to the end level over exactly
        // d3, flat afterwards, with the window extending past t3 + 2*d3:
        // area = 0.5*D*d3 + D*d3 = 1.5*D*d3 over denominator 2*D*d3 = 0.75.
        let fps = 1000.0;
        let (t_on, d1, d2, d3) = (0.5, 0.1, 0.05, 0.15);
        let t_off = t_on + d1 + d2 + d3;
        let n = 1500;
        let v: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fps;
                if t < t_on {
                    40.0
                } else if t < t_on + d1 {
                    40.0 - 30.0 * (t - t_on) / d1
                } else if t < t_on + d1 + d2 {
                    10.0
                } else if t < t_off {
                    10.0 + 30.0 * (t - t_on - d1 - d2) / d3
                } else {
                    40.0
                }
            })
            .collect();
        let s = ElaSeries::new(v, fps, 0.0);
        let d = central_derivative(&s).unwrap();
        let m1_index = ((t_on + d1 / 2.0) * fps) as usize;
        let m2_index = ((t_on + d1 + d2 + d3 / 2.0) * fps) as usize;
        let blink = Blink {
            i_start: (t_on * fps) as usize,
            // Window chosen to reach past t3 + 2*d3.
            i_end: ((t_off + 2.0 * d3) * fps) as usize,
            m1_index,
            m2_index,
            m1: d[m1_index],
            m2: d[m2_index],
            ela_start: 40.0,
            ela_end: 40.0,
            ela_min: 10.0,
        };
        let f = compute_features(&s, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();
        assert_relative_eq!(f.normal_area, 0.75, epsilon = 0.02);
    }

    #[test]
    fn peropening_identity_and_chaining() {
        let fps = 200.0;
        let s1 = trapezoid(fps, 1.0, 0.1, 0.05, 0.15, 40.0, 10.0, 1000);
        let blink = detect_on(&s1);
        let prev = PreviousBlink { t1: 0.2, i_end: 10 };
        let f = compute_features(&s1, &blink, Some(prev), DEFAULT_PERCLOS_THRESHOLD).unwrap();
        assert_relative_eq!(
            f.peropening,
            f.reopening_d3 / (f.closing_d1 + f.closed_d2 + f.reopening_d3),
            epsilon = 1e-15
        );
        assert_relative_eq!(f.previous_time.unwrap(), f.t1 - 0.2, epsilon = 1e-12);
    }

    #[test]
    fn perclos_counts_closed_frames() {
        let fps = 100.0;
        // Closed phase (10 deg < 20 deg threshold) lasts d2 = 0.5 s of the
        // 2 s interval up to the window end.
        let s = trapezoid(fps, 0.5, 0.1, 0.5, 0.1, 40.0, 10.0, 200);
        let blink = detect_on(&s);
        let f = compute_features(&s, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();
        // Frames below 20 deg: the closed phase plus parts of the flanks.
        let expected_low = (0.5 + 0.1 / 3.0 + 0.1 / 3.0) * fps;
        let total = (blink.i_end + 1) as f64;
        assert_relative_eq!(f.perclos, expected_low / total, epsilon = 0.05);
        // Never below threshold -> perclos 0.
        let high = trapezoid(fps, 0.5, 0.1, 0.5, 0.1, 40.0, 25.0, 200);
        let blink_high = detect_on(&high);
        let f_high =
            compute_features(&high, &blink_high, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();
        assert_eq!(f_high.perclos, 0.0);
    }

    #[test]
    fn time_shift_moves_intersections_equally() {
        let fps = 250.0;
        let s = trapezoid(fps, 1.0, 0.1, 0.05, 0.15, 40.0, 10.0, 1000);
        let blink = detect_on(&s);
        let f = compute_features(&s, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();

        let shifted = ElaSeries {
            start_time: 7.25,
            ..s.clone()
        };
        let f_shift =
            compute_features(&shifted, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();
        assert_relative_eq!(f_shift.t1 - f.t1, 7.25, epsilon = 1e-9);
        assert_relative_eq!(f_shift.t4 - f.t4, 7.25, epsilon = 1e-9);
        assert_relative_eq!(f_shift.closing_d1, f.closing_d1, epsilon = 1e-12);
        assert_relative_eq!(f_shift.closed_d2, f.closed_d2, epsilon = 1e-12);
        assert_relative_eq!(f_shift.reopening_d3, f.reopening_d3, epsilon = 1e-12);
        assert_relative_eq!(f_shift.peropening, f.peropening, epsilon = 1e-12);
    }

    #[test]
    fn uniform_scaling_leaves_shape_features_unchanged() {
        let fps = 250.0;
        let s = trapezoid(fps, 1.0, 0.1, 0.05, 0.15, 40.0, 10.0, 1000);
        let blink = detect_on(&s);
        let f = compute_features(&s, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();

        let c = 2.5;
        let scaled_series = ElaSeries {
            values: s.values.iter().map(|v| v * c).collect(),
            ..s.clone()
        };
        let scaled_blink = detect_on(&scaled_series);
        // PERCLOS threshold scales along for this comparison.
        let f_scaled = compute_features(
            &scaled_series,
            &scaled_blink,
            None,
            DEFAULT_PERCLOS_THRESHOLD * c,
        )
        .unwrap();
        assert_relative_eq!(f_scaled.amplitude, f.amplitude, epsilon = 1e-9);
        assert_relative_eq!(f_scaled.peropening, f.peropening, epsilon = 1e-9);
        assert_relative_eq!(f_scaled.normal_area, f.normal_area, epsilon = 1e-9);
        // A/V ratio: numerator and m2 both scale by c.
        assert_relative_eq!(f_scaled.av_ratio, f.av_ratio, epsilon = 1e-9);
        assert_relative_eq!(f_scaled.perclos, f.perclos, epsilon = 1e-12);
    }

    #[test]
    fn window_bounds_contain_the_intersections() {
        let fps = 250.0;
        let s = trapezoid(fps, 1.0, 0.1, 0.05, 0.15, 40.0, 10.0, 1000);
        let blink = detect_on(&s);
        let f = compute_features(&s, &blink, None, DEFAULT_PERCLOS_THRESHOLD).unwrap();
        let dt = 1.0 / fps;
        assert!(f.t1 >= s.time_of(blink.i_start) - dt);
        assert!(f.t4 <= s.time_of(blink.i_end) + dt);
    }
}
