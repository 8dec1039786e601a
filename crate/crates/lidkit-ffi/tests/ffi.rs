//! Exercises the C ABI end to end from Rust, the way a C caller would.

use approx::assert_relative_eq;
use lidkit_ffi::*;

fn eyelid_points(ela_deg: f64) -> (Vec<f64>, Vec<f64>) {
    let model = lidkit::synth::eye_model(ela_deg);
    let cfg = lidkit::synth::model_index_config();
    let flat = |idx: &[usize; 7]| -> Vec<f64> {
        idx.iter()
            .flat_map(|&i| [model[i].x, model[i].y, model[i].z])
            .collect()
    };
    (flat(&cfg.left.upper), flat(&cfg.left.lower))
}

#[test]
fn eyelid_angle_through_the_abi() {
    let (upper, lower) = eyelid_points(60.0);
    let mut out = 0.0f64;
    let status = unsafe {
        lidkit_eyelid_angle(upper.as_ptr(), 7, lower.as_ptr(), 7, &mut out)
    };
    assert_eq!(status, LidkitStatus::Ok);
    assert_relative_eq!(out, 60.0, epsilon = 1e-9);
}

#[test]
fn degenerate_geometry_reports_status_and_message() {
    // Collinear points cannot define a plane.
    let collinear: Vec<f64> = (0..7).flat_map(|i| [i as f64, 0.0, 0.0]).collect();
    let mut out = 0.0f64;
    let status = unsafe {
        lidkit_eyelid_angle(collinear.as_ptr(), 7, collinear.as_ptr(), 7, &mut out)
    };
    assert_eq!(status, LidkitStatus::DegenerateGeometry);
    let mut buf = vec![0i8; 256];
    let len = unsafe { lidkit_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    assert!(len > 0);
    let message = unsafe { std::ffi::CStr::from_ptr(buf.as_ptr().cast()) }
        .to_string_lossy()
        .to_string();
    assert!(message.contains("collinear"), "message: {message}");
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = 0.0f64;
    let status = unsafe {
        lidkit_eyelid_angle(std::ptr::null(), 7, std::ptr::null(), 7, &mut out)
    };
    assert_eq!(status, LidkitStatus::NullPointer);
    assert!(unsafe { lidkit_detect_blinks(std::ptr::null(), 0) }.is_null());
    unsafe {
        lidkit_series_free(std::ptr::null_mut());
        lidkit_blink_list_free(std::ptr::null_mut());
    }
}

#[test]
fn combine_and_ear_through_the_abi() {
    let mut out = 0.0f64;
    let status = unsafe { lidkit_combine_ela(true, 40.0, true, 50.0, 0.0, &mut out) };
    assert_eq!(status, LidkitStatus::Ok);
    assert_relative_eq!(out, 45.0, epsilon = 1e-12);

    let status = unsafe { lidkit_combine_ela(false, 0.0, false, 0.0, 0.0, &mut out) };
    assert_eq!(status, LidkitStatus::DegenerateGeometry);

    // (0.6 + 0.6) / (2 * 2) = 0.3
    let points = [
        0.0, 0.0, 0.5, 0.3, 1.5, 0.3, 2.0, 0.0, 1.5, -0.3, 0.5, -0.3,
    ];
    let status = unsafe { lidkit_ear(points.as_ptr(), &mut out) };
    assert_eq!(status, LidkitStatus::Ok);
    assert_relative_eq!(out, 0.3, epsilon = 1e-12);
}

/// A synthetic signal detected identically through the ABI and the Rust API.
#[test]
fn detection_and_features_match_the_rust_api() {
    use lidkit::drowsiness::DrowsinessLabel;
    use lidkit::synth::{generate_ela_signal, ScenarioConfig};

    let cfg = ScenarioConfig::example();
    let mut scenario = cfg.scenario.clone();
    scenario.duration_s = 60.0;
    let params = cfg.params.for_state(DrowsinessLabel::Drowsy);
    let (series, _) = generate_ela_signal(DrowsinessLabel::Drowsy, &scenario, params).unwrap();

    // Reference result through the Rust API.
    let smoothed = lidkit::signal::gaussian_smooth(&series);
    let reference = lidkit::blink::detect_blinks(&smoothed, 7);
    assert!(!reference.is_empty());

    unsafe {
        let handle = lidkit_series_new(series.values.as_ptr(), series.len(), 30.0, 0.0);
        assert!(!handle.is_null());
        assert_eq!(lidkit_series_len(handle), series.len());
        assert_eq!(lidkit_series_smooth(handle), LidkitStatus::Ok);

        let mut smoothed_values = vec![0.0f64; series.len()];
        assert_eq!(
            lidkit_series_values(handle, smoothed_values.as_mut_ptr(), smoothed_values.len()),
            LidkitStatus::Ok
        );
        assert_eq!(smoothed_values, smoothed.values);

        let list = lidkit_detect_blinks(handle, 7);
        assert!(!list.is_null());
        assert_eq!(lidkit_blink_list_len(list), reference.len());

        let mut blink = LidkitBlink {
            i_start: 0,
            i_end: 0,
            m1_index: 0,
            m2_index: 0,
            m1: 0.0,
            m2: 0.0,
            ela_start: 0.0,
            ela_end: 0.0,
            ela_min: 0.0,
        };
        assert_eq!(lidkit_blink_list_get(list, 0, &mut blink), LidkitStatus::Ok);
        assert_eq!(blink.i_start, reference[0].i_start);
        assert_eq!(blink.m1_index, reference[0].m1_index);
        assert_eq!(
            lidkit_blink_list_get(list, reference.len(), &mut blink),
            LidkitStatus::InvalidArgument
        );

        let mut features = vec![
            LidkitBlinkFeatures {
                t1: 0.0,
                t2: 0.0,
                t3: 0.0,
                t4: 0.0,
                closing_d1: 0.0,
                closed_d2: 0.0,
                reopening_d3: 0.0,
                has_previous_time: false,
                previous_time: 0.0,
                amplitude: 0.0,
                av_ratio: 0.0,
                normal_area: 0.0,
                perclos: 0.0,
                peropening: 0.0,
            };
            reference.len()
        ];
        let mut written = 0usize;
        assert_eq!(
            lidkit_compute_features(
                handle,
                list,
                20.0,
                features.as_mut_ptr(),
                features.len(),
                &mut written,
            ),
            LidkitStatus::Ok
        );
        assert!(written > 0 && written <= reference.len());
        assert!(!features[0].has_previous_time);
        if written > 1 {
            assert!(features[1].has_previous_time);
        }
        let f = &features[0];
        assert_relative_eq!(
            f.peropening,
            f.reopening_d3 / (f.closing_d1 + f.closed_d2 + f.reopening_d3),
            epsilon = 1e-12
        );

        // Undersized buffer is reported, not truncated silently.
        if written > 1 {
            assert_eq!(
                lidkit_compute_features(handle, list, 20.0, features.as_mut_ptr(), 1, &mut written),
                LidkitStatus::BufferTooSmall
            );
        }

        lidkit_blink_list_free(list);
        lidkit_series_free(handle);
    }
}

#[test]
fn version_is_a_c_string() {
    let version = unsafe { std::ffi::CStr::from_ptr(lidkit_version()) };
    assert!(!version.to_string_lossy().is_empty());
}

#[test]
fn generated_header_covers_the_surface() {
    let header = include_str!("../include/lidkit.h");
    for symbol in [
        "lidkit_eyelid_angle",
        "lidkit_combine_ela",
        "lidkit_ear",
        "lidkit_series_new",
        "lidkit_series_free",
        "lidkit_series_smooth",
        "lidkit_detect_blinks",
        "lidkit_blink_list_len",
        "lidkit_blink_list_get",
        "lidkit_compute_features",
        "lidkit_last_error_message",
        "lidkit_version",
        "LidkitStatus",
        "LidkitBlink",
        "LidkitBlinkFeatures",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
    // Handles stay opaque.
    assert!(header.contains("typedef struct LidkitSeries LidkitSeries;"));
    assert!(header.contains("typedef struct LidkitBlinkList LidkitBlinkList;"));
}
