//! C ABI for the `lidkit` eyelid-angle pipeline.
//!
//! Conventions:
//! - Every fallible call returns a [`LidkitStatus`]; `Ok` is 0. On failure,
//!   [`lidkit_last_error_message`] yields a human-readable description for
//!   the calling thread.
//! - Series and blink lists are opaque handles created and released through
//!   their `_new`/`_free` pairs. Passing a handle after freeing it is
//!   undefined behavior, as in any C API.
//! - All angles are degrees, all times seconds, rates in frames/second.
//!
//! The matching header `include/lidkit.h` is generated by `cbindgen` at
//! build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};

use lidkit::blink::{detect_blinks, Blink};
use lidkit::features::compute_feature_sequence;
use lidkit::geometry::{combine_ela, ear, eyelid_angle};
use lidkit::signal::{gaussian_smooth, ElaSeries};
use nalgebra::{Vector2, Vector3};

/// Call outcome; 0 is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LidkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateGeometry = 3,
    InsufficientData = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &lidkit::Error) -> LidkitStatus {
    use lidkit::Error as E;
    set_error(&err.to_string());
    match err {
        E::DegenerateGeometry(_) | E::DegenerateBlink(_) | E::NoSample(_) => {
            LidkitStatus::DegenerateGeometry
        }
        E::InsufficientData(_) | E::SeriesTooShort { .. } | E::EmptyInput(_) => {
            LidkitStatus::InsufficientData
        }
        _ => LidkitStatus::InvalidArgument,
    }
}

/// Copies the calling thread's last error message into `buffer` (truncated,
/// always NUL-terminated) and returns the full message length in bytes,
/// excluding the terminator. A zero-capacity buffer is allowed.
///
/// # Safety
/// `buffer` must hold `capacity` writable bytes, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn lidkit_last_error_message(
    buffer: *mut c_char,
    capacity: usize,
) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lidkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn points3(xyz: *const f64, count: usize) -> Vec<Vector3<f64>> {
    std::slice::from_raw_parts(xyz, count * 3)
        .chunks_exact(3)
        .map(|c| Vector3::new(c[0], c[1], c[2]))
        .collect()
}

/// Eyelid angle in degrees between the least-squares planes of the upper
/// and lower lid point sets (`x,y,z` triples, `*_count` points each,
/// ordered inner corner to outer corner).
///
/// # Safety
/// `upper_xyz` and `lower_xyz` must point to `3 * *_count` readable f64
/// values; `out_degrees` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lidkit_eyelid_angle(
    upper_xyz: *const f64,
    upper_count: usize,
    lower_xyz: *const f64,
    lower_count: usize,
    out_degrees: *mut f64,
) -> LidkitStatus {
    if upper_xyz.is_null() || lower_xyz.is_null() || out_degrees.is_null() {
        set_error("null pointer argument");
        return LidkitStatus::NullPointer;
    }
    let upper = points3(upper_xyz, upper_count);
    let lower = points3(lower_xyz, lower_count);
    match eyelid_angle(&upper, &lower) {
        Ok(angle) => {
            *out_degrees = angle;
            LidkitStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Visibility-weighted combination of the per-eye angles. Eyes are marked
/// absent with `has_left` / `has_right` = false; both absent is an error.
///
/// # Safety
/// `out_degrees` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lidkit_combine_ela(
    has_left: bool,
    left_degrees: f64,
    has_right: bool,
    right_degrees: f64,
    yaw_radians: f64,
    out_degrees: *mut f64,
) -> LidkitStatus {
    if out_degrees.is_null() {
        set_error("null pointer argument");
        return LidkitStatus::NullPointer;
    }
    let left = has_left.then_some(left_degrees);
    let right = has_right.then_some(right_degrees);
    match combine_ela(left, right, yaw_radians) {
        Ok(v) => {
            *out_degrees = v;
            LidkitStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Eye aspect ratio of six 2D points (`x,y` pairs, 12 values): outer
/// corner, two upper-lid points, inner corner, two lower-lid points.
///
/// # Safety
/// `points_xy` must point to 12 readable f64 values; `out_ratio` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lidkit_ear(
    points_xy: *const f64,
    out_ratio: *mut f64,
) -> LidkitStatus {
    if points_xy.is_null() || out_ratio.is_null() {
        set_error("null pointer argument");
        return LidkitStatus::NullPointer;
    }
    let values = std::slice::from_raw_parts(points_xy, 12);
    let points: [Vector2<f64>; 6] =
        std::array::from_fn(|i| Vector2::new(values[2 * i], values[2 * i + 1]));
    match ear(&points) {
        Ok(v) => {
            *out_ratio = v;
            LidkitStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Opaque uniformly sampled ELA series.
pub struct LidkitSeries {
    inner: ElaSeries,
}

/// Creates a series from `len` samples at `fps` starting at `start_time`.
/// Returns NULL on invalid arguments.
///
/// # Safety
/// `values` must point to `len` readable f64 values.
#[no_mangle]
pub unsafe extern "C" fn lidkit_series_new(
    values: *const f64,
    len: usize,
    fps: f64,
    start_time: f64,
) -> *mut LidkitSeries {
    if values.is_null() || len == 0 || !(fps > 0.0) {
        set_error("series needs non-null values, len > 0 and fps > 0");
        return std::ptr::null_mut();
    }
    let data = std::slice::from_raw_parts(values, len).to_vec();
    if data.iter().any(|v| !v.is_finite()) {
        set_error("series values must be finite");
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(LidkitSeries {
        inner: ElaSeries::new(data, fps, start_time),
    }))
}

/// Releases a series handle; NULL is a no-op.
///
/// # Safety
/// `series` must come from [`lidkit_series_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lidkit_series_free(series: *mut LidkitSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of samples in the series; 0 for NULL.
///
/// # Safety
/// `series` must be a live series handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lidkit_series_len(series: *const LidkitSeries) -> usize {
    if series.is_null() {
        return 0;
    }
    (*series).inner.len()
}

/// Applies the frame-rate-proportional Gaussian smoothing (sigma = fps/30
/// samples) in place.
///
/// # Safety
/// `series` must be a live series handle.
#[no_mangle]
pub unsafe extern "C" fn lidkit_series_smooth(series: *mut LidkitSeries) -> LidkitStatus {
    if series.is_null() {
        set_error("null series handle");
        return LidkitStatus::NullPointer;
    }
    let s = &mut (*series).inner;
    *s = gaussian_smooth(s);
    LidkitStatus::Ok
}

/// Copies the series values into `buffer`.
///
/// # Safety
/// `series` must be a live handle; `buffer` must hold `capacity` writable
/// f64 values.
#[no_mangle]
pub unsafe extern "C" fn lidkit_series_values(
    series: *const LidkitSeries,
    buffer: *mut f64,
    capacity: usize,
) -> LidkitStatus {
    if series.is_null() || buffer.is_null() {
        set_error("null pointer argument");
        return LidkitStatus::NullPointer;
    }
    let values = &(*series).inner.values;
    if capacity < values.len() {
        set_error("buffer too small for series values");
        return LidkitStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
    LidkitStatus::Ok
}

/// One detected blink; indices refer to the analyzed series.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidkitBlink {
    pub i_start: usize,
    pub i_end: usize,
    pub m1_index: usize,
    pub m2_index: usize,
    /// Maximum descent rate, degrees/second (negative).
    pub m1: f64,
    /// Maximum ascent rate, degrees/second (positive).
    pub m2: f64,
    pub ela_start: f64,
    pub ela_end: f64,
    pub ela_min: f64,
}

impl From<&Blink> for LidkitBlink {
    fn from(b: &Blink) -> Self {
        Self {
            i_start: b.i_start,
            i_end: b.i_end,
            m1_index: b.m1_index,
            m2_index: b.m2_index,
            m1: b.m1,
            m2: b.m2,
            ela_start: b.ela_start,
            ela_end: b.ela_end,
            ela_min: b.ela_min,
        }
    }
}

/// Opaque list of detected blinks.
pub struct LidkitBlinkList {
    inner: Vec<Blink>,
}

/// Runs blink detection on a smoothed series. Always returns a list handle
/// (possibly empty); NULL only for a NULL series.
///
/// # Safety
/// `series` must be a live series handle.
#[no_mangle]
pub unsafe extern "C" fn lidkit_detect_blinks(
    series: *const LidkitSeries,
    seed: u64,
) -> *mut LidkitBlinkList {
    if series.is_null() {
        set_error("null series handle");
        return std::ptr::null_mut();
    }
    let blinks = detect_blinks(&(*series).inner, seed);
    Box::into_raw(Box::new(LidkitBlinkList { inner: blinks }))
}

/// Releases a blink list; NULL is a no-op.
///
/// # Safety
/// `list` must come from [`lidkit_detect_blinks`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lidkit_blink_list_free(list: *mut LidkitBlinkList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Number of blinks in the list; 0 for NULL.
///
/// # Safety
/// `list` must be a live blink list handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lidkit_blink_list_len(list: *const LidkitBlinkList) -> usize {
    if list.is_null() {
        return 0;
    }
    (*list).inner.len()
}

/// Copies blink `index` into `out`.
///
/// # Safety
/// `list` must be a live blink list handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lidkit_blink_list_get(
    list: *const LidkitBlinkList,
    index: usize,
    out: *mut LidkitBlink,
) -> LidkitStatus {
    if list.is_null() || out.is_null() {
        set_error("null pointer argument");
        return LidkitStatus::NullPointer;
    }
    let blinks: &[Blink] = &(*list).inner;
    match blinks.get(index) {
        Some(b) => {
            *out = b.into();
            LidkitStatus::Ok
        }
        None => {
            set_error("blink index out of range");
            LidkitStatus::InvalidArgument
        }
    }
}

/// The per-blink feature record. `previous_time` is meaningful only when
/// `has_previous_time` is true.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidkitBlinkFeatures {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub closing_d1: f64,
    pub closed_d2: f64,
    pub reopening_d3: f64,
    pub has_previous_time: bool,
    pub previous_time: f64,
    pub amplitude: f64,
    pub av_ratio: f64,
    pub normal_area: f64,
    pub perclos: f64,
    pub peropening: f64,
}

/// Computes features for every non-degenerate blink of the list against
/// the (smoothed) series the blinks were detected on, chaining the
/// previous-blink context. Writes up to `capacity` records and stores the
/// number written in `out_written`; degenerate blinks are skipped.
///
/// # Safety
/// `series` and `blinks` must be live handles; `out` must hold `capacity`
/// writable records; `out_written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lidkit_compute_features(
    series: *const LidkitSeries,
    blinks: *const LidkitBlinkList,
    perclos_threshold_degrees: f64,
    out: *mut LidkitBlinkFeatures,
    capacity: usize,
    out_written: *mut usize,
) -> LidkitStatus {
    if series.is_null() || blinks.is_null() || out.is_null() || out_written.is_null() {
        set_error("null pointer argument");
        return LidkitStatus::NullPointer;
    }
    let (features, _dropped) = compute_feature_sequence(
        &(*series).inner,
        &(*blinks).inner,
        perclos_threshold_degrees,
    );
    if capacity < features.len() {
        set_error("buffer too small for feature records");
        return LidkitStatus::BufferTooSmall;
    }
    for (slot, (_, f)) in features.iter().enumerate() {
        *out.add(slot) = LidkitBlinkFeatures {
            t1: f.t1,
            t2: f.t2,
            t3: f.t3,
            t4: f.t4,
            closing_d1: f.closing_d1,
            closed_d2: f.closed_d2,
            reopening_d3: f.reopening_d3,
            has_previous_time: f.previous_time.is_some(),
            previous_time: f.previous_time.unwrap_or(0.0),
            amplitude: f.amplitude,
            av_ratio: f.av_ratio,
            normal_area: f.normal_area,
            perclos: f.perclos,
            peropening: f.peropening,
        };
    }
    *out_written = features.len();
    LidkitStatus::Ok
}
