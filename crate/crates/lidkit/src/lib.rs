//! Eyelid-angle blink analysis.
//!
//! `lidkit` turns streams of 3D facial landmarks into an eyelid-angle (ELA)
//! time series, detects blinks on it, extracts per-blink timing features and
//! classifies drowsiness from per-epoch feature statistics. A synthetic
//! generator produces ground-truth ELA waveforms and parametric 3D eyelid
//! landmark sequences so that every stage can be validated against known
//! truth without rendered video.
//!
//! Pipeline stages map onto modules:
//!
//! - [`landmarks`]: parse landmark streams, normalize coordinates, select
//!   eyelid subsets.
//! - [`geometry`]: least-squares plane fitting and the eyelid angle itself,
//!   plus the 2D eye-aspect-ratio baseline.
//! - [`signal`]: frame-rate-aware Gaussian smoothing, central-difference
//!   derivatives, local extrema.
//! - [`blink`]: blink segmentation (derivative peak clustering, flank
//!   pairing, window construction) and the sliding-window scheduler.
//! - [`features`]: tangent-intersection blink features (closing/closed/
//!   reopening durations, amplitude, A/V ratio, PERCLOS, ...).
//! - [`drowsiness`]: standardize -> PCA -> kNN epoch classification.
//! - [`synth`]: seeded ground-truth waveform and landmark generators.
//! - [`eval`]: detection-accuracy scoring, error sweeps, frame-rate reports.
//! - [`pipeline`]: glue that chains stages over gap-split sample grids.

pub mod blink;
pub mod drowsiness;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod io;
pub mod landmarks;
pub mod pipeline;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
