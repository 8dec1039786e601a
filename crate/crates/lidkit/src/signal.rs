//! Frame-rate-aware smoothing, differentiation and extremum location for
//! ELA series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniformly sampled ELA segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElaSeries {
    /// Degrees.
    pub values: Vec<f64>,
    /// Frames per second; sampling step is `1/fps`.
    pub fps: f64,
    /// Timestamp of `values[0]`, seconds.
    pub start_time: f64,
    /// Gap-split segment this series belongs to.
    pub segment_id: usize,
}

impl ElaSeries {
    pub fn new(values: Vec<f64>, fps: f64, start_time: f64) -> Self {
        Self {
            values,
            fps,
            start_time,
            segment_id: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Timestamp of sample `i`.
    pub fn time_of(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.fps
    }

    /// Smoothing kernel width in samples, proportional to the frame rate.
    pub fn default_sigma(&self) -> f64 {
        self.fps / 30.0
    }
}

/// Normalized Gaussian kernel truncated at `4 * sigma`.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil().max(1.0) as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for k in -radius..=radius {
        kernel.push((-(k as f64).powi(2) / (2.0 * sigma * sigma)).exp());
    }
    let sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= sum;
    }
    kernel
}

/// Reflect (edge-repeat) index: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
fn reflect(mut j: i64, n: i64) -> usize {
    loop {
        if j < 0 {
            j = -j - 1;
        } else if j >= n {
            j = 2 * n - 1 - j;
        } else {
            return j as usize;
        }
    }
}

/// Gaussian smoothing with `sigma = fps / 30` samples, reflect-padded so the
/// output has the input length. Reflect padding keeps flat boundaries flat;
/// zero padding would drag the edges toward 0 degrees, which reads as an eye
/// closure.
pub fn gaussian_smooth(series: &ElaSeries) -> ElaSeries {
    gaussian_smooth_with_sigma(series, series.default_sigma())
}

/// Same as [`gaussian_smooth`] but with an explicit kernel width in samples.
pub fn gaussian_smooth_with_sigma(series: &ElaSeries, sigma: f64) -> ElaSeries {
    if series.values.is_empty() || sigma <= 0.0 {
        return series.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let n = series.values.len() as i64;
    let values = (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * series.values[reflect(i + k as i64 - radius, n)])
                .sum()
        })
        .collect();
    ElaSeries {
        values,
        ..series.clone()
    }
}

/// Central-difference derivative in degrees/second:
/// `d[i] = (v[i+1] - v[i-1]) * fps / 2` for interior samples, one-sided at
/// the endpoints.
pub fn central_derivative(series: &ElaSeries) -> Result<Vec<f64>> {
    let v = &series.values;
    if v.len() < 3 {
        return Err(Error::SeriesTooShort {
            len: v.len(),
            min: 3,
        });
    }
    let fps = series.fps;
    let n = v.len();
    let mut d = vec![0.0; n];
    d[0] = (v[1] - v[0]) * fps;
    d[n - 1] = (v[n - 1] - v[n - 2]) * fps;
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) * fps / 2.0;
    }
    Ok(d)
}

/// Local maxima and minima indices. Index `i` is a maximum iff
/// `v[i-1] < v[i] >= v[i+1]` (the first sample of a plateau), symmetric for
/// minima; endpoints are never extrema.
pub fn local_extrema(values: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if values[i - 1] < values[i] && values[i] >= values[i + 1] {
            maxima.push(i);
        }
        if values[i - 1] > values[i] && values[i] <= values[i + 1] {
            minima.push(i);
        }
    }
    (maxima, minima)
}
