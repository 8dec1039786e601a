//! Eyelid-angle geometry: least-squares plane fitting with
//! orientation-standardized normals, the per-eye and combined eyelid angle,
//! and the 2D eye-aspect-ratio baseline.

use nalgebra::{Matrix3xX, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landmarks::EyelidPoints;

/// Least-squares plane through a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPlane {
    /// Unit normal.
    pub normal: Vector3<f64>,
    pub centroid: Vector3<f64>,
    /// Root-mean-square orthogonal distance of the points to the plane:
    /// smallest singular value of the centered matrix divided by sqrt(n).
    pub residual_rms: f64,
}

/// One time step of the ELA signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElaSample {
    /// Seconds.
    pub timestamp: f64,
    /// Per-eye raw eyelid angle, degrees; absent when the eye was not
    /// computable in this frame.
    pub ela_left: Option<f64>,
    pub ela_right: Option<f64>,
    /// Visibility-weighted combination of the two eyes, degrees.
    pub ela_combined: f64,
    /// Yaw about the vertical axis, radians.
    pub yaw: f64,
}

/// Fits the orthogonal least-squares plane to `points` (n >= 3) via SVD of
/// the centered coordinate matrix. The normal is the left singular vector of
/// the smallest singular value; its sign is not standardized here, see
/// [`orient_normal`].
pub fn fit_plane(points: &[Vector3<f64>]) -> Result<FittedPlane> {
    if points.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "plane fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite("plane-fit input points"));
    }
    let n = points.len();
    let centroid: Vector3<f64> = points.iter().sum::<Vector3<f64>>() / n as f64;
    let centered = Matrix3xX::from_columns(
        &points.iter().map(|p| p - centroid).collect::<Vec<_>>(),
    );
    let svd = centered.clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    // nalgebra sorts singular values in descending order; the plane normal
    // belongs to the smallest one.
    let sv = &svd.singular_values;
    let (mut smallest, mut largest, mut middle) = (0usize, 0usize, 0usize);
    for i in 1..3 {
        if sv[i] < sv[smallest] {
            smallest = i;
        }
        if sv[i] > sv[largest] {
            largest = i;
        }
    }
    for i in 0..3 {
        if i != smallest && i != largest {
            middle = i;
        }
    }
    if sv[largest] <= 0.0 || sv[middle] <= 1e-12 * sv[largest] {
        return Err(Error::DegenerateGeometry(
            "points are collinear or coincident".into(),
        ));
    }
    let normal: Vector3<f64> = u.column(smallest).into();
    Ok(FittedPlane {
        normal: normal.normalize(),
        centroid,
        residual_rms: sv[smallest] / (n as f64).sqrt(),
    })
}

/// Standardizes the sign of a fitted normal against the inner -> outer
/// traversal of the points: with centered points `a_i`, the returned normal
/// satisfies `sum_i n . (a_{i+1} x a_i) >= 0`. Feeding the flipped normal
/// yields the same output.
pub fn orient_normal(plane: &FittedPlane, points: &[Vector3<f64>]) -> FittedPlane {
    let mut s = 0.0;
    for w in points.windows(2) {
        let a = w[0] - plane.centroid;
        let b = w[1] - plane.centroid;
        s += plane.normal.dot(&b.cross(&a));
    }
    let mut out = plane.clone();
    if s < 0.0 {
        out.normal = -out.normal;
    }
    out
}

fn lid_normal(points: &[Vector3<f64>]) -> Result<Vector3<f64>> {
    let plane = fit_plane(points)?;
    Ok(orient_normal(&plane, points).normal)
}

/// Raw eyelid angle of one eye: the angle between the orientation-
/// standardized normals of the upper and lower lid planes, in degrees.
pub fn eyelid_angle(upper: &[Vector3<f64>], lower: &[Vector3<f64>]) -> Result<f64> {
    let n_u = lid_normal(upper)?;
    let n_l = lid_normal(lower)?;
    // Unit-normal dot products can exceed 1 by ~1e-16; clamp before acos.
    let dot = n_l.dot(&n_u).clamp(-1.0, 1.0);
    Ok(dot.acos().to_degrees())
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Visibility-weighted combination of the per-eye angles:
/// `sigmoid(-4*yaw) * left + sigmoid(4*yaw) * right`. When one eye is
/// absent the other carries weight 1; both absent is an error.
pub fn combine_ela(left: Option<f64>, right: Option<f64>, yaw_beta: f64) -> Result<f64> {
    match (left, right) {
        (Some(l), Some(r)) => Ok(sigmoid(-4.0 * yaw_beta) * l + sigmoid(4.0 * yaw_beta) * r),
        (Some(l), None) => Ok(l),
        (None, Some(r)) => Ok(r),
        (None, None) => Err(Error::NoSample("both eyes absent")),
    }
}

/// Eye aspect ratio after Soukupova & Cech: six 2D eye landmarks ordered
/// `p1` outer corner, `p2`/`p3` upper lid, `p4` inner corner, `p5`/`p6`
/// lower lid; `(|p2-p6| + |p3-p5|) / (2 |p1-p4|)`.
pub fn ear(points: &[Vector2<f64>; 6]) -> Result<f64> {
    if points.iter().any(|p| !p.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite("EAR input points"));
    }
    let horizontal = (points[0] - points[3]).norm();
    if horizontal <= 0.0 {
        return Err(Error::DegenerateGeometry(
            "EAR horizontal extent is zero".into(),
        ));
    }
    let v1 = (points[1] - points[5]).norm();
    let v2 = (points[2] - points[4]).norm();
    Ok((v1 + v2) / (2.0 * horizontal))
}

/// Computes one [`ElaSample`] from a frame's eyelid points and yaw. An eye
/// with degenerate lid geometry is dropped from the combination; both eyes
/// degenerate is an error.
pub fn ela_sample(timestamp: f64, eyelids: &EyelidPoints, yaw: f64) -> Result<ElaSample> {
    let left = eyelid_angle(&eyelids.left_upper, &eyelids.left_lower).ok();
    let right = eyelid_angle(&eyelids.right_upper, &eyelids.right_lower).ok();
    let combined = combine_ela(left, right, yaw)?;
    Ok(ElaSample {
        timestamp,
        ela_left: left,
        ela_right: right,
        ela_combined: combined,
        yaw,
    })
}
