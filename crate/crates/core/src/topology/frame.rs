//! Rotation/translation/scale normalisation from the outer contour.

use serde::{Deserialize, Serialize};

use super::contour::Contour;
use crate::image::Point;

/// Added to the RMS radius so the scale is never zero.
pub const SCALE_EPS: f64 = 1e-8;
/// Below this relative eigen-gap the principal axis is not well defined.
pub const EIGEN_GAP_EPS: f64 = 1e-6;
/// Below this absolute standardised skewness the farthest-point rule decides
/// the axis sign.
pub const SKEW_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFrame {
    pub centroid: Point,
    pub scale: f64,
    /// Angle of the principal axis, `atan2(v_col, v_row)`.
    pub theta: f64,
    /// Maps the principal axis onto `[1, 0]`.
    pub rotation: [[f64; 2]; 2],
    /// All contour points coincide.
    pub degenerate: bool,
    /// Relative eigen-gap below [`EIGEN_GAP_EPS`]; `theta` is arbitrary.
    pub ambiguous_orientation: bool,
    /// Standardised third moment of the projections after the sign fix.
    pub skewness: f64,
    /// `(lambda_max - lambda_min) / (lambda_max + lambda_min)`.
    pub eigen_gap: f64,
}

impl CanonicalFrame {
    pub fn degenerate_at(centroid: Point) -> Self {
        CanonicalFrame {
            centroid,
            scale: SCALE_EPS,
            theta: 0.0,
            rotation: rotation_matrix(0.0),
            degenerate: true,
            ambiguous_orientation: true,
            skewness: 0.0,
            eigen_gap: 0.0,
        }
    }

    /// `R (p - c) / s`.
    pub fn canon(&self, p: Point) -> Point {
        let d = [p[0] - self.centroid[0], p[1] - self.centroid[1]];
        let r = &self.rotation;
        [
            (r[0][0] * d[0] + r[0][1] * d[1]) / self.scale,
            (r[1][0] * d[0] + r[1][1] * d[1]) / self.scale,
        ]
    }

    /// Inverse of [`canon`](Self::canon): `c + s R^T q`.
    pub fn uncanon(&self, q: Point) -> Point {
        let r = &self.rotation;
        [
            self.centroid[0] + self.scale * (r[0][0] * q[0] + r[1][0] * q[1]),
            self.centroid[1] + self.scale * (r[0][1] * q[0] + r[1][1] * q[1]),
        ]
    }

    /// Whether the frame is reliable enough for full pose invariance.
    pub fn well_conditioned(&self, min_gap: f64, min_skew: f64) -> bool {
        !self.degenerate && self.eigen_gap > min_gap && self.skewness.abs() > min_skew
    }
}

pub fn canon_point(frame: &CanonicalFrame, p: Point) -> Point {
    frame.canon(p)
}

fn rotation_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (sin, cos) = theta.sin_cos();
    [[cos, sin], [-sin, cos]]
}

/// Principal eigenpair of the symmetric matrix `[[a, b], [b, d]]`.
fn principal_axis(a: f64, b: f64, d: f64) -> (Point, f64, f64) {
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let (hi, lo) = (mean + radius, mean - radius);
    let v = if a >= d { [hi - d, b] } else { [b, hi - a] };
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let v = if norm > 0.0 { [v[0] / norm, v[1] / norm] } else { [1.0, 0.0] };
    (v, hi, lo)
}

pub fn canonical_frame(outer: &Contour) -> CanonicalFrame {
    let pts = outer.points();
    let n = pts.len() as f64;
    let c = outer.centroid();
    let (mut saa, mut sab, mut sbb) = (0.0, 0.0, 0.0);
    for p in pts {
        let (y, x) = (p[0] - c[0], p[1] - c[1]);
        saa += y * y;
        sab += y * x;
        sbb += x * x;
    }
    let (saa, sab, sbb) = (saa / n, sab / n, sbb / n);
    let mean_sq = saa + sbb;
    if mean_sq <= 1e-24 {
        return CanonicalFrame::degenerate_at(c);
    }
    let scale = mean_sq.sqrt() + SCALE_EPS;
    let (mut v, hi, lo) = principal_axis(saa, sab, sbb);
    let eigen_gap = (hi - lo) / (hi + lo);

    let proj: Vec<f64> = pts
        .iter()
        .map(|p| (p[0] - c[0]) * v[0] + (p[1] - c[1]) * v[1])
        .collect();
    let m2 = proj.iter().map(|t| t * t).sum::<f64>() / n;
    let m3 = proj.iter().map(|t| t * t * t).sum::<f64>() / n;
    let mut skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    let flip = if skewness.abs() >= SKEW_EPS {
        skewness < 0.0
    } else {
        let mut far = 0;
        let mut far_d = f64::NEG_INFINITY;
        for (i, p) in pts.iter().enumerate() {
            let d = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
            if d > far_d {
                far_d = d;
                far = i;
            }
        }
        proj[far] < 0.0
    };
    if flip {
        v = [-v[0], -v[1]];
        skewness = -skewness;
    }
    let theta = v[1].atan2(v[0]);
    CanonicalFrame {
        centroid: c,
        scale,
        theta,
        rotation: rotation_matrix(theta),
        degenerate: false,
        ambiguous_orientation: eigen_gap < EIGEN_GAP_EPS,
        skewness,
        eigen_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn polygon() -> Contour {
        // asymmetric pentagon, well away from isotropy
        Contour::new(vec![[0.0, 0.0], [2.0, 30.0], [14.0, 34.0], [18.0, 12.0], [9.0, -4.0]]).unwrap()
    }

    fn transform(c: &Contour, angle: f64, scale: f64, t: Point) -> Contour {
        let (s, co) = angle.sin_cos();
        c.map(|p| [scale * (co * p[0] - s * p[1]) + t[0], scale * (s * p[0] + co * p[1]) + t[1]])
            .unwrap()
    }

    fn wrap(a: f64) -> f64 {
        (a + PI).rem_euclid(2.0 * PI) - PI
    }

    #[test]
    fn rotation_is_orthonormal() {
        let f = canonical_frame(&polygon());
        let r = f.rotation;
        let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
        assert!((det - 1.0).abs() < 1e-9);
        assert!((r[0][0] * r[0][1] + r[1][0] * r[1][1]).abs() < 1e-9);
        assert!(f.scale > 0.0 && !f.degenerate);
    }

    #[test]
    fn circle_is_isotropic() {
        let pts: Vec<Point> = (0..360)
            .map(|i| {
                let a = i as f64 * PI / 180.0;
                [a.sin(), a.cos()]
            })
            .collect();
        let f = canonical_frame(&Contour::new(pts).unwrap());
        assert!((f.scale - 1.0).abs() < 1e-6);
        assert!(f.ambiguous_orientation);
    }

    #[test]
    fn rotation_shifts_theta() {
        let base = canonical_frame(&polygon());
        for deg in [30.0f64, -75.0, 140.0] {
            let a = deg.to_radians();
            let f = canonical_frame(&transform(&polygon(), a, 1.0, [5.0, -3.0]));
            assert!(wrap(f.theta - (base.theta + a)).abs() < 0.02, "{deg}: {} vs {}", f.theta, base.theta);
        }
    }

    #[test]
    fn scaling_doubles_scale() {
        let base = canonical_frame(&polygon());
        let f = canonical_frame(&transform(&polygon(), 0.0, 2.0, [0.0, 0.0]));
        assert!((f.scale / base.scale - 2.0).abs() < 1e-9);
        assert!((f.theta - base.theta).abs() < 1e-6);
        let p = [7.0, 11.0];
        let (a, b) = (base.canon(p), f.canon([2.0 * p[0], 2.0 * p[1]]));
        assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
    }

    #[test]
    fn canon_of_similarity_transformed_point() {
        let p = [6.0, 20.0];
        let base = canonical_frame(&polygon());
        let q0 = base.canon(p);
        for (angle, scale, t) in [(0.3, 1.7, [4.0, 9.0]), (-2.0, 0.6, [-30.0, 2.5])] {
            let f = canonical_frame(&transform(&polygon(), angle, scale, t));
            let (s, c) = f64::sin_cos(angle);
            let pt = [scale * (c * p[0] - s * p[1]) + t[0], scale * (s * p[0] + c * p[1]) + t[1]];
            let q = f.canon(pt);
            assert!((q[0] - q0[0]).abs() < 1e-6 && (q[1] - q0[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn canon_hand_example() {
        let f = CanonicalFrame {
            centroid: [1.0, 1.0],
            scale: 2.0,
            theta: 0.0,
            rotation: rotation_matrix(0.0),
            degenerate: false,
            ambiguous_orientation: false,
            skewness: 1.0,
            eigen_gap: 1.0,
        };
        assert_eq!(f.canon([3.0, 1.0]), [1.0, 0.0]);
        assert_eq!(f.canon([1.0, 1.0]), [0.0, 0.0]);
        assert_eq!(f.uncanon([1.0, 0.0]), [3.0, 1.0]);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let c = Contour::new(vec![[2.0, 2.0]; 4]).unwrap();
        let f = canonical_frame(&c);
        assert!(f.degenerate);
        assert_eq!(f.scale, SCALE_EPS);
        assert_eq!(f.theta, 0.0);
    }
}
