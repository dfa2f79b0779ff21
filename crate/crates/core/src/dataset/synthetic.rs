//! Analytic shapes rasterised with anti-aliased edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, Point};

/// Shape in local `[y, x]` coordinates centred near the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SyntheticShape {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    /// Semi-axes along local y and x.
    Ellipse { ry: f64, rx: f64 },
    /// Filled outer polygon minus the hole polygons (even-odd per ring).
    Polygon { outer: Vec<Point>, holes: Vec<Vec<Point>> },
    /// Two overlapping disks along local x, each with a centred hole.
    DoubleAnnulus { outer: f64, inner: f64, offset: f64 },
}

/// Rotation (degrees, counterclockwise on screen), uniform scale and
/// translation of the canvas centre, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub angle: f64,
    pub scale: f64,
    pub translation: Point,
}

impl Default for Pose {
    fn default() -> Self {
        Pose {
            angle: 0.0,
            scale: 1.0,
            translation: [0.0, 0.0],
        }
    }
}

fn point_in_ring(p: Point, ring: &[Point]) -> bool {
    let mut inside = false;
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if (a[0] > p[0]) != (b[0] > p[0]) {
            let x = a[1] + (p[0] - a[0]) * (b[1] - a[1]) / (b[0] - a[0]);
            if p[1] < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl SyntheticShape {
    pub fn contains(&self, p: Point) -> bool {
        let r = |q: Point| (q[0] * q[0] + q[1] * q[1]).sqrt();
        match self {
            SyntheticShape::Disk { radius } => r(p) <= *radius,
            SyntheticShape::Annulus { inner, outer } => {
                let d = r(p);
                d <= *outer && d > *inner
            }
            SyntheticShape::Ellipse { ry, rx } => (p[0] / ry).powi(2) + (p[1] / rx).powi(2) <= 1.0,
            SyntheticShape::Polygon { outer, holes } => {
                point_in_ring(p, outer) && !holes.iter().any(|h| point_in_ring(p, h))
            }
            SyntheticShape::DoubleAnnulus { outer, inner, offset } => {
                let left = r([p[0], p[1] + offset]);
                let right = r([p[0], p[1] - offset]);
                (left <= *outer || right <= *outer) && left > *inner && right > *inner
            }
        }
    }

    /// Analytic area.
    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        let shoelace = |ring: &[Point]| {
            let n = ring.len();
            (0..n)
                .map(|i| ring[i][0] * ring[(i + 1) % n][1] - ring[(i + 1) % n][0] * ring[i][1])
                .sum::<f64>()
                .abs()
                / 2.0
        };
        match self {
            SyntheticShape::Disk { radius } => PI * radius * radius,
            SyntheticShape::Annulus { inner, outer } => PI * (outer * outer - inner * inner),
            SyntheticShape::Ellipse { ry, rx } => PI * ry * rx,
            SyntheticShape::Polygon { outer, holes } => {
                shoelace(outer) - holes.iter().map(|h| shoelace(h)).sum::<f64>()
            }
            SyntheticShape::DoubleAnnulus { outer, inner, offset } => {
                // two disks minus their lens overlap, minus both holes
                let d = 2.0 * offset;
                let lens = if d >= 2.0 * outer {
                    0.0
                } else {
                    2.0 * outer * outer * (d / (2.0 * outer)).acos() - 0.5 * d * (4.0 * outer * outer - d * d).sqrt()
                };
                2.0 * PI * outer * outer - lens - 2.0 * PI * inner * inner
            }
        }
    }

    /// Local bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        match self {
            SyntheticShape::Disk { radius: r } | SyntheticShape::Annulus { outer: r, .. } => ([-r, -r], [*r, *r]),
            SyntheticShape::Ellipse { ry, rx } => ([-ry, -rx], [*ry, *rx]),
            SyntheticShape::Polygon { outer, .. } => outer.iter().fold(
                ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
                |(lo, hi), p| ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])]),
            ),
            SyntheticShape::DoubleAnnulus { outer, offset, .. } => ([-outer, -outer - offset], [*outer, outer + offset]),
        }
    }
}

const SUBSAMPLES: usize = 4;

/// Rasterises `shape` at `pose` on a `size x size` canvas using 4x4
/// coverage sampling per pixel.
pub fn make_synthetic(shape: &SyntheticShape, pose: &Pose, size: usize) -> Result<GrayImage> {
    if !(pose.scale > 0.0) {
        return Err(Error::InvalidParameter("pose scale must be positive".into()));
    }
    let centre = (size as f64 - 1.0) / 2.0;
    let (sin, cos) = pose.angle.to_radians().sin_cos();
    let origin = [centre + pose.translation[0], centre + pose.translation[1]];
    // local -> canvas: counterclockwise on screen means rows run upwards
    let to_canvas = |q: Point| {
        let y = pose.scale * (cos * q[0] - sin * q[1]);
        let x = pose.scale * (sin * q[0] + cos * q[1]);
        [origin[0] + y, origin[1] + x]
    };
    let to_local = |p: Point| {
        let (y, x) = ((p[0] - origin[0]) / pose.scale, (p[1] - origin[1]) / pose.scale);
        [cos * y + sin * x, -sin * y + cos * x]
    };

    let (lo, hi) = shape.bounds();
    for corner in [[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]] {
        let p = to_canvas(corner);
        if p.iter().any(|&v| v < -0.5 || v > size as f64 - 0.5) {
            return Err(Error::InvalidParameter(format!(
                "shape leaves the {size}x{size} canvas at pose {pose:?}"
            )));
        }
    }

    let weight = 1.0 / (SUBSAMPLES * SUBSAMPLES) as f32;
    Ok(GrayImage::from_fn(size, size, |r, c| {
        let mut hits = 0;
        for a in 0..SUBSAMPLES {
            for b in 0..SUBSAMPLES {
                let p = [
                    r as f64 - 0.5 + (a as f64 + 0.5) / SUBSAMPLES as f64,
                    c as f64 - 0.5 + (b as f64 + 0.5) / SUBSAMPLES as f64,
                ];
                if shape.contains(to_local(p)) {
                    hits += 1;
                }
            }
        }
        hits as f32 * weight
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_matches() {
        let img = make_synthetic(&SyntheticShape::Disk { radius: 20.0 }, &Pose::default(), 64).unwrap();
        let area: f32 = img.pixels().iter().sum();
        let expected = std::f64::consts::PI * 400.0;
        assert!((area as f64 - expected).abs() / expected < 0.05);
    }

    #[test]
    fn polygon_area_is_pose_independent() {
        let shape = SyntheticShape::Polygon {
            outer: vec![[-12.0, -10.0], [-8.0, 14.0], [10.0, 9.0], [13.0, -6.0]],
            holes: vec![vec![[-3.0, -3.0], [-3.0, 3.0], [3.0, 3.0], [3.0, -3.0]]],
        };
        let pose = Pose { angle: 33.0, scale: 1.4, translation: [2.0, -3.0] };
        let img = make_synthetic(&shape, &pose, 64).unwrap();
        let area: f64 = img.pixels().iter().map(|&v| v as f64).sum();
        let expected = shape.area() * 1.96;
        assert!((area - expected).abs() / expected < 0.05, "{area} vs {expected}");
    }

    #[test]
    fn rotation_direction_matches_image_rotation() {
        // a blob on the +x axis moves to the top under a counterclockwise turn
        let shape = SyntheticShape::Polygon {
            outer: vec![[-2.0, 8.0], [-2.0, 14.0], [2.0, 14.0], [2.0, 8.0]],
            holes: vec![],
        };
        let img = make_synthetic(&shape, &Pose { angle: 90.0, ..Pose::default() }, 40).unwrap();
        let centre = 19.5;
        let (mut sy, mut m) = (0.0, 0.0);
        for r in 0..40 {
            for c in 0..40 {
                sy += img.get(r, c) as f64 * (r as f64 - centre);
                m += img.get(r, c) as f64;
            }
        }
        assert!(sy / m < -8.0);
    }

    #[test]
    fn out_of_canvas_is_an_error() {
        let pose = Pose { translation: [25.0, 0.0], ..Pose::default() };
        assert!(make_synthetic(&SyntheticShape::Disk { radius: 10.0 }, &pose, 64).is_err());
    }

    #[test]
    fn double_annulus_area() {
        let shape = SyntheticShape::DoubleAnnulus { outer: 10.0, inner: 4.0, offset: 8.0 };
        let img = make_synthetic(&shape, &Pose::default(), 64).unwrap();
        let area: f64 = img.pixels().iter().map(|&v| v as f64).sum();
        assert!((area - shape.area()).abs() / shape.area() < 0.05);
    }
}
