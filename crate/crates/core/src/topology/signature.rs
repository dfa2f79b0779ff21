//! Per-hole shape descriptors: radial signature and its Fourier magnitudes.

use std::cell::RefCell;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::contour::{distance, Contour};
use super::frame::CanonicalFrame;
use crate::error::{Error, Result};
use crate::image::{BinaryMask, Point};

pub const DEFAULT_SIGNATURE_LEN: usize = 128;
pub const DEFAULT_K_SHAPE: usize = 12;
const RMS_EPS: f64 = 1e-8;

/// Periodic cubic spline through closed-polygon vertices, parametrised by
/// cumulative chord length.
struct PeriodicSpline {
    knots: Vec<f64>,
    period: f64,
    values: [Vec<f64>; 2],
    second: [Vec<f64>; 2],
}

impl PeriodicSpline {
    /// Needs at least 3 distinct consecutive vertices.
    fn new(points: &[Point]) -> Self {
        let n = points.len();
        let mut knots = Vec::with_capacity(n);
        let mut t = 0.0;
        for i in 0..n {
            knots.push(t);
            t += distance(points[i], points[(i + 1) % n]);
        }
        let h: Vec<f64> = (0..n)
            .map(|i| if i + 1 < n { knots[i + 1] - knots[i] } else { t - knots[i] })
            .collect();
        let values = [
            points.iter().map(|p| p[0]).collect::<Vec<_>>(),
            points.iter().map(|p| p[1]).collect::<Vec<_>>(),
        ];
        let second = [
            spline_second_derivatives(&values[0], &h),
            spline_second_derivatives(&values[1], &h),
        ];
        PeriodicSpline {
            knots,
            period: t,
            values,
            second,
        }
    }

    fn eval(&self, t: f64) -> Point {
        let n = self.knots.len();
        let t = t.rem_euclid(self.period);
        let i = match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            j => j - 1,
        };
        let t0 = self.knots[i];
        let t1 = if i + 1 < n { self.knots[i + 1] } else { self.period };
        let j = (i + 1) % n;
        let h = t1 - t0;
        let (a, b) = (t1 - t, t - t0);
        let mut out = [0.0; 2];
        for (axis, o) in out.iter_mut().enumerate() {
            let (y, m) = (&self.values[axis], &self.second[axis]);
            *o = m[i] * a.powi(3) / (6.0 * h)
                + m[j] * b.powi(3) / (6.0 * h)
                + (y[i] - m[i] * h * h / 6.0) * a / h
                + (y[j] - m[j] * h * h / 6.0) * b / h;
        }
        out
    }
}

/// Second derivatives at the knots of a periodic cubic spline.
///
/// Solves the cyclic tridiagonal system with the Sherman-Morrison correction.
fn spline_second_derivatives(y: &[f64], h: &[f64]) -> Vec<f64> {
    let n = y.len();
    let prev = |i: usize| (i + n - 1) % n;
    let next = |i: usize| (i + 1) % n;
    let sub: Vec<f64> = (0..n).map(|i| h[prev(i)]).collect();
    let sup: Vec<f64> = (0..n).map(|i| h[i]).collect();
    let mut diag: Vec<f64> = (0..n).map(|i| 2.0 * (h[prev(i)] + h[i])).collect();
    let rhs: Vec<f64> = (0..n)
        .map(|i| 6.0 * ((y[next(i)] - y[i]) / h[i] - (y[i] - y[prev(i)]) / h[prev(i)]))
        .collect();

    // corners: A[0][n-1] = sub[0], A[n-1][0] = sup[n-1]
    let (beta, alpha) = (sub[0], sup[n - 1]);
    let gamma = -diag[0];
    diag[0] -= gamma;
    diag[n - 1] -= alpha * beta / gamma;

    let x = thomas(&sub, &diag, &sup, &rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(&sub, &diag, &sup, &u);
    let factor = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

/// Tridiagonal solve; `sub[0]` and `sup[n - 1]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Drops consecutive duplicates (including last/first) and starts the loop
/// at the lexicographically smallest vertex.
fn canonical_vertex_order(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if pts.last().is_none_or(|&q| distance(p, q) > 1e-12) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && distance(pts[0], pts[pts.len() - 1]) <= 1e-12 {
        pts.pop();
    }
    if let Some(start) = (0..pts.len()).min_by(|&a, &b| pts[a].partial_cmp(&pts[b]).expect("finite")) {
        pts.rotate_left(start);
    }
    pts
}

/// Samples the closed polyline itself at equal arc-length steps.
fn linear_resample(points: &[Point], n: usize) -> Vec<Point> {
    let m = points.len();
    let seg: Vec<f64> = (0..m).map(|i| distance(points[i], points[(i + 1) % m])).collect();
    let total: f64 = seg.iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut start = 0.0;
    for j in 0..n {
        let t = j as f64 * total / n as f64;
        while i + 1 < m && start + seg[i] < t {
            start += seg[i];
            i += 1;
        }
        let f = if seg[i] > 0.0 { (t - start) / seg[i] } else { 0.0 };
        let (a, b) = (points[i], points[(i + 1) % m]);
        out.push([a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]);
    }
    out
}

/// `n` points spaced uniformly along the closed curve.
pub fn resample_closed(contour: &Contour, n: usize) -> Vec<Point> {
    let pts = canonical_vertex_order(contour.points());
    if pts.len() < 3 {
        if pts.len() < 2 {
            return vec![pts.first().copied().unwrap_or([0.0, 0.0]); n];
        }
        return linear_resample(&pts, n);
    }
    let spline = PeriodicSpline::new(&pts);
    (0..n)
        .map(|j| spline.eval(j as f64 * spline.period / n as f64))
        .collect()
}

/// Distance from the sample centroid to `n` arc-length samples, divided by
/// its RMS value.
pub fn radial_signature(contour: &Contour, n: usize) -> Result<Vec<f64>> {
    if n < 16 {
        return Err(Error::InvalidParameter(format!(
            "signature length must be at least 16, got {n}"
        )));
    }
    let samples = resample_closed(contour, n);
    let c = samples.iter().fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
    let c = [c[0] / n as f64, c[1] / n as f64];
    let r: Vec<f64> = samples.iter().map(|&p| distance(p, c)).collect();
    let rms = (r.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms <= 1e-12 {
        return Ok(vec![0.0; n]);
    }
    Ok(r.into_iter().map(|v| v / (rms + RMS_EPS)).collect())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `|DFT(sig)[m]| / N` for `m = 1..=k`.
pub fn fourier_magnitudes(sig: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = sig.len();
    if 2 * k >= n {
        return Err(Error::InvalidParameter(format!(
            "need k < N/2, got k={k}, N={n}"
        )));
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    let mut buf: Vec<Complex<f64>> = sig.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    Ok(buf[1..=k].iter().map(|z| z.norm() / n as f64).collect())
}

/// Fixed-length per-hole feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleDescriptor {
    pub fourier: Vec<f64>,
    pub canon_y: f64,
    pub canon_x: f64,
    pub rel_area: f64,
    pub rel_perimeter: f64,
}

impl HoleDescriptor {
    pub fn len(&self) -> usize {
        self.fourier.len() + 4
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `[fourier..., canon_y, canon_x, rel_area, rel_perimeter]`.
    pub fn to_vec(&self) -> Vec<f32> {
        self.fourier
            .iter()
            .chain([self.canon_y, self.canon_x, self.rel_area, self.rel_perimeter].iter())
            .map(|&v| v as f32)
            .collect()
    }
}

pub fn hole_descriptor(
    hole: &BinaryMask,
    hole_contour: &Contour,
    frame: &CanonicalFrame,
    outer_area: f64,
    outer_perimeter: f64,
    signature_len: usize,
    k_shape: usize,
) -> Result<HoleDescriptor> {
    if outer_area <= 0.0 || outer_perimeter <= 0.0 {
        return Err(Error::Degenerate(
            "outer area and perimeter must be positive".into(),
        ));
    }
    let centroid = hole.centroid().ok_or(Error::EmptyShape)?;
    let fourier = fourier_magnitudes(&radial_signature(hole_contour, signature_len)?, k_shape)?;
    let [canon_y, canon_x] = frame.canon(centroid);
    Ok(HoleDescriptor {
        fourier,
        canon_y,
        canon_x,
        rel_area: hole.count() as f64 / outer_area,
        rel_perimeter: hole_contour.perimeter() / outer_perimeter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ellipse(a: f64, b: f64, n: usize) -> Contour {
        Contour::new(
            (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    [a * t.cos() + 3.0, b * t.sin() - 1.0]
                })
                .collect(),
        )
        .unwrap()
    }

    fn wobbly(n: usize) -> Contour {
        Contour::new(
            (0..n)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / n as f64;
                    let r = 5.0 + 0.6 * (3.0 * t).cos() + 0.3 * (5.0 * t + 1.0).sin() + 0.4 * (2.0 * t).sin();
                    [r * t.sin(), r * t.cos()]
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn spline_interpolates_vertices() {
        let pts = canonical_vertex_order(wobbly(40).points());
        let spline = PeriodicSpline::new(&pts);
        for (i, p) in pts.iter().enumerate() {
            let q = spline.eval(spline.knots[i]);
            assert!(distance(*p, q) < 1e-9);
        }
    }

    #[test]
    fn circle_signature_is_flat() {
        let sig = radial_signature(&ellipse(10.0, 10.0, 50), 64).unwrap();
        assert!(sig.iter().all(|v| (v - 1.0).abs() < 0.02));
        let mags = fourier_magnitudes(&sig, 12).unwrap();
        assert!(mags.iter().all(|&m| m < 1e-3));
    }

    #[test]
    fn ellipse_signature_has_period_two() {
        let sig = radial_signature(&ellipse(20.0, 10.0, 200), 64).unwrap();
        let mags = fourier_magnitudes(&sig, 12).unwrap();
        let peak = mags.iter().enumerate().fold(0, |b, (i, &m)| if m > mags[b] { i } else { b });
        assert_eq!(peak, 1, "index 1 holds the second harmonic: {mags:?}");
    }

    #[test]
    fn signature_is_scale_invariant() {
        let c = wobbly(90);
        let big = c.map(|p| [3.0 * p[0], 3.0 * p[1]]).unwrap();
        let (a, b) = (radial_signature(&c, 64).unwrap(), radial_signature(&big, 64).unwrap());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-6));
    }

    #[test]
    fn start_point_and_orientation_invariance() {
        let c = wobbly(73);
        let base = fourier_magnitudes(&radial_signature(&c, 64).unwrap(), 12).unwrap();
        for offset in [1, 17, 50] {
            let m = fourier_magnitudes(&radial_signature(&c.rotated_start(offset), 64).unwrap(), 12).unwrap();
            assert!(base.iter().zip(&m).all(|(a, b)| (a - b).abs() <= 1e-9));
        }
        let m = fourier_magnitudes(&radial_signature(&c.reversed(), 64).unwrap(), 12).unwrap();
        assert!(base.iter().zip(&m).all(|(a, b)| (a - b).abs() <= 1e-9));
    }

    #[test]
    fn fourier_examples() {
        assert!(fourier_magnitudes(&[2.5; 64], 12).unwrap().iter().all(|&m| m < 1e-12));
        let cos: Vec<f64> = (0..64).map(|j| (2.0 * PI * j as f64 / 64.0).cos()).collect();
        let m = fourier_magnitudes(&cos, 12).unwrap();
        assert!((m[0] - 0.5).abs() < 1e-12);
        assert!(m[1..].iter().all(|&v| v < 1e-12));

        let sig = radial_signature(&wobbly(60), 64).unwrap();
        let mut shifted = sig.clone();
        shifted.rotate_left(11);
        let (a, b) = (fourier_magnitudes(&sig, 12).unwrap(), fourier_magnitudes(&shifted, 12).unwrap());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-9));

        assert!(fourier_magnitudes(&[0.0; 24], 12).is_err());
    }

    #[test]
    fn degenerate_contour_gives_zero_signature() {
        let c = Contour::new(vec![[1.0, 1.0]; 5]).unwrap();
        assert_eq!(radial_signature(&c, 64).unwrap(), vec![0.0; 64]);
        assert!(radial_signature(&c, 8).is_err());
    }

    #[test]
    fn tiny_polygons_use_linear_resampling() {
        let c = Contour::new(vec![[0.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let sig = radial_signature(&c, 16).unwrap();
        assert!(sig.iter().all(|v| v.is_finite()));
    }
}
