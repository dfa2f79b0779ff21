//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::Rng;
use topohdc::dataset::{make_synthetic, Pose, SyntheticShape};
use topohdc::moments::{normalize_glyph, SpatialZernike};
use topohdc::topology::{extract_primitives, CanonicalFrame, Contour, TopologyConfig};
use topohdc::{BinaryMask, GrayImage, Point};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}

fn flood(h: usize, w: usize, seeds: &[(usize, usize)], open: impl Fn(usize, usize) -> bool, diag: bool, seen: &mut [bool]) -> usize {
    let mut q: VecDeque<(usize, usize)> = VecDeque::new();
    let mut size = 0;
    for &(r, c) in seeds {
        if open(r, c) && !seen[r * w + c] {
            seen[r * w + c] = true;
            q.push_back((r, c));
        }
    }
    while let Some((r, c)) = q.pop_front() {
        size += 1;
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if (dr == 0 && dc == 0) || (!diag && dr != 0 && dc != 0) {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if open(nr, nc) && !seen[nr * w + nc] {
                    seen[nr * w + nc] = true;
                    q.push_back((nr, nc));
                }
            }
        }
    }
    size
}

/// Holes of the largest 8-connected foreground component, counted by breadth
/// first flood fill: background reachable from the border (4-connected) is
/// outside, every other 4-connected background region of at least
/// `min_hole` pixels is a hole.
pub fn oracle_hole_count(mask: &BinaryMask, min_hole: usize) -> usize {
    let (h, w) = (mask.height(), mask.width());
    // largest foreground component, first in row-major order on ties
    let mut seen = vec![false; h * w];
    let mut best: Option<(usize, (usize, usize))> = None;
    for r in 0..h {
        for c in 0..w {
            if mask.get(r, c) && !seen[r * w + c] {
                let size = flood(h, w, &[(r, c)], |y, x| mask.get(y, x), true, &mut seen);
                if best.is_none_or(|(s, _)| size > s) {
                    best = Some((size, (r, c)));
                }
            }
        }
    }
    let Some((_, start)) = best else { return 0 };
    let mut shape = vec![false; h * w];
    flood(h, w, &[start], |y, x| mask.get(y, x), true, &mut shape);

    let background = |y: usize, x: usize| !shape[y * w + x];
    let mut seen = vec![false; h * w];
    let border: Vec<(usize, usize)> = (0..h)
        .flat_map(|r| [(r, 0), (r, w - 1)])
        .chain((0..w).flat_map(|c| [(0, c), (h - 1, c)]))
        .collect();
    flood(h, w, &border, background, false, &mut seen);
    let mut holes = 0;
    for r in 0..h {
        for c in 0..w {
            if background(r, c) && !seen[r * w + c] && flood(h, w, &[(r, c)], background, false, &mut seen) >= min_hole {
                holes += 1;
            }
        }
    }
    holes
}

/// Random blobs and rings on an `n x n` canvas.
pub fn random_mask<R: Rng>(rng: &mut R, n: usize) -> BinaryMask {
    let density: f64 = rng.random_range(0.3..0.75);
    let mut m = BinaryMask::new(n, n);
    for r in 0..n {
        for c in 0..n {
            m.set(r, c, rng.random::<f64>() < density);
        }
    }
    if rng.random::<bool>() {
        let (cy, cx) = (rng.random_range(4.0..n as f64 - 4.0), rng.random_range(4.0..n as f64 - 4.0));
        let (a, b) = (rng.random_range(1.0..3.0), rng.random_range(3.0..6.0));
        for r in 0..n {
            for c in 0..n {
                let d = ((r as f64 - cy).powi(2) + (c as f64 - cx).powi(2)).sqrt();
                if d >= a && d <= b {
                    m.set(r, c, true);
                }
            }
        }
    }
    m
}

/// Closed star-shaped polygon whose radius carries energy in every harmonic
/// up to `harmonics`.
pub fn random_contour<R: Rng>(rng: &mut R, harmonics: usize) -> Contour {
    let n = rng.random_range(60..160);
    let terms: Vec<(f64, f64)> = (0..harmonics)
        .map(|_| (rng.random_range(0.01..0.03), rng.random_range(0.0..TAU)))
        .collect();
    let base = rng.random_range(5.0..20.0);
    Contour::new(
        (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                let r = base
                    * (1.0
                        + terms
                            .iter()
                            .enumerate()
                            .map(|(m, (a, p))| a * ((m as f64 + 1.0) * t + p).cos())
                            .sum::<f64>());
                [r * t.sin(), r * t.cos()]
            })
            .collect(),
    )
    .unwrap()
}

/// Rotation by `angle` radians, uniform `scale`, then translation.
pub fn similarity(p: Point, angle: f64, scale: f64, t: Point) -> Point {
    let (s, c) = angle.sin_cos();
    [scale * (c * p[0] - s * p[1]) + t[0], scale * (s * p[0] + c * p[1]) + t[1]]
}

/// Random star polygon with up to four low harmonics, radius about 11 px.
pub fn random_blob<R: Rng>(rng: &mut R) -> SyntheticShape {
    let terms: Vec<(f64, f64)> = (0..4).map(|_| (rng.random_range(0.0..0.45), rng.random_range(0.0..TAU))).collect();
    let n = 48;
    let outer = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            let r = 11.0
                * (1.0 + terms.iter().enumerate().map(|(m, (a, p))| a * ((m as f64 + 1.0) * t + p).cos()).sum::<f64>())
                    .max(0.3);
            [r * t.sin(), r * t.cos()]
        })
        .collect();
    SyntheticShape::Polygon { outer, holes: vec![] }
}

/// Frame and spatial-pyramid Zernike descriptor of a rendered glyph.
pub fn spz_of(img: &GrayImage, spz: &SpatialZernike, patch: usize) -> (CanonicalFrame, Vec<f64>) {
    let p = extract_primitives(img, &TopologyConfig::default()).unwrap();
    let patch = normalize_glyph(img, &p.shape, &p.frame, patch);
    (p.frame, spz.descriptor(&patch).unwrap())
}

/// Rendered asymmetric glyph on a 64 x 64 canvas, together with its frame at
/// the identity pose. Shapes whose eigen-gap or skewness falls below `min`
/// are redrawn.
pub fn asymmetric_shape<R: Rng>(rng: &mut R, spz: &SpatialZernike, min: f64) -> (SyntheticShape, Vec<f64>) {
    loop {
        let shape = random_blob(rng);
        let Ok(img) = make_synthetic(&shape, &Pose::default(), 64) else { continue };
        let (frame, d) = spz_of(&img, spz, 32);
        if frame.eigen_gap >= min && frame.skewness.abs() >= min {
            return (shape, d);
        }
    }
}

pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}
