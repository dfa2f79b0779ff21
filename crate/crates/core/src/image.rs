//! Minimal raster types shared by the feature extractors and corruptions.
//!
//! Pixel `(r, c)` has its centre at continuous coordinate `(r, c)`; points
//! are `[row, col]` pairs throughout the crate.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Grayscale image with intensities in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f32>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize) -> Self {
        GrayImage {
            height,
            width,
            pixels: vec![0.0; height * width],
        }
    }

    /// Builds an image, clipping every pixel into `[0, 1]`.
    pub fn from_vec(height: usize, width: usize, pixels: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter("image must be nonempty".into()));
        }
        if pixels.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: height * width,
                actual: pixels.len(),
            });
        }
        Ok(GrayImage {
            height,
            width,
            pixels: pixels.into_iter().map(clip01).collect(),
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut pixels = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                pixels.push(clip01(f(r, c)));
            }
        }
        GrayImage {
            height,
            width,
            pixels,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.pixels[r * self.width + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f32) {
        self.pixels[r * self.width + c] = clip01(v);
    }

    /// Bilinear sample at continuous `(row, col)`; zero outside the canvas.
    pub fn sample(&self, row: f64, col: f64) -> f32 {
        bilinear(self.height, self.width, row, col, |r, c| self.get(r, c))
    }

    /// Pixels multiplied by a mask (zero where the mask is background).
    pub fn masked(&self, mask: &BinaryMask) -> GrayImage {
        assert_eq!((self.height, self.width), (mask.height(), mask.width()));
        GrayImage {
            height: self.height,
            width: self.width,
            pixels: self
                .pixels
                .iter()
                .zip(mask.data())
                .map(|(&p, &m)| if m { p } else { 0.0 })
                .collect(),
        }
    }

    /// Image rotated by `degrees` about its centre (bilinear, zero fill).
    /// Positive angles rotate counterclockwise on screen.
    pub fn rotated(&self, degrees: f64) -> GrayImage {
        let (sin, cos) = degrees.to_radians().sin_cos();
        let cy = (self.height as f64 - 1.0) / 2.0;
        let cx = (self.width as f64 - 1.0) / 2.0;
        GrayImage::from_fn(self.height, self.width, |r, c| {
            let dy = r as f64 - cy;
            let dx = c as f64 - cx;
            // inverse map: rotate the output coordinate back
            let sx = cos * dx - sin * dy;
            let sy = sin * dx + cos * dy;
            self.sample(cy + sy, cx + sx)
        })
    }

    /// Rescales the whole canvas by `scale` about its centre, keeping the
    /// canvas size (centre crop when enlarging, zero padding when shrinking).
    pub fn zoomed(&self, scale: f64) -> GrayImage {
        let cy = (self.height as f64 - 1.0) / 2.0;
        let cx = (self.width as f64 - 1.0) / 2.0;
        GrayImage::from_fn(self.height, self.width, |r, c| {
            self.sample(cy + (r as f64 - cy) / scale, cx + (c as f64 - cx) / scale)
        })
    }
}

#[inline]
fn clip01(v: f32) -> f32 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

#[inline]
pub(crate) fn bilinear(
    height: usize,
    width: usize,
    row: f64,
    col: f64,
    get: impl Fn(usize, usize) -> f32,
) -> f32 {
    if !(row > -1.0 && col > -1.0 && row < height as f64 && col < width as f64) {
        return 0.0;
    }
    let r0 = row.floor();
    let c0 = col.floor();
    let fr = (row - r0) as f32;
    let fc = (col - c0) as f32;
    let (r0, c0) = (r0 as isize, c0 as isize);
    let at = |r: isize, c: isize| -> f32 {
        if r < 0 || c < 0 || r >= height as isize || c >= width as isize {
            0.0
        } else {
            get(r as usize, c as usize)
        }
    };
    let top = at(r0, c0) * (1.0 - fc) + at(r0, c0 + 1) * fc;
    let bottom = at(r0 + 1, c0) * (1.0 - fc) + at(r0 + 1, c0 + 1) * fc;
    top * (1.0 - fr) + bottom * fr
}

/// Boolean raster; `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize) -> Self {
        BinaryMask {
            height,
            width,
            data: vec![false; height * width],
        }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::DimensionMismatch {
                expected: height * width,
                actual: data.len(),
            });
        }
        Ok(BinaryMask {
            height,
            width,
            data,
        })
    }

    /// Parses rows of `#`/`1` (foreground) and `.`/`0` (background).
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(height * width);
        for row in rows {
            assert_eq!(row.len(), width, "ragged ascii mask");
            data.extend(row.chars().map(|ch| matches!(ch, '#' | '1')));
        }
        BinaryMask {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.width + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r * self.width + c] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    pub fn inverted(&self) -> BinaryMask {
        BinaryMask {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| !v).collect(),
        }
    }

    /// Union with another mask of the same shape.
    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        assert_eq!((self.height, self.width), (other.height, other.width));
        BinaryMask {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a || b)
                .collect(),
        }
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i / self.width, i % self.width))
    }

    /// Mean `[row, col]` of the foreground pixels.
    pub fn centroid(&self) -> Option<Point> {
        let mut n = 0usize;
        let mut sum = [0.0f64; 2];
        for (r, c) in self.pixels() {
            n += 1;
            sum[0] += r as f64;
            sum[1] += c as f64;
        }
        (n > 0).then(|| [sum[0] / n as f64, sum[1] / n as f64])
    }

    /// Inclusive bounding box `(r0, c0, r1, c1)` of the foreground.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for (r, c) in self.pixels() {
            bbox = Some(match bbox {
                None => (r, c, r, c),
                Some((r0, c0, r1, c1)) => (r0.min(r), c0.min(c), r1.max(r), c1.max(c)),
            });
        }
        bbox
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            height: self.height,
            width: self.width,
            pixels: self.data.iter().map(|&v| if v { 1.0 } else { 0.0 }).collect(),
        }
    }
}
