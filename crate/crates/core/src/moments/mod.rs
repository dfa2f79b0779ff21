//! Outer-shape appearance descriptors computed on a pose-normalised patch.

mod hog;
mod zernike;

pub use hog::{hog_descriptor, HogConfig};
pub use zernike::{
    radial_polynomial, spz_descriptor, zernike_moments, SpatialZernike, ZernikeBasis, ZernikeConfig,
};

use crate::image::{BinaryMask, GrayImage};
use crate::topology::CanonicalFrame;

/// Half-width of the patch in canonical units (multiples of the RMS radius).
pub const CANONICAL_EXTENT: f64 = 2.3;

/// Square `size x size` patch of the glyph in its canonical frame.
///
/// Pixels outside `shape` are zeroed. Patch pixel `(i, j)` samples the image
/// at `c + s R^T q` where `q` runs over `[-CANONICAL_EXTENT, CANONICAL_EXTENT]`
/// with columns along the principal axis. When a patch pixel covers more than
/// one image pixel it averages a grid of bilinear samples.
pub fn normalize_glyph(img: &GrayImage, shape: &BinaryMask, frame: &CanonicalFrame, size: usize) -> GrayImage {
    if shape.is_empty() || frame.degenerate {
        return GrayImage::new(size, size);
    }
    let content = img.masked(shape);
    let (c, s, rot) = (frame.centroid, frame.scale, frame.rotation);
    let step = 2.0 * CANONICAL_EXTENT / size as f64;
    let sub = ((step * s).ceil() as usize).max(1);
    let weight = 1.0 / (sub * sub) as f32;

    GrayImage::from_fn(size, size, |i, j| {
        let mut acc = 0.0f32;
        for a in 0..sub {
            for b in 0..sub {
                // patch columns follow u, patch rows follow v
                let v = s * ((i as f64 + (a as f64 + 0.5) / sub as f64) * step - CANONICAL_EXTENT);
                let u = s * ((j as f64 + (b as f64 + 0.5) / sub as f64) * step - CANONICAL_EXTENT);
                let row = c[0] + rot[0][0] * u + rot[1][0] * v;
                let col = c[1] + rot[0][1] * u + rot[1][1] * v;
                acc += content.sample(row, col);
            }
        }
        acc * weight
    })
}
