//! Binary shape analysis: components, holes, contours, canonical frame and
//! hole descriptors.

mod components;
mod contour;
mod frame;
mod signature;

pub use components::{
    binarize, fill_holes, find_holes, label, largest_component, otsu_bin, remove_small_components,
    Components, Connectivity,
};
pub use contour::{marching_squares, trace_loops, Contour};
pub use frame::{canon_point, canonical_frame, CanonicalFrame, EIGEN_GAP_EPS, SCALE_EPS, SKEW_EPS};
pub use signature::{
    fourier_magnitudes, hole_descriptor, radial_signature, resample_closed, HoleDescriptor,
    DEFAULT_K_SHAPE, DEFAULT_SIGNATURE_LEN,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub h_max: usize,
    pub k_shape: usize,
    pub signature_len: usize,
    /// Foreground components smaller than this are removed before the
    /// largest component is chosen.
    pub min_component: usize,
    /// Holes smaller than this are treated as noise.
    pub min_hole: usize,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            h_max: 4,
            k_shape: DEFAULT_K_SHAPE,
            signature_len: DEFAULT_SIGNATURE_LEN,
            min_component: 3,
            min_hole: 2,
        }
    }
}

impl TopologyConfig {
    /// Per-hole feature length.
    pub fn hole_feature_len(&self) -> usize {
        self.k_shape + 4
    }

    pub fn validate(&self) -> Result<()> {
        if self.signature_len < 16 || 2 * self.k_shape >= self.signature_len {
            return Err(Error::InvalidParameter(format!(
                "need signature_len >= 16 and k_shape < signature_len / 2, got {} and {}",
                self.signature_len, self.k_shape
            )));
        }
        Ok(())
    }
}

/// Everything extracted from one glyph.
#[derive(Debug, Clone, Serialize)]
pub struct PrimitiveSet {
    /// Outer contour of the hole-filled shape; `None` for an empty image.
    pub outer: Option<Contour>,
    pub frame: CanonicalFrame,
    /// At most `h_max` descriptors, largest relative area first.
    pub holes: Vec<HoleDescriptor>,
    /// Number of holes found before truncation.
    pub hole_count: usize,
    pub empty: bool,
    /// The retained foreground component.
    #[serde(skip)]
    pub shape: BinaryMask,
}

impl PrimitiveSet {
    fn empty(height: usize, width: usize) -> Self {
        PrimitiveSet {
            outer: None,
            frame: CanonicalFrame::degenerate_at([
                (height as f64 - 1.0) / 2.0,
                (width as f64 - 1.0) / 2.0,
            ]),
            holes: Vec::new(),
            hole_count: 0,
            empty: true,
            shape: BinaryMask::new(height, width),
        }
    }

    /// Hole features padded with zero rows up to `h_max`, plus validity flags.
    pub fn padded_holes(&self, h_max: usize, k: usize) -> (Vec<Vec<f32>>, Vec<bool>) {
        let mut rows = Vec::with_capacity(h_max);
        let mut mask = Vec::with_capacity(h_max);
        for i in 0..h_max {
            match self.holes.get(i) {
                Some(h) => {
                    rows.push(h.to_vec());
                    mask.push(true);
                }
                None => {
                    rows.push(vec![0.0; k]);
                    mask.push(false);
                }
            }
        }
        (rows, mask)
    }
}

/// Binarise, clean and analyse an image.
pub fn extract_primitives(img: &GrayImage, config: &TopologyConfig) -> Result<PrimitiveSet> {
    config.validate()?;
    let mask = remove_small_components(&binarize(img), config.min_component);
    if mask.is_empty() {
        return Ok(PrimitiveSet::empty(img.height(), img.width()));
    }
    primitives_of_mask(&mask, config)
}

/// Contour resampled at about four points per pixel of arc length, so the
/// frame statistics do not depend on how densely marching squares placed
/// vertices along each edge direction.
fn uniform_outline(outer: &Contour) -> Result<Contour> {
    let n = ((4.0 * outer.perimeter()).ceil() as usize).max(64);
    Contour::new(resample_closed(outer, n))
}

/// Same as [`extract_primitives`] for an already binarised image.
pub fn primitives_of_mask(mask: &BinaryMask, config: &TopologyConfig) -> Result<PrimitiveSet> {
    let shape = match largest_component(mask) {
        Ok(s) => s,
        Err(Error::EmptyShape) => return Ok(PrimitiveSet::empty(mask.height(), mask.width())),
        Err(e) => return Err(e),
    };
    let filled = fill_holes(&shape);
    let outer = marching_squares(&filled)?;
    let frame = canonical_frame(&uniform_outline(&outer)?);
    let outer_area = filled.count() as f64;
    let outer_perimeter = outer.perimeter();

    let holes: Vec<BinaryMask> = find_holes(&shape)
        .into_iter()
        .filter(|h| h.count() >= config.min_hole)
        .collect();
    let hole_count = holes.len();
    let descriptors = holes
        .iter()
        .take(config.h_max)
        .map(|h| {
            hole_descriptor(
                h,
                &marching_squares(h)?,
                &frame,
                outer_area,
                outer_perimeter,
                config.signature_len,
                config.k_shape,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(PrimitiveSet {
        outer: Some(outer),
        frame,
        holes: descriptors,
        hole_count,
        empty: false,
        shape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_image() -> GrayImage {
        BinaryMask::from_ascii(&[
            "..........",
            ".########.",
            ".#......#.",
            ".#......#.",
            ".#......#.",
            ".########.",
            "..........",
        ])
        .to_image()
    }

    #[test]
    fn blank_image_is_flagged() {
        let p = extract_primitives(&GrayImage::new(28, 28), &TopologyConfig::default()).unwrap();
        assert!(p.empty && p.holes.is_empty() && p.hole_count == 0 && p.frame.degenerate);
    }

    #[test]
    fn ring_has_one_hole() {
        let p = extract_primitives(&ring_image(), &TopologyConfig::default()).unwrap();
        assert_eq!(p.hole_count, 1);
        let h = &p.holes[0];
        assert_eq!(h.len(), 16);
        assert!((h.rel_area - 18.0 / 40.0).abs() < 1e-12);
        assert!(h.canon_y.abs() < 0.05 && h.canon_x.abs() < 0.05);
        assert!(h.rel_perimeter > 0.0 && h.rel_perimeter < 1.0);
    }

    #[test]
    fn single_pixel_holes_are_dropped() {
        let img = BinaryMask::from_ascii(&[".....", ".###.", ".#.#.", ".###.", "....."]).to_image();
        let p = extract_primitives(&img, &TopologyConfig::default()).unwrap();
        assert_eq!(p.hole_count, 0);
    }

    #[test]
    fn truncates_to_h_max_and_keeps_count() {
        // a frame split by walls into six chambers of widths 8, 7, 6, 5, 4, 3
        let widths = [8usize, 7, 6, 5, 4, 3];
        let width = widths.iter().sum::<usize>() + widths.len() + 3;
        let mut m = BinaryMask::new(12, width);
        for c in 1..width - 1 {
            m.set(1, c, true);
            m.set(10, c, true);
        }
        let mut c = 1;
        for w in std::iter::once(0).chain(widths) {
            c += w + usize::from(w > 0);
            for r in 1..11 {
                m.set(r, c, true);
            }
        }
        let cfg = TopologyConfig::default();
        let p = primitives_of_mask(&m, &cfg).unwrap();
        assert_eq!(p.hole_count, 6);
        assert_eq!(p.holes.len(), 4);
        let filled = fill_holes(&m).count() as f64;
        let expected: Vec<f64> = widths[..4].iter().map(|&w| (8 * w) as f64 / filled).collect();
        let areas: Vec<f64> = p.holes.iter().map(|h| h.rel_area).collect();
        assert_eq!(areas, expected);
        let (rows, valid) = p.padded_holes(5, cfg.hole_feature_len());
        assert_eq!(valid, vec![true, true, true, true, false]);
        assert!(rows[4].iter().all(|&v| v == 0.0));
    }
}
