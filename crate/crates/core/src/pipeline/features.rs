//! Per-glyph feature extraction: topology, canonical patch, SPZ and HOG.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use super::RunConfig;
use crate::error::Result;
use crate::image::GrayImage;
use crate::moments::{hog_descriptor, normalize_glyph, HogConfig, SpatialZernike};
use crate::topology::{extract_primitives, PrimitiveSet, TopologyConfig};

/// Raw feature vectors of one glyph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlyphFeatures {
    pub hog: Vec<f32>,
    pub zernike: Vec<f32>,
    /// `h_max` rows of hole features; rows past `hole_mask` are zero.
    pub holes: Vec<Vec<f32>>,
    pub hole_mask: Vec<bool>,
}

/// Extraction settings shared by training and evaluation.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    topology: TopologyConfig,
    zernike: SpatialZernike,
    hog: HogConfig,
    patch_size: usize,
}

impl FeatureExtractor {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(FeatureExtractor {
            topology: config.topology(),
            zernike: SpatialZernike::new(config.zernike())?,
            hog: config.hog(),
            patch_size: config.patch_size,
        })
    }

    pub fn topology(&self) -> &TopologyConfig {
        &self.topology
    }

    pub fn hog_len(&self) -> usize {
        self.hog.descriptor_len(self.patch_size, self.patch_size)
    }

    pub fn zernike_len(&self) -> usize {
        self.zernike.config().descriptor_len()
    }

    /// Primitives, the canonical patch and the feature vectors of one image.
    pub fn analyse(&self, img: &GrayImage) -> Result<(PrimitiveSet, GrayImage, GlyphFeatures)> {
        let prim = extract_primitives(img, &self.topology)?;
        let patch = normalize_glyph(img, &prim.shape, &prim.frame, self.patch_size);
        let hog = hog_descriptor(&patch, &self.hog)?;
        let zernike = self.zernike.descriptor(&patch)?.into_iter().map(|v| v as f32).collect();
        let (holes, hole_mask) = prim.padded_holes(self.topology.h_max, self.topology.hole_feature_len());
        Ok((
            prim,
            patch,
            GlyphFeatures {
                hog,
                zernike,
                holes,
                hole_mask,
            },
        ))
    }

    pub fn extract(&self, img: &GrayImage) -> Result<GlyphFeatures> {
        self.analyse(img).map(|(_, _, f)| f)
    }

    /// Features of every image, in input order.
    pub fn extract_all(&self, images: &[GrayImage]) -> Result<FeatureSet> {
        let feats = images
            .par_iter()
            .map(|img| self.extract(img))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureSet::from_rows(&feats, self.hog_len(), self.zernike_len()))
    }
}

/// Features of a whole image set, with the dense channels as matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub hog: Array2<f32>,
    pub zernike: Array2<f32>,
    pub holes: Vec<Vec<Vec<f32>>>,
    pub hole_masks: Vec<Vec<bool>>,
}

impl FeatureSet {
    pub fn from_rows(rows: &[GlyphFeatures], hog_len: usize, zernike_len: usize) -> Self {
        let n = rows.len();
        let mut hog = Array2::zeros((n, hog_len));
        let mut zernike = Array2::zeros((n, zernike_len));
        for (i, f) in rows.iter().enumerate() {
            hog.row_mut(i).assign(&ndarray::ArrayView1::from(&f.hog));
            zernike.row_mut(i).assign(&ndarray::ArrayView1::from(&f.zernike));
        }
        FeatureSet {
            hog,
            zernike,
            holes: rows.iter().map(|f| f.holes.clone()).collect(),
            hole_masks: rows.iter().map(|f| f.hole_mask.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.hog.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Valid hole rows of every glyph, flattened.
    pub fn valid_holes(&self) -> Vec<&[f32]> {
        self.holes
            .iter()
            .zip(&self.hole_masks)
            .flat_map(|(rows, mask)| rows.iter().zip(mask).filter(|(_, &v)| v).map(|(r, _)| r.as_slice()))
            .collect()
    }

    pub fn select(&self, indices: &[usize]) -> FeatureSet {
        FeatureSet {
            hog: self.hog.select(ndarray::Axis(0), indices),
            zernike: self.zernike.select(ndarray::Axis(0), indices),
            holes: indices.iter().map(|&i| self.holes[i].clone()).collect(),
            hole_masks: indices.iter().map(|&i| self.hole_masks[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{make_synthetic, Pose, SyntheticShape};

    #[test]
    fn lengths_and_hole_flags() {
        let cfg = RunConfig::default();
        let fx = FeatureExtractor::new(&cfg).unwrap();
        let ring = make_synthetic(&SyntheticShape::Annulus { inner: 4.0, outer: 10.0 }, &Pose::default(), 28).unwrap();
        let f = fx.extract(&ring).unwrap();
        assert_eq!(f.hog.len(), 1764);
        assert_eq!(f.zernike.len(), 125);
        assert_eq!(f.holes.len(), 4);
        assert_eq!(f.hole_mask, vec![true, false, false, false]);
        assert!(f.holes[1].iter().all(|&v| v == 0.0));

        let blank = fx.extract(&GrayImage::new(28, 28)).unwrap();
        assert!(blank.hog.iter().chain(&blank.zernike).all(|&v| v == 0.0));
        assert_eq!(blank.hole_mask, vec![false; 4]);
    }

    #[test]
    fn batch_matches_single() {
        let fx = FeatureExtractor::new(&RunConfig::default()).unwrap();
        let imgs: Vec<GrayImage> = (0..3)
            .map(|i| {
                let pose = Pose { angle: 25.0 * i as f64, ..Pose::default() };
                make_synthetic(&SyntheticShape::Ellipse { ry: 9.0, rx: 5.0 }, &pose, 28).unwrap()
            })
            .collect();
        let set = fx.extract_all(&imgs).unwrap();
        assert_eq!(set.len(), 3);
        let one = fx.extract(&imgs[2]).unwrap();
        assert_eq!(set.hog.row(2).to_vec(), one.hog);
        assert_eq!(set.select(&[2]).zernike.row(0).to_vec(), one.zernike);
    }
}
