//! Pixel-level baseline: position hypervectors bound to intensity levels.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hv::{Hypervector, LevelTable};
use crate::image::GrayImage;

/// Encodes an image as the bundle of `pos_i * level(x_i)` over all pixels.
#[derive(Debug, Clone)]
pub struct NaiveEncoder {
    height: usize,
    width: usize,
    position_seed: u64,
    positions: Vec<Hypervector>,
    levels: LevelTable,
}

impl NaiveEncoder {
    /// Position vector `i` is drawn from `position_seed` on stream `i`.
    pub fn new(height: usize, width: usize, dim: usize, levels: usize, position_seed: u64, level_seed: u64) -> Result<Self> {
        if height * width == 0 {
            return Err(Error::InvalidParameter("naive encoder needs a non-empty image shape".into()));
        }
        if height * width > i16::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "naive encoder supports at most {} pixels",
                i16::MAX
            )));
        }
        let positions = (0..height * width)
            .map(|i| Hypervector::from_seed(dim, position_seed, i as u64))
            .collect();
        Ok(NaiveEncoder {
            height,
            width,
            position_seed,
            positions,
            levels: LevelTable::new(dim, levels, level_seed)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.levels.dim()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn position_seed(&self) -> u64 {
        self.position_seed
    }

    pub fn levels(&self) -> &LevelTable {
        &self.levels
    }

    pub fn encode(&self, img: &GrayImage) -> Result<Hypervector> {
        if (img.height(), img.width()) != (self.height, self.width) {
            return Err(Error::DimensionMismatch {
                expected: self.height * self.width,
                actual: img.height() * img.width(),
            });
        }
        let mut acc = vec![0i16; self.dim()];
        for (pos, &v) in self.positions.iter().zip(img.pixels()) {
            let q = self.levels.quantize(v as f64, 0.0, 1.0);
            let level = self.levels.level(q).as_slice();
            for ((a, &p), &l) in acc.iter_mut().zip(pos.as_slice()).zip(level) {
                *a += (p * l) as i16;
            }
        }
        Ok(Hypervector::from_signs(&acc))
    }

    pub fn encode_all(&self, images: &[GrayImage]) -> Result<Vec<Hypervector>> {
        images.par_iter().map(|img| self.encode(img)).collect()
    }
}
