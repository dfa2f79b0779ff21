//! Histogram of oriented gradients with overlapping block normalisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HogConfig {
    /// Unsigned orientation bins over `[0, 180)` degrees.
    pub orientations: usize,
    pub cell: usize,
    /// Block side in cells; blocks move by one cell.
    pub block: usize,
    pub clip: f32,
}

impl Default for HogConfig {
    fn default() -> Self {
        HogConfig {
            orientations: 9,
            cell: 4,
            block: 2,
            clip: 0.2,
        }
    }
}

impl HogConfig {
    pub fn descriptor_len(&self, height: usize, width: usize) -> usize {
        let (cy, cx) = (height / self.cell, width / self.cell);
        if cy < self.block || cx < self.block {
            return 0;
        }
        (cy - self.block + 1) * (cx - self.block + 1) * self.block * self.block * self.orientations
    }

    fn check(&self, height: usize, width: usize) -> Result<()> {
        if self.orientations == 0 || self.cell == 0 || self.block == 0 {
            return Err(Error::InvalidParameter("HOG sizes must be positive".into()));
        }
        if height % self.cell != 0 || width % self.cell != 0 {
            return Err(Error::InvalidParameter(format!(
                "{height}x{width} patch is not divisible into {}-pixel cells",
                self.cell
            )));
        }
        if height / self.cell < self.block || width / self.cell < self.block {
            return Err(Error::InvalidParameter("patch smaller than one block".into()));
        }
        Ok(())
    }
}

/// Descriptor of `patch`; bins are centred at `k * 180 / orientations`
/// degrees, so a purely horizontal gradient lands in bin 0.
pub fn hog_descriptor(patch: &GrayImage, config: &HogConfig) -> Result<Vec<f32>> {
    let (h, w) = (patch.height(), patch.width());
    config.check(h, w)?;
    let bins = config.orientations;
    let bin_width = 180.0 / bins as f32;
    let (cells_y, cells_x) = (h / config.cell, w / config.cell);
    let mut hist = vec![0.0f32; cells_y * cells_x * bins];

    let at = |r: isize, c: isize| patch.get(r.clamp(0, h as isize - 1) as usize, c.clamp(0, w as isize - 1) as usize);
    for r in 0..h {
        for c in 0..w {
            let (ri, ci) = (r as isize, c as isize);
            let gx = at(ri, ci + 1) - at(ri, ci - 1);
            // y grows upwards
            let gy = at(ri - 1, ci) - at(ri + 1, ci);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            let pos = angle / bin_width;
            let lo = pos.floor();
            let frac = pos - lo;
            let b0 = lo as usize % bins;
            let b1 = (b0 + 1) % bins;
            let base = ((r / config.cell) * cells_x + c / config.cell) * bins;
            hist[base + b0] += mag * (1.0 - frac);
            hist[base + b1] += mag * frac;
        }
    }

    let mut out = Vec::with_capacity(config.descriptor_len(h, w));
    let mut block = Vec::with_capacity(config.block * config.block * bins);
    for by in 0..=cells_y - config.block {
        for bx in 0..=cells_x - config.block {
            block.clear();
            for y in by..by + config.block {
                for x in bx..bx + config.block {
                    let base = (y * cells_x + x) * bins;
                    block.extend_from_slice(&hist[base..base + bins]);
                }
            }
            normalize_block(&mut block, config.clip);
            out.extend_from_slice(&block);
        }
    }
    Ok(out)
}

/// L2 normalise, clip, normalise again.
fn normalize_block(v: &mut [f32], clip: f32) {
    let l2 = |v: &[f32]| v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let n = l2(v);
    if n < 1e-12 {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    v.iter_mut().for_each(|x| *x = (*x as f64 / n).min(clip as f64) as f32);
    let n = l2(v);
    if n >= 1e-12 {
        v.iter_mut().for_each(|x| *x = (*x as f64 / n) as f32);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured() -> GrayImage {
        GrayImage::from_fn(32, 32, |r, c| {
            let (y, x) = (r as f32, c as f32);
            0.5 + 0.3 * (0.4 * x + 0.2 * y).sin() * (0.3 * y).cos()
        })
    }

    #[test]
    fn default_length() {
        let d = hog_descriptor(&textured(), &HogConfig::default()).unwrap();
        assert_eq!(d.len(), 1764);
        assert_eq!(HogConfig::default().descriptor_len(32, 32), 1764);
    }

    #[test]
    fn constant_patch_is_zero() {
        let d = hog_descriptor(&GrayImage::from_fn(32, 32, |_, _| 0.4), &HogConfig::default()).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_edge_fills_horizontal_gradient_bin() {
        let patch = GrayImage::from_fn(32, 32, |_, c| if c >= 16 { 1.0 } else { 0.0 });
        let d = hog_descriptor(&patch, &HogConfig::default()).unwrap();
        let total: f32 = d.iter().sum();
        let bin0: f32 = d.iter().step_by(9).sum();
        assert!(bin0 / total > 0.6, "{}", bin0 / total);
    }

    #[test]
    fn intensity_affine_invariance() {
        let base = hog_descriptor(&textured(), &HogConfig::default()).unwrap();
        let half = GrayImage::from_fn(32, 32, |r, c| textured().get(r, c) * 0.5);
        let shifted = GrayImage::from_fn(32, 32, |r, c| textured().get(r, c) * 0.5 + 0.25);
        for other in [half, shifted] {
            let d = hog_descriptor(&other, &HogConfig::default()).unwrap();
            assert!(base.iter().zip(&d).all(|(a, b)| (a - b).abs() < 1e-6));
        }
    }

    #[test]
    fn rejects_indivisible_patch() {
        assert!(hog_descriptor(&GrayImage::new(30, 32), &HogConfig::default()).is_err());
    }
}
