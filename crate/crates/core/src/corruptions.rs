//! Seeded test-time corruptions.
//!
//! Every image draws from its own generator, keyed by the spec seed and the
//! image index, so results do not depend on evaluation order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hv::seeded_rng;
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    None,
    Rotation,
    Gaussian,
    SaltPepper,
    Cutout,
    Zoom,
}

impl CorruptionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionKind::None => "none",
            CorruptionKind::Rotation => "rotation",
            CorruptionKind::Gaussian => "gaussian",
            CorruptionKind::SaltPepper => "salt_pepper",
            CorruptionKind::Cutout => "cutout",
            CorruptionKind::Zoom => "zoom",
        }
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "none" => CorruptionKind::None,
            "rotation" => CorruptionKind::Rotation,
            "gaussian" => CorruptionKind::Gaussian,
            "salt_pepper" => CorruptionKind::SaltPepper,
            "cutout" => CorruptionKind::Cutout,
            "zoom" => CorruptionKind::Zoom,
            other => {
                return Err(Error::InvalidCorruption {
                    spec: s.to_string(),
                    reason: format!("unknown kind {other:?}"),
                })
            }
        })
    }
}

/// One corruption setting: kind, its parameter and a seed.
///
/// The parameter is the maximum angle in degrees (rotation), the noise
/// standard deviation (gaussian), the flip probability (salt_pepper), the
/// square side in pixels (cutout) or the scale factor (zoom).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    kind: CorruptionKind,
    param: f64,
    seed: u64,
}

impl Default for CorruptionSpec {
    fn default() -> Self {
        CorruptionSpec::none()
    }
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, param: f64, seed: u64) -> Result<Self> {
        let spec = CorruptionSpec { kind, param, seed };
        let bad = |reason: &str| {
            Err(Error::InvalidCorruption {
                spec: spec.to_string(),
                reason: reason.to_string(),
            })
        };
        if !param.is_finite() {
            return bad("parameter must be finite");
        }
        match kind {
            CorruptionKind::None => {}
            CorruptionKind::Rotation if !(0.0..=180.0).contains(&param) => {
                return bad("angle must be in [0, 180]")
            }
            CorruptionKind::Gaussian if param < 0.0 => return bad("sigma must be >= 0"),
            CorruptionKind::SaltPepper if !(0.0..=1.0).contains(&param) => {
                return bad("probability must be in [0, 1]")
            }
            CorruptionKind::Cutout if param < 0.0 || param.fract() != 0.0 => {
                return bad("size must be a nonnegative integer")
            }
            CorruptionKind::Zoom if param <= 0.0 => return bad("scale must be > 0"),
            _ => {}
        }
        Ok(spec)
    }

    pub fn none() -> Self {
        CorruptionSpec {
            kind: CorruptionKind::None,
            param: 0.0,
            seed: 0,
        }
    }

    pub fn kind(&self) -> CorruptionKind {
        self.kind
    }

    pub fn param(&self) -> f64 {
        self.param
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Short name for reports, such as `clean` or `rotation-20`.
    pub fn label(&self) -> String {
        match self.kind {
            CorruptionKind::None => "clean".to_string(),
            k => format!("{}-{}", k.as_str(), self.param),
        }
    }

    /// Corrupted copy of `img`, the `index`-th image of its set.
    pub fn apply(&self, img: &GrayImage, index: u64) -> Result<GrayImage> {
        let mut rng = seeded_rng(self.seed, index);
        Ok(match self.kind {
            CorruptionKind::None => img.clone(),
            CorruptionKind::Rotation => {
                let angle = if self.param > 0.0 {
                    rng.random_range(-self.param..=self.param)
                } else {
                    0.0
                };
                img.rotated(angle)
            }
            CorruptionKind::Gaussian => {
                if self.param == 0.0 {
                    return Ok(img.clone());
                }
                let normal = Normal::new(0.0, self.param).expect("sigma checked at construction");
                let pixels = img
                    .pixels()
                    .iter()
                    .map(|&v| v + normal.sample(&mut rng) as f32)
                    .collect();
                GrayImage::from_vec(img.height(), img.width(), pixels)?
            }
            CorruptionKind::SaltPepper => {
                let mut out = img.clone();
                for r in 0..img.height() {
                    for c in 0..img.width() {
                        if rng.random::<f64>() < self.param {
                            out.set(r, c, if rng.random::<bool>() { 1.0 } else { 0.0 });
                        }
                    }
                }
                out
            }
            CorruptionKind::Cutout => {
                let size = self.param as usize;
                let (h, w) = (img.height(), img.width());
                if size > h.min(w) {
                    return Err(Error::InvalidCorruption {
                        spec: self.to_string(),
                        reason: format!("cutout larger than the {h}x{w} canvas"),
                    });
                }
                let mut out = img.clone();
                let r0 = rng.random_range(0..=h - size);
                let c0 = rng.random_range(0..=w - size);
                for r in r0..r0 + size {
                    for c in c0..c0 + size {
                        out.set(r, c, 0.0);
                    }
                }
                out
            }
            CorruptionKind::Zoom => img.zoomed(self.param),
        })
    }
}

impl fmt::Display for CorruptionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kind={},param={},seed={}", self.kind.as_str(), self.param, self.seed)
    }
}

impl FromStr for CorruptionSpec {
    type Err = Error;

    /// Parses `kind=rotation,param=20,seed=7`; `param` and `seed` default
    /// to 0.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::InvalidCorruption {
            spec: s.to_string(),
            reason,
        };
        let (mut kind, mut param, mut seed) = (None, 0.0, 0u64);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
            match key.trim() {
                "kind" => kind = Some(value.parse::<CorruptionKind>()?),
                "param" => {
                    param = value
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad param {value:?}")))?
                }
                "seed" => {
                    seed = value
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("bad seed {value:?}")))?
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        CorruptionSpec::new(kind.ok_or_else(|| bad("missing kind".into()))?, param, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn glyph() -> GrayImage {
        GrayImage::from_fn(28, 28, |r, c| if (6..22).contains(&r) && (9..19).contains(&c) { 0.9 } else { 0.05 })
    }

    #[test]
    fn parse_and_display_round_trip() {
        let s: CorruptionSpec = "kind=rotation,param=20,seed=7".parse().unwrap();
        assert_eq!(s.kind(), CorruptionKind::Rotation);
        assert_eq!((s.param(), s.seed()), (20.0, 7));
        assert_eq!(s.to_string().parse::<CorruptionSpec>().unwrap(), s);
        assert_eq!("kind=none".parse::<CorruptionSpec>().unwrap(), CorruptionSpec::none());
        assert_eq!(s.label(), "rotation-20");
    }

    #[test]
    fn illegal_parameters_rejected() {
        for bad in [
            "kind=rotation,param=181",
            "kind=gaussian,param=-0.1",
            "kind=salt_pepper,param=1.5",
            "kind=cutout,param=2.5",
            "kind=zoom,param=0",
            "kind=blur,param=1",
            "param=3",
            "kind=zoom;param=2",
        ] {
            assert!(bad.parse::<CorruptionSpec>().is_err(), "{bad}");
        }
        let big = CorruptionSpec::new(CorruptionKind::Cutout, 29.0, 0).unwrap();
        assert!(big.apply(&glyph(), 0).is_err());
    }

    #[test]
    fn identity_cases() {
        let img = glyph();
        assert_eq!(CorruptionSpec::none().apply(&img, 3).unwrap(), img);
        let g0 = CorruptionSpec::new(CorruptionKind::Gaussian, 0.0, 1).unwrap();
        assert_eq!(g0.apply(&img, 3).unwrap(), img);
    }

    #[test]
    fn deterministic_per_index() {
        let img = glyph();
        for spec in ["kind=rotation,param=30,seed=4", "kind=gaussian,param=0.2,seed=4", "kind=cutout,param=6,seed=9"] {
            let s: CorruptionSpec = spec.parse().unwrap();
            assert_eq!(s.apply(&img, 11).unwrap(), s.apply(&img, 11).unwrap());
            assert_ne!(s.apply(&img, 11).unwrap(), s.apply(&img, 12).unwrap());
        }
    }

    #[test]
    fn outputs_stay_in_range() {
        let img = glyph();
        for spec in ["kind=gaussian,param=0.8,seed=1", "kind=salt_pepper,param=0.5,seed=1", "kind=zoom,param=1.7,seed=1"] {
            let out = spec.parse::<CorruptionSpec>().unwrap().apply(&img, 0).unwrap();
            assert!(out.pixels().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn cutout_zeroes_a_full_square() {
        let img = GrayImage::from_fn(28, 28, |_, _| 1.0);
        for i in 0..50 {
            let out = "kind=cutout,param=4,seed=3".parse::<CorruptionSpec>().unwrap().apply(&img, i).unwrap();
            assert_eq!(out.pixels().iter().filter(|&&v| v == 0.0).count(), 16);
        }
    }
}
