use serde::{Deserialize, Serialize};

use super::{add_scaled, check_dim, cosine_from_parts, signed_dot, Accumulator, Hypervector};
use crate::error::{Error, Result};

/// Feature channel a bank belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    Hog,
    Zernike,
    Holes,
    /// Naive pixel encoding.
    Pixel,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Hog => "hog",
            Channel::Zernike => "zernike",
            Channel::Holes => "holes",
            Channel::Pixel => "pixel",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Channel::Hog => 0,
            Channel::Zernike => 1,
            Channel::Holes => 2,
            Channel::Pixel => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => Channel::Hog,
            1 => Channel::Zernike,
            2 => Channel::Holes,
            3 => Channel::Pixel,
            _ => return None,
        })
    }
}

/// Per-class integer prototypes for one channel.
///
/// Squared norms are cached and updated exactly alongside the accumulators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrototypeBank {
    channel: Channel,
    dim: usize,
    classes: usize,
    counts: Vec<i32>,
    norms_sq: Vec<i64>,
}

impl PrototypeBank {
    pub fn new(channel: Channel, classes: usize, dim: usize) -> Self {
        PrototypeBank {
            channel,
            dim,
            classes,
            counts: vec![0; classes * dim],
            norms_sq: vec![0; classes],
        }
    }

    pub fn from_prototypes(channel: Channel, prototypes: Vec<Accumulator>) -> Result<Self> {
        let classes = prototypes.len();
        let dim = prototypes.first().map_or(0, Accumulator::dim);
        let mut counts = Vec::with_capacity(classes * dim);
        let mut norms_sq = Vec::with_capacity(classes);
        for p in &prototypes {
            check_dim(dim, p.dim())?;
            counts.extend_from_slice(p.counts());
            norms_sq.push(p.norm_squared());
        }
        Ok(PrototypeBank {
            channel,
            dim,
            classes,
            counts,
            norms_sq,
        })
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prototype(&self, class: usize) -> &[i32] {
        &self.counts[class * self.dim..(class + 1) * self.dim]
    }

    pub fn to_accumulator(&self, class: usize) -> Accumulator {
        Accumulator::from_counts(self.prototype(class).to_vec())
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.classes {
            return Err(Error::ClassOutOfRange {
                class,
                classes: self.classes,
            });
        }
        Ok(())
    }

    /// `P[class] += scale * hv`.
    fn add(&mut self, hv: &Hypervector, class: usize, scale: i32) {
        let dot = signed_dot(self.prototype(class), hv.as_slice());
        self.add_with_dot(hv, class, scale, dot);
    }

    fn add_with_dot(&mut self, hv: &Hypervector, class: usize, scale: i32, dot: i64) {
        let s = scale as i64;
        self.norms_sq[class] += 2 * s * dot + s * s * self.dim as i64;
        let dim = self.dim;
        add_scaled(
            &mut self.counts[class * dim..(class + 1) * dim],
            hv.as_slice(),
            scale,
        );
    }

    /// Bundles one training sample into its class prototype.
    pub fn accumulate(&mut self, hv: &Hypervector, class: usize) -> Result<()> {
        self.check_class(class)?;
        check_dim(self.dim, hv.dim())?;
        self.add(hv, class, 1);
        Ok(())
    }

    /// Adds another bank elementwise (merging per-worker partial banks).
    pub fn merge(&mut self, other: &PrototypeBank) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        check_dim(self.classes, other.classes)?;
        for (a, &b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for c in 0..self.classes {
            self.norms_sq[c] = self
                .prototype(c)
                .iter()
                .map(|&v| v as i64 * v as i64)
                .sum();
        }
        Ok(())
    }

    fn dots(&self, hv: &Hypervector) -> Vec<i64> {
        (0..self.classes)
            .map(|c| signed_dot(self.prototype(c), hv.as_slice()))
            .collect()
    }

    /// Cosine score of `hv` against every class prototype.
    pub fn scores(&self, hv: &Hypervector) -> Result<Vec<f64>> {
        check_dim(self.dim, hv.dim())?;
        Ok(self
            .dots(hv)
            .into_iter()
            .zip(&self.norms_sq)
            .map(|(dot, &n)| cosine_from_parts(dot, self.dim, n))
            .collect())
    }

    pub fn predict(&self, hv: &Hypervector) -> Result<usize> {
        Ok(argmax(&self.scores(hv)?))
    }

    /// OnlineHD correction. Returns `true` when the bank changed.
    ///
    /// If the argmax class differs from `label`, adds `eta * hv` to the true
    /// prototype and subtracts it from the predicted one.
    pub fn online_update(&mut self, hv: &Hypervector, label: usize, eta: i32) -> Result<bool> {
        self.check_class(label)?;
        check_dim(self.dim, hv.dim())?;
        let dots = self.dots(hv);
        let scores: Vec<f64> = dots
            .iter()
            .zip(&self.norms_sq)
            .map(|(&dot, &n)| cosine_from_parts(dot, self.dim, n))
            .collect();
        let predicted = argmax(&scores);
        if predicted == label {
            return Ok(false);
        }
        self.add_with_dot(hv, label, eta, dots[label]);
        self.add_with_dot(hv, predicted, -eta, dots[predicted]);
        Ok(true)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
