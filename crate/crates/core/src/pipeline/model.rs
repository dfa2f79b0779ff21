//! Channel encoders, prototype training and late fusion.

use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureSet;
use super::RunConfig;
use crate::error::{Error, Result};
use crate::hv::{
    argmax, seeded_rng, Channel, HoleSetEncoder, Hypervector, ProjectionEncoder, PrototypeBank, RoleTag, RoleVector,
};

/// Fitted encoders and role vectors of the three channels.
#[derive(Debug, Clone)]
pub struct TopoEncoders {
    pub hog: ProjectionEncoder,
    pub zernike: ProjectionEncoder,
    pub holes: HoleSetEncoder,
    pub role_hog: RoleVector,
    pub role_outer: RoleVector,
    pub role_holes: RoleVector,
}

/// Role-bound hypervectors of one image set, per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelHvs {
    pub hog: Vec<Hypervector>,
    pub zernike: Vec<Hypervector>,
    pub holes: Vec<Hypervector>,
}

impl ChannelHvs {
    pub fn len(&self) -> usize {
        self.hog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hog.is_empty()
    }

    pub fn get(&self, channel: Channel) -> &[Hypervector] {
        match channel {
            Channel::Hog => &self.hog,
            Channel::Zernike => &self.zernike,
            Channel::Holes => &self.holes,
            Channel::Pixel => panic!("pixel channel is not part of the topology model"),
        }
    }
}

fn encode_rows(enc: &ProjectionEncoder, x: ArrayView2<'_, f32>, batch: usize) -> Result<Vec<Hypervector>> {
    let chunks: Vec<_> = x.axis_chunks_iter(Axis(0), batch.max(1)).collect();
    let parts = chunks
        .into_par_iter()
        .map(|c| enc.encode_batch(c))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn bind_all(role: &RoleVector, hvs: Vec<Hypervector>) -> Result<Vec<Hypervector>> {
    hvs.into_par_iter().map(|h| role.bind(&h)).collect()
}

impl TopoEncoders {
    /// Fits feature statistics and quantisation bounds on training features.
    pub fn fit(train: &FeatureSet, config: &RunConfig) -> Result<Self> {
        let hog = ProjectionEncoder::fit(train.hog.view(), config.dim, config.hog_seed)?;
        let zernike = ProjectionEncoder::fit(train.zernike.view(), config.dim, config.zernike_seed)?;
        let holes = HoleSetEncoder::fit(
            &train.valid_holes(),
            config.dim,
            config.levels,
            config.hole_feature_len(),
            config.hole_seed,
        )?;
        Ok(Self::from_parts(hog, zernike, holes, config))
    }

    pub fn from_parts(
        hog: ProjectionEncoder,
        zernike: ProjectionEncoder,
        holes: HoleSetEncoder,
        config: &RunConfig,
    ) -> Self {
        TopoEncoders {
            hog,
            zernike,
            holes,
            role_hog: RoleVector::new(RoleTag::OuterHog, config.role_hog_seed, config.dim),
            role_outer: RoleVector::new(RoleTag::OuterZernike, config.role_outer_seed, config.dim),
            role_holes: RoleVector::new(RoleTag::Holes, config.role_holes_seed, config.dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.hog.dim()
    }

    /// Channel hypervectors of every row of `features`.
    pub fn encode(&self, features: &FeatureSet, batch: usize) -> Result<ChannelHvs> {
        let hog = bind_all(&self.role_hog, encode_rows(&self.hog, features.hog.view(), batch)?)?;
        let zernike = bind_all(&self.role_outer, encode_rows(&self.zernike, features.zernike.view(), batch)?)?;
        let holes = features
            .holes
            .par_iter()
            .zip(&features.hole_masks)
            .map(|(rows, mask)| self.role_holes.bind(&self.holes.encode(rows, mask)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChannelHvs { hog, zernike, holes })
    }
}

/// Sums `hvs` into per-class prototypes, one partial bank per batch.
pub fn train_prototypes(
    channel: Channel,
    hvs: &[Hypervector],
    labels: &[usize],
    classes: usize,
    dim: usize,
    batch: usize,
) -> Result<PrototypeBank> {
    if hvs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: hvs.len(),
            actual: labels.len(),
        });
    }
    let batch = batch.max(1);
    let partials = hvs
        .par_chunks(batch)
        .zip(labels.par_chunks(batch))
        .map(|(hs, ls)| {
            let mut bank = PrototypeBank::new(channel, classes, dim);
            for (h, &l) in hs.iter().zip(ls) {
                bank.accumulate(h, l)?;
            }
            Ok(bank)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut bank = PrototypeBank::new(channel, classes, dim);
    for p in &partials {
        bank.merge(p)?;
    }
    Ok(bank)
}

/// Seeded epoch order shared by every channel.
pub fn epoch_order(n: usize, seed: u64, epoch: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed, epoch as u64));
    order
}

/// OnlineHD epochs over one bank. Returns the number of updates per epoch.
///
/// Samples are visited in seeded-shuffled mini-batches; every update sees
/// the bank as left by the previous sample.
pub fn online_train(
    bank: &mut PrototypeBank,
    hvs: &[Hypervector],
    labels: &[usize],
    epochs: usize,
    eta: i32,
    batch: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if hvs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: hvs.len(),
            actual: labels.len(),
        });
    }
    let mut updates = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let order = epoch_order(hvs.len(), seed, epoch);
        let mut count = 0;
        for chunk in order.chunks(batch.max(1)) {
            for &i in chunk {
                if bank.online_update(&hvs[i], labels[i], eta)? {
                    count += 1;
                }
            }
        }
        updates.push(count);
    }
    Ok(updates)
}

/// Late-fusion weights of the Zernike (`alpha`) and hole (`beta`) channels;
/// HOG has weight 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl FusionWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fusion weights must be non-negative, got ({alpha}, {beta})"
            )));
        }
        Ok(FusionWeights { alpha, beta })
    }
}

/// Cosine scores of `n` samples against `classes` prototypes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub classes: usize,
    pub hog: Vec<f64>,
    pub zernike: Vec<f64>,
    pub holes: Vec<f64>,
}

fn bank_scores(bank: &PrototypeBank, hvs: &[Hypervector]) -> Result<Vec<f64>> {
    let rows = hvs.par_iter().map(|h| bank.scores(h)).collect::<Result<Vec<_>>>()?;
    Ok(rows.concat())
}

impl ScoreTable {
    pub fn compute(banks: &TopoBanks, hvs: &ChannelHvs) -> Result<Self> {
        Ok(ScoreTable {
            classes: banks.hog.classes(),
            hog: bank_scores(&banks.hog, &hvs.hog)?,
            zernike: bank_scores(&banks.zernike, &hvs.zernike)?,
            holes: bank_scores(&banks.holes, &hvs.holes)?,
        })
    }

    pub fn len(&self) -> usize {
        self.hog.len() / self.classes.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fused prediction of sample `i`.
    pub fn predict(&self, i: usize, w: FusionWeights) -> usize {
        let c = self.classes;
        let r = i * c..(i + 1) * c;
        fuse_and_predict(&self.hog[r.clone()], &self.zernike[r.clone()], &self.holes[r], w)
    }

    pub fn predictions(&self, w: FusionWeights) -> Vec<usize> {
        (0..self.len()).map(|i| self.predict(i, w)).collect()
    }

    pub fn accuracy(&self, labels: &[usize], w: FusionWeights) -> f64 {
        accuracy(&self.predictions(w), labels)
    }
}

/// `argmax_c hog[c] + alpha * zernike[c] + beta * holes[c]`, lowest index on ties.
pub fn fuse_and_predict(hog: &[f64], zernike: &[f64], holes: &[f64], w: FusionWeights) -> usize {
    let fused: Vec<f64> = hog
        .iter()
        .zip(zernike)
        .zip(holes)
        .map(|((&h, &z), &o)| h + w.alpha * z + w.beta * o)
        .collect();
    argmax(&fused)
}

pub fn accuracy(predicted: &[usize], labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}

/// Result of the exhaustive fusion search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearch {
    pub weights: FusionWeights,
    pub accuracy: f64,
    /// Validation accuracy of every cell, indexed `[alpha][beta]`.
    pub table: Vec<Vec<f64>>,
}

/// Best `(alpha, beta)` over `grid x grid`; ties go to the smallest
/// `alpha + beta`, then the smallest `alpha`.
pub fn grid_search_weights(scores: &ScoreTable, labels: &[usize], grid: &[f64]) -> Result<GridSearch> {
    if scores.is_empty() || labels.is_empty() {
        return Err(Error::EmptyValidation);
    }
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] < 0.0 {
        return Err(Error::InvalidParameter("fusion grid must be non-negative and increasing".into()));
    }
    let table: Vec<Vec<f64>> = grid
        .iter()
        .map(|&a| grid.iter().map(|&b| scores.accuracy(labels, FusionWeights { alpha: a, beta: b })).collect())
        .collect();
    // sums within this of each other count as equal (0.1 + 0.2 vs 0.3)
    const SUM_EPS: f64 = 1e-9;
    let mut best = (0usize, 0usize);
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let (bi, bj) = best;
            let (s, bs) = (grid[i] + grid[j], grid[bi] + grid[bj]);
            let better = table[i][j] > table[bi][bj]
                || (table[i][j] == table[bi][bj]
                    && (s < bs - SUM_EPS || ((s - bs).abs() <= SUM_EPS && i < bi)));
            if better {
                best = (i, j);
            }
        }
    }
    Ok(GridSearch {
        weights: FusionWeights {
            alpha: grid[best.0],
            beta: grid[best.1],
        },
        accuracy: table[best.0][best.1],
        table,
    })
}

/// The three channel banks of the topology model.
#[derive(Debug, Clone, PartialEq)]
pub struct TopoBanks {
    pub hog: PrototypeBank,
    pub zernike: PrototypeBank,
    pub holes: PrototypeBank,
}

impl TopoBanks {
    pub fn train(hvs: &ChannelHvs, labels: &[usize], classes: usize, dim: usize, batch: usize) -> Result<Self> {
        Ok(TopoBanks {
            hog: train_prototypes(Channel::Hog, &hvs.hog, labels, classes, dim, batch)?,
            zernike: train_prototypes(Channel::Zernike, &hvs.zernike, labels, classes, dim, batch)?,
            holes: train_prototypes(Channel::Holes, &hvs.holes, labels, classes, dim, batch)?,
        })
    }

    /// Online training of each channel against its own predictions.
    /// Returns per-channel update counts per epoch.
    pub fn online_train(
        &mut self,
        hvs: &ChannelHvs,
        labels: &[usize],
        config: &RunConfig,
    ) -> Result<OnlineStats> {
        let run = |bank: &mut PrototypeBank, h: &[Hypervector]| {
            online_train(bank, h, labels, config.epochs, config.eta, config.batch, config.shuffle_seed)
        };
        let (hog, (zernike, holes)) = rayon::join(
            || run(&mut self.hog, &hvs.hog),
            || rayon::join(|| run(&mut self.zernike, &hvs.zernike), || run(&mut self.holes, &hvs.holes)),
        );
        Ok(OnlineStats {
            hog: hog?,
            zernike: zernike?,
            holes: holes?,
        })
    }

    pub fn banks(&self) -> [&PrototypeBank; 3] {
        [&self.hog, &self.zernike, &self.holes]
    }
}

/// Update counts per epoch for each channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineStats {
    pub hog: Vec<usize>,
    pub zernike: Vec<usize>,
    pub holes: Vec<usize>,
}
