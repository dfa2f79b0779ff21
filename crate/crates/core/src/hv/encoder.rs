use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{bundle_unit, check_dim, seeded_rng, Accumulator, Hypervector};
use crate::error::{Error, Result};

/// Which primitive type a role vector tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoleTag {
    OuterHog,
    OuterZernike,
    Holes,
}

/// Seeded role hypervector `r(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleVector {
    pub tag: RoleTag,
    pub seed: u64,
    pub hv: Hypervector,
}

impl RoleVector {
    pub fn new(tag: RoleTag, seed: u64, dim: usize) -> Self {
        RoleVector {
            tag,
            seed,
            hv: Hypervector::from_seed(dim, seed, 0),
        }
    }

    pub fn bind(&self, hv: &Hypervector) -> Result<Hypervector> {
        self.hv.bind(hv)
    }
}

/// Features with a standard deviation below this are left unscaled.
const MIN_SCALE: f64 = 1e-8;

/// Standardised random-hyperplane encoder `sign(W (x - mu) / sigma)`.
///
/// `W` is `D x k` with i.i.d. standard normal entries drawn from the encoder
/// seed, so the seed together with `mu` and `sigma` fully determines it.
#[derive(Debug, Clone)]
pub struct ProjectionEncoder {
    seed: u64,
    mean: Vec<f32>,
    scale: Vec<f32>,
    /// `W^T`, stored `k x D` so batches encode as a single GEMM.
    weights_t: Array2<f32>,
}

impl ProjectionEncoder {
    /// Fits feature statistics on `n x k` training features and draws `W`.
    pub fn fit(features: ArrayView2<'_, f32>, dim: usize, seed: u64) -> Result<Self> {
        let n = features.nrows();
        if n < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                actual: n,
            });
        }
        let k = features.ncols();
        let mut mean = vec![0.0f32; k];
        let mut scale = vec![1.0f32; k];
        for (j, col) in features.axis_iter(Axis(1)).enumerate() {
            let mu = col.iter().map(|&v| v as f64).sum::<f64>() / n as f64;
            let var = col.iter().map(|&v| (v as f64 - mu).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            mean[j] = mu as f32;
            scale[j] = if sd < MIN_SCALE { 1.0 } else { sd as f32 };
        }
        Ok(Self::from_stats(seed, dim, mean, scale))
    }

    /// Rebuilds an encoder from stored statistics; `W` is regenerated from the seed.
    pub fn from_stats(seed: u64, dim: usize, mean: Vec<f32>, scale: Vec<f32>) -> Self {
        let k = mean.len();
        let mut rng = seeded_rng(seed, 0);
        // Row i of W is hyperplane i; draw row-major, store transposed.
        let draws: Vec<f32> = (0..dim * k).map(|_| rng.sample(StandardNormal)).collect();
        let weights = Array2::from_shape_vec((dim, k), draws).expect("shape matches draws");
        let weights_t = weights.reversed_axes().as_standard_layout().into_owned();
        ProjectionEncoder {
            seed,
            mean,
            scale,
            weights_t,
        }
    }

    /// Encoder with an explicit `D x k` projection matrix.
    pub fn from_parts(weights: Array2<f32>, mean: Vec<f32>, scale: Vec<f32>) -> Result<Self> {
        check_dim(weights.ncols(), mean.len())?;
        check_dim(mean.len(), scale.len())?;
        if let Some(&s) = scale.iter().find(|&&s| !(s > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "feature scale must be positive, got {s}"
            )));
        }
        Ok(ProjectionEncoder {
            seed: 0,
            mean,
            scale,
            weights_t: weights.reversed_axes().as_standard_layout().into_owned(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn dim(&self) -> usize {
        self.weights_t.ncols()
    }

    pub fn mean(&self) -> &[f32] {
        &self.mean
    }

    pub fn scale(&self) -> &[f32] {
        &self.scale
    }

    pub fn encode(&self, x: &[f32]) -> Result<Hypervector> {
        let view = ArrayView2::from_shape((1, x.len()), x).expect("row view");
        Ok(self.encode_batch(view)?.pop().expect("one row"))
    }

    /// Encodes each row of an `n x k` feature matrix.
    pub fn encode_batch(&self, x: ArrayView2<'_, f32>) -> Result<Vec<Hypervector>> {
        check_dim(self.input_dim(), x.ncols())?;
        let mut z = x.to_owned();
        for mut row in z.rows_mut() {
            for ((v, &mu), &sd) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - mu) / sd;
            }
        }
        let projected = z.dot(&self.weights_t);
        Ok(projected
            .rows()
            .into_iter()
            .map(|row| Hypervector::from_signs(row.as_slice().expect("standard layout")))
            .collect())
    }
}

/// `Q` ordinal level hypervectors with a monotone flip schedule.
///
/// Level `q` is the base vector with the first `floor(q D / (Q-1))` positions
/// of a seeded permutation flipped, so adjacent levels differ in
/// `floor(D/(Q-1))` or `ceil(D/(Q-1))` positions and the endpoints are
/// antipodal.
#[derive(Debug, Clone)]
pub struct LevelTable {
    seed: u64,
    levels: Vec<Hypervector>,
}

impl LevelTable {
    pub fn new(dim: usize, levels: usize, seed: u64) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidParameter(format!(
                "level table needs at least 2 levels, got {levels}"
            )));
        }
        let base = Hypervector::from_seed(dim, seed, 0);
        let mut order: Vec<usize> = (0..dim).collect();
        order.shuffle(&mut seeded_rng(seed, 1));

        let mut current = base.into_inner();
        let mut flipped = 0usize;
        let mut table = Vec::with_capacity(levels);
        for q in 0..levels {
            let target = q * dim / (levels - 1);
            for &pos in &order[flipped..target] {
                current[pos] = -current[pos];
            }
            flipped = target;
            table.push(Hypervector(current.clone()));
        }
        Ok(LevelTable {
            seed,
            levels: table,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.levels[0].dim()
    }

    pub fn level(&self, q: usize) -> &Hypervector {
        &self.levels[q]
    }

    /// Maps `value` in `[lo, hi]` to the nearest level, clamping outside values.
    pub fn quantize(&self, value: f64, lo: f64, hi: f64) -> usize {
        let top = self.levels.len() - 1;
        if !(hi > lo) || !value.is_finite() {
            return 0;
        }
        let t = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
        ((t * top as f64).round() as usize).min(top)
    }
}

/// Encoder for a variable-size set of hole descriptors.
///
/// Each feature is quantised against bounds fitted on training holes, bound
/// to a per-feature position role, and the `k` bound vectors are bundled
/// into a per-hole vector. Valid holes are then bundled with unit weight.
/// A reserved seeded vector stands in for the empty set.
#[derive(Debug, Clone)]
pub struct HoleSetEncoder {
    seed: u64,
    levels: LevelTable,
    feature_roles: Vec<Hypervector>,
    bounds: Vec<(f32, f32)>,
    no_hole: Hypervector,
}

/// Stream offset that tags the reserved no-hole vector.
const NO_HOLE_STREAM: u64 = 0x4e4f_484f_4c45;

impl HoleSetEncoder {
    /// Fits quantisation bounds on flattened training hole features.
    pub fn fit<F: AsRef<[f32]>>(
        train_holes: &[F],
        dim: usize,
        levels: usize,
        k: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut bounds = vec![(f32::INFINITY, f32::NEG_INFINITY); k];
        for hole in train_holes {
            let hole = hole.as_ref();
            check_dim(k, hole.len())?;
            for (b, &v) in bounds.iter_mut().zip(hole) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        for b in &mut bounds {
            if !b.0.is_finite() || !b.1.is_finite() {
                *b = (0.0, 0.0);
            }
        }
        Self::from_bounds(bounds, dim, levels, seed)
    }

    pub fn from_bounds(bounds: Vec<(f32, f32)>, dim: usize, levels: usize, seed: u64) -> Result<Self> {
        let levels = LevelTable::new(dim, levels, seed)?;
        let mut role_rng = seeded_rng(seed, 2);
        let feature_roles = (0..bounds.len())
            .map(|_| Hypervector::random(dim, &mut role_rng))
            .collect();
        Ok(HoleSetEncoder {
            seed,
            levels,
            feature_roles,
            bounds,
            no_hole: Hypervector::from_seed(dim, seed, NO_HOLE_STREAM),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn feature_len(&self) -> usize {
        self.bounds.len()
    }

    pub fn levels(&self) -> &LevelTable {
        &self.levels
    }

    pub fn feature_role(&self, j: usize) -> &Hypervector {
        &self.feature_roles[j]
    }

    pub fn bounds(&self) -> &[(f32, f32)] {
        &self.bounds
    }

    pub fn no_hole(&self) -> &Hypervector {
        &self.no_hole
    }

    /// Hypervector of a single hole descriptor.
    pub fn encode_hole(&self, features: &[f32]) -> Result<Hypervector> {
        check_dim(self.feature_len(), features.len())?;
        let mut acc = Accumulator::zeros(self.levels.dim());
        for (j, &v) in features.iter().enumerate() {
            let (lo, hi) = self.bounds[j];
            let q = self.levels.quantize(v as f64, lo as f64, hi as f64);
            let bound = self.levels.level(q).bind(&self.feature_roles[j])?;
            acc.add(&bound, 1)?;
        }
        Ok(acc.sign())
    }

    /// Set hypervector of the holes flagged valid in `mask`.
    pub fn encode<F: AsRef<[f32]>>(&self, holes: &[F], mask: &[bool]) -> Result<Hypervector> {
        check_dim(holes.len(), mask.len())?;
        let encoded = holes
            .iter()
            .zip(mask)
            .filter(|(_, &valid)| valid)
            .map(|(h, _)| self.encode_hole(h.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        if encoded.is_empty() {
            return Ok(self.no_hole.clone());
        }
        bundle_unit(&encoded)
    }
}
