//! Bipolar hypervector algebra.
//!
//! Hypervectors are dense `{-1,+1}^D` vectors stored one `i8` per component.
//! Binding is the elementwise product, bundling is the sign of a (weighted)
//! sum with zero ties resolved to `+1`, and class prototypes are integer
//! accumulators compared by cosine similarity.

mod encoder;
mod prototype;

pub use encoder::{HoleSetEncoder, LevelTable, ProjectionEncoder, RoleTag, RoleVector};
pub use prototype::{argmax, Channel, PrototypeBank};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default hypervector dimension.
pub const DEFAULT_DIM: usize = 10_000;

/// Stabiliser in the cosine denominator.
pub const COSINE_EPS: f64 = 1e-8;

/// Deterministic generator for a `(seed, stream)` pair.
///
/// All randomness in the crate flows through this so that runs are
/// reproducible independently of thread scheduling.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Dense bipolar hypervector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypervector(Vec<i8>);

impl Hypervector {
    /// Uniformly random hypervector.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut bits = Vec::with_capacity(dim);
        while bits.len() < dim {
            let word: u64 = rng.random();
            let take = (dim - bits.len()).min(64);
            bits.extend((0..take).map(|b| if (word >> b) & 1 == 1 { 1 } else { -1 }));
        }
        Hypervector(bits)
    }

    pub fn from_seed(dim: usize, seed: u64, stream: u64) -> Self {
        Self::random(dim, &mut seeded_rng(seed, stream))
    }

    /// The all-ones vector, identity element of binding.
    pub fn ones(dim: usize) -> Self {
        Hypervector(vec![1; dim])
    }

    /// Validates that every component is exactly `-1` or `+1`.
    pub fn from_bipolar(values: Vec<i8>) -> Result<Self> {
        if let Some((index, &v)) = values.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::NotBipolar {
                index,
                value: v as i64,
            });
        }
        Ok(Hypervector(values))
    }

    /// Sign of each component; zero maps to `+1`.
    pub fn from_signs<T: Copy + Into<f64>>(values: &[T]) -> Self {
        Hypervector(values.iter().map(|&v| sign(v.into())).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }

    pub fn bind(&self, other: &Hypervector) -> Result<Hypervector> {
        bind(self, other)
    }

    /// Inner product with another hypervector.
    pub fn dot(&self, other: &Hypervector) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a * b) as i64)
            .sum()
    }

    /// Cosine similarity between two hypervectors (exact, both norms are `sqrt(D)`).
    pub fn similarity(&self, other: &Hypervector) -> f64 {
        self.dot(other) as f64 / self.dim() as f64
    }

    /// Number of differing components.
    pub fn hamming(&self, other: &Hypervector) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    pub fn negated(&self) -> Hypervector {
        Hypervector(self.0.iter().map(|&v| -v).collect())
    }
}

#[inline]
fn sign(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Elementwise product. Self-inverse: `bind(bind(a, b), b) == a`.
pub fn bind(a: &Hypervector, b: &Hypervector) -> Result<Hypervector> {
    check_dim(a.dim(), b.dim())?;
    Ok(Hypervector(
        a.0.iter().zip(&b.0).map(|(&x, &y)| x * y).collect(),
    ))
}

/// Weighted bundling: `sign(sum w_i h_i)` with zero ties broken to `+1`.
pub fn bundle(items: &[(&Hypervector, f64)]) -> Result<Hypervector> {
    let (first, _) = items.first().ok_or(Error::EmptyBundle)?;
    let dim = first.dim();
    let mut any_positive = false;
    for (hv, w) in items {
        check_dim(dim, hv.dim())?;
        if !w.is_finite() || *w < 0.0 {
            return Err(Error::InvalidWeight(*w));
        }
        any_positive |= *w > 0.0;
    }
    if !any_positive {
        return Err(Error::ZeroWeights);
    }
    let mut sum = vec![0.0f64; dim];
    for (hv, w) in items {
        for (s, &v) in sum.iter_mut().zip(hv.as_slice()) {
            *s += w * v as f64;
        }
    }
    Ok(Hypervector::from_signs(&sum))
}

/// Unit-weight bundling on the exact integer path.
pub fn bundle_unit<'a, I>(items: I) -> Result<Hypervector>
where
    I: IntoIterator<Item = &'a Hypervector>,
{
    let mut iter = items.into_iter();
    let first = iter.next().ok_or(Error::EmptyBundle)?;
    let mut acc = Accumulator::zeros(first.dim());
    acc.add(first, 1)?;
    for hv in iter {
        acc.add(hv, 1)?;
    }
    Ok(acc.sign())
}

/// Integer accumulator in `Z^D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Accumulator(Vec<i32>);

impl Accumulator {
    pub fn zeros(dim: usize) -> Self {
        Accumulator(vec![0; dim])
    }

    pub fn from_counts(counts: Vec<i32>) -> Self {
        Accumulator(counts)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn counts(&self) -> &[i32] {
        &self.0
    }

    /// `self += scale * hv`.
    pub fn add(&mut self, hv: &Hypervector, scale: i32) -> Result<()> {
        check_dim(self.dim(), hv.dim())?;
        add_scaled(&mut self.0, hv.as_slice(), scale);
        Ok(())
    }

    pub fn dot(&self, hv: &Hypervector) -> i64 {
        signed_dot(&self.0, hv.as_slice())
    }

    pub fn norm_squared(&self) -> i64 {
        self.0.iter().map(|&v| v as i64 * v as i64).sum()
    }

    pub fn sign(&self) -> Hypervector {
        Hypervector(self.0.iter().map(|&v| if v < 0 { -1 } else { 1 }).collect())
    }
}

/// `<h, p> / (||h|| ||p|| + eps)`.
pub fn cosine(h: &Hypervector, p: &Accumulator) -> Result<f64> {
    check_dim(h.dim(), p.dim())?;
    Ok(cosine_from_parts(p.dot(h), h.dim(), p.norm_squared()))
}

#[inline]
pub(crate) fn cosine_from_parts(dot: i64, dim: usize, norm_sq: i64) -> f64 {
    dot as f64 / ((dim as f64).sqrt() * (norm_sq as f64).sqrt() + COSINE_EPS)
}

// The two kernels below are the hot loops of training and scoring. They are
// written as branch-free selects so they vectorise without SSE4.1.

#[inline]
pub(crate) fn signed_dot(acc: &[i32], hv: &[i8]) -> i64 {
    acc.iter()
        .zip(hv)
        .map(|(&p, &s)| {
            let mask = (s as i32) >> 31;
            ((p ^ mask) - mask) as i64
        })
        .sum()
}

#[inline]
pub(crate) fn add_scaled(acc: &mut [i32], hv: &[i8], scale: i32) {
    for (a, &s) in acc.iter_mut().zip(hv) {
        *a += s as i32 * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn hv(v: &[i8]) -> Hypervector {
        Hypervector::from_bipolar(v.to_vec()).unwrap()
    }

    #[test]
    fn bind_examples() {
        let v = Hypervector::from_seed(64, 1, 0);
        assert_eq!(bind(&v, &Hypervector::ones(64)).unwrap(), v);
        assert_eq!(bind(&v, &v).unwrap(), Hypervector::ones(64));
        assert_eq!(
            bind(&hv(&[1, -1, 1]), &hv(&[-1, -1, 1])).unwrap(),
            hv(&[-1, 1, 1])
        );
    }

    #[test]
    fn bind_dimension_mismatch() {
        let err = bind(&Hypervector::ones(3), &Hypervector::ones(4)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn bundle_examples() {
        let v = Hypervector::from_seed(100, 3, 0);
        assert_eq!(bundle(&[(&v, 1.0)]).unwrap(), v);
        let a = hv(&[1, -1]);
        let b = hv(&[-1, -1]);
        assert_eq!(bundle(&[(&a, 1.0), (&b, 1.0)]).unwrap(), hv(&[1, -1]));
        assert_eq!(bundle_unit([&a, &b]).unwrap(), hv(&[1, -1]));
    }

    #[test]
    fn bundle_errors() {
        assert!(matches!(bundle(&[]), Err(Error::EmptyBundle)));
        let a = hv(&[1, -1]);
        assert!(matches!(
            bundle(&[(&a, 0.0), (&a, 0.0)]),
            Err(Error::ZeroWeights)
        ));
        assert!(matches!(
            bundle(&[(&a, -1.0)]),
            Err(Error::InvalidWeight(_))
        ));
    }

    #[test]
    fn from_bipolar_rejects_zero() {
        assert!(matches!(
            Hypervector::from_bipolar(vec![1, 0, -1]),
            Err(Error::NotBipolar { index: 1, value: 0 })
        ));
    }

    #[test]
    fn cosine_examples() {
        let h = Hypervector::from_seed(1000, 5, 0);
        let p = Accumulator::from_counts(h.as_slice().iter().map(|&v| v as i32).collect());
        assert!((cosine(&h, &p).unwrap() - 1.0).abs() < 1e-6);
        let n = Accumulator::from_counts(h.as_slice().iter().map(|&v| -(v as i32)).collect());
        assert!((cosine(&h, &n).unwrap() + 1.0).abs() < 1e-6);
        assert_eq!(cosine(&h, &Accumulator::zeros(1000)).unwrap(), 0.0);
    }

    #[test]
    fn signed_dot_matches_naive() {
        let h = Hypervector::from_seed(5000, 9, 0);
        let mut rng = seeded_rng(10, 0);
        let acc: Vec<i32> = (0..5000).map(|_| rng.random_range(-1000..1000)).collect();
        let naive: i64 = acc
            .iter()
            .zip(h.as_slice())
            .map(|(&a, &s)| a as i64 * s as i64)
            .sum();
        assert_eq!(signed_dot(&acc, h.as_slice()), naive);
    }

    proptest! {
        #[test]
        fn bind_is_self_inverse_and_commutative(seed_a in any::<u64>(), seed_b in any::<u64>(), big in any::<bool>()) {
            let dim = if big { 10_000 } else { 64 };
            let a = Hypervector::from_seed(dim, seed_a, 0);
            let b = Hypervector::from_seed(dim, seed_b, 1);
            let ab = bind(&a, &b).unwrap();
            prop_assert_eq!(&bind(&ab, &b).unwrap(), &a);
            prop_assert_eq!(&ab, &bind(&b, &a).unwrap());
            prop_assert!(ab.as_slice().iter().all(|&v| v == 1 || v == -1));
        }

        #[test]
        fn bundle_is_permutation_invariant(seed in any::<u64>(), n in 1usize..12, shift in 0usize..12) {
            let items: Vec<Hypervector> = (0..n).map(|i| Hypervector::from_seed(257, seed, i as u64)).collect();
            let weights: Vec<f64> = (0..n).map(|i| 0.25 + (i % 4) as f64 * 0.5).collect();
            let forward: Vec<(&Hypervector, f64)> = items.iter().zip(weights.iter().copied()).collect();
            let mut rotated = forward.clone();
            rotated.rotate_left(shift % n);
            rotated.reverse();
            prop_assert_eq!(bundle(&forward).unwrap(), bundle(&rotated).unwrap());
        }

        #[test]
        fn accumulator_bounded_by_count(seed in any::<u64>(), n in 1usize..20) {
            let mut acc = Accumulator::zeros(128);
            for i in 0..n {
                acc.add(&Hypervector::from_seed(128, seed, i as u64), 1).unwrap();
            }
            prop_assert!(acc.counts().iter().all(|&c| c.unsigned_abs() as usize <= n));
        }
    }
}
