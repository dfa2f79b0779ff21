//! Class-stratified train/validation split.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::hv::seeded_rng;

/// Sorted `(train, validation)` index lists.
///
/// Each class contributes `round(fraction * n_c)` samples to validation,
/// clamped so that at least one stays in training.
pub fn stratified_split(
    labels: &[usize],
    classes: usize,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "validation fraction must be in [0, 1), got {fraction}"
        )));
    }
    let mut by_class = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::ClassOutOfRange { class: l, classes });
        }
        by_class[l].push(i);
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (class, mut idx) in by_class.into_iter().enumerate() {
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count: idx.len(),
            });
        }
        idx.shuffle(&mut seeded_rng(seed, class as u64));
        let n_val = ((fraction * idx.len() as f64).round() as usize).min(idx.len() - 1);
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    if val.is_empty() {
        return Err(Error::EmptyValidation);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}
