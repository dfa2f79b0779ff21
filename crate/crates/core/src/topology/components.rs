//! Thresholding and connected-component analysis.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};

/// Pixel adjacency used when labelling components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Connectivity::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        }
    }
}

const BINS: usize = 256;

fn bin_of(v: f32) -> usize {
    ((v as f64 * (BINS - 1) as f64).round() as usize).min(BINS - 1)
}

/// Otsu threshold as a histogram bin index; `None` for a single-valued image.
pub fn otsu_bin(img: &GrayImage) -> Option<usize> {
    let mut hist = [0u64; BINS];
    for &v in img.pixels() {
        hist[bin_of(v)] += 1;
    }
    let total = img.pixels().len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &h)| i as f64 * h as f64).sum();

    let mut best: Option<(usize, f64)> = None;
    let mut weight_bg = 0.0;
    let mut sum_bg = 0.0;
    for (t, &h) in hist.iter().enumerate().take(BINS - 1) {
        weight_bg += h as f64;
        sum_bg += t as f64 * h as f64;
        let weight_fg = total - weight_bg;
        if weight_bg == 0.0 || weight_fg == 0.0 {
            continue;
        }
        let mean_bg = sum_bg / weight_bg;
        let mean_fg = (sum_all - sum_bg) / weight_fg;
        let between = weight_bg * weight_fg * (mean_bg - mean_fg).powi(2);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((t, between));
        }
    }
    best.map(|(t, _)| t)
}

/// Global Otsu binarisation; pixels strictly above the threshold are foreground.
pub fn binarize(img: &GrayImage) -> BinaryMask {
    let data = match otsu_bin(img) {
        Some(t) => img.pixels().iter().map(|&v| bin_of(v) > t).collect(),
        None => vec![false; img.pixels().len()],
    };
    BinaryMask::from_vec(img.height(), img.width(), data).expect("same shape")
}

/// Connected-component labelling result.
#[derive(Debug, Clone)]
pub struct Components {
    /// `0` for unlabelled pixels, `1..=n` otherwise, assigned in row-major
    /// order of each component's first pixel.
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
    pub touches_border: Vec<bool>,
    height: usize,
    width: usize,
}

impl Components {
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Mask of component `index` (0-based).
    pub fn mask(&self, index: usize) -> BinaryMask {
        let label = index as u32 + 1;
        BinaryMask::from_vec(
            self.height,
            self.width,
            self.labels.iter().map(|&l| l == label).collect(),
        )
        .expect("same shape")
    }
}

/// Labels the `true` pixels of `mask`.
pub fn label(mask: &BinaryMask, connectivity: Connectivity) -> Components {
    let (h, w) = (mask.height(), mask.width());
    let mut labels = vec![0u32; h * w];
    let mut sizes = Vec::new();
    let mut touches_border = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..h * w {
        if !mask.data()[start] || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        labels[start] = id;
        queue.push_back(start);
        let mut size = 0;
        let mut border = false;
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let (r, c) = ((idx / w) as isize, (idx % w) as isize);
            border |= r == 0 || c == 0 || r == h as isize - 1 || c == w as isize - 1;
            for &(dr, dc) in connectivity.offsets() {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize {
                    continue;
                }
                let n = nr as usize * w + nc as usize;
                if mask.data()[n] && labels[n] == 0 {
                    labels[n] = id;
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
        touches_border.push(border);
    }
    Components {
        labels,
        sizes,
        touches_border,
        height: h,
        width: w,
    }
}

/// Drops 8-connected foreground components smaller than `min_size` pixels.
pub fn remove_small_components(mask: &BinaryMask, min_size: usize) -> BinaryMask {
    let comps = label(mask, Connectivity::Eight);
    let data = comps
        .labels
        .iter()
        .map(|&l| l != 0 && comps.sizes[l as usize - 1] >= min_size)
        .collect();
    BinaryMask::from_vec(mask.height(), mask.width(), data).expect("same shape")
}

/// Largest 8-connected foreground component; ties go to the component whose
/// first pixel comes first in row-major order.
pub fn largest_component(mask: &BinaryMask) -> Result<BinaryMask> {
    let comps = label(mask, Connectivity::Eight);
    let mut best: Option<usize> = None;
    for (i, &size) in comps.sizes.iter().enumerate() {
        if best.is_none_or(|b| size > comps.sizes[b]) {
            best = Some(i);
        }
    }
    best.map(|i| comps.mask(i)).ok_or(Error::EmptyShape)
}

/// Background 4-components that do not touch the image border, largest first.
pub fn find_holes(shape: &BinaryMask) -> Vec<BinaryMask> {
    let comps = label(&shape.inverted(), Connectivity::Four);
    let mut enclosed: Vec<usize> = (0..comps.len())
        .filter(|&i| !comps.touches_border[i])
        .collect();
    // stable: equal sizes keep row-major order of their first pixel
    enclosed.sort_by(|&a, &b| comps.sizes[b].cmp(&comps.sizes[a]));
    enclosed.into_iter().map(|i| comps.mask(i)).collect()
}

/// The shape with every enclosed background region filled in.
pub fn fill_holes(shape: &BinaryMask) -> BinaryMask {
    let comps = label(&shape.inverted(), Connectivity::Four);
    let data = shape
        .data()
        .iter()
        .zip(&comps.labels)
        .map(|(&fg, &l)| fg || (l != 0 && !comps.touches_border[l as usize - 1]))
        .collect();
    BinaryMask::from_vec(shape.height(), shape.width(), data).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_constant_is_background() {
        let img = GrayImage::new(6, 6);
        assert!(binarize(&img).is_empty());
        let img = GrayImage::from_fn(4, 4, |_, _| 0.7);
        assert!(binarize(&img).is_empty());
    }

    #[test]
    fn binarize_two_levels() {
        let img = GrayImage::from_fn(8, 8, |r, c| if (r * 3 + c) % 5 == 0 { 0.9 } else { 0.1 });
        let mask = binarize(&img);
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(mask.get(r, c), img.get(r, c) > 0.5);
            }
        }
    }

    #[test]
    fn largest_component_examples() {
        let single = BinaryMask::from_ascii(&["....", ".##.", ".##.", "...."]);
        assert_eq!(largest_component(&single).unwrap(), single);

        let two = BinaryMask::from_ascii(&["##...", "##.#.", "#..#.", "...#."]);
        let kept = largest_component(&two).unwrap();
        assert_eq!(kept.count(), 5);
        assert!(kept.get(0, 0) && !kept.get(1, 3));

        let tie = BinaryMask::from_ascii(&["...##", ".....", "##..."]);
        let kept = largest_component(&tie).unwrap();
        assert!(kept.get(0, 3) && !kept.get(2, 0));

        assert!(matches!(
            largest_component(&BinaryMask::new(3, 3)),
            Err(Error::EmptyShape)
        ));
    }

    #[test]
    fn diagonal_pixels_are_one_component() {
        let diag = BinaryMask::from_ascii(&["#..", ".#.", "..#"]);
        assert_eq!(largest_component(&diag).unwrap().count(), 3);
        assert_eq!(label(&diag, Connectivity::Four).len(), 3);
    }

    #[test]
    fn holes_of_simple_masks() {
        let filled = BinaryMask::from_ascii(&[".....", ".###.", ".###.", ".###.", "....."]);
        assert!(find_holes(&filled).is_empty());

        let ring = BinaryMask::from_ascii(&[".....", ".###.", ".#.#.", ".###.", "....."]);
        let holes = find_holes(&ring);
        assert_eq!(holes.len(), 1);
        assert!(holes[0].get(2, 2));
        assert_eq!(fill_holes(&ring), filled);

        // a diagonal gap does not open a 4-connected background path
        let leaky = BinaryMask::from_ascii(&[".....", ".##..", ".#.#.", "..##.", "....."]);
        assert_eq!(find_holes(&leaky).len(), 1);
    }

    #[test]
    fn holes_sorted_largest_first() {
        let m = BinaryMask::from_ascii(&[
            "#######",
            "#.##..#",
            "####..#",
            "#######",
        ]);
        let holes = find_holes(&m);
        assert_eq!(holes.iter().map(|h| h.count()).collect::<Vec<_>>(), vec![4, 1]);
    }

    #[test]
    fn small_components_removed() {
        let m = BinaryMask::from_ascii(&["#....", ".....", "..###", "....."]);
        let cleaned = remove_small_components(&m, 3);
        assert_eq!(cleaned.count(), 3);
        assert!(!cleaned.get(0, 0));
    }
}
