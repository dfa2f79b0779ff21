mod common;

use common::{oracle_hole_count, random_contour, random_mask, similarity};
use proptest::prelude::*;
use rand::Rng;
use topohdc::dataset::{make_synthetic, Pose, SyntheticShape};
use topohdc::hv::seeded_rng;
use topohdc::topology::{
    canonical_frame, extract_primitives, Contour, DEFAULT_SIGNATURE_LEN, fourier_magnitudes, primitives_of_mask, radial_signature, TopologyConfig,
};
use topohdc::BinaryMask;

#[test]
fn hole_fixtures() {
    let cfg = TopologyConfig::default();
    let pose = Pose::default();
    let cases = [
        (SyntheticShape::Disk { radius: 20.0 }, 0),
        (SyntheticShape::Annulus { inner: 8.0, outer: 20.0 }, 1),
        (SyntheticShape::DoubleAnnulus { outer: 14.0, inner: 6.0, offset: 10.0 }, 2),
    ];
    for (shape, holes) in cases {
        let img = make_synthetic(&shape, &pose, 64).unwrap();
        let p = extract_primitives(&img, &cfg).unwrap();
        assert_eq!(p.hole_count, holes, "{shape:?}");
        assert_eq!(p.holes.len(), holes);
    }
}

#[test]
fn hole_counts_match_flood_fill_on_random_masks() {
    let cfg = TopologyConfig::default();
    let mut rng = seeded_rng(2024, 0);
    for _ in 0..300 {
        let m = random_mask(&mut rng, 24);
        let p = primitives_of_mask(&m, &cfg).unwrap();
        assert_eq!(p.hole_count, oracle_hole_count(&m, cfg.min_hole));
    }
}

#[test]
fn oracle_sanity() {
    let ring = BinaryMask::from_ascii(&["#####", "#...#", "#.#.#", "#...#", "#####"]);
    assert_eq!(oracle_hole_count(&ring, 1), 1);
    let open = BinaryMask::from_ascii(&["#####", "#...#", "#....", "#...#", "#####"]);
    assert_eq!(oracle_hole_count(&open, 1), 0);
    // diagonal gap: 4-connected background stays enclosed
    let diag = BinaryMask::from_ascii(&[".#.", "#.#", ".#."]);
    assert_eq!(oracle_hole_count(&diag, 1), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flood_fill_oracle_property(seed in any::<u64>(), n in 10usize..32) {
        let mut rng = seeded_rng(seed, 1);
        let m = random_mask(&mut rng, n);
        let cfg = TopologyConfig::default();
        let p = primitives_of_mask(&m, &cfg).unwrap();
        prop_assert_eq!(p.hole_count, oracle_hole_count(&m, cfg.min_hole));
    }

    #[test]
    fn fourier_descriptor_is_similarity_invariant(
        seed in any::<u64>(),
        angle in 0.0f64..std::f64::consts::TAU,
        scale in 0.3f64..3.0,
        ty in -100.0f64..100.0,
        tx in -100.0f64..100.0,
    ) {
        let mut rng = seeded_rng(seed, 2);
        let c = random_contour(&mut rng, 12);
        let moved = c.map(|p| similarity(p, angle, scale, [ty, tx])).unwrap();
        let a = fourier_magnitudes(&radial_signature(&c, DEFAULT_SIGNATURE_LEN).unwrap(), 12).unwrap();
        let b = fourier_magnitudes(&radial_signature(&moved, DEFAULT_SIGNATURE_LEN).unwrap(), 12).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 0.02 * x.abs(), "{} vs {}", x, y);
        }
    }

    #[test]
    fn canonical_coordinates_follow_the_shape(
        seed in any::<u64>(),
        angle in -1.0f64..1.0,
        scale in 0.5f64..2.0,
        ty in -50.0f64..50.0,
        tx in -50.0f64..50.0,
    ) {
        // jittered long right triangle, densified along its edges
        let mut rng = seeded_rng(seed, 3);
        let base: [[f64; 2]; 3] = [[0.0, 0.0], [0.0, 40.0], [14.0, 0.0]];
        let corners: Vec<[f64; 2]> =
            base.iter().map(|p| [p[0] + rng.random_range(-1.0..1.0), p[1] + rng.random_range(-1.0..1.0)]).collect();
        let pts = (0..30)
            .map(|i| {
                let (a, b) = (corners[i / 10], corners[(i / 10 + 1) % 3]);
                let f = (i % 10) as f64 / 10.0;
                [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
            })
            .collect();
        let c = Contour::new(pts).unwrap();
        let f0 = canonical_frame(&c);
        prop_assert!(f0.eigen_gap > 0.05 && f0.skewness.abs() > 0.05);
        let moved = c.map(|p| similarity(p, angle, scale, [ty, tx])).unwrap();
        let f1 = canonical_frame(&moved);
        for (p, q) in c.points().iter().zip(moved.points()).step_by(7) {
            let (a, b) = (f0.canon(*p), f1.canon(*q));
            let err = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            prop_assert!(err <= 0.02 * (a[0].hypot(a[1])).max(1.0), "{:?} vs {:?}", a, b);
        }
    }
}
