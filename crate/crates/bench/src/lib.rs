//! Fixtures for the criterion benchmarks in `benches/`.

use topohdc::dataset::{make_synthetic, Pose, SyntheticShape};
use topohdc::GrayImage;

/// A rotated two-hole glyph on the 28 x 28 canvas.
pub fn glyph() -> GrayImage {
    let shape = SyntheticShape::DoubleAnnulus { outer: 6.0, inner: 2.5, offset: 4.5 };
    make_synthetic(&shape, &Pose { angle: 17.0, ..Pose::default() }, 28).expect("fits the canvas")
}
