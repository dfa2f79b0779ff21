//! Debug dumps of extracted primitives and feature vectors.
//!
//! `primitives.jsonl` holds one JSON object per image. `features.f32` holds
//! one little-endian f32 row per image (HOG, SPZ, hole rows, hole flags as
//! 0/1), described by `features.json`.

use std::io::{BufWriter, Write};
use std::path::Path;

use byteorder::{LittleEndian, WriteBytesExt};
use rayon::prelude::*;
use serde::Serialize;

use super::features::FeatureExtractor;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::topology::{CanonicalFrame, HoleDescriptor};

/// One line of `primitives.jsonl`.
#[derive(Debug, Clone, Serialize)]
pub struct FeatureRecord {
    pub index: usize,
    pub label: usize,
    pub empty: bool,
    pub hole_count: usize,
    pub outer_points: usize,
    pub outer_perimeter: f64,
    pub frame: CanonicalFrame,
    pub holes: Vec<HoleDescriptor>,
}

#[derive(Serialize)]
struct Sidecar {
    rows: usize,
    row_len: usize,
    dtype: &'static str,
    layout: Vec<(&'static str, usize)>,
    labels: Vec<usize>,
}

/// Writes the three dump files into `dir`.
pub fn write_feature_dump(fx: &FeatureExtractor, data: &LabeledDataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let analysed = data
        .images()
        .par_iter()
        .map(|img| fx.analyse(img).map(|(p, _, f)| (p, f)))
        .collect::<Result<Vec<_>>>()?;

    let topo = fx.topology();
    let layout = vec![
        ("hog", fx.hog_len()),
        ("zernike", fx.zernike_len()),
        ("holes", topo.h_max * topo.hole_feature_len()),
        ("hole_mask", topo.h_max),
    ];
    let row_len = layout.iter().map(|l| l.1).sum();

    let path = dir.join("primitives.jsonl");
    let mut jsonl = BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
    let bin_path = dir.join("features.f32");
    let mut bin = BufWriter::new(std::fs::File::create(&bin_path).map_err(|e| Error::io(&bin_path, e))?);
    for (i, ((prim, feats), &label)) in analysed.iter().zip(data.labels()).enumerate() {
        let rec = FeatureRecord {
            index: i,
            label,
            empty: prim.empty,
            hole_count: prim.hole_count,
            outer_points: prim.outer.as_ref().map_or(0, |c| c.len()),
            outer_perimeter: prim.outer.as_ref().map_or(0.0, |c| c.perimeter()),
            frame: prim.frame,
            holes: prim.holes.clone(),
        };
        serde_json::to_writer(&mut jsonl, &rec)?;
        jsonl.write_all(b"\n").map_err(|e| Error::io(&path, e))?;

        let values = feats
            .hog
            .iter()
            .chain(&feats.zernike)
            .chain(feats.holes.iter().flatten())
            .copied()
            .chain(feats.hole_mask.iter().map(|&m| if m { 1.0 } else { 0.0 }));
        for v in values {
            bin.write_f32::<LittleEndian>(v).map_err(|e| Error::io(&bin_path, e))?;
        }
    }
    jsonl.flush().map_err(|e| Error::io(&path, e))?;
    bin.flush().map_err(|e| Error::io(&bin_path, e))?;

    let sidecar = Sidecar {
        rows: data.len(),
        row_len,
        dtype: "f32le",
        layout,
        labels: data.labels().to_vec(),
    };
    let side_path = dir.join("features.json");
    std::fs::write(&side_path, serde_json::to_string_pretty(&sidecar)? + "\n").map_err(|e| Error::io(&side_path, e))
}
