//! `THDC1` model container.
//!
//! Layout (little-endian):
//!
//! ```text
//! "THDC1" | u32 format version | u32 header length | header (JSON)
//! then per bank: u8 channel | u8 stage | u32 classes | u32 dim | i32 counts...
//! ```
//!
//! Random matrices and role vectors are not stored; they are regenerated
//! from the seeds in the header.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::model::{TopoBanks, TopoEncoders};
use super::naive::NaiveEncoder;
use super::run::{FusionChoice, NaiveModel, TrainSummary, TrainedModel};
use super::RunConfig;
use crate::error::{Error, Result};
use crate::hv::{Accumulator, Channel, HoleSetEncoder, ProjectionEncoder, PrototypeBank};

pub const MAGIC: &[u8; 5] = b"THDC1";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ProjectionStats {
    seed: u64,
    mean: Vec<f32>,
    scale: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    software_version: String,
    config: RunConfig,
    classes: usize,
    image_shape: (usize, usize),
    hog: ProjectionStats,
    zernike: ProjectionStats,
    hole_seed: u64,
    hole_bounds: Vec<(f32, f32)>,
    fusion_before: FusionChoice,
    fusion_after: FusionChoice,
    training: TrainSummary,
    naive: bool,
    banks: usize,
}

fn stats(enc: &ProjectionEncoder) -> ProjectionStats {
    ProjectionStats {
        seed: enc.seed(),
        mean: enc.mean().to_vec(),
        scale: enc.scale().to_vec(),
    }
}

fn bad(reason: impl Into<String>) -> Error {
    Error::Container(reason.into())
}

fn write_bank<W: Write>(w: &mut W, bank: &PrototypeBank, stage: u8) -> std::io::Result<()> {
    w.write_u8(bank.channel().code())?;
    w.write_u8(stage)?;
    w.write_u32::<LittleEndian>(bank.classes() as u32)?;
    w.write_u32::<LittleEndian>(bank.dim() as u32)?;
    for c in 0..bank.classes() {
        for &v in bank.prototype(c) {
            w.write_i32::<LittleEndian>(v)?;
        }
    }
    Ok(())
}

fn read_bank<R: Read>(r: &mut R) -> Result<(PrototypeBank, u8)> {
    let io = |e: std::io::Error| bad(format!("truncated bank: {e}"));
    let code = r.read_u8().map_err(io)?;
    let channel = Channel::from_code(code).ok_or_else(|| bad(format!("unknown channel code {code}")))?;
    let stage = r.read_u8().map_err(io)?;
    let classes = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let dim = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let mut protos = Vec::with_capacity(classes);
    for _ in 0..classes {
        let mut counts = vec![0i32; dim];
        r.read_i32_into::<LittleEndian>(&mut counts).map_err(io)?;
        protos.push(Accumulator::from_counts(counts));
    }
    Ok((PrototypeBank::from_prototypes(channel, protos)?, stage))
}

/// Serialises a trained model.
pub fn write_model<W: Write>(w: &mut W, model: &TrainedModel) -> Result<()> {
    let mut banks: Vec<(&PrototypeBank, u8)> = Vec::new();
    banks.extend(model.before.banks().into_iter().map(|b| (b, 0)));
    banks.extend(model.after.banks().into_iter().map(|b| (b, 1)));
    if let Some(n) = &model.naive {
        banks.push((&n.before, 0));
        banks.push((&n.after, 1));
    }
    let header = Header {
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        config: model.config.clone(),
        classes: model.classes,
        image_shape: model.image_shape,
        hog: stats(&model.encoders.hog),
        zernike: stats(&model.encoders.zernike),
        hole_seed: model.encoders.holes.seed(),
        hole_bounds: model.encoders.holes.bounds().to_vec(),
        fusion_before: model.fusion_before,
        fusion_after: model.fusion_after,
        training: model.training.clone(),
        naive: model.naive.is_some(),
        banks: banks.len(),
    };
    let json = serde_json::to_vec(&header)?;
    let io = |e: std::io::Error| bad(format!("write failed: {e}"));
    w.write_all(MAGIC).map_err(io)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION).map_err(io)?;
    w.write_u32::<LittleEndian>(json.len() as u32).map_err(io)?;
    w.write_all(&json).map_err(io)?;
    for (bank, stage) in banks {
        write_bank(w, bank, stage).map_err(io)?;
    }
    Ok(())
}

/// Reads a model written by [`write_model`].
pub fn read_model<R: Read>(r: &mut R) -> Result<TrainedModel> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(|_| bad("file too short for a THDC1 header"))?;
    if &magic != MAGIC {
        return Err(bad(format!("bad magic {magic:?}, expected THDC1")));
    }
    let io = |e: std::io::Error| bad(format!("truncated header: {e}"));
    let version = r.read_u32::<LittleEndian>().map_err(io)?;
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let len = r.read_u32::<LittleEndian>().map_err(io)? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json).map_err(io)?;
    let h: Header = serde_json::from_slice(&json)?;
    let cfg = &h.config;

    let expected_banks = if h.naive { 8 } else { 6 };
    if h.banks != expected_banks {
        return Err(bad(format!("expected {expected_banks} banks, header lists {}", h.banks)));
    }
    let mut banks = Vec::with_capacity(h.banks);
    for _ in 0..h.banks {
        let (bank, _) = read_bank(r)?;
        if bank.classes() != h.classes || bank.dim() != cfg.dim {
            return Err(bad("bank shape does not match the header"));
        }
        banks.push(bank);
    }
    let mut banks = banks.into_iter();
    let mut next = |want: Channel| -> Result<PrototypeBank> {
        let b = banks.next().expect("count checked");
        if b.channel() != want {
            return Err(bad(format!("expected a {} bank, found {}", want.as_str(), b.channel().as_str())));
        }
        Ok(b)
    };
    let mut three = || -> Result<TopoBanks> {
        Ok(TopoBanks {
            hog: next(Channel::Hog)?,
            zernike: next(Channel::Zernike)?,
            holes: next(Channel::Holes)?,
        })
    };
    let before = three()?;
    let after = three()?;
    let naive = if h.naive {
        let (height, width) = h.image_shape;
        Some(NaiveModel {
            encoder: NaiveEncoder::new(height, width, cfg.dim, cfg.levels, cfg.naive_position_seed, cfg.naive_level_seed)?,
            before: next(Channel::Pixel)?,
            after: next(Channel::Pixel)?,
        })
    } else {
        None
    };

    let check = |s: &ProjectionStats| -> Result<()> {
        if s.mean.len() != s.scale.len() {
            return Err(bad("encoder mean and scale lengths differ"));
        }
        Ok(())
    };
    check(&h.hog)?;
    check(&h.zernike)?;
    let encoders = TopoEncoders::from_parts(
        ProjectionEncoder::from_stats(h.hog.seed, cfg.dim, h.hog.mean, h.hog.scale),
        ProjectionEncoder::from_stats(h.zernike.seed, cfg.dim, h.zernike.mean, h.zernike.scale),
        HoleSetEncoder::from_bounds(h.hole_bounds, cfg.dim, cfg.levels, h.hole_seed)?,
        cfg,
    );
    Ok(TrainedModel {
        config: h.config,
        classes: h.classes,
        image_shape: h.image_shape,
        encoders,
        before,
        after,
        fusion_before: h.fusion_before,
        fusion_after: h.fusion_after,
        naive,
        training: h.training,
    })
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_model(&mut w, model)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(&mut std::io::BufReader::new(file))
}
