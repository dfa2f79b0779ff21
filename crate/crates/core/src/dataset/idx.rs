//! IDX (ubyte) reader and writer, with optional gzip.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ByteOrder, WriteBytesExt};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{DatasetKind, LabeledDataset};
use crate::error::{Error, Result};
use crate::image::GrayImage;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Whole file, decompressed when the name ends in `.gz`.
pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    let res = if is_gz(path) {
        GzDecoder::new(file).read_to_end(&mut bytes)
    } else {
        let mut file = file;
        file.read_to_end(&mut bytes)
    };
    res.map_err(|e| Error::io(path, e))?;
    Ok(bytes)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let res = if is_gz(path) {
        let mut enc = GzEncoder::new(BufWriter::new(file), Compression::default());
        enc.write_all(bytes).and_then(|_| enc.finish().map(|_| ()))
    } else {
        BufWriter::new(file).write_all(bytes)
    };
    res.map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, offset: usize, reason: impl Into<String>) -> Error {
        Error::Idx {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            reason: reason.into(),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        let end = self.pos + 4;
        if end > self.bytes.len() {
            return Err(self.err(self.pos, "truncated header"));
        }
        let v = BigEndian::read_u32(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(v)
    }

    fn magic(&mut self, expected: u32, what: &str) -> Result<()> {
        let m = self.u32()?;
        if m != expected {
            return Err(self.err(0, format!("expected {what} magic {expected:#010x}, found {m:#010x}")));
        }
        Ok(())
    }

    fn body(&self, len: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if available < len {
            return Err(self.err(
                self.bytes.len(),
                format!("truncated data: need {len} bytes after the header, found {available}"),
            ));
        }
        Ok(&self.bytes[self.pos..self.pos + len])
    }
}

/// Raw image bytes with their shape `(n, rows, cols)`.
pub fn read_idx_images(path: &Path) -> Result<(Vec<u8>, usize, usize, usize)> {
    let bytes = read_bytes(path)?;
    let mut cur = Cursor { path, bytes: &bytes, pos: 0 };
    cur.magic(IMAGE_MAGIC, "image")?;
    let n = cur.u32()? as usize;
    let rows = cur.u32()? as usize;
    let cols = cur.u32()? as usize;
    let data = cur.body(n * rows * cols)?.to_vec();
    Ok((data, n, rows, cols))
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_bytes(path)?;
    let mut cur = Cursor { path, bytes: &bytes, pos: 0 };
    cur.magic(LABEL_MAGIC, "label")?;
    let n = cur.u32()? as usize;
    Ok(cur.body(n)?.to_vec())
}

/// Loads an image/label file pair.
///
/// EMNIST glyphs are stored transposed and letter labels start at 1; both
/// are corrected here.
pub fn load_idx(images: &Path, labels: &Path, kind: DatasetKind) -> Result<LabeledDataset> {
    let (data, n, rows, cols) = read_idx_images(images)?;
    let raw_labels = read_idx_labels(labels)?;
    if raw_labels.len() != n {
        return Err(Error::Idx {
            path: labels.to_path_buf(),
            offset: 4,
            reason: format!("{} labels for {n} images in {}", raw_labels.len(), images.display()),
        });
    }
    let classes = kind.classes();
    let mut out_labels = Vec::with_capacity(n);
    for (i, &l) in raw_labels.iter().enumerate() {
        let label = match kind {
            DatasetKind::Mnist => l as usize,
            DatasetKind::EmnistLetters => (l as usize).wrapping_sub(1),
        };
        if label >= classes {
            return Err(Error::Idx {
                path: labels.to_path_buf(),
                offset: 8 + i as u64,
                reason: format!("label {l} out of range for {}", kind.name()),
            });
        }
        out_labels.push(label);
    }

    let transpose = kind == DatasetKind::EmnistLetters;
    let (h, w) = if transpose { (cols, rows) } else { (rows, cols) };
    let images_out = data
        .chunks_exact(rows * cols)
        .map(|px| {
            GrayImage::from_fn(h, w, |r, c| {
                let raw = if transpose { px[c * cols + r] } else { px[r * cols + c] };
                raw as f32 / 255.0
            })
        })
        .collect();
    LabeledDataset::new(kind.name(), images_out, out_labels, classes)
}

/// Writes a dataset back to IDX files, undoing the load-time corrections.
pub fn write_idx(dataset: &LabeledDataset, images: &Path, labels: &Path, kind: DatasetKind) -> Result<()> {
    let n = dataset.len();
    let (h, w) = dataset.shape();
    let transpose = kind == DatasetKind::EmnistLetters;
    let (rows, cols) = if transpose { (w, h) } else { (h, w) };

    let mut img_bytes = Vec::with_capacity(16 + n * h * w);
    for v in [IMAGE_MAGIC, n as u32, rows as u32, cols as u32] {
        img_bytes.write_u32::<BigEndian>(v).expect("vec write");
    }
    for img in dataset.images() {
        for r in 0..rows {
            for c in 0..cols {
                let v = if transpose { img.get(c, r) } else { img.get(r, c) };
                img_bytes.push((v * 255.0).round() as u8);
            }
        }
    }
    let mut lab_bytes = Vec::with_capacity(8 + n);
    for v in [LABEL_MAGIC, n as u32] {
        lab_bytes.write_u32::<BigEndian>(v).expect("vec write");
    }
    lab_bytes.extend(dataset.labels().iter().map(|&l| match kind {
        DatasetKind::Mnist => l as u8,
        DatasetKind::EmnistLetters => l as u8 + 1,
    }));
    write_bytes(images, &img_bytes)?;
    write_bytes(labels, &lab_bytes)
}

/// Standard file names for a split, preferring uncompressed files.
pub fn split_paths(dir: &Path, kind: DatasetKind, train: bool) -> Result<(PathBuf, PathBuf)> {
    let stems = match (kind, train) {
        (DatasetKind::Mnist, true) => ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        (DatasetKind::Mnist, false) => ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
        (DatasetKind::EmnistLetters, true) => (
            "emnist-letters-train-images-idx3-ubyte",
            "emnist-letters-train-labels-idx1-ubyte",
        ),
        (DatasetKind::EmnistLetters, false) => (
            "emnist-letters-test-images-idx3-ubyte",
            "emnist-letters-test-labels-idx1-ubyte",
        ),
    };
    let find = |stem: &str| -> Result<PathBuf> {
        for name in [stem.to_string(), format!("{stem}.gz")] {
            let p = dir.join(name);
            if p.is_file() {
                return Ok(p);
            }
        }
        Err(Error::io(
            dir.join(stem),
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found (also tried .gz)"),
        ))
    };
    Ok((find(stems.0)?, find(stems.1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_errors_name_file_and_offset() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels");
        std::fs::write(&p, [0, 0, 8, 3, 0, 0, 0, 1, 5]).unwrap();
        let err = read_idx_labels(&p).unwrap_err().to_string();
        assert!(err.contains("expected label magic") && err.contains("labels"), "{err}");

        std::fs::write(&p, [0, 0, 8, 1, 0, 0, 0, 9, 5]).unwrap();
        let err = read_idx_labels(&p).unwrap_err();
        assert!(matches!(err, Error::Idx { offset: 9, .. }), "{err}");

        std::fs::write(&p, [0, 0, 8]).unwrap();
        assert!(matches!(read_idx_labels(&p), Err(Error::Idx { offset: 0, .. })));
    }
}
