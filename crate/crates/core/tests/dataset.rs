use std::io::Read;
use std::path::PathBuf;

use topohdc::dataset::{load_split, DatasetKind};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}

fn gunzip(name: &str) -> Vec<u8> {
    let file = std::fs::File::open(data_dir().join(name)).unwrap();
    let mut out = Vec::new();
    flate2::read::GzDecoder::new(file).read_to_end(&mut out).unwrap();
    out
}

fn be_u32(b: &[u8], at: usize) -> usize {
    u32::from_be_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]]) as usize
}

#[test]
fn loader_agrees_with_a_byte_level_reading() {
    let labels = gunzip("t10k-labels-idx1-ubyte.gz");
    let images = gunzip("t10k-images-idx3-ubyte.gz");
    assert_eq!(be_u32(&labels, 0), 0x801);
    assert_eq!(be_u32(&images, 0), 0x803);
    let n = be_u32(&labels, 4);
    assert_eq!(be_u32(&images, 4), n);
    assert_eq!((be_u32(&images, 8), be_u32(&images, 12)), (28, 28));
    // first label of the bundled test file
    assert_eq!(labels[8], 5);

    let test = load_split(&data_dir(), DatasetKind::Mnist, false).unwrap();
    assert_eq!(test.len(), n);
    assert_eq!(test.shape(), (28, 28));
    for i in [0, 1, n / 2, n - 1] {
        assert_eq!(test.labels()[i], labels[8 + i] as usize);
        let raw = &images[16 + i * 784..16 + (i + 1) * 784];
        for (p, &b) in test.images()[i].pixels().iter().zip(raw) {
            assert_eq!(*p, b as f32 / 255.0);
        }
    }
}

#[test]
fn train_split_loads_with_all_classes() {
    let train = load_split(&data_dir(), DatasetKind::Mnist, true).unwrap();
    assert_eq!(train.classes(), 10);
    assert!(train.class_counts().iter().all(|&c| c > 0));
    let sub = train.subset(500, 0);
    assert_eq!(sub.len(), 500);
    assert_eq!(sub.labels(), train.subset(500, 0).labels());
}

#[test]
fn missing_files_name_the_path() {
    let err = load_split(std::path::Path::new("/nonexistent/mnist"), DatasetKind::Mnist, true).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/mnist"), "{err}");
}
