//! Run configuration and its flat `key = value` file format.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corruptions::CorruptionSpec;
use crate::dataset::DatasetKind;
use crate::error::{Error, Result};
use crate::hv::DEFAULT_DIM;
use crate::moments::{HogConfig, ZernikeConfig};
use crate::topology::TopologyConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dim: usize,
    pub batch: usize,
    pub epochs: usize,
    pub eta: i32,
    pub val_fraction: f64,
    pub h_max: usize,
    pub k_shape: usize,
    pub levels: usize,
    pub signature_len: usize,
    pub patch_size: usize,
    pub zernike_order: usize,
    /// Number of steps in the fusion grid; weights are `i / grid_steps`.
    pub grid_steps: usize,

    pub role_outer_seed: u64,
    pub role_hog_seed: u64,
    pub role_holes_seed: u64,
    pub hog_seed: u64,
    pub zernike_seed: u64,
    pub hole_seed: u64,
    pub naive_position_seed: u64,
    pub naive_level_seed: u64,
    pub split_seed: u64,
    pub shuffle_seed: u64,
    pub subset_seed: u64,

    pub dataset: DatasetKind,
    pub mnist_dir: PathBuf,
    pub emnist_dir: PathBuf,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub corruptions: Vec<CorruptionSpec>,
    pub naive: bool,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: DEFAULT_DIM,
            batch: 512,
            epochs: 20,
            eta: 1,
            val_fraction: 0.1,
            h_max: 4,
            k_shape: 12,
            levels: 101,
            signature_len: crate::topology::DEFAULT_SIGNATURE_LEN,
            patch_size: 32,
            zernike_order: 8,
            grid_steps: 10,
            role_outer_seed: 999,
            role_hog_seed: 1000,
            role_holes_seed: 1001,
            hog_seed: 2,
            zernike_seed: 1,
            hole_seed: 123,
            naive_position_seed: 7,
            naive_level_seed: 8,
            split_seed: 0,
            shuffle_seed: 0,
            subset_seed: 0,
            dataset: DatasetKind::Mnist,
            mnist_dir: PathBuf::from("data/mnist"),
            emnist_dir: PathBuf::from("data/emnist"),
            train_limit: None,
            test_limit: None,
            corruptions: default_suite(),
            naive: true,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Clean data plus the test-time corruptions of the MNIST results table.
pub fn default_suite() -> Vec<CorruptionSpec> {
    [
        "kind=none",
        "kind=rotation,param=20,seed=1",
        "kind=gaussian,param=0.1,seed=2",
        "kind=gaussian,param=0.2,seed=3",
        "kind=salt_pepper,param=0.1,seed=4",
        "kind=cutout,param=4,seed=5",
        "kind=zoom,param=0.75,seed=6",
    ]
    .iter()
    .map(|s| s.parse().expect("valid built-in spec"))
    .collect()
}

fn parse_suite(value: &str) -> Result<Vec<CorruptionSpec>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

impl RunConfig {
    pub fn topology(&self) -> TopologyConfig {
        TopologyConfig {
            h_max: self.h_max,
            k_shape: self.k_shape,
            signature_len: self.signature_len,
            ..TopologyConfig::default()
        }
    }

    pub fn zernike(&self) -> ZernikeConfig {
        let r = self.patch_size as f64 / 2.0;
        ZernikeConfig {
            order: self.zernike_order,
            size: self.patch_size,
            radius_full: r,
            radius_cell: r,
            ..ZernikeConfig::default()
        }
    }

    pub fn hog(&self) -> HogConfig {
        HogConfig::default()
    }

    /// Feature length of one hole.
    pub fn hole_feature_len(&self) -> usize {
        self.topology().hole_feature_len()
    }

    pub fn data_dir(&self) -> &Path {
        match self.dataset {
            DatasetKind::Mnist => &self.mnist_dir,
            DatasetKind::EmnistLetters => &self.emnist_dir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if self.batch == 0 {
            return bad("batch must be positive".into());
        }
        if self.eta < 1 {
            return bad(format!("eta must be >= 1, got {}", self.eta));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return bad(format!("val_fraction must be in [0, 1), got {}", self.val_fraction));
        }
        if self.levels < 2 {
            return bad("levels must be at least 2".into());
        }
        if self.grid_steps == 0 {
            return bad("grid_steps must be positive".into());
        }
        if self.patch_size % self.hog().cell != 0 {
            return bad(format!("patch_size must be a multiple of {}", self.hog().cell));
        }
        self.topology().validate()?;
        self.zernike().validate()
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value {v:?} for {key}")))
        }
        fn limit(key: &str, v: &str) -> Result<Option<usize>> {
            if v.is_empty() || v == "none" || v == "all" {
                Ok(None)
            } else {
                num(key, v).map(Some)
            }
        }
        let v = value.trim();
        match key.trim() {
            "dim" | "D" => self.dim = num(key, v)?,
            "batch" | "B" => self.batch = num(key, v)?,
            "epochs" | "E" => self.epochs = num(key, v)?,
            "eta" => self.eta = num(key, v)?,
            "val_fraction" | "rho" => self.val_fraction = num(key, v)?,
            "h_max" => self.h_max = num(key, v)?,
            "k_shape" => self.k_shape = num(key, v)?,
            "levels" | "Q" => self.levels = num(key, v)?,
            "signature_len" => self.signature_len = num(key, v)?,
            "patch_size" => self.patch_size = num(key, v)?,
            "zernike_order" => self.zernike_order = num(key, v)?,
            "grid_steps" => self.grid_steps = num(key, v)?,
            "role_outer_seed" => self.role_outer_seed = num(key, v)?,
            "role_hog_seed" => self.role_hog_seed = num(key, v)?,
            "role_holes_seed" => self.role_holes_seed = num(key, v)?,
            "hog_seed" => self.hog_seed = num(key, v)?,
            "zernike_seed" => self.zernike_seed = num(key, v)?,
            "hole_seed" => self.hole_seed = num(key, v)?,
            "naive_position_seed" => self.naive_position_seed = num(key, v)?,
            "naive_level_seed" => self.naive_level_seed = num(key, v)?,
            "split_seed" => self.split_seed = num(key, v)?,
            "shuffle_seed" => self.shuffle_seed = num(key, v)?,
            "subset_seed" => self.subset_seed = num(key, v)?,
            "dataset" => self.dataset = v.parse()?,
            "mnist_dir" => self.mnist_dir = PathBuf::from(v),
            "emnist_dir" => self.emnist_dir = PathBuf::from(v),
            "train_limit" => self.train_limit = limit(key, v)?,
            "test_limit" => self.test_limit = limit(key, v)?,
            "corruptions" => self.corruptions = parse_suite(v)?,
            "naive" => self.naive = num(key, v)?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            other => return Err(Error::InvalidParameter(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every line of a config file body on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                reason: format!("expected `key = value`, got {line:?}"),
            })?;
            self.set(key, value).map_err(|e| Error::Config {
                line: i + 1,
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Fusion grid values `0, 1/steps, ..., 1`.
    pub fn grid(&self) -> Vec<f64> {
        (0..=self.grid_steps).map(|i| i as f64 / self.grid_steps as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_hyperparameter_table() {
        let c = RunConfig::default();
        assert_eq!((c.dim, c.batch, c.epochs, c.eta), (10_000, 512, 20, 1));
        assert_eq!((c.role_outer_seed, c.role_hog_seed, c.role_holes_seed), (999, 1000, 1001));
        assert_eq!((c.hog_seed, c.zernike_seed, c.hole_seed), (2, 1, 123));
        assert_eq!((c.levels, c.k_shape, c.hole_feature_len()), (101, 12, 16));
        assert_eq!(c.grid().len(), 11);
        assert!((c.grid()[3] - 0.3).abs() < 1e-15);
        c.validate().unwrap();
    }

    #[test]
    fn parses_config_text() {
        let mut c = RunConfig::default();
        c.apply_text(
            "# desk run\nD = 2048\nepochs=3  # short\n\ntrain_limit = 500\ncorruptions = kind=none; kind=rotation,param=20,seed=7\n",
        )
        .unwrap();
        assert_eq!((c.dim, c.epochs, c.train_limit), (2048, 3, Some(500)));
        assert_eq!(c.corruptions.len(), 2);
        assert_eq!(c.corruptions[1].seed(), 7);
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let mut c = RunConfig::default();
        let err = c.apply_text("dim = 10\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        assert!(matches!(c.apply_text("dim 10"), Err(Error::Config { line: 1, .. })));
        assert!(c.apply_text("epochs = many").is_err());
    }
}
