//! Training, evaluation and the full experiment runner.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::features::FeatureExtractor;
use super::model::{
    accuracy, grid_search_weights, online_train, train_prototypes, FusionWeights, OnlineStats, ScoreTable, TopoBanks,
    TopoEncoders,
};
use super::naive::NaiveEncoder;
use super::split::stratified_split;
use super::RunConfig;
use crate::corruptions::CorruptionSpec;
use crate::dataset::{load_split, LabeledDataset};
use crate::error::{Error, Result};
use crate::hv::{Channel, PrototypeBank};
use crate::image::GrayImage;

/// Chosen fusion weights with their validation accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionChoice {
    pub alpha: f64,
    pub beta: f64,
    pub val_accuracy: f64,
}

impl FusionChoice {
    pub fn weights(&self) -> FusionWeights {
        FusionWeights {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// Pixel baseline with its banks before and after online training.
#[derive(Debug, Clone)]
pub struct NaiveModel {
    pub encoder: NaiveEncoder,
    pub before: PrototypeBank,
    pub after: PrototypeBank,
}

/// Everything needed to classify new images.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub config: RunConfig,
    pub classes: usize,
    pub image_shape: (usize, usize),
    pub encoders: TopoEncoders,
    pub before: TopoBanks,
    pub after: TopoBanks,
    pub fusion_before: FusionChoice,
    pub fusion_after: FusionChoice,
    pub naive: Option<NaiveModel>,
    pub training: TrainSummary,
}

/// Training-side numbers that go into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub train_size: usize,
    pub val_size: usize,
    pub online_updates: OnlineStats,
    pub naive_online_updates: Option<Vec<usize>>,
    pub naive_val_before: Option<f64>,
    pub naive_val_after: Option<f64>,
}

/// Wall-clock seconds per stage; excluded from determinism checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timing {
    pub stages: BTreeMap<String, f64>,
    pub total: f64,
}

impl Timing {
    fn record(&mut self, stage: &str, start: Instant) {
        *self.stages.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64();
    }
}

/// Trains both models on a clean training set.
pub fn train_model(config: &RunConfig, train: &LabeledDataset, timing: &mut Timing) -> Result<TrainedModel> {
    config.validate()?;
    let classes = train.classes();
    let (tr_idx, val_idx) = stratified_split(train.labels(), classes, config.val_fraction, config.split_seed)?;
    let tr = train.select(&tr_idx);
    let val = train.select(&val_idx);

    let t = Instant::now();
    let fx = FeatureExtractor::new(config)?;
    let tr_feats = fx.extract_all(tr.images())?;
    let val_feats = fx.extract_all(val.images())?;
    timing.record("features", t);

    let t = Instant::now();
    let encoders = TopoEncoders::fit(&tr_feats, config)?;
    let tr_hvs = encoders.encode(&tr_feats, config.batch)?;
    let val_hvs = encoders.encode(&val_feats, config.batch)?;
    drop((tr_feats, val_feats));
    timing.record("encode", t);

    let t = Instant::now();
    let before = TopoBanks::train(&tr_hvs, tr.labels(), classes, config.dim, config.batch)?;
    let grid = config.grid();
    let search = |banks: &TopoBanks| -> Result<FusionChoice> {
        let scores = ScoreTable::compute(banks, &val_hvs)?;
        let g = grid_search_weights(&scores, val.labels(), &grid)?;
        Ok(FusionChoice {
            alpha: g.weights.alpha,
            beta: g.weights.beta,
            val_accuracy: g.accuracy,
        })
    };
    let fusion_before = search(&before)?;
    let mut after = before.clone();
    let online_updates = after.online_train(&tr_hvs, tr.labels(), config)?;
    let fusion_after = search(&after)?;
    drop((tr_hvs, val_hvs));
    timing.record("topo-train", t);

    let mut summary = TrainSummary {
        train_size: tr.len(),
        val_size: val.len(),
        online_updates,
        naive_online_updates: None,
        naive_val_before: None,
        naive_val_after: None,
    };

    let naive = if config.naive {
        let (naive, stats) = train_naive(config, &tr, &val, timing)?;
        summary.naive_val_before = Some(stats.val_before);
        summary.naive_val_after = Some(stats.val_after);
        summary.naive_online_updates = Some(stats.updates);
        Some(naive)
    } else {
        None
    };

    Ok(TrainedModel {
        config: config.clone(),
        classes,
        image_shape: train.shape(),
        encoders,
        before,
        after,
        fusion_before,
        fusion_after,
        naive,
        training: summary,
    })
}

/// Validation accuracies and update counts of the pixel baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NaiveStats {
    pub val_before: f64,
    pub val_after: f64,
    pub updates: Vec<usize>,
}

/// Trains the pixel baseline on `tr`, scoring it on `val`.
pub fn train_naive(
    config: &RunConfig,
    tr: &LabeledDataset,
    val: &LabeledDataset,
    timing: &mut Timing,
) -> Result<(NaiveModel, NaiveStats)> {
    let t = Instant::now();
    let (h, w) = tr.shape();
    let encoder = NaiveEncoder::new(h, w, config.dim, config.levels, config.naive_position_seed, config.naive_level_seed)?;
    let tr_hvs = encoder.encode_all(tr.images())?;
    let val_hvs = encoder.encode_all(val.images())?;
    timing.record("naive-encode", t);

    let t = Instant::now();
    let classes = tr.classes();
    let before = train_prototypes(Channel::Pixel, &tr_hvs, tr.labels(), classes, config.dim, config.batch)?;
    let mut after = before.clone();
    let updates = online_train(&mut after, &tr_hvs, tr.labels(), config.epochs, config.eta, config.batch, config.shuffle_seed)?;
    let val_acc = |bank: &PrototypeBank| -> Result<f64> {
        let pred = val_hvs.iter().map(|h| bank.predict(h)).collect::<Result<Vec<_>>>()?;
        Ok(accuracy(&pred, val.labels()))
    };
    let stats = NaiveStats {
        val_before: val_acc(&before)?,
        val_after: val_acc(&after)?,
        updates,
    };
    timing.record("naive-train", t);
    Ok((NaiveModel { encoder, before, after }, stats))
}

/// `C x C` counts, rows indexed by the true class.
pub fn confusion_matrix(predicted: &[usize], labels: &[usize], classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; classes]; classes];
    for (&p, &l) in predicted.iter().zip(labels) {
        m[l][p] += 1;
    }
    m
}

/// Accuracy and confusion matrix of one model on one setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelResult {
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
}

impl ModelResult {
    fn new(predicted: &[usize], labels: &[usize], classes: usize) -> Self {
        ModelResult {
            accuracy: accuracy(predicted, labels),
            confusion: confusion_matrix(predicted, labels, classes),
        }
    }
}

/// Results for one corruption setting, keyed by `topo-before`, `topo-after`,
/// `naive-before` and `naive-after`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingReport {
    pub setting: String,
    pub corruption: String,
    pub models: BTreeMap<String, ModelResult>,
}

impl SettingReport {
    pub fn accuracy(&self, model: &str) -> Option<f64> {
        self.models.get(model).map(|m| m.accuracy)
    }
}

pub const MODEL_NAMES: [&str; 4] = ["topo-before", "topo-after", "naive-before", "naive-after"];

pub fn corrupt_all(images: &[GrayImage], spec: &CorruptionSpec) -> Result<Vec<GrayImage>> {
    use rayon::prelude::*;
    images
        .par_iter()
        .enumerate()
        .map(|(i, img)| spec.apply(img, i as u64))
        .collect()
}

/// Evaluates every model on `test` corrupted by `spec`.
pub fn evaluate(model: &TrainedModel, test: &LabeledDataset, spec: &CorruptionSpec, timing: &mut Timing) -> Result<SettingReport> {
    if test.shape() != model.image_shape && !test.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: model.image_shape.0 * model.image_shape.1,
            actual: test.shape().0 * test.shape().1,
        });
    }
    let cfg = &model.config;
    let labels = test.labels();
    let t = Instant::now();
    let images = corrupt_all(test.images(), spec)?;
    timing.record("corrupt", t);

    let t = Instant::now();
    let fx = FeatureExtractor::new(cfg)?;
    let feats = fx.extract_all(&images)?;
    timing.record("features", t);
    let t = Instant::now();
    let hvs = model.encoders.encode(&feats, cfg.batch)?;
    drop(feats);
    timing.record("encode", t);

    let mut models = BTreeMap::new();
    let t = Instant::now();
    for (name, banks, fusion) in [
        ("topo-before", &model.before, model.fusion_before),
        ("topo-after", &model.after, model.fusion_after),
    ] {
        let pred = ScoreTable::compute(banks, &hvs)?.predictions(fusion.weights());
        models.insert(name.to_string(), ModelResult::new(&pred, labels, model.classes));
    }
    timing.record("predict", t);

    if let Some(naive) = &model.naive {
        models.extend(evaluate_naive(naive, &images, labels, model.classes, timing)?);
    }
    Ok(SettingReport {
        setting: spec.label(),
        corruption: spec.to_string(),
        models,
    })
}

fn evaluate_naive(
    naive: &NaiveModel,
    images: &[GrayImage],
    labels: &[usize],
    classes: usize,
    timing: &mut Timing,
) -> Result<BTreeMap<String, ModelResult>> {
    use rayon::prelude::*;
    let t = Instant::now();
    let hvs = naive.encoder.encode_all(images)?;
    timing.record("naive-encode", t);
    let mut models = BTreeMap::new();
    for (name, bank) in [("naive-before", &naive.before), ("naive-after", &naive.after)] {
        let pred = hvs.par_iter().map(|h| bank.predict(h)).collect::<Result<Vec<_>>>()?;
        models.insert(name.to_string(), ModelResult::new(&pred, labels, classes));
    }
    Ok(models)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftwareInfo {
    pub name: String,
    pub version: String,
}

impl Default for SoftwareInfo {
    fn default() -> Self {
        SoftwareInfo {
            name: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub classes: usize,
    pub image_shape: (usize, usize),
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub software: SoftwareInfo,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub fusion_before: FusionChoice,
    pub fusion_after: FusionChoice,
    pub training: TrainSummary,
    pub settings: Vec<SettingReport>,
    pub timing: Timing,
}

impl RunReport {
    pub fn setting(&self, label: &str) -> Option<&SettingReport> {
        self.settings.iter().find(|s| s.setting == label)
    }

    /// The report as JSON with the timing block removed.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn accuracy_csv(&self) -> String {
        accuracy_csv(&self.settings)
    }

    /// Writes `report.json`, `accuracy.csv` and one confusion CSV per
    /// setting and model into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_artifacts(dir, &serde_json::to_string_pretty(self)?, &self.settings)
    }
}

/// `accuracy.csv` body: one row per setting, one column per model.
pub fn accuracy_csv(settings: &[SettingReport]) -> String {
    let names: Vec<&str> = MODEL_NAMES
        .iter()
        .copied()
        .filter(|m| settings.iter().any(|s| s.models.contains_key(*m)))
        .collect();
    let mut out = String::from("setting");
    for m in &names {
        out.push(',');
        out.push_str(&m.replace('-', "_"));
    }
    out.push('\n');
    for s in settings {
        out.push_str(&s.setting);
        for m in &names {
            out.push(',');
            if let Some(a) = s.accuracy(m) {
                out.push_str(&format!("{a:.4}"));
            }
        }
        out.push('\n');
    }
    out
}

fn write_artifacts(dir: &Path, report_json: &str, settings: &[SettingReport]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: String, body: String| {
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
    };
    write("report.json".into(), format!("{report_json}\n"))?;
    write("accuracy.csv".into(), accuracy_csv(settings))?;
    for s in settings {
        for (model, r) in &s.models {
            let body: String = r
                .confusion
                .iter()
                .map(|row| row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n")
                .collect();
            write(format!("confusion_{}_{}.csv", s.setting, model), body)?;
        }
    }
    Ok(())
}

/// Loads the configured dataset splits, applying the subset limits.
pub fn load_data(config: &RunConfig) -> Result<(LabeledDataset, LabeledDataset)> {
    let dir = config.data_dir();
    let mut train = load_split(dir, config.dataset, true)?;
    let mut test = load_split(dir, config.dataset, false)?;
    if let Some(n) = config.train_limit {
        train = train.subset(n, config.subset_seed);
    }
    if let Some(n) = config.test_limit {
        test = test.subset(n, config.subset_seed.wrapping_add(1));
    }
    Ok((train, test))
}

/// Trains on `train` and evaluates every configured corruption on `test`.
pub fn run_on(config: &RunConfig, train: &LabeledDataset, test: &LabeledDataset) -> Result<(RunReport, TrainedModel)> {
    let start = Instant::now();
    let mut timing = Timing::default();
    let model = train_model(config, train, &mut timing)?;
    let report = evaluate_suite(&model, test, &mut timing, start)?;
    Ok((report, model))
}

/// Evaluates a trained model on the configured suite and assembles the report.
pub fn evaluate_suite(
    model: &TrainedModel,
    test: &LabeledDataset,
    timing: &mut Timing,
    start: Instant,
) -> Result<RunReport> {
    let settings = model
        .config
        .corruptions
        .iter()
        .map(|spec| evaluate(model, test, spec, timing))
        .collect::<Result<Vec<_>>>()?;
    timing.total = start.elapsed().as_secs_f64();
    Ok(RunReport {
        software: SoftwareInfo::default(),
        config: model.config.clone(),
        dataset: DatasetSummary {
            name: test.name().to_string(),
            classes: model.classes,
            image_shape: model.image_shape,
            train: model.training.train_size,
            val: model.training.val_size,
            test: test.len(),
        },
        fusion_before: model.fusion_before,
        fusion_after: model.fusion_after,
        training: model.training.clone(),
        settings,
        timing: timing.clone(),
    })
}

/// Full run from the configured dataset directory. Artifacts are written
/// only after every setting has been evaluated.
pub fn run_experiment(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let (train, test) = load_data(config)?;
    let (report, _) = run_on(config, &train, &test)?;
    report.write(&config.output_dir)?;
    Ok(report)
}

/// Report of a pixel-baseline-only run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineReport {
    pub software: SoftwareInfo,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub training: NaiveStats,
    pub settings: Vec<SettingReport>,
    pub timing: Timing,
}

impl BaselineReport {
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_artifacts(dir, &serde_json::to_string_pretty(self)?, &self.settings)
    }
}

/// Trains and evaluates only the pixel baseline.
pub fn run_baseline_on(config: &RunConfig, train: &LabeledDataset, test: &LabeledDataset) -> Result<BaselineReport> {
    config.validate()?;
    let start = Instant::now();
    let mut timing = Timing::default();
    let classes = train.classes();
    let (tr_idx, val_idx) = stratified_split(train.labels(), classes, config.val_fraction, config.split_seed)?;
    let (tr, val) = (train.select(&tr_idx), train.select(&val_idx));
    let (naive, stats) = train_naive(config, &tr, &val, &mut timing)?;
    let mut settings = Vec::with_capacity(config.corruptions.len());
    for spec in &config.corruptions {
        let t = Instant::now();
        let images = corrupt_all(test.images(), spec)?;
        timing.record("corrupt", t);
        settings.push(SettingReport {
            setting: spec.label(),
            corruption: spec.to_string(),
            models: evaluate_naive(&naive, &images, test.labels(), classes, &mut timing)?,
        });
    }
    timing.total = start.elapsed().as_secs_f64();
    Ok(BaselineReport {
        software: SoftwareInfo::default(),
        config: config.clone(),
        dataset: DatasetSummary {
            name: test.name().to_string(),
            classes,
            image_shape: train.shape(),
            train: tr.len(),
            val: val.len(),
            test: test.len(),
        },
        training: stats,
        settings,
        timing,
    })
}

/// Pixel-baseline run from the configured dataset directory.
pub fn run_baseline(config: &RunConfig) -> Result<BaselineReport> {
    config.validate()?;
    let (train, test) = load_data(config)?;
    let report = run_baseline_on(config, &train, &test)?;
    report.write(&config.output_dir)?;
    Ok(report)
}
