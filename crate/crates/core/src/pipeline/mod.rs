//! End-to-end runner: split, features, encoders, prototypes, fusion search,
//! online training and corrupted evaluation, plus the pixel baseline.

mod config;
mod container;
mod dump;
mod features;
mod model;
mod naive;
mod run;
mod split;

pub use config::{default_suite, RunConfig};
pub use container::{load_model, save_model, read_model, write_model, MAGIC};
pub use dump::{write_feature_dump, FeatureRecord};
pub use features::{FeatureExtractor, FeatureSet, GlyphFeatures};
pub use model::{
    accuracy, epoch_order, fuse_and_predict, grid_search_weights, online_train, train_prototypes, ChannelHvs,
    FusionWeights, GridSearch, OnlineStats, ScoreTable, TopoBanks, TopoEncoders,
};
pub use naive::NaiveEncoder;
pub use run::{
    accuracy_csv, confusion_matrix, corrupt_all, evaluate, evaluate_suite, load_data, run_baseline, run_baseline_on,
    run_experiment, run_on, train_model, train_naive, BaselineReport, DatasetSummary, FusionChoice, ModelResult,
    NaiveModel, NaiveStats, RunReport, SettingReport, SoftwareInfo, Timing, TrainSummary, TrainedModel, MODEL_NAMES,
};
pub use split::stratified_split;
