//! End-to-end pipeline: image feature extraction over a cohort, per-set
//! dataset assembly, cross-validated evaluation and the report bundle.

mod dataset;
mod extract;
mod report;

pub use dataset::{build_dataset, Dataset};
pub use extract::{extract_images, ImageRow, ImageTable};
pub use extract::{cohort_images, ImageRole};
pub use report::{evaluate_set, table1_csv, write_bundle, SetResult, TABLE1_HEADER};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::SvmConfig;
use crate::cohort::{
    label_samples, FeatureSetSpec, ImageRef, Labeling, MetastasisRecord, SynthCohort, DEFAULT_HORIZON_DAYS,
};
use crate::error::{Error, Result};
use crate::evaluation::{CvConfig, SelectionMode};
use crate::features::ExtractionConfig;
use crate::volume::{read_mask, read_volume, RoiMask, VolumeFormat, VolumeImage};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MrNormalization {
    None,
    #[default]
    ZScore,
    WhiteStripe,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionSettings {
    #[serde(flatten)]
    pub features: ExtractionConfig,
    /// Applied to MR images over the whole volume; CT is left in its units.
    pub mr_normalization: MrNormalization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionSettings {
    pub samples_per_feature: usize,
    pub mode: SelectionMode,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        Self {
            samples_per_feature: 10,
            mode: SelectionMode::PerFold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierSettings {
    pub c: f64,
    pub sensitivity_weight: f64,
    pub threshold: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        let d = SvmConfig::default();
        Self {
            c: d.c,
            sensitivity_weight: d.sensitivity_weight,
            threshold: d.threshold,
            max_epochs: d.max_epochs,
            tolerance: d.tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvSettings {
    pub repeats: usize,
    pub test_fraction: f64,
    pub max_retries: usize,
    pub pooled_auc: bool,
}

impl Default for CvSettings {
    fn default() -> Self {
        let d = CvConfig::default();
        Self {
            repeats: d.repeats,
            test_fraction: d.test_fraction,
            max_retries: d.max_retries,
            pooled_auc: d.pooled_auc,
        }
    }
}

/// Fully resolved run configuration; embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub manifest: PathBuf,
    /// Mandatory; drives splits and solver ordering.
    pub seed: u64,
    #[serde(default = "default_sets")]
    pub feature_sets: Vec<u8>,
    #[serde(default = "default_horizon")]
    pub horizon_days: i64,
    /// Not embedded in artifacts, so bundles written to different
    /// directories stay byte-identical.
    #[serde(default, skip_serializing)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub extraction: ExtractionSettings,
    #[serde(default)]
    pub selection: SelectionSettings,
    #[serde(default)]
    pub classifier: ClassifierSettings,
    #[serde(default)]
    pub cv: CvSettings,
}

fn default_sets() -> Vec<u8> {
    vec![7]
}

fn default_horizon() -> i64 {
    DEFAULT_HORIZON_DAYS
}

impl PipelineConfig {
    pub fn new(manifest: PathBuf, seed: u64) -> Self {
        Self {
            manifest,
            seed,
            feature_sets: default_sets(),
            horizon_days: DEFAULT_HORIZON_DAYS,
            output_dir: None,
            extraction: ExtractionSettings::default(),
            selection: SelectionSettings::default(),
            classifier: ClassifierSettings::default(),
            cv: CvSettings::default(),
        }
    }

    pub fn svm(&self) -> SvmConfig {
        SvmConfig {
            c: self.classifier.c,
            sensitivity_weight: self.classifier.sensitivity_weight,
            seed: self.seed,
            max_epochs: self.classifier.max_epochs,
            tolerance: self.classifier.tolerance,
            threshold: self.classifier.threshold,
        }
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            repeats: self.cv.repeats,
            test_fraction: self.cv.test_fraction,
            seed: self.seed,
            max_retries: self.cv.max_retries,
            samples_per_feature: self.selection.samples_per_feature,
            selection: self.selection.mode,
            pooled_auc: self.cv.pooled_auc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_sets.is_empty() || self.feature_sets.iter().any(|s| !(1..=7).contains(s)) {
            return Err(Error::config("feature sets must be a nonempty subset of 1-7"));
        }
        if self.horizon_days <= 0 {
            return Err(Error::config("horizon_days must be positive"));
        }
        if !(self.cv.test_fraction > 0.0 && self.cv.test_fraction < 1.0) || self.cv.repeats == 0 {
            return Err(Error::config("cv needs repeats >= 1 and test_fraction in (0, 1)"));
        }
        if self.extraction.features.bin_count < 2 || self.extraction.features.firstorder_bins < 2 {
            return Err(Error::config("bin counts must be at least 2"));
        }
        if !(self.classifier.c > 0.0 && self.classifier.sensitivity_weight > 0.0) {
            return Err(Error::config("classifier C and sensitivity weight must be positive"));
        }
        Ok(())
    }

    /// Single-line JSON used as the reproducibility header.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Source of volumes and masks addressed by manifest paths.
pub trait ImageStore: Sync {
    fn volume(&self, path: &str) -> Result<VolumeImage<f64>>;
    fn mask(&self, path: &str) -> Result<RoiMask>;
}

/// Files relative to a root directory (the manifest's directory).
#[derive(Debug, Clone)]
pub struct FileStore {
    pub root: PathBuf,
}

impl FileStore {
    pub fn for_manifest(manifest: &Path) -> Self {
        Self {
            root: manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
        }
    }
}

impl ImageStore for FileStore {
    fn volume(&self, path: &str) -> Result<VolumeImage<f64>> {
        let p = self.root.join(path);
        read_volume(&p, VolumeFormat::from_path(&p)?)
    }

    fn mask(&self, path: &str) -> Result<RoiMask> {
        let p = self.root.join(path);
        read_mask(&p, VolumeFormat::from_path(&p)?)
    }
}

impl ImageStore for SynthCohort {
    fn volume(&self, path: &str) -> Result<VolumeImage<f64>> {
        self.images
            .get(path)
            .cloned()
            .ok_or_else(|| Error::data(format!("no image {path}")))
    }

    fn mask(&self, path: &str) -> Result<RoiMask> {
        self.masks
            .get(path)
            .cloned()
            .ok_or_else(|| Error::data(format!("no mask {path}")))
    }
}

/// Content hash over geometry, voxels, mask and extraction settings.
pub fn fingerprint(
    img: &VolumeImage<f64>,
    mask: &RoiMask,
    r: &ImageRef,
    settings: &ExtractionSettings,
) -> String {
    let mut h = Sha256::new();
    h.update(r.image.as_bytes());
    h.update([0]);
    h.update(r.mask.as_bytes());
    for d in img.dims() {
        h.update((d as u64).to_le_bytes());
    }
    for s in img.spacing() {
        h.update(s.to_bits().to_le_bytes());
    }
    h.update(format!("{:?}", img.modality()).as_bytes());
    for v in img.voxels() {
        h.update(v.to_bits().to_le_bytes());
    }
    for &m in mask.voxels() {
        h.update([u8::from(m)]);
    }
    h.update(serde_json::to_vec(settings).expect("settings serialize"));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ImageTable,
    pub labeling: Labeling,
    pub results: Vec<SetResult>,
}

/// Label, extract (reusing `previous` rows when fresh), then assemble and
/// evaluate every configured feature set. Errors carry the failing stage.
pub fn run(
    cfg: &PipelineConfig,
    records: &[MetastasisRecord],
    store: &dyn ImageStore,
    previous: Option<&ImageTable>,
) -> Result<RunOutput> {
    cfg.validate()?;
    let labeling = label_samples(records, cfg.horizon_days).map_err(|e| e.at_stage("label"))?;
    let needs_images = cfg.feature_sets.iter().any(|&s| s > 1);
    let table = if needs_images {
        extract_images(records, store, &cfg.extraction, previous, false)
    } else {
        ImageTable::default()
    };
    if let Some((r, msg)) = table.failures.iter().next() {
        return Err(Error::data(format!("{}: {msg}", r.image)).at_stage("extract"));
    }
    let results = cfg
        .feature_sets
        .iter()
        .map(|&id| {
            let spec = FeatureSetSpec::table(id)?;
            let ds = build_dataset(records, &labeling, &table, &spec).map_err(|e| e.at_stage("assemble"))?;
            evaluate_set(&ds, cfg).map_err(|e| e.at_stage("evaluate"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput { table, labeling, results })
}
