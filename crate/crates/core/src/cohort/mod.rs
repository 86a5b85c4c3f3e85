//! Longitudinal cohort structure, the horizon labeling rule, delta features
//! and feature-set assembly.

mod synth;

pub use synth::{synth_cohort, SynthCohort, SynthConfig};

use std::collections::BTreeSet;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scalar::Real;

pub const MANIFEST_VERSION: u32 = 1;
pub const DEFAULT_HORIZON_DAYS: i64 = 100;

/// Image + ROI mask paths, relative to the manifest directory.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImageRef {
    pub image: String,
    pub mask: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrimarySite {
    Lung,
    Breast,
    Melanoma,
    #[default]
    Other,
}

/// Patient-level covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientClinical {
    /// Ordinal 1-3.
    pub rpa_class: u8,
    pub age: f64,
    /// 0 = female, 1 = male.
    pub sex: u8,
    pub karnofsky: f64,
    pub n_metastases: u32,
    pub extracranial_disease: bool,
    pub primary_site: PrimarySite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timepoint {
    pub date: NaiveDate,
    #[serde(flatten)]
    pub image: ImageRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionEntry {
    pub lesion_id: String,
    /// Prescribed equivalent dose in Gy.
    pub eqd: f64,
    pub planning_date: NaiveDate,
    pub planning_mr: ImageRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planning_ct: Option<ImageRef>,
    pub followups: Vec<Timepoint>,
    #[serde(default)]
    pub event_date: Option<NaiveDate>,
    pub censor_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientEntry {
    pub patient_id: String,
    pub clinical: PatientClinical,
    pub lesions: Vec<LesionEntry>,
}

/// On-disk cohort description: patients -> lesions -> dated timepoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub version: u32,
    pub patients: Vec<PatientEntry>,
}

/// One lesion with its patient's covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct MetastasisRecord {
    pub patient_id: String,
    pub lesion_id: String,
    pub clinical: PatientClinical,
    pub eqd: f64,
    pub planning_date: NaiveDate,
    pub planning_mr: ImageRef,
    pub planning_ct: Option<ImageRef>,
    pub followups: Vec<Timepoint>,
    pub event: Option<NaiveDate>,
    pub censor_date: NaiveDate,
}

impl CohortManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(Error::data(format!("unsupported manifest version {}", self.version)));
        }
        let mut ids = BTreeSet::new();
        for p in &self.patients {
            if !(1..=3).contains(&p.clinical.rpa_class) {
                return Err(Error::data(format!("{}: rpa_class must be 1-3", p.patient_id)));
            }
            for l in &p.lesions {
                if !ids.insert(&l.lesion_id) {
                    return Err(Error::data(format!("duplicate lesion id {}", l.lesion_id)));
                }
                validate_lesion(l)?;
            }
        }
        Ok(())
    }

    /// Flatten to one record per lesion, in manifest order.
    pub fn records(&self) -> Vec<MetastasisRecord> {
        self.patients
            .iter()
            .flat_map(|p| {
                p.lesions.iter().map(|l| MetastasisRecord {
                    patient_id: p.patient_id.clone(),
                    lesion_id: l.lesion_id.clone(),
                    clinical: p.clinical.clone(),
                    eqd: l.eqd,
                    planning_date: l.planning_date,
                    planning_mr: l.planning_mr.clone(),
                    planning_ct: l.planning_ct.clone(),
                    followups: l.followups.clone(),
                    event: l.event_date,
                    censor_date: l.censor_date,
                })
            })
            .collect()
    }
}

fn validate_lesion(l: &LesionEntry) -> Result<()> {
    let bad = |msg: &str| Err(Error::data(format!("lesion {}: {msg}", l.lesion_id)));
    if l.followups.windows(2).any(|w| w[0].date >= w[1].date) {
        return bad("follow-up dates must be strictly increasing");
    }
    if l.followups.first().is_some_and(|f| f.date <= l.planning_date) {
        return bad("follow-ups must come after planning");
    }
    if let (Some(e), Some(f)) = (l.event_date, l.followups.first()) {
        if e < f.date {
            return bad("event precedes the first follow-up");
        }
    }
    let last_image = l.followups.last().map_or(l.planning_date, |f| f.date);
    if l.censor_date < last_image {
        return bad("censor date precedes an imaging date");
    }
    if !l.eqd.is_finite() {
        return bad("eqd must be finite");
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RiskLabel {
    Hrm,
    Lrm,
}

/// A classifiable follow-up image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub record: usize,
    pub followup: usize,
    pub patient_id: String,
    pub lesion_id: String,
    pub imaging_date: NaiveDate,
    pub days_since_planning: i64,
    pub label: RiskLabel,
    pub days_to_event_or_censor: i64,
    /// No event observed (the time is a censoring time).
    pub censored: bool,
}

/// Follow-up censored before the horizon: kept only for survival curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedSample {
    pub record: usize,
    pub followup: usize,
    pub lesion_id: String,
    pub days_to_censor: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedFollowup {
    pub lesion_id: String,
    pub date: NaiveDate,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Labeling {
    pub samples: Vec<LabeledSample>,
    pub excluded: Vec<ExcludedSample>,
    pub dropped: Vec<DroppedFollowup>,
}

/// Apply the horizon rule to every follow-up: HRM if an event falls in
/// (date, date + horizon], LRM if followed at least `horizon` days without
/// one, otherwise excluded. Images on or after the event are dropped.
pub fn label_samples(records: &[MetastasisRecord], horizon_days: i64) -> Result<Labeling> {
    if horizon_days <= 0 {
        return Err(Error::config("horizon must be positive"));
    }
    let mut out = Labeling::default();
    for (ri, r) in records.iter().enumerate() {
        for (fi, f) in r.followups.iter().enumerate() {
            if let Some(e) = r.event {
                if f.date >= e {
                    log::warn!("lesion {}: follow-up {} is not before the event, dropped", r.lesion_id, f.date);
                    out.dropped.push(DroppedFollowup {
                        lesion_id: r.lesion_id.clone(),
                        date: f.date,
                        reason: "imaging on or after progression event".into(),
                    });
                    continue;
                }
            }
            let (label, days, censored) = match r.event {
                Some(e) => {
                    let d = (e - f.date).num_days();
                    let l = if d <= horizon_days { RiskLabel::Hrm } else { RiskLabel::Lrm };
                    (l, d, false)
                }
                None => {
                    let d = (r.censor_date - f.date).num_days();
                    if d < horizon_days {
                        out.excluded.push(ExcludedSample {
                            record: ri,
                            followup: fi,
                            lesion_id: r.lesion_id.clone(),
                            days_to_censor: d,
                        });
                        continue;
                    }
                    (RiskLabel::Lrm, d, true)
                }
            };
            out.samples.push(LabeledSample {
                record: ri,
                followup: fi,
                patient_id: r.patient_id.clone(),
                lesion_id: r.lesion_id.clone(),
                imaging_date: f.date,
                days_since_planning: (f.date - r.planning_date).num_days(),
                label,
                days_to_event_or_censor: days,
                censored,
            });
        }
    }
    Ok(out)
}

/// Per-day change between follow-up and planning values, named
/// `Delta-mr-<feature>`.
pub fn delta_features<T: Real>(
    followup: &FeatureVector<T>,
    planning: &FeatureVector<T>,
    days: T,
) -> Result<FeatureVector<T>> {
    if !(days > T::zero()) {
        return Err(Error::data("delta features need a positive day count"));
    }
    if followup.len() != planning.len() {
        return Err(Error::data("follow-up and planning features differ in count"));
    }
    let entries = followup
        .iter()
        .map(|(n, fu)| {
            let p = planning
                .get(n)
                .ok_or_else(|| Error::data(format!("feature {n} missing from planning image")))?;
            Ok((format!("{DELTA_PREFIX}{n}"), (fu - p) / days))
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureVector::from_entries(entries)
}

pub const CLINICAL_PREFIX: &str = "clinical-";
pub const FOLLOWUP_PREFIX: &str = "follow-up-mr-";
pub const PLANNING_MR_PREFIX: &str = "planning-mr-";
pub const PLANNING_CT_PREFIX: &str = "planning-ct-";
pub const DELTA_PREFIX: &str = "Delta-mr-";

pub const CLINICAL_NAMES: [&str; 12] = [
    "rpa_class",
    "eqd",
    "n_metastases",
    "age",
    "sex",
    "karnofsky",
    "days_since_planning",
    "lesion_count_class",
    "extracranial_disease",
    "primary_lung",
    "primary_breast",
    "primary_melanoma",
];

fn lesion_count_class(n: u32) -> f64 {
    match n {
        0..=1 => 1.0,
        2..=4 => 2.0,
        _ => 3.0,
    }
}

/// The 12 clinical columns for one sample.
pub fn clinical_features<T: Real>(record: &MetastasisRecord, sample: &LabeledSample) -> FeatureVector<T> {
    let c = &record.clinical;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let values = [
        f64::from(c.rpa_class),
        record.eqd,
        f64::from(c.n_metastases),
        c.age,
        f64::from(c.sex),
        c.karnofsky,
        sample.days_since_planning as f64,
        lesion_count_class(c.n_metastases),
        flag(c.extracranial_disease),
        flag(c.primary_site == PrimarySite::Lung),
        flag(c.primary_site == PrimarySite::Breast),
        flag(c.primary_site == PrimarySite::Melanoma),
    ];
    let mut fv = FeatureVector::new();
    for (n, v) in CLINICAL_NAMES.iter().zip(values) {
        fv.push(format!("{CLINICAL_PREFIX}{n}"), T::lit(v));
    }
    fv
}

/// Which blocks enter a feature set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSetSpec {
    pub id: u8,
    pub clinical: bool,
    pub followup_mr: bool,
    pub delta: bool,
    pub planning_mr: bool,
    pub planning_ct: bool,
    /// Keep wavelet-subband columns in the image blocks.
    pub wavelet: bool,
}

impl FeatureSetSpec {
    pub const ALL_IDS: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

    pub fn table(id: u8) -> Result<Self> {
        let base = Self {
            id,
            clinical: true,
            followup_mr: false,
            delta: false,
            planning_mr: false,
            planning_ct: false,
            wavelet: false,
        };
        Ok(match id {
            1 => base,
            2 => Self { followup_mr: true, ..base },
            3 => Self { delta: true, ..base },
            4 => Self { planning_mr: true, ..base },
            5 => Self { planning_ct: true, ..base },
            6 | 7 => Self {
                followup_mr: true,
                delta: true,
                planning_mr: true,
                planning_ct: true,
                wavelet: id == 7,
                ..base
            },
            _ => return Err(Error::config(format!("feature set must be 1-7, got {id}"))),
        })
    }

    /// Short human description of the blocks.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (on, name) in [
            (self.clinical, "clinical"),
            (self.followup_mr, "follow-up MR"),
            (self.delta, "delta MR"),
            (self.planning_mr, "planning MR"),
            (self.planning_ct, "planning CT"),
            (self.wavelet, "wavelet"),
        ] {
            if on {
                parts.push(name);
            }
        }
        parts.join(" + ")
    }

    /// Needs a planning CT image.
    pub fn needs_ct(&self) -> bool {
        self.planning_ct
    }
}

fn is_wavelet(name: &str) -> bool {
    name.starts_with("wavelet-")
}

/// Per-sample inputs to [`assemble`]; image vectors carry the unprefixed
/// per-image names.
#[derive(Debug, Clone, Copy)]
pub struct SampleBlocks<'a, T> {
    pub clinical: &'a FeatureVector<T>,
    pub followup_mr: Option<&'a FeatureVector<T>>,
    pub planning_mr: Option<&'a FeatureVector<T>>,
    pub planning_ct: Option<&'a FeatureVector<T>>,
    pub days_since_planning: T,
}

fn image_block<T: Real>(
    fv: Option<&FeatureVector<T>>,
    prefix: &str,
    wavelet: bool,
    out: &mut FeatureVector<T>,
) -> Result<()> {
    let fv = fv.ok_or_else(|| Error::data(format!("missing image block {prefix}")))?;
    for (n, v) in fv.iter().filter(|(n, _)| wavelet || !is_wavelet(n)) {
        out.push(format!("{prefix}{n}"), v);
    }
    Ok(())
}

/// Concatenate the flagged blocks in fixed order: clinical, follow-up MR,
/// delta, planning MR, planning CT.
pub fn assemble<T: Real>(spec: &FeatureSetSpec, blocks: &SampleBlocks<'_, T>) -> Result<FeatureVector<T>> {
    let mut out = FeatureVector::new();
    if spec.clinical {
        out.extend(blocks.clinical.clone())?;
    }
    if spec.followup_mr {
        image_block(blocks.followup_mr, FOLLOWUP_PREFIX, spec.wavelet, &mut out)?;
    }
    if spec.delta {
        let (fu, p) = blocks
            .followup_mr
            .zip(blocks.planning_mr)
            .ok_or_else(|| Error::data("delta block needs follow-up and planning MR"))?;
        let d = delta_features(fu, p, blocks.days_since_planning)?;
        for (n, v) in d.iter() {
            if spec.wavelet || !is_wavelet(&n[DELTA_PREFIX.len()..]) {
                out.push(n.to_string(), v);
            }
        }
    }
    if spec.planning_mr {
        image_block(blocks.planning_mr, PLANNING_MR_PREFIX, spec.wavelet, &mut out)?;
    }
    if spec.planning_ct {
        image_block(blocks.planning_ct, PLANNING_CT_PREFIX, spec.wavelet, &mut out)?;
    }
    out.validate()?;
    Ok(out)
}

/// Column prefixes of the blocks present in a set, for per-block reports.
pub fn block_prefixes(spec: &FeatureSetSpec) -> Vec<&'static str> {
    let mut v = Vec::new();
    for (on, p) in [
        (spec.clinical, CLINICAL_PREFIX),
        (spec.followup_mr, FOLLOWUP_PREFIX),
        (spec.delta, DELTA_PREFIX),
        (spec.planning_mr, PLANNING_MR_PREFIX),
        (spec.planning_ct, PLANNING_CT_PREFIX),
    ] {
        if on {
            v.push(p);
        }
    }
    v
}
