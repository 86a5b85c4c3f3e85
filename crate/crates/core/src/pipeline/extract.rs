//! Per-image feature table: extraction, CSV persistence and resume.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fingerprint, ExtractionSettings, ImageStore, MrNormalization};
use crate::cohort::{ImageRef, MetastasisRecord};
use crate::error::{Error, Result};
use crate::features::{extract_all, FeatureVector};
use crate::volume::{white_stripe_normalize, z_normalize, RoiMask, WhiteStripeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageRole {
    PlanningMr,
    PlanningCt,
    Followup,
}

impl ImageRole {
    fn as_str(self) -> &'static str {
        match self {
            Self::PlanningMr => "planning-mr",
            Self::PlanningCt => "planning-ct",
            Self::Followup => "followup",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "planning-mr" => Ok(Self::PlanningMr),
            "planning-ct" => Ok(Self::PlanningCt),
            "followup" => Ok(Self::Followup),
            other => Err(Error::data(format!("unknown image role {other:?}"))),
        }
    }

    fn is_mr(self) -> bool {
        self != Self::PlanningCt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRow {
    pub role: ImageRole,
    pub fingerprint: String,
    pub features: FeatureVector<f64>,
}

/// Features for every image referenced by a cohort, keyed by image ref.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImageTable {
    pub rows: BTreeMap<ImageRef, ImageRow>,
    /// Images whose extraction failed, with the error message.
    pub failures: BTreeMap<ImageRef, String>,
    /// Rows taken unchanged from a previous table.
    pub reused: usize,
}

/// Unique image refs in the cohort with their roles, in sorted order.
pub fn cohort_images(records: &[MetastasisRecord]) -> BTreeMap<ImageRef, ImageRole> {
    let mut out = BTreeMap::new();
    for r in records {
        out.insert(r.planning_mr.clone(), ImageRole::PlanningMr);
        if let Some(ct) = &r.planning_ct {
            out.insert(ct.clone(), ImageRole::PlanningCt);
        }
        for f in &r.followups {
            out.insert(f.image.clone(), ImageRole::Followup);
        }
    }
    out
}

fn load_normalized(
    store: &dyn ImageStore,
    r: &ImageRef,
    role: ImageRole,
    settings: &ExtractionSettings,
) -> Result<(crate::volume::VolumeImage<f64>, RoiMask, String)> {
    let img = store.volume(&r.image)?;
    let mask = store.mask(&r.mask)?;
    mask.check_aligned(&img)?;
    let hash = fingerprint(&img, &mask, r, settings);
    let img = if role.is_mr() {
        match settings.mr_normalization {
            MrNormalization::None => img,
            MrNormalization::ZScore => z_normalize(&img, None)?.0,
            MrNormalization::WhiteStripe => {
                let brain = RoiMask::full(img.dims())?;
                white_stripe_normalize(&img, &brain, &WhiteStripeConfig::default())?.0
            }
        }
    } else {
        img
    };
    Ok((img, mask, hash))
}

/// A computed or reused row (flag set when reused), or the failure message.
type RowResult = std::result::Result<(ImageRow, bool), String>;

/// Extract every cohort image in parallel. Rows of `previous` whose
/// fingerprint still matches are reused unless `force` is set. Failures are
/// logged and collected; the run continues.
pub fn extract_images(
    records: &[MetastasisRecord],
    store: &dyn ImageStore,
    settings: &ExtractionSettings,
    previous: Option<&ImageTable>,
    force: bool,
) -> ImageTable {
    let refs: Vec<(ImageRef, ImageRole)> = cohort_images(records).into_iter().collect();
    let results: Vec<(ImageRef, RowResult)> = refs
        .into_par_iter()
        .map(|(r, role)| {
            let res = (|| -> Result<(ImageRow, bool)> {
                let (img, mask, hash) = load_normalized(store, &r, role, settings)?;
                if !force {
                    if let Some(old) = previous.and_then(|p| p.rows.get(&r)) {
                        if old.fingerprint == hash && old.role == role {
                            return Ok((old.clone(), true));
                        }
                    }
                }
                let features = extract_all(&img, &mask, &settings.features)?;
                Ok((ImageRow { role, fingerprint: hash, features }, false))
            })();
            (r, res.map_err(|e| e.to_string()))
        })
        .collect();
    let mut table = ImageTable::default();
    for (r, res) in results {
        match res {
            Ok((row, reused)) => {
                table.reused += usize::from(reused);
                table.rows.insert(r, row);
            }
            Err(msg) => {
                log::error!("extraction failed for {}: {msg}", r.image);
                table.failures.insert(r, msg);
            }
        }
    }
    table
}

const FIXED_COLUMNS: [&str; 4] = ["image", "mask", "role", "fingerprint"];

impl ImageTable {
    pub fn feature_names(&self) -> Vec<String> {
        self.rows
            .values()
            .next()
            .map(|r| r.features.names().map(str::to_string).collect())
            .unwrap_or_default()
    }

    /// CSV with a leading `# config:` line; values use shortest round-trip
    /// formatting so a reload is bit-exact.
    pub fn to_csv(&self, config_line: &str) -> Result<String> {
        let names = self.feature_names();
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = FIXED_COLUMNS
            .iter()
            .copied()
            .chain(names.iter().map(String::as_str))
            .collect();
        w.write_record(&header)?;
        for (r, row) in &self.rows {
            if !row.features.names().eq(names.iter().map(String::as_str)) {
                return Err(Error::data(format!("{}: feature names differ from other images", r.image)));
            }
            let mut rec = vec![
                r.image.clone(),
                r.mask.clone(),
                row.role.as_str().to_string(),
                row.fingerprint.clone(),
            ];
            rec.extend(row.features.values().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        let body = w.into_inner().map_err(|e| Error::data(e.to_string()))?;
        Ok(format!("# config: {config_line}\n{}", String::from_utf8_lossy(&body)))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect();
        let mut rd = csv::Reader::from_reader(body.as_bytes());
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        if header.len() < FIXED_COLUMNS.len() || header[..4] != FIXED_COLUMNS {
            return Err(Error::data("feature table header is malformed"));
        }
        let names = &header[4..];
        let mut table = Self::default();
        let mut seen = BTreeSet::new();
        for rec in rd.records() {
            let rec = rec?;
            let r = ImageRef {
                image: rec[0].to_string(),
                mask: rec[1].to_string(),
            };
            if !seen.insert(r.clone()) {
                return Err(Error::data(format!("duplicate row for {}", r.image)));
            }
            let values = rec
                .iter()
                .skip(4)
                .map(|v| v.parse::<f64>().map_err(|e| Error::data(format!("{}: {e}", r.image))))
                .collect::<Result<Vec<_>>>()?;
            let features = FeatureVector::from_entries(names.iter().cloned().zip(values).collect())?;
            table.rows.insert(
                r,
                ImageRow {
                    role: ImageRole::parse(&rec[2])?,
                    fingerprint: rec[3].to_string(),
                    features,
                },
            );
        }
        Ok(table)
    }
}
