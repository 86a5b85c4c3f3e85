//! Per-set sample matrix with labels, lesion groups and survival outcomes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ImageTable;
use crate::cohort::{
    assemble, clinical_features, FeatureSetSpec, Labeling, MetastasisRecord, RiskLabel, SampleBlocks,
};
use crate::error::{Error, Result};
use crate::evaluation::Outcome;
use crate::selection::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: FeatureSetSpec,
    /// `lesion_id@date` per row.
    pub sample_ids: Vec<String>,
    pub matrix: FeatureMatrix<f64>,
    /// HRM = true.
    pub labels: Vec<bool>,
    /// Lesion (record) index per row.
    pub groups: Vec<usize>,
    pub outcomes: Vec<Outcome<f64>>,
    /// Censored-before-horizon samples of included lesions (survival only).
    pub excluded: Vec<Outcome<f64>>,
    /// Lesions left out because a required image block is absent.
    pub skipped_lesions: Vec<String>,
}

impl Dataset {
    pub fn n_lesions(&self) -> usize {
        let mut g = self.groups.clone();
        g.sort_unstable();
        g.dedup();
        g.len()
    }

    /// Shuffle (label, outcome) pairs across samples, keeping features and
    /// lesion groups in place.
    pub fn permute_outcomes(&mut self, seed: u64) {
        let mut idx: Vec<usize> = (0..self.labels.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        self.labels = idx.iter().map(|&i| self.labels[i]).collect();
        self.outcomes = idx.iter().map(|&i| self.outcomes[i]).collect();
    }
}

/// Assemble the feature set for every labeled sample. Lesions without a
/// block the set requires (a planning CT for sets 5-7) are skipped whole.
pub fn build_dataset(
    records: &[MetastasisRecord],
    labeling: &Labeling,
    table: &ImageTable,
    spec: &FeatureSetSpec,
) -> Result<Dataset> {
    let mut skipped: Vec<String> = records
        .iter()
        .filter(|r| spec.needs_ct() && r.planning_ct.is_none())
        .map(|r| r.lesion_id.clone())
        .collect();
    let lookup = |r: &crate::cohort::ImageRef| {
        table.rows.get(r).map(|row| &row.features).ok_or_else(|| {
            let why = table.failures.get(r).map_or("not extracted", String::as_str);
            Error::data(format!("features for {} unavailable: {why}", r.image))
        })
    };
    let mut names: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut ds = Dataset {
        spec: *spec,
        sample_ids: Vec::new(),
        matrix: FeatureMatrix::from_columns(Vec::new(), Vec::new())?,
        labels: Vec::new(),
        groups: Vec::new(),
        outcomes: Vec::new(),
        excluded: Vec::new(),
        skipped_lesions: Vec::new(),
    };
    for s in &labeling.samples {
        let r = &records[s.record];
        if skipped.contains(&r.lesion_id) {
            continue;
        }
        let needs_images = spec.followup_mr || spec.delta || spec.planning_mr || spec.planning_ct;
        let clinical = clinical_features::<f64>(r, s);
        let fv = if needs_images {
            let fu = lookup(&r.followups[s.followup].image)?;
            let pm = lookup(&r.planning_mr)?;
            let pc = match &r.planning_ct {
                Some(ct) if spec.planning_ct => Some(lookup(ct)?),
                _ => None,
            };
            assemble(
                spec,
                &SampleBlocks {
                    clinical: &clinical,
                    followup_mr: Some(fu),
                    planning_mr: Some(pm),
                    planning_ct: pc,
                    days_since_planning: s.days_since_planning as f64,
                },
            )?
        } else {
            assemble(
                spec,
                &SampleBlocks {
                    clinical: &clinical,
                    followup_mr: None,
                    planning_mr: None,
                    planning_ct: None,
                    days_since_planning: s.days_since_planning as f64,
                },
            )?
        };
        let row_names: Vec<String> = fv.names().map(str::to_string).collect();
        match &names {
            None => names = Some(row_names),
            Some(n) if *n != row_names => {
                return Err(Error::data(format!("{}: column set differs between samples", s.lesion_id)))
            }
            _ => {}
        }
        rows.push(fv.values().collect::<Vec<f64>>());
        ds.sample_ids.push(format!("{}@{}", s.lesion_id, s.imaging_date));
        ds.labels.push(s.label == RiskLabel::Hrm);
        ds.groups.push(s.record);
        ds.outcomes.push(Outcome {
            time_days: s.days_to_event_or_censor as f64,
            event: !s.censored,
            label: Some(s.label == RiskLabel::Hrm),
        });
    }
    for e in &labeling.excluded {
        if !skipped.contains(&records[e.record].lesion_id) {
            ds.excluded.push(Outcome {
                time_days: e.days_to_censor as f64,
                event: false,
                label: None,
            });
        }
    }
    ds.matrix = FeatureMatrix::from_rows(names.unwrap_or_default(), &rows)?;
    skipped.sort();
    ds.skipped_lesions = skipped;
    Ok(ds)
}
