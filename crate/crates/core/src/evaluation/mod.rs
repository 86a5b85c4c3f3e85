//! ROC/AUC, confusion counts, Kaplan-Meier, log-rank, Monte-Carlo
//! cross-validation and the risk-split report.

mod cv;
mod render;
mod survival;

pub use cv::{monte_carlo_cv, CvConfig, CvReport, RepeatOutcome, SelectionMode};
pub use render::{km_csv, km_svg, roc_svg};
pub use survival::{kaplan_meier, log_rank, LogRank, SurvivalCurve, SurvivalPoint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Days per month used when rendering times.
pub const DAYS_PER_MONTH: f64 = 30.44;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint<T> {
    pub fpr: T,
    pub tpr: T,
    pub threshold: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve<T> {
    pub points: Vec<RocPoint<T>>,
    pub auc: T,
}

/// ROC by a descending threshold sweep; tied scores move together, so the
/// trapezoidal area equals the Mann-Whitney statistic with half credit for
/// ties.
pub fn auc<T: Real>(scores: &[T], labels: &[bool]) -> Result<RocCurve<T>> {
    if scores.len() != labels.len() {
        return Err(Error::data("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::numerical("NaN score"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::data("AUC needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let (np, nn) = (T::of(n_pos), T::of(n_neg));
    let mut points = vec![RocPoint {
        fpr: T::zero(),
        tpr: T::zero(),
        threshold: T::infinity(),
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    // twice the area, in units of pairs
    let mut area2 = 0usize;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (tp0, fp0) = (tp, fp);
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        area2 += (fp - fp0) * (tp + tp0);
        points.push(RocPoint {
            fpr: T::of(fp) / nn,
            tpr: T::of(tp) / np,
            threshold: s,
        });
    }
    let auc = T::of(area2) / (T::lit(2.0) * np * nn);
    Ok(RocCurve { points, auc })
}

/// Counts in the (TP, FN, TN, FP) layout, HRM as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
}

impl Confusion {
    pub fn from_predictions(predicted: &[bool], actual: &[bool]) -> Self {
        let mut c = Self::default();
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (true, true) => c.tp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
            }
        }
        c
    }

    pub fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
        self.fp += other.fp;
    }

    pub fn sensitivity(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    pub fn specificity(&self) -> Option<f64> {
        let n = self.tn + self.fp;
        (n > 0).then(|| self.tn as f64 / n as f64)
    }
}

/// Outcome of one sample for the risk split. `label` is `None` for samples
/// excluded from classification (censored before the horizon).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome<T> {
    pub time_days: T,
    pub event: bool,
    pub label: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskSplitReport<T> {
    pub predicted_hrm: SurvivalCurve<T>,
    pub predicted_lrm: SurvivalCurve<T>,
    pub full_cohort: SurvivalCurve<T>,
    pub median_months_hrm: Option<f64>,
    pub median_months_lrm: Option<f64>,
    pub median_months_all: Option<f64>,
    /// `None` when a predicted group is empty or has no events.
    pub log_rank: Option<LogRank>,
    pub confusion: Confusion,
    /// Samples left out of classification because of censoring.
    pub excluded: usize,
}

fn months(days: Option<f64>) -> Option<f64> {
    days.map(|d| d / DAYS_PER_MONTH)
}

/// KM curves for the predicted groups and the full cohort (including the
/// excluded samples), medians, log-rank, and confusion counts.
/// `predicted[i]` must be `Some` for every classified sample.
pub fn risk_split_report<T: Real>(
    predicted: &[Option<bool>],
    outcomes: &[Outcome<T>],
) -> Result<RiskSplitReport<T>> {
    if predicted.len() != outcomes.len() {
        return Err(Error::data("predictions and outcomes differ in length"));
    }
    let mut hrm = (Vec::new(), Vec::new());
    let mut lrm = (Vec::new(), Vec::new());
    let mut confusion = Confusion::default();
    let mut excluded = 0;
    for (p, o) in predicted.iter().zip(outcomes) {
        let Some(label) = o.label else {
            excluded += 1;
            continue;
        };
        let p = p.ok_or_else(|| Error::data("missing prediction for a classified sample"))?;
        let group = if p { &mut hrm } else { &mut lrm };
        group.0.push(o.time_days);
        group.1.push(o.event);
        confusion.add(&Confusion::from_predictions(&[p], &[label]));
    }
    let all_t: Vec<T> = outcomes.iter().map(|o| o.time_days).collect();
    let all_e: Vec<bool> = outcomes.iter().map(|o| o.event).collect();
    let predicted_hrm = kaplan_meier(&hrm.0, &hrm.1)?;
    let predicted_lrm = kaplan_meier(&lrm.0, &lrm.1)?;
    let full_cohort = kaplan_meier(&all_t, &all_e)?;
    let log_rank = if hrm.0.is_empty() || lrm.0.is_empty() {
        None
    } else {
        log_rank(&hrm.0, &hrm.1, &lrm.0, &lrm.1).ok()
    };
    Ok(RiskSplitReport {
        median_months_hrm: months(predicted_hrm.median.map(Real::f64)),
        median_months_lrm: months(predicted_lrm.median.map(Real::f64)),
        median_months_all: months(full_cohort.median.map(Real::f64)),
        predicted_hrm,
        predicted_lrm,
        full_cohort,
        log_rank,
        confusion,
        excluded,
    })
}
