//! Per-set evaluation and the on-disk report bundle.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{Dataset, PipelineConfig};
use crate::cohort::{block_prefixes, FeatureSetSpec};
use crate::error::{Error, Result};
use crate::evaluation::{
    auc, km_csv, km_svg, monte_carlo_cv, risk_split_report, roc_svg, CvReport, Outcome, RiskSplitReport,
    RocCurve,
};
use crate::selection::CorrelationReport;

/// Rows shown per block in the correlation ranking.
const TOP_PER_BLOCK: usize = 10;

pub const TABLE1_HEADER: &str =
    "set,blocks,n_samples,n_lesions,n_features,mean_auc,std_auc,pooled_auc,sensitivity,specificity";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetResult {
    pub spec: FeatureSetSpec,
    pub n_samples: usize,
    pub n_lesions: usize,
    pub n_features: usize,
    pub skipped_lesions: Vec<String>,
    pub cv: CvReport,
    pub risk: RiskSplitReport<f64>,
    /// ROC of the per-sample mean test scores.
    pub roc: Option<RocCurve<f64>>,
    pub correlations: CorrelationReport,
}

/// Cross-validate a dataset, then split the cohort by each sample's mean
/// held-out score against the threshold.
pub fn evaluate_set(ds: &Dataset, cfg: &PipelineConfig) -> Result<SetResult> {
    let svm = cfg.svm();
    let cv = monte_carlo_cv(&ds.matrix, &ds.labels, &ds.groups, &cfg.cv_config(), &svm)?;
    let mut predicted = Vec::new();
    let mut outcomes: Vec<Outcome<f64>> = Vec::new();
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for (i, s) in cv.mean_test_scores.iter().enumerate() {
        if let Some(s) = *s {
            predicted.push(Some(s >= svm.threshold));
            outcomes.push(ds.outcomes[i]);
            scores.push(s);
            labels.push(ds.labels[i]);
        }
    }
    for e in &ds.excluded {
        predicted.push(None);
        outcomes.push(*e);
    }
    let risk = risk_split_report(&predicted, &outcomes)?;
    let roc = auc(&scores, &labels).ok();
    let y: Vec<f64> = ds.labels.iter().map(|&l| f64::from(u8::from(l))).collect();
    let correlations = CorrelationReport::compute(&ds.matrix, &y)?;
    Ok(SetResult {
        spec: ds.spec,
        n_samples: ds.labels.len(),
        n_lesions: ds.n_lesions(),
        n_features: ds.matrix.n_features(),
        skipped_lesions: ds.skipped_lesions.clone(),
        cv,
        risk,
        roc,
        correlations,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:?}"))
}

pub fn table1_csv(cfg: &PipelineConfig, results: &[SetResult]) -> String {
    let mut out = format!("# config: {}\n{TABLE1_HEADER}\n", cfg.to_json_line());
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:?},{:?},{},{},{}",
            r.spec.id,
            r.spec.describe(),
            r.n_samples,
            r.n_lesions,
            r.n_features,
            r.cv.mean_auc,
            r.cv.std_auc,
            fmt_opt(r.cv.pooled_auc),
            fmt_opt(r.cv.pooled_confusion.sensitivity()),
            fmt_opt(r.cv.pooled_confusion.specificity()),
        );
    }
    out
}

fn correlations_csv(cfg: &PipelineConfig, r: &SetResult) -> String {
    let mut out = format!("# config: {}\nblock,rank,feature,r,degenerate\n", cfg.to_json_line());
    for prefix in block_prefixes(&r.spec) {
        let block = prefix.trim_end_matches('-');
        for (k, e) in r.correlations.top_with_prefix(prefix, TOP_PER_BLOCK).iter().enumerate() {
            let _ = writeln!(out, "{block},{},{},{:?},{}", k + 1, e.name, e.r, e.degenerate);
        }
    }
    out
}

#[derive(Serialize)]
struct Wrapped<'a, T> {
    config: &'a PipelineConfig,
    feature_set: FeatureSetSpec,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct RiskBody<'a> {
    risk_split: &'a RiskSplitReport<f64>,
}

#[derive(Serialize)]
struct CvBody<'a> {
    n_samples: usize,
    n_lesions: usize,
    n_features: usize,
    skipped_lesions: &'a [String],
    cv: &'a CvReport,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn json<T: Serialize>(cfg: &PipelineConfig, spec: FeatureSetSpec, body: &T) -> String {
    let w = Wrapped { config: cfg, feature_set: spec, body };
    serde_json::to_string_pretty(&w).expect("report serializes") + "\n"
}

fn svg_with_config(cfg: &PipelineConfig, svg: String) -> String {
    // `--` is not allowed inside XML comments
    let c = cfg.to_json_line().replace("--", "- -");
    svg.replacen('\n', &format!("\n<!-- config: {c} -->\n"), 1)
}

/// Write `table1_auc.csv` and one directory per set with the CV report,
/// risk split, survival table/plot, ROC plot and correlation ranking.
pub fn write_bundle(dir: &Path, cfg: &PipelineConfig, results: &[SetResult]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("table1_auc.csv"), &table1_csv(cfg, results))?;
    for r in results {
        let sub = dir.join(format!("set{}", r.spec.id));
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        let body = CvBody {
            n_samples: r.n_samples,
            n_lesions: r.n_lesions,
            n_features: r.n_features,
            skipped_lesions: &r.skipped_lesions,
            cv: &r.cv,
        };
        write(&sub.join("cv_report.json"), &json(cfg, r.spec, &body))?;
        write(&sub.join("risk_split.json"), &json(cfg, r.spec, &RiskBody { risk_split: &r.risk }))?;
        let curves = [
            ("predicted HRM", &r.risk.predicted_hrm),
            ("predicted LRM", &r.risk.predicted_lrm),
            ("all", &r.risk.full_cohort),
        ];
        write(
            &sub.join("km.csv"),
            &format!("# config: {}\n{}", cfg.to_json_line(), km_csv(&curves)),
        )?;
        let title = format!("Set {}: freedom from progression", r.spec.id);
        write(&sub.join("km.svg"), &svg_with_config(cfg, km_svg(&title, &curves)))?;
        if let Some(roc) = &r.roc {
            let title = format!("Set {}: ROC of mean held-out scores", r.spec.id);
            write(&sub.join("roc.svg"), &svg_with_config(cfg, roc_svg(&title, roc)))?;
        }
        write(&sub.join("correlations.csv"), &correlations_csv(cfg, r))?;
    }
    Ok(())
}
