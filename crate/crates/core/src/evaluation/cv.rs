//! Monte-Carlo cross-validation with lesion-grouped, stratified splits.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{auc, Confusion};
use crate::classifier::{decision_scores, fit, SvmConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::selection::{mrmr_select, FeatureMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// MRMR refit on every training split.
    #[default]
    PerFold,
    /// MRMR once on all samples (leaks labels; for comparison only).
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub repeats: usize,
    pub test_fraction: f64,
    pub seed: u64,
    pub max_retries: usize,
    pub samples_per_feature: usize,
    pub selection: SelectionMode,
    /// Also report the AUC of all test scores pooled across repeats.
    pub pooled_auc: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            repeats: 100,
            test_fraction: 1.0 / 3.0,
            seed: 0,
            max_retries: 100,
            samples_per_feature: 10,
            selection: SelectionMode::PerFold,
            pooled_auc: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    pub split_seed: u64,
    pub retries: usize,
    pub auc: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: Confusion,
    pub selected: Vec<String>,
    #[serde(skip)]
    pub test_indices: Vec<usize>,
    #[serde(skip)]
    pub test_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: CvConfig,
    pub classifier: SvmConfig,
    pub repeats: Vec<RepeatOutcome>,
    pub mean_auc: f64,
    /// Sample standard deviation over repeats (0 for a single repeat).
    pub std_auc: f64,
    pub pooled_auc: Option<f64>,
    pub pooled_confusion: Confusion,
    /// Mean test-set score per sample over the repeats it was tested in.
    pub mean_test_scores: Vec<Option<f64>>,
}

/// Seed for repeat `r`, independent of scheduling.
fn split_seed(seed: u64, r: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64 + 1);
    rng.gen()
}

/// Lesion-level stratified split; stratum = lesion ever positive.
/// Returns (train, test) sample indices.
fn grouped_split(
    groups: &[usize],
    ever_positive: &BTreeMap<usize, bool>,
    test_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut test_groups = BTreeSet::new();
    for stratum in [true, false] {
        let mut ids: Vec<usize> = ever_positive
            .iter()
            .filter(|(_, &p)| p == stratum)
            .map(|(&g, _)| g)
            .collect();
        ids.shuffle(rng);
        let mut k = (ids.len() as f64 * test_fraction).round() as usize;
        if ids.len() >= 2 {
            k = k.clamp(1, ids.len() - 1);
        }
        test_groups.extend(ids.into_iter().take(k));
    }
    (0..groups.len()).partition(|&i| !test_groups.contains(&groups[i]))
}

fn has_both(idx: &[usize], labels: &[bool]) -> bool {
    idx.iter().any(|&i| labels[i]) && idx.iter().any(|&i| !labels[i])
}

fn as_targets<T: Real>(labels: &[bool], idx: &[usize]) -> Vec<T> {
    idx.iter()
        .map(|&i| if labels[i] { T::one() } else { T::zero() })
        .collect()
}

/// Repeated random train/test splits: per repeat, MRMR and the classifier
/// are fit on the training lesions and scored on the held-out lesions.
/// Repeats run in parallel; results do not depend on the thread count.
pub fn monte_carlo_cv<T: Real>(
    x: &FeatureMatrix<T>,
    labels: &[bool],
    groups: &[usize],
    cfg: &CvConfig,
    svm: &SvmConfig,
) -> Result<CvReport> {
    let n = x.n_samples();
    if labels.len() != n || groups.len() != n {
        return Err(Error::data("labels/groups do not match the feature matrix"));
    }
    if cfg.repeats == 0 || !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err(Error::config("repeats must be >= 1 and test fraction in (0, 1)"));
    }
    if cfg.samples_per_feature == 0 {
        return Err(Error::config("samples per feature must be >= 1"));
    }
    let mut ever_positive: BTreeMap<usize, bool> = BTreeMap::new();
    for (&g, &l) in groups.iter().zip(labels) {
        *ever_positive.entry(g).or_default() |= l;
    }
    let n_pos_groups = ever_positive.values().filter(|&&p| p).count();
    if n_pos_groups < 2 || ever_positive.len() - n_pos_groups < 2 {
        return Err(Error::data("cross-validation needs >= 2 lesions per class"));
    }
    let cap = |n_train: usize| (n_train / cfg.samples_per_feature).max(1);
    let global = match cfg.selection {
        SelectionMode::Global => {
            let all: Vec<usize> = (0..n).collect();
            Some(mrmr_select(x, &as_targets::<T>(labels, &all), cap(n))?.selected)
        }
        SelectionMode::PerFold => None,
    };

    let repeats = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| -> Result<RepeatOutcome> {
            let seed = split_seed(cfg.seed, r);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut retries = 0;
            let (train, test) = loop {
                let (train, test) = grouped_split(groups, &ever_positive, cfg.test_fraction, &mut rng);
                if has_both(&train, labels) && has_both(&test, labels) {
                    break (train, test);
                }
                retries += 1;
                if retries > cfg.max_retries {
                    return Err(Error::data(format!(
                        "repeat {r}: no split with both classes after {} retries",
                        cfg.max_retries
                    )));
                }
            };
            let train_groups: BTreeSet<usize> = train.iter().map(|&i| groups[i]).collect();
            if test.iter().any(|&i| train_groups.contains(&groups[i])) {
                return Err(Error::data(format!("repeat {r}: lesion straddles train and test")));
            }
            let x_train = x.select_rows(&train);
            let y_train: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
            let selected = match &global {
                Some(s) => s.clone(),
                None => mrmr_select(&x_train, &as_targets::<T>(labels, &train), cap(train.len()))?.selected,
            };
            let model = fit(&x_train.select_columns(&selected)?, &y_train, svm)?;
            let x_test = x.select_rows(&test).select_columns(&selected)?;
            let scores = decision_scores(&model, &x_test)?;
            let y_test: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
            let roc = auc(&scores, &y_test)?;
            let predicted: Vec<bool> = scores.iter().map(|&s| s >= model.threshold).collect();
            Ok(RepeatOutcome {
                split_seed: seed,
                retries,
                auc: roc.auc.f64(),
                n_train: train.len(),
                n_test: test.len(),
                confusion: Confusion::from_predictions(&predicted, &y_test),
                selected,
                test_indices: test,
                test_scores: scores.iter().map(|s| s.f64()).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let aucs: Vec<f64> = repeats.iter().map(|r| r.auc).collect();
    let mean_auc = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let std_auc = if aucs.len() > 1 {
        (aucs.iter().map(|a| (a - mean_auc).powi(2)).sum::<f64>() / (aucs.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut pooled_confusion = Confusion::default();
    let mut sums = vec![(0.0, 0usize); n];
    let (mut pooled_s, mut pooled_y) = (Vec::new(), Vec::new());
    for r in &repeats {
        pooled_confusion.add(&r.confusion);
        for (&i, &s) in r.test_indices.iter().zip(&r.test_scores) {
            sums[i].0 += s;
            sums[i].1 += 1;
            if cfg.pooled_auc {
                pooled_s.push(s);
                pooled_y.push(labels[i]);
            }
        }
    }
    let pooled_auc = if cfg.pooled_auc {
        Some(auc(&pooled_s, &pooled_y)?.auc)
    } else {
        None
    };
    Ok(CvReport {
        config: *cfg,
        classifier: *svm,
        mean_auc,
        std_auc,
        pooled_auc,
        pooled_confusion,
        mean_test_scores: sums
            .iter()
            .map(|&(s, c)| (c > 0).then(|| s / c as f64))
            .collect(),
        repeats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n_groups: usize, signal: f64) -> (FeatureMatrix<f64>, Vec<bool>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for g in 0..n_groups {
            let positive_group = g % 4 == 0;
            for t in 0..3 {
                let l = positive_group && t == 2;
                let base: f64 = rng.gen_range(-1.0..1.0);
                let noise: f64 = rng.gen_range(-1.0..1.0);
                rows.push(vec![base + if l { signal } else { 0.0 }, noise]);
                labels.push(l);
                groups.push(g);
            }
        }
        let x = FeatureMatrix::from_rows(vec!["sig".into(), "noise".into()], &rows).unwrap();
        (x, labels, groups)
    }

    #[test]
    fn strong_signal_and_determinism() {
        let (x, y, g) = toy(40, 5.0);
        let cfg = CvConfig { repeats: 10, seed: 3, ..Default::default() };
        let a = monte_carlo_cv(&x, &y, &g, &cfg, &SvmConfig::default()).unwrap();
        let b = monte_carlo_cv(&x, &y, &g, &cfg, &SvmConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.mean_auc > 0.95, "{}", a.mean_auc);
        assert_eq!(a.repeats.len(), 10);
    }

    #[test]
    fn splits_keep_lesions_whole() {
        let (_, y, g) = toy(20, 0.0);
        let mut ever = BTreeMap::new();
        for (&gi, &l) in g.iter().zip(&y) {
            *ever.entry(gi).or_insert(false) |= l;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let (train, test) = grouped_split(&g, &ever, 1.0 / 3.0, &mut rng);
            let tg: BTreeSet<usize> = train.iter().map(|&i| g[i]).collect();
            assert!(test.iter().all(|&i| !tg.contains(&g[i])));
            assert_eq!(train.len() + test.len(), g.len());
        }
    }

    #[test]
    fn too_few_positive_lesions() {
        let (x, mut y, g) = toy(8, 1.0);
        for (l, &gi) in y.iter_mut().zip(&g) {
            *l = *l && gi == 0;
        }
        let cfg = CvConfig { repeats: 2, ..Default::default() };
        assert!(monte_carlo_cv(&x, &y, &g, &cfg, &SvmConfig::default()).is_err());
    }
}
