//! Pearson correlation and greedy max-relevance min-redundancy selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Column-major sample x feature matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    names: Vec<String>,
    n_samples: usize,
    columns: Vec<Vec<T>>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<T>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::data("feature names and columns differ in count"));
        }
        let n_samples = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n_samples) {
            return Err(Error::data("ragged feature columns"));
        }
        let mut sorted: Vec<&String> = names.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::data("duplicate feature names"));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::numerical("non-finite feature value"));
        }
        Ok(Self {
            names,
            n_samples,
            columns,
        })
    }

    /// Build from row-major data.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<T>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != names.len()) {
            return Err(Error::data("row length does not match feature count"));
        }
        let columns = (0..names.len())
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        let mut m = Self::from_columns(names, columns)?;
        m.n_samples = rows.len();
        Ok(m)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[T]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
    }

    /// Row `i` restricted to `cols`.
    pub fn row(&self, i: usize, cols: &[usize]) -> Vec<T> {
        cols.iter().map(|&j| self.columns[j][i]).collect()
    }

    /// Subset of samples, preserving column order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            n_samples: rows.len(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
        }
    }

    /// Subset of named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<Self> {
        let columns = names
            .iter()
            .map(|n| {
                self.column_by_name(n)
                    .map(<[T]>::to_vec)
                    .ok_or_else(|| Error::data(format!("unknown feature {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            names: names.to_vec(),
            n_samples: self.n_samples,
            columns,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation<T> {
    pub r: T,
    /// Set when either input is constant; `r` is then 0.
    pub degenerate: bool,
}

/// Pearson linear correlation coefficient, clamped to [-1, 1].
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<Correlation<T>> {
    if x.len() != y.len() {
        return Err(Error::data(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::data("pearson needs at least 2 samples"));
    }
    let n = T::of(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Ok(Correlation {
            r: T::zero(),
            degenerate: true,
        });
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(Correlation {
        r: r.max(-T::one()).min(T::one()),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCorrelation {
    pub name: String,
    pub r: f64,
    pub degenerate: bool,
}

/// Per-feature signed correlation to the label, ranked by |r| (ties by name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub entries: Vec<RankedCorrelation>,
}

impl CorrelationReport {
    pub fn compute<T: Real>(x: &FeatureMatrix<T>, y: &[T]) -> Result<Self> {
        let mut entries = (0..x.n_features())
            .map(|j| {
                let c = pearson(x.column(j), y)?;
                Ok(RankedCorrelation {
                    name: x.names()[j].clone(),
                    r: c.r.f64(),
                    degenerate: c.degenerate,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        entries.sort_by(|a, b| {
            b.r.abs()
                .partial_cmp(&a.r.abs())
                .unwrap()
                .then_with(|| a.name.cmp(&b.name))
        });
        Ok(Self { entries })
    }

    /// Top `n` entries whose names start with `prefix`.
    pub fn top_with_prefix(&self, prefix: &str, n: usize) -> Vec<&RankedCorrelation> {
        self.entries
            .iter()
            .filter(|e| e.name.starts_with(prefix))
            .take(n)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub name: String,
    pub relevance: f64,
    pub redundancy: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<String>,
    pub trace: Vec<SelectionStep>,
    pub cap: usize,
}

/// One feature per ten samples, at least one.
pub fn cap_for_samples(n_samples: usize) -> usize {
    (n_samples / 10).max(1)
}

/// Scores closer than this are ties, resolved by feature name.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Centered, unit-norm copy of a column; zero for a constant column.
fn unit_centered<T: Real>(col: &[T]) -> Vec<T> {
    let n = T::of(col.len());
    let m = col.iter().copied().sum::<T>() / n;
    let centered: Vec<T> = col.iter().map(|&v| v - m).collect();
    let norm = centered.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm == T::zero() {
        return vec![T::zero(); col.len()];
    }
    centered.into_iter().map(|v| v / norm).collect()
}

fn abs_dot<T: Real>(a: &[T], b: &[T]) -> T {
    let r: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    r.abs().min(T::one())
}

/// Greedy MRMR with the difference criterion
/// `score(f) = |r(f, y)| - mean_{s in S} |r(f, s)|`. The first pick maximizes
/// relevance; selection stops at `k` or once every remaining score is <= 0.
pub fn mrmr_select<T: Real>(x: &FeatureMatrix<T>, y: &[T], k: usize) -> Result<SelectionResult> {
    if x.n_features() == 0 {
        return Err(Error::data("empty feature matrix"));
    }
    if k < 1 {
        return Err(Error::config("selection cap must be >= 1"));
    }
    if x.n_samples() < 2 {
        return Err(Error::data("selection needs at least 2 samples"));
    }
    if y.len() != x.n_samples() {
        return Err(Error::data("label length does not match samples"));
    }
    let units: Vec<Vec<T>> = (0..x.n_features())
        .into_par_iter()
        .map(|j| unit_centered(x.column(j)))
        .collect();
    let uy = unit_centered(y);
    let relevance: Vec<T> = units.par_iter().map(|u| abs_dot(u, &uy)).collect();
    let mut redundancy_sum = vec![T::zero(); units.len()];
    let mut chosen = vec![false; units.len()];
    let mut result = SelectionResult {
        selected: Vec::new(),
        trace: Vec::new(),
        cap: k,
    };
    let tie = T::lit(TIE_TOLERANCE);
    let names = x.names();
    while result.selected.len() < k.min(units.len()) {
        let s = result.selected.len();
        let mut best: Option<(usize, T)> = None;
        for j in (0..units.len()).filter(|&j| !chosen[j]) {
            let red = if s == 0 {
                T::zero()
            } else {
                redundancy_sum[j] / T::of(s)
            };
            let score = relevance[j] - red;
            best = match best {
                None => Some((j, score)),
                Some((b, bs)) => {
                    if score > bs + tie || ((score - bs).abs() <= tie && names[j] < names[b]) {
                        Some((j, score))
                    } else {
                        Some((b, bs))
                    }
                }
            };
        }
        let (j, score) = best.expect("at least one candidate");
        if s > 0 && score <= T::zero() {
            break;
        }
        chosen[j] = true;
        result.trace.push(SelectionStep {
            name: names[j].clone(),
            relevance: relevance[j].f64(),
            redundancy: (relevance[j] - score).f64(),
            score: score.f64(),
        });
        result.selected.push(names[j].clone());
        let uj = &units[j];
        let updates: Vec<(usize, T)> = (0..units.len())
            .into_par_iter()
            .filter(|&i| !chosen[i])
            .map(|i| (i, abs_dot(&units[i], uj)))
            .collect();
        for (i, v) in updates {
            redundancy_sum[i] += v;
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        let r = |x: &[f64], y: &[f64]| pearson(x, y).unwrap().r;
        assert!((r(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
        assert!((r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert!((r(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn pearson_degenerate_and_errors() {
        let c = pearson(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.r, 0.0);
        assert!(c.degenerate);
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn cap_rule() {
        assert_eq!(cap_for_samples(932), 93);
        assert_eq!(cap_for_samples(5), 1);
    }

    fn matrix(cols: Vec<(&str, Vec<f64>)>) -> FeatureMatrix<f64> {
        let (n, c): (Vec<_>, Vec<_>) = cols.into_iter().map(|(a, b)| (a.to_string(), b)).unzip();
        FeatureMatrix::from_columns(n, c).unwrap()
    }

    #[test]
    fn label_column_is_selected_first() {
        let y = vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let x = matrix(vec![
            ("a", vec![0.3, 0.1, 0.5, 0.2, 0.9, 0.4]),
            ("label", y.clone()),
            ("b", vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
        ]);
        let s = mrmr_select(&x, &y, 2).unwrap();
        assert_eq!(s.selected[0], "label");
        assert!((s.trace[0].relevance - 1.0).abs() < 1e-12);
        assert!(s.selected.len() <= 2);
    }

    #[test]
    fn errors() {
        let x = matrix(vec![("a", vec![1.0, 2.0])]);
        assert!(mrmr_select(&x, &[0.0, 1.0], 0).is_err());
        assert!(mrmr_select(&x, &[0.0], 1).is_err());
        let empty = FeatureMatrix::<f64>::from_columns(vec![], vec![]).unwrap();
        assert!(mrmr_select(&empty, &[], 1).is_err());
    }

    #[test]
    fn ties_break_by_name() {
        let y = vec![0.0, 1.0, 0.0, 1.0];
        let col = vec![0.0, 1.0, 0.2, 0.9];
        let x = matrix(vec![("zeta", col.clone()), ("alpha", col)]);
        let s = mrmr_select(&x, &y, 2).unwrap();
        assert_eq!(s.selected, vec!["alpha"]);
    }

    #[test]
    fn report_ranks_by_magnitude() {
        let y = vec![0.0, 1.0, 0.0, 1.0];
        let x = matrix(vec![
            ("weak", vec![1.0, 1.1, 1.05, 0.9]),
            ("neg", vec![1.0, 0.0, 1.0, 0.1]),
        ]);
        let rep = CorrelationReport::compute(&x, &y).unwrap();
        assert_eq!(rep.entries[0].name, "neg");
        assert!(rep.entries[0].r < 0.0);
    }
}
