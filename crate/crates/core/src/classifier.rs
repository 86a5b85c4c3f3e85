//! Class-weighted linear soft-margin classifier.
//!
//! Minimizes `1/2 |w|^2 + (C/n) * sum_i c_{y_i} * hinge(y_i (w.x_i + b))` on
//! standardized features, with `c_pos = s * n_neg / n_pos` and `c_neg = 1`.
//! The per-sample cost is divided by `n`, so duplicating the training set
//! leaves the solution unchanged. The dual is solved by pairwise coordinate
//! ascent (two coordinates per step keep `sum_i alpha_i y_i = 0`, so the
//! bias stays unregularized) with second-order working-set selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::selection::FeatureMatrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Regularization strength `C`.
    pub c: f64,
    /// Extra weight `s` on the positive (high-risk) class.
    pub sensitivity_weight: f64,
    pub seed: u64,
    /// Budget in passes over the data; one pass = `n` pair updates.
    pub max_epochs: usize,
    /// Stop when the maximal KKT violation falls below this.
    pub tolerance: f64,
    /// Decision threshold: positive iff score >= threshold.
    pub threshold: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            sensitivity_weight: 2.0,
            seed: 0,
            max_epochs: 1000,
            tolerance: 1e-6,
            threshold: 0.0,
        }
    }
}

/// Raw solver output in the (already standardized) input space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution<T> {
    pub w: Vec<T>,
    pub b: T,
    pub alpha: Vec<T>,
    /// Final maximal KKT violation `m(alpha) - M(alpha)`.
    pub kkt_gap: T,
    pub iterations: usize,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solve the box- and equality-constrained dual for a linear kernel.
/// `costs[i]` is the upper bound on `alpha_i`.
pub fn solve_dual<T: Real>(
    rows: &[Vec<T>],
    positive: &[bool],
    costs: &[T],
    max_iter: usize,
    tolerance: T,
    order: &[usize],
) -> Result<LinearSolution<T>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    if n == 0 || positive.len() != n || costs.len() != n || order.len() != n {
        return Err(Error::data("solver inputs have inconsistent lengths"));
    }
    let y: Vec<T> = positive
        .iter()
        .map(|&p| if p { T::one() } else { -T::one() })
        .collect();
    let diag: Vec<T> = rows.iter().map(|r| dot(r, r)).collect();
    let mut alpha = vec![T::zero(); n];
    let mut w = vec![T::zero(); d];
    let mut grad = vec![-T::one(); n];
    let tau = T::lit(1e-12);
    let in_up = |t: usize, a: &[T]| (y[t] > T::zero() && a[t] < costs[t]) || (y[t] < T::zero() && a[t] > T::zero());
    let in_low = |t: usize, a: &[T]| (y[t] > T::zero() && a[t] > T::zero()) || (y[t] < T::zero() && a[t] < costs[t]);

    let mut iterations = 0;
    let mut gap;
    loop {
        // i: maximal -y G over I_up
        let mut gmax = T::neg_infinity();
        let mut i = usize::MAX;
        for &t in order {
            if in_up(t, &alpha) {
                let v = -y[t] * grad[t];
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        // j: second-order choice over I_low
        let mut gmin = T::infinity();
        let mut j = usize::MAX;
        let mut best_obj = T::infinity();
        for &t in order {
            if !in_low(t, &alpha) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = diag[i] + diag[t] - T::lit(2.0) * dot(&rows[i], &rows[t]);
                if a <= T::zero() {
                    a = tau;
                }
                let obj = -(b * b) / a;
                if obj <= best_obj {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        gap = if i == usize::MAX || gmin == T::infinity() {
            T::zero()
        } else {
            gmax - gmin
        };
        if gap < tolerance || j == usize::MAX || iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (ci, cj) = (costs[i], costs[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = diag[i] + diag[j] - T::lit(2.0) * dot(&rows[i], &rows[j]);
        if quad <= T::zero() {
            quad = tau;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > T::zero() {
                if aj < T::zero() {
                    aj = T::zero();
                    ai = diff;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < T::zero() {
                aj = T::zero();
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = ((ai - old_i) * y[i], (aj - old_j) * y[j]);
        for k in 0..d {
            w[k] += di * rows[i][k] + dj * rows[j][k];
        }
        for t in 0..n {
            grad[t] = y[t] * dot(&w, &rows[t]) - T::one();
        }
    }

    // bias from free vectors, else the midpoint of the feasible interval
    let mut ub = T::infinity();
    let mut lb = T::neg_infinity();
    let mut sum_free = T::zero();
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= costs[t] {
            if y[t] < T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= T::zero() {
            if y[t] > T::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum_free += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 {
        sum_free / T::of(n_free)
    } else {
        (ub + lb) / T::lit(2.0)
    };
    Ok(LinearSolution {
        w,
        b: -rho,
        alpha,
        kkt_gap: gap,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + DeserializeOwned")]
pub struct TrainedModel<T> {
    pub version: u32,
    pub feature_names: Vec<String>,
    pub mu: Vec<T>,
    pub sigma: Vec<T>,
    pub w: Vec<T>,
    pub b: T,
    pub class_weights: (T, T),
    pub threshold: T,
    pub config: SvmConfig,
    pub kkt_gap: T,
}

impl<T: Real> TrainedModel<T> {
    fn standardize_row(&self, raw: &[T]) -> Vec<T> {
        raw.iter()
            .zip(self.mu.iter().zip(&self.sigma))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    fn score_row(&self, raw: &[T]) -> T {
        dot(&self.w, &self.standardize_row(raw)) + self.b
    }

    pub fn with_threshold(mut self, threshold: T) -> Self {
        self.threshold = threshold;
        self
    }
}

fn column_stats<T: Real>(x: &FeatureMatrix<T>) -> (Vec<T>, Vec<T>) {
    (0..x.n_features())
        .map(|j| {
            let c = x.column(j);
            let m = crate::stats::mean(c);
            let s = crate::stats::population_variance(c, m).sqrt();
            (m, if s > T::zero() { s } else { T::one() })
        })
        .unzip()
}

/// Standardize with train statistics (a constant column gets sigma = 1) and
/// solve the weighted dual.
pub fn fit<T: Real>(x: &FeatureMatrix<T>, positive: &[bool], cfg: &SvmConfig) -> Result<TrainedModel<T>> {
    let n = x.n_samples();
    if positive.len() != n {
        return Err(Error::data("label length does not match samples"));
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::data("training labels contain a single class"));
    }
    if !(cfg.c > 0.0 && cfg.sensitivity_weight > 0.0 && cfg.tolerance > 0.0) {
        return Err(Error::config("C, sensitivity weight and tolerance must be positive"));
    }
    let (mu, sigma) = column_stats(x);
    let cols: Vec<usize> = (0..x.n_features()).collect();
    let rows: Vec<Vec<T>> = (0..n)
        .map(|i| {
            x.row(i, &cols)
                .into_iter()
                .zip(mu.iter().zip(&sigma))
                .map(|(v, (&m, &s))| (v - m) / s)
                .collect()
        })
        .collect();
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite standardized feature"));
    }
    let c_pos = T::lit(cfg.sensitivity_weight * n_neg as f64 / n_pos as f64);
    let c_neg = T::one();
    let per_sample = T::lit(cfg.c) / T::of(n);
    let costs: Vec<T> = positive
        .iter()
        .map(|&p| per_sample * if p { c_pos } else { c_neg })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let sol = solve_dual(
        &rows,
        positive,
        &costs,
        cfg.max_epochs.saturating_mul(n),
        T::lit(cfg.tolerance),
        &order,
    )?;
    if sol.w.iter().any(|v| !v.is_finite()) || !sol.b.is_finite() {
        return Err(Error::numerical("classifier produced non-finite parameters"));
    }
    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        feature_names: x.names().to_vec(),
        mu,
        sigma,
        w: sol.w,
        b: sol.b,
        class_weights: (c_pos, c_neg),
        threshold: T::lit(cfg.threshold),
        config: *cfg,
        kkt_gap: sol.kkt_gap,
    })
}

/// `w . standardize(x) + b`, with columns looked up by the model's names.
pub fn decision_scores<T: Real>(model: &TrainedModel<T>, x: &FeatureMatrix<T>) -> Result<Vec<T>> {
    let cols = model
        .feature_names
        .iter()
        .map(|n| {
            x.names()
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::data(format!("feature {n} missing from input")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..x.n_samples())
        .map(|i| model.score_row(&x.row(i, &cols)))
        .collect())
}

/// Positive (high-risk) iff score >= threshold.
pub fn predict<T: Real>(model: &TrainedModel<T>, x: &FeatureMatrix<T>) -> Result<Vec<bool>> {
    Ok(decision_scores(model, x)?
        .into_iter()
        .map(|s| s >= model.threshold)
        .collect())
}
