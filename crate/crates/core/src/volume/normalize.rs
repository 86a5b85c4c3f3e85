use serde::{Deserialize, Serialize};

use super::{masked_values, RoiMask, VolumeImage};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::{mean, population_variance, quantile_sorted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizationMethod {
    ZScore,
    WhiteStripe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams<T> {
    pub method: NormalizationMethod,
    pub mu: T,
    pub sigma: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhiteStripeConfig {
    /// Histogram bin count over the masked intensity range.
    pub bins: usize,
    /// Quantile half-width of the stripe around the peak.
    pub tau: f64,
    /// Minimum voxels inside the stripe.
    pub min_stripe_voxels: usize,
}

impl Default for WhiteStripeConfig {
    fn default() -> Self {
        Self {
            bins: 256,
            tau: 0.05,
            min_stripe_voxels: 10,
        }
    }
}

const BINOMIAL7: [f64; 7] = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];

fn apply<T: Real>(
    img: &VolumeImage<T>,
    params: NormalizationParams<T>,
) -> Result<(VolumeImage<T>, NormalizationParams<T>)> {
    let out = img.map(|v| (v - params.mu) / params.sigma)?;
    Ok((out, params))
}

/// Standardize to zero mean, unit population std over the mask (or whole volume).
pub fn z_normalize<T: Real>(
    img: &VolumeImage<T>,
    mask: Option<&RoiMask>,
) -> Result<(VolumeImage<T>, NormalizationParams<T>)> {
    let reference = match mask {
        Some(m) => {
            m.require_nonempty()?;
            masked_values(img, m)?
        }
        None => img.voxels().to_vec(),
    };
    let mu = mean(&reference);
    let sigma = population_variance(&reference, mu).sqrt();
    if !(sigma > T::zero()) {
        return Err(Error::numerical("constant image: zero variance in reference region"));
    }
    apply(
        img,
        NormalizationParams {
            method: NormalizationMethod::ZScore,
            mu,
            sigma,
        },
    )
}

/// Binomially smoothed histogram of `values` over `[lo, hi]`.
pub(crate) fn smoothed_histogram<T: Real>(values: &[T], lo: T, hi: T, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0f64; bins];
    let width = hi - lo;
    for &v in values {
        let b = ((v - lo) / width * T::of(bins)).floor().to_usize().unwrap_or(0);
        counts[b.min(bins - 1)] += 1.0;
    }
    let half = BINOMIAL7.len() / 2;
    (0..bins)
        .map(|b| {
            BINOMIAL7
                .iter()
                .enumerate()
                .filter_map(|(k, w)| {
                    let src = (b + k).checked_sub(half)?;
                    counts.get(src).map(|c| c * w / 64.0)
                })
                .sum()
        })
        .collect()
}

/// White-matter-anchored normalization: the offset is the largest smoothed
/// histogram peak above the masked median, the scale is the std of voxels in
/// a quantile stripe around that peak.
pub fn white_stripe_normalize<T: Real>(
    img: &VolumeImage<T>,
    brain_mask: &RoiMask,
    config: &WhiteStripeConfig,
) -> Result<(VolumeImage<T>, NormalizationParams<T>)> {
    brain_mask.require_nonempty()?;
    if config.bins < 2 || !(config.tau > 0.0 && config.tau < 0.5) {
        return Err(Error::config("white stripe needs bins >= 2 and 0 < tau < 0.5"));
    }
    let mut values = masked_values(img, brain_mask)?;
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite voxels"));
    let lo = values[0];
    let hi = values[values.len() - 1];
    if !(hi > lo) {
        return Err(Error::numerical("constant image: no histogram peak"));
    }
    let median = quantile_sorted(&values, T::lit(0.5));
    let hist = smoothed_histogram(&values, lo, hi, config.bins);
    let width = (hi - lo) / T::of(config.bins);
    let center = |b: usize| lo + (T::of(b) + T::lit(0.5)) * width;

    let mut peak: Option<(usize, f64)> = None;
    for (b, &h) in hist.iter().enumerate() {
        if center(b) > median && h > 0.0 && peak.is_none_or(|(_, best)| h > best) {
            peak = Some((b, h));
        }
    }
    let (peak_bin, _) = peak.ok_or_else(|| Error::numerical("no histogram peak above the median"))?;
    let mu = center(peak_bin);

    let n = values.len();
    let below = values.partition_point(|&v| v <= mu);
    let p_peak = below as f64 / n as f64;
    let q_lo = quantile_sorted(&values, T::lit((p_peak - config.tau).max(0.0)));
    let q_hi = quantile_sorted(&values, T::lit((p_peak + config.tau).min(1.0)));
    let stripe: Vec<T> = values
        .iter()
        .copied()
        .filter(|&v| v >= q_lo && v <= q_hi)
        .collect();
    if stripe.len() < config.min_stripe_voxels {
        return Err(Error::numerical(format!(
            "white stripe holds {} voxels, need at least {}",
            stripe.len(),
            config.min_stripe_voxels
        )));
    }
    let sigma = population_variance(&stripe, mean(&stripe)).sqrt();
    if !(sigma > T::zero()) {
        return Err(Error::numerical("white stripe has zero variance"));
    }
    apply(
        img,
        NormalizationParams {
            method: NormalizationMethod::WhiteStripe,
            mu,
            sigma,
        },
    )
}
