use super::discretize::bin_level;
use super::FeatureVector;
use crate::error::Result;
use crate::scalar::Real;
use crate::stats::{mean, population_variance, quantile_sorted, sort_finite};
use crate::volume::{masked_values, RoiMask, VolumeImage};

pub const FIRSTORDER_NAMES: [&str; 16] = [
    "Mean",
    "Median",
    "Minimum",
    "Maximum",
    "Range",
    "Variance",
    "Skewness",
    "Kurtosis",
    "Energy",
    "Entropy",
    "Uniformity",
    "RootMeanSquared",
    "MeanAbsoluteDeviation",
    "10Percentile",
    "90Percentile",
    "InterquartileRange",
];

/// Intensity statistics over the ROI. Entropy (base 2) and Uniformity use a
/// fixed bin-count histogram; skewness and kurtosis are 0 for a flat ROI.
pub fn firstorder_features<T: Real>(
    img: &VolumeImage<T>,
    mask: &RoiMask,
    bins: usize,
) -> Result<FeatureVector<T>> {
    mask.require_nonempty()?;
    let mut v = masked_values(img, mask)?;
    sort_finite(&mut v);
    let n = T::of(v.len());
    let mu = mean(&v);
    let var = population_variance(&v, mu);
    let (min, max) = (v[0], v[v.len() - 1]);
    let m3 = v.iter().map(|&x| (x - mu).powi(3)).sum::<T>() / n;
    let m4 = v.iter().map(|&x| (x - mu).powi(4)).sum::<T>() / n;
    let (skew, kurt) = if var > T::zero() {
        (m3 / var.powf(T::lit(1.5)), m4 / (var * var))
    } else {
        (T::zero(), T::zero())
    };
    let energy = v.iter().map(|&x| x * x).sum::<T>();

    let mut counts = vec![0usize; bins];
    for &x in &v {
        counts[bin_level(x, min, max, bins) as usize - 1] += 1;
    }
    let mut entropy = T::zero();
    let mut uniformity = T::zero();
    for &c in counts.iter().filter(|&&c| c > 0) {
        let p = T::of(c) / n;
        entropy -= p * p.log2();
        uniformity += p * p;
    }
    let q = |p: f64| quantile_sorted(&v, T::lit(p));
    let mad = v.iter().map(|&x| (x - mu).abs()).sum::<T>() / n;

    let values = [
        mu,
        q(0.5),
        min,
        max,
        max - min,
        var,
        skew,
        kurt,
        energy,
        entropy,
        uniformity,
        (energy / n).sqrt(),
        mad,
        q(0.1),
        q(0.9),
        q(0.75) - q(0.25),
    ];
    let mut fv = FeatureVector::new();
    for (name, val) in FIRSTORDER_NAMES.iter().zip(values) {
        fv.push(*name, val);
    }
    Ok(fv)
}
