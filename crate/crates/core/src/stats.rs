//! Small descriptive-statistics helpers.

use crate::scalar::Real;

pub fn mean<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::zero();
    }
    v.iter().copied().sum::<T>() / T::of(v.len())
}

/// Population variance around a given mean.
pub fn population_variance<T: Real>(v: &[T], mu: T) -> T {
    if v.is_empty() {
        return T::zero();
    }
    v.iter().map(|&x| (x - mu) * (x - mu)).sum::<T>() / T::of(v.len())
}

/// Linearly interpolated quantile of ascending-sorted data, `p` in [0, 1].
pub fn quantile_sorted<T: Real>(sorted: &[T], p: T) -> T {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let p = p.max(T::zero()).min(T::one());
    let pos = p * T::of(sorted.len() - 1);
    let lo = pos.floor().to_usize().unwrap_or(0);
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - T::of(lo);
    if frac == T::zero() {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn sort_finite<T: Real>(v: &mut [T]) {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
}
