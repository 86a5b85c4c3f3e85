//! Product-limit estimator and the two-group log-rank test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959963984540054;

/// One distinct observation time. `survival` is the value from this time on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint<T> {
    pub time: T,
    pub at_risk: usize,
    pub events: usize,
    pub censored: usize,
    pub survival: T,
    pub lower: T,
    pub upper: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve<T> {
    /// Distinct times in increasing order; S = 1 before the first one.
    pub points: Vec<SurvivalPoint<T>>,
    /// Smallest time with S <= 0.5, or `None` if never reached.
    pub median: Option<T>,
    pub n: usize,
}

impl<T: Real> SurvivalCurve<T> {
    pub fn survival_at(&self, t: T) -> T {
        self.points
            .iter()
            .take_while(|p| p.time <= t)
            .last()
            .map_or(T::one(), |p| p.survival)
    }
}

/// Distinct times with (at risk, events, censored) counts.
fn risk_table<T: Real>(times: &[T], events: &[bool]) -> Vec<(T, usize, usize, usize)> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());
    let mut out = Vec::new();
    let mut at_risk = times.len();
    let mut k = 0;
    while k < order.len() {
        let t = times[order[k]];
        let (mut d, mut c) = (0, 0);
        while k < order.len() && times[order[k]] == t {
            if events[order[k]] {
                d += 1;
            } else {
                c += 1;
            }
            k += 1;
        }
        out.push((t, at_risk, d, c));
        at_risk -= d + c;
    }
    out
}

fn check_times<T: Real>(times: &[T], events: &[bool]) -> Result<()> {
    if times.len() != events.len() {
        return Err(Error::data("times and event flags differ in length"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < T::zero()) {
        return Err(Error::data("survival times must be finite and >= 0"));
    }
    Ok(())
}

/// Kaplan-Meier estimate with Greenwood variance and a log-log 95% band.
pub fn kaplan_meier<T: Real>(times: &[T], events: &[bool]) -> Result<SurvivalCurve<T>> {
    check_times(times, events)?;
    let mut s = T::one();
    let mut greenwood = T::zero();
    let mut median = None;
    let z = T::lit(Z95);
    let points = risk_table(times, events)
        .into_iter()
        .map(|(time, n, d, c)| {
            if d > 0 {
                s = s * T::of(n - d) / T::of(n);
                greenwood += if n > d {
                    T::of(d) / (T::of(n) * T::of(n - d))
                } else {
                    T::infinity()
                };
                if median.is_none() && s <= T::lit(0.5) {
                    median = Some(time);
                }
            }
            let (lower, upper) = if s <= T::zero() || s >= T::one() || !greenwood.is_finite() {
                (s, s)
            } else {
                let ln = s.ln();
                let half = z * (greenwood / (ln * ln)).sqrt();
                (s.powf(half.exp()), s.powf((-half).exp()))
            };
            SurvivalPoint {
                time,
                at_risk: n,
                events: d,
                censored: c,
                survival: s,
                lower,
                upper,
            }
        })
        .collect();
    Ok(SurvivalCurve {
        points,
        median,
        n: times.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRank {
    pub chi2: f64,
    pub p: f64,
    pub observed_a: usize,
    pub expected_a: f64,
    pub observed_b: usize,
    pub expected_b: f64,
}

/// Two-group log-rank test; p from a chi-square with one degree of freedom.
pub fn log_rank<T: Real>(
    times_a: &[T],
    events_a: &[bool],
    times_b: &[T],
    events_b: &[bool],
) -> Result<LogRank> {
    check_times(times_a, events_a)?;
    check_times(times_b, events_b)?;
    if times_a.is_empty() || times_b.is_empty() {
        return Err(Error::data("log-rank needs two nonempty groups"));
    }
    let times: Vec<T> = times_a.iter().chain(times_b).copied().collect();
    let events: Vec<bool> = events_a.iter().chain(events_b).copied().collect();
    if !events.iter().any(|&e| e) {
        return Err(Error::data("log-rank needs at least one event"));
    }
    let in_a: Vec<bool> = (0..times.len()).map(|i| i < times_a.len()).collect();
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&x, &y| times[x].partial_cmp(&times[y]).unwrap());
    let (mut na, mut nb) = (times_a.len() as f64, times_b.len() as f64);
    let (mut oa, mut ob) = (0usize, 0usize);
    // sum of O_a - E_a, written symmetrically: (d_a n_b - d_b n_a) / n
    let mut diff = 0.0;
    let mut var = 0.0;
    let (mut ea, mut eb) = (0.0, 0.0);
    let mut k = 0;
    while k < order.len() {
        let t = times[order[k]];
        let (mut da, mut db, mut ca, mut cb) = (0.0, 0.0, 0.0, 0.0);
        while k < order.len() && times[order[k]] == t {
            let i = order[k];
            match (in_a[i], events[i]) {
                (true, true) => da += 1.0,
                (true, false) => ca += 1.0,
                (false, true) => db += 1.0,
                (false, false) => cb += 1.0,
            }
            k += 1;
        }
        let n = na + nb;
        let d = da + db;
        if d > 0.0 {
            diff += (da * nb - db * na) / n;
            ea += d * na / n;
            eb += d * nb / n;
            if n > 1.0 {
                var += d * na * nb * (n - d) / (n * n * (n - 1.0));
            }
        }
        oa += da as usize;
        ob += db as usize;
        na -= da + ca;
        nb -= db + cb;
    }
    let chi2 = if var > 0.0 { diff * diff / var } else { 0.0 };
    let p = if var > 0.0 {
        ChiSquared::new(1.0)
            .map_err(|e| Error::numerical(e.to_string()))?
            .sf(chi2)
    } else {
        1.0
    };
    Ok(LogRank {
        chi2,
        p,
        observed_a: oa,
        expected_a: ea,
        observed_b: ob,
        expected_b: eb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_events() {
        let km = kaplan_meier(&[1.0, 2.0, 3.0], &[true; 3]).unwrap();
        let s: Vec<f64> = km.points.iter().map(|p| p.survival).collect();
        assert_eq!(s, vec![2.0 / 3.0, 2.0 / 3.0 * 1.0 / 2.0, 0.0]);
        assert_eq!(km.median, Some(2.0));
        assert_eq!(km.survival_at(0.5), 1.0);
    }

    #[test]
    fn all_censored() {
        let km = kaplan_meier(&[1.0, 2.0], &[false, false]).unwrap();
        assert!(km.points.iter().all(|p| p.survival == 1.0));
        assert_eq!(km.median, None);
    }

    #[test]
    fn late_censoring_is_local() {
        let a = kaplan_meier(&[1.0, 2.0, 5.0], &[true, true, false]).unwrap();
        let b = kaplan_meier(&[1.0, 2.0, 9.0], &[true, true, false]).unwrap();
        assert_eq!(a.survival_at(2.0), b.survival_at(2.0));
    }

    #[test]
    fn band_brackets_estimate() {
        let t: Vec<f64> = (1..=12).map(f64::from).collect();
        let e: Vec<bool> = (0..12).map(|i| i % 3 != 0).collect();
        let km = kaplan_meier(&t, &e).unwrap();
        for p in &km.points {
            assert!(p.lower <= p.survival && p.survival <= p.upper);
            assert!(p.lower >= 0.0 && p.upper <= 1.0);
        }
        assert!(kaplan_meier(&[-1.0], &[true]).is_err());
    }

    #[test]
    fn log_rank_examples() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let e = [true, false, true, true];
        let same = log_rank(&t, &e, &t, &e).unwrap();
        assert!(same.chi2.abs() < 1e-12 && (same.p - 1.0).abs() < 1e-9);

        let a = vec![1.0; 20];
        let b = vec![10.0; 20];
        let ev = vec![true; 20];
        let r = log_rank(&a, &ev, &b, &ev).unwrap();
        assert!(r.p < 0.001);
        let swapped = log_rank(&b, &ev, &a, &ev).unwrap();
        assert_eq!(r.chi2, swapped.chi2);
        assert!(log_rank(&a, &[false; 20], &b, &[false; 20]).is_err());
    }
}
