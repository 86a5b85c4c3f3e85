use super::{plogp, DIRECTIONS};
use crate::features::DiscretizedRoi;
use crate::scalar::Real;

pub const GLCM_NAMES: [&str; 22] = [
    "Autocorrelation",
    "JointAverage",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "JointEnergy",
    "JointEntropy",
    "Imc1",
    "Imc2",
    "Idm",
    "Idmn",
    "Id",
    "Idn",
    "InverseVariance",
    "MaximumProbability",
    "SumEntropy",
    "SumSquares",
];

/// Symmetric co-occurrence counts for one offset, row-major `ng x ng`.
pub(crate) fn cooccurrence<T: Real>(roi: &DiscretizedRoi<T>, d: [isize; 3]) -> Vec<f64> {
    let ng = roi.ng as usize;
    let mut m = vec![0.0; ng * ng];
    for (c, &l) in roi.coords.iter().zip(&roi.levels) {
        let nb = roi.level_at(
            c[0] as isize + d[0],
            c[1] as isize + d[1],
            c[2] as isize + d[2],
        );
        if nb > 0 {
            let (i, j) = (l as usize - 1, nb as usize - 1);
            m[i * ng + j] += 1.0;
            m[j * ng + i] += 1.0;
        }
    }
    m
}

#[allow(clippy::needless_range_loop)]
fn direction_features<T: Real>(counts: &[f64], ng: usize) -> [T; 22] {
    let total: f64 = counts.iter().sum();
    let p: Vec<T> = counts.iter().map(|&c| T::lit(c / total)).collect();
    let at = |i: usize, j: usize| p[i * ng + j];
    let lvl = |i: usize| T::of(i + 1);
    let ngt = T::of(ng);

    let mut px = vec![T::zero(); ng];
    let mut py = vec![T::zero(); ng];
    let mut psum = vec![T::zero(); 2 * ng + 1];
    let mut pdiff = vec![T::zero(); ng];
    for i in 0..ng {
        for j in 0..ng {
            let v = at(i, j);
            px[i] += v;
            py[j] += v;
            psum[i + j + 2] += v;
            pdiff[i.abs_diff(j)] += v;
        }
    }
    let mu_x: T = (0..ng).map(|i| lvl(i) * px[i]).sum();
    let mu_y: T = (0..ng).map(|j| lvl(j) * py[j]).sum();
    let var_x: T = (0..ng).map(|i| (lvl(i) - mu_x).powi(2) * px[i]).sum();
    let var_y: T = (0..ng).map(|j| (lvl(j) - mu_y).powi(2) * py[j]).sum();

    let mut autocorr = T::zero();
    let mut prom = T::zero();
    let mut shade = T::zero();
    let mut tend = T::zero();
    let mut contrast = T::zero();
    let mut energy = T::zero();
    let mut hxy = T::zero();
    let mut hxy1 = T::zero();
    let mut hxy2 = T::zero();
    let mut max_p = T::zero();
    for i in 0..ng {
        for j in 0..ng {
            let v = at(i, j);
            let (a, b) = (lvl(i), lvl(j));
            autocorr += a * b * v;
            let s = a + b - mu_x - mu_y;
            prom += s.powi(4) * v;
            shade += s.powi(3) * v;
            tend += s * s * v;
            contrast += (a - b) * (a - b) * v;
            energy += v * v;
            hxy += plogp(v);
            let pxy = px[i] * py[j];
            if pxy > T::zero() {
                hxy1 -= v * pxy.log2();
                hxy2 += plogp(pxy);
            }
            max_p = max_p.max(v);
        }
    }
    let sd = (var_x * var_y).sqrt();
    let correlation = if sd > T::zero() {
        (autocorr - mu_x * mu_y) / sd
    } else {
        T::one()
    };
    let hx: T = px.iter().map(|&v| plogp(v)).sum();
    let hy: T = py.iter().map(|&v| plogp(v)).sum();
    let hmax = hx.max(hy);
    let imc1 = if hmax > T::zero() {
        (hxy - hxy1) / hmax
    } else {
        T::zero()
    };
    let imc2_arg = T::one() - (T::lit(-2.0) * (hxy2 - hxy)).exp();
    let imc2 = imc2_arg.max(T::zero()).sqrt();

    let mut diff_avg = T::zero();
    let mut diff_ent = T::zero();
    let mut idm = T::zero();
    let mut idmn = T::zero();
    let mut id = T::zero();
    let mut idn = T::zero();
    let mut inv_var = T::zero();
    for (k, &v) in pdiff.iter().enumerate() {
        let kt = T::of(k);
        diff_avg += kt * v;
        diff_ent += plogp(v);
        idm += v / (T::one() + kt * kt);
        idmn += v / (T::one() + kt * kt / (ngt * ngt));
        id += v / (T::one() + kt);
        idn += v / (T::one() + kt / ngt);
        if k > 0 {
            inv_var += v / (kt * kt);
        }
    }
    let diff_var: T = pdiff
        .iter()
        .enumerate()
        .map(|(k, &v)| (T::of(k) - diff_avg).powi(2) * v)
        .sum();
    let sum_ent: T = psum.iter().map(|&v| plogp(v)).sum();

    [
        autocorr, mu_x, prom, shade, tend, contrast, correlation, diff_avg, diff_ent, diff_var,
        energy, hxy, imc1, imc2, idm, idmn, id, idn, inv_var, max_p, sum_ent, var_x,
    ]
}

/// Direction-averaged GLCM features; directions without pairs are skipped and
/// an ROI with no neighbouring pairs yields zeros.
pub(crate) fn features<T: Real>(roi: &DiscretizedRoi<T>) -> Vec<T> {
    let ng = roi.ng as usize;
    let mut acc = [T::zero(); 22];
    let mut used = 0usize;
    for d in DIRECTIONS {
        let counts = cooccurrence(roi, d);
        if counts.iter().all(|&c| c == 0.0) {
            continue;
        }
        for (a, v) in acc.iter_mut().zip(direction_features::<T>(&counts, ng)) {
            *a += v;
        }
        used += 1;
    }
    if used > 0 {
        for a in acc.iter_mut() {
            *a /= T::of(used);
        }
    }
    acc.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roi_1d(levels: &[u32], ng: u32) -> DiscretizedRoi<f64> {
        DiscretizedRoi::from_grid([levels.len(), 1, 1], [1.0; 3], levels.to_vec(), ng).unwrap()
    }

    #[test]
    fn two_level_line() {
        // only the +x direction has pairs: (1,1), (1,2), (2,2) -> symmetric counts
        let f = features(&roi_1d(&[1, 1, 2, 2], 2));
        // P = [[2,1],[1,2]] / 6
        let contrast = 2.0 / 6.0;
        assert!((f[5] - contrast).abs() < 1e-12);
        assert!((f[1] - 1.5).abs() < 1e-12);
        assert!((f[19] - 2.0 / 6.0).abs() < 1e-12);
        assert!((f[10] - (4.0 + 1.0 + 1.0 + 4.0) / 36.0).abs() < 1e-12);
    }

    #[test]
    fn single_voxel_is_zero() {
        let f = features(&roi_1d(&[1], 2));
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flat_region_correlation_convention() {
        let f = features(&roi_1d(&[2, 2, 2], 4));
        assert_eq!(f[6], 1.0);
        assert_eq!(f[5], 0.0);
        assert_eq!(f[19], 1.0);
    }
}
