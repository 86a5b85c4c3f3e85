//! Gray-level x size matrices: run lengths, zone sizes, dependence counts.

use std::collections::BTreeMap;

use super::{plogp, DIRECTIONS};
use crate::features::DiscretizedRoi;
use crate::scalar::Real;

pub const GLRLM_NAMES: [&str; 16] = [
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
];

pub const GLSZM_NAMES: [&str; 16] = [
    "SmallAreaEmphasis",
    "LargeAreaEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "ZonePercentage",
    "GrayLevelVariance",
    "ZoneVariance",
    "ZoneEntropy",
    "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
];

pub const GLDM_NAMES: [&str; 14] = [
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "GrayLevelNonUniformity",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "GrayLevelVariance",
    "DependenceVariance",
    "DependenceEntropy",
    "LowGrayLevelEmphasis",
    "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
];

/// Sparse counts keyed by (gray level, size).
type SizeMatrix = BTreeMap<(u32, usize), usize>;

/// The 16 statistics shared by run, zone and dependence matrices, in
/// GLRLM/GLSZM name order.
fn size_stats<T: Real>(m: &SizeMatrix, n_voxels: usize) -> [T; 16] {
    let total: usize = m.values().sum();
    let nt = T::of(total);
    let mut gl_marg: BTreeMap<u32, usize> = BTreeMap::new();
    let mut sz_marg: BTreeMap<usize, usize> = BTreeMap::new();
    for (&(i, j), &c) in m {
        *gl_marg.entry(i).or_default() += c;
        *sz_marg.entry(j).or_default() += c;
    }
    let mut s = [T::zero(); 16];
    let (mut mu_i, mut mu_j) = (T::zero(), T::zero());
    for (&(i, j), &c) in m {
        let (it, jt, ct) = (T::of(i as usize), T::of(j), T::of(c));
        let (i2, j2) = (it * it, jt * jt);
        s[0] += ct / j2;
        s[1] += ct * j2;
        s[10] += ct / i2;
        s[11] += ct * i2;
        s[12] += ct / (i2 * j2);
        s[13] += ct * i2 / j2;
        s[14] += ct * j2 / i2;
        s[15] += ct * i2 * j2;
        let p = ct / nt;
        mu_i += it * p;
        mu_j += jt * p;
        s[9] += plogp(p);
    }
    for (&(i, j), &c) in m {
        let p = T::of(c) / nt;
        s[7] += (T::of(i as usize) - mu_i).powi(2) * p;
        s[8] += (T::of(j) - mu_j).powi(2) * p;
    }
    for k in [0, 1, 10, 11, 12, 13, 14, 15] {
        s[k] /= nt;
    }
    let gln: T = gl_marg.values().map(|&c| T::of(c) * T::of(c)).sum();
    let szn: T = sz_marg.values().map(|&c| T::of(c) * T::of(c)).sum();
    s[2] = gln / nt;
    s[3] = gln / (nt * nt);
    s[4] = szn / nt;
    s[5] = szn / (nt * nt);
    s[6] = nt / T::of(n_voxels);
    s
}

fn runs_along<T: Real>(roi: &DiscretizedRoi<T>, d: [isize; 3]) -> SizeMatrix {
    let mut m = SizeMatrix::new();
    for (c, &l) in roi.coords.iter().zip(&roi.levels) {
        let [x, y, z] = c.map(|v| v as isize);
        if roi.level_at(x - d[0], y - d[1], z - d[2]) == l {
            continue;
        }
        let mut len = 1isize;
        while roi.level_at(x + len * d[0], y + len * d[1], z + len * d[2]) == l {
            len += 1;
        }
        *m.entry((l, len as usize)).or_default() += 1;
    }
    m
}

pub(crate) fn glrlm_matrices<T: Real>(roi: &DiscretizedRoi<T>) -> Vec<SizeMatrix> {
    DIRECTIONS.iter().map(|&d| runs_along(roi, d)).collect()
}

pub(crate) fn glrlm<T: Real>(roi: &DiscretizedRoi<T>) -> Vec<T> {
    let mut acc = [T::zero(); 16];
    let mats = glrlm_matrices(roi);
    for m in &mats {
        for (a, v) in acc.iter_mut().zip(size_stats::<T>(m, roi.len())) {
            *a += v;
        }
    }
    acc.iter().map(|&a| a / T::of(mats.len())).collect()
}

/// 26-connected same-level zones: (level, size) counts.
pub(crate) fn zones<T: Real>(roi: &DiscretizedRoi<T>) -> SizeMatrix {
    let [nx, ny, _] = roi.dims;
    let key = |c: [usize; 3]| c[0] + nx * (c[1] + ny * c[2]);
    let mut seen = vec![false; roi.dims.iter().product()];
    let mut m = SizeMatrix::new();
    let mut stack = Vec::new();
    for (c, &l) in roi.coords.iter().zip(&roi.levels) {
        if seen[key(*c)] {
            continue;
        }
        seen[key(*c)] = true;
        stack.push(*c);
        let mut size = 0usize;
        while let Some(p) = stack.pop() {
            size += 1;
            for dz in -1isize..=1 {
                for dy in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let q = [p[0] as isize + dx, p[1] as isize + dy, p[2] as isize + dz];
                        if roi.level_at(q[0], q[1], q[2]) != l {
                            continue;
                        }
                        let q = q.map(|v| v as usize);
                        if !seen[key(q)] {
                            seen[key(q)] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        *m.entry((l, size)).or_default() += 1;
    }
    m
}

pub(crate) fn glszm<T: Real>(roi: &DiscretizedRoi<T>) -> Vec<T> {
    size_stats::<T>(&zones(roi), roi.len()).to_vec()
}

/// Dependence size = 1 + number of 26-neighbours with the same level.
pub(crate) fn dependence<T: Real>(roi: &DiscretizedRoi<T>) -> SizeMatrix {
    let mut m = SizeMatrix::new();
    for (c, &l) in roi.coords.iter().zip(&roi.levels) {
        let [x, y, z] = c.map(|v| v as isize);
        let mut dep = 1usize;
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if (dx, dy, dz) != (0, 0, 0) && roi.level_at(x + dx, y + dy, z + dz) == l {
                        dep += 1;
                    }
                }
            }
        }
        *m.entry((l, dep)).or_default() += 1;
    }
    m
}

pub(crate) fn gldm<T: Real>(roi: &DiscretizedRoi<T>) -> Vec<T> {
    let s = size_stats::<T>(&dependence(roi), roi.len());
    // drop GrayLevelNonUniformityNormalized (3) and the percentage (6)
    [0, 1, 2, 4, 5, 7, 8, 9, 10, 11, 12, 13, 14, 15]
        .iter()
        .map(|&k| s[k])
        .collect()
}
