//! Independent brute-force oracles shared by the integration and acceptance
//! tests. Each one enumerates its definition directly over all voxel pairs,
//! runs, zones or sample pairs, with no shared code from the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random ROI on a grid of at most 5x5x5: (dims, levels with 0 = outside, ng).
pub fn random_roi(rng: &mut ChaCha8Rng) -> ([usize; 3], Vec<u32>, u32) {
    let dims = [rng.gen_range(1..=5), rng.gen_range(1..=5), rng.gen_range(1..=5)];
    let ng: u32 = rng.gen_range(1..=4);
    let n: usize = dims.iter().product();
    let fill = rng.gen_range(0.3..=1.0);
    let mut grid: Vec<u32> = (0..n)
        .map(|_| if rng.gen_bool(fill) { rng.gen_range(1..=ng) } else { 0 })
        .collect();
    if grid.iter().all(|&l| l == 0) {
        let k = rng.gen_range(0..n);
        grid[k] = rng.gen_range(1..=ng);
    }
    (dims, grid, ng)
}

/// ROI voxels as (x, y, z, level).
fn voxels(dims: [usize; 3], grid: &[u32]) -> Vec<([i64; 3], u32)> {
    let mut out = Vec::new();
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let l = grid[x + dims[0] * (y + dims[1] * z)];
                if l > 0 {
                    out.push(([x as i64, y as i64, z as i64], l));
                }
            }
        }
    }
    out
}

/// The 13 offsets of a 26-neighbourhood modulo sign.
pub fn half_neighbourhood() -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for dx in -1i64..=1 {
        for dy in -1i64..=1 {
            for dz in -1i64..=1 {
                let d = [dx, dy, dz];
                let first = d.iter().find(|&&c| c != 0);
                if first.is_some_and(|&c| c > 0) {
                    out.push(d);
                }
            }
        }
    }
    out
}

fn sub(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn chebyshev(a: [i64; 3], b: [i64; 3]) -> i64 {
    sub(a, b).iter().map(|c| c.abs()).max().unwrap()
}

fn h(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Union-find component sizes over `n` items joined by `edges`.
fn component_sizes(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut size: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        size.entry(r).or_insert((i, 0)).1 += 1;
    }
    // (representative member, size)
    size.values().copied().collect()
}

/// GLCM features for one dense symmetric count matrix, by textbook formulas.
fn glcm_from_counts(c: &[Vec<f64>]) -> BTreeMap<&'static str, f64> {
    let ng = c.len();
    let total: f64 = c.iter().flatten().sum();
    let p: Vec<Vec<f64>> = c.iter().map(|r| r.iter().map(|v| v / total).collect()).collect();
    let g = |k: usize| (k + 1) as f64;
    let px: Vec<f64> = (0..ng).map(|i| (0..ng).map(|j| p[i][j]).sum()).collect();
    let py: Vec<f64> = (0..ng).map(|j| (0..ng).map(|i| p[i][j]).sum()).collect();
    let mux: f64 = (0..ng).map(|i| g(i) * px[i]).sum();
    let muy: f64 = (0..ng).map(|j| g(j) * py[j]).sum();
    let sx = (0..ng).map(|i| (g(i) - mux).powi(2) * px[i]).sum::<f64>().sqrt();
    let sy = (0..ng).map(|j| (g(j) - muy).powi(2) * py[j]).sum::<f64>().sqrt();
    let pairs = || (0..ng).flat_map(move |i| (0..ng).map(move |j| (i, j)));
    let sum_over = |f: &dyn Fn(usize, usize) -> f64| pairs().map(|(i, j)| f(i, j) * p[i][j]).sum::<f64>();

    let mut pdiff = vec![0.0; ng];
    let mut psum = vec![0.0; 2 * ng];
    for (i, j) in pairs() {
        pdiff[i.abs_diff(j)] += p[i][j];
        psum[i + j] += p[i][j];
    }
    let da: f64 = pdiff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let hx: f64 = px.iter().map(|&v| h(v)).sum();
    let hy: f64 = py.iter().map(|&v| h(v)).sum();
    let hxy: f64 = pairs().map(|(i, j)| h(p[i][j])).sum();
    let hxy1: f64 = pairs()
        .filter(|&(i, j)| px[i] * py[j] > 0.0)
        .map(|(i, j)| -p[i][j] * (px[i] * py[j]).log2())
        .sum();
    let hxy2: f64 = pairs().map(|(i, j)| h(px[i] * py[j])).sum();
    let n = ng as f64;

    let mut f = BTreeMap::new();
    f.insert("Autocorrelation", sum_over(&|i, j| g(i) * g(j)));
    f.insert("JointAverage", mux);
    f.insert("ClusterProminence", sum_over(&|i, j| (g(i) + g(j) - mux - muy).powi(4)));
    f.insert("ClusterShade", sum_over(&|i, j| (g(i) + g(j) - mux - muy).powi(3)));
    f.insert("ClusterTendency", sum_over(&|i, j| (g(i) + g(j) - mux - muy).powi(2)));
    f.insert("Contrast", sum_over(&|i, j| (g(i) - g(j)).powi(2)));
    f.insert(
        "Correlation",
        if sx * sy > 0.0 {
            sum_over(&|i, j| (g(i) - mux) * (g(j) - muy)) / (sx * sy)
        } else {
            1.0
        },
    );
    f.insert("DifferenceAverage", da);
    f.insert("DifferenceEntropy", pdiff.iter().map(|&v| h(v)).sum());
    f.insert(
        "DifferenceVariance",
        pdiff.iter().enumerate().map(|(k, v)| (k as f64 - da).powi(2) * v).sum(),
    );
    f.insert("JointEnergy", sum_over(&|i, j| p[i][j]));
    f.insert("JointEntropy", hxy);
    f.insert("Imc1", if hx.max(hy) > 0.0 { (hxy - hxy1) / hx.max(hy) } else { 0.0 });
    f.insert("Imc2", (1.0 - (-2.0 * (hxy2 - hxy)).exp()).max(0.0).sqrt());
    f.insert("Idm", sum_over(&|i, j| 1.0 / (1.0 + (g(i) - g(j)).powi(2))));
    f.insert("Idmn", sum_over(&|i, j| 1.0 / (1.0 + (g(i) - g(j)).powi(2) / (n * n))));
    f.insert("Id", sum_over(&|i, j| 1.0 / (1.0 + (g(i) - g(j)).abs())));
    f.insert("Idn", sum_over(&|i, j| 1.0 / (1.0 + (g(i) - g(j)).abs() / n)));
    f.insert(
        "InverseVariance",
        sum_over(&|i, j| if i == j { 0.0 } else { 1.0 / (g(i) - g(j)).powi(2) }),
    );
    f.insert("MaximumProbability", p.iter().flatten().copied().fold(0.0, f64::max));
    f.insert("SumEntropy", psum.iter().map(|&v| h(v)).sum());
    f.insert("SumSquares", sx * sx);
    f
}

/// Features of a dense (gray level x size) count matrix; `names` picks the
/// naming of the size axis.
fn size_matrix_features(
    m: &[Vec<f64>],
    n_voxels: usize,
    names: &SizeNames,
) -> BTreeMap<String, f64> {
    let total: f64 = m.iter().flatten().sum();
    let cells = || {
        m.iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &c)| ((i + 1) as f64, j as f64, c)))
            .filter(|&(_, _, c)| c > 0.0)
    };
    let avg = |f: &dyn Fn(f64, f64) -> f64| cells().map(|(i, j, c)| f(i, j) * c).sum::<f64>() / total;
    let gl: Vec<f64> = m.iter().map(|r| r.iter().sum()).collect();
    let sz: Vec<f64> = (0..m[0].len()).map(|j| m.iter().map(|r| r[j]).sum()).collect();
    let mi = avg(&|i, _| i);
    let mj = avg(&|_, j| j);
    let mut f = BTreeMap::new();
    let (sm, lg) = (names.small, names.large);
    let mut put = |k: &str, v: f64| {
        f.insert(k.to_string(), v);
    };
    put(&format!("{sm}Emphasis"), avg(&|_, j| 1.0 / (j * j)));
    put(&format!("{lg}Emphasis"), avg(&|_, j| j * j));
    put("GrayLevelNonUniformity", gl.iter().map(|v| v * v).sum::<f64>() / total);
    put(
        "GrayLevelNonUniformityNormalized",
        gl.iter().map(|v| v * v).sum::<f64>() / (total * total),
    );
    put(&format!("{}NonUniformity", names.nonuni), sz.iter().map(|v| v * v).sum::<f64>() / total);
    put(
        &format!("{}NonUniformityNormalized", names.nonuni),
        sz.iter().map(|v| v * v).sum::<f64>() / (total * total),
    );
    put(names.percentage, total / n_voxels as f64);
    put("GrayLevelVariance", avg(&|i, _| (i - mi).powi(2)));
    put(&format!("{}Variance", names.unit), avg(&|_, j| (j - mj).powi(2)));
    put(&format!("{}Entropy", names.unit), cells().map(|(_, _, c)| h(c / total)).sum());
    put(&format!("LowGrayLevel{}Emphasis", names.glunit), avg(&|i, _| 1.0 / (i * i)));
    put(&format!("HighGrayLevel{}Emphasis", names.glunit), avg(&|i, _| i * i));
    put(&format!("{sm}LowGrayLevelEmphasis"), avg(&|i, j| 1.0 / (i * i * j * j)));
    put(&format!("{sm}HighGrayLevelEmphasis"), avg(&|i, j| i * i / (j * j)));
    put(&format!("{lg}LowGrayLevelEmphasis"), avg(&|i, j| j * j / (i * i)));
    put(&format!("{lg}HighGrayLevelEmphasis"), avg(&|i, j| i * i * j * j));
    f
}

struct SizeNames {
    small: &'static str,
    large: &'static str,
    unit: &'static str,
    nonuni: &'static str,
    glunit: &'static str,
    percentage: &'static str,
}

const RUN: SizeNames = SizeNames {
    small: "ShortRun",
    large: "LongRun",
    unit: "Run",
    nonuni: "RunLength",
    glunit: "Run",
    percentage: "RunPercentage",
};
const ZONE: SizeNames = SizeNames {
    small: "SmallArea",
    large: "LargeArea",
    unit: "Zone",
    nonuni: "SizeZone",
    glunit: "Zone",
    percentage: "ZonePercentage",
};
const DEP: SizeNames = SizeNames {
    small: "SmallDependence",
    large: "LargeDependence",
    unit: "Dependence",
    nonuni: "Dependence",
    glunit: "",
    percentage: "DependencePercentage",
};

fn dense(ng: u32, entries: &[(u32, usize)], max_size: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; max_size + 1]; ng as usize];
    for &(l, s) in entries {
        m[l as usize - 1][s] += 1.0;
    }
    m
}

/// Every texture feature by brute force, keyed `family-Name`.
pub fn texture_oracle(dims: [usize; 3], grid: &[u32], ng: u32) -> BTreeMap<String, f64> {
    let vox = voxels(dims, grid);
    let n = vox.len();
    let mut out = BTreeMap::new();

    // GLCM: all ordered voxel pairs at each offset, both orientations counted.
    let dirs = half_neighbourhood();
    let mut glcm_acc: BTreeMap<&str, f64> = BTreeMap::new();
    let mut used = 0;
    for d in &dirs {
        let mut c = vec![vec![0.0; ng as usize]; ng as usize];
        for (a, la) in &vox {
            for (b, lb) in &vox {
                let diff = sub(*b, *a);
                if diff == *d || diff == [-d[0], -d[1], -d[2]] {
                    c[*la as usize - 1][*lb as usize - 1] += 1.0;
                }
            }
        }
        if c.iter().flatten().all(|&v| v == 0.0) {
            continue;
        }
        used += 1;
        for (k, v) in glcm_from_counts(&c) {
            *glcm_acc.entry(k).or_default() += v;
        }
    }
    for name in GLCM_ORDER {
        let v = if used > 0 { glcm_acc[name] / used as f64 } else { 0.0 };
        out.insert(format!("glcm-{name}"), v);
    }

    // GLRLM: runs are connected components of same-level voxels linked by +-d.
    let mut glrlm_acc: BTreeMap<String, f64> = BTreeMap::new();
    for d in &dirs {
        let mut edges = Vec::new();
        for (i, (a, la)) in vox.iter().enumerate() {
            for (j, (b, lb)) in vox.iter().enumerate() {
                if la == lb && sub(*b, *a) == *d {
                    edges.push((i, j));
                }
            }
        }
        let runs: Vec<(u32, usize)> =
            component_sizes(n, &edges).into_iter().map(|(rep, s)| (vox[rep].1, s)).collect();
        for (k, v) in size_matrix_features(&dense(ng, &runs, n), n, &RUN) {
            *glrlm_acc.entry(k).or_default() += v / dirs.len() as f64;
        }
    }
    for (k, v) in glrlm_acc {
        out.insert(format!("glrlm-{k}"), v);
    }

    // GLSZM: 26-connected same-level components.
    let mut edges = Vec::new();
    for (i, (a, la)) in vox.iter().enumerate() {
        for (j, (b, lb)) in vox.iter().enumerate().skip(i + 1) {
            if la == lb && chebyshev(*a, *b) == 1 {
                edges.push((i, j));
            }
        }
    }
    let zones: Vec<(u32, usize)> =
        component_sizes(n, &edges).into_iter().map(|(rep, s)| (vox[rep].1, s)).collect();
    for (k, v) in size_matrix_features(&dense(ng, &zones, n), n, &ZONE) {
        out.insert(format!("glszm-{k}"), v);
    }

    // GLDM: one plus the number of same-level voxels at Chebyshev distance 1.
    let deps: Vec<(u32, usize)> = vox
        .iter()
        .map(|(a, la)| {
            let k = vox.iter().filter(|(b, lb)| lb == la && chebyshev(*a, *b) == 1).count();
            (*la, k + 1)
        })
        .collect();
    for (k, v) in size_matrix_features(&dense(ng, &deps, 27), n, &DEP) {
        if k != "GrayLevelNonUniformityNormalized" && k != "DependencePercentage" {
            out.insert(format!("gldm-{k}"), v);
        }
    }
    out
}

const GLCM_ORDER: [&str; 22] = [
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

/// Single-level undecimated periodic wavelet subband by direct triple sum:
/// out[x,y,z] = sum_{a,b,c} fx[a] fy[b] fz[c] v[(x-a), (y-b), (z-c)] (mod dims).
pub fn direct_subband(
    dims: [usize; 3],
    v: &[f64],
    filters: [&[f64]; 3],
) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let wrap = |p: usize, k: usize, n: usize| (p + n * (k + 1) - k) % n;
    let mut out = vec![0.0; v.len()];
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let mut acc = 0.0;
                for (a, fa) in filters[0].iter().enumerate() {
                    for (b, fb) in filters[1].iter().enumerate() {
                        for (c, fc) in filters[2].iter().enumerate() {
                            let (sx, sy, sz) = (wrap(x, a, nx), wrap(y, b, ny), wrap(z, c, nz));
                            acc += fa * fb * fc * v[sx + nx * (sy + ny * sz)];
                        }
                    }
                }
                out[x + nx * (y + ny * z)] = acc;
            }
        }
    }
    out
}

/// Pearson r written straight from its definition with a two-pass mean.
pub fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// Greedy MRMR by exhaustive scoring at every step: relevance minus mean
/// redundancy of absolute correlations, ties within 1e-12 broken by name.
pub fn mrmr_oracle(names: &[String], cols: &[Vec<f64>], y: &[f64], k: usize) -> Vec<String> {
    let rel: Vec<f64> = cols.iter().map(|c| pearson_direct(c, y).abs()).collect();
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < k.min(cols.len()) {
        let mut best: Option<(usize, f64)> = None;
        for f in 0..cols.len() {
            if chosen.contains(&f) {
                continue;
            }
            let score = if chosen.is_empty() {
                rel[f]
            } else {
                let red: f64 = chosen.iter().map(|&s| pearson_direct(&cols[f], &cols[s]).abs()).sum();
                rel[f] - red / chosen.len() as f64
            };
            best = match best {
                None => Some((f, score)),
                Some((b, bs)) => {
                    if score > bs + 1e-12 || ((score - bs).abs() <= 1e-12 && names[f] < names[b]) {
                        Some((f, score))
                    } else {
                        Some((b, bs))
                    }
                }
            };
        }
        let (f, score) = best.unwrap();
        if !chosen.is_empty() && score <= 0.0 {
            break;
        }
        chosen.push(f);
    }
    chosen.into_iter().map(|f| names[f].clone()).collect()
}

/// Fraction of (positive, negative) pairs ranked correctly, ties worth half.
pub fn concordance(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] && !labels[j] {
                den += 1.0;
                if si > sj {
                    num += 1.0;
                } else if si == sj {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}

/// Product-limit table: (time, at risk, events, survival) at each event time.
pub fn km_table(times: &[f64], events: &[bool]) -> Vec<(f64, usize, usize, f64)> {
    let mut distinct: Vec<f64> = times
        .iter()
        .zip(events)
        .filter(|(_, &e)| e)
        .map(|(&t, _)| t)
        .collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let mut s = 1.0;
    distinct
        .into_iter()
        .map(|t| {
            let at_risk = times.iter().filter(|&&u| u >= t).count();
            let d = times.iter().zip(events).filter(|(&u, &e)| e && u == t).count();
            s *= 1.0 - d as f64 / at_risk as f64;
            (t, at_risk, d, s)
        })
        .collect()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
