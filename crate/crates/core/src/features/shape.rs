use super::FeatureVector;
use crate::error::Result;
use crate::scalar::Real;
use crate::volume::{coords_of, RoiMask};

pub const SHAPE_NAMES: [&str; 14] = [
    "Volume",
    "SurfaceArea",
    "SurfaceVolumeRatio",
    "Sphericity",
    "SphericalDisproportion",
    "MajorAxisLength",
    "MinorAxisLength",
    "LeastAxisLength",
    "Elongation",
    "Flatness",
    "Maximum3DDiameter",
    "Maximum2DDiameterSlice",
    "Maximum2DDiameterColumn",
    "Maximum2DDiameterRow",
];

const FACE_STEPS: [[isize; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations, descending.
pub(crate) fn symmetric_eigenvalues<T: Real>(m: [[T; 3]; 3]) -> [T; 3] {
    let mut a = m;
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            let mut b = a;
            for k in 0..3 {
                b[k][p] = c * a[k][p] - s * a[k][q];
                b[k][q] = s * a[k][p] + c * a[k][q];
            }
            let mut r = b;
            for k in 0..3 {
                r[p][k] = c * b[p][k] - s * b[q][k];
                r[q][k] = s * b[p][k] + c * b[q][k];
            }
            r[p][q] = T::zero();
            r[q][p] = T::zero();
            a = r;
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    ev
}

/// Mask-only geometry. Surface area counts exposed voxel faces; diameters
/// and axis lengths use voxel centers in physical coordinates.
pub fn shape_features<T: Real>(mask: &RoiMask, spacing: [T; 3]) -> Result<FeatureVector<T>> {
    mask.require_nonempty()?;
    let dims = mask.dims();
    let inside = |c: [isize; 3]| {
        c.iter().zip(dims).all(|(&v, d)| v >= 0 && (v as usize) < d)
            && mask.contains(c[0] as usize, c[1] as usize, c[2] as usize)
    };
    let face_area = [
        spacing[1] * spacing[2],
        spacing[0] * spacing[2],
        spacing[0] * spacing[1],
    ];

    let mut n = 0usize;
    let mut area = T::zero();
    let mut boundary: Vec<[usize; 3]> = Vec::new();
    let mut points: Vec<[T; 3]> = Vec::new();
    for idx in mask.indices() {
        let c = coords_of(dims, idx);
        n += 1;
        let mut exposed = false;
        for step in FACE_STEPS {
            let nb = [0, 1, 2].map(|k| c[k] as isize + step[k]);
            if !inside(nb) {
                let axis = step.iter().position(|&s| s != 0).unwrap();
                area += face_area[axis];
                exposed = true;
            }
        }
        if exposed {
            boundary.push(c);
        }
        points.push([0, 1, 2].map(|k| T::of(c[k]) * spacing[k]));
    }
    let volume = T::of(n) * spacing[0] * spacing[1] * spacing[2];
    let pi = T::PI();
    let sphere = (T::lit(36.0) * pi * volume * volume).cbrt();
    let sphericity = sphere / area;

    let centroid = [0, 1, 2].map(|k| points.iter().map(|p| p[k]).sum::<T>() / T::of(n));
    let mut cov = [[T::zero(); 3]; 3];
    for p in &points {
        let d = [0, 1, 2].map(|k| p[k] - centroid[k]);
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= T::of(n);
        }
    }
    let ev = symmetric_eigenvalues(cov).map(|l| l.max(T::zero()));
    let four = T::lit(4.0);
    let (elongation, flatness) = if ev[0] > T::zero() {
        ((ev[1] / ev[0]).sqrt(), (ev[2] / ev[0]).sqrt())
    } else {
        (T::zero(), T::zero())
    };

    // Max distances over boundary voxels (hull vertices are always boundary voxels).
    let mut d3 = T::zero();
    let mut d2 = [T::zero(); 3];
    for (i, a) in boundary.iter().enumerate() {
        for b in &boundary[i + 1..] {
            let diff = [0, 1, 2].map(|k| (T::of(a[k]) - T::of(b[k])) * spacing[k]);
            let dist2 = diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2];
            d3 = d3.max(dist2);
            // plane families: same z (slice), same x (column), same y (row)
            for (slot, axis) in [(0usize, 2usize), (1, 0), (2, 1)] {
                if a[axis] == b[axis] {
                    d2[slot] = d2[slot].max(dist2);
                }
            }
        }
    }

    let mut fv = FeatureVector::new();
    let values = [
        volume,
        area,
        area / volume,
        sphericity,
        T::one() / sphericity,
        four * ev[0].sqrt(),
        four * ev[1].sqrt(),
        four * ev[2].sqrt(),
        elongation,
        flatness,
        d3.sqrt(),
        d2[0].sqrt(),
        d2[1].sqrt(),
        d2[2].sqrt(),
    ];
    for (name, v) in SHAPE_NAMES.iter().zip(values) {
        fv.push(*name, v);
    }
    Ok(fv)
}
