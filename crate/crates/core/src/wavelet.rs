//! Single-level undecimated separable 3D wavelet transform with periodic
//! boundaries. All eight subbands keep the source grid, so ROI masks stay
//! aligned.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::volume::VolumeImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WaveletKind {
    #[default]
    Haar,
    Coif1,
}

impl std::str::FromStr for WaveletKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(Self::Haar),
            "coif1" => Ok(Self::Coif1),
            other => Err(Error::config(format!("unknown wavelet {other:?}"))),
        }
    }
}

/// Analysis filter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletBank<T> {
    pub name: String,
    pub low: Vec<T>,
    pub high: Vec<T>,
}

// Coiflet-1 decomposition low-pass taps.
const COIF1_LOW: [f64; 6] = [
    -0.015_655_728_135_464_54,
    -0.072_732_619_512_853_9,
    0.384_864_846_864_202_86,
    0.852_572_020_212_255_4,
    0.337_897_662_457_809_2,
    -0.072_732_619_512_853_9,
];

impl<T: Real> WaveletBank<T> {
    /// Build from a low-pass filter; the high-pass is the quadrature mirror
    /// `high[k] = (-1)^k * low[L-1-k]`.
    pub fn from_low(name: &str, low: Vec<T>) -> Result<Self> {
        if low.is_empty() {
            return Err(Error::config("wavelet filter must be nonempty"));
        }
        let l = low.len();
        let high = (0..l)
            .map(|k| {
                let v = low[l - 1 - k];
                if k % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Ok(Self {
            name: name.to_string(),
            low,
            high,
        })
    }

    pub fn haar() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self::from_low("haar", vec![h, h]).expect("nonempty")
    }

    pub fn coif1() -> Self {
        Self::from_low("coif1", COIF1_LOW.iter().map(|&c| T::lit(c)).collect()).expect("nonempty")
    }

    pub fn builtin(kind: WaveletKind) -> Self {
        match kind {
            WaveletKind::Haar => Self::haar(),
            WaveletKind::Coif1 => Self::coif1(),
        }
    }

    fn filter(&self, band: Band) -> &[T] {
        match band {
            Band::L => &self.low,
            Band::H => &self.high,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    L,
    H,
}

/// Subband labels; letter k is the filter applied along axis k.
pub const SUBBAND_LABELS: [&str; 8] = ["LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH"];

fn bands_of(label: &str) -> [Band; 3] {
    let mut out = [Band::L; 3];
    for (slot, c) in out.iter_mut().zip(label.chars()) {
        *slot = if c == 'H' { Band::H } else { Band::L };
    }
    out
}

/// The eight subband volumes keyed by label.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet<T> {
    bands: BTreeMap<String, VolumeImage<T>>,
}

impl<T: Real> SubbandSet<T> {
    pub fn from_map(bands: BTreeMap<String, VolumeImage<T>>) -> Result<Self> {
        for label in SUBBAND_LABELS {
            if !bands.contains_key(label) {
                return Err(Error::data(format!("missing subband {label}")));
            }
        }
        if bands.len() != SUBBAND_LABELS.len() {
            return Err(Error::data("unexpected subband labels"));
        }
        let dims = bands["LLL"].dims();
        if bands.values().any(|b| b.dims() != dims) {
            return Err(Error::data("subband dims differ"));
        }
        Ok(Self { bands })
    }

    pub fn get(&self, label: &str) -> Option<&VolumeImage<T>> {
        self.bands.get(label)
    }

    /// Subbands in `SUBBAND_LABELS` order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &VolumeImage<T>)> {
        SUBBAND_LABELS.iter().map(move |l| (*l, &self.bands[*l]))
    }

    pub fn into_map(self) -> BTreeMap<String, VolumeImage<T>> {
        self.bands
    }
}

fn strides(dims: [usize; 3]) -> [usize; 3] {
    [1, dims[0], dims[0] * dims[1]]
}

/// Periodic convolution along one axis: y[n] = sum_k f[k] x[(n - k) mod N].
fn convolve_axis<T: Real>(data: &[T], dims: [usize; 3], axis: usize, f: &[T]) -> Vec<T> {
    let n = dims[axis];
    let stride = strides(dims)[axis];
    let mut out = vec![T::zero(); data.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let pos = (idx / stride) % n;
        let base = idx - pos * stride;
        let mut acc = T::zero();
        for (k, &fk) in f.iter().enumerate() {
            let src = (pos + n * (k / n + 1) - k % n) % n;
            acc += fk * data[base + src * stride];
        }
        *o = acc;
    }
    out
}

/// Adjoint of [`convolve_axis`]: y[n] = sum_k f[k] x[(n + k) mod N].
fn correlate_axis<T: Real>(data: &[T], dims: [usize; 3], axis: usize, f: &[T]) -> Vec<T> {
    let n = dims[axis];
    let stride = strides(dims)[axis];
    let mut out = vec![T::zero(); data.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let pos = (idx / stride) % n;
        let base = idx - pos * stride;
        let mut acc = T::zero();
        for (k, &fk) in f.iter().enumerate() {
            acc += fk * data[base + (pos + k) % n * stride];
        }
        *o = acc;
    }
    out
}

pub fn decompose<T: Real>(img: &VolumeImage<T>, bank: &WaveletBank<T>) -> Result<SubbandSet<T>> {
    if img.is_empty() {
        return Err(Error::data("cannot decompose an empty volume"));
    }
    if bank.low.is_empty() || bank.high.is_empty() {
        return Err(Error::config("wavelet filters must be nonempty"));
    }
    let dims = img.dims();
    // Axis-0 split, then refine along axes 1 and 2; intermediates are shared.
    let mut level: Vec<(String, Vec<T>)> = vec![(String::new(), img.voxels().to_vec())];
    for axis in 0..3 {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (prefix, data) in &level {
            for (c, band) in [('L', Band::L), ('H', Band::H)] {
                let mut label = prefix.clone();
                label.push(c);
                next.push((label, convolve_axis(data, dims, axis, bank.filter(band))));
            }
        }
        level = next;
    }
    let mut bands = BTreeMap::new();
    for (label, data) in level {
        bands.insert(label, img.with_voxels(data)?);
    }
    SubbandSet::from_map(bands)
}

/// Inverse undecimated transform: the average of the adjoint-filtered subbands.
pub fn reconstruct<T: Real>(subbands: &SubbandSet<T>, bank: &WaveletBank<T>) -> Result<VolumeImage<T>> {
    let first = subbands
        .get("LLL")
        .ok_or_else(|| Error::data("missing subband LLL"))?;
    let dims = first.dims();
    let mut acc = vec![T::zero(); first.len()];
    for (label, band) in subbands.iter() {
        if band.dims() != dims {
            return Err(Error::data(format!("subband {label} dims mismatch")));
        }
        let b = bands_of(label);
        let mut data = band.voxels().to_vec();
        for axis in (0..3).rev() {
            data = correlate_axis(&data, dims, axis, bank.filter(b[axis]));
        }
        for (a, d) in acc.iter_mut().zip(data) {
            *a += d;
        }
    }
    let eighth = T::lit(0.125);
    first.with_voxels(acc.into_iter().map(|v| v * eighth).collect())
}
