//! Radiomic feature extraction: shape, first-order statistics and the
//! GLCM / GLRLM / GLSZM / GLDM texture families.
//!
//! Feature names follow `<image-tag>-<filter>-<class>-<feature>`, e.g.
//! `follow-up-mr-wavelet-LHL-firstorder-Range`. [`extract_all`] emits names
//! without the image tag; [`FeatureVector::prefixed`] adds it.

mod discretize;
mod firstorder;
mod shape;
pub mod texture;

pub use discretize::{discretize, DiscretizedRoi};
pub use firstorder::{firstorder_features, FIRSTORDER_NAMES};
pub use shape::{shape_features, SHAPE_NAMES};
pub use texture::{texture_features, TextureFamily, DIRECTIONS};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::volume::{RoiMask, VolumeImage};
use crate::wavelet::{decompose, WaveletBank, WaveletKind};

/// Ordered, uniquely named feature values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector<T> {
    entries: Vec<(String, T)>,
}

impl<T: Real> FeatureVector<T> {
    pub fn new() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    pub fn from_entries(entries: Vec<(String, T)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (name, v) in &entries {
            if !seen.insert(name.as_str()) {
                return Err(Error::data(format!("duplicate feature name {name}")));
            }
            if !v.is_finite() {
                return Err(Error::numerical(format!("feature {name} is not finite")));
            }
        }
        Ok(Self { entries })
    }

    pub(crate) fn push(&mut self, name: impl Into<String>, value: T) {
        self.entries.push((name.into(), value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }

    /// Prepend `<tag>-` to every name.
    pub fn prefixed(&self, tag: &str) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| (format!("{tag}-{n}"), *v))
                .collect(),
        }
    }

    /// Append another vector, rejecting name collisions.
    pub fn extend(&mut self, other: FeatureVector<T>) -> Result<()> {
        let existing: HashSet<&str> = self.entries.iter().map(|(n, _)| n.as_str()).collect();
        if let Some((n, _)) = other.entries.iter().find(|(n, _)| existing.contains(n.as_str())) {
            return Err(Error::data(format!("duplicate feature name {n}")));
        }
        self.entries.extend(other.entries);
        Ok(())
    }

    /// Check finiteness of every value.
    pub fn validate(&self) -> Result<()> {
        match self.entries.iter().find(|(_, v)| !v.is_finite()) {
            Some((n, _)) => Err(Error::numerical(format!("feature {n} is not finite"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    /// Fixed bin count for texture discretization.
    pub bin_count: usize,
    /// Fixed bin count for the first-order entropy/uniformity histogram.
    pub firstorder_bins: usize,
    /// Wavelet bank for the subband re-extraction; `None` disables it.
    pub wavelet: Option<WaveletKind>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            bin_count: 32,
            firstorder_bins: 32,
            wavelet: Some(WaveletKind::Haar),
        }
    }
}

/// Number of features per class.
pub const SHAPE_COUNT: usize = 14;
pub const FIRSTORDER_COUNT: usize = 16;
/// Per-image feature count for the configured roster.
pub fn feature_count(config: &ExtractionConfig) -> usize {
    let intensity: usize =
        FIRSTORDER_COUNT + TextureFamily::ALL.iter().map(|f| f.feature_count()).sum::<usize>();
    let original = SHAPE_COUNT + intensity;
    match config.wavelet {
        Some(_) => original + 8 * intensity,
        None => original,
    }
}

fn intensity_block<T: Real>(
    img: &VolumeImage<T>,
    mask: &RoiMask,
    filter: &str,
    config: &ExtractionConfig,
    out: &mut FeatureVector<T>,
) -> Result<()> {
    for (n, v) in firstorder_features(img, mask, config.firstorder_bins)?.iter() {
        out.push(format!("{filter}-firstorder-{n}"), v);
    }
    let roi = discretize(img, mask, config.bin_count)?;
    for family in TextureFamily::ALL {
        for (n, v) in texture_features(&roi, family).iter() {
            out.push(format!("{filter}-{}-{n}", family.class_name()), v);
        }
    }
    Ok(())
}

/// Full per-image roster: shape, first-order and texture on the original
/// image, plus first-order and texture on each wavelet subband when enabled.
pub fn extract_all<T: Real>(
    img: &VolumeImage<T>,
    mask: &RoiMask,
    config: &ExtractionConfig,
) -> Result<FeatureVector<T>> {
    mask.check_aligned(img)?;
    mask.require_nonempty()?;
    if config.bin_count < 2 || config.firstorder_bins < 2 {
        return Err(Error::config("bin counts must be >= 2"));
    }
    let mut out = FeatureVector::new();
    for (n, v) in shape_features(mask, img.spacing())?.iter() {
        out.push(format!("original-shape-{n}"), v);
    }
    intensity_block(img, mask, "original", config, &mut out)?;
    if let Some(kind) = config.wavelet {
        let bank = WaveletBank::builtin(kind);
        let subbands = decompose(img, &bank)?;
        for (label, band) in subbands.iter() {
            intensity_block(band, mask, &format!("wavelet-{label}"), config, &mut out)?;
        }
    }
    out.validate()?;
    Ok(out)
}
