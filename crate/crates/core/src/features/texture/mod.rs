//! Texture matrices over a discretized ROI, 26-connectivity throughout.
//!
//! GLCM and GLRLM are built per direction over the 13 unique 3D offsets and
//! each feature is averaged over directions. GLSZM uses 26-connected zones;
//! GLDM counts equal-level neighbours at distance 1 (alpha = 0), self included.

mod glcm;
mod sized;

pub use glcm::GLCM_NAMES;
pub use sized::{GLDM_NAMES, GLRLM_NAMES, GLSZM_NAMES};

use serde::{Deserialize, Serialize};

use super::{DiscretizedRoi, FeatureVector};
use crate::scalar::Real;

/// The 13 unique neighbour offsets (first nonzero component positive).
pub const DIRECTIONS: [[isize; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TextureFamily {
    Glcm,
    Glrlm,
    Glszm,
    Gldm,
}

impl TextureFamily {
    pub const ALL: [TextureFamily; 4] = [Self::Glcm, Self::Glrlm, Self::Glszm, Self::Gldm];

    pub fn class_name(self) -> &'static str {
        match self {
            Self::Glcm => "glcm",
            Self::Glrlm => "glrlm",
            Self::Glszm => "glszm",
            Self::Gldm => "gldm",
        }
    }

    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            Self::Glcm => &GLCM_NAMES,
            Self::Glrlm => &GLRLM_NAMES,
            Self::Glszm => &GLSZM_NAMES,
            Self::Gldm => &GLDM_NAMES,
        }
    }

    pub fn feature_count(self) -> usize {
        self.feature_names().len()
    }
}

/// Emit one texture family's features.
pub fn texture_features<T: Real>(roi: &DiscretizedRoi<T>, family: TextureFamily) -> FeatureVector<T> {
    let values: Vec<T> = match family {
        TextureFamily::Glcm => glcm::features(roi),
        TextureFamily::Glrlm => sized::glrlm(roi),
        TextureFamily::Glszm => sized::glszm(roi),
        TextureFamily::Gldm => sized::gldm(roi),
    };
    let mut fv = FeatureVector::new();
    for (name, v) in family.feature_names().iter().zip(values) {
        fv.push(*name, v);
    }
    fv
}

/// `-p log2 p` with the 0 log 0 = 0 convention.
#[inline]
pub(crate) fn plogp<T: Real>(p: T) -> T {
    if p > T::zero() {
        -p * p.log2()
    } else {
        T::zero()
    }
}
