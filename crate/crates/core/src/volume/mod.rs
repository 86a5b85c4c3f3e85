//! 3D volumes, ROI masks, and intensity normalization.
//!
//! Voxels are stored x-fastest: index = x + nx * (y + ny * z).

mod io;
mod normalize;

pub use io::{read_volume, read_mask, write_mask, write_volume, VolumeFormat};
pub use normalize::{
    white_stripe_normalize, z_normalize, NormalizationMethod, NormalizationParams,
    WhiteStripeConfig,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Modality {
    #[default]
    MR,
    CT,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeImage<T> {
    dims: [usize; 3],
    spacing: [T; 3],
    voxels: Vec<T>,
    modality: Modality,
}

#[inline]
pub fn linear_index(dims: [usize; 3], x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

#[inline]
pub fn coords_of(dims: [usize; 3], idx: usize) -> [usize; 3] {
    let x = idx % dims[0];
    let y = (idx / dims[0]) % dims[1];
    let z = idx / (dims[0] * dims[1]);
    [x, y, z]
}

fn check_dims(dims: [usize; 3], len: usize) -> Result<()> {
    if dims.contains(&0) {
        return Err(Error::data(format!("dims must be >= 1, got {dims:?}")));
    }
    let expected = dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or_else(|| Error::data("dims overflow"))?;
    if expected != len {
        return Err(Error::data(format!(
            "voxel count {len} does not match dims {dims:?} ({expected})"
        )));
    }
    Ok(())
}

impl<T: Real> VolumeImage<T> {
    pub fn new(
        dims: [usize; 3],
        spacing: [T; 3],
        voxels: Vec<T>,
        modality: Modality,
    ) -> Result<Self> {
        check_dims(dims, voxels.len())?;
        if spacing.iter().any(|s| !(s.is_finite() && *s > T::zero())) {
            return Err(Error::data(format!("spacing must be positive, got {spacing:?}")));
        }
        if let Some(i) = voxels.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!("non-finite voxel at index {i}")));
        }
        Ok(Self {
            dims,
            spacing,
            voxels,
            modality,
        })
    }

    /// Constant-filled volume with unit spacing.
    pub fn filled(dims: [usize; 3], value: T) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, [T::one(); 3], vec![value; n], Modality::MR)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [T; 3] {
        self.spacing
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn with_modality(mut self, modality: Modality) -> Self {
        self.modality = modality;
        self
    }

    pub fn voxels(&self) -> &[T] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> T {
        self.voxels[linear_index(self.dims, x, y, z)]
    }

    /// Same grid, new voxel values.
    pub fn with_voxels(&self, voxels: Vec<T>) -> Result<Self> {
        Self::new(self.dims, self.spacing, voxels, self.modality)
    }

    /// Element-wise map keeping the grid.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        self.with_voxels(self.voxels.iter().map(|&v| f(v)).collect())
    }

    pub fn into_voxels(self) -> Vec<T> {
        self.voxels
    }

    /// Convert to another scalar type.
    pub fn cast<U: Real>(&self) -> Result<VolumeImage<U>> {
        let conv = |v: T| U::from_f64(v.f64()).unwrap_or_else(U::nan);
        VolumeImage::new(
            self.dims,
            self.spacing.map(conv),
            self.voxels.iter().map(|&v| conv(v)).collect(),
            self.modality,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiMask {
    dims: [usize; 3],
    voxels: Vec<bool>,
}

impl RoiMask {
    pub fn new(dims: [usize; 3], voxels: Vec<bool>) -> Result<Self> {
        check_dims(dims, voxels.len())?;
        Ok(Self { dims, voxels })
    }

    /// Mask covering the whole grid.
    pub fn full(dims: [usize; 3]) -> Result<Self> {
        Self::new(dims, vec![true; dims.iter().product()])
    }

    pub fn from_fn(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> bool) -> Result<Self> {
        let n: usize = dims.iter().product();
        let voxels = (0..n)
            .map(|i| {
                let [x, y, z] = coords_of(dims, i);
                f(x, y, z)
            })
            .collect();
        Self::new(dims, voxels)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxels(&self) -> &[bool] {
        &self.voxels
    }

    pub fn contains(&self, x: usize, y: usize, z: usize) -> bool {
        self.voxels[linear_index(self.dims, x, y, z)]
    }

    pub fn count(&self) -> usize {
        self.voxels.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.voxels
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn require_nonempty(&self) -> Result<()> {
        if self.count() == 0 {
            return Err(Error::data("ROI mask is empty"));
        }
        Ok(())
    }

    /// Hard error unless the mask shares the volume grid.
    pub fn check_aligned<T>(&self, img: &VolumeImage<T>) -> Result<()> {
        if self.dims != img.dims {
            return Err(Error::data(format!(
                "mask dims {:?} do not match volume dims {:?}",
                self.dims, img.dims
            )));
        }
        Ok(())
    }
}

/// Masked voxel values in storage order.
pub fn masked_values<T: Real>(img: &VolumeImage<T>, mask: &RoiMask) -> Result<Vec<T>> {
    mask.check_aligned(img)?;
    Ok(mask.indices().map(|i| img.voxels[i]).collect())
}
