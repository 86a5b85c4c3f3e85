use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::volume::{coords_of, RoiMask, VolumeImage};

/// ROI voxels quantized to gray levels `1..=ng`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedRoi<T> {
    /// Gray level per ROI voxel, storage order.
    pub levels: Vec<u32>,
    pub ng: u32,
    pub coords: Vec<[usize; 3]>,
    pub dims: [usize; 3],
    pub spacing: [T; 3],
    /// Dense grid of levels; 0 marks voxels outside the ROI.
    grid: Vec<u32>,
}

impl<T: Real> DiscretizedRoi<T> {
    /// Build directly from per-voxel levels on a grid (0 = outside).
    pub fn from_grid(dims: [usize; 3], spacing: [T; 3], grid: Vec<u32>, ng: u32) -> Result<Self> {
        if grid.len() != dims.iter().product::<usize>() {
            return Err(Error::data("level grid does not match dims"));
        }
        if ng < 1 || grid.iter().any(|&l| l > ng) {
            return Err(Error::data("gray level outside 1..=ng"));
        }
        let mut levels = Vec::new();
        let mut coords = Vec::new();
        for (i, &l) in grid.iter().enumerate() {
            if l > 0 {
                levels.push(l);
                coords.push(coords_of(dims, i));
            }
        }
        if levels.is_empty() {
            return Err(Error::data("discretized ROI is empty"));
        }
        Ok(Self {
            levels,
            ng,
            coords,
            dims,
            spacing,
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Level at signed coordinates, 0 outside the grid or ROI.
    #[inline]
    pub fn level_at(&self, x: isize, y: isize, z: isize) -> u32 {
        let [nx, ny, nz] = self.dims.map(|d| d as isize);
        if x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz {
            return 0;
        }
        self.grid[(x + nx * (y + ny * z)) as usize]
    }
}

/// Gray level of `v` for fixed bin-count quantization over `[vmin, vmax]`.
#[inline]
pub(crate) fn bin_level<T: Real>(v: T, vmin: T, vmax: T, ng: usize) -> u32 {
    if !(vmax > vmin) {
        return 1;
    }
    let raw = (T::of(ng) * (v - vmin) / (vmax - vmin)).floor();
    let level = 1 + raw.to_usize().unwrap_or(0);
    level.min(ng) as u32
}

/// `level = min(Ng, 1 + floor(Ng (v - vmin) / (vmax - vmin)))` over the ROI;
/// a constant ROI maps to level 1 throughout.
pub fn discretize<T: Real>(
    img: &VolumeImage<T>,
    mask: &RoiMask,
    ng: usize,
) -> Result<DiscretizedRoi<T>> {
    if ng < 2 {
        return Err(Error::config("bin count must be >= 2"));
    }
    mask.check_aligned(img)?;
    mask.require_nonempty()?;
    let values = img.voxels();
    let (mut vmin, mut vmax) = (T::infinity(), T::neg_infinity());
    for i in mask.indices() {
        vmin = vmin.min(values[i]);
        vmax = vmax.max(values[i]);
    }
    let grid = mask
        .voxels()
        .iter()
        .zip(values)
        .map(|(&m, &v)| if m { bin_level(v, vmin, vmax, ng) } else { 0 })
        .collect();
    DiscretizedRoi::from_grid(img.dims(), img.spacing(), grid, ng as u32)
}
