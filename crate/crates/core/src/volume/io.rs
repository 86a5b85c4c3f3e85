//! RAWJSON and minimal single-file NIfTI-1 (little-endian, int16/float32).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Modality, RoiMask, VolumeImage};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VolumeFormat {
    /// `<name>.json` header plus `<name>.raw` payload.
    RawJson,
    /// Uncompressed `.nii`.
    Nifti1Minimal,
}

impl VolumeFormat {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Ok(Self::RawJson),
            Some("nii") => Ok(Self::Nifti1Minimal),
            _ => Err(Error::data(format!(
                "cannot infer volume format of {}",
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawJsonHeader {
    dims: [usize; 3],
    spacing: [f64; 3],
    dtype: String,
    data_file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modality: Option<Modality>,
}

struct Decoded {
    dims: [usize; 3],
    spacing: [f64; 3],
    voxels: Vec<f64>,
    modality: Modality,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn decode(path: &Path, format: VolumeFormat) -> Result<Decoded> {
    match format {
        VolumeFormat::RawJson => decode_rawjson(path),
        VolumeFormat::Nifti1Minimal => decode_nifti(path),
    }
}

fn decode_rawjson(path: &Path) -> Result<Decoded> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: RawJsonHeader = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let data_path = path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.data_file);
    let bytes = read_bytes(&data_path)?;
    let n: usize = header.dims.iter().product();
    let voxels: Vec<f64> = match header.dtype.as_str() {
        "f32" => {
            expect_len(&data_path, bytes.len(), n * 4)?;
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect()
        }
        "f64" => {
            expect_len(&data_path, bytes.len(), n * 8)?;
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        }
        other => return Err(Error::data(format!("unsupported dtype {other:?}"))),
    };
    Ok(Decoded {
        dims: header.dims,
        spacing: header.spacing,
        voxels,
        modality: header.modality.unwrap_or_default(),
    })
}

fn expect_len(path: &Path, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::data(format!(
            "{}: expected {want} payload bytes, found {got}",
            path.display()
        )));
    }
    Ok(())
}

const NIFTI_HEADER_LEN: usize = 348;
const DT_INT16: i16 = 4;
const DT_FLOAT32: i16 = 16;

fn le_i16(b: &[u8], off: usize) -> i16 {
    i16::from_le_bytes([b[off], b[off + 1]])
}

fn le_i32(b: &[u8], off: usize) -> i32 {
    i32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

fn le_f32(b: &[u8], off: usize) -> f32 {
    f32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

fn decode_nifti(path: &Path) -> Result<Decoded> {
    let b = read_bytes(path)?;
    let bad = |msg: String| Error::data(format!("{}: {msg}", path.display()));
    if b.len() < NIFTI_HEADER_LEN {
        return Err(bad("file shorter than NIfTI-1 header".into()));
    }
    if le_i32(&b, 0) != NIFTI_HEADER_LEN as i32 {
        return Err(bad("sizeof_hdr != 348 (big-endian or not NIfTI-1)".into()));
    }
    if &b[344..348] != b"n+1\0" {
        return Err(bad("magic is not \"n+1\\0\"".into()));
    }
    let ndim = le_i16(&b, 40);
    if !(1..=7).contains(&ndim) {
        return Err(bad(format!("invalid dim[0] = {ndim}")));
    }
    let mut dims = [1usize; 3];
    for (k, d) in dims.iter_mut().enumerate() {
        if (k as i16) < ndim {
            let v = le_i16(&b, 42 + 2 * k);
            if v < 1 {
                return Err(bad(format!("invalid dim[{}] = {v}", k + 1)));
            }
            *d = v as usize;
        }
    }
    for k in 3..ndim as usize {
        if le_i16(&b, 42 + 2 * k) > 1 {
            return Err(bad("only 3D volumes are supported".into()));
        }
    }
    let mut spacing = [1.0f64; 3];
    for (k, s) in spacing.iter_mut().enumerate() {
        if (k as i16) < ndim {
            *s = le_f32(&b, 80 + 4 * k).abs() as f64;
        }
    }
    let datatype = le_i16(&b, 70);
    let vox_offset = le_f32(&b, 108);
    if !(vox_offset >= 352.0) || vox_offset.fract() != 0.0 {
        return Err(bad(format!("vox_offset {vox_offset} must be an integer >= 352")));
    }
    let slope = le_f32(&b, 112) as f64;
    let inter = le_f32(&b, 116) as f64;
    let scale = |v: f64| {
        if slope != 0.0 && slope.is_finite() {
            v * slope + inter
        } else {
            v
        }
    };
    let n: usize = dims.iter().product();
    let start = vox_offset as usize;
    let width = match datatype {
        DT_INT16 => 2,
        DT_FLOAT32 => 4,
        other => return Err(bad(format!("unsupported NIfTI datatype {other}"))),
    };
    let payload = b
        .get(start..start + n * width)
        .ok_or_else(|| bad("voxel payload truncated".into()))?;
    let voxels = match datatype {
        DT_INT16 => payload
            .chunks_exact(2)
            .map(|c| scale(i16::from_le_bytes([c[0], c[1]]) as f64))
            .collect(),
        _ => payload
            .chunks_exact(4)
            .map(|c| scale(f32::from_le_bytes(c.try_into().unwrap()) as f64))
            .collect(),
    };
    Ok(Decoded {
        dims,
        spacing,
        voxels,
        modality: Modality::MR,
    })
}

/// Read a volume; voxel order is x-fastest on return.
pub fn read_volume<T: Real>(path: &Path, format: VolumeFormat) -> Result<VolumeImage<T>> {
    let d = decode(path, format)?;
    let conv = |v: f64| T::from_f64(v).unwrap_or_else(T::nan);
    VolumeImage::new(
        d.dims,
        d.spacing.map(conv),
        d.voxels.into_iter().map(conv).collect(),
        d.modality,
    )
    .map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

/// Read a mask stored in either volume format; nonzero voxels are foreground.
pub fn read_mask(path: &Path, format: VolumeFormat) -> Result<RoiMask> {
    let d = decode(path, format)?;
    RoiMask::new(d.dims, d.voxels.into_iter().map(|v| v != 0.0).collect())
}

fn is_f32<T: Real>() -> bool {
    std::mem::size_of::<T>() == 4
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn raw_path_for(path: &Path) -> (PathBuf, String) {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("volume")
        .to_string();
    let name = format!("{stem}.raw");
    (path.with_file_name(&name), name)
}

fn write_rawjson<T: Real>(
    path: &Path,
    dims: [usize; 3],
    spacing: [f64; 3],
    voxels: &[T],
    modality: Option<Modality>,
) -> Result<()> {
    let (raw_path, raw_name) = raw_path_for(path);
    let (dtype, bytes): (&str, Vec<u8>) = if is_f32::<T>() {
        (
            "f32",
            voxels
                .iter()
                .flat_map(|v| v.to_f32().unwrap().to_le_bytes())
                .collect(),
        )
    } else {
        ("f64", voxels.iter().flat_map(|v| v.f64().to_le_bytes()).collect())
    };
    let header = RawJsonHeader {
        dims,
        spacing,
        dtype: dtype.into(),
        data_file: raw_name,
        modality,
    };
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::json(path, e))?;
    write_file(&raw_path, &bytes)?;
    write_file(path, text.as_bytes())
}

fn write_nifti(path: &Path, dims: [usize; 3], spacing: [f64; 3], voxels: &[f32]) -> Result<()> {
    let mut h = vec![0u8; 352];
    h[0..4].copy_from_slice(&(NIFTI_HEADER_LEN as i32).to_le_bytes());
    let dim: [i16; 8] = [3, dims[0] as i16, dims[1] as i16, dims[2] as i16, 1, 1, 1, 1];
    if dims.iter().any(|&d| d > i16::MAX as usize) {
        return Err(Error::data("dimension exceeds NIfTI-1 range"));
    }
    for (k, d) in dim.iter().enumerate() {
        h[40 + 2 * k..42 + 2 * k].copy_from_slice(&d.to_le_bytes());
    }
    h[70..72].copy_from_slice(&DT_FLOAT32.to_le_bytes());
    h[72..74].copy_from_slice(&32i16.to_le_bytes());
    let pixdim: [f32; 8] = [
        1.0,
        spacing[0] as f32,
        spacing[1] as f32,
        spacing[2] as f32,
        0.0,
        0.0,
        0.0,
        0.0,
    ];
    for (k, p) in pixdim.iter().enumerate() {
        h[76 + 4 * k..80 + 4 * k].copy_from_slice(&p.to_le_bytes());
    }
    h[108..112].copy_from_slice(&352.0f32.to_le_bytes());
    h[112..116].copy_from_slice(&1.0f32.to_le_bytes());
    // xyzt_units: mm
    h[123] = 2;
    h[344..348].copy_from_slice(b"n+1\0");
    h.extend(voxels.iter().flat_map(|v| v.to_le_bytes()));
    write_file(path, &h)
}

/// Write a volume. RAWJSON stores `f32` volumes as dtype "f32" and `f64`
/// volumes as "f64" so round trips are bit-exact; NIfTI always stores float32.
pub fn write_volume<T: Real>(path: &Path, img: &VolumeImage<T>, format: VolumeFormat) -> Result<()> {
    let spacing = img.spacing().map(|s| s.f64());
    match format {
        VolumeFormat::RawJson => {
            write_rawjson(path, img.dims(), spacing, img.voxels(), Some(img.modality()))
        }
        VolumeFormat::Nifti1Minimal => {
            let v: Vec<f32> = img.voxels().iter().map(|v| v.to_f32().unwrap()).collect();
            write_nifti(path, img.dims(), spacing, &v)
        }
    }
}

pub fn write_mask(path: &Path, mask: &RoiMask, format: VolumeFormat) -> Result<()> {
    let v: Vec<f32> = mask.voxels().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    match format {
        VolumeFormat::RawJson => write_rawjson(path, mask.dims(), [1.0; 3], &v, None),
        VolumeFormat::Nifti1Minimal => write_nifti(path, mask.dims(), [1.0; 3], &v),
    }
}
