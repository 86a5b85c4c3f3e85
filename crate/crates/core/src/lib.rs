//! Radiomics and delta-radiomics risk classification for longitudinal lesion
//! cohorts: volume I/O and normalization, undecimated wavelet subbands,
//! shape/first-order/texture features, MRMR selection, a class-weighted
//! linear max-margin classifier, and survival-style evaluation.
//!
//! The numerical core is generic over [`Real`] (`f32`/`f64`); the aliases
//! below fix the scalar to `f64` for pipeline code.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod cohort;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod pipeline;
pub mod scalar;
pub mod selection;
pub mod stats;
pub mod volume;
pub mod wavelet;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Real;

pub type Volume = volume::VolumeImage<f64>;
pub type Volume32 = volume::VolumeImage<f32>;
pub type Features = features::FeatureVector<f64>;
pub type Features32 = features::FeatureVector<f32>;
pub type Bank = wavelet::WaveletBank<f64>;
pub type Subbands = wavelet::SubbandSet<f64>;
pub type Model = classifier::TrainedModel<f64>;
pub type Roc = evaluation::RocCurve<f64>;
pub type Survival = evaluation::SurvivalCurve<f64>;
