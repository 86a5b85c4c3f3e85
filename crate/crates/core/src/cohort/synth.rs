//! Seeded synthetic cohorts: ellipsoidal lesions on noise backgrounds, with
//! planted growth and texture change on images taken shortly before a
//! progression event.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    CohortManifest, ImageRef, LesionEntry, PatientClinical, PatientEntry, PrimarySite, Timepoint,
    DEFAULT_HORIZON_DAYS, MANIFEST_VERSION,
};
use crate::error::{Error, Result};
use crate::volume::{write_mask, write_volume, Modality, RoiMask, VolumeFormat, VolumeImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_lesions: usize,
    /// Planted signal strength; 0 disables it.
    pub effect: f64,
    /// Target fraction of HRM among classifiable samples.
    pub prevalence: f64,
    /// Cubic grid edge in voxels.
    pub grid: usize,
    pub with_ct: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_lesions: 150,
            effect: 1.0,
            prevalence: 0.05,
            grid: 20,
            with_ct: true,
        }
    }
}

/// Manifest plus in-memory images keyed by their manifest paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCohort {
    pub config: SynthConfig,
    pub manifest: CohortManifest,
    pub images: BTreeMap<String, VolumeImage<f64>>,
    pub masks: BTreeMap<String, RoiMask>,
}

impl SynthCohort {
    /// Write `manifest.json` and RAWJSON images under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (path, img) in &self.images {
            let p = dir.join(path);
            if let Some(parent) = p.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            write_volume(&p, img, VolumeFormat::RawJson)?;
        }
        for (path, mask) in &self.masks {
            write_mask(&dir.join(path), mask, VolumeFormat::RawJson)?;
        }
        self.manifest.save(&dir.join("manifest.json"))
    }
}

struct LesionPlan {
    gaps: Vec<i64>,
    censor_tail: i64,
    progress_at: Option<usize>,
}

impl LesionPlan {
    /// (HRM samples, classifiable samples) under the default horizon.
    fn counts(&self) -> (usize, usize) {
        match self.progress_at {
            Some(m) => (1, m + 1),
            None => {
                let n = self.gaps.len();
                (0, if self.censor_tail < DEFAULT_HORIZON_DAYS { n - 1 } else { n })
            }
        }
    }
}

struct Appearance {
    radii: [f64; 3],
    center: [f64; 3],
    lesion_mean: f64,
    lesion_sd: f64,
}

fn render(
    grid: usize,
    look: &Appearance,
    background: (f64, f64),
    modality: Modality,
    rng: &mut ChaCha8Rng,
) -> Result<(VolumeImage<f64>, RoiMask)> {
    let dims = [grid; 3];
    let inside = |x: usize, y: usize, z: usize| {
        let p = [x, y, z];
        (0..3)
            .map(|k| ((p[k] as f64 - look.center[k]) / look.radii[k]).powi(2))
            .sum::<f64>()
            <= 1.0
    };
    let mask = RoiMask::from_fn(dims, inside)?;
    let bg = Normal::new(background.0, background.1).map_err(|e| Error::config(e.to_string()))?;
    let fg = Normal::new(look.lesion_mean, look.lesion_sd).map_err(|e| Error::config(e.to_string()))?;
    let voxels = mask
        .voxels()
        .iter()
        .map(|&m| if m { fg.sample(rng) } else { bg.sample(rng) })
        .collect();
    let img = VolumeImage::new(dims, [1.0; 3], voxels, modality)?;
    Ok((img, mask))
}

/// Deterministic cohort for a seed. Lesions that progress receive their
/// event within the horizon of exactly one follow-up (the last one kept);
/// that image shows growth and a noisier, brighter texture scaled by
/// `effect`. Progressing lesions are added until the HRM share of
/// classifiable samples reaches `prevalence`.
pub fn synth_cohort(cfg: &SynthConfig) -> Result<SynthCohort> {
    if cfg.n_lesions < 2 {
        return Err(Error::config("synthetic cohort needs at least 2 lesions"));
    }
    if !(0.0..1.0).contains(&cfg.prevalence) || !(cfg.effect >= 0.0) {
        return Err(Error::config("prevalence must be in [0, 1) and effect >= 0"));
    }
    if cfg.grid < 12 {
        return Err(Error::config("grid must be at least 12 voxels"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut plans: Vec<LesionPlan> = (0..cfg.n_lesions)
        .map(|_| {
            let n_fu = rng.gen_range(2..=5);
            LesionPlan {
                gaps: (0..n_fu).map(|_| rng.gen_range(110..=200)).collect(),
                censor_tail: rng.gen_range(60..=400),
                progress_at: None,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..cfg.n_lesions).collect();
    order.shuffle(&mut rng);
    if cfg.prevalence > 0.0 {
        for (converted, &i) in order.iter().enumerate() {
            let (hrm, total) = plans
                .iter()
                .map(LesionPlan::counts)
                .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
            if converted >= 2 && hrm as f64 >= cfg.prevalence * total as f64 {
                break;
            }
            let n_fu = plans[i].gaps.len();
            plans[i].progress_at = Some(rng.gen_range(0..n_fu));
        }
    }

    let base = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date");
    let half = (cfg.grid as f64 - 1.0) / 2.0;
    let mut images = BTreeMap::new();
    let mut masks = BTreeMap::new();
    let mut patients: Vec<PatientEntry> = Vec::new();
    let mut li = 0;
    while li < cfg.n_lesions {
        let pid = format!("P{:03}", patients.len() + 1);
        let n_here = rng.gen_range(1..=3).min(cfg.n_lesions - li);
        let clinical = PatientClinical {
            rpa_class: rng.gen_range(1..=3),
            age: f64::from(rng.gen_range(35..=85)),
            sex: rng.gen_range(0..=1),
            karnofsky: f64::from(rng.gen_range(6..=10) * 10),
            n_metastases: n_here as u32 + rng.gen_range(0..=3),
            extracranial_disease: rng.gen_bool(0.5),
            primary_site: *[
                PrimarySite::Lung,
                PrimarySite::Breast,
                PrimarySite::Melanoma,
                PrimarySite::Other,
            ]
            .choose(&mut rng)
            .expect("nonempty"),
        };
        let mut lesions = Vec::new();
        for k in 0..n_here {
            let plan = &plans[li];
            let lid = format!("{pid}-L{}", k + 1);
            let planning_date = base + Duration::days(rng.gen_range(0..1500));
            let radii: [f64; 3] = std::array::from_fn(|_| rng.gen_range(2.5..4.5));
            let center: [f64; 3] = std::array::from_fn(|_| half + rng.gen_range(-0.5..0.5));
            let lesion_mean = rng.gen_range(140.0..170.0);
            let lesion_sd = rng.gen_range(8.0..14.0);
            let mut put = |name: &str, (img, mask): (VolumeImage<f64>, RoiMask)| {
                let r = ImageRef {
                    image: format!("images/{lid}/{name}.json"),
                    mask: format!("images/{lid}/{name}-mask.json"),
                };
                images.insert(r.image.clone(), img);
                masks.insert(r.mask.clone(), mask);
                r
            };
            let planning_look = Appearance { radii, center, lesion_mean, lesion_sd };
            let planning_mr = put(
                "planning-mr",
                render(cfg.grid, &planning_look, (100.0, 10.0), Modality::MR, &mut rng)?,
            );
            let planning_ct = if cfg.with_ct {
                let ct_look = Appearance { lesion_mean: 45.0, lesion_sd: 8.0, ..planning_look };
                Some(put("planning-ct", render(cfg.grid, &ct_look, (30.0, 5.0), Modality::CT, &mut rng)?))
            } else {
                None
            };
            let n_keep = plan.progress_at.map_or(plan.gaps.len(), |m| m + 1);
            let mut date = planning_date;
            let mut followups = Vec::new();
            for (j, gap) in plan.gaps.iter().take(n_keep).enumerate() {
                date += Duration::days(*gap);
                let planted = plan.progress_at == Some(j);
                let e = if planted { cfg.effect } else { 0.0 };
                let jitter = |rng: &mut ChaCha8Rng| rng.gen_range(0.92..1.08);
                let look = Appearance {
                    radii: std::array::from_fn(|a| radii[a] * jitter(&mut rng) * (1.0 + 0.5 * e)),
                    center,
                    lesion_mean: lesion_mean + 20.0 * e,
                    lesion_sd: lesion_sd * jitter(&mut rng) * (1.0 + e),
                };
                let r = put(&format!("fu{}", j + 1), render(cfg.grid, &look, (100.0, 10.0), Modality::MR, &mut rng)?);
                followups.push(Timepoint { date, image: r });
            }
            let last = followups.last().map_or(planning_date, |f| f.date);
            let (event_date, censor_date) = match plan.progress_at {
                Some(_) => {
                    let e = last + Duration::days(rng.gen_range(20..=95));
                    (Some(e), e + Duration::days(rng.gen_range(30..=400)))
                }
                None => (None, last + Duration::days(plan.censor_tail)),
            };
            lesions.push(LesionEntry {
                lesion_id: lid,
                eqd: (rng.gen_range(18.0f64..40.0) * 10.0).round() / 10.0,
                planning_date,
                planning_mr,
                planning_ct,
                followups,
                event_date,
                censor_date,
            });
            li += 1;
        }
        patients.push(PatientEntry { patient_id: pid, clinical, lesions });
    }
    let manifest = CohortManifest { version: MANIFEST_VERSION, patients };
    manifest.validate()?;
    Ok(SynthCohort { config: *cfg, manifest, images, masks })
}
