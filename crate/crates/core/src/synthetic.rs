//! Deterministic synthetic scenes standing in for real sensor products.
//!
//! A scene is a smooth multi-band reflectance field (shared structure plus
//! band-specific texture) rendered through a per-sensor monotone radiometric
//! response. Two sensors looking at statistically similar scenes therefore
//! produce clearly different per-band pixel distributions.

use crate::error::{invalid, Result};
use crate::metrics::degrade_pan;
use crate::pipeline::FusionInputs;
use crate::raster::{Raster, SplitMix64};

/// Radiometric response of one simulated sensor: band `b` records
/// `offset[b] + gain[b] · r^gamma`, PAN records `pan_offset + pan_gain · mean_b r_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorProfile {
    pub gains: Vec<f64>,
    pub offsets: Vec<f64>,
    pub gamma: f64,
    pub pan_gain: f64,
    pub pan_offset: f64,
}

impl SensorProfile {
    /// Linear response, values roughly in [0, 1].
    pub fn linear(bands: usize) -> Self {
        SensorProfile {
            gains: vec![1.0; bands],
            offsets: vec![0.0; bands],
            gamma: 1.0,
            pan_gain: 1.0,
            pan_offset: 0.0,
        }
    }

    /// Compressive, brighter response with band-dependent gain.
    pub fn compressed(bands: usize) -> Self {
        SensorProfile {
            gains: (0..bands).map(|b| 0.8 + 0.1 * b as f64).collect(),
            offsets: (0..bands).map(|b| 0.6 + 0.05 * b as f64).collect(),
            gamma: 2.2,
            pan_gain: 1.4,
            pan_offset: 0.5,
        }
    }
}

/// Size and seed of a synthetic scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    /// PAN-scale width and height
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub ratio: usize,
    pub seed: u64,
}

struct Blob {
    cx: f64,
    cy: f64,
    radius: f64,
    weight: f64,
}

/// Reflectance planes in (0, 1) at PAN scale.
fn reflectance(spec: &SceneSpec) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(spec.seed);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let blobs: Vec<Blob> = (0..12)
        .map(|_| Blob {
            cx: rng.next_f64() * w,
            cy: rng.next_f64() * h,
            radius: (0.05 + 0.15 * rng.next_f64()) * w.min(h),
            weight: rng.next_f64() - 0.3,
        })
        .collect();
    let fx = 2.0 + 4.0 * rng.next_f64();
    let fy = 2.0 + 4.0 * rng.next_f64();

    let mut structure = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let (xf, yf) = (x as f64, y as f64);
            let waves = 0.5
                * (std::f64::consts::TAU * fx * xf / w).sin()
                * (std::f64::consts::TAU * fy * yf / h).cos();
            let patches: f64 = blobs
                .iter()
                .map(|b| {
                    let d2 = (xf - b.cx).powi(2) + (yf - b.cy).powi(2);
                    b.weight * (-d2 / (2.0 * b.radius * b.radius)).exp()
                })
                .sum();
            structure.push(waves + patches);
        }
    }

    (0..spec.bands)
        .map(|b| {
            let mix = 0.6 + 0.3 * b as f64 / spec.bands.max(1) as f64;
            structure
                .iter()
                .map(|s| {
                    let noise = rng.next_f64() - 0.5;
                    let v = 0.45 + 0.25 * mix * s + 0.08 * noise;
                    v.clamp(0.01, 0.99)
                })
                .collect()
        })
        .collect()
}

/// Renders a scene through `sensor`: reference HRMS and PAN at full scale,
/// LRMS by Gaussian blur and decimation of each reference band.
pub fn synthetic_scene(spec: &SceneSpec, sensor: &SensorProfile) -> Result<FusionInputs> {
    if spec.ratio == 0
        || !spec.width.is_multiple_of(spec.ratio)
        || !spec.height.is_multiple_of(spec.ratio)
    {
        return Err(invalid("scene size must be divisible by the ratio"));
    }
    if sensor.gains.len() != spec.bands || sensor.offsets.len() != spec.bands {
        return Err(invalid(
            "sensor profile band count does not match the scene",
        ));
    }
    let planes = reflectance(spec);
    let plane_len = spec.width * spec.height;

    let pan: Vec<f64> = (0..plane_len)
        .map(|i| {
            let mean = planes.iter().map(|p| p[i]).sum::<f64>() / spec.bands as f64;
            sensor.pan_offset + sensor.pan_gain * mean
        })
        .collect();
    let reference: Vec<Vec<f64>> = planes
        .iter()
        .enumerate()
        .map(|(b, p)| {
            p.iter()
                .map(|r| sensor.offsets[b] + sensor.gains[b] * r.powf(sensor.gamma))
                .collect()
        })
        .collect();

    let (lw, lh) = (spec.width / spec.ratio, spec.height / spec.ratio);
    let mut lrms = Vec::with_capacity(spec.bands * lw * lh);
    for band in &reference {
        let plane = Raster::from_f64(spec.width, spec.height, 1, band.clone())?;
        lrms.extend_from_slice(degrade_pan(&plane, spec.ratio)?.data());
    }

    FusionInputs::new(
        Raster::from_f64(lw, lh, spec.bands, lrms)?,
        Raster::from_f64(spec.width, spec.height, 1, pan)?,
        Some(Raster::from_bands(spec.width, spec.height, reference)?),
        spec.ratio,
    )
}
