//! Multi-band raster container, pixel sampling and bicubic upsampling.

mod bicubic;
mod io;
mod sample;

pub use bicubic::{bicubic_upsample, bicubic_upsample_with, keys_weight};
pub use io::{read_raster, write_raster, HEADER_LEN, RASTER_MAGIC};
pub use sample::{sample_pixels, sample_values, SplitMix64};

use crate::error::{invalid, Error, Result};

/// Scalar type of the stored payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dtype {
    F32,
    F64,
    U16,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 1,
            Dtype::F64 => 2,
            Dtype::U16 => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Dtype::F32),
            2 => Ok(Dtype::F64),
            3 => Ok(Dtype::U16),
            other => Err(Error::UnknownDtype(other)),
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
            Dtype::U16 => 2,
        }
    }

    /// True when `v` survives a round trip through this dtype unchanged.
    fn represents(self, v: f64) -> bool {
        match self {
            Dtype::F64 => true,
            Dtype::F32 => (v as f32) as f64 == v,
            Dtype::U16 => v.fract() == 0.0 && (0.0..=65535.0).contains(&v),
        }
    }
}

/// Band-sequential, row-major image. Values are held as `f64` whatever the
/// dtype; the dtype decides the on-disk encoding and every value is exactly
/// representable in it.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    bands: usize,
    dtype: Dtype,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(
        width: usize,
        height: usize,
        bands: usize,
        dtype: Dtype,
        data: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(invalid(format!(
                "raster dimensions must be positive, got {width}x{height}x{bands}"
            )));
        }
        let len = width
            .checked_mul(height)
            .and_then(|p| p.checked_mul(bands))
            .ok_or_else(|| invalid("raster dimensions overflow"))?;
        if data.len() != len {
            return Err(invalid(format!(
                "raster {width}x{height}x{bands} needs {len} values, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = data.iter().position(|&v| !dtype.represents(v)) {
            return Err(invalid(format!(
                "value {} at element {i} is not representable as {dtype:?}",
                data[i]
            )));
        }
        Ok(Raster {
            width,
            height,
            bands,
            dtype,
            data,
        })
    }

    pub fn from_f64(width: usize, height: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        Raster::new(width, height, bands, Dtype::F64, data)
    }

    /// Stacks equally sized bands into an `f64` raster.
    pub fn from_bands(width: usize, height: usize, bands: Vec<Vec<f64>>) -> Result<Self> {
        let count = bands.len();
        if let Some(b) = bands.iter().position(|b| b.len() != width * height) {
            return Err(invalid(format!("band {b} has the wrong pixel count")));
        }
        Raster::from_f64(width, height, count, bands.concat())
    }

    pub fn filled(width: usize, height: usize, bands: usize, value: f64) -> Result<Self> {
        Raster::from_f64(width, height, bands, vec![value; width * height * bands])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn dtype(&self) -> Dtype {
        self.dtype
    }

    pub fn pixels_per_band(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn band(&self, b: usize) -> &[f64] {
        let plane = self.pixels_per_band();
        &self.data[b * plane..(b + 1) * plane]
    }

    pub fn get(&self, band: usize, x: usize, y: usize) -> f64 {
        self.data[band * self.pixels_per_band() + y * self.width + x]
    }

    /// Copy of a single band as a one-band raster.
    pub fn extract_band(&self, b: usize) -> Result<Raster> {
        if b >= self.bands {
            return Err(invalid(format!(
                "band {b} out of range for {} bands",
                self.bands
            )));
        }
        Raster::new(
            self.width,
            self.height,
            1,
            self.dtype,
            self.band(b).to_vec(),
        )
    }

    pub fn same_shape(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height && self.bands == other.bands
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_dimensions_and_values() {
        assert!(Raster::from_f64(0, 1, 1, vec![]).is_err());
        assert!(Raster::from_f64(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(matches!(
            Raster::from_f64(1, 1, 1, vec![f64::NAN]),
            Err(Error::NonFinite(0))
        ));
        assert!(Raster::new(1, 1, 1, Dtype::U16, vec![1.5]).is_err());
        assert!(Raster::new(1, 1, 1, Dtype::U16, vec![70000.0]).is_err());
        assert!(Raster::new(1, 1, 1, Dtype::F32, vec![0.1]).is_err());
        assert!(Raster::new(1, 1, 1, Dtype::F32, vec![0.1f32 as f64]).is_ok());
    }

    #[test]
    fn band_access() {
        let r = Raster::from_bands(2, 1, vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(r.band(1), &[3.0, 4.0]);
        assert_eq!(r.get(1, 1, 0), 4.0);
        assert_eq!(r.extract_band(0).unwrap().data(), &[1.0, 2.0]);
        assert!(r.extract_band(2).is_err());
    }
}
