//! Binary container: `UPRF`, version byte, dtype byte, three little-endian
//! u32 dimensions (width, height, bands), then the band-sequential
//! row-major little-endian payload. No padding, no checksum.

use std::fs;
use std::path::Path;

use super::{Dtype, Raster};
use crate::error::{Error, Result};

pub const RASTER_MAGIC: [u8; 4] = *b"UPRF";
pub const HEADER_LEN: usize = 18;
const VERSION: u8 = 1;

impl Raster {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let dim = |v: usize| {
            u32::try_from(v).map_err(|_| Error::DimensionOverflow {
                width: u32::MAX,
                height: u32::MAX,
                bands: u32::MAX,
            })
        };
        let (w, h, b) = (dim(self.width)?, dim(self.height)?, dim(self.bands)?);

        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * self.dtype.size());
        out.extend_from_slice(&RASTER_MAGIC);
        out.push(VERSION);
        out.push(self.dtype.code());
        out.extend_from_slice(&w.to_le_bytes());
        out.extend_from_slice(&h.to_le_bytes());
        out.extend_from_slice(&b.to_le_bytes());
        match self.dtype {
            Dtype::F64 => self
                .data
                .iter()
                .for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            Dtype::F32 => self
                .data
                .iter()
                .for_each(|&v| out.extend_from_slice(&(v as f32).to_le_bytes())),
            Dtype::U16 => self
                .data
                .iter()
                .for_each(|&v| out.extend_from_slice(&(v as u16).to_le_bytes())),
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Raster> {
        if bytes.len() < HEADER_LEN {
            // a short buffer with the wrong magic is still a magic error
            if bytes.len() >= 4 && bytes[..4] != RASTER_MAGIC {
                return Err(Error::BadMagic(bytes[..4].try_into().unwrap()));
            }
            return Err(Error::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != RASTER_MAGIC {
            return Err(Error::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(Error::UnsupportedVersion(bytes[4]));
        }
        let dtype = Dtype::from_code(bytes[5])?;
        let read_u32 = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let (width, height, bands) = (read_u32(6), read_u32(10), read_u32(14));

        let overflow = Error::DimensionOverflow {
            width,
            height,
            bands,
        };
        let count = (width as usize)
            .checked_mul(height as usize)
            .and_then(|p| p.checked_mul(bands as usize));
        let payload = count.and_then(|c| c.checked_mul(dtype.size()));
        let (count, payload) = match (count, payload) {
            (Some(c), Some(p)) if p.checked_add(HEADER_LEN).is_some() => (c, p),
            _ => return Err(overflow),
        };
        let expected = HEADER_LEN + payload;
        if bytes.len() < expected {
            return Err(Error::Truncated {
                expected,
                actual: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(Error::TrailingBytes(bytes.len() - expected));
        }

        let body = &bytes[HEADER_LEN..];
        let data: Vec<f64> = match dtype {
            Dtype::F64 => body
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
            Dtype::F32 => body
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
            Dtype::U16 => body
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
        };
        debug_assert_eq!(data.len(), count);
        Raster::new(width as usize, height as usize, bands as usize, dtype, data)
    }
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster> {
    Raster::from_bytes(&fs::read(path)?)
}

pub fn write_raster(path: impl AsRef<Path>, raster: &Raster) -> Result<()> {
    fs::write(path, raster.to_bytes()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_layout() {
        let r = Raster::from_f64(2, 2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let bytes = r.to_bytes().unwrap();
        assert_eq!(bytes.len(), 4 + 1 + 13 + 32);
        assert_eq!(&bytes[..6], b"UPRF\x01\x02");
        assert_eq!(&bytes[6..18], &[2, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[18 + 8..18 + 16], &1.0f64.to_le_bytes());
        assert_eq!(Raster::from_bytes(&bytes).unwrap(), r);
    }

    #[test]
    fn round_trips_every_dtype() {
        let f32s = vec![
            0.1f32 as f64,
            -2.5,
            1e-30f32 as f64,
            3.0e38f32 as f64,
            -0.0,
            7.0,
        ];
        let r = Raster::new(3, 1, 2, Dtype::F32, f32s).unwrap();
        assert_eq!(Raster::from_bytes(&r.to_bytes().unwrap()).unwrap(), r);

        let u16s = vec![0.0, 1.0, 65535.0, 1234.0];
        let r = Raster::new(2, 2, 1, Dtype::U16, u16s).unwrap();
        let back = Raster::from_bytes(&r.to_bytes().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.dtype(), Dtype::U16);

        let f64s = vec![std::f64::consts::PI, -1e-300, 5e-324];
        let r = Raster::new(1, 3, 1, Dtype::F64, f64s).unwrap();
        let back = Raster::from_bytes(&r.to_bytes().unwrap()).unwrap();
        assert!(back
            .data()
            .iter()
            .zip(r.data())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn distinct_parse_errors() {
        let r = Raster::from_f64(2, 2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let good = r.to_bytes().unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(Raster::from_bytes(&bad), Err(Error::BadMagic(_))));

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(
            Raster::from_bytes(&bad),
            Err(Error::UnsupportedVersion(9))
        ));

        let mut bad = good.clone();
        bad[5] = 7;
        assert!(matches!(
            Raster::from_bytes(&bad),
            Err(Error::UnknownDtype(7))
        ));

        assert!(matches!(
            Raster::from_bytes(&good[..good.len() - 1]),
            Err(Error::Truncated {
                expected: 50,
                actual: 49
            })
        ));
        assert!(matches!(
            Raster::from_bytes(&good[..10]),
            Err(Error::Truncated { .. })
        ));

        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(
            Raster::from_bytes(&bad),
            Err(Error::TrailingBytes(1))
        ));

        let mut bad = good.clone();
        bad[6..18].copy_from_slice(&[0xff; 12]);
        let err = Raster::from_bytes(&bad);
        if usize::BITS == 64 {
            // 2^96 elements cannot be addressed
            assert!(matches!(err, Err(Error::DimensionOverflow { .. })));
        } else {
            assert!(err.is_err());
        }

        let mut bad = good.clone();
        bad[18..26].copy_from_slice(&f64::INFINITY.to_le_bytes());
        assert!(matches!(Raster::from_bytes(&bad), Err(Error::NonFinite(0))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.uprf");
        let r = Raster::from_f64(3, 2, 2, (0..12).map(|i| i as f64 / 3.0).collect()).unwrap();
        write_raster(&path, &r).unwrap();
        assert_eq!(read_raster(&path).unwrap(), r);
        assert!(read_raster(dir.path().join("missing")).is_err());
    }
}
