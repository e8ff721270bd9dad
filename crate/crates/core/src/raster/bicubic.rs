use super::Raster;
use crate::error::{invalid, Result};
use crate::exec::{self, Execution};

const KEYS_A: f64 = -0.5;

/// Keys cubic convolution kernel with `a = -0.5`.
pub fn keys_weight(t: f64) -> f64 {
    let t = t.abs();
    if t <= 1.0 {
        ((KEYS_A + 2.0) * t - (KEYS_A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((KEYS_A * t - 5.0 * KEYS_A) * t + 8.0 * KEYS_A) * t - 4.0 * KEYS_A
    } else {
        0.0
    }
}

/// Four clamped source taps and their weights for every output coordinate.
fn taps(src_len: usize, factor: usize) -> Vec<([usize; 4], [f64; 4])> {
    let last = src_len as isize - 1;
    (0..src_len * factor)
        .map(|o| {
            // pixel-centre alignment
            let s = (o as f64 + 0.5) / factor as f64 - 0.5;
            let base = s.floor();
            let t = s - base;
            let base = base as isize;
            let idx = [-1isize, 0, 1, 2].map(|k| (base + k).clamp(0, last) as usize);
            let w = [
                keys_weight(t + 1.0),
                keys_weight(t),
                keys_weight(1.0 - t),
                keys_weight(2.0 - t),
            ];
            (idx, w)
        })
        .collect()
}

/// `Σ w_k x_k` evaluated as `x_1 + Σ w_k (x_k - x_1)`, which equals it
/// because the weights sum to one and is exact on constant neighbourhoods.
#[inline]
fn centred_sum(wt: &[f64; 4], x: impl Fn(usize) -> f64) -> f64 {
    let centre = x(1);
    centre + (0..4).map(|k| wt[k] * (x(k) - centre)).sum::<f64>()
}

/// Upsamples every band by an integer `factor` with separable Keys bicubic
/// interpolation and border clamping. `factor == 1` returns a copy.
pub fn bicubic_upsample(raster: &Raster, factor: usize) -> Result<Raster> {
    bicubic_upsample_with(raster, factor, Execution::default())
}

pub fn bicubic_upsample_with(raster: &Raster, factor: usize, exec: Execution) -> Result<Raster> {
    if factor == 0 {
        return Err(invalid("upsampling factor must be at least 1"));
    }
    if factor == 1 {
        return Ok(raster.clone());
    }
    let (w, h, bands) = (raster.width(), raster.height(), raster.bands());
    let (ow, oh) = (w * factor, h * factor);
    let xt = taps(w, factor);
    let yt = taps(h, factor);

    // horizontal pass: bands * h rows of width ow
    let mut wide = vec![0.0; bands * h * ow];
    let src = raster.data();
    exec::for_each_chunk_mut(exec, &mut wide, ow, |r, row| {
        let line = &src[r * w..(r + 1) * w];
        for (out, (idx, wt)) in row.iter_mut().zip(&xt) {
            *out = centred_sum(wt, |k| line[idx[k]]);
        }
    });

    // vertical pass: bands * oh rows of width ow
    let mut out = vec![0.0; bands * oh * ow];
    exec::for_each_chunk_mut(exec, &mut out, ow, |r, row| {
        let (b, oy) = (r / oh, r % oh);
        let (idx, wt) = &yt[oy];
        let plane = &wide[b * h * ow..(b + 1) * h * ow];
        for (x, v) in row.iter_mut().enumerate() {
            *v = centred_sum(wt, |k| plane[idx[k] * ow + x]);
        }
    });
    Raster::from_f64(ow, oh, bands, out)
}
