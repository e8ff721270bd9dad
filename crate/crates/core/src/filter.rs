//! Separable Gaussian blur with border clamping.

use crate::exec::{self, Execution};

/// Normalized Gaussian taps for offsets `-r..=r`, `r = floor(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).floor() as isize;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Blurs one `width × height` plane. Each tap is weighted relative to the
/// centre pixel so constant regions come out bit-exact.
pub(crate) fn gaussian_blur(
    plane: &[f64],
    width: usize,
    height: usize,
    sigma: f64,
    exec: Execution,
) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let clamp = |i: isize, len: usize| i.clamp(0, len as isize - 1) as usize;

    let mut horiz = vec![0.0; plane.len()];
    exec::for_each_chunk_mut(exec, &mut horiz, width, |y, row| {
        let line = &plane[y * width..(y + 1) * width];
        for (x, v) in row.iter_mut().enumerate() {
            let c = line[x];
            *v = c + kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * (line[clamp(x as isize + k as isize - radius, width)] - c))
                .sum::<f64>();
        }
    });
    let mut out = vec![0.0; plane.len()];
    exec::for_each_chunk_mut(exec, &mut out, width, |y, row| {
        for (x, v) in row.iter_mut().enumerate() {
            let c = horiz[y * width + x];
            let at = |k: usize| horiz[clamp(y as isize + k as isize - radius, height) * width + x];
            *v = c + kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * (at(k) - c))
                .sum::<f64>();
        }
    });
    out
}
