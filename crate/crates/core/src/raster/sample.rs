//! Seeded pixel sampling without replacement.

use std::collections::HashMap;

use super::Raster;
use crate::error::{invalid, Result};
use crate::transform::SampleVector;

/// The splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Draws `n` values without replacement by a partial Fisher–Yates shuffle
/// of indices, using `j = i + next() % (len - i)` at step `i`. When
/// `n >= values.len()` every value is returned in its original order.
pub fn sample_values(values: &[f64], n: usize, seed: u64) -> Result<SampleVector> {
    if n == 0 {
        return Err(invalid("sample size must be at least 1"));
    }
    let len = values.len();
    if n >= len {
        return SampleVector::new(values.to_vec());
    }
    let mut rng = SplitMix64::new(seed);
    let picked = if n.saturating_mul(8) >= len {
        dense_shuffle(len, n, &mut rng)
    } else {
        sparse_shuffle(len, n, &mut rng)
    };
    SampleVector::new(picked.into_iter().map(|i| values[i]).collect())
}

fn dense_shuffle(len: usize, n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    for i in 0..n {
        let j = i + (rng.next_u64() % (len - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(n);
    idx
}

/// Same permutation as [`dense_shuffle`], storing only displaced slots.
fn sparse_shuffle(len: usize, n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut moved: HashMap<usize, usize> = HashMap::with_capacity(2 * n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let j = i + (rng.next_u64() % (len - i) as u64) as usize;
        let at_i = moved.get(&i).copied().unwrap_or(i);
        let at_j = moved.get(&j).copied().unwrap_or(j);
        out.push(at_j);
        moved.insert(j, at_i);
    }
    out
}

/// Samples `n` pixels of `band`, seeding the generator with `seed ^ band`.
pub fn sample_pixels(raster: &Raster, band: usize, n: usize, seed: u64) -> Result<SampleVector> {
    if band >= raster.bands() {
        return Err(invalid(format!(
            "band {band} out of range for {} bands",
            raster.bands()
        )));
    }
    sample_values(raster.band(band), n, seed ^ band as u64)
}
