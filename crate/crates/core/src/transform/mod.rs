//! Empirical quantile transforms.
//!
//! A [`QuantileTransform`] discretizes the empirical CDF of one band by `m`
//! quantiles and maps a pixel value `x` to `F_T⁻¹(u(x))`, where `u(x)` is the
//! average of a forward and a backward piecewise-linear interpolation of the
//! quantiles onto the uniform grid `{0, 1/(m-1), ..., 1}`. Averaging both
//! directions resolves plateaus (repeated quantiles) to their midpoint.

mod format;

use crate::error::{invalid, Result};
use crate::exec::{self, Execution};
use crate::normal::normal_quantile;
use crate::raster::Raster;

pub use format::TRANSFORM_MAGIC;

/// Probability clip used for the normal target unless overridden.
pub const DEFAULT_EPSILON: f64 = 1e-7;

/// A non-empty vector of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector(Vec<f64>);

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sample vector is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("sample {i} is not finite")));
        }
        Ok(SampleVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for SampleVector {
    type Error = crate::Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        SampleVector::new(values)
    }
}

impl TryFrom<&[f64]> for SampleVector {
    type Error = crate::Error;

    fn try_from(values: &[f64]) -> Result<Self> {
        SampleVector::new(values.to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    StandardNormal,
    StandardUniform,
}

impl TargetKind {
    pub fn name(self) -> &'static str {
        match self {
            TargetKind::StandardNormal => "normal",
            TargetKind::StandardUniform => "uniform",
        }
    }
}

impl std::str::FromStr for TargetKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(TargetKind::StandardNormal),
            "uniform" => Ok(TargetKind::StandardUniform),
            other => Err(invalid(format!("unknown target `{other}`"))),
        }
    }
}

/// The shared distribution every band is mapped onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetDistribution {
    kind: TargetKind,
    epsilon: f64,
}

impl TargetDistribution {
    pub fn normal() -> Self {
        TargetDistribution {
            kind: TargetKind::StandardNormal,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn uniform() -> Self {
        TargetDistribution {
            kind: TargetKind::StandardUniform,
            epsilon: DEFAULT_EPSILON,
        }
    }

    /// `epsilon` must lie in (0, 0.5); it only affects the normal target.
    pub fn new(kind: TargetKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(invalid(format!("epsilon {epsilon} outside (0, 0.5)")));
        }
        Ok(TargetDistribution { kind, epsilon })
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `F_T⁻¹(u)`. Uniform is the identity; normal clamps `u` to `[ε, 1-ε]`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(invalid(format!("probability {u} outside [0, 1]")));
        }
        Ok(self.inverse_cdf_unchecked(u))
    }

    #[inline]
    pub(crate) fn inverse_cdf_unchecked(&self, u: f64) -> f64 {
        match self.kind {
            TargetKind::StandardUniform => u,
            TargetKind::StandardNormal => {
                normal_quantile(u.clamp(self.epsilon, 1.0 - self.epsilon))
            }
        }
    }

    /// Closed interval every transformed value falls in.
    pub fn output_range(&self) -> (f64, f64) {
        match self.kind {
            TargetKind::StandardUniform => (0.0, 1.0),
            TargetKind::StandardNormal => (
                normal_quantile(self.epsilon),
                normal_quantile(1.0 - self.epsilon),
            ),
        }
    }
}

/// `Φ⁻¹`-style free function over a target; see [`TargetDistribution::inverse_cdf`].
pub fn inverse_cdf(target: &TargetDistribution, u: f64) -> Result<f64> {
    target.inverse_cdf(u)
}

/// The `m` empirical quantiles `q_i = inf{x ∈ X : P(X ≤ x) ≥ i/(m-1)}`.
pub fn compute_quantiles(samples: &SampleVector, m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(invalid(format!(
            "quantile count m = {m} must be at least 2"
        )));
    }
    let mut sorted = samples.as_slice().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(quantiles_of_sorted(&sorted, m))
}

/// `sorted` must be ascending and non-empty.
pub(crate) fn quantiles_of_sorted(sorted: &[f64], m: usize) -> Vec<f64> {
    let n = sorted.len() as u128;
    let steps = (m - 1) as u128;
    (0..m)
        .map(|i| {
            // smallest k (0-based) with (k + 1) / n >= i / (m - 1)
            let need = (i as u128 * n).div_ceil(steps);
            let k = need.saturating_sub(1) as usize;
            sorted[k]
        })
        .collect()
}

/// Piecewise-linear interpolation from the `q` axis onto the `u` axis.
///
/// Saturates to `u[0]` for `x <= q[0]` and to `u[m-1]` for `x > q[m-1]`;
/// otherwise interpolates on the segment with `q[i] < x <= q[i+1]`.
pub fn interp(x: f64, q: &[f64], u: &[f64]) -> Result<f64> {
    if q.len() != u.len() {
        return Err(invalid(format!(
            "interp axes differ in length ({} vs {})",
            q.len(),
            u.len()
        )));
    }
    if q.len() < 2 {
        return Err(invalid("interp needs at least two knots"));
    }
    Ok(interp_by(x, q.len(), |k| q[k], |k| u[k]))
}

/// Core of [`interp`] over virtual axes, so reversed/negated views never allocate.
#[inline]
fn interp_by(x: f64, m: usize, q: impl Fn(usize) -> f64, u: impl Fn(usize) -> f64) -> f64 {
    if x <= q(0) {
        return u(0);
    }
    if x > q(m - 1) {
        return u(m - 1);
    }
    // first j with q(j) >= x; q(0) < x <= q(m-1) puts j in 1..m
    let (mut lo, mut hi) = (1, m - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if q(mid) < x {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let i = lo - 1;
    let (q0, q1) = (q(i), q(lo));
    let (u0, u1) = (u(i), u(lo));
    if x == q1 {
        return u1;
    }
    let t = (x - q0) / (q1 - q0);
    (u0 + t * (u1 - u0)).min(u1)
}

/// A fitted per-band quantile map onto a target distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTransform {
    quantiles: Vec<f64>,
    target: TargetDistribution,
    band_index: usize,
}

impl QuantileTransform {
    pub fn new(quantiles: Vec<f64>, target: TargetDistribution, band_index: usize) -> Result<Self> {
        if quantiles.len() < 2 {
            return Err(invalid("a transform needs at least two quantiles"));
        }
        if let Some(i) = quantiles.iter().position(|q| !q.is_finite()) {
            return Err(invalid(format!("quantile {i} is not finite")));
        }
        if quantiles.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("quantiles must be non-decreasing"));
        }
        Ok(QuantileTransform {
            quantiles,
            target,
            band_index,
        })
    }

    pub fn quantiles(&self) -> &[f64] {
        &self.quantiles
    }

    pub fn m(&self) -> usize {
        self.quantiles.len()
    }

    pub fn target(&self) -> &TargetDistribution {
        &self.target
    }

    pub fn band_index(&self) -> usize {
        self.band_index
    }

    #[inline]
    fn grid(&self, i: usize) -> f64 {
        i as f64 / (self.quantiles.len() - 1) as f64
    }

    /// The recomputed reference grid `U = {0, 1/(m-1), ..., 1}`.
    pub fn reference_grid(&self) -> Vec<f64> {
        (0..self.m()).map(|i| self.grid(i)).collect()
    }

    /// `u_↑(x) = interp(x, Q, U)`.
    #[inline]
    pub fn forward_ecdf(&self, x: f64) -> f64 {
        let q = &self.quantiles;
        interp_by(x, q.len(), |k| q[k], |k| self.grid(k))
    }

    /// `u_↓(x) = -interp(-x, -Q_rev, -U_rev)`.
    #[inline]
    pub fn backward_ecdf(&self, x: f64) -> f64 {
        let q = &self.quantiles;
        let last = q.len() - 1;
        -interp_by(-x, q.len(), |k| -q[last - k], |k| -self.grid(last - k))
    }

    /// Bidirectional eCDF value `u(x) = u_↑(x)/2 + u_↓(x)/2`, always in `[0, 1]`.
    #[inline]
    pub fn ecdf_value(&self, x: f64) -> f64 {
        self.forward_ecdf(x) / 2.0 + self.backward_ecdf(x) / 2.0
    }

    /// `T(x) = F_T⁻¹(u(x))`.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.target.inverse_cdf_unchecked(self.ecdf_value(x))
    }

    pub fn apply_slice(&self, xs: &[f64]) -> Vec<f64> {
        self.apply_slice_with(xs, Execution::default())
    }

    pub fn apply_slice_with(&self, xs: &[f64], exec: Execution) -> Vec<f64> {
        exec::map_slice(exec, xs, |&x| self.apply(x))
    }
}

/// Free-function form of [`QuantileTransform::ecdf_value`].
pub fn ecdf_value(x: f64, transform: &QuantileTransform) -> f64 {
    transform.ecdf_value(x)
}

/// Free-function form of [`QuantileTransform::apply`].
pub fn apply(transform: &QuantileTransform, x: f64) -> f64 {
    transform.apply(x)
}

/// Fits one band: the transform's quantiles are `compute_quantiles(samples, m)`.
pub fn fit_band(
    samples: &SampleVector,
    m: usize,
    target: TargetDistribution,
    band_index: usize,
) -> Result<QuantileTransform> {
    let quantiles = compute_quantiles(samples, m)?;
    QuantileTransform::new(quantiles, target, band_index)
}

/// One fitted transform per band, plus the sampling metadata that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSet {
    transforms: Vec<QuantileTransform>,
    n_sampled: usize,
    seed: u64,
}

impl TransformSet {
    pub fn new(transforms: Vec<QuantileTransform>, n_sampled: usize, seed: u64) -> Result<Self> {
        let first = transforms
            .first()
            .ok_or_else(|| invalid("a transform set needs at least one band"))?;
        let (m, target) = (first.m(), first.target);
        for (b, t) in transforms.iter().enumerate() {
            if t.m() != m || t.target != target {
                return Err(invalid(format!(
                    "band {b} does not share m and target with band 0"
                )));
            }
            if t.band_index != b {
                return Err(invalid(format!(
                    "transform at position {b} carries band index {}",
                    t.band_index
                )));
            }
        }
        Ok(TransformSet {
            transforms,
            n_sampled,
            seed,
        })
    }

    pub fn transforms(&self) -> &[QuantileTransform] {
        &self.transforms
    }

    pub fn bands(&self) -> usize {
        self.transforms.len()
    }

    pub fn m(&self) -> usize {
        self.transforms[0].m()
    }

    pub fn target(&self) -> &TargetDistribution {
        &self.transforms[0].target
    }

    pub fn n_sampled(&self) -> usize {
        self.n_sampled
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Transforms every band of `raster` with its own fitted transform.
pub fn apply_raster(set: &TransformSet, raster: &Raster) -> Result<Raster> {
    apply_raster_with(set, raster, Execution::default())
}

pub fn apply_raster_with(set: &TransformSet, raster: &Raster, exec: Execution) -> Result<Raster> {
    if set.bands() != raster.bands() {
        return Err(invalid(format!(
            "transform set has {} bands, raster has {}",
            set.bands(),
            raster.bands()
        )));
    }
    let plane = raster.width() * raster.height();
    let mut out = raster.data().to_vec();
    // Rows are the unit of parallel work; a row never straddles two bands.
    let row = raster.width();
    exec::for_each_chunk_mut(exec, &mut out, row, |r, chunk| {
        let t = &set.transforms[r * row / plane];
        for v in chunk.iter_mut() {
            *v = t.apply(*v);
        }
    });
    Raster::from_f64(raster.width(), raster.height(), raster.bands(), out)
}
