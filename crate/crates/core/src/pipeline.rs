//! Fit, transform, fuse and evaluate.
//!
//! Transforms are fitted on training pairs only (per band, pixels pooled
//! across all training images), then applied to any new LRMS/PAN pair. The
//! fused product is `fuser(L̃, P̃) + L↑`, where `L↑` is the bicubic upsample
//! of the untransformed LRMS.

use std::str::FromStr;

use crate::error::{invalid, Result};
use crate::exec::{self, Execution};
use crate::metrics::{blur_plane, d_lambda, d_rho, d_s, MetricsReport};
use crate::raster::{bicubic_upsample, sample_values, Raster};
use crate::transform::{apply_raster, fit_band, TargetDistribution, TransformSet};

/// An LRMS/PAN pair with an optional full-resolution reference.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionInputs {
    lrms: Raster,
    pan: Raster,
    reference: Option<Raster>,
    ratio: usize,
}

impl FusionInputs {
    pub fn new(lrms: Raster, pan: Raster, reference: Option<Raster>, ratio: usize) -> Result<Self> {
        if ratio == 0 {
            return Err(invalid("resolution ratio must be at least 1"));
        }
        if pan.bands() != 1 {
            return Err(invalid(format!(
                "PAN must have one band, has {}",
                pan.bands()
            )));
        }
        if lrms.width() * ratio != pan.width() || lrms.height() * ratio != pan.height() {
            return Err(invalid(format!(
                "PAN {}x{} is not LRMS {}x{} times {ratio}",
                pan.width(),
                pan.height(),
                lrms.width(),
                lrms.height()
            )));
        }
        if let Some(h) = &reference {
            if h.width() != pan.width() || h.height() != pan.height() || h.bands() != lrms.bands() {
                return Err(invalid("reference must match PAN size and LRMS band count"));
            }
        }
        Ok(FusionInputs {
            lrms,
            pan,
            reference,
            ratio,
        })
    }

    pub fn lrms(&self) -> &Raster {
        &self.lrms
    }

    pub fn pan(&self) -> &Raster {
        &self.pan
    }

    pub fn reference(&self) -> Option<&Raster> {
        self.reference.as_ref()
    }

    pub fn ratio(&self) -> usize {
        self.ratio
    }
}

/// Produces the residual added to `L↑`: B bands at PAN scale.
pub trait Fuser: Sync {
    fn residual(&self, lrms: &Raster, pan: &Raster, ratio: usize) -> Result<Raster>;
}

impl<F> Fuser for F
where
    F: Fn(&Raster, &Raster, usize) -> Result<Raster> + Sync,
{
    fn residual(&self, lrms: &Raster, pan: &Raster, ratio: usize) -> Result<Raster> {
        self(lrms, pan, ratio)
    }
}

/// Residual identically zero, so the product is `L↑`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFuser;

impl Fuser for ZeroFuser {
    fn residual(&self, lrms: &Raster, pan: &Raster, _ratio: usize) -> Result<Raster> {
        Raster::filled(pan.width(), pan.height(), lrms.bands(), 0.0)
    }
}

/// High-pass detail injection: band `l` receives `g_l · (P - blur(P))` with
/// `g_l` the global regression slope of the upsampled band on `blur(P)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighpassFuser;

/// `cov(x, y) / var(y)`, or 0 when `y` is constant.
fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut cov, mut var) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        var += (b - my) * (b - my);
    }
    if var == 0.0 {
        0.0
    } else {
        cov / var
    }
}

impl HighpassFuser {
    /// Gains `g_l` for every band.
    pub fn gains(&self, lrms: &Raster, pan: &Raster, ratio: usize) -> Result<Vec<f64>> {
        let up = bicubic_upsample(lrms, ratio)?;
        let low = blur_plane(pan.band(0), pan.width(), pan.height(), ratio);
        Ok((0..lrms.bands())
            .map(|l| regression_slope(up.band(l), &low))
            .collect())
    }
}

impl Fuser for HighpassFuser {
    fn residual(&self, lrms: &Raster, pan: &Raster, ratio: usize) -> Result<Raster> {
        if pan.bands() != 1 {
            return Err(invalid("PAN must have one band"));
        }
        let (w, h) = (pan.width(), pan.height());
        let gains = self.gains(lrms, pan, ratio)?;
        let low = blur_plane(pan.band(0), w, h, ratio);
        let detail: Vec<f64> = pan.band(0).iter().zip(&low).map(|(p, l)| p - l).collect();
        let data = gains
            .iter()
            .flat_map(|&g| detail.iter().map(move |d| g * d))
            .collect();
        Raster::from_f64(w, h, lrms.bands(), data)
    }
}

/// The two built-in fusers, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinFuser {
    Zero,
    Highpass,
}

impl FromStr for BuiltinFuser {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(BuiltinFuser::Zero),
            "highpass" => Ok(BuiltinFuser::Highpass),
            other => Err(invalid(format!("unknown fuser `{other}`"))),
        }
    }
}

impl Fuser for BuiltinFuser {
    fn residual(&self, lrms: &Raster, pan: &Raster, ratio: usize) -> Result<Raster> {
        match self {
            BuiltinFuser::Zero => ZeroFuser.residual(lrms, pan, ratio),
            BuiltinFuser::Highpass => HighpassFuser.residual(lrms, pan, ratio),
        }
    }
}

/// Pools band `b` of every raster and fits it from `n` sampled pixels,
/// seeding the sampler with `seed ^ b`.
pub fn fit_raster_set(
    rasters: &[&Raster],
    m: usize,
    n: usize,
    seed: u64,
    target: TargetDistribution,
) -> Result<TransformSet> {
    let first = rasters
        .first()
        .ok_or_else(|| invalid("at least one raster is needed to fit"))?;
    let bands = first.bands();
    if rasters.iter().any(|r| r.bands() != bands) {
        return Err(invalid("training rasters disagree on band count"));
    }
    let transforms = exec::map_range(Execution::default(), bands, |b| {
        let pooled: Vec<f64> = rasters
            .iter()
            .flat_map(|r| r.band(b).iter().copied())
            .collect();
        let samples = sample_values(&pooled, n, seed ^ b as u64)?;
        fit_band(&samples, m, target, b)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    TransformSet::new(transforms, n, seed)
}

/// Fits the LRMS set and the PAN set over a training split.
pub fn fit_transform_set(
    training: &[FusionInputs],
    m: usize,
    n: usize,
    seed: u64,
    target: TargetDistribution,
) -> Result<(TransformSet, TransformSet)> {
    if training.is_empty() {
        return Err(invalid("training split is empty"));
    }
    let lrms: Vec<&Raster> = training.iter().map(|t| &t.lrms).collect();
    let pan: Vec<&Raster> = training.iter().map(|t| &t.pan).collect();
    Ok((
        fit_raster_set(&lrms, m, n, seed, target)?,
        fit_raster_set(&pan, m, n, seed, target)?,
    ))
}

/// `(L̃, P̃)`.
pub fn transform_pair(
    sets: (&TransformSet, &TransformSet),
    inputs: &FusionInputs,
) -> Result<(Raster, Raster)> {
    Ok((
        apply_raster(sets.0, &inputs.lrms)?,
        apply_raster(sets.1, &inputs.pan)?,
    ))
}

/// `fuser(L̃, P̃) + L↑`.
pub fn fuse(
    fuser: &dyn Fuser,
    lrms_t: &Raster,
    pan_t: &Raster,
    lrms_up: &Raster,
) -> Result<Raster> {
    if lrms_up.width() != pan_t.width()
        || lrms_up.height() != pan_t.height()
        || lrms_up.bands() != lrms_t.bands()
    {
        return Err(invalid(
            "upsampled LRMS must be at PAN scale with LRMS bands",
        ));
    }
    let ratio = pan_t.width() / lrms_t.width();
    if ratio == 0
        || lrms_t.width() * ratio != pan_t.width()
        || lrms_t.height() * ratio != pan_t.height()
    {
        return Err(invalid("PAN is not an integer multiple of the LRMS size"));
    }
    let residual = fuser.residual(lrms_t, pan_t, ratio)?;
    if !residual.same_shape(lrms_up) {
        return Err(invalid("fuser returned a residual of the wrong shape"));
    }
    let data = residual
        .data()
        .iter()
        .zip(lrms_up.data())
        .map(|(r, u)| r + u)
        .collect();
    Raster::from_f64(lrms_up.width(), lrms_up.height(), lrms_up.bands(), data)
}

/// Full test-time path: optional transform, bicubic `L↑` of the raw LRMS, fuse.
pub fn run_fusion(
    fuser: &dyn Fuser,
    sets: Option<(&TransformSet, &TransformSet)>,
    inputs: &FusionInputs,
) -> Result<Raster> {
    let lrms_up = bicubic_upsample(&inputs.lrms, inputs.ratio)?;
    match sets {
        Some(sets) => {
            let (lt, pt) = transform_pair(sets, inputs)?;
            fuse(fuser, &lt, &pt, &lrms_up)
        }
        None => fuse(fuser, &inputs.lrms, &inputs.pan, &lrms_up),
    }
}

/// Mean absolute difference `‖H - Ĥ‖₁ / N`.
pub fn residual_l1_loss(reference: &Raster, fused: &Raster) -> Result<f64> {
    if !reference.same_shape(fused) {
        return Err(invalid("loss inputs differ in shape"));
    }
    let total: f64 = reference
        .data()
        .iter()
        .zip(fused.data())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / reference.data().len() as f64)
}

/// `D_λ`, `D_S`, `D_ρ` (block side = ratio) and QNR for one fused product.
pub fn evaluate(fused: &Raster, inputs: &FusionInputs, window: usize) -> Result<MetricsReport> {
    let dl = d_lambda(fused, &inputs.lrms, window)?;
    let ds = d_s(fused, &inputs.lrms, &inputs.pan, inputs.ratio, window)?;
    let dr = d_rho(fused, &inputs.pan, inputs.ratio)?;
    MetricsReport::new(dl, ds, dr)
}

/// Which fitting parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// quantile count
    M,
    /// sampled pixels per band
    N,
}

impl FromStr for SweepParam {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m" => Ok(SweepParam::M),
            "n" => Ok(SweepParam::N),
            other => Err(invalid(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

/// Settings held fixed while one parameter is swept.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub target: TargetDistribution,
    pub window: usize,
    pub fuser: BuiltinFuser,
}

/// Repeats fit → fuse → evaluate for each value of `param`.
pub fn sweep(
    training: &[FusionInputs],
    test: &FusionInputs,
    param: SweepParam,
    values: &[usize],
    config: &SweepConfig,
) -> Result<Vec<(usize, MetricsReport)>> {
    values
        .iter()
        .map(|&v| {
            let (m, n) = match param {
                SweepParam::M => (v, config.n),
                SweepParam::N => (config.m, v),
            };
            let (ls, ps) = fit_transform_set(training, m, n, config.seed, config.target)?;
            let fused = run_fusion(&config.fuser, Some((&ls, &ps)), test)?;
            Ok((v, evaluate(&fused, test, config.window)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::degrade_pan;
    use crate::raster::SplitMix64;

    fn noisy(w: usize, h: usize, bands: usize, seed: u64, scale: f64, offset: f64) -> Raster {
        let mut rng = SplitMix64::new(seed);
        let data = (0..w * h * bands)
            .map(|_| offset + scale * rng.next_f64())
            .collect();
        Raster::from_f64(w, h, bands, data).unwrap()
    }

    fn pair(seed: u64) -> FusionInputs {
        let lrms = noisy(8, 8, 3, seed, 10.0, 5.0);
        let pan = noisy(16, 16, 1, seed + 1, 20.0, 3.0);
        FusionInputs::new(lrms, pan, None, 2).unwrap()
    }

    #[test]
    fn inputs_validation() {
        let l = Raster::filled(4, 4, 2, 1.0).unwrap();
        let p = Raster::filled(8, 8, 1, 1.0).unwrap();
        assert!(FusionInputs::new(l.clone(), p.clone(), None, 2).is_ok());
        assert!(FusionInputs::new(l.clone(), p.clone(), None, 3).is_err());
        assert!(FusionInputs::new(l.clone(), l.clone(), None, 1).is_err());
        let bad_ref = Raster::filled(8, 8, 3, 1.0).unwrap();
        assert!(FusionInputs::new(l.clone(), p.clone(), Some(bad_ref), 2).is_err());
        let good_ref = Raster::filled(8, 8, 2, 1.0).unwrap();
        assert!(FusionInputs::new(l, p, Some(good_ref), 2).is_ok());
    }

    #[test]
    fn fit_uses_full_pooled_band_when_saturated() {
        let p = pair(1);
        let (ls, ps) = fit_transform_set(
            std::slice::from_ref(&p),
            9,
            1_000_000,
            0,
            TargetDistribution::uniform(),
        )
        .unwrap();
        for b in 0..3 {
            let s = crate::transform::SampleVector::new(p.lrms().band(b).to_vec()).unwrap();
            let q = crate::transform::compute_quantiles(&s, 9).unwrap();
            assert_eq!(ls.transforms()[b].quantiles(), q.as_slice());
        }
        assert_eq!(ps.bands(), 1);
        assert_eq!((ls.m(), ls.n_sampled(), ls.seed()), (9, 1_000_000, 0));
    }

    #[test]
    fn fit_pools_disjoint_constants() {
        let mk = |v: f64| {
            FusionInputs::new(
                Raster::filled(2, 2, 1, v).unwrap(),
                Raster::filled(4, 4, 1, v).unwrap(),
                None,
                2,
            )
            .unwrap()
        };
        let (ls, ps) = fit_transform_set(
            &[mk(0.0), mk(1.0)],
            3,
            100,
            5,
            TargetDistribution::uniform(),
        )
        .unwrap();
        assert_eq!(ls.transforms()[0].quantiles(), &[0.0, 0.0, 1.0]);
        assert_eq!(ps.transforms()[0].quantiles(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn fit_is_deterministic_and_checks_bands() {
        let train = [pair(1), pair(7)];
        let a = fit_transform_set(&train, 17, 50, 99, TargetDistribution::normal()).unwrap();
        let b = fit_transform_set(&train, 17, 50, 99, TargetDistribution::normal()).unwrap();
        assert_eq!(a, b);
        let c = fit_transform_set(&train, 17, 50, 100, TargetDistribution::normal()).unwrap();
        assert_ne!(a.0, c.0);

        let odd = FusionInputs::new(
            Raster::filled(8, 8, 2, 1.0).unwrap(),
            Raster::filled(16, 16, 1, 1.0).unwrap(),
            None,
            2,
        )
        .unwrap();
        assert!(
            fit_transform_set(&[pair(1), odd], 5, 10, 0, TargetDistribution::uniform()).is_err()
        );
        assert!(fit_transform_set(&[], 5, 10, 0, TargetDistribution::uniform()).is_err());
    }

    #[test]
    fn transform_pair_constant_and_rank_preserving() {
        let p = pair(3);
        let sets = fit_transform_set(
            std::slice::from_ref(&p),
            33,
            10_000,
            0,
            TargetDistribution::uniform(),
        )
        .unwrap();
        let (lt, pt) = transform_pair((&sets.0, &sets.1), &p).unwrap();
        assert!(lt.same_shape(p.lrms()) && pt.same_shape(p.pan()));
        for b in 0..3 {
            let raw = p.lrms().band(b);
            let out = lt.band(b);
            for i in 0..raw.len() {
                for j in 0..raw.len() {
                    if raw[i] <= raw[j] {
                        assert!(out[i] <= out[j]);
                    }
                }
            }
        }

        let flat = FusionInputs::new(
            Raster::filled(8, 8, 3, 9.0).unwrap(),
            Raster::filled(16, 16, 1, 4.0).unwrap(),
            None,
            2,
        )
        .unwrap();
        let (lt, pt) = transform_pair((&sets.0, &sets.1), &flat).unwrap();
        for b in 0..3 {
            assert!(lt.band(b).iter().all(|&v| v == lt.band(b)[0]));
        }
        assert!(pt.data().iter().all(|&v| v == pt.data()[0]));
    }

    #[test]
    fn fuse_examples() {
        let p = pair(5);
        let up = bicubic_upsample(p.lrms(), 2).unwrap();
        let fused = fuse(&ZeroFuser, p.lrms(), p.pan(), &up).unwrap();
        assert_eq!(fused, up);

        let plus = |l: &Raster, pan: &Raster, _: usize| {
            Raster::filled(pan.width(), pan.height(), l.bands(), 1.5)
        };
        let fused = fuse(&plus, p.lrms(), p.pan(), &up).unwrap();
        assert!(fused
            .data()
            .iter()
            .zip(up.data())
            .all(|(f, u)| *f == u + 1.5));

        assert!(fuse(&ZeroFuser, p.lrms(), p.pan(), p.lrms()).is_err());
    }

    #[test]
    fn highpass_fuser_injects_its_detail_plane() {
        let p = pair(11);
        let up = bicubic_upsample(p.lrms(), 2).unwrap();
        let fused = fuse(&HighpassFuser, p.lrms(), p.pan(), &up).unwrap();
        // detail plane computed independently of the fuser
        let kernel = crate::filter::gaussian_kernel(1.0);
        let (w, h) = (16isize, 16isize);
        let px = |x: isize, y: isize| {
            p.pan()
                .get(0, x.clamp(0, w - 1) as usize, y.clamp(0, h - 1) as usize)
        };
        let r = (kernel.len() / 2) as isize;
        let mut blurred = vec![0.0; 256];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (i, ki) in kernel.iter().enumerate() {
                    for (j, kj) in kernel.iter().enumerate() {
                        acc += ki * kj * px(x + j as isize - r, y + i as isize - r);
                    }
                }
                blurred[(y * w + x) as usize] = acc;
            }
        }
        let gains = HighpassFuser.gains(p.lrms(), p.pan(), 2).unwrap();
        for (b, g) in gains.iter().enumerate() {
            for (i, blur) in blurred.iter().enumerate() {
                let detail = p.pan().data()[i] - blur;
                let injected = fused.band(b)[i] - up.band(b)[i];
                assert!((injected - g * detail).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn highpass_gains() {
        // constant PAN: no detail
        let l = noisy(4, 4, 2, 1, 1.0, 0.0);
        let flat = Raster::filled(8, 8, 1, 2.0).unwrap();
        let r = HighpassFuser.residual(&l, &flat, 2).unwrap();
        assert!(r.data().iter().all(|&v| v == 0.0));

        // constant LRMS: zero covariance
        let l = Raster::filled(4, 4, 2, 3.0).unwrap();
        let pan = noisy(8, 8, 1, 2, 1.0, 0.0);
        assert!(HighpassFuser
            .gains(&l, &pan, 2)
            .unwrap()
            .iter()
            .all(|&g| g.abs() < 1e-12));

        // correlated pair: gain equals the least-squares slope
        let pan = noisy(16, 16, 1, 4, 1.0, 0.0);
        let low = degrade_pan(&pan, 2).unwrap();
        let l = Raster::from_bands(
            8,
            8,
            vec![low.data().iter().map(|v| 2.0 * v + 1.0).collect()],
        )
        .unwrap();
        let up = bicubic_upsample(&l, 2).unwrap();
        let blur = blur_plane(pan.band(0), 16, 16, 2);
        let n = 256.0;
        let (sx, sy) = (up.data().iter().sum::<f64>(), blur.iter().sum::<f64>());
        let sxy: f64 = up.data().iter().zip(&blur).map(|(a, b)| a * b).sum();
        let syy: f64 = blur.iter().map(|b| b * b).sum();
        let slope = (n * sxy - sx * sy) / (n * syy - sy * sy);
        let g = HighpassFuser.gains(&l, &pan, 2).unwrap()[0];
        assert!((g - slope).abs() < 1e-9, "{g} vs {slope}");
    }

    #[test]
    fn l1_loss_examples() {
        let h = noisy(3, 3, 2, 8, 5.0, 0.0);
        assert_eq!(residual_l1_loss(&h, &h).unwrap(), 0.0);
        let shifted =
            Raster::from_f64(3, 3, 2, h.data().iter().map(|v| v + 1.0).collect()).unwrap();
        assert!((residual_l1_loss(&h, &shifted).unwrap() - 1.0).abs() < 1e-12);
        let a = Raster::from_f64(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Raster::from_f64(2, 2, 1, vec![1.5, 0.0, 3.0, 7.0]).unwrap();
        assert_eq!(
            residual_l1_loss(&a, &b).unwrap(),
            (0.5 + 2.0 + 0.0 + 3.0) / 4.0
        );
        assert!(residual_l1_loss(&a, &h).is_err());
    }

    #[test]
    fn evaluate_self_consistent_fixture() {
        let pan = noisy(32, 32, 1, 21, 50.0, 10.0);
        let low = degrade_pan(&pan, 2).unwrap();
        let lrms = Raster::from_bands(16, 16, vec![low.data().to_vec(); 3]).unwrap();
        let fused = Raster::from_bands(32, 32, vec![pan.data().to_vec(); 3]).unwrap();
        let inputs = FusionInputs::new(lrms, pan, None, 2).unwrap();
        let report = evaluate(&fused, &inputs, 8).unwrap();
        assert!(report.d_lambda() < 1e-12);
        assert!(report.d_s() < 1e-12);
        assert!(report.qnr() > 1.0 - 1e-12);
        assert!(report.d_rho() < 1e-12);
    }

    #[test]
    fn evaluate_matches_composed_metrics() {
        let p = pair(31);
        let fused = run_fusion(&ZeroFuser, None, &p).unwrap();
        let report = evaluate(&fused, &p, 8).unwrap();
        let dl = d_lambda(&fused, p.lrms(), 8).unwrap();
        let ds = d_s(&fused, p.lrms(), p.pan(), 2, 8).unwrap();
        let dr = d_rho(&fused, p.pan(), 2).unwrap();
        assert_eq!(report, MetricsReport::new(dl, ds, dr).unwrap());
    }

    #[test]
    fn sweep_runs_each_value() {
        let train = [pair(40), pair(41)];
        let test = pair(42);
        let config = SweepConfig {
            m: 50,
            n: 100,
            seed: 3,
            target: TargetDistribution::uniform(),
            window: 8,
            fuser: BuiltinFuser::Highpass,
        };
        let out = sweep(&train, &test, SweepParam::M, &[10, 20], &config).unwrap();
        assert_eq!(
            out.iter().map(|(v, _)| *v).collect::<Vec<_>>(),
            vec![10, 20]
        );
        assert!("q".parse::<SweepParam>().is_err());
        assert_eq!(
            "highpass".parse::<BuiltinFuser>().unwrap(),
            BuiltinFuser::Highpass
        );
    }
}
