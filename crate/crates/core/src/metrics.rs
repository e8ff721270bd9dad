//! No-reference fusion quality metrics.
//!
//! * UIQI: Wang–Bovik universal image quality index averaged over
//!   non-overlapping `window × window` blocks (trailing partial blocks are
//!   ignored; blocks with a zero denominator score 0).
//! * `D_λ`: spectral distortion, mean absolute change of inter-band UIQI
//!   between the fused image and the LRMS image.
//! * `D_S`: spatial distortion, mean absolute change of band-to-PAN UIQI
//!   between full scale and the degraded scale.
//! * `QNR = (1 - D_λ)(1 - D_S)`.
//! * `D_ρ`: one minus the mean positive local correlation between each fused
//!   band and PAN over `σ × σ` blocks.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::exec::{self, Execution};
use crate::filter::gaussian_blur;
use crate::fmt::shortest;
use crate::raster::Raster;

/// Default UIQI block side at PAN scale.
pub const DEFAULT_WINDOW: usize = 32;

/// Mean/variance/covariance of two equally sized samples, computed relative
/// to the first element so constant inputs give exactly zero spread.
struct PairStats {
    mean_a: f64,
    mean_b: f64,
    var_a: f64,
    var_b: f64,
    cov: f64,
}

fn pair_stats(
    a: impl Iterator<Item = f64> + Clone,
    b: impl Iterator<Item = f64> + Clone,
) -> PairStats {
    let mut a0 = None;
    let mut b0 = None;
    let (mut sa, mut sb, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in a.clone().zip(b.clone()) {
        let ra = *a0.get_or_insert(x);
        let rb = *b0.get_or_insert(y);
        sa += x - ra;
        sb += y - rb;
        n += 1;
    }
    let (ra, rb) = (a0.unwrap_or(0.0), b0.unwrap_or(0.0));
    let nf = n as f64;
    let (da, db) = (sa / nf, sb / nf);
    let (mut va, mut vb, mut c) = (0.0, 0.0, 0.0);
    for (x, y) in a.zip(b) {
        let ea = x - ra - da;
        let eb = y - rb - db;
        va += ea * ea;
        vb += eb * eb;
        c += ea * eb;
    }
    PairStats {
        mean_a: ra + da,
        mean_b: rb + db,
        var_a: va / nf,
        var_b: vb / nf,
        cov: c / nf,
    }
}

#[derive(Clone, Copy)]
struct Plane<'a> {
    data: &'a [f64],
    width: usize,
    height: usize,
}

impl<'a> Plane<'a> {
    fn of(r: &'a Raster, band: usize) -> Self {
        Plane {
            data: r.band(band),
            width: r.width(),
            height: r.height(),
        }
    }

    fn block(self, bx: usize, by: usize, side: usize) -> impl Iterator<Item = f64> + Clone + 'a {
        let (w, data) = (self.width, self.data);
        (0..side).flat_map(move |dy| {
            let start = (by * side + dy) * w + bx * side;
            data[start..start + side].iter().copied()
        })
    }
}

/// Per-block values over the full `side × side` tiling, summed in block order.
fn block_mean(
    a: Plane,
    b: Plane,
    side: usize,
    exec: Execution,
    score: impl Fn(PairStats) -> f64 + Sync + Send,
) -> f64 {
    let (bw, bh) = (a.width / side, a.height / side);
    let scores = exec::map_range(exec, bw * bh, |k| {
        let (bx, by) = (k % bw, k / bw);
        score(pair_stats(a.block(bx, by, side), b.block(bx, by, side)))
    });
    scores.iter().sum::<f64>() / scores.len() as f64
}

fn uiqi_score(s: PairStats) -> f64 {
    let den = (s.var_a + s.var_b) * (s.mean_a * s.mean_a + s.mean_b * s.mean_b);
    if den == 0.0 {
        return 0.0;
    }
    (4.0 * s.cov * (s.mean_a * s.mean_b) / den).clamp(-1.0, 1.0)
}

fn check_window(window: usize, width: usize, height: usize) -> Result<()> {
    if window < 2 || window > width.min(height) {
        return Err(invalid(format!(
            "window {window} must lie in [2, {}] for a {width}x{height} image",
            width.min(height)
        )));
    }
    Ok(())
}

fn uiqi_planes(a: Plane, b: Plane, window: usize, exec: Execution) -> Result<f64> {
    check_window(window, a.width, a.height)?;
    Ok(block_mean(a, b, window, exec, uiqi_score))
}

fn require_single_band(r: &Raster, what: &str) -> Result<()> {
    if r.bands() != 1 {
        return Err(invalid(format!(
            "{what} must have one band, has {}",
            r.bands()
        )));
    }
    Ok(())
}

fn same_plane_size(a: &Raster, b: &Raster) -> bool {
    a.width() == b.width() && a.height() == b.height()
}

/// Universal image quality index of two single-band rasters.
pub fn uiqi(a: &Raster, b: &Raster, window: usize) -> Result<f64> {
    uiqi_with(a, b, window, Execution::default())
}

pub fn uiqi_with(a: &Raster, b: &Raster, window: usize, exec: Execution) -> Result<f64> {
    require_single_band(a, "uiqi input")?;
    require_single_band(b, "uiqi input")?;
    if !same_plane_size(a, b) {
        return Err(invalid("uiqi inputs differ in size"));
    }
    uiqi_planes(Plane::of(a, 0), Plane::of(b, 0), window, exec)
}

/// Integer ratio between a full-scale and a reduced-scale raster.
fn scale_ratio(full: &Raster, reduced: &Raster) -> Result<usize> {
    let ratio = full.width() / reduced.width();
    if ratio == 0
        || reduced.width() * ratio != full.width()
        || reduced.height() * ratio != full.height()
    {
        return Err(invalid(format!(
            "{}x{} is not an integer multiple of {}x{}",
            full.width(),
            full.height(),
            reduced.width(),
            reduced.height()
        )));
    }
    Ok(ratio)
}

/// Spectral distortion of fused `fused` against `lrms` (exponent 1).
///
/// `window` applies at the fused scale; the LRMS scale uses
/// `window / ratio`. Saturates at 1.
pub fn d_lambda(fused: &Raster, lrms: &Raster, window: usize) -> Result<f64> {
    let bands = fused.bands();
    if bands < 2 || lrms.bands() != bands {
        return Err(invalid(format!(
            "D_lambda needs two equal band counts >= 2, got {} and {}",
            bands,
            lrms.bands()
        )));
    }
    let ratio = scale_ratio(fused, lrms)?;
    let lw = window / ratio;
    check_window(window, fused.width(), fused.height())?;
    check_window(lw, lrms.width(), lrms.height())?;

    let exec = Execution::default();
    let mut total = 0.0;
    for l in 0..bands {
        for r in l + 1..bands {
            let qf = uiqi_planes(Plane::of(fused, l), Plane::of(fused, r), window, exec)?;
            let ql = uiqi_planes(Plane::of(lrms, l), Plane::of(lrms, r), lw, exec)?;
            total += 2.0 * (qf - ql).abs();
        }
    }
    Ok((total / (bands * (bands - 1)) as f64).min(1.0))
}

/// Gaussian blur with `σ = ratio / 2` (truncated at 3σ, border clamp),
/// then keeps every `ratio`-th pixel starting at offset `(ratio - 1) / 2`.
pub fn degrade_pan(pan: &Raster, ratio: usize) -> Result<Raster> {
    require_single_band(pan, "PAN")?;
    if ratio == 0 || !pan.width().is_multiple_of(ratio) || !pan.height().is_multiple_of(ratio) {
        return Err(invalid(format!(
            "ratio {ratio} does not divide {}x{}",
            pan.width(),
            pan.height()
        )));
    }
    let (w, h) = (pan.width(), pan.height());
    let blurred = blur_plane(pan.band(0), w, h, ratio);
    let off = (ratio - 1) / 2;
    let (ow, oh) = (w / ratio, h / ratio);
    let data = (0..oh)
        .flat_map(|y| {
            let row = (y * ratio + off) * w;
            let blurred = &blurred;
            (0..ow).map(move |x| blurred[row + x * ratio + off])
        })
        .collect();
    Raster::from_f64(ow, oh, 1, data)
}

/// The low-pass used by [`degrade_pan`], without decimation.
pub(crate) fn blur_plane(plane: &[f64], width: usize, height: usize, ratio: usize) -> Vec<f64> {
    gaussian_blur(
        plane,
        width,
        height,
        ratio as f64 / 2.0,
        Execution::default(),
    )
}

/// Spatial distortion (exponent 1). Saturates at 1.
pub fn d_s(
    fused: &Raster,
    lrms: &Raster,
    pan: &Raster,
    ratio: usize,
    window: usize,
) -> Result<f64> {
    require_single_band(pan, "PAN")?;
    if !same_plane_size(fused, pan) {
        return Err(invalid("fused image must be at PAN scale"));
    }
    if fused.bands() != lrms.bands() {
        return Err(invalid("fused and LRMS band counts differ"));
    }
    if ratio == 0 || lrms.width() * ratio != pan.width() || lrms.height() * ratio != pan.height() {
        return Err(invalid(format!(
            "LRMS {}x{} times ratio {ratio} does not match PAN {}x{}",
            lrms.width(),
            lrms.height(),
            pan.width(),
            pan.height()
        )));
    }
    let lw = window / ratio;
    check_window(window, pan.width(), pan.height())?;
    check_window(lw, lrms.width(), lrms.height())?;

    let pan_low = degrade_pan(pan, ratio)?;
    let exec = Execution::default();
    let mut total = 0.0;
    for l in 0..fused.bands() {
        let qh = uiqi_planes(Plane::of(fused, l), Plane::of(pan, 0), window, exec)?;
        let ql = uiqi_planes(Plane::of(lrms, l), Plane::of(&pan_low, 0), lw, exec)?;
        total += (qh - ql).abs();
    }
    Ok((total / fused.bands() as f64).min(1.0))
}

/// `(1 - d_lambda)(1 - d_s)`.
pub fn qnr(d_lambda: f64, d_s: f64) -> Result<f64> {
    for (name, v) in [("d_lambda", d_lambda), ("d_s", d_s)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(invalid(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok((1.0 - d_lambda) * (1.0 - d_s))
}

fn correlation_score(s: PairStats) -> f64 {
    if s.var_a == 0.0 || s.var_b == 0.0 {
        return 0.0;
    }
    (s.cov / (s.var_a.sqrt() * s.var_b.sqrt())).clamp(0.0, 1.0)
}

/// `1 -` mean over bands and `sigma × sigma` blocks of `max(0, corr)`.
pub fn d_rho(fused: &Raster, pan: &Raster, sigma: usize) -> Result<f64> {
    require_single_band(pan, "PAN")?;
    if !same_plane_size(fused, pan) {
        return Err(invalid("fused image must be at PAN scale"));
    }
    check_window(sigma, pan.width(), pan.height())?;
    let exec = Execution::default();
    let total: f64 = (0..fused.bands())
        .map(|l| {
            block_mean(
                Plane::of(fused, l),
                Plane::of(pan, 0),
                sigma,
                exec,
                correlation_score,
            )
        })
        .sum();
    Ok((1.0 - total / fused.bands() as f64).clamp(0.0, 1.0))
}

/// QNR family for one fused product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    qnr: f64,
    d_lambda: f64,
    d_s: f64,
    d_rho: f64,
}

impl MetricsReport {
    pub fn new(d_lambda: f64, d_s: f64, d_rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&d_rho) {
            return Err(invalid(format!("d_rho = {d_rho} outside [0, 1]")));
        }
        Ok(MetricsReport {
            qnr: qnr(d_lambda, d_s)?,
            d_lambda,
            d_s,
            d_rho,
        })
    }

    pub fn qnr(&self) -> f64 {
        self.qnr
    }

    pub fn d_lambda(&self) -> f64 {
        self.d_lambda
    }

    pub fn d_s(&self) -> f64 {
        self.d_s
    }

    pub fn d_rho(&self) -> f64 {
        self.d_rho
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "qnr={} d_lambda={} d_s={} d_rho={}",
            shortest(self.qnr),
            shortest(self.d_lambda),
            shortest(self.d_s),
            shortest(self.d_rho)
        )
    }
}

impl FromStr for MetricsReport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut vals = [0.0; 4];
        let keys = ["qnr", "d_lambda", "d_s", "d_rho"];
        let fields: Vec<&str> = s.trim_end_matches('\n').split(' ').collect();
        if fields.len() != 4 {
            return Err(invalid("metric line needs exactly four fields"));
        }
        for ((field, key), slot) in fields.iter().zip(keys).zip(&mut vals) {
            let v = field
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| invalid(format!("expected `{key}=` in `{field}`")))?;
            *slot = v
                .parse()
                .map_err(|_| invalid(format!("bad number in `{field}`")))?;
        }
        let report = MetricsReport::new(vals[1], vals[2], vals[3])?;
        if report.qnr.to_bits() != vals[0].to_bits() {
            return Err(invalid("qnr does not equal (1 - d_lambda)(1 - d_s)"));
        }
        Ok(report)
    }
}
