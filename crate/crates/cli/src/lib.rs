//! Command-line front end for `unidist-core`.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns the
//! process exit code: 0 on success, 1 on a runtime error, 2 on a usage error.
//! All data goes to `out`; diagnostics go to `err`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use unidist_core::diag::{kde, linspace, qq_points, silverman_bandwidth, DEFAULT_QQ_POINTS};
use unidist_core::metrics::DEFAULT_WINDOW;
use unidist_core::pipeline::{
    evaluate, fit_raster_set, run_fusion, sweep, BuiltinFuser, SweepConfig, SweepParam,
};
use unidist_core::raster::{read_raster, sample_pixels, write_raster};
use unidist_core::synthetic::{synthetic_scene, SceneSpec, SensorProfile};
use unidist_core::transform::{apply_raster, DEFAULT_EPSILON};
use unidist_core::{
    FusionInputs, Raster, SampleVector, TargetDistribution, TargetKind, TransformSet,
};

#[derive(Parser, Debug)]
#[command(
    name = "unidist",
    version,
    about = "Per-band quantile transforms for multi-band rasters",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one transform per band, pooling the inputs band by band
    Fit(FitArgs),
    /// Apply a transform file to a raster
    Apply(ApplyArgs),
    /// Run a built-in fuser on an LRMS/PAN pair
    Fuse(FuseArgs),
    /// Print QNR, D_lambda, D_S and D_rho for a fused product
    Eval(EvalArgs),
    /// Repeat fit, fuse and eval for each value of m or n
    Sweep(SweepArgs),
    /// Emit KDE or Q-Q points as tab-separated x, y lines
    Diagnose(DiagnoseArgs),
    /// Write a synthetic LRMS/PAN/reference scene
    Synth(SynthArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Target {
    Normal,
    Uniform,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FuserName {
    Zero,
    Highpass,
}

impl From<FuserName> for BuiltinFuser {
    fn from(f: FuserName) -> Self {
        match f {
            FuserName::Zero => BuiltinFuser::Zero,
            FuserName::Highpass => BuiltinFuser::Highpass,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Param {
    M,
    N,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Kde,
    Qq,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Sensor {
    Linear,
    Compressed,
}

#[derive(Args, Debug)]
struct TargetArgs {
    /// Target distribution
    #[arg(long, value_enum)]
    target: Target,
    /// Tail clip for the normal target
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

impl TargetArgs {
    fn resolve(&self) -> Result<TargetDistribution, String> {
        target_distribution(self.target, self.epsilon)
    }
}

fn target_distribution(target: Target, epsilon: f64) -> Result<TargetDistribution, String> {
    let kind = match target {
        Target::Normal => TargetKind::StandardNormal,
        Target::Uniform => TargetKind::StandardUniform,
    };
    TargetDistribution::new(kind, epsilon).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Training rasters; band b of every input is pooled
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    /// Number of quantiles
    #[arg(long)]
    m: usize,
    /// Pixels sampled per band
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[arg(long)]
    transform: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FuseArgs {
    #[arg(long, value_enum)]
    fuser: FuserName,
    #[arg(long)]
    lrms: PathBuf,
    #[arg(long)]
    pan: PathBuf,
    #[arg(long)]
    ratio: usize,
    #[arg(long, requires = "transform_pan")]
    transform_lrms: Option<PathBuf>,
    #[arg(long, requires = "transform_lrms")]
    transform_pan: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    fused: PathBuf,
    #[arg(long)]
    lrms: PathBuf,
    #[arg(long)]
    pan: PathBuf,
    #[arg(long)]
    ratio: usize,
    /// UIQI block side at PAN scale
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    param: Param,
    /// Comma-separated values of the swept parameter
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<usize>,
    #[arg(long, num_args = 1.., required = true)]
    train_lrms: Vec<PathBuf>,
    #[arg(long, num_args = 1.., required = true)]
    train_pan: Vec<PathBuf>,
    /// Test LRMS
    #[arg(long)]
    lrms: PathBuf,
    /// Test PAN
    #[arg(long)]
    pan: PathBuf,
    #[arg(long)]
    ratio: usize,
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    target: Target,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "highpass")]
    fuser: FuserName,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    band: usize,
    /// Transform applied to `--input` first
    #[arg(long)]
    transform: Option<PathBuf>,
    /// Subsample this many pixels per raster instead of using all of them
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// KDE bandwidth; Silverman's rule when omitted
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 512)]
    grid_points: usize,
    /// Second raster for Q-Q
    #[arg(long)]
    other: Option<PathBuf>,
    /// Band of `--other`; defaults to `--band`
    #[arg(long)]
    other_band: Option<usize>,
    #[arg(long)]
    other_transform: Option<PathBuf>,
    /// Number of Q-Q points
    #[arg(long, default_value_t = DEFAULT_QQ_POINTS)]
    k: usize,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// PAN-scale width
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 4)]
    bands: usize,
    #[arg(long, default_value_t = 4)]
    ratio: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "linear")]
    sensor: Sensor,
    /// Directory receiving lrms.uprf, pan.uprf and reference.uprf
    #[arg(long)]
    out_dir: PathBuf,
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), String> {
    match command {
        Command::Fit(a) => fit(a),
        Command::Apply(a) => apply(a),
        Command::Fuse(a) => fuse(a),
        Command::Eval(a) => eval(a, out),
        Command::Sweep(a) => run_sweep(a, out),
        Command::Diagnose(a) => diagnose(a, out),
        Command::Synth(a) => synth(a),
    }
}

fn load(path: &Path) -> Result<Raster, String> {
    read_raster(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_set(path: &Path) -> Result<TransformSet, String> {
    TransformSet::read_from(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn save(path: &Path, raster: &Raster) -> Result<(), String> {
    write_raster(path, raster).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), String> {
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())
}

fn fit(a: FitArgs) -> Result<(), String> {
    let target = a.target.resolve()?;
    let rasters = a
        .input
        .iter()
        .map(|p| load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&Raster> = rasters.iter().collect();
    let set = fit_raster_set(&refs, a.m, a.n, a.seed, target).map_err(|e| e.to_string())?;
    set.write_to(&a.out)
        .map_err(|e| format!("{}: {e}", a.out.display()))
}

fn apply(a: ApplyArgs) -> Result<(), String> {
    let set = load_set(&a.transform)?;
    let raster = load(&a.input)?;
    let result = apply_raster(&set, &raster).map_err(|e| e.to_string())?;
    save(&a.out, &result)
}

fn inputs(lrms: &Path, pan: &Path, ratio: usize) -> Result<FusionInputs, String> {
    FusionInputs::new(load(lrms)?, load(pan)?, None, ratio).map_err(|e| e.to_string())
}

fn fuse(a: FuseArgs) -> Result<(), String> {
    let inputs = inputs(&a.lrms, &a.pan, a.ratio)?;
    let sets = match (&a.transform_lrms, &a.transform_pan) {
        (Some(l), Some(p)) => Some((load_set(l)?, load_set(p)?)),
        _ => None,
    };
    let fuser = BuiltinFuser::from(a.fuser);
    let fused = run_fusion(&fuser, sets.as_ref().map(|(l, p)| (l, p)), &inputs)
        .map_err(|e| e.to_string())?;
    save(&a.out, &fused)
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<(), String> {
    let inputs = inputs(&a.lrms, &a.pan, a.ratio)?;
    let fused = load(&a.fused)?;
    let report = evaluate(&fused, &inputs, a.window).map_err(|e| e.to_string())?;
    emit(out, &format!("{report}\n"))
}

fn run_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), String> {
    if a.train_lrms.len() != a.train_pan.len() {
        return Err(format!(
            "{} training LRMS rasters but {} training PAN rasters",
            a.train_lrms.len(),
            a.train_pan.len()
        ));
    }
    let training = a
        .train_lrms
        .iter()
        .zip(&a.train_pan)
        .map(|(l, p)| inputs(l, p, a.ratio))
        .collect::<Result<Vec<_>, _>>()?;
    let test = inputs(&a.lrms, &a.pan, a.ratio)?;
    let (param, name) = match a.param {
        Param::M => (SweepParam::M, "m"),
        Param::N => (SweepParam::N, "n"),
    };
    let config = SweepConfig {
        m: a.m,
        n: a.n,
        seed: a.seed,
        target: target_distribution(a.target, a.epsilon)?,
        window: a.window,
        fuser: a.fuser.into(),
    };
    let rows = sweep(&training, &test, param, &a.values, &config).map_err(|e| e.to_string())?;
    let text: String = rows
        .iter()
        .map(|(v, report)| format!("{name}={v} {report}\n"))
        .collect();
    emit(out, &text)
}

fn diagnostic_samples(
    path: &Path,
    band: usize,
    transform: Option<&PathBuf>,
    n: Option<usize>,
    seed: u64,
) -> Result<SampleVector, String> {
    let mut raster = load(path)?;
    if band >= raster.bands() {
        return Err(format!(
            "{}: band {band} out of range ({} bands)",
            path.display(),
            raster.bands()
        ));
    }
    if let Some(t) = transform {
        raster = apply_raster(&load_set(t)?, &raster).map_err(|e| e.to_string())?;
    }
    match n {
        Some(n) => sample_pixels(&raster, band, n, seed).map_err(|e| e.to_string()),
        None => SampleVector::new(raster.band(band).to_vec()).map_err(|e| e.to_string()),
    }
}

fn diagnose(a: DiagnoseArgs, out: &mut dyn Write) -> Result<(), String> {
    let samples = diagnostic_samples(&a.input, a.band, a.transform.as_ref(), a.n, a.seed)?;
    let series = match a.kind {
        Kind::Kde => {
            let h = a.bandwidth.unwrap_or_else(|| silverman_bandwidth(&samples));
            let xs = samples.as_slice();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
            kde(&samples, h, &linspace(lo, hi, a.grid_points))
        }
        Kind::Qq => {
            let other = a.other.as_ref().ok_or("--kind qq needs --other")?;
            let band = a.other_band.unwrap_or(a.band);
            let b = diagnostic_samples(other, band, a.other_transform.as_ref(), a.n, a.seed)?;
            qq_points(&samples, &b, a.k)
        }
    }
    .map_err(|e| e.to_string())?;
    emit(out, &series.to_tsv())
}

fn synth(a: SynthArgs) -> Result<(), String> {
    let spec = SceneSpec {
        width: a.width,
        height: a.height,
        bands: a.bands,
        ratio: a.ratio,
        seed: a.seed,
    };
    let sensor = match a.sensor {
        Sensor::Linear => SensorProfile::linear(a.bands),
        Sensor::Compressed => SensorProfile::compressed(a.bands),
    };
    let scene = synthetic_scene(&spec, &sensor).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| format!("{}: {e}", a.out_dir.display()))?;
    save(&a.out_dir.join("lrms.uprf"), scene.lrms())?;
    save(&a.out_dir.join("pan.uprf"), scene.pan())?;
    if let Some(r) = scene.reference() {
        save(&a.out_dir.join("reference.uprf"), r)?;
    }
    Ok(())
}
