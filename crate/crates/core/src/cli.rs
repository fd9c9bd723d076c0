//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::density::{Bandwidths, Dataset, DensityEstimator, EstimatorKind};
use crate::error::{Error, Result};
use crate::flow::FlowOptions;
use crate::harness::{
    fit_region, fmt17, run_case, run_overlay, select_bandwidths, BandwidthRule, Experiment, ExperimentConfig,
    GridConfig, Method, RegionSettings, FLOW_STEP_FRAC,
};
use crate::io::{read_rows_path, write_contour_csv, write_mask_csv, SvgScene};
use crate::kernel::KernelSpec;
use crate::models::TrueModel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "isoconf",
    version,
    about = "Confidence regions for density level sets and isosurfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte-Carlo coverage experiment and write the report CSV.
    Simulate(SimulateArgs),
    /// Build a confidence region for the level set of a 2-D sample.
    Region(RegionArgs),
    /// Evaluate the kernel density estimator at given points.
    KdeEval(KdeEvalArgs),
    /// Print the scalar constants of a kernel.
    Constants(ConstantsArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Report CSV destination.
    #[arg(long)]
    out: PathBuf,
    /// Worker thread cap; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for one SVG overlay per run.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RegionArgs {
    /// CSV of 2-D points, optional header row.
    #[arg(long)]
    data: PathBuf,
    /// Density level c.
    #[arg(long, conflicts_with_all = ["prob", "case"], required_unless_present = "prob")]
    level: Option<f64>,
    /// Probability content of the superlevel set; needs --case.
    #[arg(long, requires = "case")]
    prob: Option<f64>,
    /// Reference model for --prob, as `elliptic:a`.
    #[arg(long, requires = "prob")]
    case: Option<String>,
    /// One of H, V.e, V, V.bc, V.us, V.ls, C4, C4*, C5*, C6*.
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Output prefix; writes `<prefix>_contour.csv`, `<prefix>_region.csv` and `<prefix>.svg`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 250)]
    replications: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Raster resolution per axis.
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    /// Fixed bandwidths `h,l,g` applied to both axes instead of the normal-scale rule.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    bandwidths: Option<Vec<f64>>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct KdeEvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Bandwidth per axis, comma separated; a single value is used for every axis.
    #[arg(long, value_delimiter = ',', required = true)]
    h: Vec<f64>,
    /// Evaluate the bias-corrected estimator.
    #[arg(long, requires = "l")]
    bc: bool,
    /// Bias-correction bandwidth, same format as --h.
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<f64>>,
    #[arg(long)]
    points: PathBuf,
    /// Kernel name; defaults to the simulation kernel of the data dimension.
    #[arg(long)]
    kernel: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConstantsArgs {
    #[arg(long, default_value = "sim2d")]
    kernel: String,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Csv(_) | Error::Malformed(_) => EXIT_IO,
            Error::Config(_) | Error::UnknownName(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, stderr),
        Command::Region(a) => region(a, stdout),
        Command::KdeEval(a) => kde_eval(a, stdout),
        Command::Constants(a) => constants(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> std::result::Result<T, Failure> {
    match threads {
        None => Ok(job()),
        Some(0) => Err(Failure::usage("--threads must be at least 1")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Failure {
                    code: EXIT_NUMERIC,
                    message: e.to_string(),
                })?;
            Ok(pool.install(job))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn simulate(args: SimulateArgs, stderr: &mut dyn Write) -> CliResult {
    if !args.config.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("config {} not found", args.config.display()),
        ))
        .into());
    }
    let mut config = ExperimentConfig::from_path(&args.config).map_err(|e| match e {
        Error::Io(_) => Failure::from(e),
        other => Failure::usage(other.to_string()),
    })?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let report = with_threads(args.threads, || run_case(&config))??;
    report.emit(&args.out)?;
    for s in &report.methods {
        if let Some(note) = &s.note {
            let _ = writeln!(stderr, "{}: {note}", s.method.name());
        }
    }
    if let Some(dir) = &args.svg {
        std::fs::create_dir_all(dir)?;
        let exp = Experiment::new(&config, &[config.alpha])?;
        with_threads(args.threads, || write_overlays(&exp, dir))??;
    }
    Ok(())
}

const METHOD_COLORS: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn color_of(m: Method) -> &'static str {
    METHOD_COLORS[Method::ALL.iter().position(|&x| x == m).unwrap_or(0) % METHOD_COLORS.len()]
}

fn write_overlays(exp: &Experiment, dir: &Path) -> Result<()> {
    for run in 0..exp.config.runs {
        let Ok(ov) = run_overlay(exp, run) else { continue };
        let mut scene = SvgScene {
            masks: ov.masks.iter().map(|(m, mk)| (mk, color_of(*m))).collect(),
            points: (0..ov.data.len())
                .map(|i| [ov.data.point(i)[0], ov.data.point(i)[1]])
                .collect(),
            ..Default::default()
        };
        scene.contours.push((&ov.truth, "black"));
        if let Some(est) = &ov.estimate {
            scene.contours.push((est, "red"));
        }
        scene.write(create(&dir.join(format!("run_{run:04}.svg")))?)?;
    }
    Ok(())
}

fn parse_case(spec: &str) -> std::result::Result<TrueModel, Failure> {
    let bad = || Failure::usage(format!("--case expects elliptic:a with a > 0, got '{spec}'"));
    let a: f64 = spec
        .strip_prefix("elliptic:")
        .ok_or_else(bad)?
        .parse()
        .map_err(|_| bad())?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(bad());
    }
    Ok(TrueModel::Elliptic { a })
}

fn region(args: RegionArgs, stdout: &mut dyn Write) -> CliResult {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::usage(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    let method = Method::parse(&args.method).map_err(|e| Failure::usage(e.to_string()))?;
    let level = match (args.level, args.prob, &args.case) {
        (Some(c), _, _) if c > 0.0 && c.is_finite() => c,
        (Some(c), _, _) => return Err(Failure::usage(format!("--level must be positive, got {c}"))),
        (None, Some(p), Some(case)) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(Failure::usage(format!("--prob must lie in (0, 1), got {p}")));
            }
            parse_case(case)?.level_of_probability(p)?
        }
        _ => return Err(Failure::usage("give --level or both --prob and --case")),
    };
    if args.resolution < 8 {
        return Err(Failure::usage("--resolution must be at least 8"));
    }
    let data = Dataset::from_rows(&read_rows_path(&args.data)?)?;
    if data.dim() != 2 {
        return Err(Failure::usage(format!(
            "region needs 2-D data, got {} columns",
            data.dim()
        )));
    }
    let kernel = KernelSpec::simulation(2)?;
    let rule = match &args.bandwidths {
        Some(v) => BandwidthRule::Fixed(Bandwidths {
            h: vec![v[0]; 2],
            l: vec![v[1]; 2],
            g: vec![v[2]; 2],
        }),
        None => BandwidthRule::NormalScale,
    };
    let bw = select_bandwidths(&data, &kernel, &rule)?;
    let settings = RegionSettings {
        level,
        replications: args.replications,
        seed: args.seed,
        flow: FlowOptions {
            step_frac: FLOW_STEP_FRAC,
            ..FlowOptions::default()
        },
        undersmooth_factor: 0.7,
        grid: GridConfig {
            resolution: args.resolution,
            ..GridConfig::default()
        },
    };
    let data = Arc::new(data);
    let fitted = with_threads(args.threads, || {
        fit_region(data.clone(), &kernel, bw, &settings, method, args.alpha)
    })??;

    let prefix = args.out.to_string_lossy().into_owned();
    write_contour_csv(&fitted.contour, create(Path::new(&format!("{prefix}_contour.csv")))?)?;
    write_mask_csv(&fitted.mask, create(Path::new(&format!("{prefix}_region.csv")))?)?;
    let scene = SvgScene {
        masks: vec![(&fitted.mask, color_of(method))],
        contours: vec![(&fitted.contour, "red")],
        points: (0..data.len()).map(|i| [data.point(i)[0], data.point(i)[1]]).collect(),
        ..Default::default()
    };
    scene.write(create(Path::new(&format!("{prefix}.svg")))?)?;

    writeln!(stdout, "method,alpha,quantile,level,h_eff,volume,flow_failures")?;
    writeln!(
        stdout,
        "{},{},{},{},{},{},{}",
        method.name(),
        fmt17(args.alpha),
        fmt17(fitted.quantile),
        fmt17(level),
        fmt17(fitted.bandwidths.h_eff()),
        fmt17(fitted.mask.volume()),
        fitted.flow_failures
    )?;
    Ok(())
}

fn broadcast(v: &[f64], dim: usize, flag: &str) -> std::result::Result<Vec<f64>, Failure> {
    match v.len() {
        1 => Ok(vec![v[0]; dim]),
        k if k == dim => Ok(v.to_vec()),
        k => Err(Failure::usage(format!("--{flag} has {k} values for {dim}-D data"))),
    }
}

fn kde_eval(args: KdeEvalArgs, stdout: &mut dyn Write) -> CliResult {
    let data = Dataset::from_rows(&read_rows_path(&args.data)?)?;
    let points = read_rows_path(&args.points)?;
    let d = data.dim();
    if points[0].len() != d {
        return Err(Error::Malformed(format!("points have {} columns, data has {d}", points[0].len())).into());
    }
    let kernel = match &args.kernel {
        Some(name) => KernelSpec::by_name(name)?,
        None => KernelSpec::simulation(d)?,
    };
    if kernel.dim() != d {
        return Err(Failure::usage(format!(
            "kernel {} is {}-D but data is {d}-D",
            kernel.name(),
            kernel.dim()
        )));
    }
    let h = broadcast(&args.h, d, "h")?;
    if h.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Failure::usage("--h must be positive"));
    }
    let kind = match (&args.l, args.bc) {
        (Some(l), true) => {
            let l = broadcast(l, d, "l")?;
            if l.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Failure::usage("--l must be positive"));
            }
            EstimatorKind::BiasCorrected { l }
        }
        _ => EstimatorKind::Plain,
    };
    let est = DensityEstimator::fit(Arc::new(data), &kernel, &h, kind)?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(&mut *stdout),
    };
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.extend(["density".into(), "grad_norm".into()]);
    writeln!(out, "{}", header.join(","))?;
    for p in &points {
        let value = est.eval(p)?;
        let grad = est.eval_grad(p)?.iter().map(|g| g * g).sum::<f64>().sqrt();
        let mut row: Vec<String> = p.iter().map(|&x| fmt17(x)).collect();
        row.extend([fmt17(value), fmt17(grad)]);
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn constants(args: ConstantsArgs, stdout: &mut dyn Write) -> CliResult {
    let kernel = KernelSpec::by_name(&args.kernel).map_err(|e| {
        Failure::usage(format!(
            "{e}; known kernels: {}",
            KernelSpec::registered_names().join(", ")
        ))
    })?;
    let k = kernel.constants();
    let rows = [
        ("integral", k.integral),
        ("l2_norm_sq", k.l2_norm_sq),
        ("deriv_l2_norm_sq", k.deriv_l2_norm_sq),
        ("s_k_sq", k.s_k_sq),
        ("mu2", k.mu2),
        ("second_deriv_l2_norm_sq", k.second_deriv_l2_norm_sq),
    ];
    let mut text = String::from("name,value\n");
    for (name, v) in rows {
        text.push_str(&format!("{name},{}\n", fmt17(v)));
    }
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
