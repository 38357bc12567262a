//! The `carvepaint` command line.
//!
//! Two subcommands, `retarget` and `bench`. Any long flag may also come from
//! a flat `key = value` file given with `--config`; values are resolved as
//! command line, then config file, then environment
//! (`CARVEPAINT_SERVICE_URL` for `--service-url`), then built-in defaults.
//!
//! Exit codes: 0 success, 2 bad arguments or configuration, 3 unreadable or
//! invalid input, 4 repaint backend failure, 5 output or report write
//! failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::metrics::{self, BenchConfig, BenchError, Method, Ratio, SdrMode};
use crate::pipeline::{self, PipelineError, PipelineOptions};
use crate::plan::{RetargetParams, RetargetPlan};
use crate::raster;
use crate::repaint::{BackendConfig, BackendKind, RepaintError};
use crate::saliency::{self, SaliencyMap};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_BACKEND: i32 = 4;
pub const EXIT_WRITE: i32 = 5;

pub const SERVICE_URL_ENV: &str = "CARVEPAINT_SERVICE_URL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Backend(String),
    #[error("{0}")]
    Write(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Backend(_) => EXIT_BACKEND,
            CliError::Write(_) => EXIT_WRITE,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let msg = e.to_string();
        match e {
            PipelineError::Params(_) => CliError::Usage(msg),
            PipelineError::Repaint(RepaintError::Config(_)) => CliError::Usage(msg),
            PipelineError::Repaint(_) => CliError::Backend(msg),
            PipelineError::Saliency(_) | PipelineError::Carve(_) | PipelineError::Arrd(_) => CliError::Input(msg),
        }
    }
}

/// Parse `A:B`, `A/B` or a plain decimal into a positive ratio.
pub fn parse_ratio(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let positive = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("invalid ratio {text:?}"))?;
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(format!("ratio components must be positive in {text:?}"))
        }
    };
    match text.split_once([':', '/']) {
        Some((a, b)) => Ok(positive(a)? / positive(b)?),
        None => positive(text),
    }
}

fn parse_labeled_ratio(text: &str) -> Result<Ratio, String> {
    Ok(Ratio::new(text.trim(), parse_ratio(text)?))
}

#[derive(Debug, Parser)]
#[command(name = "carvepaint", version, about = "Content-aware image retargeting", args_override_self = true)]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Retarget one image.
    Retarget(RetargetArgs),
    /// Run methods over a corpus and write SDR reports.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Builtin,
    Remote,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SdrModeArg {
    Propagated,
    Detector,
}

impl From<SdrModeArg> for SdrMode {
    fn from(m: SdrModeArg) -> Self {
        match m {
            SdrModeArg::Propagated => SdrMode::Propagated,
            SdrModeArg::Detector => SdrMode::Detector,
        }
    }
}

/// Settings shared by both subcommands.
#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    /// Tolerable saliency loss ratio.
    #[arg(long, default_value_t = RetargetParams::DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Abruptness window length (odd).
    #[arg(long, default_value_t = RetargetParams::DEFAULT_WINDOW)]
    pub window: usize,
    /// Repaint pixels with fewer surviving neighbours than this.
    #[arg(long, default_value_t = RetargetParams::DEFAULT_ETA)]
    pub eta: usize,
    /// Grow the repaint region by this many pixels.
    #[arg(long, default_value_t = 0)]
    pub dilate: usize,
    /// Detect saliency with the built-in spectral-residual detector when no map is given.
    #[arg(long)]
    pub auto_saliency: bool,
    #[arg(long, value_enum, default_value_t = BackendChoice::Builtin)]
    pub backend: BackendChoice,
    /// Base URL of the repaint service.
    #[arg(long, env = SERVICE_URL_ENV)]
    pub service_url: Option<String>,
    /// Per-request timeout for the repaint service, in seconds.
    #[arg(long, default_value_t = 120)]
    pub timeout: u64,
    /// Extra attempts after a failed or throttled service request.
    #[arg(long, default_value_t = 2)]
    pub retries: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Denoising steps requested from the service.
    #[arg(long, default_value_t = 30)]
    pub steps: u32,
    /// Text prompt forwarded to the service.
    #[arg(long, default_value = "")]
    pub prompt: String,
}

impl CommonArgs {
    fn params(&self, ratio: f64) -> Result<RetargetParams, CliError> {
        let p = RetargetParams {
            ratio_r: ratio,
            lambda: self.lambda,
            window_l: self.window,
            eta: self.eta,
        };
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }

    fn backend_config(&self) -> Result<BackendConfig, CliError> {
        let mut cfg = BackendConfig {
            timeout: Duration::from_secs(self.timeout),
            retries: self.retries,
            ..Default::default()
        };
        if self.backend == BackendChoice::Remote {
            let url = self
                .service_url
                .clone()
                .ok_or_else(|| CliError::Usage(format!("--backend remote needs --service-url or {SERVICE_URL_ENV}")))?;
            cfg.kind = BackendKind::Remote;
            cfg.endpoint = Some(url);
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Args)]
pub struct RetargetArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output PNG path.
    #[arg(long)]
    pub out: PathBuf,
    /// Target aspect ratio, e.g. 16:9, 4/3 or 0.75.
    #[arg(long, value_parser = parse_labeled_ratio)]
    pub ratio: Ratio,
    /// Grayscale saliency map with the input's dimensions.
    #[arg(long, value_name = "FILE")]
    pub saliency: Option<PathBuf>,
    /// Also write the carve and repaint masks next to the output.
    #[arg(long)]
    pub emit_mask: bool,
    /// Also write the removed seams drawn over the input.
    #[arg(long)]
    pub emit_seams: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct BenchArgs {
    /// Directory of images, with maps in `saliency/<stem>.png`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Comma-separated ratios.
    #[arg(long, default_value = "16:9,4:3,1:1,9:16")]
    pub ratios: String,
    /// Comma-separated methods: ours, br, scale, crop, center-crop, seam-carving.
    #[arg(long, default_value = "ours,seam-carving,scale,crop")]
    pub methods: String,
    #[arg(long, default_value = "report")]
    pub report_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = SdrModeArg::Propagated)]
    pub sdr_mode: SdrModeArg,
    /// Images processed in parallel (defaults to the number of CPUs).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Skip writing the per-item output images.
    #[arg(long)]
    pub no_outputs: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn split_list<T>(text: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).map_err(CliError::Usage))
        .collect()
}

impl BenchArgs {
    pub fn ratio_list(&self) -> Result<Vec<Ratio>, CliError> {
        split_list(&self.ratios, parse_labeled_ratio)
    }

    pub fn method_list(&self) -> Result<Vec<Method>, CliError> {
        split_list(&self.methods, |s| s.parse())
    }
}

/// Values read from a `--config` file, as `(flag, value)` pairs.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config {}:{}: expected key = value", path.display(), n + 1)))?;
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        pairs.push((k.trim().replace('_', "-"), v.to_string()));
    }
    Ok(pairs)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn is_true(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, got {v:?}")),
    }
}

/// Splice config-file values in right after the subcommand, so that
/// anything on the real command line (which comes later) overrides them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let pairs = read_config(&path)?;
    let root = Cli::command();
    let Some((pos, sub)) = args
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| root.find_subcommand(a.to_str()?).map(|c| (i, c.clone())))
    else {
        return Ok(args);
    };
    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            continue;
        }
        let arg = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            let known_elsewhere = root
                .get_subcommands()
                .any(|c| c.get_arguments().any(|a| a.get_long() == Some(key.as_str())));
            if known_elsewhere {
                continue;
            }
            return Err(CliError::Usage(format!("config {}: unknown key {key:?}", path.display())));
        };
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}").into());
            injected.push(value.into());
        } else if is_true(&value).map_err(|e| CliError::Usage(format!("config key {key}: {e}")))? {
            injected.push(format!("--{key}").into());
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

/// The JSON line printed by `retarget`.
#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub input: PathBuf,
    pub output: PathBuf,
    pub ratio: String,
    pub params: RetargetParams,
    pub dilate: usize,
    pub saliency_source: &'static str,
    pub backend: &'static str,
    pub seed: u64,
    pub steps: u32,
    pub input_dims: (usize, usize),
    pub output_dims: (usize, usize),
    /// Plan before carving, in working orientation.
    pub plan: RetargetPlan,
    /// Plan used for the canvas.
    pub final_plan: RetargetPlan,
    pub seams_removed: usize,
    pub salient_seams_removed: usize,
    pub halted_early: bool,
    pub repaint_pixels: usize,
    pub w_s_ori: usize,
    pub w_s_out: usize,
    pub sdr_propagated: Option<f64>,
    pub sdr_detector: Option<f64>,
    pub artifacts: Vec<PathBuf>,
    pub runtime_s: f64,
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.{suffix}.png"))
}

pub fn run_retarget(args: &RetargetArgs) -> Result<RunRecord, CliError> {
    let start = Instant::now();
    let params = args.common.params(args.ratio.value)?;
    let backend_cfg = args.common.backend_config()?;
    let backend = backend_cfg.build().map_err(|e| CliError::Usage(e.to_string()))?;

    let input = |e: &dyn std::fmt::Display| CliError::Input(format!("{}: {e}", args.input.display()));
    let img = raster::load_image(&args.input).map_err(|e| input(&e))?;
    let (sal, source): (SaliencyMap, &'static str) = match (&args.saliency, args.common.auto_saliency) {
        (Some(path), _) => (
            saliency::saliency_from_file(path, img.width(), img.height())
                .map_err(|e| CliError::Input(format!("saliency {}: {e}", path.display())))?,
            "file",
        ),
        (None, true) => (
            saliency::spectral_residual_saliency(&raster::to_gray(&img)).map_err(|e| input(&e))?,
            "detector",
        ),
        (None, false) => {
            return Err(CliError::Input(
                "no saliency map: pass --saliency FILE or --auto-saliency".to_string(),
            ))
        }
    };

    let mut opts = PipelineOptions::new(params.clone());
    opts.dilation = args.common.dilate;
    opts.seed = args.common.seed;
    opts.steps = args.common.steps;
    opts.prompt = args.common.prompt.clone();
    let outcome = pipeline::retarget(&img, &sal, &opts, backend.as_ref())?;
    let p = &outcome.prepared;

    let write = |e: &dyn std::fmt::Display, path: &Path| CliError::Write(format!("{}: {e}", path.display()));
    raster::save_image(&outcome.image, &args.out).map_err(|e| write(&e, &args.out))?;
    let mut artifacts = Vec::new();
    if args.emit_mask {
        let carve_path = sibling(&args.out, "carve-mask");
        raster::save_bitmask(p.carve_mask.bits(), &carve_path).map_err(|e| write(&e, &carve_path))?;
        let repaint_path = sibling(&args.out, "repaint-mask");
        raster::save_bitmask(p.repaint_mask.bits(), &repaint_path).map_err(|e| write(&e, &repaint_path))?;
        artifacts.extend([carve_path, repaint_path]);
    }
    if args.emit_seams {
        let seams_path = sibling(&args.out, "seams");
        raster::save_image(&p.carve_mask.overlay(&img, [255, 0, 0]), &seams_path)
            .map_err(|e| write(&e, &seams_path))?;
        artifacts.push(seams_path);
    }

    let w_s_out = saliency::saliency_width(&p.binary_out);
    let sdr_detector = metrics::detected_saliency_width(&img)
        .and_then(|ori| Ok((ori, metrics::detected_saliency_width(&outcome.image)?)))
        .ok()
        .and_then(|(ori, out)| metrics::sdr(ori, out).ok());
    Ok(RunRecord {
        input: args.input.clone(),
        output: args.out.clone(),
        ratio: args.ratio.label.clone(),
        params,
        dilate: args.common.dilate,
        saliency_source: source,
        backend: backend.name(),
        seed: args.common.seed,
        steps: args.common.steps,
        input_dims: img.dims(),
        output_dims: outcome.image.dims(),
        plan: p.plan.clone(),
        final_plan: p.final_plan.clone(),
        seams_removed: p.seams_removed,
        salient_seams_removed: p.salient_seams_removed,
        halted_early: p.halted_early,
        repaint_pixels: p.repaint_mask.repaint_count(),
        w_s_ori: p.w_s_ori,
        w_s_out,
        sdr_propagated: metrics::sdr(p.w_s_ori, w_s_out).ok(),
        sdr_detector,
        artifacts,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_bench(args: &BenchArgs) -> Result<metrics::Report, CliError> {
    let ratios = args.ratio_list()?;
    let methods = args.method_list()?;
    let params = args.common.params(1.0)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".to_string()));
    }
    let cfg = BenchConfig {
        params,
        dilation: args.common.dilate,
        sdr_mode: args.sdr_mode.into(),
        workers,
        auto_saliency: args.common.auto_saliency,
        backend: args.common.backend_config()?,
        seed: args.common.seed,
        steps: args.common.steps,
        output_dir: (!args.no_outputs).then(|| args.report_dir.join("outputs")),
    };
    let report = metrics::run_benchmark(&args.corpus, &ratios, &methods, &cfg).map_err(|e| match e {
        BenchError::Corpus(..) => CliError::Input(e.to_string()),
        BenchError::Backend(_) | BenchError::Pool(_) => CliError::Usage(e.to_string()),
        BenchError::Write(..) => CliError::Write(e.to_string()),
    })?;
    report
        .write(&args.report_dir)
        .map_err(|e| CliError::Write(e.to_string()))?;
    Ok(report)
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString>>) -> i32 {
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Retarget(a) => run_retarget(a).map(|record| {
            println!("{}", serde_json::to_string(&record).expect("record serializes"));
        }),
        Command::Bench(a) => run_bench(a).map(|report| {
            print!("{}", report.markdown_string());
            if !report.failures.is_empty() {
                eprintln!("skipped {} item(s):", report.failures.len());
                for f in &report.failures {
                    let what = match (&f.method, &f.ratio) {
                        (Some(m), Some(r)) => format!("{} [{m} {r}]", f.image),
                        _ => f.image.clone(),
                    };
                    eprintln!("  {what}: {}", f.message);
                }
            }
        }),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert!((parse_ratio("16:9").unwrap() - 16.0 / 9.0).abs() < 1e-15);
        assert_eq!(parse_ratio("1:1").unwrap(), 1.0);
        assert_eq!(parse_ratio("3/4").unwrap(), 0.75);
        assert_eq!(parse_ratio(" 1.5 ").unwrap(), 1.5);
        assert!(parse_ratio("0:9").is_err());
        assert!(parse_ratio("4:-3").is_err());
        assert!(parse_ratio("-2").is_err());
        assert!(parse_ratio("wide").is_err());
        assert!(parse_ratio("16:").is_err());
    }

    fn parse(args: &[&str]) -> Cli {
        let args: Vec<OsString> = args.iter().map(OsString::from).collect();
        Cli::try_parse_from(expand_config(args).unwrap()).unwrap()
    }

    #[test]
    fn defaults() {
        let cli = parse(&["carvepaint", "retarget", "--input", "a.png", "--out", "b.png", "--ratio", "4:3"]);
        let Command::Retarget(a) = cli.command else { panic!() };
        assert_eq!(a.common.lambda, 0.3);
        assert_eq!(a.common.window, 25);
        assert_eq!(a.common.eta, 15);
        assert_eq!(a.ratio.label, "4:3");
        assert_eq!(a.common.backend, BackendChoice::Builtin);
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.conf");
        fs::write(&cfg, "# tuned\nlambda = 0.2\neta=12\nemit_mask = true\nworkers = 3\n").unwrap();
        let cfg = cfg.to_str().unwrap();
        let cli = parse(&[
            "carvepaint", "--config", cfg, "retarget", "--input", "a.png", "--out", "b.png", "--ratio", "1:1",
            "--lambda", "0.1",
        ]);
        let Command::Retarget(a) = cli.command else { panic!() };
        assert_eq!(a.common.lambda, 0.1);
        assert_eq!(a.common.eta, 12);
        assert!(a.emit_mask);

        let cli = parse(&["carvepaint", "bench", "--corpus", "c", "--config", cfg]);
        let Command::Bench(b) = cli.command else { panic!() };
        assert_eq!(b.workers, Some(3));
        assert_eq!(b.common.lambda, 0.2);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.conf");
        fs::write(&cfg, "colour = red\n").unwrap();
        let args: Vec<OsString> = ["carvepaint", "--config", cfg.to_str().unwrap(), "bench", "--corpus", "c"]
            .iter()
            .map(OsString::from)
            .collect();
        assert!(matches!(expand_config(args), Err(CliError::Usage(_))));
    }

    #[test]
    fn method_and_ratio_lists() {
        let cli = parse(&["carvepaint", "bench", "--corpus", "c", "--methods", "ours, scale", "--ratios", "16:9,1.5"]);
        let Command::Bench(b) = cli.command else { panic!() };
        assert_eq!(b.method_list().unwrap(), vec![Method::Ours, Method::Scale]);
        let r = b.ratio_list().unwrap();
        assert_eq!(r[1], Ratio::new("1.5", 1.5));
        let cli = parse(&["carvepaint", "bench", "--corpus", "c", "--methods", ""]);
        let Command::Bench(b) = cli.command else { panic!() };
        assert!(b.method_list().unwrap().is_empty());
    }

    #[test]
    fn remote_needs_url() {
        let common = match parse(&["carvepaint", "retarget", "--input", "a", "--out", "b", "--ratio", "1", "--backend", "remote"])
            .command
        {
            Command::Retarget(a) => a.common,
            _ => unreachable!(),
        };
        if std::env::var_os(SERVICE_URL_ENV).is_none() {
            assert!(matches!(common.backend_config(), Err(CliError::Usage(_))));
        }
    }
}
