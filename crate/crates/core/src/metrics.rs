//! Saliency discard ratio, baseline retargeting operators and the batch
//! benchmark.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::carve::{self, CarveError};
use crate::pipeline::{self, PipelineError, PipelineOptions, RepaintRegion};
use crate::plan::{self, Orientation, RetargetParams};
use crate::raster::{self, RgbImage};
use crate::repaint::{BackendConfig, RepaintBackend, RepaintError};
use crate::saliency::{self, BinarySaliency, SaliencyError, SaliencyMap};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("input saliency width is zero; SDR is undefined")]
    Undefined,
    #[error("propagated SDR needs the carried saliency of the output")]
    MissingContext,
    #[error(transparent)]
    Saliency(#[from] SaliencyError),
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("corpus directory {0} is not readable: {1}")]
    Corpus(PathBuf, std::io::Error),
    #[error("backend: {0}")]
    Backend(#[from] RepaintError),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("cannot write report to {0}: {1}")]
    Write(PathBuf, String),
}

/// `(w_s_ori - w_s_out) / w_s_ori`. Negative when the salient region grew.
pub fn sdr(w_s_ori: usize, w_s_out: usize) -> Result<f64, MetricError> {
    if w_s_ori == 0 {
        return Err(MetricError::Undefined);
    }
    Ok((w_s_ori as f64 - w_s_out as f64) / w_s_ori as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SdrMode {
    /// Count the input's binarized saliency carried through the operator.
    Propagated,
    /// Re-run the spectral-residual detector on the output.
    Detector,
}

impl fmt::Display for SdrMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SdrMode::Propagated => "propagated",
            SdrMode::Detector => "detector",
        })
    }
}

impl FromStr for SdrMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "propagated" => Ok(SdrMode::Propagated),
            "detector" => Ok(SdrMode::Detector),
            other => Err(format!("unknown SDR mode {other:?} (expected propagated or detector)")),
        }
    }
}

/// Saliency width of an image under the spectral-residual detector.
pub fn detected_saliency_width(img: &RgbImage) -> Result<usize, MetricError> {
    let sal = saliency::spectral_residual_saliency(&raster::to_gray(img))?;
    Ok(saliency::saliency_width(&saliency::binarize(&sal)))
}

pub fn output_saliency_width(
    out: &RgbImage,
    mode: SdrMode,
    propagated: Option<&BinarySaliency>,
) -> Result<usize, MetricError> {
    match mode {
        SdrMode::Propagated => propagated
            .map(saliency::saliency_width)
            .ok_or(MetricError::MissingContext),
        SdrMode::Detector => detected_saliency_width(out),
    }
}

/// An operator's output together with the input's binarized saliency
/// carried through the same geometric change.
#[derive(Clone, Debug)]
pub struct BaselineOutput {
    pub image: RgbImage,
    pub binary_out: BinarySaliency,
}

/// Baselines follow the pipeline's orientation rule: they shrink the
/// width when `r < W/H` and the height otherwise. Both cases are handled by
/// running the columns version on transposed inputs.
fn oriented(
    img: &RgbImage,
    b: &BinarySaliency,
    r: f64,
    op: impl FnOnce(&RgbImage, &BinarySaliency, f64) -> BaselineOutput,
) -> BaselineOutput {
    match plan::choose_orientation(img.width(), img.height(), r) {
        Orientation::Columns => op(img, b, r),
        Orientation::Rows => {
            let out = op(&img.transpose(), &b.transpose(), 1.0 / r);
            BaselineOutput {
                image: out.image.transpose(),
                binary_out: out.binary_out.transpose(),
            }
        }
    }
}

fn target_width(height: usize, r: f64) -> usize {
    ((height as f64 * r).round() as usize).max(1)
}

/// Nearest-neighbour resample to `(round(H * r), H)`.
pub fn baseline_scale(img: &RgbImage, r: f64) -> RgbImage {
    let b = BinarySaliency::filled(img.width(), img.height(), false);
    baseline_scale_with(img, &b, r).image
}

pub fn baseline_scale_with(img: &RgbImage, b: &BinarySaliency, r: f64) -> BaselineOutput {
    oriented(img, b, r, |img, b, r| {
        let w_t = target_width(img.height(), r);
        BaselineOutput {
            image: raster::resize_nearest_rgb(img, w_t, img.height()),
            binary_out: raster::resize_nearest(b, w_t, img.height()),
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CropAnchor {
    /// Centre the window on the saliency centroid.
    Saliency,
    /// Centre the window on the image.
    Center,
}

/// Left edge and width of the crop window in a `width`-column image.
///
/// The window is `round(H * r)` wide (at most `width`) and centred on
/// `center_x` (in pixel-index units, so a block spanning columns `a..b`
/// has centre `(a + b - 1) / 2`), then shifted inside the image.
pub fn crop_window(width: usize, height: usize, r: f64, center_x: f64) -> (usize, usize) {
    let w_t = target_width(height, r).min(width);
    let left = (center_x + 0.5 - w_t as f64 / 2.0 + 0.5).floor();
    let x0 = (left.max(0.0) as usize).min(width - w_t);
    (x0, w_t)
}

pub fn baseline_crop(img: &RgbImage, r: f64, sal: &SaliencyMap, anchor: CropAnchor) -> RgbImage {
    baseline_crop_with(img, &saliency::binarize(sal), r, anchor).image
}

pub fn baseline_crop_with(img: &RgbImage, b: &BinarySaliency, r: f64, anchor: CropAnchor) -> BaselineOutput {
    oriented(img, b, r, |img, b, r| {
        let (w, h) = img.dims();
        let center = match anchor {
            CropAnchor::Saliency => saliency::stats(b).centroid_x,
            CropAnchor::Center => (w as f64 - 1.0) / 2.0,
        };
        let (x0, w_t) = crop_window(w, h, r, center);
        BaselineOutput {
            image: img.crop(x0, 0, w_t, h),
            binary_out: raster::Plane::from_fn(w_t, h, |x, y| *b.get(x0 + x, y)),
        }
    })
}

/// Plain seam carving to `round(H * r)` columns: gradient energy only.
pub fn baseline_seam_carving(img: &RgbImage, r: f64) -> Result<RgbImage, CarveError> {
    let b = BinarySaliency::filled(img.width(), img.height(), false);
    Ok(baseline_seam_carving_with(img, &b, r)?.image)
}

pub fn baseline_seam_carving_with(img: &RgbImage, b: &BinarySaliency, r: f64) -> Result<BaselineOutput, CarveError> {
    let mut err = None;
    let out = oriented(img, b, r, |img, b, r| {
        let w_t = target_width(img.height(), r).min(img.width());
        let zero = SaliencyMap::zeros(img.width(), img.height());
        match carve::carve_to_width(img, &zero, w_t, 0.0) {
            Ok(res) => BaselineOutput {
                binary_out: res.mask.compact(b),
                image: res.image,
            },
            Err(e) => {
                err = Some(e);
                BaselineOutput {
                    image: img.clone(),
                    binary_out: b.clone(),
                }
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    /// The full pipeline.
    Ours,
    /// The pipeline repainting every background pixel instead of abrupt ones.
    Br,
    Scale,
    Crop,
    CenterCrop,
    SeamCarving,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Ours,
        Method::Br,
        Method::Scale,
        Method::Crop,
        Method::CenterCrop,
        Method::SeamCarving,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ours => "ours",
            Method::Br => "br",
            Method::Scale => "scale",
            Method::Crop => "crop",
            Method::CenterCrop => "center-crop",
            Method::SeamCarving => "seam-carving",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method {s:?} (expected one of {})", names.join(", "))
            })
    }
}

/// A target aspect ratio with the label it was written as.
#[derive(Clone, Debug, PartialEq)]
pub struct Ratio {
    pub label: String,
    pub value: f64,
}

impl Ratio {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Ratio {
            label: label.into(),
            value,
        }
    }

    /// Label usable inside a file name (`16:9` becomes `16x9`).
    pub fn file_tag(&self) -> String {
        self.label.replace([':', '/'], "x")
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    /// `lambda`, `window_l` and `eta` are used; the ratio comes per item.
    pub params: RetargetParams,
    pub dilation: usize,
    pub sdr_mode: SdrMode,
    pub workers: usize,
    /// Use the spectral-residual detector when an image has no saliency file.
    pub auto_saliency: bool,
    pub backend: BackendConfig,
    pub seed: u64,
    pub steps: u32,
    /// Where output images go; nothing is written when `None`.
    pub output_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            params: RetargetParams::new(1.0),
            dilation: 0,
            sdr_mode: SdrMode::Propagated,
            workers: 1,
            auto_saliency: false,
            backend: BackendConfig::default(),
            seed: 0,
            steps: 30,
            output_dir: None,
        }
    }
}

/// Apply one method to one image.
pub fn run_method(
    method: Method,
    img: &RgbImage,
    sal: &SaliencyMap,
    r: f64,
    cfg: &BenchConfig,
    backend: &dyn RepaintBackend,
) -> Result<BaselineOutput, PipelineError> {
    let b = saliency::binarize(sal);
    match method {
        Method::Ours | Method::Br => {
            let mut opts = PipelineOptions::new(RetargetParams {
                ratio_r: r,
                ..cfg.params.clone()
            });
            opts.region = if method == Method::Ours {
                RepaintRegion::Abrupt
            } else {
                RepaintRegion::Background
            };
            opts.dilation = cfg.dilation;
            opts.seed = cfg.seed;
            opts.steps = cfg.steps;
            let out = pipeline::retarget(img, sal, &opts, backend)?;
            Ok(BaselineOutput {
                image: out.image,
                binary_out: out.prepared.binary_out,
            })
        }
        Method::Scale => Ok(baseline_scale_with(img, &b, r)),
        Method::Crop => Ok(baseline_crop_with(img, &b, r, CropAnchor::Saliency)),
        Method::CenterCrop => Ok(baseline_crop_with(img, &b, r, CropAnchor::Center)),
        Method::SeamCarving => Ok(baseline_seam_carving_with(img, &b, r)?),
    }
}

/// One benchmark item.
#[derive(Clone, Debug, Serialize)]
pub struct MethodResult {
    pub image: String,
    pub method: Method,
    pub ratio: String,
    pub ratio_value: f64,
    /// `None` when the input has no salient pixels.
    pub sdr: Option<f64>,
    pub sdr_mode: SdrMode,
    pub runtime_s: f64,
    pub output: Option<PathBuf>,
}

/// An item, or a whole image, that could not be processed.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub image: String,
    pub method: Option<Method>,
    pub ratio: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub methods: Vec<Method>,
    pub ratios: Vec<Ratio>,
    pub sdr_mode: SdrMode,
    /// Sorted by image, then method and ratio in request order.
    pub rows: Vec<MethodResult>,
    pub failures: Vec<Failure>,
}

fn format_sdr(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

impl Report {
    pub fn mean_sdr(&self, method: Method, ratio_label: &str) -> Option<f64> {
        let values: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && r.ratio == ratio_label)
            .filter_map(|r| r.sdr)
            .collect();
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }

    pub fn images(&self) -> usize {
        let mut names: Vec<&str> = self.rows.iter().map(|r| r.image.as_str()).collect();
        names.dedup();
        names.len()
    }

    pub fn csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["image", "method", "ratio", "sdr", "sdr_mode", "runtime_s", "output"])
            .expect("in-memory write");
        for r in &self.rows {
            let output = r.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            w.write_record([
                r.image.as_str(),
                r.method.name(),
                r.ratio.as_str(),
                &format_sdr(r.sdr),
                &r.sdr_mode.to_string(),
                &format!("{:.4}", r.runtime_s),
                &output,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Mean SDR per method (rows) and ratio (columns).
    pub fn markdown_string(&self) -> String {
        let mut s = format!(
            "Mean SDR ({} mode) over {} image(s); lower is better.\n\n| Method |",
            self.sdr_mode,
            self.images()
        );
        for r in &self.ratios {
            s.push_str(&format!(" {} |", r.label));
        }
        s.push_str("\n|---|");
        for _ in &self.ratios {
            s.push_str("---:|");
        }
        s.push('\n');
        for &m in &self.methods {
            s.push_str(&format!("| {m} |"));
            for r in &self.ratios {
                let cell = self.mean_sdr(m, &r.label).map_or("N/A".to_string(), |v| format!("{v:.4}"));
                s.push_str(&format!(" {cell} |"));
            }
            s.push('\n');
        }
        if !self.failures.is_empty() {
            s.push_str(&format!("\n{} item(s) skipped.\n", self.failures.len()));
        }
        s
    }

    /// Write `report.csv` and `report.md` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<(), BenchError> {
        let fail = |p: &Path, e: std::io::Error| BenchError::Write(p.to_path_buf(), e.to_string());
        fs::create_dir_all(dir).map_err(|e| fail(dir, e))?;
        let csv_path = dir.join("report.csv");
        fs::write(&csv_path, self.csv_string()).map_err(|e| fail(&csv_path, e))?;
        let md_path = dir.join("report.md");
        fs::write(&md_path, self.markdown_string()).map_err(|e| fail(&md_path, e))?;
        Ok(())
    }
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Image files directly inside `corpus`, sorted by name.
pub fn corpus_images(corpus: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let entries = fs::read_dir(corpus).map_err(|e| BenchError::Corpus(corpus.to_path_buf(), e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Saliency for `image_path`: `saliency/<stem>.png` next to it, else the
/// detector when allowed.
fn load_saliency(image_path: &Path, img: &RgbImage, auto: bool) -> Result<SaliencyMap, String> {
    let stem = image_path.file_stem().unwrap_or_default();
    let dir = image_path.parent().unwrap_or(Path::new("."));
    let file = dir.join("saliency").join(stem).with_extension("png");
    if file.exists() {
        saliency::saliency_from_file(&file, img.width(), img.height()).map_err(|e| e.to_string())
    } else if auto {
        saliency::spectral_residual_saliency(&raster::to_gray(img)).map_err(|e| e.to_string())
    } else {
        Err(format!("no saliency map at {} and automatic saliency is off", file.display()))
    }
}

fn bench_image(
    path: &Path,
    ratios: &[Ratio],
    methods: &[Method],
    cfg: &BenchConfig,
    backend: &dyn RepaintBackend,
) -> (Vec<MethodResult>, Vec<Failure>) {
    let name = path.file_name().unwrap_or_default().to_string_lossy().into_owned();
    let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let whole = |message: String| Failure {
        image: name.clone(),
        method: None,
        ratio: None,
        message,
    };
    let img = match raster::load_image(path) {
        Ok(img) => img,
        Err(e) => return (Vec::new(), vec![whole(e.to_string())]),
    };
    let sal = match load_saliency(path, &img, cfg.auto_saliency) {
        Ok(s) => s,
        Err(e) => return (Vec::new(), vec![whole(e)]),
    };
    let w_s_ori = match cfg.sdr_mode {
        SdrMode::Propagated => Ok(saliency::saliency_width(&saliency::binarize(&sal))),
        SdrMode::Detector => detected_saliency_width(&img),
    };
    let w_s_ori = match w_s_ori {
        Ok(w) => w,
        Err(e) => return (Vec::new(), vec![whole(e.to_string())]),
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ratio in ratios {
        for &method in methods {
            let item_fail = |message: String| Failure {
                image: name.clone(),
                method: Some(method),
                ratio: Some(ratio.label.clone()),
                message,
            };
            let start = Instant::now();
            let out = match run_method(method, &img, &sal, ratio.value, cfg, backend) {
                Ok(out) => out,
                Err(e) => {
                    failures.push(item_fail(e.to_string()));
                    continue;
                }
            };
            let runtime_s = start.elapsed().as_secs_f64();
            let w_out = match output_saliency_width(&out.image, cfg.sdr_mode, Some(&out.binary_out)) {
                Ok(w) => w,
                Err(e) => {
                    failures.push(item_fail(e.to_string()));
                    continue;
                }
            };
            let output = match &cfg.output_dir {
                Some(dir) => {
                    let p = dir.join(format!("{stem}__{method}__{}.png", ratio.file_tag()));
                    if let Err(e) = raster::save_image(&out.image, &p) {
                        failures.push(item_fail(e.to_string()));
                        continue;
                    }
                    Some(p)
                }
                None => None,
            };
            rows.push(MethodResult {
                image: name.clone(),
                method,
                ratio: ratio.label.clone(),
                ratio_value: ratio.value,
                sdr: sdr(w_s_ori, w_out).ok(),
                sdr_mode: cfg.sdr_mode,
                runtime_s,
                output,
            });
        }
    }
    (rows, failures)
}

/// Run every method at every ratio on every image of `corpus`.
///
/// Saliency maps are read from `corpus/saliency/<stem>.png`. Images are
/// processed concurrently on `cfg.workers` threads. Per-item problems are
/// collected in [`Report::failures`]; only an unreadable corpus directory,
/// an unusable backend configuration or an unwritable output directory
/// fail the whole run.
pub fn run_benchmark(
    corpus: &Path,
    ratios: &[Ratio],
    methods: &[Method],
    cfg: &BenchConfig,
) -> Result<Report, BenchError> {
    let images = corpus_images(corpus)?;
    let backend = cfg.backend.build()?;
    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir).map_err(|e| BenchError::Write(dir.clone(), e.to_string()))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let per_image: Vec<(Vec<MethodResult>, Vec<Failure>)> = pool.install(|| {
        images
            .par_iter()
            .map(|p| bench_image(p, ratios, methods, cfg, backend.as_ref()))
            .collect()
    });

    let method_pos = |m: Method| methods.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    let ratio_pos = |l: &str| ratios.iter().position(|r| r.label == l).unwrap_or(usize::MAX);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_image {
        rows.extend(r);
        failures.extend(f);
    }
    rows.sort_by(|a, b| {
        (a.image.as_str(), method_pos(a.method), ratio_pos(&a.ratio)).cmp(&(
            b.image.as_str(),
            method_pos(b.method),
            ratio_pos(&b.ratio),
        ))
    });
    failures.sort_by(|a, b| a.image.cmp(&b.image));
    Ok(Report {
        methods: methods.to_vec(),
        ratios: ratios.to_vec(),
        sdr_mode: cfg.sdr_mode,
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Plane;
    use proptest::prelude::*;

    fn block_binary(w: usize, h: usize, cols: std::ops::Range<usize>) -> BinarySaliency {
        Plane::from_fn(w, h, |x, _| cols.contains(&x))
    }

    #[test]
    fn sdr_arithmetic() {
        assert_eq!(sdr(100, 100).unwrap(), 0.0);
        assert!((sdr(100, 85).unwrap() - 0.15).abs() < 1e-12);
        assert!((sdr(100, 120).unwrap() + 0.2).abs() < 1e-12);
        assert!(matches!(sdr(0, 3), Err(MetricError::Undefined)));
    }

    #[test]
    fn propagated_width_needs_context() {
        let img = RgbImage::filled(10, 10, [0; 3]);
        assert!(matches!(
            output_saliency_width(&img, SdrMode::Propagated, None),
            Err(MetricError::MissingContext)
        ));
        let b = block_binary(10, 10, 2..5);
        assert_eq!(output_saliency_width(&img, SdrMode::Propagated, Some(&b)).unwrap(), 3);
    }

    #[test]
    fn scale_two_by_two_keeps_left_column() {
        let img = RgbImage::from_fn(2, 2, |x, y| [(10 * x + y) as u8, 0, 0]);
        let out = baseline_scale(&img, 0.5);
        assert_eq!(out.dims(), (1, 2));
        assert_eq!(out.pixel(0, 0)[0], 0);
        assert_eq!(out.pixel(0, 1)[0], 1);
    }

    #[test]
    fn scale_identity_dims() {
        let img = RgbImage::filled(40, 30, [5; 3]);
        // r slightly below W/H keeps the columns path at identity width
        assert_eq!(baseline_scale(&img, 40.0 / 30.0 - 1e-9).dims(), (40, 30));
    }

    #[test]
    fn scale_shortens_tall_targets() {
        let img = RgbImage::filled(40, 30, [5; 3]);
        assert_eq!(baseline_scale(&img, 16.0 / 9.0).dims(), (40, 23));
    }

    #[test]
    fn crop_follows_saliency() {
        let img = RgbImage::from_fn(100, 50, |x, _| [x as u8, 0, 0]);
        let b = block_binary(100, 50, 70..80);
        let out = baseline_crop_with(&img, &b, 0.5, CropAnchor::Saliency);
        assert_eq!(out.image.dims(), (25, 50));
        // block centre 75, window 62.5..87.5 rounded to 63..88
        assert_eq!(out.image.pixel(0, 0)[0], 63);
        assert_eq!(saliency::saliency_width(&out.binary_out), 10);
        let center = baseline_crop_with(&img, &b, 0.5, CropAnchor::Center);
        assert_eq!(center.image.pixel(0, 0)[0], 38);
        assert_eq!(saliency::saliency_width(&center.binary_out), 0);
    }

    #[test]
    fn crop_clamps_to_image() {
        let img = RgbImage::from_fn(100, 50, |x, _| [x as u8, 0, 0]);
        let b = block_binary(100, 50, 95..100);
        let out = baseline_crop_with(&img, &b, 0.5, CropAnchor::Saliency);
        assert_eq!(out.image.pixel(0, 0)[0], 75);
    }

    #[test]
    fn crop_narrower_than_block() {
        // block 40 wide, window 25: SDR = 1 - 25/40
        let img = RgbImage::filled(100, 50, [1; 3]);
        let b = block_binary(100, 50, 30..70);
        let out = baseline_crop_with(&img, &b, 0.5, CropAnchor::Saliency);
        let w = saliency::saliency_width(&out.binary_out);
        assert!((sdr(40, w).unwrap() - (1.0 - 25.0 / 40.0)).abs() < 1e-12);
    }

    #[test]
    fn crop_identity() {
        let img = RgbImage::from_fn(30, 20, |x, y| [x as u8, y as u8, 0]);
        let b = block_binary(30, 20, 3..9);
        assert_eq!(baseline_crop_with(&img, &b, 1.5 - 1e-9, CropAnchor::Saliency).image, img);
    }

    #[test]
    fn seam_carving_uniform_removes_leftmost() {
        let img = RgbImage::from_fn(10, 6, |x, _| if x == 9 { [0, 0, 0] } else { [50, 50, 50] });
        let b = block_binary(10, 6, 0..0);
        let out = baseline_seam_carving_with(&img, &b, 1.0).unwrap();
        assert_eq!(out.image.dims(), (6, 6));
    }

    #[test]
    fn seam_carving_matches_plain_carver() {
        let img = RgbImage::from_fn(6, 6, |x, y| [((x * 53 + y * 97) % 251) as u8, (x * 40) as u8, (y * 40) as u8]);
        let out = baseline_seam_carving(&img, 4.0 / 6.0).unwrap();
        let expected = carve::carve_to_width(&img, &SaliencyMap::zeros(6, 6), 4, 0.0).unwrap();
        assert_eq!(out, expected.image);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn markdown_shape() {
        let report = Report {
            methods: vec![Method::Ours, Method::Scale],
            ratios: vec![Ratio::new("16:9", 16.0 / 9.0), Ratio::new("1:1", 1.0)],
            sdr_mode: SdrMode::Propagated,
            rows: vec![
                row("a.png", Method::Ours, "16:9", Some(0.0)),
                row("b.png", Method::Ours, "16:9", Some(0.5)),
                row("a.png", Method::Scale, "16:9", None),
            ],
            failures: Vec::new(),
        };
        let md = report.markdown_string();
        assert!(md.contains("| Method | 16:9 | 1:1 |"));
        assert!(md.contains("| ours | 0.2500 | N/A |"));
        assert!(md.contains("| scale | N/A | N/A |"));
        let csv = report.csv_string();
        assert!(csv.starts_with("image,method,ratio,sdr,sdr_mode,runtime_s,output\n"));
        assert!(csv.contains("a.png,scale,16:9,NA,propagated,"));
    }

    fn row(image: &str, method: Method, ratio: &str, sdr: Option<f64>) -> MethodResult {
        MethodResult {
            image: image.into(),
            method,
            ratio: ratio.into(),
            ratio_value: 0.0,
            sdr,
            sdr_mode: SdrMode::Propagated,
            runtime_s: 0.0,
            output: None,
        }
    }

    proptest! {
        #[test]
        fn scale_closed_form(w in 20usize..200, h in 5usize..60, a in 0usize..100, len in 1usize..100, rf in 0.05f64..0.95) {
            let a = a % w;
            let len = len.min(w - a);
            let r = rf * w as f64 / h as f64;
            let b = block_binary(w, h, a..a + len);
            let img = RgbImage::filled(w, h, [0; 3]);
            let out = baseline_scale_with(&img, &b, r);
            let w_t = out.image.width();
            let got = sdr(len, saliency::saliency_width(&out.binary_out)).unwrap();
            let closed = 1.0 - w_t as f64 / w as f64;
            // each of the w_t output columns samples one source column
            prop_assert!((got - closed).abs() < 1.0 / len as f64 + 1e-12, "sdr {} closed form {}", got, closed);
        }

        #[test]
        fn sdr_at_most_one(ori in 1usize..1000, out in 0usize..1000) {
            prop_assert!(sdr(ori, out).unwrap() <= 1.0);
        }
    }
}
