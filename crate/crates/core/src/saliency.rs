//! Saliency maps: loading, the built-in spectral-residual detector,
//! mean-threshold binarization, and the centroid / saliency-width summary.

use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::raster::{self, BitPlane, GrayImage, Plane, RasterError};

#[derive(Debug, Error)]
pub enum SaliencyError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("saliency map is {got_w}x{got_h}, image is {want_w}x{want_h}")]
    DimensionMismatch {
        want_w: usize,
        want_h: usize,
        got_w: usize,
        got_h: usize,
    },
    #[error("saliency value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("image too small for the spectral-residual detector: {0}x{1} (need at least 8x8)")]
    TooSmall(usize, usize),
}

/// Per-pixel importance in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyMap(Plane<f64>);

/// Binarized saliency; `true` marks a salient pixel.
pub type BinarySaliency = BitPlane;

impl SaliencyMap {
    pub fn new(plane: Plane<f64>) -> Result<Self, SaliencyError> {
        if let Some(&v) = plane.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(SaliencyError::OutOfRange(v));
        }
        Ok(SaliencyMap(plane))
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        SaliencyMap(Plane::filled(width, height, 0.0))
    }

    /// Build from 8-bit values, 255 = maximally salient.
    pub fn from_u8(plane: &Plane<u8>) -> Self {
        SaliencyMap(plane.map(|&v| v as f64 / 255.0))
    }

    pub fn to_u8(&self) -> Plane<u8> {
        self.0.map(|&v| (v * 255.0).round() as u8)
    }

    pub fn plane(&self) -> &Plane<f64> {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn values(&self) -> &[f64] {
        self.0.data()
    }

    pub fn transpose(&self) -> Self {
        SaliencyMap(self.0.transpose())
    }

    pub(crate) fn from_plane_unchecked(plane: Plane<f64>) -> Self {
        debug_assert!(plane.data().iter().all(|v| (0.0..=1.0).contains(v)));
        SaliencyMap(plane)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyStats {
    /// Mean column of the salient pixels (`width / 2` when there are none).
    pub centroid_x: f64,
    /// Number of columns holding at least one salient pixel.
    pub w_s: usize,
    /// Column-wise OR over all rows.
    pub row_union: Vec<bool>,
}

/// Read a detector output from disk.
pub fn saliency_from_file(
    path: impl AsRef<Path>,
    expect_w: usize,
    expect_h: usize,
) -> Result<SaliencyMap, SaliencyError> {
    let plane = raster::load_luma8(path)?;
    if plane.dims() != (expect_w, expect_h) {
        return Err(SaliencyError::DimensionMismatch {
            want_w: expect_w,
            want_h: expect_h,
            got_w: plane.width(),
            got_h: plane.height(),
        });
    }
    Ok(SaliencyMap::from_u8(&plane))
}

pub fn save_saliency(map: &SaliencyMap, path: impl AsRef<Path>) -> Result<(), SaliencyError> {
    raster::save_luma8(&map.to_u8(), path)?;
    Ok(())
}

const SR_WORKING_SIZE: usize = 64;
const SR_BLUR_SIGMA: f64 = 2.5;

/// Spectral-residual saliency.
///
/// The image is brought to a working size whose longer side is 64 pixels.
/// The log-amplitude spectrum minus its 3x3 local average is recombined
/// with the original phase and transformed back; the squared magnitude,
/// blurred and min-max normalized, is resized to the input size.
pub fn spectral_residual_saliency(img: &GrayImage) -> Result<SaliencyMap, SaliencyError> {
    let (w, h) = img.dims();
    if w < 8 || h < 8 {
        return Err(SaliencyError::TooSmall(w, h));
    }
    let (lo, hi) = min_max(img.data());
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return Ok(SaliencyMap::zeros(w, h));
    }

    let scale = SR_WORKING_SIZE as f64 / w.max(h) as f64;
    let sw = ((w as f64 * scale).round() as usize).max(1);
    let sh = ((h as f64 * scale).round() as usize).max(1);
    let small = if scale < 1.0 {
        raster::resize_area(img, sw, sh)
    } else {
        raster::resize_bilinear(img, sw, sh)
    };

    let mut spectrum: Vec<Complex<f64>> = small.data().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    fft2(&mut planner, &mut spectrum, sw, sh, false);

    // ln(1 + |F|): exact spectral zeros (flat synthetic shapes) would otherwise
    // dominate the residual with ringing.
    let log_amp: Vec<f64> = spectrum.iter().map(|c| c.norm().ln_1p()).collect();
    let phase: Vec<f64> = spectrum.iter().map(|c| c.arg()).collect();
    let log_plane = Plane::from_vec(sw, sh, log_amp).expect("dimensions consistent");
    let smoothed = box3_wrapped(&log_plane);

    let mut residual: Vec<Complex<f64>> = log_plane
        .data()
        .iter()
        .zip(smoothed.data())
        .zip(&phase)
        .map(|((&l, &s), &p)| Complex::from_polar((l - s).exp(), p))
        .collect();
    fft2(&mut planner, &mut residual, sw, sh, true);

    let energy = Plane::from_vec(sw, sh, residual.iter().map(|c| c.norm_sqr()).collect())
        .expect("dimensions consistent");
    let blurred = gaussian_blur(&energy, SR_BLUR_SIGMA);

    let (lo, hi) = min_max(blurred.data());
    if hi - lo <= 1e-12 * hi.abs().max(1e-300) {
        return Ok(SaliencyMap::zeros(w, h));
    }
    let normalized = blurred.map(|&v| (v - lo) / (hi - lo));
    let full = raster::resize_bilinear(&normalized, w, h);
    Ok(SaliencyMap::from_plane_unchecked(full.map(|&v| v.clamp(0.0, 1.0))))
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// In-place 2-D transform (rows then columns). The inverse is scaled by 1/N.
fn fft2(planner: &mut FftPlanner<f64>, data: &mut [Complex<f64>], w: usize, h: usize, inverse: bool) {
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
    } else {
        (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
    };
    for row in data.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col_fft.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
    if inverse {
        let n = (w * h) as f64;
        data.iter_mut().for_each(|c| *c /= n);
    }
}

// The spectrum is periodic, so the local average wraps around.
fn box3_wrapped(src: &Plane<f64>) -> Plane<f64> {
    let (w, h) = src.dims();
    Plane::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for dy in [h - 1, 0, 1] {
            for dx in [w - 1, 0, 1] {
                acc += src.get((x + dx) % w, (y + dy) % h);
            }
        }
        acc / 9.0
    })
}

fn gaussian_blur(src: &Plane<f64>, sigma: f64) -> Plane<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);

    let (w, h) = src.dims();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let horizontal = Plane::from_fn(w, h, |x, y| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * src.get(clamp(x as isize + i as isize - radius, w), y))
            .sum::<f64>()
    });
    Plane::from_fn(w, h, |x, y| -> f64 {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * horizontal.get(x, clamp(y as isize + i as isize - radius, h)))
            .sum()
    })
}

/// Mean-threshold binarization; a pixel is salient iff strictly above the mean.
pub fn binarize(s: &SaliencyMap) -> BinarySaliency {
    let values = s.values();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    s.plane().map(|&v| v > mean)
}

pub fn stats(b: &BinarySaliency) -> SaliencyStats {
    let (w, _) = b.dims();
    let mut row_union = vec![false; w];
    let mut sum_x = 0usize;
    let mut count = 0usize;
    for row in b.rows() {
        for (x, &bit) in row.iter().enumerate() {
            if bit {
                row_union[x] = true;
                sum_x += x;
                count += 1;
            }
        }
    }
    let centroid_x = if count == 0 {
        w as f64 / 2.0
    } else {
        sum_x as f64 / count as f64
    };
    SaliencyStats {
        centroid_x,
        w_s: row_union.iter().filter(|&&b| b).count(),
        row_union,
    }
}

/// Saliency width alone (column-union popcount).
pub fn saliency_width(b: &BinarySaliency) -> usize {
    stats(b).w_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(w: usize, h: usize, v: Vec<f64>) -> SaliencyMap {
        SaliencyMap::new(Plane::from_vec(w, h, v).unwrap()).unwrap()
    }

    #[test]
    fn file_provider_scales_to_unit_range() {
        let dir = tempfile::tempdir().unwrap();
        for (v, expect) in [(255u8, 1.0), (0, 0.0), (128, 128.0 / 255.0)] {
            let p = dir.path().join(format!("s{v}.png"));
            raster::save_luma8(&Plane::filled(4, 3, v), &p).unwrap();
            let s = saliency_from_file(&p, 4, 3).unwrap();
            assert!(s.values().iter().all(|&x| x == expect));
        }
        let p = dir.path().join("s255.png");
        assert!(matches!(
            saliency_from_file(&p, 5, 3),
            Err(SaliencyError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            saliency_from_file(dir.path().join("missing.png"), 4, 3),
            Err(SaliencyError::Raster(RasterError::NotFound { .. }))
        ));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(SaliencyMap::new(Plane::filled(2, 2, 1.5)).is_err());
    }

    #[test]
    fn binarize_symmetric_split() {
        let b = binarize(&map(4, 1, vec![0.0, 0.0, 1.0, 1.0]));
        assert_eq!(b.data(), &[false, false, true, true]);
    }

    #[test]
    fn binarize_constant_is_empty() {
        let b = binarize(&map(3, 3, vec![0.7; 9]));
        assert_eq!(b.count_ones(), 0);
    }

    #[test]
    fn stats_union_and_centroid() {
        let b = Plane::from_vec(4, 2, vec![false, true, true, false, false, false, true, false]).unwrap();
        let s = stats(&b);
        assert_eq!(s.row_union, vec![false, true, true, false]);
        assert_eq!(s.w_s, 2);
        assert!((s.centroid_x - 5.0 / 3.0).abs() < 1e-12);

        let empty = Plane::filled(9, 3, false);
        let s = stats(&empty);
        assert_eq!(s.w_s, 0);
        assert_eq!(s.centroid_x, 4.5);

        let mut single = Plane::filled(12, 4, false);
        single.set(7, 2, true);
        let s = stats(&single);
        assert_eq!((s.w_s, s.centroid_x), (1, 7.0));
    }

    #[test]
    fn spectral_residual_constant_is_zero() {
        let s = spectral_residual_saliency(&Plane::filled(40, 30, 77.0)).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn spectral_residual_rejects_tiny() {
        assert!(matches!(
            spectral_residual_saliency(&Plane::filled(7, 20, 1.0)),
            Err(SaliencyError::TooSmall(7, 20))
        ));
    }

    #[test]
    fn spectral_residual_peaks_on_bright_square() {
        let img = Plane::from_fn(64, 64, |x, y| {
            if (40..44).contains(&x) && (12..16).contains(&y) {
                255.0
            } else {
                10.0
            }
        });
        let s = spectral_residual_saliency(&img).unwrap();
        let (argmax, _) = s
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let (x, y) = (argmax % 64, argmax / 64);
        assert!((40..44).contains(&x) && (12..16).contains(&y), "argmax at ({x},{y})");
    }

    #[test]
    fn spectral_residual_is_deterministic_and_sized() {
        let img = Plane::from_fn(90, 50, |x, y| ((x * 31 + y * 17) % 97) as f64);
        let a = spectral_residual_saliency(&img).unwrap();
        let b = spectral_residual_saliency(&img).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.dims(), (90, 50));
    }

    proptest! {
        #[test]
        fn binarize_matches_scalar_oracle(v in proptest::collection::vec(0.0f64..=1.0, 1..60)) {
            let n = v.len();
            let s = map(n, 1, v.clone());
            let mean: f64 = v.iter().sum::<f64>() / n as f64;
            let b = binarize(&s);
            for i in 0..n {
                prop_assert_eq!(b.data()[i], v[i] > mean);
            }
        }

        #[test]
        fn width_bounds(bits in proptest::collection::vec(any::<bool>(), 1..80), w in 1usize..10) {
            let h = bits.len().div_ceil(w);
            let mut padded = bits.clone();
            padded.resize(w * h, false);
            let b = Plane::from_vec(w, h, padded).unwrap();
            let s = stats(&b);
            prop_assert!(s.w_s <= w);
            prop_assert_eq!(s.w_s == 0, b.count_ones() == 0);
            prop_assert!(s.centroid_x >= 0.0 && s.centroid_x < w as f64);
        }

        #[test]
        fn spectral_output_in_unit_range(pixels in proptest::collection::vec(0u8..=255, 24 * 16)) {
            let img = Plane::from_vec(24, 16, pixels.iter().map(|&p| p as f64).collect()).unwrap();
            let s = spectral_residual_saliency(&img).unwrap();
            prop_assert!(s.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
