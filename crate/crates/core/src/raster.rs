//! Raster value types, PNG/JPEG IO, and the geometric helpers every stage
//! shares.
//!
//! Everything here is an immutable value once built. Pixel buffers are
//! row-major; `(x, y)` means column `x` of row `y`.

use std::fs;
use std::io::{BufWriter, Cursor};
use std::path::{Path, PathBuf};

use image::ImageReader;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("image file not found: {}", path.display())]
    NotFound { path: PathBuf },
    #[error("cannot decode {}: {source}", path.display())]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("PNG encoding failed: {0}")]
    Encode(String),
    #[error("invalid raster: {0}")]
    Invalid(String),
}

pub type Result<T, E = RasterError> = std::result::Result<T, E>;

/// A row-major grid of values.
///
/// The typed images below are all `Plane`s (or thin wrappers around one);
/// the generic operations live here once.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Plane<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width >= 1 && height >= 1, "plane dimensions must be positive");
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(RasterError::Invalid(format!("zero dimension {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(RasterError::Invalid(format!(
                "buffer of {} values for {width}x{height}",
                data.len()
            )));
        }
        Ok(Plane { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width >= 1 && height >= 1, "plane dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[T] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.width)
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Plane::from_fn(self.height, self.width, |x, y| self.get(y, x).clone())
    }
}

pub type GrayImage = Plane<f64>;

/// Binary field; `true` is a set bit.
pub type BitPlane = Plane<bool>;

impl BitPlane {
    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn count_zeros(&self) -> usize {
        self.data.len() - self.count_ones()
    }
}

/// 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(RasterError::Invalid(format!("zero dimension {width}x{height}")));
        }
        if pixels.len() != 3 * width * height {
            return Err(RasterError::Invalid(format!(
                "{} bytes for a {width}x{height} RGB image",
                pixels.len()
            )));
        }
        Ok(RgbImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(3 * width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        RgbImage { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn put_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.height, self.width, |x, y| self.pixel(y, x))
    }

    /// Rows `[y0, y0 + h)` of the image, all columns.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        assert!(x0 + w <= self.width && y0 + h <= self.height, "crop out of bounds");
        Self::from_fn(w, h, |x, y| self.pixel(x0 + x, y0 + y))
    }

    fn to_image_buffer(&self) -> image::RgbImage {
        image::RgbImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .expect("buffer length checked at construction")
    }

    fn from_dynamic(img: image::DynamicImage) -> Self {
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        RgbImage {
            width: w as usize,
            height: h as usize,
            pixels: rgb.into_raw(),
        }
    }

    /// Encode as an 8-bit RGB PNG in memory.
    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Cursor::new(Vec::new());
        self.to_image_buffer()
            .write_to(&mut out, image::ImageFormat::Png)
            .map_err(|e| RasterError::Encode(e.to_string()))?;
        Ok(out.into_inner())
    }

    /// Decode PNG or JPEG bytes; alpha is dropped.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory(bytes).map_err(|source| RasterError::Decode {
            path: PathBuf::from("<memory>"),
            source,
        })?;
        Ok(Self::from_dynamic(img))
    }
}

/// Rec.601 luminance, kept as real numbers.
pub fn luma(rgb: [u8; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

pub fn to_gray(img: &RgbImage) -> GrayImage {
    Plane::from_fn(img.width, img.height, |x, y| luma(img.pixel(x, y)))
}

pub fn transpose(img: &RgbImage) -> RgbImage {
    img.transpose()
}

fn open_dynamic(path: &Path) -> Result<image::DynamicImage> {
    if !path.exists() {
        return Err(RasterError::NotFound { path: path.to_path_buf() });
    }
    let decode_err = |source| RasterError::Decode {
        path: path.to_path_buf(),
        source,
    };
    ImageReader::open(path)
        .map_err(|e| decode_err(image::ImageError::IoError(e)))?
        .with_guessed_format()
        .map_err(|e| decode_err(image::ImageError::IoError(e)))?
        .decode()
        .map_err(decode_err)
}

/// Load a PNG or JPEG as RGB.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    open_dynamic(path.as_ref()).map(RgbImage::from_dynamic)
}

/// Load any supported image as 8-bit luminance values.
pub fn load_luma8(path: impl AsRef<Path>) -> Result<Plane<u8>> {
    let img = open_dynamic(path.as_ref())?.to_luma8();
    let (w, h) = img.dimensions();
    Plane::from_vec(w as usize, h as usize, img.into_raw())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| RasterError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Save as PNG, whatever the extension says.
pub fn save_image(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &img.encode_png()?)
}

/// Save an 8-bit single-channel PNG.
pub fn save_luma8(plane: &Plane<u8>, path: impl AsRef<Path>) -> Result<()> {
    let buf = image::GrayImage::from_raw(plane.width() as u32, plane.height() as u32, plane.data().to_vec())
        .expect("plane buffer is consistent");
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| RasterError::Encode(e.to_string()))?;
    write_bytes(path.as_ref(), out.get_ref())
}

/// Encode a binary field as a 1-bit grayscale PNG (set bit = white).
pub fn encode_bitmask_png(bits: &BitPlane) -> Result<Vec<u8>> {
    let (w, h) = bits.dims();
    let stride = w.div_ceil(8);
    let mut packed = vec![0u8; stride * h];
    for (y, row) in bits.rows().enumerate() {
        for (x, &b) in row.iter().enumerate() {
            if b {
                packed[y * stride + x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(BufWriter::new(&mut out), w as u32, h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::One);
        let mut writer = enc.write_header().map_err(|e| RasterError::Encode(e.to_string()))?;
        writer
            .write_image_data(&packed)
            .map_err(|e| RasterError::Encode(e.to_string()))?;
        writer.finish().map_err(|e| RasterError::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Decode a mask PNG of any depth; pixels with luminance >= 128 are set.
pub fn decode_bitmask_png(bytes: &[u8]) -> Result<BitPlane> {
    let img = image::load_from_memory(bytes)
        .map_err(|source| RasterError::Decode {
            path: PathBuf::from("<memory>"),
            source,
        })?
        .to_luma8();
    let (w, h) = img.dimensions();
    Plane::from_vec(w as usize, h as usize, img.into_raw().into_iter().map(|v| v >= 128).collect())
}

pub fn save_bitmask(bits: &BitPlane, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_bitmask_png(bits)?)
}

/// Bilinear resample of a real-valued plane (pixel-center aligned).
pub fn resize_bilinear(src: &GrayImage, width: usize, height: usize) -> GrayImage {
    let (sw, sh) = src.dims();
    let sx = sw as f64 / width as f64;
    let sy = sh as f64 / height as f64;
    Plane::from_fn(width, height, |x, y| {
        let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (sw - 1) as f64);
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (sh - 1) as f64);
        let x0 = fx.floor() as usize;
        let y0 = fy.floor() as usize;
        let x1 = (x0 + 1).min(sw - 1);
        let y1 = (y0 + 1).min(sh - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        let top = src.get(x0, y0) * (1.0 - tx) + src.get(x1, y0) * tx;
        let bottom = src.get(x0, y1) * (1.0 - tx) + src.get(x1, y1) * tx;
        top * (1.0 - ty) + bottom * ty
    })
}

/// Area-averaging downscale; every output pixel is the coverage-weighted
/// mean of the source pixels under its footprint.
pub fn resize_area(src: &GrayImage, width: usize, height: usize) -> GrayImage {
    let (sw, sh) = src.dims();
    let weights = |n_src: usize, n_dst: usize| -> Vec<Vec<(usize, f64)>> {
        let scale = n_src as f64 / n_dst as f64;
        (0..n_dst)
            .map(|i| {
                let lo = i as f64 * scale;
                let hi = lo + scale;
                let mut w = Vec::new();
                let mut j = lo.floor() as usize;
                while (j as f64) < hi && j < n_src {
                    let cover = (hi.min(j as f64 + 1.0) - lo.max(j as f64)).max(0.0);
                    if cover > 0.0 {
                        w.push((j, cover / scale));
                    }
                    j += 1;
                }
                w
            })
            .collect()
    };
    let wx = weights(sw, width);
    let wy = weights(sh, height);
    Plane::from_fn(width, height, |x, y| {
        let mut acc = 0.0;
        for &(sy, ay) in &wy[y] {
            for &(sx, ax) in &wx[x] {
                acc += ay * ax * src.get(sx, sy);
            }
        }
        acc
    })
}

/// Source column for output column `x` under nearest-neighbor resampling
/// from `src_len` to `dst_len` samples (floor convention, left-biased).
#[inline]
pub fn nearest_index(x: usize, src_len: usize, dst_len: usize) -> usize {
    (x * src_len / dst_len).min(src_len - 1)
}

pub fn resize_nearest_rgb(img: &RgbImage, width: usize, height: usize) -> RgbImage {
    RgbImage::from_fn(width, height, |x, y| {
        img.pixel(
            nearest_index(x, img.width(), width),
            nearest_index(y, img.height(), height),
        )
    })
}

pub fn resize_nearest<T: Clone>(src: &Plane<T>, width: usize, height: usize) -> Plane<T> {
    Plane::from_fn(width, height, |x, y| {
        src.get(
            nearest_index(x, src.width(), width),
            nearest_index(y, src.height(), height),
        )
        .clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_image() -> impl Strategy<Value = RgbImage> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), 3 * w * h)
                .prop_map(move |px| RgbImage::new(w, h, px).unwrap())
        })
    }

    #[test]
    fn gray_weights() {
        assert_eq!(luma([255, 255, 255]), 255.0);
        assert!((luma([255, 0, 0]) - 76.245).abs() < 1e-9);
    }

    #[test]
    fn transpose_row_to_column() {
        let row = RgbImage::from_fn(5, 1, |x, _| [x as u8, 0, 0]);
        let col = row.transpose();
        assert_eq!(col.dims(), (1, 5));
        for y in 0..5 {
            assert_eq!(col.pixel(0, y), [y as u8, 0, 0]);
        }
    }

    #[test]
    fn transpose_3x2_layout() {
        // pixel value encodes its source position as 10*x + y
        let img = RgbImage::from_fn(3, 2, |x, y| [(10 * x + y) as u8, 0, 0]);
        let t = img.transpose();
        assert_eq!(t.dims(), (2, 3));
        let listed: Vec<u8> = (0..3)
            .flat_map(|y| (0..2).map(move |x| (x, y)))
            .map(|(x, y)| t.pixel(x, y)[0])
            .collect();
        assert_eq!(listed, vec![0, 1, 10, 11, 20, 21]);
    }

    #[test]
    fn invalid_buffers_rejected() {
        assert!(RgbImage::new(2, 2, vec![0; 11]).is_err());
        assert!(RgbImage::new(0, 2, vec![]).is_err());
        assert!(Plane::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn bitmask_png_is_one_bit_and_round_trips() {
        let bits = Plane::from_fn(13, 3, |x, y| (x + y) % 3 == 0);
        let bytes = encode_bitmask_png(&bits).unwrap();
        let decoder = png::Decoder::new(Cursor::new(&bytes));
        let reader = decoder.read_info().unwrap();
        assert_eq!(reader.info().bit_depth, png::BitDepth::One);
        assert_eq!(decode_bitmask_png(&bytes).unwrap(), bits);
    }

    #[test]
    fn nearest_is_left_biased() {
        let img = RgbImage::from_fn(2, 2, |x, _| [x as u8 * 200, 0, 0]);
        let out = resize_nearest_rgb(&img, 1, 2);
        assert_eq!(out.pixel(0, 0), [0, 0, 0]);
        assert_eq!(out.pixel(0, 1), [0, 0, 0]);
    }

    #[test]
    fn area_resize_preserves_mean() {
        let src = Plane::from_fn(10, 6, |x, y| (x * 7 + y * 3) as f64);
        let mean = src.data().iter().sum::<f64>() / 60.0;
        let dst = resize_area(&src, 5, 3);
        let dmean = dst.data().iter().sum::<f64>() / 15.0;
        assert!((mean - dmean).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn transpose_is_involution(img in arb_image()) {
            prop_assert_eq!(img.transpose().transpose(), img);
        }

        #[test]
        fn gray_commutes_with_transpose(img in arb_image()) {
            prop_assert_eq!(to_gray(&img.transpose()), to_gray(&img).transpose());
        }

        #[test]
        fn gray_matches_scalar_loop(img in arb_image()) {
            let g = to_gray(&img);
            let bytes = img.as_bytes();
            for i in 0..img.width() * img.height() {
                let expect = 0.299 * bytes[3 * i] as f64
                    + 0.587 * bytes[3 * i + 1] as f64
                    + 0.114 * bytes[3 * i + 2] as f64;
                prop_assert_eq!(g.data()[i], expect);
            }
        }

        #[test]
        fn png_memory_round_trip(img in arb_image()) {
            let bytes = img.encode_png().unwrap();
            prop_assert_eq!(RgbImage::decode(&bytes).unwrap(), img);
        }
    }
}
