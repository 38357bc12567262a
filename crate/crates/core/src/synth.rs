//! Deterministic synthetic retargeting corpus.
//!
//! Each sample is a textured landscape image holding one flat, off-centre
//! salient rectangle and one flat full-height background band on the other
//! side. The band is the cheapest thing to carve; once it is used up,
//! plain seam carving moves on to the flat rectangle while a saliency-aware
//! carver keeps to the texture.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::{Plane, RgbImage};
use crate::saliency::{self, SaliencyMap};

pub const WIDTH: usize = 160;
pub const HEIGHT: usize = 80;

#[derive(Clone, Debug)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x..self.x + self.w).contains(&x) && (self.y..self.y + self.h).contains(&y)
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub name: String,
    pub image: RgbImage,
    pub saliency: SaliencyMap,
    pub object: Rect,
    /// Columns of the flat background band.
    pub band: (usize, usize),
}

fn color(rng: &mut ChaCha8Rng, lo: u8, hi: u8) -> [u8; 3] {
    [rng.random_range(lo..=hi), rng.random_range(lo..=hi), rng.random_range(lo..=hi)]
}

/// Sample `index` of the corpus generated from `seed`.
pub fn sample(seed: u64, index: usize) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let object_w = rng.random_range(36..=44);
    let object_h = rng.random_range(40..=56);
    let band_w = rng.random_range(16..=19);
    let object_left = rng.random_bool(0.5);

    let (object_x, band_x) = if object_left {
        (rng.random_range(6..=24), rng.random_range(112..=WIDTH - band_w - 6))
    } else {
        (
            rng.random_range(WIDTH - object_w - 24..=WIDTH - object_w - 6),
            rng.random_range(6..=32),
        )
    };
    let object = Rect {
        x: object_x,
        y: rng.random_range(6..=HEIGHT - object_h - 6),
        w: object_w,
        h: object_h,
    };

    let base = color(&mut rng, 70, 150);
    let band_color = color(&mut rng, 60, 190);
    let object_color = [rng.random_range(200..=250), rng.random_range(20..=80), rng.random_range(20..=80)];
    let image = RgbImage::from_fn(WIDTH, HEIGHT, |x, y| {
        if object.contains(x, y) {
            object_color
        } else if (band_x..band_x + band_w).contains(&x) {
            band_color
        } else {
            let n: i32 = rng.random_range(-40..=40);
            base.map(|c| (c as i32 + n).clamp(0, 255) as u8)
        }
    });
    let saliency = SaliencyMap::new(Plane::from_fn(WIDTH, HEIGHT, |x, y| {
        if object.contains(x, y) {
            1.0
        } else {
            0.0
        }
    }))
    .expect("values are 0 or 1");

    Sample {
        name: format!("synth_{index:02}"),
        image,
        saliency,
        object,
        band: (band_x, band_x + band_w),
    }
}

pub fn corpus(seed: u64, count: usize) -> Vec<Sample> {
    (0..count).map(|i| sample(seed, i)).collect()
}

/// Write `<name>.png` into `dir` and the saliency map to
/// `dir/saliency/<name>.png`, the layout the benchmark reads.
pub fn write_corpus(dir: &Path, samples: &[Sample]) -> io::Result<()> {
    let sal_dir = dir.join("saliency");
    fs::create_dir_all(&sal_dir)?;
    for s in samples {
        crate::raster::save_image(&s.image, dir.join(format!("{}.png", s.name))).map_err(io::Error::other)?;
        saliency::save_saliency(&s.saliency, sal_dir.join(format!("{}.png", s.name))).map_err(io::Error::other)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = sample(7, 3);
        let b = sample(7, 3);
        assert_eq!(a.image, b.image);
        assert_eq!(a.saliency, b.saliency);
        assert_ne!(sample(7, 4).image, a.image);
    }

    #[test]
    fn object_is_the_saliency() {
        for s in corpus(1, 10) {
            let st = saliency::stats(&saliency::binarize(&s.saliency));
            assert_eq!(st.w_s, s.object.w);
            let center = WIDTH as f64 / 2.0;
            let obj_center = s.object.x as f64 + s.object.w as f64 / 2.0;
            assert!((obj_center - center).abs() > 20.0, "{} is centred", s.name);
            assert!(s.band.1 <= s.object.x || s.band.0 >= s.object.x + s.object.w);
        }
    }
}
