//! Spectral-residual saliency for an image file (or a synthetic sample).
//!
//! Run: cargo run --example spectral_saliency -- [IMAGE] [OUT.png]

use std::path::PathBuf;

use carvepaint::{raster, saliency, synth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let img = match args.next() {
        Some(path) => raster::load_image(path)?,
        None => synth::sample(42, 1).image,
    };
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("carvepaint-saliency.png"));

    let map = saliency::spectral_residual_saliency(&raster::to_gray(&img))?;
    let binary = saliency::binarize(&map);
    let stats = saliency::stats(&binary);
    println!(
        "{}x{}: {} salient pixels over {} columns, centroid x {:.1}",
        img.width(),
        img.height(),
        binary.count_ones(),
        stats.w_s,
        stats.centroid_x
    );
    saliency::save_saliency(&map, &out)?;
    println!("map written to {}", out.display());
    Ok(())
}
