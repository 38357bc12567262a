//! Budgeted seam carving on a synthetic sample.
//!
//! Run: cargo run --example carve_seams -- [OUT_DIR]

use std::path::PathBuf;

use carvepaint::carve::{self, CarveState};
use carvepaint::{raster, saliency, synth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("carvepaint-carve"));
    std::fs::create_dir_all(&out_dir)?;

    let sample = synth::sample(42, 0);
    let (w, h) = sample.image.dims();
    let stats = saliency::stats(&saliency::binarize(&sample.saliency));
    println!("{}: {w}x{h}, salient columns {}, centroid x {:.1}", sample.name, stats.w_s, stats.centroid_x);

    // One seam by hand: energy, DP, removal.
    let mut state = CarveState::new(&sample.image, &sample.saliency)?;
    let seam = carve::min_seam(&state.energy());
    println!(
        "first seam: cost {:.3}, x at top/bottom {}/{}, crosses saliency: {}",
        seam.cost(&state.energy()),
        seam.cols[0],
        seam.cols[h - 1],
        carve::seam_crosses_saliency(&seam, state.binary())
    );
    state.remove_seam(&seam)?;

    // The same thing in a loop, down to 60% width with lambda = 0.3.
    for lambda in [0.0, 0.3, 0.6] {
        let target = w * 6 / 10;
        let res = carve::carve_to_width(&sample.image, &sample.saliency, target, lambda)?;
        println!(
            "lambda {lambda}: width {} (target {target}), {} seams, {} through saliency, halted early: {}",
            res.image.width(),
            res.seams_removed,
            res.salient_seams_removed,
            res.halted_early
        );
        raster::save_image(&res.image, out_dir.join(format!("carved_l{lambda}.png")))?;
        raster::save_image(&res.mask.overlay(&sample.image, [255, 0, 0]), out_dir.join(format!("seams_l{lambda}.png")))?;
    }
    println!("images in {}", out_dir.display());
    Ok(())
}
