//! Which pixels get repainted: abruptness after carving, plus padding.
//!
//! Run: cargo run --example repaint_regions -- [OUT_DIR]

use std::path::PathBuf;

use carvepaint::plan::{self, RetargetParams};
use carvepaint::{arrd, carve, raster, saliency, synth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("carvepaint-arrd"));
    std::fs::create_dir_all(&out_dir)?;

    let sample = synth::sample(42, 2);
    let (w, h) = sample.image.dims();
    let params = RetargetParams::new(1.0);
    let w_s = saliency::saliency_width(&saliency::binarize(&sample.saliency));
    let p = plan::make_plan(w, h, w_s, &params);
    let carved = carve::carve_to_width(&sample.image, &sample.saliency, p.w_f, params.lambda)?;
    let p = p.with_achieved_width(carved.image.width());

    let a = arrd::abruptness(&carved.mask, params.window_l);
    for eta in [5, 10, 15, 20, 25] {
        let field = arrd::repaint_mask_from_carve(&carved.mask, &a, eta);
        println!("eta {eta:>2}: {:>5} of {} survivors repainted", field.count_zeros(), field.data().len());
    }
    let field = arrd::repaint_mask_from_carve(&carved.mask, &a, params.eta);
    let mask = arrd::merge_outpaint(&field, &p)?;
    println!(
        "canvas {}x{} (padding {}+{}), {} pixels to repaint",
        p.w_f,
        p.h_f,
        p.pad_top,
        p.pad_bottom,
        mask.repaint_count()
    );

    let binary = saliency::binarize(&sample.saliency);
    let br = arrd::merge_outpaint(arrd::background_mask(&binary, &carved.mask).bits(), &p)?;
    println!("background-repaint alternative: {} pixels", br.repaint_count());

    raster::save_bitmask(mask.bits(), out_dir.join("repaint_mask.png"))?;
    raster::save_bitmask(carved.mask.bits(), out_dir.join("carve_mask.png"))?;
    raster::save_image(&arrd::place_on_canvas(&carved.image, &p), out_dir.join("canvas.png"))?;
    println!("masks in {}", out_dir.display());
    Ok(())
}
