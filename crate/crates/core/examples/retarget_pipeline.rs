//! The full pipeline on one image.
//!
//! Run: cargo run --example retarget_pipeline -- [IMAGE SALIENCY] [RATIO] [OUT.png]
//!
//! Without an image a synthetic sample and its saliency map are used.

use std::path::PathBuf;

use carvepaint::cli::parse_ratio;
use carvepaint::pipeline::{self, PipelineOptions};
use carvepaint::plan::RetargetParams;
use carvepaint::repaint::BuiltinBackend;
use carvepaint::{metrics, raster, saliency, synth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (img, sal, rest) = if args.len() >= 2 && !args[0].contains(':') {
        let img = raster::load_image(&args[0])?;
        let sal = saliency::saliency_from_file(&args[1], img.width(), img.height())?;
        (img, sal, &args[2..])
    } else {
        let s = synth::sample(42, 3);
        (s.image, s.saliency, &args[..])
    };
    let ratio = parse_ratio(rest.first().map_or("9:16", String::as_str))?;
    let out = rest.get(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("carvepaint-retarget.png"));

    let opts = PipelineOptions::new(RetargetParams::new(ratio));
    let result = pipeline::retarget(&img, &sal, &opts, &BuiltinBackend)?;
    let p = &result.prepared;
    let (w, h) = result.image.dims();
    println!("{}x{} -> {w}x{h} (ratio {:.4}, wanted {ratio:.4})", img.width(), img.height(), w as f64 / h as f64);
    println!("plan: {:?}", p.final_plan);
    println!(
        "{} seams removed, {} through saliency, halted early: {}, {} pixels repainted",
        p.seams_removed,
        p.salient_seams_removed,
        p.halted_early,
        p.repaint_mask.repaint_count()
    );
    let w_out = saliency::saliency_width(&p.binary_out);
    match metrics::sdr(p.w_s_ori, w_out) {
        Ok(v) => println!("SDR {v:.4} ({} -> {w_out} salient columns)", p.w_s_ori),
        Err(e) => println!("SDR: {e}"),
    }
    raster::save_image(&result.image, &out)?;
    println!("written to {}", out.display());
    Ok(())
}
