//! The offline repaint backend filling a hole in a gradient.
//!
//! Run: cargo run --example inpaint_builtin -- [OUT_DIR]

use std::path::PathBuf;

use carvepaint::arrd::RepaintMask;
use carvepaint::raster::{self, Plane, RgbImage};
use carvepaint::repaint::{self, builtin_inpaint, BuiltinBackend, RepaintRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("carvepaint-inpaint"));
    std::fs::create_dir_all(&out_dir)?;

    let (w, h) = (96, 64);
    let truth = RgbImage::from_fn(w, h, |x, y| [(x * 2) as u8, (y * 3) as u8, 128]);
    let hole = |x: usize, y: usize| (30..60).contains(&x) && (20..44).contains(&y);
    let mut canvas = truth.clone();
    for y in 0..h {
        for x in 0..w {
            if hole(x, y) {
                canvas.put_pixel(x, y, [255, 0, 255]);
            }
        }
    }
    let mask = RepaintMask::new(Plane::from_fn(w, h, |x, y| !hole(x, y)));

    let outcome = builtin_inpaint(&canvas, &mask);
    let worst = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| {
            let (a, b) = (outcome.image.pixel(x, y), truth.pixel(x, y));
            (0..3).map(|c| a[c].abs_diff(b[c])).max().unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    println!("status {:?}, largest deviation from the gradient: {worst}/255", outcome.status);

    // Through the backend interface, preserved pixels are composited back exactly.
    let req = RepaintRequest::new(canvas.clone(), mask, truth.clone());
    let out = repaint::repaint(&req, &BuiltinBackend)?;
    raster::save_image(&canvas, out_dir.join("hole.png"))?;
    raster::save_image(&out, out_dir.join("filled.png"))?;
    println!("images in {}", out_dir.display());
    Ok(())
}
