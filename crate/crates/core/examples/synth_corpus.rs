//! Write the synthetic corpus (images plus `saliency/` maps) to a directory.
//!
//! Run: cargo run --example synth_corpus -- DIR [COUNT] [SEED]

use std::path::PathBuf;

use carvepaint::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().ok_or("usage: synth_corpus DIR [COUNT] [SEED]")?);
    let count: usize = args.next().map_or(Ok(20), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;
    let samples = synth::corpus(seed, count);
    synth::write_corpus(&dir, &samples)?;
    for s in &samples {
        println!(
            "{}: object {}x{} at ({}, {}), flat band columns {}..{}",
            s.name, s.object.w, s.object.h, s.object.x, s.object.y, s.band.0, s.band.1
        );
    }
    Ok(())
}
