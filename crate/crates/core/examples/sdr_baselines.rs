//! Saliency discard ratio of every method on a few synthetic samples.
//!
//! Run: cargo run --example sdr_baselines -- [RATIO]

use carvepaint::cli::parse_ratio;
use carvepaint::metrics::{self, BenchConfig, Method};
use carvepaint::repaint::BuiltinBackend;
use carvepaint::{saliency, synth};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let label = std::env::args().nth(1).unwrap_or_else(|| "16:9".to_string());
    let r = parse_ratio(&label)?;
    let cfg = BenchConfig::default();
    print!("{:<10}", "sample");
    for m in Method::ALL {
        print!("{m:>14}");
    }
    println!();
    for s in synth::corpus(42, 6) {
        let w_s = saliency::saliency_width(&saliency::binarize(&s.saliency));
        print!("{:<10}", s.name);
        for m in Method::ALL {
            let out = metrics::run_method(m, &s.image, &s.saliency, r, &cfg, &BuiltinBackend)?;
            let v = metrics::sdr(w_s, saliency::saliency_width(&out.binary_out))?;
            print!("{v:>14.4}");
        }
        println!();
    }
    println!("(propagated SDR at {label}; lower keeps more of the salient object)");
    Ok(())
}
