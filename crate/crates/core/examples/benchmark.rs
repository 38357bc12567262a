//! Write a synthetic corpus to disk and benchmark it, as `carvepaint bench` does.
//!
//! Run: cargo run --release --example benchmark -- [WORK_DIR]

use std::path::PathBuf;

use carvepaint::cli::parse_ratio;
use carvepaint::metrics::{self, BenchConfig, Method, Ratio};
use carvepaint::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let work = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("carvepaint-bench"));
    let corpus = work.join("corpus");
    synth::write_corpus(&corpus, &synth::corpus(2024, 20))?;

    let ratios: Vec<Ratio> = ["16:9", "4:3", "1:1", "9:16"]
        .iter()
        .map(|l| Ratio::new(*l, parse_ratio(l).expect("literal ratio")))
        .collect();
    let methods = [Method::Ours, Method::SeamCarving, Method::Scale, Method::Crop];
    let cfg = BenchConfig {
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        output_dir: Some(work.join("report").join("outputs")),
        ..BenchConfig::default()
    };
    let start = std::time::Instant::now();
    let report = metrics::run_benchmark(&corpus, &ratios, &methods, &cfg)?;
    report.write(&work.join("report"))?;
    print!("{}", report.markdown_string());
    println!("\n{} rows in {:.1?}; reports in {}", report.rows.len(), start.elapsed(), work.join("report").display());
    Ok(())
}
