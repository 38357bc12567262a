//! Target geometry for the usual ratios.
//!
//! Run: cargo run --example plan_ratios -- [WIDTH HEIGHT SALIENT_WIDTH]

use carvepaint::cli::parse_ratio;
use carvepaint::plan::{self, Orientation, RetargetParams};

fn main() {
    let nums: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (w, h, w_s) = match nums[..] {
        [w, h, s] => (w, h, s),
        _ => (1024, 683, 600),
    };
    println!("{w}x{h}, salient width {w_s}, lambda {}", RetargetParams::DEFAULT_LAMBDA);
    println!("{:>6} {:>8} {:>5} {:>5} {:>5} {:>9}", "ratio", "axis", "w_t", "w_f", "h_f", "pad");
    for label in ["16:9", "4:3", "1:1", "9:16"] {
        let params = RetargetParams::new(parse_ratio(label).expect("literal ratio"));
        let orientation = plan::choose_orientation(w, h, params.ratio_r);
        // Rows: plan on the transposed image.
        let p = match orientation {
            Orientation::Columns => plan::make_plan(w, h, w_s, &params),
            Orientation::Rows => plan::make_plan(h, w, h, &params.transposed()),
        };
        let p = p.with_orientation(orientation);
        let (ow, oh) = p.output_dims();
        println!(
            "{label:>6} {:>8} {:>5} {:>5} {:>5} {:>4}+{:<4} -> {ow}x{oh}",
            format!("{orientation:?}").to_lowercase(),
            p.w_t,
            p.w_f,
            p.h_f,
            p.pad_top,
            p.pad_bottom
        );
    }
    println!("(rows plans assume the salient region spans the full height)");
}
