use crate::arrd::RepaintMask;
use crate::raster::RgbImage;

use super::{RepaintBackend, RepaintError, RepaintRequest};

const MAX_SWEEPS: usize = 2000;
/// Stop once no pixel moves by this much (8-bit units) in a sweep.
const TOLERANCE: f64 = 0.1 / 255.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InpaintStatus {
    Converged { sweeps: usize },
    SweepLimit,
    /// The mask preserved nothing; the canvas was filled with mid-gray.
    NoKnownPixels,
}

#[derive(Clone, Debug)]
pub struct InpaintOutcome {
    pub image: RgbImage,
    pub status: InpaintStatus,
}

/// Laplace relaxation of the repaint region.
///
/// Each repaint pixel is repeatedly moved towards the mean of its in-canvas
/// 4-neighbours (Gauss-Seidel order with successive over-relaxation), per
/// channel, with preserved pixels held fixed. Canvas edges act as mirrors.
/// Starting values are the canvas contents clamped to the range of the
/// preserved pixels bordering the region; the result is clamped to the same
/// range, where the exact harmonic solution lies.
pub fn builtin_inpaint(canvas: &RgbImage, mask: &RepaintMask) -> InpaintOutcome {
    assert_eq!(canvas.dims(), mask.dims(), "builtin_inpaint: dimension mismatch");
    let (w, h) = canvas.dims();
    if mask.is_all_preserve() {
        return InpaintOutcome {
            image: canvas.clone(),
            status: InpaintStatus::Converged { sweeps: 0 },
        };
    }
    if mask.bits().count_ones() == 0 {
        log::warn!("repaint mask preserves no pixels; filling with mid-gray");
        return InpaintOutcome {
            image: RgbImage::filled(w, h, [128; 3]),
            status: InpaintStatus::NoKnownPixels,
        };
    }

    let idx = |x: usize, y: usize| y * w + x;
    let neighbours = |x: usize, y: usize| {
        let mut n = [usize::MAX; 4];
        if x > 0 {
            n[0] = idx(x - 1, y);
        }
        if x + 1 < w {
            n[1] = idx(x + 1, y);
        }
        if y > 0 {
            n[2] = idx(x, y - 1);
        }
        if y + 1 < h {
            n[3] = idx(x, y + 1);
        }
        n
    };

    let mut unknown: Vec<(usize, [usize; 4])> = Vec::new();
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for y in 0..h {
        for x in 0..w {
            let n = neighbours(x, y);
            if mask.preserve(x, y) {
                let borders_hole = n.iter().any(|&j| j != usize::MAX && !mask.preserve(j % w, j / w));
                if borders_hole {
                    let px = canvas.pixel(x, y);
                    for c in 0..3 {
                        lo[c] = lo[c].min(px[c] as f64);
                        hi[c] = hi[c].max(px[c] as f64);
                    }
                }
            } else {
                unknown.push((idx(x, y), n));
            }
        }
    }

    let mut channels: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let mut v: Vec<f64> = canvas.as_bytes().iter().skip(c).step_by(3).map(|&b| b as f64).collect();
            for &(i, _) in &unknown {
                v[i] = v[i].clamp(lo[c], hi[c]);
            }
            v
        })
        .collect();

    let span = w.max(h) as f64;
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / span).sin());
    let mut status = InpaintStatus::SweepLimit;
    for sweep in 1..=MAX_SWEEPS {
        let mut max_change: f64 = 0.0;
        for values in channels.iter_mut() {
            for &(i, n) in &unknown {
                let mut sum = 0.0;
                let mut count = 0.0;
                for &j in &n {
                    if j != usize::MAX {
                        sum += values[j];
                        count += 1.0;
                    }
                }
                let step = omega * (sum / count - values[i]);
                max_change = max_change.max(step.abs());
                values[i] += step;
            }
        }
        if max_change < TOLERANCE {
            status = InpaintStatus::Converged { sweeps: sweep };
            break;
        }
    }
    if status == InpaintStatus::SweepLimit {
        log::debug!("builtin inpaint hit the {MAX_SWEEPS}-sweep limit");
    }

    let mut out = canvas.clone();
    for &(i, _) in &unknown {
        let px = [0, 1, 2].map(|c| channels[c][i].clamp(lo[c], hi[c]).round() as u8);
        out.put_pixel(i % w, i / w, px);
    }
    InpaintOutcome { image: out, status }
}

/// Offline backend; deterministic and dependency-free.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinBackend;

impl RepaintBackend for BuiltinBackend {
    fn name(&self) -> &'static str {
        "builtin"
    }

    fn generate(&self, req: &RepaintRequest) -> Result<RgbImage, RepaintError> {
        Ok(builtin_inpaint(&req.canvas, &req.mask).image)
    }
}
