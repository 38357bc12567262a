//! Repaint-region determination.
//!
//! Pixels that lost many row neighbours to carving are "abrupt": a window
//! of `l` pixels centred on each original position counts how many of them
//! survived, and survivors whose count falls below `eta` are marked for
//! repainting. The field is then compacted onto the carved grid and merged
//! with the padding rows added to reach the target ratio.

use thiserror::Error;

use crate::carve::CarveMask;
use crate::plan::RetargetPlan;
use crate::raster::{BitPlane, Plane, RgbImage};
use crate::saliency::BinarySaliency;

#[derive(Debug, Error, PartialEq)]
pub enum ArrdError {
    #[error("carved field is {field_w}x{field_h}, plan expects {plan_w}x{plan_h}")]
    Dimensions {
        field_w: usize,
        field_h: usize,
        plan_w: usize,
        plan_h: usize,
    },
}

/// Survivor counts within the row window around each original pixel,
/// rescaled to a full window at the borders.
pub type AbruptnessMap = Plane<f64>;

/// Final-canvas mask; `true` = preserve, `false` = repaint.
#[derive(Clone, Debug, PartialEq)]
pub struct RepaintMask(BitPlane);

impl RepaintMask {
    pub fn new(bits: BitPlane) -> Self {
        RepaintMask(bits)
    }

    pub fn all_preserve(width: usize, height: usize) -> Self {
        RepaintMask(Plane::filled(width, height, true))
    }

    pub fn bits(&self) -> &BitPlane {
        &self.0
    }

    pub fn into_bits(self) -> BitPlane {
        self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn preserve(&self, x: usize, y: usize) -> bool {
        *self.0.get(x, y)
    }

    pub fn repaint_count(&self) -> usize {
        self.0.count_zeros()
    }

    pub fn is_all_preserve(&self) -> bool {
        self.repaint_count() == 0
    }

    pub fn transpose(&self) -> Self {
        RepaintMask(self.0.transpose())
    }

    /// Grow the repaint region by `radius` pixels (square neighbourhood).
    pub fn dilate_repaint(&self, radius: usize) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = self.dims();
        RepaintMask(Plane::from_fn(w, h, |x, y| {
            let ys = y.saturating_sub(radius)..=(y + radius).min(h - 1);
            !ys.into_iter().any(|yy| {
                (x.saturating_sub(radius)..=(x + radius).min(w - 1)).any(|xx| !self.preserve(xx, yy))
            })
        }))
    }
}

pub fn abruptness(mask: &CarveMask, window_l: usize) -> AbruptnessMap {
    let bits = mask.bits();
    let (w, h) = bits.dims();
    let half = window_l / 2;
    let mut out = Vec::with_capacity(w * h);
    for row in bits.rows() {
        // prefix[i] = survivors in row[..i]
        let mut prefix = Vec::with_capacity(w + 1);
        prefix.push(0usize);
        for &b in row {
            prefix.push(prefix.last().unwrap() + b as usize);
        }
        for x in 0..w {
            let lo = x.saturating_sub(half);
            let hi = (x + half).min(w - 1);
            let size = hi - lo + 1;
            let count = prefix[hi + 1] - prefix[lo];
            out.push(count as f64 * window_l as f64 / size as f64);
        }
    }
    Plane::from_vec(w, h, out).expect("one count per pixel")
}

/// Binary field on the carved grid: `false` where a surviving pixel is
/// abrupt (`count < eta`).
pub fn repaint_mask_from_carve(mask: &CarveMask, a: &AbruptnessMap, eta: usize) -> BitPlane {
    let keep = a.map(|&count| count >= eta as f64);
    mask.compact(&keep)
}

/// Place the carved field on the final canvas; padding rows are repainted.
pub fn merge_outpaint(carved_field: &BitPlane, plan: &RetargetPlan) -> Result<RepaintMask, ArrdError> {
    let (fw, fh) = carved_field.dims();
    if fw != plan.w_f || fh + plan.pad_top + plan.pad_bottom != plan.h_f || fh != plan.source_height {
        return Err(ArrdError::Dimensions {
            field_w: fw,
            field_h: fh,
            plan_w: plan.w_f,
            plan_h: plan.h_f,
        });
    }
    Ok(RepaintMask(Plane::from_fn(plan.w_f, plan.h_f, |x, y| {
        y >= plan.pad_top && y < plan.pad_top + fh && *carved_field.get(x, y - plan.pad_top)
    })))
}

/// Centre `img` vertically on the plan's canvas; padding rows replicate the
/// nearest image row.
pub fn place_on_canvas(img: &RgbImage, plan: &RetargetPlan) -> RgbImage {
    assert_eq!(img.width(), plan.w_f, "image width must match plan");
    let h = img.height();
    RgbImage::from_fn(plan.w_f, plan.h_f, |x, y| {
        let src = y.saturating_sub(plan.pad_top).min(h - 1);
        img.pixel(x, src)
    })
}

/// Same placement for any per-pixel field (padding filled with `fill`).
pub fn place_plane<T: Clone>(field: &Plane<T>, plan: &RetargetPlan, fill: T) -> Plane<T> {
    let h = field.height();
    Plane::from_fn(field.width(), plan.h_f, |x, y| {
        if y >= plan.pad_top && y < plan.pad_top + h {
            field.get(x, y - plan.pad_top).clone()
        } else {
            fill.clone()
        }
    })
}

/// Background-repaint ablation: surviving salient pixels are preserved,
/// every surviving background pixel is repainted.
pub fn background_mask(b: &BinarySaliency, mask: &CarveMask) -> RepaintMask {
    RepaintMask(mask.compact(b))
}
