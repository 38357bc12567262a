//! Aspect-ratio planning.
//!
//! Planning always works in "columns" orientation: the dimension that must
//! shrink is the width. Callers needing to shorten an image transpose it
//! first (see [`choose_orientation`]) and transpose the result back.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("ratio must be positive and finite, got {0}")]
    Ratio(f64),
    #[error("lambda must lie in [0, 1), got {0}")]
    Lambda(f64),
    #[error("window length must be odd and at least 3, got {0}")]
    Window(usize),
    #[error("eta must satisfy 0 < eta <= window ({window}), got {eta}")]
    Eta { eta: usize, window: usize },
}

/// Tunables of the retargeting pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetargetParams {
    /// Target width / height.
    pub ratio_r: f64,
    /// Tolerable saliency loss ratio.
    pub lambda: f64,
    /// Sliding-window length for abruptness detection.
    pub window_l: usize,
    /// Survivor-count threshold below which a pixel is repainted.
    pub eta: usize,
}

impl RetargetParams {
    pub const DEFAULT_LAMBDA: f64 = 0.3;
    pub const DEFAULT_WINDOW: usize = 25;
    pub const DEFAULT_ETA: usize = 15;

    pub fn new(ratio_r: f64) -> Self {
        RetargetParams {
            ratio_r,
            lambda: Self::DEFAULT_LAMBDA,
            window_l: Self::DEFAULT_WINDOW,
            eta: Self::DEFAULT_ETA,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.ratio_r.is_finite() && self.ratio_r > 0.0) {
            return Err(ParamError::Ratio(self.ratio_r));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(ParamError::Lambda(self.lambda));
        }
        if self.window_l < 3 || self.window_l.is_multiple_of(2) {
            return Err(ParamError::Window(self.window_l));
        }
        if self.eta == 0 || self.eta > self.window_l {
            return Err(ParamError::Eta {
                eta: self.eta,
                window: self.window_l,
            });
        }
        Ok(())
    }

    /// Same parameters for the transposed problem.
    pub fn transposed(&self) -> Self {
        RetargetParams {
            ratio_r: 1.0 / self.ratio_r,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Remove vertical seams directly.
    Columns,
    /// Transpose, remove vertical seams, transpose back.
    Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetargetPlan {
    pub orientation: Orientation,
    /// Width matching the ratio at the original height.
    pub w_t: usize,
    /// Width the carving aims for.
    pub w_f: usize,
    /// Final canvas height.
    pub h_f: usize,
    pub pad_top: usize,
    pub pad_bottom: usize,
    /// Height of the (normalized) source image.
    pub source_height: usize,
    pub ratio_r: f64,
}

pub fn choose_orientation(width: usize, height: usize, r: f64) -> Orientation {
    if r < width as f64 / height as f64 {
        Orientation::Columns
    } else {
        Orientation::Rows
    }
}

/// Plan for a `width x height` image (already in columns orientation) whose
/// binarized saliency is `w_s` columns wide.
pub fn make_plan(width: usize, height: usize, w_s: usize, p: &RetargetParams) -> RetargetPlan {
    let r = p.ratio_r;
    let w_t = ((height as f64 * r).round() as usize).clamp(1, width);
    let kept = w_s as f64 * (1.0 - p.lambda);
    let w_f = if kept > w_t as f64 {
        // guard against 0.7 * 200 = 140.00000000000003
        ((kept - 1e-9).ceil() as usize).min(width)
    } else {
        w_t
    };
    finish(Orientation::Columns, w_t, w_f, height, r)
}

fn finish(orientation: Orientation, w_t: usize, w_f: usize, height: usize, r: f64) -> RetargetPlan {
    let h_f = ((w_f as f64 / r).round() as usize).max(height);
    let pad_total = h_f - height;
    let pad_top = pad_total / 2;
    RetargetPlan {
        orientation,
        w_t,
        w_f,
        h_f,
        pad_top,
        pad_bottom: pad_total - pad_top,
        source_height: height,
        ratio_r: r,
    }
}

impl RetargetPlan {
    /// Re-derive the canvas for the width carving actually reached.
    pub fn with_achieved_width(&self, achieved: usize) -> RetargetPlan {
        if achieved == self.w_f {
            return self.clone();
        }
        finish(self.orientation, self.w_t, achieved, self.source_height, self.ratio_r)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Canvas `(width, height)` in planning orientation.
    pub fn canvas_dims(&self) -> (usize, usize) {
        (self.w_f, self.h_f)
    }

    /// Canvas `(width, height)` in the caller's original orientation.
    pub fn output_dims(&self) -> (usize, usize) {
        match self.orientation {
            Orientation::Columns => (self.w_f, self.h_f),
            Orientation::Rows => (self.h_f, self.w_f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(r: f64, lambda: f64) -> RetargetParams {
        RetargetParams {
            lambda,
            ..RetargetParams::new(r)
        }
    }

    #[test]
    fn orientation_rules() {
        assert_eq!(choose_orientation(160, 90, 1.0), Orientation::Columns);
        assert_eq!(choose_orientation(90, 160, 16.0 / 9.0), Orientation::Rows);
        assert_eq!(choose_orientation(160, 90, 160.0 / 90.0), Orientation::Rows);
    }

    #[test]
    fn saliency_branch_with_padding() {
        let p = make_plan(300, 100, 200, &params(1.0, 0.3));
        assert_eq!((p.w_t, p.w_f, p.h_f, p.pad_top, p.pad_bottom), (100, 140, 140, 20, 20));
    }

    #[test]
    fn target_branch_without_padding() {
        let p = make_plan(300, 100, 100, &params(1.0, 0.3));
        assert_eq!((p.w_t, p.w_f, p.h_f, p.pad_top, p.pad_bottom), (100, 100, 100, 0, 0));
    }

    #[test]
    fn empty_saliency() {
        let p = make_plan(300, 90, 0, &params(16.0 / 9.0, 0.3));
        assert_eq!((p.w_t, p.w_f, p.h_f, p.pad_top, p.pad_bottom), (160, 160, 90, 0, 0));
    }

    #[test]
    fn odd_padding_goes_to_bottom() {
        // kept = 141 * 0.7 = 98.7 -> 99; h_f = 99 / 0.75 = 132
        let p = make_plan(200, 100, 141, &params(0.75, 0.3));
        assert_eq!((p.w_t, p.w_f, p.h_f), (75, 99, 132));
        assert_eq!((p.pad_top, p.pad_bottom), (16, 16));
        let p = make_plan(200, 100, 143, &params(0.75, 0.3));
        // kept = 100.1 -> 101; h_f = round(134.67) = 135
        assert_eq!((p.w_f, p.h_f, p.pad_top, p.pad_bottom), (101, 135, 17, 18));
    }

    #[test]
    fn width_clamped_to_source() {
        let p = make_plan(120, 100, 120, &params(0.5, 0.0));
        assert_eq!(p.w_f, 120);
        assert_eq!(p.h_f, 240);
    }

    #[test]
    fn rederive_after_early_halt() {
        let p = make_plan(300, 100, 100, &params(1.0, 0.3));
        let q = p.with_achieved_width(130);
        assert_eq!((q.w_f, q.h_f, q.pad_top, q.pad_bottom), (130, 130, 15, 15));
    }

    #[test]
    fn validation() {
        assert!(RetargetParams::new(1.0).validate().is_ok());
        assert_eq!(RetargetParams::new(0.0).validate(), Err(ParamError::Ratio(0.0)));
        assert!(params(1.0, 1.0).validate().is_err());
        let mut p = RetargetParams::new(1.0);
        p.window_l = 24;
        assert!(p.validate().is_err());
        p.window_l = 25;
        p.eta = 26;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn plan_invariants(
            h in 10usize..400,
            extra in 1usize..400,
            ws_frac in 0.0f64..=1.0,
            lambda in 0.0f64..0.95,
            r in 0.3f64..2.0,
        ) {
            let w = ((h as f64 * r).ceil() as usize + extra).max(2);
            let w_s = (ws_frac * w as f64) as usize;
            let p = make_plan(w, h, w_s, &params(r, lambda));
            prop_assert!(p.w_f >= p.w_t);
            prop_assert!(p.w_f <= w);
            prop_assert_eq!(p.pad_top + p.pad_bottom + h, p.h_f);
            prop_assert!(p.pad_bottom >= p.pad_top && p.pad_bottom - p.pad_top <= 1);
            let ratio_err = (p.w_f as f64 / p.h_f as f64 - r).abs();
            prop_assert!(ratio_err <= 1.0 / p.h_f as f64 + 1e-12, "ratio error {}", ratio_err);
        }
    }
}
