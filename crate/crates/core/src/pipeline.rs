//! The full retargeting pipeline: orientation, planning, content-aware
//! carving, repaint-region determination, canvas placement, repainting.

use thiserror::Error;

use crate::arrd::{self, ArrdError, RepaintMask};
use crate::carve::{self, CarveError, CarveMask};
use crate::plan::{self, Orientation, ParamError, RetargetParams, RetargetPlan};
use crate::raster::RgbImage;
use crate::repaint::{self, RepaintBackend, RepaintError, RepaintRequest};
use crate::saliency::{self, BinarySaliency, SaliencyError, SaliencyMap};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parameters: {0}")]
    Params(#[from] ParamError),
    #[error("saliency: {0}")]
    Saliency(#[from] SaliencyError),
    #[error("carve: {0}")]
    Carve(#[from] CarveError),
    #[error("repaint-region: {0}")]
    Arrd(#[from] ArrdError),
    #[error("repaint: {0}")]
    Repaint(#[from] RepaintError),
}

/// What gets regenerated after carving.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RepaintRegion {
    /// Abrupt survivors plus height padding.
    #[default]
    Abrupt,
    /// Every background survivor plus height padding (ablation baseline).
    Background,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub params: RetargetParams,
    pub region: RepaintRegion,
    /// Extra growth of the repaint region, in pixels.
    pub dilation: usize,
    pub seed: u64,
    pub steps: u32,
    pub prompt: String,
}

impl PipelineOptions {
    pub fn new(params: RetargetParams) -> Self {
        PipelineOptions {
            params,
            region: RepaintRegion::Abrupt,
            dilation: 0,
            seed: 0,
            steps: 30,
            prompt: String::new(),
        }
    }
}

/// Everything up to (not including) repainting, in the caller's orientation.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// Plan in working (columns) orientation, before carving.
    pub plan: RetargetPlan,
    /// Plan after accounting for an early carving halt.
    pub final_plan: RetargetPlan,
    pub canvas: RgbImage,
    pub repaint_mask: RepaintMask,
    pub carve_mask: CarveMask,
    /// The input's binarized saliency carried onto the canvas.
    pub binary_out: BinarySaliency,
    pub w_s_ori: usize,
    pub seams_removed: usize,
    pub salient_seams_removed: usize,
    pub halted_early: bool,
}

#[derive(Clone, Debug)]
pub struct RetargetOutcome {
    pub image: RgbImage,
    pub prepared: Prepared,
}

fn orient<T>(o: Orientation, value: T, transpose: impl Fn(&T) -> T) -> T {
    match o {
        Orientation::Columns => value,
        Orientation::Rows => transpose(&value),
    }
}

/// Carve, plan, and build the canvas and repaint mask.
pub fn prepare(img: &RgbImage, sal: &SaliencyMap, opts: &PipelineOptions) -> Result<Prepared, PipelineError> {
    opts.params.validate()?;
    if img.dims() != sal.dims() {
        return Err(SaliencyError::DimensionMismatch {
            want_w: img.width(),
            want_h: img.height(),
            got_w: sal.width(),
            got_h: sal.height(),
        }
        .into());
    }
    let w_s_ori = saliency::saliency_width(&saliency::binarize(sal));

    let orientation = plan::choose_orientation(img.width(), img.height(), opts.params.ratio_r);
    let params = match orientation {
        Orientation::Columns => opts.params.clone(),
        Orientation::Rows => opts.params.transposed(),
    };
    let work_img = orient(orientation, img.clone(), RgbImage::transpose);
    let work_sal = orient(orientation, sal.clone(), SaliencyMap::transpose);
    let work_binary = saliency::binarize(&work_sal);
    let w_s = saliency::saliency_width(&work_binary);

    let planned = plan::make_plan(work_img.width(), work_img.height(), w_s, &params).with_orientation(orientation);
    let carved = carve::carve_to_width(&work_img, &work_sal, planned.w_f, params.lambda)?;
    let final_plan = planned.with_achieved_width(carved.image.width());

    let field = match opts.region {
        RepaintRegion::Abrupt => {
            let a = arrd::abruptness(&carved.mask, params.window_l);
            arrd::repaint_mask_from_carve(&carved.mask, &a, params.eta)
        }
        RepaintRegion::Background => arrd::background_mask(&work_binary, &carved.mask).into_bits(),
    };
    let mask = arrd::merge_outpaint(&field, &final_plan)?.dilate_repaint(opts.dilation);
    let canvas = arrd::place_on_canvas(&carved.image, &final_plan);
    let binary_out = arrd::place_plane(&carved.binary_out, &final_plan, false);

    Ok(Prepared {
        plan: planned,
        canvas: orient(orientation, canvas, RgbImage::transpose),
        repaint_mask: orient(orientation, mask, RepaintMask::transpose),
        carve_mask: orient(orientation, carved.mask, CarveMask::transpose),
        binary_out: orient(orientation, binary_out, |b| b.transpose()),
        final_plan,
        w_s_ori,
        seams_removed: carved.seams_removed,
        salient_seams_removed: carved.salient_seams_removed,
        halted_early: carved.halted_early,
    })
}

/// Run the whole pipeline with the given repaint backend.
///
/// `img` also serves as the repaint guidance.
pub fn retarget(
    img: &RgbImage,
    sal: &SaliencyMap,
    opts: &PipelineOptions,
    backend: &dyn RepaintBackend,
) -> Result<RetargetOutcome, PipelineError> {
    let prepared = prepare(img, sal, opts)?;
    let req = RepaintRequest {
        canvas: prepared.canvas.clone(),
        mask: prepared.repaint_mask.clone(),
        guidance: img.clone(),
        seed: opts.seed,
        steps: opts.steps,
        prompt: opts.prompt.clone(),
    };
    let image = repaint::repaint(&req, backend)?;
    Ok(RetargetOutcome { image, prepared })
}
