//! Content-aware image retargeting.
//!
//! An image is narrowed (or shortened, via transposition) by removing
//! low-energy seams under a saliency prior, with a cap on how many seams may
//! cut through the salient region. Where the cap stops carving early, the
//! canvas is extended to the requested aspect ratio. Pixels whose
//! neighbourhood lost many columns, plus any added padding, are then
//! repainted by a pluggable backend.
//!
//! Module map:
//!
//! * [`raster`]: planes, RGB images, PNG IO, resampling.
//! * [`saliency`]: saliency maps, binarization, spectral-residual detector.
//! * [`carve`]: energy, DP seams, budgeted carving.
//! * [`plan`]: target width and canvas geometry.
//! * [`arrd`]: abruptness and repaint masks.
//! * [`repaint`]: builtin Laplace inpainting and the HTTP service client.
//! * [`pipeline`]: everything above in order.
//! * [`metrics`]: saliency discard ratio, baselines, benchmark reports.
//! * [`synth`]: a deterministic synthetic corpus.
//! * [`cli`]: the `carvepaint` command.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod arrd;
pub mod carve;
pub mod cli;
pub mod metrics;
pub mod pipeline;
pub mod plan;
pub mod raster;
pub mod repaint;
pub mod saliency;
pub mod synth;
