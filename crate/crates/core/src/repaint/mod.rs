//! Repainting the mask-0 region of the final canvas.
//!
//! Backends generate content; [`repaint`] then composites so that every
//! preserved pixel is copied from the canvas unchanged, whatever the
//! backend returned.

mod builtin;
pub mod mock;
mod remote;
pub mod wire;

use std::time::Duration;

use thiserror::Error;

use crate::arrd::RepaintMask;
use crate::raster::RgbImage;

pub use builtin::{builtin_inpaint, BuiltinBackend, InpaintOutcome, InpaintStatus};
pub use remote::{remote_repaint, RemoteBackend};

#[derive(Debug, Error)]
pub enum RepaintError {
    #[error("canvas is {canvas_w}x{canvas_h} but mask is {mask_w}x{mask_h}")]
    MaskDimensions {
        canvas_w: usize,
        canvas_h: usize,
        mask_w: usize,
        mask_h: usize,
    },
    #[error("repaint service at {endpoint} unreachable after {attempts} attempt(s): {message}")]
    Unreachable {
        endpoint: String,
        attempts: u32,
        message: String,
    },
    #[error("repaint service at {endpoint} timed out after {attempts} attempt(s)")]
    Timeout { endpoint: String, attempts: u32 },
    #[error("repaint service at {endpoint} answered HTTP {status}: {message}")]
    Http {
        endpoint: String,
        status: u16,
        message: String,
    },
    #[error("malformed response from repaint service: {0}")]
    Protocol(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug)]
pub struct RepaintRequest {
    pub canvas: RgbImage,
    pub mask: RepaintMask,
    /// The unretargeted source image.
    pub guidance: RgbImage,
    pub seed: u64,
    pub steps: u32,
    pub prompt: String,
}

impl RepaintRequest {
    pub fn new(canvas: RgbImage, mask: RepaintMask, guidance: RgbImage) -> Self {
        RepaintRequest {
            canvas,
            mask,
            guidance,
            seed: 0,
            steps: 30,
            prompt: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), RepaintError> {
        let (cw, ch) = self.canvas.dims();
        let (mw, mh) = self.mask.dims();
        if (cw, ch) != (mw, mh) {
            return Err(RepaintError::MaskDimensions {
                canvas_w: cw,
                canvas_h: ch,
                mask_w: mw,
                mask_h: mh,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Builtin,
    Remote,
}

#[derive(Clone, Debug)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub timeout: Duration,
    pub retries: u32,
    /// Requests allowed in flight at once against the service.
    pub concurrency: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Builtin,
            endpoint: None,
            timeout: Duration::from_secs(120),
            retries: 2,
            concurrency: 4,
        }
    }
}

impl BackendConfig {
    pub fn remote(endpoint: impl Into<String>) -> Self {
        BackendConfig {
            kind: BackendKind::Remote,
            endpoint: Some(endpoint.into()),
            ..Default::default()
        }
    }

    pub fn build(&self) -> Result<Box<dyn RepaintBackend>, RepaintError> {
        match self.kind {
            BackendKind::Builtin => Ok(Box::new(BuiltinBackend)),
            BackendKind::Remote => Ok(Box::new(RemoteBackend::new(self)?)),
        }
    }
}

/// Something that can fill the repaint region of a canvas.
///
/// Implementations only need to produce plausible content for mask-0
/// pixels; compositing is done by [`repaint`].
pub trait RepaintBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn generate(&self, req: &RepaintRequest) -> Result<RgbImage, RepaintError>;
}

/// Preserved pixels from `canvas`, everything else from `generated`.
pub fn composite(canvas: &RgbImage, mask: &RepaintMask, generated: &RgbImage) -> RgbImage {
    assert_eq!(canvas.dims(), generated.dims(), "composite: dimension mismatch");
    RgbImage::from_fn(canvas.width(), canvas.height(), |x, y| {
        if mask.preserve(x, y) {
            canvas.pixel(x, y)
        } else {
            generated.pixel(x, y)
        }
    })
}

pub fn repaint(req: &RepaintRequest, backend: &dyn RepaintBackend) -> Result<RgbImage, RepaintError> {
    req.validate()?;
    if req.mask.is_all_preserve() {
        return Ok(req.canvas.clone());
    }
    let generated = backend.generate(req)?;
    if generated.dims() != req.canvas.dims() {
        return Err(RepaintError::Protocol(format!(
            "backend {} returned {}x{}, expected {}x{}",
            backend.name(),
            generated.width(),
            generated.height(),
            req.canvas.width(),
            req.canvas.height()
        )));
    }
    Ok(composite(&req.canvas, &req.mask, &generated))
}

/// [`repaint`] with a backend built from `cfg`.
pub fn repaint_with(req: &RepaintRequest, cfg: &BackendConfig) -> Result<RgbImage, RepaintError> {
    repaint(req, cfg.build()?.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Plane;

    #[test]
    fn all_preserve_is_identity() {
        let canvas = RgbImage::from_fn(5, 4, |x, y| [x as u8, y as u8, 7]);
        let req = RepaintRequest::new(canvas.clone(), RepaintMask::all_preserve(5, 4), canvas.clone());
        assert_eq!(repaint(&req, &BuiltinBackend).unwrap(), canvas);
    }

    #[test]
    fn mask_mismatch_rejected() {
        let canvas = RgbImage::filled(5, 4, [0; 3]);
        let req = RepaintRequest::new(canvas.clone(), RepaintMask::all_preserve(4, 4), canvas);
        assert!(matches!(repaint(&req, &BuiltinBackend), Err(RepaintError::MaskDimensions { .. })));
    }

    #[test]
    fn remote_without_endpoint_is_config_error() {
        let cfg = BackendConfig {
            kind: BackendKind::Remote,
            ..Default::default()
        };
        assert!(matches!(cfg.build(), Err(RepaintError::Config(_))));
    }

    #[test]
    fn single_hole_takes_surrounding_colour() {
        let c = [12, 200, 99];
        let mut canvas = RgbImage::filled(3, 3, c);
        canvas.put_pixel(1, 1, [0, 0, 0]);
        let mut bits = Plane::filled(3, 3, true);
        bits.set(1, 1, false);
        let req = RepaintRequest::new(canvas.clone(), RepaintMask::new(bits), canvas);
        assert_eq!(repaint(&req, &BuiltinBackend).unwrap().pixel(1, 1), c);
    }
}
