//! JSON wire format of the repaint service.
//!
//! ```text
//! POST {endpoint}/repaint   application/json
//!   { "image_png_b64", "mask_png_b64", "guidance_png_b64", "seed", "steps", "prompt" }
//! 200  { "image_png_b64" }
//! 400 / 422  { "error" }
//! GET {endpoint}/healthz -> 200 "ok"
//! ```
//!
//! The mask is a 1-bit grayscale PNG, white = preserve.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::arrd::RepaintMask;
use crate::raster::{self, RgbImage};

use super::{RepaintError, RepaintRequest};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub image_png_b64: String,
    pub mask_png_b64: String,
    pub guidance_png_b64: String,
    pub seed: u64,
    pub steps: u32,
    pub prompt: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    pub image_png_b64: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    pub error: String,
}

fn protocol<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> RepaintError + '_ {
    move |e| RepaintError::Protocol(format!("{what}: {e}"))
}

pub fn encode_image(img: &RgbImage) -> Result<String, RepaintError> {
    Ok(STANDARD.encode(img.encode_png().map_err(protocol("encode image"))?))
}

pub fn decode_image(b64: &str) -> Result<RgbImage, RepaintError> {
    let bytes = STANDARD.decode(b64).map_err(protocol("base64"))?;
    RgbImage::decode(&bytes).map_err(protocol("image"))
}

pub fn encode_mask(mask: &RepaintMask) -> Result<String, RepaintError> {
    Ok(STANDARD.encode(raster::encode_bitmask_png(mask.bits()).map_err(protocol("encode mask"))?))
}

pub fn decode_mask(b64: &str) -> Result<RepaintMask, RepaintError> {
    let bytes = STANDARD.decode(b64).map_err(protocol("base64"))?;
    Ok(RepaintMask::new(raster::decode_bitmask_png(&bytes).map_err(protocol("mask"))?))
}

impl WireRequest {
    pub fn from_request(req: &RepaintRequest) -> Result<Self, RepaintError> {
        Ok(WireRequest {
            image_png_b64: encode_image(&req.canvas)?,
            mask_png_b64: encode_mask(&req.mask)?,
            guidance_png_b64: encode_image(&req.guidance)?,
            seed: req.seed,
            steps: req.steps,
            prompt: req.prompt.clone(),
        })
    }

    pub fn into_request(self) -> Result<RepaintRequest, RepaintError> {
        Ok(RepaintRequest {
            canvas: decode_image(&self.image_png_b64)?,
            mask: decode_mask(&self.mask_png_b64)?,
            guidance: decode_image(&self.guidance_png_b64)?,
            seed: self.seed,
            steps: self.steps,
            prompt: self.prompt,
        })
    }
}
