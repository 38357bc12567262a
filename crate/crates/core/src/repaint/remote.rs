use std::sync::{Condvar, Mutex};

use reqwest::blocking::Client;
use reqwest::StatusCode;

use crate::raster::RgbImage;

use super::wire::{self, WireError, WireRequest, WireResponse};
use super::{composite, BackendConfig, RepaintBackend, RepaintError, RepaintRequest};

/// Counting semaphore capping in-flight requests.
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Permits {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

/// Client of the HTTP repaint service.
pub struct RemoteBackend {
    client: Client,
    endpoint: String,
    retries: u32,
    permits: Permits,
}

impl RemoteBackend {
    pub fn new(cfg: &BackendConfig) -> Result<Self, RepaintError> {
        let endpoint = cfg
            .endpoint
            .as_deref()
            .filter(|e| !e.is_empty())
            .ok_or_else(|| RepaintError::Config("remote backend requires a service URL".into()))?
            .trim_end_matches('/')
            .to_string();
        let client = Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| RepaintError::Config(e.to_string()))?;
        Ok(RemoteBackend {
            client,
            endpoint,
            retries: cfg.retries,
            permits: Permits::new(cfg.concurrency),
        })
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn health(&self) -> Result<bool, RepaintError> {
        let resp = self
            .client
            .get(format!("{}/healthz", self.endpoint))
            .send()
            .map_err(|e| self.transport_error(e, 1))?;
        Ok(resp.status() == StatusCode::OK)
    }

    fn transport_error(&self, e: reqwest::Error, attempts: u32) -> RepaintError {
        if e.is_timeout() {
            RepaintError::Timeout {
                endpoint: self.endpoint.clone(),
                attempts,
            }
        } else {
            RepaintError::Unreachable {
                endpoint: self.endpoint.clone(),
                attempts,
                message: e.to_string(),
            }
        }
    }

    fn post_once(&self, body: &WireRequest, attempt: u32) -> Result<RgbImage, (RepaintError, bool)> {
        let resp = self
            .client
            .post(format!("{}/repaint", self.endpoint))
            .json(body)
            .send()
            .map_err(|e| (self.transport_error(e, attempt), true))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| (self.transport_error(e, attempt), true))?;
        if status.is_success() {
            let parsed: WireResponse = serde_json::from_str(&text)
                .map_err(|e| (RepaintError::Protocol(format!("response body: {e}")), false))?;
            return wire::decode_image(&parsed.image_png_b64).map_err(|e| (e, false));
        }
        let message = serde_json::from_str::<WireError>(&text)
            .map(|e| e.error)
            .unwrap_or(text);
        let err = RepaintError::Http {
            endpoint: self.endpoint.clone(),
            status: status.as_u16(),
            message,
        };
        // client errors will not change on retry
        Err((err, status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS))
    }
}

impl RepaintBackend for RemoteBackend {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn generate(&self, req: &RepaintRequest) -> Result<RgbImage, RepaintError> {
        let body = WireRequest::from_request(req)?;
        let _permit = self.permits.acquire();
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.post_once(&body, attempt) {
                Ok(img) => {
                    if img.dims() != req.canvas.dims() {
                        return Err(RepaintError::Protocol(format!(
                            "service returned {}x{}, request was {}x{}",
                            img.width(),
                            img.height(),
                            req.canvas.width(),
                            req.canvas.height()
                        )));
                    }
                    return Ok(img);
                }
                Err((err, retryable)) => {
                    if !retryable || attempt > self.retries {
                        log::warn!("repaint request failed: {err}");
                        return Err(err);
                    }
                    log::info!("repaint attempt {attempt} failed ({err}); retrying");
                }
            }
        }
    }
}

/// One-shot remote repaint: POST, validate, composite.
pub fn remote_repaint(req: &RepaintRequest, cfg: &BackendConfig) -> Result<RgbImage, RepaintError> {
    req.validate()?;
    let backend = RemoteBackend::new(cfg)?;
    if req.mask.is_all_preserve() {
        return Ok(req.canvas.clone());
    }
    let generated = backend.generate(req)?;
    Ok(composite(&req.canvas, &req.mask, &generated))
}
