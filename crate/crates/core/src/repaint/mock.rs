//! In-process stand-in for the repaint service.
//!
//! Speaks the same wire protocol over a loopback socket so the remote
//! backend can be exercised without a model. Responses are scripted by
//! [`MockBehavior`].

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use rand::{Rng, SeedableRng};

use crate::raster::RgbImage;

use super::wire::{self, WireError, WireRequest, WireResponse};

#[derive(Clone, Debug)]
pub enum MockBehavior {
    /// Return the request canvas unchanged.
    Echo,
    /// Return uniform noise of the right size, seeded by the request seed.
    Noise,
    /// Return an image one pixel wider than requested.
    WrongDimensions,
    /// Answer every repaint with this status and an `{"error"}` body.
    Status(u16),
    /// Answer 200 with a body that is not the response schema.
    Malformed,
    /// Sleep before echoing.
    Delay(Duration),
    /// Fail with 500 for the first `n` requests, then echo.
    FailFirst(usize),
}

pub struct MockService {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    requests: Arc<AtomicUsize>,
    handle: Option<JoinHandle<()>>,
}

impl MockService {
    pub fn spawn(behavior: MockBehavior) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(AtomicUsize::new(0));
        let handle = {
            let stop = Arc::clone(&stop);
            let requests = Arc::clone(&requests);
            thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let behavior = behavior.clone();
                    let requests = Arc::clone(&requests);
                    thread::spawn(move || {
                        if let Err(e) = serve(stream, &behavior, &requests) {
                            log::debug!("mock service connection error: {e}");
                        }
                    });
                }
            })
        };
        Ok(MockService {
            addr,
            stop,
            requests,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Repaint requests received so far.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockService {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(stream: TcpStream, behavior: &MockBehavior, requests: &AtomicUsize) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.trim().eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    let mut parts = request_line.split_whitespace();
    let (method, path) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
    let (status, payload, content_type) = match (method, path) {
        ("GET", "/healthz") => (200, "ok".to_string(), "text/plain"),
        ("POST", "/repaint") => {
            let n = requests.fetch_add(1, Ordering::SeqCst);
            let (status, payload) = repaint_response(&body, behavior, n);
            (status, payload, "application/json")
        }
        _ => (404, error_json("not found"), "application/json"),
    };
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} {}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        reason(status),
        payload.len()
    )?;
    stream.write_all(payload.as_bytes())?;
    stream.flush()
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        422 => "Unprocessable Entity",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Status",
    }
}

fn error_json(msg: &str) -> String {
    serde_json::to_string(&WireError { error: msg.to_string() }).unwrap()
}

fn image_json(img: &RgbImage) -> String {
    let b64 = wire::encode_image(img).expect("encoding an in-memory image");
    serde_json::to_string(&WireResponse { image_png_b64: b64 }).unwrap()
}

fn repaint_response(body: &[u8], behavior: &MockBehavior, n: usize) -> (u16, String) {
    let Ok(wire_req) = serde_json::from_slice::<WireRequest>(body) else {
        return (400, error_json("malformed JSON"));
    };
    let req = match wire_req.into_request() {
        Ok(r) => r,
        Err(e) => return (400, error_json(&e.to_string())),
    };
    if req.canvas.dims() != req.mask.dims() {
        return (422, error_json("mask dimensions differ from image"));
    }
    match behavior {
        MockBehavior::Echo => (200, image_json(&req.canvas)),
        MockBehavior::Noise => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(req.seed);
            let (w, h) = req.canvas.dims();
            (200, image_json(&RgbImage::from_fn(w, h, |_, _| rng.random())))
        }
        MockBehavior::WrongDimensions => {
            let (w, h) = req.canvas.dims();
            (200, image_json(&RgbImage::filled(w + 1, h, [0; 3])))
        }
        MockBehavior::Status(code) => (*code, error_json("scripted failure")),
        MockBehavior::Malformed => (200, "{\"unexpected\": true}".to_string()),
        MockBehavior::Delay(d) => {
            thread::sleep(*d);
            (200, image_json(&req.canvas))
        }
        MockBehavior::FailFirst(k) => {
            if n < *k {
                (500, error_json("warming up"))
            } else {
                (200, image_json(&req.canvas))
            }
        }
    }
}
