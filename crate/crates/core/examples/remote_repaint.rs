//! Talking to a repaint service over HTTP.
//!
//! With no argument an in-process mock service is started; pass a base URL
//! to use a real one.
//!
//! Run: cargo run --example remote_repaint -- [SERVICE_URL]

use carvepaint::arrd::RepaintMask;
use carvepaint::raster::{Plane, RgbImage};
use carvepaint::repaint::mock::{MockBehavior, MockService};
use carvepaint::repaint::{remote_repaint, BackendConfig, RemoteBackend, RepaintRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mock;
    let url = match std::env::args().nth(1) {
        Some(url) => url,
        None => {
            mock = MockService::spawn(MockBehavior::Noise)?;
            mock.url()
        }
    };
    let cfg = BackendConfig::remote(&url);
    let backend = RemoteBackend::new(&cfg)?;
    println!("service at {url}, healthy: {}", backend.health()?);

    let canvas = RgbImage::from_fn(64, 48, |x, y| [(x * 4) as u8, (y * 5) as u8, 90]);
    let mask = RepaintMask::new(Plane::from_fn(64, 48, |x, _| !(20..30).contains(&x)));
    let mut req = RepaintRequest::new(canvas.clone(), mask, canvas.clone());
    req.seed = 7;
    let out = remote_repaint(&req, &cfg)?;

    let changed = (0..48)
        .flat_map(|y| (0..64).map(move |x| (x, y)))
        .filter(|&(x, y)| out.pixel(x, y) != canvas.pixel(x, y))
        .count();
    let preserved_exact = (0..48).all(|y| (0..64).filter(|x| !(20..30).contains(x)).all(|x| out.pixel(x, y) == canvas.pixel(x, y)));
    println!("{changed} pixels replaced; preserved region bit-exact: {preserved_exact}");
    Ok(())
}
