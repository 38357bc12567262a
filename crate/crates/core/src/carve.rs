//! Content-aware seam carving.
//!
//! Energy is the max-normalized gradient magnitude plus a saliency term
//! weighted by distance from the saliency centroid. Vertical seams are
//! removed one at a time; energy is recomputed on the shrunken image after
//! every removal. A [`CarveMask`] in original coordinates records which
//! pixels survived.
//!
//! Carving is capped by a saliency-loss budget: at most `floor(lambda * W_s)`
//! removed seams may touch a binarized-salient pixel, where `W_s` is the
//! saliency width of the input. When the budget is spent and the next
//! minimum seam is salient, carving stops short of the target.

use thiserror::Error;

use crate::raster::{self, BitPlane, GrayImage, Plane, RgbImage};
use crate::saliency::{self, BinarySaliency, SaliencyMap};

#[derive(Debug, Error, PartialEq)]
pub enum CarveError {
    #[error("energy map is {0}x{1}, saliency is {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("invalid seam: {0}")]
    InvalidSeam(String),
    #[error("target width {target} exceeds image width {width}")]
    TargetTooWide { target: usize, width: usize },
    #[error("lambda must lie in [0, 1), got {0}")]
    BadLambda(f64),
}

pub type EnergyMap = Plane<f64>;

/// One column index per row; consecutive entries differ by at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seam {
    pub cols: Vec<usize>,
}

impl Seam {
    pub fn validate(&self, width: usize, height: usize) -> Result<(), CarveError> {
        if self.cols.len() != height {
            return Err(CarveError::InvalidSeam(format!(
                "{} entries for {height} rows",
                self.cols.len()
            )));
        }
        if let Some(&c) = self.cols.iter().find(|&&c| c >= width) {
            return Err(CarveError::InvalidSeam(format!("column {c} outside width {width}")));
        }
        if let Some(w) = self.cols.windows(2).find(|w| w[0].abs_diff(w[1]) > 1) {
            return Err(CarveError::InvalidSeam(format!("jump {} -> {}", w[0], w[1])));
        }
        Ok(())
    }

    pub fn cost(&self, e: &EnergyMap) -> f64 {
        self.cols.iter().enumerate().map(|(y, &x)| e.get(x, y)).sum()
    }
}

/// Which original pixels survive carving (`true` = preserved).
///
/// Every row holds the same number of survivors.
#[derive(Clone, Debug, PartialEq)]
pub struct CarveMask(BitPlane);

impl CarveMask {
    pub fn all_preserved(width: usize, height: usize) -> Self {
        CarveMask(Plane::filled(width, height, true))
    }

    /// Wrap a survivor field; every row must keep the same number of pixels.
    pub fn from_bits(bits: BitPlane) -> Result<Self, CarveError> {
        let count = |r: &[bool]| r.iter().filter(|&&b| b).count();
        let first = count(bits.row(0));
        if let Some(y) = (0..bits.height()).find(|&y| count(bits.row(y)) != first) {
            return Err(CarveError::InvalidSeam(format!(
                "row {y} keeps {} pixels, row 0 keeps {first}",
                count(bits.row(y))
            )));
        }
        Ok(CarveMask(bits))
    }

    pub fn bits(&self) -> &BitPlane {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn is_preserved(&self, x: usize, y: usize) -> bool {
        *self.0.get(x, y)
    }

    /// Survivors per row (identical across rows).
    pub fn survivors(&self) -> usize {
        self.0.row(0).iter().filter(|&&b| b).count()
    }

    /// Keep the values of `src` (original coordinates) at surviving
    /// positions, packed left row by row.
    pub fn compact<T: Clone>(&self, src: &Plane<T>) -> Plane<T> {
        assert_eq!(src.dims(), self.0.dims(), "compact: dimension mismatch");
        let w = self.survivors();
        let data: Vec<T> = src
            .rows()
            .zip(self.0.rows())
            .flat_map(|(vals, keep)| {
                vals.iter()
                    .zip(keep)
                    .filter(|(_, &k)| k)
                    .map(|(v, _)| v.clone())
                    .collect::<Vec<_>>()
            })
            .collect();
        Plane::from_vec(w.max(1), self.height(), data).expect("equal survivors per row")
    }

    /// Image with removed pixels painted `color`, for inspection.
    pub fn overlay(&self, img: &RgbImage, color: [u8; 3]) -> RgbImage {
        RgbImage::from_fn(img.width(), img.height(), |x, y| {
            if self.is_preserved(x, y) {
                img.pixel(x, y)
            } else {
                color
            }
        })
    }

    pub fn transpose(&self) -> Self {
        CarveMask(self.0.transpose())
    }
}

/// Outcome of [`carve_to_width`].
#[derive(Clone, Debug)]
pub struct CarveResult {
    pub image: RgbImage,
    pub mask: CarveMask,
    pub saliency_out: SaliencyMap,
    /// The input's binarized saliency carried through the same removals.
    pub binary_out: BinarySaliency,
    pub seams_removed: usize,
    pub salient_seams_removed: usize,
    /// Carving stopped above the target because of the saliency budget.
    pub halted_early: bool,
}

/// `|dI/dx| + |dI/dy|`, central differences inside and one-sided at the
/// borders, divided by the map maximum so values lie in `[0, 1]`.
pub fn gradient_energy(g: &GrayImage) -> EnergyMap {
    let (w, h) = g.dims();
    let deriv = |lo: f64, hi: f64, span: usize| if span == 0 { 0.0 } else { (hi - lo) / span as f64 };
    let raw = Plane::from_fn(w, h, |x, y| {
        let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
        let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
        let dx = deriv(*g.get(xl, y), *g.get(xr, y), xr - xl);
        let dy = deriv(*g.get(x, yu), *g.get(x, yd), yd - yu);
        dx.abs() + dy.abs()
    });
    let max = raw.data().iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        raw.map(|&v| v / max)
    } else {
        raw
    }
}

/// Adds the saliency prior: `e + s * (1 - |x - centroid_x| / W)`.
pub fn content_energy(e: &EnergyMap, s: &SaliencyMap, centroid_x: f64) -> Result<EnergyMap, CarveError> {
    if e.dims() != s.dims() {
        return Err(CarveError::DimensionMismatch(e.width(), e.height(), s.width(), s.height()));
    }
    let w = e.width() as f64;
    Ok(Plane::from_fn(e.width(), e.height(), |x, y| {
        e.get(x, y) + s.plane().get(x, y) * (1.0 - (x as f64 - centroid_x).abs() / w)
    }))
}

/// Minimum-cost vertical seam by dynamic programming; ties go to the
/// smaller column both when picking the end of the seam and while
/// backtracking.
pub fn min_seam(e: &EnergyMap) -> Seam {
    let (w, h) = e.dims();
    let mut cum = e.data().to_vec();
    for y in 1..h {
        let (prev, cur) = cum.split_at_mut(y * w);
        let prev = &prev[(y - 1) * w..];
        for x in 0..w {
            let mut best = prev[x];
            if x > 0 && prev[x - 1] <= best {
                best = prev[x - 1];
            }
            if x + 1 < w && prev[x + 1] < best {
                best = prev[x + 1];
            }
            cur[x] += best;
        }
    }

    let last = &cum[(h - 1) * w..];
    let mut col = argmin_leftmost(last, 0);
    let mut cols = vec![0; h];
    cols[h - 1] = col;
    for y in (0..h - 1).rev() {
        let lo = col.saturating_sub(1);
        let hi = (col + 1).min(w - 1);
        col = argmin_leftmost(&cum[y * w + lo..=y * w + hi], lo);
        cols[y] = col;
    }
    Seam { cols }
}

fn argmin_leftmost(values: &[f64], offset: usize) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    best + offset
}

pub fn seam_crosses_saliency(seam: &Seam, b: &BinarySaliency) -> bool {
    seam.cols.iter().enumerate().any(|(y, &x)| *b.get(x, y))
}

/// Working state while carving: the shrinking image and its companions,
/// plus the map back to original columns.
#[derive(Clone, Debug)]
pub struct CarveState {
    image: RgbImage,
    gray: GrayImage,
    saliency: Plane<f64>,
    binary: BinarySaliency,
    original_cols: Plane<usize>,
    mask: BitPlane,
    seams_removed: usize,
    salient_seams_removed: usize,
}

impl CarveState {
    pub fn new(img: &RgbImage, sal: &SaliencyMap) -> Result<Self, CarveError> {
        if img.dims() != sal.dims() {
            return Err(CarveError::DimensionMismatch(img.width(), img.height(), sal.width(), sal.height()));
        }
        let (w, h) = img.dims();
        Ok(CarveState {
            image: img.clone(),
            gray: raster::to_gray(img),
            saliency: sal.plane().clone(),
            binary: saliency::binarize(sal),
            original_cols: Plane::from_fn(w, h, |x, _| x),
            mask: Plane::filled(w, h, true),
            seams_removed: 0,
            salient_seams_removed: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn image(&self) -> &RgbImage {
        &self.image
    }

    pub fn binary(&self) -> &BinarySaliency {
        &self.binary
    }

    pub fn original_cols(&self) -> &Plane<usize> {
        &self.original_cols
    }

    pub fn mask(&self) -> CarveMask {
        CarveMask(self.mask.clone())
    }

    pub fn seams_removed(&self) -> usize {
        self.seams_removed
    }

    pub fn salient_seams_removed(&self) -> usize {
        self.salient_seams_removed
    }

    /// Gradient plus saliency-prior energy of the current image.
    pub fn energy(&self) -> EnergyMap {
        let centroid = saliency::stats(&self.binary).centroid_x;
        let sal = SaliencyMap::from_plane_unchecked(self.saliency.clone());
        content_energy(&gradient_energy(&self.gray), &sal, centroid).expect("state planes share dimensions")
    }

    /// Delete one pixel per row along `seam`.
    pub fn remove_seam(&mut self, seam: &Seam) -> Result<(), CarveError> {
        let (w, h) = self.image.dims();
        seam.validate(w, h)?;
        if w < 2 {
            return Err(CarveError::InvalidSeam("cannot remove the last column".into()));
        }
        if seam_crosses_saliency(seam, &self.binary) {
            self.salient_seams_removed += 1;
        }
        for (y, &x) in seam.cols.iter().enumerate() {
            let orig = *self.original_cols.get(x, y);
            self.mask.set(orig, y, false);
        }
        let nw = w - 1;
        let mut pixels = Vec::with_capacity(3 * nw * h);
        for (y, &skip) in seam.cols.iter().enumerate() {
            for x in (0..w).filter(|&x| x != skip) {
                pixels.extend_from_slice(&self.image.pixel(x, y));
            }
        }
        self.image = RgbImage::new(nw, h, pixels).expect("one pixel removed per row");
        self.gray = drop_seam(&self.gray, seam);
        self.saliency = drop_seam(&self.saliency, seam);
        self.binary = drop_seam(&self.binary, seam);
        self.original_cols = drop_seam(&self.original_cols, seam);
        self.seams_removed += 1;
        Ok(())
    }

    pub fn into_result(self, halted_early: bool) -> CarveResult {
        CarveResult {
            image: self.image,
            mask: CarveMask(self.mask),
            saliency_out: SaliencyMap::from_plane_unchecked(self.saliency),
            binary_out: self.binary,
            seams_removed: self.seams_removed,
            salient_seams_removed: self.salient_seams_removed,
            halted_early,
        }
    }
}

fn drop_seam<T: Clone>(p: &Plane<T>, seam: &Seam) -> Plane<T> {
    let (w, h) = p.dims();
    let mut data = Vec::with_capacity((w - 1) * h);
    for (y, row) in p.rows().enumerate() {
        let skip = seam.cols[y];
        data.extend_from_slice(&row[..skip]);
        data.extend_from_slice(&row[skip + 1..]);
    }
    Plane::from_vec(w - 1, h, data).expect("one value removed per row")
}

/// Column-union width of `b` after hypothetically removing `seam`.
fn width_after_removal(b: &BinarySaliency, seam: &Seam) -> usize {
    let (w, _) = b.dims();
    let mut union = vec![false; w - 1];
    for (y, row) in b.rows().enumerate() {
        let skip = seam.cols[y];
        for (x, &bit) in row.iter().enumerate() {
            if bit && x != skip {
                union[if x > skip { x - 1 } else { x }] = true;
            }
        }
    }
    union.iter().filter(|&&u| u).count()
}

/// Carve `img` down to `target_w` columns.
///
/// Besides the per-seam budget, a seam is also refused when removing it
/// would leave the carried saliency narrower than
/// `W_s - floor(lambda * W_s)`; a seam that misses every salient pixel can
/// still shift salient rows relative to each other and merge their columns.
pub fn carve_to_width(
    img: &RgbImage,
    sal: &SaliencyMap,
    target_w: usize,
    lambda: f64,
) -> Result<CarveResult, CarveError> {
    if target_w > img.width() {
        return Err(CarveError::TargetTooWide {
            target: target_w,
            width: img.width(),
        });
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(CarveError::BadLambda(lambda));
    }
    let target_w = target_w.max(1);
    let mut state = CarveState::new(img, sal)?;
    let w_s = saliency::saliency_width(&state.binary);
    let budget = (lambda * w_s as f64 + 1e-9).floor() as usize;
    let min_width = w_s - budget;

    let mut halted = false;
    while state.width() > target_w {
        let seam = min_seam(&state.energy());
        let crosses = seam_crosses_saliency(&seam, &state.binary);
        if crosses && state.salient_seams_removed >= budget {
            halted = true;
            break;
        }
        if w_s > 0 && width_after_removal(&state.binary, &seam) < min_width {
            halted = true;
            break;
        }
        state.remove_seam(&seam)?;
    }
    log::debug!(
        "carved {} seams ({} salient, budget {budget}), width {} -> {}",
        state.seams_removed,
        state.salient_seams_removed,
        img.width(),
        state.width()
    );
    Ok(state.into_result(halted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn energy(w: usize, h: usize, v: &[f64]) -> EnergyMap {
        Plane::from_vec(w, h, v.to_vec()).unwrap()
    }

    /// Exhaustive minimum over every valid seam.
    fn brute_min_cost(e: &EnergyMap) -> f64 {
        fn walk(e: &EnergyMap, y: usize, x: usize, acc: f64, best: &mut f64) {
            let acc = acc + e.get(x, y);
            if y + 1 == e.height() {
                *best = best.min(acc);
                return;
            }
            for nx in x.saturating_sub(1)..=(x + 1).min(e.width() - 1) {
                walk(e, y + 1, nx, acc, best);
            }
        }
        let mut best = f64::INFINITY;
        for x in 0..e.width() {
            walk(e, 0, x, 0.0, &mut best);
        }
        best
    }

    #[test]
    fn constant_image_has_zero_energy() {
        let e = gradient_energy(&Plane::filled(5, 4, 42.0));
        assert!(e.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_edge_energy() {
        // columns 0,1 dark, 2,3 bright; central differences peak at 1 and 2
        let g = Plane::from_fn(4, 4, |x, _| if x < 2 { 0.0 } else { 255.0 });
        let e = gradient_energy(&g);
        for y in 0..4 {
            assert_eq!(e.row(y), &[0.0, 1.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn content_energy_cases() {
        let e = Plane::filled(10, 1, 0.0);
        let s = SaliencyMap::new(Plane::filled(10, 1, 1.0)).unwrap();
        let out = content_energy(&e, &s, 0.0).unwrap();
        assert!((out.get(5, 0) - 0.5).abs() < 1e-12);
        assert_eq!(*out.get(0, 0), 1.0);

        let e = Plane::from_fn(6, 2, |x, y| (x + y) as f64 * 0.1);
        let out = content_energy(&e, &SaliencyMap::zeros(6, 2), 2.0).unwrap();
        assert_eq!(out, e);

        assert!(content_energy(&e, &SaliencyMap::zeros(5, 2), 0.0).is_err());
    }

    #[test]
    fn uniform_energy_takes_leftmost_column() {
        let seam = min_seam(&Plane::filled(5, 6, 1.0));
        assert_eq!(seam.cols, vec![0; 6]);
    }

    #[test]
    fn diagonal_three_by_three() {
        let e = energy(3, 3, &[1., 2., 3., 4., 1., 6., 7., 8., 1.]);
        let seam = min_seam(&e);
        assert_eq!(seam.cols, vec![0, 1, 2]);
        assert_eq!(seam.cost(&e), 3.0);
        assert_eq!(brute_min_cost(&e), 3.0);
    }

    #[test]
    fn crossing_test() {
        let seam = Seam { cols: vec![1, 2, 2] };
        let mut b = Plane::filled(4, 3, false);
        assert!(!seam_crosses_saliency(&seam, &b));
        b.set(2, 1, true);
        assert!(seam_crosses_saliency(&seam, &b));
        b = Plane::filled(4, 3, false);
        b.set(3, 1, true);
        assert!(!seam_crosses_saliency(&seam, &b));
    }

    #[test]
    fn remove_minimal_case() {
        let img = RgbImage::from_fn(2, 3, |x, y| [x as u8, y as u8, 9]);
        let mut st = CarveState::new(&img, &SaliencyMap::zeros(2, 3)).unwrap();
        st.remove_seam(&Seam { cols: vec![0; 3] }).unwrap();
        assert_eq!(st.image(), &RgbImage::from_fn(1, 3, |_, y| [1, y as u8, 9]));
        let mask = st.mask();
        assert_eq!(mask.survivors(), 1);
        assert!(mask.bits().rows().all(|r| r == [false, true]));
    }

    #[test]
    fn invalid_seams_rejected() {
        let img = RgbImage::filled(3, 3, [0; 3]);
        let mut st = CarveState::new(&img, &SaliencyMap::zeros(3, 3)).unwrap();
        assert!(st.remove_seam(&Seam { cols: vec![0, 2, 2] }).is_err());
        assert!(st.remove_seam(&Seam { cols: vec![0, 0] }).is_err());
        assert!(st.remove_seam(&Seam { cols: vec![3, 2, 2] }).is_err());
    }

    #[test]
    fn random_removals_match_index_simulation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let img = RgbImage::from_fn(8, 8, |x, y| [x as u8, y as u8, 0]);
        let mut st = CarveState::new(&img, &SaliencyMap::zeros(8, 8)).unwrap();
        // mirror: per row, list of surviving original columns
        let mut mirror: Vec<Vec<usize>> = (0..8).map(|_| (0..8).collect()).collect();
        for _ in 0..5 {
            let w = st.width();
            let mut cols = vec![rng.random_range(0..w)];
            for _ in 1..8 {
                let prev = *cols.last().unwrap() as i64;
                let next = (prev + rng.random_range(-1..=1)).clamp(0, w as i64 - 1);
                cols.push(next as usize);
            }
            for (y, &c) in cols.iter().enumerate() {
                mirror[y].remove(c);
            }
            st.remove_seam(&Seam { cols }).unwrap();
        }
        for y in 0..8 {
            let got: Vec<usize> = (0..st.width()).map(|x| st.image().pixel(x, y)[0] as usize).collect();
            assert_eq!(got, mirror[y]);
            let kept: Vec<usize> = (0..8).filter(|&x| st.mask().is_preserved(x, y)).collect();
            assert_eq!(kept, mirror[y]);
        }
    }

    #[test]
    fn identity_target_is_noop() {
        let img = RgbImage::from_fn(6, 4, |x, y| [(x * 40) as u8, (y * 60) as u8, 7]);
        let r = carve_to_width(&img, &SaliencyMap::zeros(6, 4), 6, 0.3).unwrap();
        assert_eq!(r.seams_removed, 0);
        assert_eq!(r.image, img);
        assert!(!r.halted_early);
    }

    #[test]
    fn bad_arguments() {
        let img = RgbImage::filled(4, 4, [1; 3]);
        let s = SaliencyMap::zeros(4, 4);
        assert!(matches!(carve_to_width(&img, &s, 5, 0.3), Err(CarveError::TargetTooWide { .. })));
        assert!(matches!(carve_to_width(&img, &s, 2, 1.0), Err(CarveError::BadLambda(_))));
    }

    #[test]
    fn centered_block_respects_budget() {
        // 16x8, flat, salient block over columns 4..12; lambda 0.25 allows 2
        // salient seams out of W_s = 8
        let img = RgbImage::filled(16, 8, [90, 90, 90]);
        let sal = SaliencyMap::new(Plane::from_fn(16, 8, |x, _| if (4..12).contains(&x) { 1.0 } else { 0.0 }))
            .unwrap();
        let r = carve_to_width(&img, &sal, 8, 0.25).unwrap();
        assert!(r.salient_seams_removed <= 2);
        assert_eq!(r.image.width() + r.seams_removed, 16);
        if r.image.width() > 8 {
            assert!(r.halted_early);
        }
        // Background is 8 columns wide, so all 8 seams fit outside the block.
        assert_eq!(r.salient_seams_removed, 0);
        assert_eq!(r.image.width(), 8);
        assert_eq!(saliency::saliency_width(&r.binary_out), 8);
    }

    #[test]
    fn wide_block_halts_on_budget() {
        let img = RgbImage::filled(16, 8, [90, 90, 90]);
        let sal = SaliencyMap::new(Plane::from_fn(16, 8, |x, _| if (2..14).contains(&x) { 1.0 } else { 0.0 }))
            .unwrap();
        // W_s = 12, budget floor(0.25 * 12) = 3; 4 background columns
        let r = carve_to_width(&img, &sal, 4, 0.25).unwrap();
        assert!(r.halted_early);
        assert_eq!(r.salient_seams_removed, 3);
        assert_eq!(r.image.width(), 16 - 4 - 3);
    }

    proptest! {
        #[test]
        fn dp_matches_exhaustive_search(w in 2usize..=6, h in 1usize..=6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let e = Plane::from_fn(w, h, |_, _| rng.random_range(0..10) as f64);
            let seam = min_seam(&e);
            prop_assert!(seam.validate(w, h).is_ok());
            prop_assert_eq!(seam.cost(&e), brute_min_cost(&e));
        }

        #[test]
        fn mask_rows_track_width(seed in any::<u64>(), k in 0usize..6) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let img = RgbImage::from_fn(9, 5, |_, _| [rng.random(), rng.random(), rng.random()]);
            let r = carve_to_width(&img, &SaliencyMap::zeros(9, 5), 9 - k, 0.3).unwrap();
            prop_assert_eq!(r.image.width() + r.seams_removed, 9);
            for row in r.mask.bits().rows() {
                prop_assert_eq!(row.iter().filter(|&&b| b).count(), r.image.width());
            }
        }
    }
}
