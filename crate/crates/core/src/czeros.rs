//! Zeros of entire functions in rectangles: argument-principle counts,
//! recursive bisection and Newton polish.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entire::{log_derivative, EntireFunction, Scaled};
use crate::potential::Potential;
use crate::scattering::XhatFn;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroError {
    #[error("rectangle with corners {lo} and {hi} has empty interior")]
    EmptyRect { lo: Complex64, hi: Complex64 },
    #[error("zero on or too close to the contour near {near}")]
    BoundaryZero { near: Complex64 },
    #[error("phase step above π/2 after maximal refinement near {near}")]
    PhaseStepTooLarge { near: Complex64 },
    #[error("{count} zeros in the search region exceed the limit {max}")]
    MaxZerosExceeded { count: i64, max: usize },
    #[error("sub-rectangle counts {found} do not add up to the parent count {expected}")]
    CountMismatch { expected: i64, found: i64 },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("bound state at {z} is off the imaginary axis")]
    OffImaginaryAxis { z: Complex64 },
}

/// Axis-aligned rectangle `[lo.re, hi.re] × [lo.im, hi.im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Complex64,
    pub hi: Complex64,
}

impl Rect {
    pub fn new(lo: Complex64, hi: Complex64) -> Result<Self, ZeroError> {
        if !(lo.re < hi.re && lo.im < hi.im) {
            return Err(ZeroError::EmptyRect { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// `[re0, re1] × [im0, im1]`.
    pub fn from_ranges(re: (f64, f64), im: (f64, f64)) -> Result<Self, ZeroError> {
        Self::new(Complex64::new(re.0, im.0), Complex64::new(re.1, im.1))
    }

    pub fn center(&self) -> Complex64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn width(&self) -> f64 {
        self.hi.re - self.lo.re
    }

    pub fn height(&self) -> f64 {
        self.hi.im - self.lo.im
    }

    pub fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.lo.re && z.re <= self.hi.re && z.im >= self.lo.im && z.im <= self.hi.im
    }

    /// Scale about the center by `factor`.
    pub fn dilate(&self, factor: f64) -> Self {
        let c = self.center();
        Self { lo: c + (self.lo - c) * factor, hi: c + (self.hi - c) * factor }
    }

    /// Split across the longer side at a slightly off-center fraction, so
    /// seams avoid symmetry lines such as `Re z = 0`.
    fn split(&self) -> (Rect, Rect) {
        const FRACTION: f64 = 0.4813;
        if self.width() >= self.height() {
            let x = self.lo.re + FRACTION * self.width();
            (
                Rect { lo: self.lo, hi: Complex64::new(x, self.hi.im) },
                Rect { lo: Complex64::new(x, self.lo.im), hi: self.hi },
            )
        } else {
            let y = self.lo.im + FRACTION * self.height();
            (
                Rect { lo: self.lo, hi: Complex64::new(self.hi.re, y) },
                Rect { lo: Complex64::new(self.lo.re, y), hi: self.hi },
            )
        }
    }

    /// Counter-clockwise closed polyline with about `n` vertices.
    fn contour(&self, n: usize) -> Vec<Complex64> {
        let corners =
            [self.lo, Complex64::new(self.hi.re, self.lo.im), self.hi, Complex64::new(self.lo.re, self.hi.im)];
        let perimeter = 2.0 * (self.width() + self.height());
        let mut pts = Vec::with_capacity(n + 4);
        for i in 0..4 {
            let (p, q) = (corners[i], corners[(i + 1) % 4]);
            let m = (((q - p).norm() / perimeter * n as f64).ceil() as usize).max(2);
            pts.extend((0..m).map(|j| p + (q - p) * (j as f64 / m as f64)));
        }
        pts
    }
}

/// A located zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero {
    pub location: Complex64,
    pub multiplicity: u32,
    /// `|f(z)| / max |f|` over a circle of radius `1e-2·max(1, |z|)`.
    pub residual: f64,
    /// `false` if Newton did not converge and the location is the center of
    /// the final bisection box.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub zeros: Vec<Zero>,
    pub function_tag: String,
    /// Zeros (with multiplicity) in the open upper and lower half-planes;
    /// zeros within `1e-10·max(1,|z|)` of the real axis are in neither.
    pub halfplane_counts: (u32, u32),
    /// Winding number of the searched region, which the multiplicities
    /// reconcile with before any radius filter.
    pub enclosing_winding: i64,
    pub radius: Option<f64>,
}

impl ZeroSet {
    fn from_zeros(mut zeros: Vec<Zero>, tag: &str, winding: i64, radius: Option<f64>) -> Self {
        zeros.sort_by(|a, b| a.location.re.total_cmp(&b.location.re).then(a.location.im.total_cmp(&b.location.im)));
        // zeros within polishing accuracy of the real axis count as real
        let side = |z: &Zero| {
            let t = 1e-10 * scale_of(z.location);
            if z.location.im > t {
                1
            } else if z.location.im < -t {
                -1
            } else {
                0
            }
        };
        let upper = zeros.iter().filter(|z| side(z) == 1).map(|z| z.multiplicity).sum();
        let lower = zeros.iter().filter(|z| side(z) == -1).map(|z| z.multiplicity).sum();
        Self {
            zeros,
            function_tag: tag.to_string(),
            halfplane_counts: (upper, lower),
            enclosing_winding: winding,
            radius,
        }
    }

    pub fn with_tag(mut self, tag: &str) -> Self {
        self.function_tag = tag.to_string();
        self
    }

    pub fn total_multiplicity(&self) -> i64 {
        self.zeros.iter().map(|z| z.multiplicity as i64).sum()
    }

    pub fn locations(&self) -> Vec<Complex64> {
        self.zeros.iter().map(|z| z.location).collect()
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Largest distance from a zero `z` to the nearest zero at `-z̄`, over
    /// zeros not within `margin` of the radius cut (where partners may have
    /// been filtered away).
    pub fn reflection_asymmetry(&self, margin: f64) -> f64 {
        let locs = self.locations();
        let cut = self.radius.unwrap_or(f64::INFINITY) - margin;
        locs.iter()
            .filter(|z| z.norm() <= cut)
            .map(|z| {
                let m = -z.conj();
                locs.iter().map(|w| (w - m).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// `{"zeros":[{"re","im","mult"}],"radius","function"}`.
    pub fn to_file(&self) -> ZeroSetFile {
        ZeroSetFile {
            zeros: self
                .zeros
                .iter()
                .map(|z| ZeroEntry { re: z.location.re, im: z.location.im, mult: z.multiplicity })
                .collect(),
            radius: self.radius,
            function: self.function_tag.clone(),
        }
    }

    /// Header `re,im,mult,residual`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,mult,residual\n");
        for z in &self.zeros {
            s.push_str(&format!("{},{},{},{}\n", z.location.re, z.location.im, z.multiplicity, z.residual));
        }
        s
    }
}

/// One entry of the on-disk zero list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroEntry {
    pub re: f64,
    pub im: f64,
    pub mult: u32,
}

/// On-disk JSON layout of a zero set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetFile {
    pub zeros: Vec<ZeroEntry>,
    pub radius: Option<f64>,
    pub function: String,
}

const MAX_REFINE_DEPTH: u32 = 40;
const BOUNDARY_RATIO_LN: f64 = -20.723_265_836_946_41; // ln 1e-9

fn phase_step(from: Scaled, to: Scaled) -> f64 {
    (to.mantissa / from.mantissa).arg()
}

fn check_boundary(near: Complex64, v: Scaled, neighbours: [Scaled; 2]) -> Result<(), ZeroError> {
    if v.is_zero() {
        return Err(ZeroError::BoundaryZero { near });
    }
    let scale = neighbours[0].ln_abs().max(neighbours[1].ln_abs());
    if v.ln_abs() < scale + BOUNDARY_RATIO_LN {
        return Err(ZeroError::BoundaryZero { near });
    }
    Ok(())
}

/// Phase change along the segment `z0 → z1`, refined until both half-steps
/// are below π/4.
fn segment_phase<F: EntireFunction + ?Sized>(
    f: &F,
    z0: Complex64,
    f0: Scaled,
    z1: Complex64,
    f1: Scaled,
) -> Result<f64, ZeroError> {
    let mut total = 0.0;
    let mut stack = vec![(z0, f0, z1, f1, 0u32)];
    while let Some((a, fa, b, fb, depth)) = stack.pop() {
        let m = (a + b) / 2.0;
        let fm = f.eval_scaled(m);
        check_boundary(m, fm, [fa, fb])?;
        let (d1, d2) = (phase_step(fa, fm), phase_step(fm, fb));
        if d1.abs() <= FRAC_PI_4 && d2.abs() <= FRAC_PI_4 {
            total += d1 + d2;
            continue;
        }
        if depth >= MAX_REFINE_DEPTH {
            // an unresolved phase jump at this scale is a zero on the contour
            return Err(if d1.abs().max(d2.abs()) > FRAC_PI_2 {
                ZeroError::BoundaryZero { near: m }
            } else {
                ZeroError::PhaseStepTooLarge { near: m }
            });
        }
        // the right half is pushed first so the left half is processed first
        stack.push((m, fm, b, fb, depth + 1));
        stack.push((a, fa, m, fm, depth + 1));
    }
    Ok(total)
}

fn polyline_winding<F: EntireFunction + ?Sized>(f: &F, pts: &[Complex64]) -> Result<i64, ZeroError> {
    let vals: Vec<Scaled> = pts.iter().map(|&z| f.eval_scaled(z)).collect();
    let n = pts.len();
    for i in 0..n {
        check_boundary(pts[i], vals[i], [vals[(i + n - 1) % n], vals[(i + 1) % n]])?;
    }
    let mut total = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        total += segment_phase(f, pts[i], vals[i], pts[j], vals[j])?;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Number of zeros of `f` inside `rect`, counted with multiplicity, from the
/// phase increments of `f` along the boundary sampled at about `n_boundary`
/// points and refined adaptively.
pub fn winding_number<F: EntireFunction + ?Sized>(f: &F, rect: Rect, n_boundary: usize) -> Result<i64, ZeroError> {
    polyline_winding(f, &rect.contour(n_boundary.max(8)))
}

/// [`winding_number`], dilating the rectangle by `1 + 1e-6` up to three times
/// when a zero sits on the contour. Returns the rectangle actually used.
pub fn winding_number_retry<F: EntireFunction + ?Sized>(
    f: &F,
    rect: Rect,
    n_boundary: usize,
) -> Result<(Rect, i64), ZeroError> {
    let mut r = rect;
    let mut last = None;
    for _ in 0..4 {
        match winding_number(f, r, n_boundary) {
            Ok(n) => return Ok((r, n)),
            Err(e @ ZeroError::BoundaryZero { .. }) => {
                last = Some(e);
                r = r.dilate(1.0 + 1e-6);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap())
}

fn scale_of(z: Complex64) -> f64 {
    z.norm().max(1.0)
}

/// Newton with multiplicity `m` and a central-difference derivative.
fn newton<F: EntireFunction + ?Sized>(f: &F, z0: Complex64, m: u32) -> (Complex64, bool) {
    let mut z = z0;
    for _ in 0..80 {
        let d = log_derivative(f, z, 1e-6 * scale_of(z));
        if !d.is_finite() {
            // f(z) vanished exactly
            return (z, true);
        }
        if d == Complex64::new(0.0, 0.0) {
            return (z, false);
        }
        let step = m as f64 / d;
        z -= step;
        if !z.is_finite() {
            return (z0, false);
        }
        if step.norm() < 1e-14 * scale_of(z) {
            return (z, true);
        }
    }
    (z, false)
}

/// `|f(z)| / max |f|` over 16 points on a circle of radius `1e-2·max(1,|z|)`.
pub fn polish_residual<F: EntireFunction + ?Sized>(f: &F, z: Complex64) -> f64 {
    let rho = 1e-2 * scale_of(z);
    let ln_max = (0..16)
        .map(|j| f.ln_abs(z + Complex64::from_polar(rho, j as f64 * PI / 8.0)))
        .fold(f64::NEG_INFINITY, f64::max);
    (f.ln_abs(z) - ln_max).exp()
}

/// Winding number on a circle of radius `1e-4·max(1,|z|)`.
fn local_multiplicity<F: EntireFunction + ?Sized>(f: &F, z: Complex64) -> Option<u32> {
    let rho = 1e-4 * scale_of(z);
    let pts: Vec<Complex64> = (0..16).map(|j| z + Complex64::from_polar(rho, j as f64 * PI / 8.0)).collect();
    polyline_winding(f, &pts).ok().map(|n| n.max(0) as u32)
}

fn make_zero<F: EntireFunction + ?Sized>(f: &F, z: Complex64, mult_hint: u32, converged: bool) -> Zero {
    let multiplicity = local_multiplicity(f, z).filter(|&m| m > 0).unwrap_or(mult_hint);
    Zero { location: z, multiplicity, residual: polish_residual(f, z), converged }
}

fn search<F: EntireFunction + ?Sized>(
    f: &F,
    rect: Rect,
    count: i64,
    n_boundary: usize,
    depth: u32,
) -> Result<Vec<Zero>, ZeroError> {
    if count <= 0 {
        return Ok(Vec::new());
    }
    let scale = scale_of(rect.center());
    let tiny = rect.diameter() < 1e-12 * scale || depth > 200;
    if tiny {
        return Ok(vec![make_zero(f, rect.center(), count as u32, false)]);
    }
    let small_cluster = rect.diameter() < 1e-5 * scale;
    if count == 1 || small_cluster {
        let m = if small_cluster { count as u32 } else { 1 };
        let (z, ok) = newton(f, rect.center(), m);
        let margin = 1e-9 * scale;
        let inside =
            Rect { lo: rect.lo - Complex64::new(margin, margin), hi: rect.hi + Complex64::new(margin, margin) };
        if ok && inside.contains(z) {
            let zero = make_zero(f, z, m, true);
            if zero.multiplicity as i64 == count || !small_cluster {
                return Ok(vec![Zero { multiplicity: zero.multiplicity.min(count as u32), ..zero }]);
            }
        }
    }
    let (r1, r2) = rect.split();
    let (w1, w2) = rayon::join(|| winding_number_retry(f, r1, n_boundary), || winding_number_retry(f, r2, n_boundary));
    let ((r1, n1), (r2, n2)) = (w1?, w2?);
    if n1 + n2 != count {
        return Err(ZeroError::CountMismatch { expected: count, found: n1 + n2 });
    }
    let (z1, z2) =
        rayon::join(|| search(f, r1, n1, n_boundary, depth + 1), || search(f, r2, n2, n_boundary, depth + 1));
    let mut out = z1?;
    out.extend(z2?);
    Ok(out)
}

/// Merge zeros closer than `1e-7·max(1,|z|)`, keeping the better polished one.
fn dedup(mut zeros: Vec<Zero>) -> Vec<Zero> {
    zeros.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut kept: Vec<Zero> = Vec::new();
    for z in zeros {
        if !kept.iter().any(|k| (k.location - z.location).norm() < 1e-7 * scale_of(z.location)) {
            kept.push(z);
        }
    }
    kept
}

const SEARCH_BOUNDARY_POINTS: usize = 128;

/// All zeros of `f` in `rect`, with multiplicities, by recursive bisection
/// on winding counts followed by Newton polish.
pub fn find_zeros<F: EntireFunction + ?Sized>(f: &F, rect: Rect, max_zeros: usize) -> Result<ZeroSet, ZeroError> {
    let (rect, n) = winding_number_retry(f, rect, SEARCH_BOUNDARY_POINTS)?;
    if n > max_zeros as i64 {
        return Err(ZeroError::MaxZerosExceeded { count: n, max: max_zeros });
    }
    let zeros = dedup(search(f, rect, n, SEARCH_BOUNDARY_POINTS, 0)?);
    let found: i64 = zeros.iter().map(|z| z.multiplicity as i64).sum();
    if found != n {
        return Err(ZeroError::CountMismatch { expected: n, found });
    }
    Ok(ZeroSet::from_zeros(zeros, "user", n, None))
}

/// Zeros in `rect` by searching `tiles` vertical strips concurrently. The
/// strip seams are offset from symmetric positions; the merged set is
/// reconciled against the winding number of `rect` itself.
pub fn find_zeros_tiled<F: EntireFunction + ?Sized>(
    f: &F,
    rect: Rect,
    tiles: usize,
    max_zeros: usize,
) -> Result<ZeroSet, ZeroError> {
    let (rect, n_total) = winding_number_retry(f, rect, 4 * SEARCH_BOUNDARY_POINTS)?;
    if n_total > max_zeros as i64 {
        return Err(ZeroError::MaxZerosExceeded { count: n_total, max: max_zeros });
    }
    let tiles = tiles.max(1);
    let w = rect.width() / tiles as f64;
    let seam = |i: usize| {
        if i == 0 {
            rect.lo.re
        } else if i == tiles {
            rect.hi.re
        } else {
            rect.lo.re + (i as f64 + 0.0371) * w
        }
    };
    let parts: Vec<Result<ZeroSet, ZeroError>> = (0..tiles)
        .into_par_iter()
        .map(|i| {
            let tile = Rect::from_ranges((seam(i), seam(i + 1)), (rect.lo.im, rect.hi.im))?;
            find_zeros(f, tile, max_zeros)
        })
        .collect();
    let mut zeros = Vec::new();
    for p in parts {
        zeros.extend(p?.zeros);
    }
    let zeros: Vec<Zero> = dedup(zeros).into_iter().filter(|z| rect.contains(z.location)).collect();
    let found: i64 = zeros.iter().map(|z| z.multiplicity as i64).sum();
    if found != n_total {
        return Err(ZeroError::CountMismatch { expected: n_total, found });
    }
    Ok(ZeroSet::from_zeros(zeros, "user", n_total, None))
}

/// Distance of the horizontal search edges from the real axis.
const AXIS_GAP: f64 = 1e-6;

/// Zeros of `X̂` with `|k| <= radius` and `Im k < 0`.
pub fn resonances(v: &Potential, radius: f64) -> Result<ZeroSet, ZeroError> {
    if !(radius > 0.0) {
        return Err(ZeroError::NonPositiveRadius(radius));
    }
    let rect = Rect::from_ranges((-radius, radius), (-radius, -AXIS_GAP * radius.max(1.0)))?;
    let tiles = ((radius * v.width().max(0.1)) / 4.0).ceil().clamp(1.0, 64.0) as usize;
    let set = find_zeros_tiled(&XhatFn(v), rect, tiles, 100_000)?;
    let zeros = set.zeros.iter().copied().filter(|z| z.location.norm() <= radius).collect();
    Ok(ZeroSet::from_zeros(zeros, "xhat", set.enclosing_winding, Some(radius)))
}

/// Bound states: zeros of `X̂` in the open upper half-plane, all of which
/// lie on the imaginary axis for real potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStates {
    pub zeros: ZeroSet,
    /// `-κ²` for each zero `iκ`, ascending.
    pub energies: Vec<f64>,
}

pub fn bound_states(v: &Potential) -> Result<BoundStates, ZeroError> {
    let k_max = (-v.min_value()).max(0.0).sqrt() + 1.0;
    let rect = Rect::from_ranges((-k_max, k_max), (AXIS_GAP, k_max))?;
    let mut zs = find_zeros(&XhatFn(v), rect, 10_000)?.with_tag("xhat");
    zs.radius = Some(k_max);
    for z in &zs.zeros {
        if z.location.re.abs() > 1e-6 * scale_of(z.location) {
            return Err(ZeroError::OffImaginaryAxis { z: z.location });
        }
    }
    let mut energies: Vec<f64> = zs.zeros.iter().map(|z| -z.location.im * z.location.im).collect();
    energies.sort_by(f64::total_cmp);
    Ok(BoundStates { zeros: zs, energies })
}
