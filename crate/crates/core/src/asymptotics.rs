//! Growth of entire functions of exponential type: indicators, zero
//! densities, Cartwright integrability, Blaschke products and the
//! Nevanlinna–Levin representation in the upper half-plane.
//!
//! All limits are replaced by fits at finite radius, each reported with its
//! residual.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::czeros::{find_zeros_tiled, winding_number_retry, Rect, ZeroError, ZeroSet};
use crate::entire::{EntireFunction, Scaled};
use crate::potential::Potential;
use crate::quad::integrate;
use crate::scattering::XhatFn;
use crate::wavekernel::{
    kernel_fourier_scaled, solve_kernels_on, KernelError, KernelField, KernelPiece, KernelWindow, WindowKind,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("non-finite log-modulus at radius {r}")]
    OverflowAtRadius { r: f64 },
    #[error("growth of ln|f| on the real line is not logarithmic (fitted slope {slope:.3e} per unit)")]
    NonConvergentTail { slope: f64 },
    #[error("zero {a} is not in the open upper half-plane")]
    ZeroInLowerHalfPlane { a: Complex64 },
    #[error("evaluation at the pole {a}")]
    EvaluationAtZero { a: Complex64 },
    #[error("{counted} zeros in the relevance region but {supplied} supplied")]
    IncompleteZeroSet { counted: i64, supplied: usize },
    #[error("evaluation point must lie in the open upper half-plane, got {z}")]
    NotInUpperHalfPlane { z: Complex64 },
    #[error("potentials differ on [0, b]")]
    SharedPartMismatch,
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Least-squares solution of `A x ≈ b` for a small dense system.
pub(crate) fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let n = rows[0].len();
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-13).map(|x| x.iter().copied().collect()).unwrap_or_else(|_| vec![f64::NAN; n])
}

/// Directional growth `h(θ) = lim ln|f(re^{iθ})| / r`, estimated at finite radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorReport {
    pub theta: f64,
    pub h: f64,
    pub r_list: Vec<f64>,
    /// `ln|f(re^{iθ})| / r` at each radius.
    pub samples: Vec<f64>,
    /// Largest misfit of the model over the top decade of radii.
    pub fit_residual: f64,
    /// `fit_residual < 0.05·(1 + |h|)`.
    pub pass: bool,
}

/// Fit `ln|f(re^{iθ})|/r = h + (α + β ln r)/r` over `r = r_max/2^j`,
/// `j = 0..6`. The `1/r` and `ln r / r` terms absorb polynomial prefactors,
/// so `h` converges much faster than the raw ratio.
pub fn indicator_estimate<F: EntireFunction + ?Sized>(
    f: &F,
    theta: f64,
    r_max: f64,
) -> Result<IndicatorReport, AsymptoticsError> {
    let dir = Complex64::from_polar(1.0, theta);
    let r_list: Vec<f64> = (0..7).map(|j| r_max / 2f64.powi(j)).collect();
    let mut samples = Vec::with_capacity(r_list.len());
    for &r in &r_list {
        let g = f.ln_abs(dir * r) / r;
        if !g.is_finite() {
            return Err(AsymptoticsError::OverflowAtRadius { r });
        }
        samples.push(g);
    }
    let rows: Vec<Vec<f64>> = r_list.iter().map(|&r| vec![1.0, 1.0 / r, r.ln() / r]).collect();
    let c = lstsq(&rows, &samples);
    let model = |r: f64| c[0] + c[1] / r + c[2] * r.ln() / r;
    let fit_residual = r_list
        .iter()
        .zip(&samples)
        .filter(|(r, _)| **r >= r_max / 10.0)
        .map(|(&r, &g)| (g - model(r)).abs())
        .fold(0.0, f64::max);
    let h = c[0];
    Ok(IndicatorReport { theta, h, r_list, samples, fit_residual, pass: fit_residual < 0.05 * (1.0 + h.abs()) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthReport {
    pub up: IndicatorReport,
    pub down: IndicatorReport,
    /// `h(π/2) + h(-π/2)`.
    pub width: f64,
}

/// Width of the indicator diagram, `h(π/2) + h(-π/2)`.
pub fn indicator_width<F: EntireFunction + ?Sized>(f: &F, r_max: f64) -> Result<WidthReport, AsymptoticsError> {
    let up = indicator_estimate(f, FRAC_PI_2, r_max)?;
    let down = indicator_estimate(f, -FRAC_PI_2, r_max)?;
    let width = up.h + down.h;
    Ok(WidthReport { up, down, width })
}

/// Zero counts in a sector and their fitted linear growth rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub sector: (f64, f64),
    /// `(r, n(r))` at twenty evenly spaced radii.
    pub counts: Vec<(f64, u32)>,
    /// Fitted slope `Δ = dn/dr`.
    pub delta: f64,
    /// Indicator width, when supplied by the caller.
    pub width_d: Option<f64>,
    /// RMS misfit of the slope fit relative to the mean count.
    pub relative_residual: f64,
    pub n_in_sector: u32,
    /// Fewer than 30 zeros in the sector; the slope is unreliable.
    pub low_count: bool,
}

impl DensityReport {
    pub fn with_width(mut self, d: f64) -> Self {
        self.width_d = Some(d);
        self
    }

    /// Header `r,n`.
    pub fn counts_csv(&self) -> String {
        let mut s = String::from("r,n\n");
        for (r, n) in &self.counts {
            s.push_str(&format!("{r},{n}\n"));
        }
        s
    }
}

/// Whether `arg z` lies in the open sector `(alpha, beta)` (mod 2π).
pub fn in_sector(z: Complex64, (alpha, beta): (f64, f64)) -> bool {
    let t = (z.arg() - alpha).rem_euclid(2.0 * PI);
    t > 0.0 && t < beta - alpha
}

/// Growth rate of `n(r)`, the number of zeros of `zs` in `sector` with
/// `|z| <= r`. The slope is fitted to the points `(|z_j|, j - ½)` of the
/// sorted moduli in the top half of the radius range, which are exact samples
/// of the counting function's midsteps.
pub fn zero_density(zs: &ZeroSet, sector: (f64, f64)) -> DensityReport {
    let mut moduli: Vec<f64> = Vec::new();
    for z in zs.zeros.iter().filter(|z| in_sector(z.location, sector)) {
        moduli.extend(std::iter::repeat_n(z.location.norm(), z.multiplicity as usize));
    }
    moduli.sort_by(f64::total_cmp);
    let radius = zs.radius.unwrap_or_else(|| moduli.last().copied().unwrap_or(0.0));
    let counts = (1..=20)
        .map(|i| {
            let r = radius * i as f64 / 20.0;
            (r, moduli.iter().filter(|&&m| m <= r).count() as u32)
        })
        .collect();
    let pts: Vec<(f64, f64)> =
        moduli.iter().enumerate().filter(|(_, &m)| m >= radius / 2.0).map(|(j, &m)| (m, j as f64 + 0.5)).collect();
    let (delta, relative_residual) = if pts.len() >= 2 {
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, p.0]).collect();
        let rhs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let c = lstsq(&rows, &rhs);
        let rms = (pts.iter().map(|p| (p.1 - c[0] - c[1] * p.0).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
        let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
        (c[1].max(0.0), rms / mean)
    } else {
        (0.0, 0.0)
    };
    let n_in_sector = moduli.len() as u32;
    DensityReport { sector, counts, delta, width_d: None, relative_residual, n_in_sector, low_count: n_in_sector < 30 }
}

/// `ln⁺ x = max(0, ln x)`.
fn ln_plus(v: f64) -> f64 {
    v.max(0.0)
}

/// Logarithmic growth model `ln|f(x)| ≈ p ln|x| + q` on one side of the real
/// line, fitted on `|x| ∈ [c/4, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub p: f64,
    pub q: f64,
}

fn growth_fit(g: &impl Fn(f64) -> f64, sign: f64, cutoff: f64) -> Result<GrowthFit, AsymptoticsError> {
    let xs: Vec<f64> = (0..64).map(|i| cutoff * (0.25 + 0.75 * i as f64 / 63.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| g(sign * x)).collect();
    let fit = |rows: Vec<Vec<f64>>| {
        let c = lstsq(&rows, &ys);
        let rms = rows.iter().zip(&ys).map(|(r, y)| (y - c[0] * r[0] - c[1] * r[1]).powi(2)).sum::<f64>().sqrt();
        (c, rms)
    };
    let (log_c, log_rms) = fit(xs.iter().map(|x| vec![x.ln(), 1.0]).collect());
    let (lin_c, lin_rms) = fit(xs.iter().map(|&x| vec![x, 1.0]).collect());
    if lin_rms < log_rms && lin_c[0] * cutoff > 1.0 {
        return Err(AsymptoticsError::NonConvergentTail { slope: lin_c[0] });
    }
    Ok(GrowthFit { p: log_c[0], q: log_c[1] })
}

impl GrowthFit {
    pub fn at(&self, x: f64) -> f64 {
        self.p * x.abs().ln() + self.q
    }
}

/// `∫_c^∞ h(x) dx` via `x = c/t`.
fn tail_integral(cutoff: f64, h: impl Fn(f64) -> f64) -> f64 {
    integrate(|t: f64| if t <= 0.0 { 0.0 } else { h(cutoff / t) * cutoff / (t * t) }, 0.0, 1.0, 1e-13, 1e-12, 400).value
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartwrightReport {
    pub cutoff: f64,
    /// `∫_{-c}^{c} ln⁺|f(x)|/(1+x²) dx`.
    pub core: f64,
    /// Both tails from the fitted logarithmic growth.
    pub tail: f64,
    pub value: f64,
    pub fit_left: GrowthFit,
    pub fit_right: GrowthFit,
    pub quadrature_error: f64,
    pub converged: bool,
}

/// `∫_ℝ ln⁺|f(x)| / (1 + x²) dx`: adaptive quadrature on `[-c, c]` plus tails
/// from a fit `ln⁺|f| ≈ p ln|x| + q` on each side.
pub fn cartwright_integral<F: EntireFunction + ?Sized>(
    f: &F,
    cutoff: f64,
) -> Result<CartwrightReport, AsymptoticsError> {
    let g = |x: f64| ln_plus(f.ln_abs(Complex64::new(x, 0.0)));
    let q = integrate(|x| g(x) / (1.0 + x * x), -cutoff, cutoff, 1e-11, 1e-11, 20_000);
    let fit_left = growth_fit(&g, -1.0, cutoff)?;
    let fit_right = growth_fit(&g, 1.0, cutoff)?;
    let tail =
        [fit_left, fit_right].iter().map(|fit| tail_integral(cutoff, |x| ln_plus(fit.at(x)) / (1.0 + x * x))).sum();
    Ok(CartwrightReport {
        cutoff,
        core: q.value,
        tail,
        value: q.value + tail,
        fit_left,
        fit_right,
        quadrature_error: q.error,
        converged: q.converged,
    })
}

fn check_upper(zeros: &[Complex64]) -> Result<(), AsymptoticsError> {
    match zeros.iter().find(|a| !(a.im > 0.0)) {
        Some(&a) => Err(AsymptoticsError::ZeroInLowerHalfPlane { a }),
        None => Ok(()),
    }
}

/// `Π (1 - z/a_k)^{s} (1 - z/ā_k)^{-s}` in scaled form, `s = ±1`, factors
/// taken in order of increasing `|a_k|`.
fn blaschke_scaled(zeros: &[Complex64], z: Complex64, invert: bool) -> Result<Scaled, AsymptoticsError> {
    check_upper(zeros)?;
    let mut order: Vec<Complex64> = zeros.to_vec();
    order.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut acc = Scaled::from_value(Complex64::new(1.0, 0.0));
    for a in order {
        let (num, den) = if invert { (1.0 - z / a, 1.0 - z / a.conj()) } else { (1.0 - z / a.conj(), 1.0 - z / a) };
        if den == Complex64::new(0.0, 0.0) {
            return Err(AsymptoticsError::EvaluationAtZero { a: if invert { a.conj() } else { a } });
        }
        acc = acc.mul(Scaled::from_value(num / den));
    }
    Ok(acc)
}

/// `B(z) = Π (1 - z/ā_k)/(1 - z/a_k)` over zeros `a_k` in the open upper
/// half-plane. `|B| = 1` on the real line.
pub fn blaschke(upper_zeros: &[Complex64], z: Complex64) -> Result<Complex64, AsymptoticsError> {
    Ok(blaschke_scaled(upper_zeros, z, false)?.value())
}

/// `χ(z) = 1/B(z) = Π (1 - z/a_k)/(1 - z/ā_k)`, vanishing at each `a_k`.
pub fn blaschke_inverse(upper_zeros: &[Complex64], z: Complex64) -> Result<Complex64, AsymptoticsError> {
    Ok(blaschke_scaled(upper_zeros, z, true)?.value())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NevanlinnaReport {
    pub z: Complex64,
    pub ln_abs_f: f64,
    /// `(y/π) ∫ ln|f(t)| / ((t-x)² + y²) dt`, tails included.
    pub poisson: f64,
    pub tail: f64,
    pub sigma_term: f64,
    /// `ln|χ(z)|`.
    pub blaschke_term: f64,
    pub residual: f64,
    pub converged: bool,
}

/// `|ln|f(z)| - P[ln|f|](z) - σ⁺ Im z - ln|χ(z)||` for `z` in the upper
/// half-plane, with `χ` built from `upper_zeros`. The supplied zeros are
/// checked against a winding count on `[-ρ, ρ] × [ε, ρ]`,
/// `ρ = 4·max(|z|, max|a_k|, 2)`.
pub fn nevanlinna_residual<F: EntireFunction + ?Sized>(
    f: &F,
    upper_zeros: &[Complex64],
    sigma_plus: f64,
    z: Complex64,
    line_cutoff: f64,
) -> Result<NevanlinnaReport, AsymptoticsError> {
    if !(z.im > 0.0) {
        return Err(AsymptoticsError::NotInUpperHalfPlane { z });
    }
    check_upper(upper_zeros)?;
    let rho = 4.0 * upper_zeros.iter().map(|a| a.norm()).fold(z.norm().max(2.0), f64::max);
    let rect = Rect::from_ranges((-rho, rho), (1e-6 * rho, rho))?;
    let (rect, counted) = winding_number_retry(f, rect, 512)?;
    let supplied = upper_zeros.iter().filter(|a| rect.contains(**a)).count();
    if counted > supplied as i64 {
        return Err(AsymptoticsError::IncompleteZeroSet { counted, supplied });
    }

    let (x, y) = (z.re, z.im);
    let g = |t: f64| f.ln_abs(Complex64::new(t, 0.0));
    let kernel = |t: f64| y / PI / ((t - x).powi(2) + y * y);
    let core = integrate(|t| g(t) * kernel(t), -line_cutoff, line_cutoff, 1e-10, 1e-10, 50_000);
    let fit_left = growth_fit(&g, -1.0, line_cutoff)?;
    let fit_right = growth_fit(&g, 1.0, line_cutoff)?;
    let tail = tail_integral(line_cutoff, |t| fit_right.at(t) * kernel(t))
        + tail_integral(line_cutoff, |t| fit_left.at(t) * kernel(-t));
    let poisson = core.value + tail;
    let ln_abs_f = f.ln_abs(z);
    let blaschke_term = blaschke_scaled(upper_zeros, z, true)?.ln_abs();
    let sigma_term = sigma_plus * y;
    let residual = (ln_abs_f - poisson - sigma_term - blaschke_term).abs();
    Ok(NevanlinnaReport { z, ln_abs_f, poisson, tail, sigma_term, blaschke_term, residual, converged: core.converged })
}

/// `f·g` as an entire function.
#[derive(Debug, Clone, Copy)]
pub struct Product<'a, F: ?Sized, G: ?Sized>(pub &'a F, pub &'a G);

/// `f + g` as an entire function.
#[derive(Debug, Clone, Copy)]
pub struct Sum<'a, F: ?Sized, G: ?Sized>(pub &'a F, pub &'a G);

impl<F: EntireFunction + ?Sized, G: EntireFunction + ?Sized> EntireFunction for Product<'_, F, G> {
    fn eval_scaled(&self, z: Complex64) -> Scaled {
        self.0.eval_scaled(z).mul(self.1.eval_scaled(z))
    }
}

impl<F: EntireFunction + ?Sized, G: EntireFunction + ?Sized> EntireFunction for Sum<'_, F, G> {
    fn eval_scaled(&self, z: Complex64) -> Scaled {
        self.0.eval_scaled(z).add(self.1.eval_scaled(z))
    }
}

/// Indicators of `f`, `g`, `fg` and `f + g` in one direction, and the two
/// inequalities `h_{fg} <= h_f + h_g` and `h_{f+g} <= max(h_f, h_g)`, each
/// with slack `0.05`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorInequalities {
    pub theta: f64,
    pub h_f: f64,
    pub h_g: f64,
    pub h_product: f64,
    pub h_sum: f64,
    pub product_holds: bool,
    pub sum_holds: bool,
}

pub fn indicator_inequalities<F, G>(
    f: &F,
    g: &G,
    theta: f64,
    r_max: f64,
) -> Result<IndicatorInequalities, AsymptoticsError>
where
    F: EntireFunction + ?Sized,
    G: EntireFunction + ?Sized,
{
    let h_f = indicator_estimate(f, theta, r_max)?.h;
    let h_g = indicator_estimate(g, theta, r_max)?.h;
    let h_product = indicator_estimate(&Product(f, g), theta, r_max)?.h;
    let h_sum = indicator_estimate(&Sum(f, g), theta, r_max)?.h;
    Ok(IndicatorInequalities {
        theta,
        h_f,
        h_g,
        h_product,
        h_sum,
        product_holds: h_product <= h_f + h_g + 0.05,
        sum_holds: h_sum <= h_f.max(h_g) + 0.05,
    })
}

/// Fit of an indicator to `σ|sin θ| + c sin θ`. The `c sin θ` term is the
/// indicator of `e^{-icz}`, a real shift of the underlying Fourier support;
/// removing it leaves the centered form `σ|sin θ|`. The coefficient `d` of an
/// extra `|cos θ|` term, fitted separately, is reported as a diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorPattern {
    pub thetas: Vec<f64>,
    pub h: Vec<f64>,
    pub sigma: f64,
    pub drift: f64,
    pub cos_coefficient: f64,
    /// `max |h - c sin θ - σ|sin θ|| / σ`.
    pub relative_residual: f64,
}

pub fn indicator_pattern<F: EntireFunction + ?Sized>(
    f: &F,
    thetas: &[f64],
    r_max: f64,
) -> Result<IndicatorPattern, AsymptoticsError> {
    let h: Vec<f64> = thetas.iter().map(|&t| indicator_estimate(f, t, r_max).map(|r| r.h)).collect::<Result<_, _>>()?;
    let two: Vec<Vec<f64>> = thetas.iter().map(|t| vec![t.sin().abs(), t.sin()]).collect();
    let c = lstsq(&two, &h);
    let three: Vec<Vec<f64>> = thetas.iter().map(|t| vec![t.sin().abs(), t.sin(), t.cos().abs()]).collect();
    let c3 = lstsq(&three, &h);
    let (sigma, drift) = (c[0], c[1]);
    let relative_residual =
        thetas.iter().zip(&h).map(|(t, hv)| (hv - drift * t.sin() - sigma * t.sin().abs()).abs()).fold(0.0, f64::max)
            / sigma.abs().max(f64::MIN_POSITIVE);
    Ok(IndicatorPattern { thetas: thetas.to_vec(), h, sigma, drift, cos_coefficient: c3[2], relative_residual })
}

/// `G(k) = (X̂¹ - X̂¹₂)(k) - (X̂² - X̂²₂)(k)`: the `X` transforms of two
/// potentials with the `X2` window removed, differenced.
#[derive(Debug, Clone, Copy)]
pub struct GFunction<'a> {
    pub f1: &'a KernelField,
    pub f2: &'a KernelField,
    pub r: f64,
}

impl EntireFunction for GFunction<'_> {
    fn eval_scaled(&self, k: Complex64) -> Scaled {
        let part = |f: &KernelField| {
            let w2 = KernelPiece::Window(KernelWindow::new(WindowKind::X2, self.r));
            kernel_fourier_scaled(f, KernelPiece::FullX, k).sub(kernel_fourier_scaled(f, w2, k))
        };
        part(self.f1).sub(part(self.f2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GExperimentReport {
    pub hull: (f64, f64),
    pub r: f64,
    /// Zero-search radius.
    pub radius: f64,
    /// Largest radius of the indicator fits.
    pub r_max: f64,
    /// `V¹ = V²`, so `G ≡ 0` and nothing else is computed.
    pub degenerate: bool,
    pub width_xhat1: f64,
    pub width_xhat2: f64,
    pub width_g: f64,
    /// `width(X̂¹) - width(G)`.
    pub width_margin: f64,
    /// Density of resonances of `X̂¹` and `X̂²` per near-real sector of ℂ⁻.
    pub density_xhat1: f64,
    pub density_xhat2: f64,
    /// Density of zeros of `G` per near-real sector of ℂ⁻.
    pub density_g: f64,
    /// Zeros of `X̂¹` that are also zeros of `X̂²` (within `1e-6`).
    pub common_zeros: Vec<Complex64>,
    pub n_zeros_g: usize,
    /// `2(b - a)`, the width the supports predict for `X̂ʲ`.
    pub predicted_width: f64,
    /// `2(b - a) - 2r`, the width `G` would have without its `X2` window
    /// support if the remaining pieces were confined away from it.
    pub claimed_width_g: f64,
}

/// Half-width of the near-real sectors used for densities.
pub const SECTOR_HALF_WIDTH: f64 = 0.3;

/// The two near-real sectors of the lower half-plane.
pub fn lower_near_real_sectors() -> [(f64, f64); 2] {
    [(-SECTOR_HALF_WIDTH, 0.0), (-PI, -PI + SECTOR_HALF_WIDTH)]
}

fn mean_density(zs: &ZeroSet) -> f64 {
    let s = lower_near_real_sectors();
    (zero_density(zs, s[0]).delta + zero_density(zs, s[1]).delta) / 2.0
}

/// Build `G` from kernel solves on the common hull, locate its zeros in the
/// lower half-plane within `radius`, and compare widths and densities with
/// those of `X̂¹` and `X̂²`.
pub fn g_function_experiment(
    v1: &Potential,
    v2: &Potential,
    radius: f64,
    r: f64,
    r_max: f64,
    n_grid: usize,
) -> Result<GExperimentReport, AsymptoticsError> {
    let (a1, b1) = v1.hull();
    let (a2, b2) = v2.hull();
    let hull = (a1.min(a2), b1.max(b2));
    if !v1.agrees_on(v2, 0.0, hull.1) {
        return Err(AsymptoticsError::SharedPartMismatch);
    }
    let predicted_width = 2.0 * (hull.1 - hull.0);
    let claimed_width_g = predicted_width - 2.0 * r;
    let mut report = GExperimentReport {
        hull,
        r,
        radius,
        r_max,
        degenerate: v1 == v2,
        width_xhat1: f64::NAN,
        width_xhat2: f64::NAN,
        width_g: f64::NAN,
        width_margin: f64::NAN,
        density_xhat1: f64::NAN,
        density_xhat2: f64::NAN,
        density_g: f64::NAN,
        common_zeros: Vec::new(),
        n_zeros_g: 0,
        predicted_width,
        claimed_width_g,
    };
    if report.degenerate {
        return Ok(report);
    }
    let f1 = solve_kernels_on(v1, hull, n_grid)?;
    let f2 = solve_kernels_on(v2, hull, n_grid)?;
    let g = GFunction { f1: &f1, f2: &f2, r };

    report.width_xhat1 = indicator_width(&XhatFn(v1), r_max)?.width;
    report.width_xhat2 = indicator_width(&XhatFn(v2), r_max)?.width;
    report.width_g = indicator_width(&g, r_max)?.width;
    report.width_margin = report.width_xhat1 - report.width_g;

    let z1 = crate::czeros::resonances(v1, radius)?;
    let z2 = crate::czeros::resonances(v2, radius)?;
    report.density_xhat1 = mean_density(&z1);
    report.density_xhat2 = mean_density(&z2);
    report.common_zeros =
        z1.locations().into_iter().filter(|a| z2.locations().iter().any(|b| (a - b).norm() < 1e-6)).collect();

    let rect = Rect::from_ranges((-radius, radius), (-radius, -1e-6 * radius))?;
    let tiles = (radius * (hull.1 - hull.0) / 4.0).ceil().clamp(1.0, 64.0) as usize;
    let zg = find_zeros_tiled(&g, rect, tiles, 100_000)?;
    let zeros = zg.zeros.into_iter().filter(|z| z.location.norm() <= radius).collect();
    let zg = ZeroSet { zeros, radius: Some(radius), ..zg }.with_tag("G");
    report.n_zeros_g = zg.len();
    report.density_g = mean_density(&zg);
    Ok(report)
}
