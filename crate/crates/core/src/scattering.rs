//! Exact forward scattering for piecewise-constant potentials.
//!
//! Conventions. For `-ψ'' + Vψ = k²ψ` with `V` supported on `[a, b]`:
//!
//! * left incidence: `ψ = e^{ikx} + r_left e^{-ikx}` for `x < a`, `t e^{ikx}` for `x > b`;
//! * right incidence: `ψ = e^{-ikx} + r_right e^{ikx}` for `x > b`, `t e^{-ikx}` for `x < a`.
//!
//! With `M(k)` the transfer matrix carrying `(ψ, ψ')` from `a` to `b` and
//! `L = b - a`,
//!
//! ```text
//! X̂(k) = ik / t        = e^{ikL}      [ik(m11 + m22) + k² m12 - m21] / 2
//! Ŷ(k) = ik r_right / t = e^{-ik(a+b)} [ik(m11 - m22) + k² m12 + m21] / 2
//! ```
//!
//! `M` depends on `k` only through `k²`, so both functions are entire, and
//! `det M = 1` gives `X̂(k)X̂(-k) = k² + Ŷ(k)Ŷ(-k)` identically. `X̂` is the
//! Fourier transform of a kernel supported on `[-2L, 0]` and `Ŷ` of one
//! supported on `[2a, 2b]`; the pairing `Ŷ ↔ r_right` is the one whose
//! indicator diagram matches that support (`r_left` would give `[-2b, -2a]`).
//! As `|k| → ∞` on the real line, `X̂(k) = ik - ∫V/2 + O(1/k)`.
//!
//! Scattering matrix: `S = [[t, r_right], [r_left, t]]`, and
//! `det S = -X̂(-k)/X̂(k)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entire::{EntireFunction, Scaled};
use crate::potential::Potential;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|Im k|·(b - a)` above which the result is flagged as rescaled.
pub const OVERFLOW_GUARD: f64 = 300.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("k = {k} is a zero of X̂ (pole of the scattering matrix)")]
    PoleAtK { k: Complex64 },
}

/// Transfer matrix across the hull, stored as `entries * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: [[Complex64; 2]; 2],
    pub log_scale: f64,
    pub k: Complex64,
    pub hull: (f64, f64),
    /// Set when `|Im k|·(b-a)` exceeds [`OVERFLOW_GUARD`]; the product is
    /// always assembled in rescaled form, so this is informational.
    pub rescaled: bool,
}

impl TransferMatrix {
    /// Determinant of the unscaled matrix.
    pub fn determinant(&self) -> Complex64 {
        let [[m11, m12], [m21, m22]] = self.entries;
        (m11 * m22 - m12 * m21) * (2.0 * self.log_scale).exp()
    }

    /// Unscaled entries; may overflow.
    pub fn unscaled(&self) -> [[Complex64; 2]; 2] {
        let s = self.log_scale.exp();
        let [[a, b], [c, d]] = self.entries;
        [[a * s, b * s], [c * s, d * s]]
    }
}

/// `(cos z, sin z / z)` multiplied by `exp(-|Im z|)`, for `z = κ w` given
/// through `z² `. Both are even in `z`, so the branch of the root is irrelevant.
fn scaled_cos_sinc(z2: Complex64) -> (Complex64, Complex64, f64) {
    let z = z2.sqrt();
    let s = z.im.abs();
    if z.norm() < 1e-2 {
        let damp = (-s).exp();
        let c = 1.0 - z2 / 2.0 + z2 * z2 / 24.0 - z2 * z2 * z2 / 720.0;
        let sc = 1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0;
        return (c * damp, sc * damp, s);
    }
    let ep = (I * z - s).exp();
    let em = (-I * z - s).exp();
    ((ep + em) / 2.0, (ep - em) / (2.0 * I * z), s)
}

/// Propagator of `(ψ, ψ')` across one cell of value `value` and width
/// `width`, as `(entries, log_scale)`:
/// `[[cos κw, sin(κw)/κ], [-κ sin κw, cos κw]]` with `κ² = k² - value`.
pub fn cell_propagator(value: f64, width: f64, k: Complex64) -> ([[Complex64; 2]; 2], f64) {
    let kappa2 = k * k - value;
    let (c, sinc, s) = scaled_cos_sinc(kappa2 * width * width);
    let sk = sinc * width; // sin(κw)/κ
    ([[c, sk], [-kappa2 * sk, c]], s)
}

fn matmul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Ordered product of the cell propagators from `a` to `b`.
pub fn transfer_matrix(v: &Potential, k: Complex64) -> TransferMatrix {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    let mut log_scale = 0.0;
    for (l, r, val) in v.cells() {
        let (p, s) = cell_propagator(val, r - l, k);
        m = matmul(&p, &m);
        log_scale += s;
        let big = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 0.0 && big.is_finite() {
            for z in m.iter_mut().flatten() {
                *z /= big;
            }
            log_scale += big.ln();
        }
    }
    let hull = v.hull();
    TransferMatrix { entries: m, log_scale, k, hull, rescaled: k.im.abs() * (hull.1 - hull.0) > OVERFLOW_GUARD }
}

/// `X̂(k)` and `Ŷ(k)` from an already assembled transfer matrix. Because `M`
/// is even in `k`, the same matrix serves for `-k`.
fn xy_from_matrix(tm: &TransferMatrix, k: Complex64) -> (Scaled, Scaled) {
    let [[m11, m12], [m21, m22]] = tm.entries;
    let (a, b) = tm.hull;
    let width = b - a;
    let ik = I * k;
    let k2 = k * k;
    let px = (ik * (m11 + m22) + k2 * m12 - m21) / 2.0;
    let py = (ik * (m11 - m22) + k2 * m12 + m21) / 2.0;
    // e^{ikL} and e^{-ik(a+b)} in scaled form
    let x = Scaled::new(px * Complex64::new(0.0, k.re * width).exp(), tm.log_scale - k.im * width);
    let y = Scaled::new(py * Complex64::new(0.0, -k.re * (a + b)).exp(), tm.log_scale + k.im * (a + b));
    (x.normalized(), y.normalized())
}

/// Magnitude of the largest summand of the `X̂` bracket, the scale against
/// which cancellation (a zero of `X̂`) is judged.
fn xhat_term_scale(tm: &TransferMatrix, k: Complex64) -> f64 {
    let [[m11, m12], [m21, m22]] = tm.entries;
    let t = [(k * (m11 + m22)).norm(), (k * k * m12).norm(), m21.norm()];
    let big = t.iter().copied().fold(0.0, f64::max) / 2.0;
    big.ln() + tm.log_scale - k.im * (tm.hull.1 - tm.hull.0)
}

pub fn xhat_scaled(v: &Potential, k: Complex64) -> Scaled {
    xy_from_matrix(&transfer_matrix(v, k), k).0
}

pub fn yhat_scaled(v: &Potential, k: Complex64) -> Scaled {
    xy_from_matrix(&transfer_matrix(v, k), k).1
}

/// `X̂(k) = ik / t(k)`, read off the transfer matrix without dividing by `t`.
pub fn xhat(v: &Potential, k: Complex64) -> Complex64 {
    xhat_scaled(v, k).value()
}

/// `Ŷ(k) = ik r_right(k) / t(k)`.
pub fn yhat(v: &Potential, k: Complex64) -> Complex64 {
    yhat_scaled(v, k).value()
}

/// Transmission and reflection coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JostCoefficients {
    pub t: Complex64,
    pub r_right: Complex64,
    pub r_left: Complex64,
    /// `true` when `k = 0` and the values are limits rather than evaluations.
    pub zero_limit: bool,
}

/// Richardson extrapolation of `g(h)` to `h → 0` from `h, h/2, h/4, h/8`,
/// assuming an expansion in integer powers of `h`.
fn richardson_limit(g: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    let mut table: Vec<Complex64> = (0..4).map(|j| g(h / 2f64.powi(j))).collect();
    for level in 1..4 {
        let factor = 2f64.powi(level);
        for j in (level as usize..4).rev() {
            table[j] = (factor * table[j] - table[j - 1]) / (factor - 1.0);
        }
    }
    table[3]
}

pub fn jost_coefficients(v: &Potential, k: Complex64) -> Result<JostCoefficients, ScatteringError> {
    let tm = transfer_matrix(v, k);
    let (x, y) = xy_from_matrix(&tm, k);
    let (_, y_minus) = xy_from_matrix(&tm, -k);
    if k == Complex64::new(0.0, 0.0) {
        if x.value().norm() < 1e-13 {
            // zero-energy resonance: X̂(0) = 0, take limits along the real axis
            let at = |h: f64| jost_coefficients(v, Complex64::new(h, 0.0)).unwrap();
            let h = 1e-3 / v.width().max(1.0);
            return Ok(JostCoefficients {
                t: richardson_limit(|h| at(h).t, h),
                r_right: richardson_limit(|h| at(h).r_right, h),
                r_left: richardson_limit(|h| at(h).r_left, h),
                zero_limit: true,
            });
        }
        return Ok(JostCoefficients {
            t: Complex64::new(0.0, 0.0),
            r_right: y.ratio(x),
            r_left: y_minus.ratio(x),
            zero_limit: true,
        });
    }
    if x.ln_abs() < xhat_term_scale(&tm, k) + (1e-10f64).ln() {
        return Err(ScatteringError::PoleAtK { k });
    }
    Ok(JostCoefficients {
        t: Scaled::from_value(I * k).ratio(x),
        r_right: y.ratio(x),
        r_left: y_minus.ratio(x),
        zero_limit: false,
    })
}

/// `det S(k) = -X̂(-k) / X̂(k)`.
pub fn det_s(v: &Potential, k: Complex64) -> Result<Complex64, ScatteringError> {
    let tm = transfer_matrix(v, k);
    let (x, _) = xy_from_matrix(&tm, k);
    let (xm, _) = xy_from_matrix(&tm, -k);
    if k == Complex64::new(0.0, 0.0) && x.value().norm() < 1e-13 {
        let h = 1e-3 / v.width().max(1.0);
        return Ok(richardson_limit(|h| det_s(v, Complex64::new(h, 0.0)).unwrap(), h));
    }
    if x.ln_abs() < xhat_term_scale(&tm, k) + (1e-10f64).ln() {
        return Err(ScatteringError::PoleAtK { k });
    }
    Ok(-xm.ratio(x))
}

/// `|X̂(k)X̂(-k) - k² - Ŷ(k)Ŷ(-k)| / (1 + |k|²)`, from computed values.
pub fn unitary_residual(v: &Potential, k: Complex64) -> f64 {
    let tm = transfer_matrix(v, k);
    let (x, y) = xy_from_matrix(&tm, k);
    let (xm, ym) = xy_from_matrix(&tm, -k);
    let lhs = x.mul(xm);
    let rhs = y.mul(ym).add(Scaled::from_value(k * k));
    lhs.sub(rhs).value().norm() / (1.0 + k.norm_sqr())
}

/// One row of a scattering grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSample {
    pub k: Complex64,
    pub xhat: Complex64,
    pub yhat: Complex64,
    pub t: Complex64,
    pub r_right: Complex64,
    pub r_left: Complex64,
    pub det_s: Complex64,
    pub residual_u: f64,
}

impl ScatteringSample {
    pub const CSV_HEADER: &'static str = "k_re,k_im,xhat_re,xhat_im,yhat_re,yhat_im,dets_re,dets_im,residual_U";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.k.re,
            self.k.im,
            self.xhat.re,
            self.xhat.im,
            self.yhat.re,
            self.yhat.im,
            self.det_s.re,
            self.det_s.im,
            self.residual_u
        )
    }
}

/// All scattering data at one `k` from a single transfer matrix. At zeros of
/// `X̂` the ratios come out infinite rather than erroring.
pub fn sample(v: &Potential, k: Complex64) -> ScatteringSample {
    let tm = transfer_matrix(v, k);
    let (x, y) = xy_from_matrix(&tm, k);
    let (xm, ym) = xy_from_matrix(&tm, -k);
    let residual_u = x.mul(xm).sub(y.mul(ym).add(Scaled::from_value(k * k))).value().norm() / (1.0 + k.norm_sqr());
    ScatteringSample {
        k,
        xhat: x.value(),
        yhat: y.value(),
        t: Scaled::from_value(I * k).ratio(x),
        r_right: y.ratio(x),
        r_left: ym.ratio(x),
        det_s: -xm.ratio(x),
        residual_u,
    }
}

/// Samples on the rectangular grid `re_range × im_range` (row-major in the
/// imaginary part, inclusive endpoints). Evaluated in parallel.
pub fn sample_grid(
    v: &Potential,
    re_range: (f64, f64),
    im_range: (f64, f64),
    n_re: usize,
    n_im: usize,
) -> Vec<ScatteringSample> {
    let lin = |lo: f64, hi: f64, n: usize, i: usize| {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    (0..n_im * n_re)
        .into_par_iter()
        .map(|idx| {
            let (j, i) = (idx / n_re, idx % n_re);
            let k = Complex64::new(lin(re_range.0, re_range.1, n_re, i), lin(im_range.0, im_range.1, n_im, j));
            sample(v, k)
        })
        .collect()
}

/// `X̂` of a potential as an [`EntireFunction`].
#[derive(Debug, Clone, Copy)]
pub struct XhatFn<'a>(pub &'a Potential);

/// `Ŷ` of a potential as an [`EntireFunction`].
#[derive(Debug, Clone, Copy)]
pub struct YhatFn<'a>(pub &'a Potential);

impl EntireFunction for XhatFn<'_> {
    fn eval_scaled(&self, z: Complex64) -> Scaled {
        xhat_scaled(self.0, z)
    }
}

impl EntireFunction for YhatFn<'_> {
    fn eval_scaled(&self, z: Complex64) -> Scaled {
        yhat_scaled(self.0, z)
    }
}
