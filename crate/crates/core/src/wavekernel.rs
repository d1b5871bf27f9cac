//! Wave kernels by integration along characteristics.
//!
//! `D_y A(x, y) = X(y - x) + Y(y + x)` for `x >= b`, where `A` solves
//! `(D_x² - D_y² + V(x)) A = 0` with `A = δ(x - y)` for `x <= a`. In
//! characteristic coordinates `ξ = y - x`, `η = y + x` write
//! `A = δ(ξ) + H(-ξ) u(ξ, η)`. The remainder solves the Goursat problem
//!
//! ```text
//! u_ξη = -V((η - ξ)/2) u / 4,   u(0, η) = ½ ∫_a^{η/2} V,   u(ξ, 2a) = 0,
//! ```
//!
//! on the triangle `a <= (η - ξ)/2 <= b`, and the kernels are
//!
//! ```text
//! X = δ' - (∫V/2) δ + X_reg,   X_reg(ξ) = -¼ ∫ V u dη  along ξ = const,
//! Y = V(η/2)/4 + Y_reg,        Y_reg(η) =  ¼ ∫ V u dξ  along η = const,
//! ```
//!
//! with `X_reg` supported on `[-2L, 0]` and `Y_reg` on `[2a, 2b]`,
//! `L = b - a`. Only `u` is discretised; the singular parts are carried
//! symbolically and transformed exactly.
//!
//! The lattice has spacing `h = 2L/N` in both `ξ` and `η`, so every node sits
//! at `x = a + s·h/2` for an integer `s`. Each diamond cell integrates
//! `V u / 4` with exact `V`-moments and linear `u`, which is second order.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::entire::{EntireFunction, Scaled};
use crate::potential::Potential;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("n_grid = {n} is below the minimum of 64")]
    GridTooSmall { n: usize },
    #[error("estimated truncation error {estimate:.3e} exceeds 1e-2 of the kernel sup-norm {sup:.3e}")]
    GridTooCoarse { estimate: f64, sup: f64 },
    #[error("|Im k| = {im} exceeds the quadrature guard {limit}")]
    ImaginaryPartTooLarge { im: f64, limit: f64 },
    #[error("potentials differ on [0, b]")]
    SharedPartMismatch,
    #[error("hull ({a}, {b}) does not contain the support of the potential")]
    HullTooSmall { a: f64, b: f64 },
}

/// Sampled wave kernels of one potential.
#[derive(Debug, Clone, Serialize)]
pub struct KernelField {
    /// Hull the lattice was built on (may be larger than the support).
    pub hull: (f64, f64),
    pub n_grid: usize,
    /// `ξ` nodes on `[-2L, 0]`, ascending.
    pub x_grid: Vec<f64>,
    pub x_reg: Vec<f64>,
    /// `η` nodes on `[2a, 2b]`, ascending.
    pub y_grid: Vec<f64>,
    /// `Y - V(η/2)/4`.
    pub y_reg: Vec<f64>,
    /// `V(η/2)/4` at the `η` nodes (cells closed on the left).
    pub y_leading: Vec<f64>,
    pub delta_prime_coeff: f64,
    pub delta_coeff: f64,
    /// Richardson estimate from a solve at half resolution.
    pub truncation_error: f64,
    #[serde(skip)]
    cells: Vec<(f64, f64, f64)>,
}

/// Discrete L¹ and sup norms of a sampled kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelNorms {
    pub l1: f64,
    pub sup: f64,
}

impl KernelField {
    /// Grid spacing in `ξ` and `η`.
    pub fn spacing(&self) -> f64 {
        if self.n_grid == 0 {
            0.0
        } else {
            2.0 * (self.hull.1 - self.hull.0) / self.n_grid as f64
        }
    }

    pub fn x_norms(&self) -> KernelNorms {
        norms(&self.x_reg, self.spacing())
    }

    pub fn y_norms(&self) -> KernelNorms {
        norms(&self.y_reg, self.spacing())
    }

    /// Largest sup-norm among the sampled parts.
    pub fn sup(&self) -> f64 {
        self.x_reg.iter().chain(&self.y_reg).chain(&self.y_leading).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `ξ,X_reg` rows followed by nothing else; header `xi,x_reg`.
    pub fn x_csv(&self) -> String {
        let mut s = String::from("xi,x_reg\n");
        for (x, v) in self.x_grid.iter().zip(&self.x_reg) {
            s.push_str(&format!("{x},{v}\n"));
        }
        s
    }

    /// Header `eta,y_reg,y_leading`.
    pub fn y_csv(&self) -> String {
        let mut s = String::from("eta,y_reg,y_leading\n");
        for ((y, v), l) in self.y_grid.iter().zip(&self.y_reg).zip(&self.y_leading) {
            s.push_str(&format!("{y},{v},{l}\n"));
        }
        s
    }
}

fn norms(v: &[f64], h: f64) -> KernelNorms {
    let sup = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let l1 = if v.len() < 2 { 0.0 } else { v.windows(2).map(|w| 0.5 * (w[0].abs() + w[1].abs()) * h).sum() };
    KernelNorms { l1, sup }
}

/// `(∫ V (x - p) dx, ∫ V (q - x) dx)` over `[p, q]`.
fn moments(cells: &[(f64, f64, f64)], p: f64, q: f64) -> (f64, f64) {
    let mut lo = 0.0;
    let mut up = 0.0;
    let start = cells.partition_point(|c| c.1 <= p);
    for &(l, r, v) in &cells[start..] {
        if l >= q {
            break;
        }
        let (l, r) = (l.max(p), r.min(q));
        if r > l {
            lo += v * ((r - p).powi(2) - (l - p).powi(2)) / 2.0;
            up += v * ((q - l).powi(2) - (q - r).powi(2)) / 2.0;
        }
    }
    (lo, up)
}

struct RawKernels {
    x_reg: Vec<f64>, // indexed by m, ξ_m = -m h
    y_reg: Vec<f64>, // indexed by n, η_n = 2a + n h
}

fn sweep(cells: &[(f64, f64, f64)], a: f64, b: f64, n: usize) -> RawKernels {
    let half = (b - a) / n as f64;
    let node = |s: usize| a + s as f64 * half;
    // per x-segment j = [x_j, x_{j+1}] moments
    let (j_lo, j_up): (Vec<f64>, Vec<f64>) = (0..n).map(|j| moments(cells, node(j), node(j + 1))).unzip();
    let i0: Vec<f64> = j_up.iter().map(|m| 2.0 * m / half).collect();
    let i1: Vec<f64> = j_lo.iter().map(|m| 2.0 * m / half).collect();

    let mut prev = vec![0.0; n + 1];
    let mut acc = 0.0;
    for s in 1..=n {
        acc += cells_integral(cells, node(s - 1), node(s));
        prev[s] = 0.5 * acc;
    }
    let mut x_reg = vec![0.0; n + 1];
    let mut y_reg = vec![0.0; n + 1];
    x_reg[0] = -0.25 * (1..=n).map(|k| i0[k - 1] * prev[k - 1] + i1[k - 1] * prev[k]).sum::<f64>();

    let mut cur = vec![0.0; n + 1];
    for m in 1..=n {
        cur[0] = 0.0;
        for k in 1..=n - m {
            let s = k + m;
            let w_lo = 4.0 * j_lo[s - 2];
            let w_up = 4.0 * j_up[s - 1];
            let (ua, ub, uc) = (prev[k - 1], cur[k - 1], prev[k]);
            cur[k] = (uc + ub - ua + (w_lo * (ua + ub + uc) + w_up * (ub + uc)) / 12.0) / (1.0 - w_up / 12.0);
        }
        for k in 0..=n - m {
            y_reg[k] += 0.25 * (i0[k + m - 1] * prev[k] + i1[k + m - 1] * cur[k]);
        }
        x_reg[m] = -0.25 * (1..=n - m).map(|k| i0[k + m - 1] * cur[k - 1] + i1[k + m - 1] * cur[k]).sum::<f64>();
        std::mem::swap(&mut prev, &mut cur);
    }
    RawKernels { x_reg, y_reg }
}

fn cells_integral(cells: &[(f64, f64, f64)], p: f64, q: f64) -> f64 {
    cells
        .iter()
        .map(|&(l, r, v)| {
            let (l, r) = (l.max(p), r.min(q));
            if r > l {
                v * (r - l)
            } else {
                0.0
            }
        })
        .sum()
}

/// Solve for the kernels of `v` on its own hull with `n_grid` lattice steps.
pub fn solve_kernels(v: &Potential, n_grid: usize) -> Result<KernelField, KernelError> {
    solve_kernels_on(v, v.hull(), n_grid)
}

/// As [`solve_kernels`], on a hull `[a, b]` containing the support. The
/// kernels do not depend on zero padding, so two potentials solved on a common
/// hull can be compared node by node.
pub fn solve_kernels_on(v: &Potential, hull: (f64, f64), n_grid: usize) -> Result<KernelField, KernelError> {
    let cells: Vec<(f64, f64, f64)> = v.cells().collect();
    if v.is_zero() {
        return Ok(KernelField {
            hull: (0.0, 0.0),
            n_grid: 0,
            x_grid: vec![0.0],
            x_reg: vec![0.0],
            y_grid: vec![0.0],
            y_reg: vec![0.0],
            y_leading: vec![0.0],
            delta_prime_coeff: 1.0,
            delta_coeff: 0.0,
            truncation_error: 0.0,
            cells,
        });
    }
    if n_grid < 64 {
        return Err(KernelError::GridTooSmall { n: n_grid });
    }
    let (a, b) = hull;
    let (va, vb) = v.hull();
    if !(a <= va && vb <= b) {
        return Err(KernelError::HullTooSmall { a, b });
    }
    let fine = sweep(&cells, a, b, n_grid);
    let coarse = sweep(&cells, a, b, n_grid / 2);
    let ratio = n_grid as f64 / (n_grid / 2) as f64;
    let interp = |f: &[f64], pos: f64| {
        let j = (pos.floor() as usize).min(f.len() - 2);
        let t = pos - j as f64;
        f[j] * (1.0 - t) + f[j + 1] * t
    };
    let mut diff: f64 = 0.0;
    for (jc, (&xc, &yc)) in coarse.x_reg.iter().zip(&coarse.y_reg).enumerate() {
        let pos = jc as f64 * ratio;
        diff = diff.max((interp(&fine.x_reg, pos) - xc).abs());
        diff = diff.max((interp(&fine.y_reg, pos) - yc).abs());
    }
    let truncation_error = diff / 3.0;

    let h = 2.0 * (b - a) / n_grid as f64;
    let x_grid: Vec<f64> = (0..=n_grid).map(|j| -2.0 * (b - a) + j as f64 * h).collect();
    let mut x_reg = fine.x_reg;
    x_reg.reverse();
    let y_grid: Vec<f64> = (0..=n_grid).map(|j| 2.0 * a + j as f64 * h).collect();
    let y_leading: Vec<f64> = y_grid.iter().map(|&eta| v.value_at(eta / 2.0) / 4.0).collect();
    let field = KernelField {
        hull,
        n_grid,
        x_grid,
        x_reg,
        y_grid,
        y_reg: fine.y_reg,
        y_leading,
        delta_prime_coeff: 1.0,
        delta_coeff: -v.integral() / 2.0,
        truncation_error,
        cells,
    };
    let sup = field.sup();
    if truncation_error > 1e-2 * sup {
        return Err(KernelError::GridTooCoarse { estimate: truncation_error, sup });
    }
    Ok(field)
}

/// The six windows of the strip decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WindowKind {
    /// `X` on `[2a, 0]`.
    X1,
    /// `X` on `[2a - 2r, 2a]`.
    X2,
    /// `X` on `[-2L, 2a - 2r]`.
    X3,
    /// `Y` on `[2a, 0]`.
    Y1,
    /// `Y` on `[0, 2r]`.
    Y2,
    /// `Y` on `[2r, 2b]`.
    Y3,
}

impl WindowKind {
    pub const ALL: [WindowKind; 6] = [Self::X1, Self::X2, Self::X3, Self::Y1, Self::Y2, Self::Y3];

    pub fn is_x(self) -> bool {
        matches!(self, Self::X1 | Self::X2 | Self::X3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelWindow {
    pub which: WindowKind,
    pub r: f64,
    /// The transform is multiplied by `e^{-ik·offset}`.
    pub offset: f64,
}

impl KernelWindow {
    pub fn new(which: WindowKind, r: f64) -> Self {
        Self { which, r, offset: 0.0 }
    }

    /// Window placed as seen at time `x = b`: `X` pieces are functions of
    /// `y - b`, `Y` pieces of `y + b`.
    pub fn at_right_edge(which: WindowKind, r: f64, hull: (f64, f64)) -> Self {
        let offset = if which.is_x() { hull.1 } else { -hull.1 };
        Self { which, r, offset }
    }

    /// Default window parameter `(b - a)/20`.
    pub fn default_r(hull: (f64, f64)) -> f64 {
        (hull.1 - hull.0) / 20.0
    }

    /// The interval in `ξ` (X windows) or `η` (Y windows).
    pub fn interval(&self, hull: (f64, f64)) -> (f64, f64) {
        let (a, b) = hull;
        let r = self.r;
        match self.which {
            WindowKind::X1 => (2.0 * a, 0.0),
            WindowKind::X2 => (2.0 * a - 2.0 * r, 2.0 * a),
            WindowKind::X3 => (2.0 * (a - b), 2.0 * a - 2.0 * r),
            WindowKind::Y1 => (2.0 * a, 0.0),
            WindowKind::Y2 => (0.0, 2.0 * r),
            WindowKind::Y3 => (2.0 * r, 2.0 * b),
        }
    }
}

/// What to transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelPiece {
    /// `X̂`: singular parts included.
    FullX,
    /// `Ŷ`: leading part included.
    FullY,
    /// Regular part of `X` on the window, or `Y` including its leading part.
    Window(KernelWindow),
}

/// `φ₀(z) = ∫₀¹ (1-t) e^{zt} dt`, `φ₁(z) = ∫₀¹ t e^{zt} dt`, `φ(z) = ∫₀¹ e^{zt} dt`.
fn phis(z: Complex64) -> (Complex64, Complex64, Complex64) {
    if z.norm() < 0.5 {
        let mut p0 = Complex64::new(0.0, 0.0);
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p = Complex64::new(0.0, 0.0);
        let mut zn = Complex64::new(1.0, 0.0);
        let mut fact = 1.0; // (n+1)!
        for n in 0..18 {
            fact *= (n + 1) as f64;
            let f2 = fact * (n + 2) as f64;
            p += zn / fact;
            p0 += zn / f2;
            p1 += zn * (n + 1) as f64 / f2;
            zn *= z;
        }
        return (p0, p1, p);
    }
    let ez = z.exp();
    let z2 = z * z;
    ((ez - 1.0 - z) / z2, (z * ez - ez + 1.0) / z2, (ez - 1.0) / z)
}

/// Accumulates `Σ c_j e^{-ik p_j}` relative to `e^{scale}`.
struct Accum {
    k: Complex64,
    scale: f64,
    sum: Complex64,
}

impl Accum {
    fn new(k: Complex64, lo: f64, hi: f64) -> Self {
        Self { k, scale: (k.im * lo).max(k.im * hi), sum: Complex64::new(0.0, 0.0) }
    }

    fn add(&mut self, p: f64, c: Complex64) {
        self.sum += c * (-I * self.k * p - self.scale).exp();
    }

    fn finish(self) -> Scaled {
        Scaled::new(self.sum, self.scale).normalized()
    }
}

/// `∫_lo^hi g(s) e^{-iks} ds` for the piecewise-linear interpolant `g` of
/// samples on the uniform grid `s0 + j h`.
fn linear_transform(s0: f64, h: f64, g: &[f64], lo: f64, hi: f64, k: Complex64) -> Scaled {
    let mut acc = Accum::new(k, lo, hi);
    if !(hi > lo) || g.len() < 2 {
        return acc.finish();
    }
    let last = g.len() - 1;
    let value = |s: f64| {
        let pos = ((s - s0) / h).clamp(0.0, last as f64);
        let j = (pos.floor() as usize).min(last - 1);
        let t = pos - j as f64;
        g[j] * (1.0 - t) + g[j + 1] * t
    };
    let j_start = (((lo - s0) / h).floor().max(0.0) as usize).min(last - 1);
    for j in j_start..last {
        let (sj, sj1) = (s0 + j as f64 * h, s0 + (j + 1) as f64 * h);
        if sj >= hi {
            break;
        }
        let (p, q) = (sj.max(lo), sj1.min(hi));
        if q <= p {
            continue;
        }
        let (gp, gq) = if p == sj && q == sj1 { (g[j], g[j + 1]) } else { (value(p), value(q)) };
        let w = q - p;
        let (p0, p1, _) = phis(-I * k * w);
        acc.add(p, w * (gp * p0 + gq * p1));
    }
    acc.finish()
}

/// `∫_lo^hi V(η/2)/4 e^{-ikη} dη`, exact.
fn leading_transform(cells: &[(f64, f64, f64)], lo: f64, hi: f64, k: Complex64) -> Scaled {
    let mut acc = Accum::new(k, lo, hi);
    for &(l, r, v) in cells {
        let (p, q) = ((2.0 * l).max(lo), (2.0 * r).min(hi));
        if q > p {
            let w = q - p;
            let (_, _, phi) = phis(-I * k * w);
            acc.add(p, 0.25 * v * w * phi);
        }
    }
    acc.finish()
}

/// Largest `|Im k|` accepted by [`kernel_fourier`].
pub fn imaginary_guard(field: &KernelField) -> f64 {
    let h = field.spacing();
    if h == 0.0 {
        f64::INFINITY
    } else {
        10.0 / h
    }
}

/// Transform of a kernel piece, in scaled form, without the `|Im k|` guard.
pub fn kernel_fourier_scaled(field: &KernelField, piece: KernelPiece, k: Complex64) -> Scaled {
    let h = field.spacing();
    let (x0, y0) = (field.x_grid[0], field.y_grid[0]);
    match piece {
        KernelPiece::FullX => {
            let reg = linear_transform(x0, h, &field.x_reg, x0, 0.0, k);
            Scaled::from_value(I * k * field.delta_prime_coeff + field.delta_coeff).add(reg)
        }
        KernelPiece::FullY => {
            let (lo, hi) = (y0, *field.y_grid.last().unwrap());
            linear_transform(y0, h, &field.y_reg, lo, hi, k).add(leading_transform(&field.cells, lo, hi, k))
        }
        KernelPiece::Window(w) => {
            let (lo, hi) = w.interval(field.hull);
            let base = if w.which.is_x() {
                linear_transform(x0, h, &field.x_reg, lo, hi, k)
            } else {
                linear_transform(y0, h, &field.y_reg, lo, hi, k).add(leading_transform(&field.cells, lo, hi, k))
            };
            // e^{-ik·offset}
            base.mul(Scaled::new((-I * k.re * w.offset).exp(), k.im * w.offset))
        }
    }
}

/// Fourier transform `∫ K(s) e^{-iks} ds` of a kernel piece.
pub fn kernel_fourier(field: &KernelField, piece: KernelPiece, k: Complex64) -> Result<Complex64, KernelError> {
    let limit = imaginary_guard(field);
    if k.im.abs() > limit {
        return Err(KernelError::ImaginaryPartTooLarge { im: k.im.abs(), limit });
    }
    Ok(kernel_fourier_scaled(field, piece, k).value())
}

/// A kernel transform as an [`EntireFunction`] (the `|Im k|` guard is the
/// caller's responsibility).
#[derive(Debug, Clone, Copy)]
pub struct KernelTransform<'a> {
    pub field: &'a KernelField,
    pub piece: KernelPiece,
}

impl EntireFunction for KernelTransform<'_> {
    fn eval_scaled(&self, z: Complex64) -> Scaled {
        kernel_fourier_scaled(self.field, self.piece, z)
    }
}

/// Sup-norm differences of the windowed kernels of two potentials sharing
/// their right part.
#[derive(Debug, Clone, Serialize)]
pub struct InfluenceReport {
    pub hull: (f64, f64),
    pub r: f64,
    pub n_grid: usize,
    /// `(window, sup |K¹ - K²|)` for all six windows.
    pub differences: Vec<(WindowKind, f64)>,
    /// Larger of the two solves' truncation estimates.
    pub truncation_error: f64,
    pub pass: bool,
}

impl InfluenceReport {
    pub fn difference(&self, which: WindowKind) -> f64 {
        self.differences.iter().find(|d| d.0 == which).map_or(f64::NAN, |d| d.1)
    }
}

fn window_sup_diff(grid: &[f64], f: &[f64], g: &[f64], (lo, hi): (f64, f64)) -> f64 {
    grid.iter()
        .zip(f.iter().zip(g))
        .filter(|(s, _)| **s >= lo && **s <= hi)
        .fold(0.0_f64, |m, (_, (p, q))| m.max((p - q).abs()))
}

/// Compare the windowed kernels of `v1` and `v2`, which must coincide on
/// `[0, b]`. Both are solved on their common hull. Passes when the `X2` and
/// `Y2` windows agree to within ten times the truncation estimate.
pub fn domain_of_influence_check(
    v1: &Potential,
    v2: &Potential,
    r: f64,
    n_grid: usize,
) -> Result<InfluenceReport, KernelError> {
    let (a1, b1) = v1.hull();
    let (a2, b2) = v2.hull();
    let hull = (a1.min(a2), b1.max(b2));
    if !v1.agrees_on(v2, 0.0, hull.1) {
        return Err(KernelError::SharedPartMismatch);
    }
    let f1 = solve_kernels_on(v1, hull, n_grid)?;
    let f2 = solve_kernels_on(v2, hull, n_grid)?;
    let differences: Vec<(WindowKind, f64)> = WindowKind::ALL
        .iter()
        .map(|&which| {
            let interval = KernelWindow::new(which, r).interval(hull);
            let d = if which.is_x() {
                window_sup_diff(&f1.x_grid, &f1.x_reg, &f2.x_reg, interval)
            } else {
                let y1: Vec<f64> = f1.y_reg.iter().zip(&f1.y_leading).map(|(p, q)| p + q).collect();
                let y2: Vec<f64> = f2.y_reg.iter().zip(&f2.y_leading).map(|(p, q)| p + q).collect();
                window_sup_diff(&f1.y_grid, &y1, &y2, interval)
            };
            (which, d)
        })
        .collect();
    let truncation_error = f1.truncation_error.max(f2.truncation_error);
    let bound = 10.0 * truncation_error;
    let pass = differences.iter().filter(|d| matches!(d.0, WindowKind::X2 | WindowKind::Y2)).all(|d| d.1 <= bound);
    Ok(InfluenceReport { hull, r, n_grid, differences, truncation_error, pass })
}
