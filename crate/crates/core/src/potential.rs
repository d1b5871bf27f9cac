//! Piecewise-constant, compactly supported potentials.
//!
//! A [`Potential`] is real, piecewise constant and supported on a hull
//! `[a, b]` with `a < 0 < b`. A [`Fragment`] carries the same data without the
//! straddle requirement; fragments are the building blocks that
//! [`glue`] joins into potentials sharing a left or right part.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("breakpoints must be finite and strictly increasing")]
    NonIncreasingBreakpoints,
    #[error("expected {expected} cell values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cell values must be finite")]
    NonFiniteValue,
    #[error("support hull ({a}, {b}) does not satisfy a < 0 < b")]
    HullDoesNotStraddleZero { a: f64, b: f64 },
    #[error("potential vanishes identically")]
    AllZero,
    #[error("empty interval [{left}, {right}]")]
    EmptyInterval { left: f64, right: f64 },
    #[error("left part must live in x <= 0 and right part in x >= 0")]
    OverlappingSupports,
}

/// Canonical trimmed cells: no leading/trailing zero cells, no two adjacent
/// cells with the same value.
fn canonicalize(breakpoints: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>), PotentialError> {
    if values.len() + 1 != breakpoints.len() {
        return Err(PotentialError::LengthMismatch {
            expected: breakpoints.len().saturating_sub(1),
            got: values.len(),
        });
    }
    if breakpoints.iter().any(|x| !x.is_finite()) || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(PotentialError::NonIncreasingBreakpoints);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PotentialError::NonFiniteValue);
    }
    let first = values.iter().position(|&v| v != 0.0);
    let last = values.iter().rposition(|&v| v != 0.0);
    let (first, last) = match (first, last) {
        (Some(f), Some(l)) => (f, l),
        _ => return Ok((Vec::new(), Vec::new())),
    };
    let mut bps = vec![breakpoints[first]];
    let mut vals: Vec<f64> = Vec::new();
    for i in first..=last {
        if vals.last() == Some(&values[i]) {
            *bps.last_mut().unwrap() = breakpoints[i + 1];
        } else {
            vals.push(values[i]);
            bps.push(breakpoints[i + 1]);
        }
    }
    Ok((bps, vals))
}

/// A trimmed piecewise-constant function with compact support, not
/// necessarily straddling the origin. May be empty (identically zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FragmentFile")]
pub struct Fragment {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FragmentFile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<FragmentFile> for Fragment {
    type Error = PotentialError;

    fn try_from(file: FragmentFile) -> Result<Self, Self::Error> {
        Fragment::new(&file.breakpoints, &file.values)
    }
}

impl Fragment {
    pub fn new(breakpoints: &[f64], values: &[f64]) -> Result<Self, PotentialError> {
        let (breakpoints, values) = canonicalize(breakpoints, values)?;
        Ok(Self { breakpoints, values })
    }

    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), values: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Support hull, `None` for the zero fragment.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    pub fn integral(&self) -> f64 {
        cell_sum(&self.breakpoints, &self.values, |v| v)
    }

    pub fn into_potential(self) -> Result<Potential, PotentialError> {
        Potential::from_canonical(self.breakpoints, self.values, None)
    }
}

/// A real piecewise-constant potential supported on `[a, b]`, `a < 0 < b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialFile", into = "PotentialFile")]
pub struct Potential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    label: Option<String>,
}

/// On-disk JSON layout: `{"breakpoints": [...], "values": [...], "label": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl TryFrom<PotentialFile> for Potential {
    type Error = PotentialError;

    fn try_from(file: PotentialFile) -> Result<Self, Self::Error> {
        let mut v = make_piecewise(&file.breakpoints, &file.values)?;
        v.label = file.label;
        Ok(v)
    }
}

impl From<Potential> for PotentialFile {
    fn from(v: Potential) -> Self {
        PotentialFile { breakpoints: v.breakpoints, values: v.values, label: v.label }
    }
}

impl Potential {
    fn from_canonical(breakpoints: Vec<f64>, values: Vec<f64>, label: Option<String>) -> Result<Self, PotentialError> {
        if values.is_empty() {
            return Err(PotentialError::AllZero);
        }
        let (a, b) = (breakpoints[0], *breakpoints.last().unwrap());
        if !(a < 0.0 && 0.0 < b) {
            return Err(PotentialError::HullDoesNotStraddleZero { a, b });
        }
        Ok(Self { breakpoints, values, label })
    }

    /// The free case `V ≡ 0`: no cells and the degenerate hull `(0, 0)`.
    /// This is the only `Potential` that does not satisfy `a < 0 < b`.
    pub fn zero() -> Self {
        Self { breakpoints: vec![0.0], values: Vec::new(), label: None }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Cells taken verbatim (no trimming, no straddle check). Used for
    /// candidates inside optimisation loops, where zero cells may appear.
    pub(crate) fn raw(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(breakpoints.len(), values.len() + 1);
        Self { breakpoints, values, label: None }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    /// `b - a`.
    pub fn width(&self) -> f64 {
        let (a, b) = self.hull();
        b - a
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    /// Iterator over `(left, right, value)`.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, &v)| (w[0], w[1], v))
    }

    /// Value at `x`; cells are closed on the left.
    pub fn value_at(&self, x: f64) -> f64 {
        value_at(&self.breakpoints, &self.values, x)
    }

    pub fn integral(&self) -> f64 {
        cell_sum(&self.breakpoints, &self.values, |v| v)
    }

    pub fn l1_norm(&self) -> f64 {
        cell_sum(&self.breakpoints, &self.values, f64::abs)
    }

    /// Minimum cell value (0 if all cells are positive, since the potential
    /// vanishes outside its hull).
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::min)
    }

    /// Exact `∫_lo^hi V(x) dx`.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        self.cells()
            .map(|(l, r, v)| {
                let (l, r) = (l.max(lo), r.min(hi));
                if r > l {
                    v * (r - l)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Restriction to `[lo, hi]` as a fragment.
    pub fn restrict(&self, lo: f64, hi: f64) -> Fragment {
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        for (l, r, v) in self.cells() {
            let (l, r) = (l.max(lo), r.min(hi));
            if r > l {
                if bps.is_empty() {
                    bps.push(l);
                }
                vals.push(v);
                bps.push(r);
            }
        }
        Fragment::new(&bps, &vals).expect("restriction of a valid potential")
    }

    /// Split at the origin into the parts on `[a, 0]` and `[0, b]`.
    pub fn split(&self) -> (Fragment, Fragment) {
        let (a, b) = self.hull();
        (self.restrict(a, 0.0), self.restrict(0.0, b))
    }

    /// Whether `self` and `other` coincide as functions on `[lo, hi]`.
    pub fn agrees_on(&self, other: &Potential, lo: f64, hi: f64) -> bool {
        self.restrict(lo, hi) == other.restrict(lo, hi)
    }
}

fn value_at(breakpoints: &[f64], values: &[f64], x: f64) -> f64 {
    if values.is_empty() || x < breakpoints[0] || x >= *breakpoints.last().unwrap() {
        return 0.0;
    }
    let i = breakpoints.partition_point(|&p| p <= x) - 1;
    values[i.min(values.len() - 1)]
}

fn cell_sum(breakpoints: &[f64], values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    breakpoints.windows(2).zip(values).map(|(w, &v)| f(v) * (w[1] - w[0])).sum()
}

/// Build a potential from breakpoints and cell values, trimming zero cells at
/// both ends so that the hull is the minimal convex support.
pub fn make_piecewise(breakpoints: &[f64], values: &[f64]) -> Result<Potential, PotentialError> {
    let (bps, vals) = canonicalize(breakpoints, values)?;
    Potential::from_canonical(bps, vals, None)
}

/// Single-cell well (or barrier) of value `depth` on `[left, right]`.
pub fn square_well(depth: f64, left: f64, right: f64) -> Result<Fragment, PotentialError> {
    if !(left < right) {
        return Err(PotentialError::EmptyInterval { left, right });
    }
    if depth == 0.0 {
        return Err(PotentialError::AllZero);
    }
    Fragment::new(&[left, right], &[depth])
}

/// Concatenate a left part on `x <= 0` and a right part on `x >= 0`.
pub fn glue(left: &Fragment, right: &Fragment) -> Result<Potential, PotentialError> {
    if left.hull().is_some_and(|(_, hi)| hi > 0.0) || right.hull().is_some_and(|(lo, _)| lo < 0.0) {
        return Err(PotentialError::OverlappingSupports);
    }
    let mut bps: Vec<f64> = left.breakpoints.clone();
    let mut vals: Vec<f64> = left.values.clone();
    if let Some((lo, _)) = right.hull() {
        match bps.last() {
            Some(&hi) if hi < lo => {
                vals.push(0.0);
                bps.push(lo);
            }
            Some(_) => {}
            None => bps.push(lo),
        }
        bps.extend_from_slice(&right.breakpoints[1..]);
        vals.extend_from_slice(&right.values);
    }
    if vals.is_empty() {
        return Err(PotentialError::AllZero);
    }
    make_piecewise(&bps, &vals)
}

/// Random potential with at most `max_cells` cells, values uniform in
/// `[-max_abs, max_abs]`, hull endpoints `a ∈ [-half_width, -0.1·half_width]`
/// and `b ∈ [0.1·half_width, half_width]`.
pub fn random_potential<R: Rng + ?Sized>(rng: &mut R, max_cells: usize, max_abs: f64, half_width: f64) -> Potential {
    loop {
        let n = rng.random_range(1..=max_cells.max(1));
        let a = -rng.random_range(0.1 * half_width..=half_width);
        let b = rng.random_range(0.1 * half_width..=half_width);
        let mut inner: Vec<f64> = (0..n - 1).map(|_| rng.random_range(a..b)).collect();
        inner.sort_by(f64::total_cmp);
        let mut bps = vec![a];
        bps.extend(inner);
        bps.push(b);
        let vals: Vec<f64> = (0..n).map(|_| rng.random_range(-max_abs..=max_abs)).collect();
        if let Ok(v) = make_piecewise(&bps, &vals) {
            return v;
        }
    }
}
