//! Partial inverse problem: potentials that share their right part `[0, b]`
//! are compared through `det S`, and the left part on `[a, 0]` is recovered
//! from `det S` samples or from resonances by damped least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::czeros::{resonances, ZeroError, ZeroSetFile};
use crate::potential::{Fragment, Potential};
use crate::scattering::{det_s, xhat, yhat, ScatteringError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InverseError {
    #[error("potentials differ on [0, b]")]
    SharedPartMismatch,
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("loss increased on {0} consecutive damped steps")]
    DivergedLoss(usize),
    #[error("damping raised past 1e8 (lambda = {lambda:.3e})")]
    JacobianSingular { lambda: f64 },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
}

/// Common hull of two potentials, after checking that they agree on `[0, b]`.
fn shared_hull(v1: &Potential, v2: &Potential) -> Result<(f64, f64), InverseError> {
    let (a1, b1) = v1.hull();
    let (a2, b2) = v2.hull();
    let hull = (a1.min(a2), b1.max(b2));
    if !v1.agrees_on(v2, 0.0, hull.1) {
        return Err(InverseError::SharedPartMismatch);
    }
    Ok(hull)
}

/// `max_k |det S¹(k) − det S²(k)|` over `k_grid`.
pub fn distinguishability(v1: &Potential, v2: &Potential, k_grid: &[f64]) -> Result<f64, InverseError> {
    shared_hull(v1, v2)?;
    let diffs: Result<Vec<f64>, ScatteringError> = k_grid
        .par_iter()
        .map(|&k| {
            let k = Complex64::new(k, 0.0);
            Ok((det_s(v1, k)? - det_s(v2, k)?).norm())
        })
        .collect();
    Ok(diffs?.into_iter().fold(0.0, f64::max))
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// The 201-point grid `k = 0.1, …, 20`.
pub fn standard_k_grid() -> Vec<f64> {
    linspace(0.1, 20.0, 201)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetSSample {
    pub k: f64,
    pub re: f64,
    pub im: f64,
}

impl DetSSample {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Exact `det S` of `v` on real `k`.
pub fn synthetic_det_s(v: &Potential, k_grid: &[f64]) -> Result<Vec<DetSSample>, InverseError> {
    k_grid
        .iter()
        .map(|&k| {
            let d = det_s(v, Complex64::new(k, 0.0))?;
            Ok(DetSSample { k, re: d.re, im: d.im })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    DetSGrid,
    ResonanceMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseData {
    DetS(Vec<DetSSample>),
    Resonances(ZeroSetFile),
}

fn default_tolerance() -> f64 {
    1e-18
}

/// Unknown: `n_params` equal cells on `[a, 0]`. Known: the right part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseProblemSpec {
    pub known_right: Fragment,
    pub a: f64,
    pub n_params: usize,
    pub data: InverseData,
    pub loss_kind: LossKind,
    /// Loss below which the recovery counts as converged.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl InverseProblemSpec {
    pub fn validate(&self) -> Result<(), InverseError> {
        let bad = |m: &str| Err(InverseError::InvalidSpec(m.to_string()));
        if !(self.a < 0.0) {
            return bad("a must be negative");
        }
        if self.n_params == 0 {
            return bad("n_params must be at least 1");
        }
        match self.known_right.hull() {
            Some((lo, _)) if lo >= 0.0 => {}
            _ => return bad("known_right must be nonzero and supported in x >= 0"),
        }
        match (&self.data, self.loss_kind) {
            (InverseData::DetS(samples), LossKind::DetSGrid) => {
                if samples.is_empty() {
                    return bad("no det S samples");
                }
                let mut ks: Vec<f64> = samples.iter().map(|s| s.k).collect();
                ks.sort_by(f64::total_cmp);
                if ks.iter().any(|k| !k.is_finite()) || ks.windows(2).any(|w| w[0] == w[1]) {
                    return bad("k samples must be finite and distinct");
                }
            }
            (InverseData::Resonances(z), LossKind::ResonanceMatch) => {
                if z.zeros.is_empty() || !z.radius.is_some_and(|r| r > 0.0) {
                    return bad("resonance data needs zeros and a positive radius");
                }
            }
            _ => return bad("loss_kind does not match the data"),
        }
        Ok(())
    }

    /// Candidate potential with left cell values `params`.
    pub fn candidate(&self, params: &[f64]) -> Potential {
        let n = params.len();
        let mut bps: Vec<f64> = (0..n).map(|i| self.a * (n - i) as f64 / n as f64).collect();
        let mut vals = params.to_vec();
        let rb = self.known_right.breakpoints();
        if rb[0] > 0.0 {
            bps.push(0.0);
            vals.push(0.0);
        }
        bps.extend_from_slice(rb);
        vals.extend_from_slice(self.known_right.values());
        Potential::raw(bps, vals)
    }

    /// Residual vector whose squared norm is the loss.
    pub fn residuals(&self, params: &[f64]) -> Result<Vec<f64>, InverseError> {
        let v = self.candidate(params);
        match &self.data {
            InverseData::DetS(samples) => {
                let mut out = Vec::with_capacity(2 * samples.len());
                for s in samples {
                    let d = det_s(&v, Complex64::new(s.k, 0.0))? - s.value();
                    out.push(d.re);
                    out.push(d.im);
                }
                Ok(out)
            }
            InverseData::Resonances(file) => {
                let radius = file.radius.unwrap_or(0.0);
                let target: Vec<Complex64> = file.zeros.iter().map(|z| Complex64::new(z.re, z.im)).collect();
                let computed = resonances(&v, radius)?.locations();
                Ok(resonance_residuals(&target, &computed, radius))
            }
        }
    }

    pub fn loss(&self, params: &[f64]) -> Result<f64, InverseError> {
        Ok(self.residuals(params)?.iter().map(|r| r * r).sum())
    }
}

/// Each target is paired with its nearest computed zero (two entries per
/// target). Computed zeros nobody picked add their distance to the circle
/// `|k| = radius` to one trailing penalty entry. With no computed zeros at all,
/// each target is charged its own distance to the circle.
fn resonance_residuals(target: &[Complex64], computed: &[Complex64], radius: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * target.len() + 1);
    let mut used = vec![false; computed.len()];
    for t in target {
        let nearest = computed.iter().enumerate().min_by(|(_, p), (_, q)| (*p - t).norm().total_cmp(&(*q - t).norm()));
        match nearest {
            Some((j, c)) => {
                used[j] = true;
                out.push(c.re - t.re);
                out.push(c.im - t.im);
            }
            None => {
                out.push(radius - t.norm());
                out.push(0.0);
            }
        }
    }
    let penalty: f64 = computed.iter().zip(&used).filter(|(_, &u)| !u).map(|(c, _)| (radius - c.norm()).powi(2)).sum();
    out.push(penalty.sqrt());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub recovered_left: Vec<f64>,
    pub final_loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub l2_error_vs_truth: Option<f64>,
    /// Loss after each accepted step; entry 0 is the initial loss.
    pub loss_trace: Vec<f64>,
}

impl RecoveryResult {
    /// Header `iteration,loss`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,loss\n");
        for (i, l) in self.loss_trace.iter().enumerate() {
            s.push_str(&format!("{i},{l}\n"));
        }
        s
    }

    /// Fill `l2_error_vs_truth` from the truth's left part on `[a, 0]`.
    pub fn with_truth(mut self, spec: &InverseProblemSpec, truth: &Potential) -> Self {
        self.l2_error_vs_truth = Some(left_l2_error(spec.a, &self.recovered_left, truth));
        self
    }
}

/// `‖V_rec − V_truth‖_{L²[a,0]}` with `V_rec` the equal-cell function on `[a, 0]`.
pub fn left_l2_error(a: f64, recovered: &[f64], truth: &Potential) -> f64 {
    let n = recovered.len();
    let mut cuts: Vec<f64> = (0..=n).map(|i| a * (n - i) as f64 / n as f64).collect();
    cuts.extend(truth.breakpoints().iter().copied().filter(|&x| a < x && x < 0.0));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let cell = (((mid - a) / -a) * n as f64).floor().clamp(0.0, (n - 1) as f64) as usize;
        let d = recovered[cell] - truth.value_at(mid);
        sum += d * d * (w[1] - w[0]);
    }
    sum.sqrt()
}

const MAX_REJECTIONS: usize = 10;
const LAMBDA_MAX: f64 = 1e8;

fn jacobian(spec: &InverseProblemSpec, params: &[f64], r0: &[f64]) -> Result<DMatrix<f64>, InverseError> {
    let cols: Result<Vec<Vec<f64>>, InverseError> = (0..params.len())
        .into_par_iter()
        .map(|j| {
            let h = 1e-6 * (1.0 + params[j].abs());
            let mut p = params.to_vec();
            p[j] += h;
            let r = spec.residuals(&p)?;
            Ok(r.iter().zip(r0).map(|(a, b)| (a - b) / h).collect())
        })
        .collect();
    let cols = cols?;
    Ok(DMatrix::from_fn(r0.len(), params.len(), |i, j| cols[j][i]))
}

/// Levenberg–Marquardt on the residuals of `spec`, starting from `init`.
/// Returns the best iterate; `converged` means `final_loss < spec.tolerance`.
pub fn recover_left(spec: &InverseProblemSpec, init: &[f64], max_iter: usize) -> Result<RecoveryResult, InverseError> {
    spec.validate()?;
    if init.len() != spec.n_params {
        return Err(InverseError::InvalidSpec(format!(
            "init has {} values, n_params is {}",
            init.len(),
            spec.n_params
        )));
    }
    let mut p = init.to_vec();
    let mut r = spec.residuals(&p)?;
    let mut loss: f64 = r.iter().map(|x| x * x).sum();
    let mut trace = vec![loss];
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < max_iter && loss >= spec.tolerance {
        let jac = jacobian(spec, &p, &r)?;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        let mut rejections = 0;
        let accepted = loop {
            if lambda > LAMBDA_MAX {
                return Err(InverseError::JacobianSingular { lambda });
            }
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let step = match a.cholesky() {
                Some(c) => c.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            // a trial point where the zero search breaks down counts as uphill
            let (r_trial, loss_trial) = match spec.residuals(&trial) {
                Ok(r) => {
                    let l: f64 = r.iter().map(|x| x * x).sum();
                    (r, l)
                }
                Err(InverseError::Zeros(_)) => (Vec::new(), f64::INFINITY),
                Err(e) => return Err(e),
            };
            if loss_trial < loss {
                lambda = (lambda / 3.0).max(1e-12);
                let small = step.norm() <= 1e-15 * (1.0 + DVector::from_column_slice(&p).norm());
                p = trial;
                r = r_trial;
                loss = loss_trial;
                break !small;
            }
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                if loss < spec.tolerance {
                    break false;
                }
                return Err(InverseError::DivergedLoss(rejections));
            }
            lambda *= 4.0;
        };
        iterations += 1;
        trace.push(loss);
        if !accepted {
            break;
        }
    }
    Ok(RecoveryResult {
        recovered_left: p,
        final_loss: loss,
        iterations,
        converged: loss < spec.tolerance,
        l2_error_vs_truth: None,
        loss_trace: trace,
    })
}

/// Distances between the scattering data of a pair sharing its right part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub hull: (f64, f64),
    pub radius: f64,
    pub left_parts_identical: bool,
    /// On the standard grid `k = 0.1, …, 20`.
    pub distinguishability: f64,
    /// `sup |X̂¹ − X̂²|` over `[−radius, radius]`.
    pub xhat_sup_diff: f64,
    /// `sup |Ŷ¹ − Ŷ²|` over `[−radius, radius]`.
    pub yhat_sup_diff: f64,
    /// Hausdorff distance of the resonance sets within `radius`.
    pub resonance_hausdorff: f64,
    pub n_resonances: (usize, usize),
    /// Identical left parts give all distances below `1e-10`; distinct ones
    /// give distinguishability above `1e-8`.
    pub pass: bool,
}

fn hausdorff(p: &[Complex64], q: &[Complex64]) -> f64 {
    if p.is_empty() && q.is_empty() {
        return 0.0;
    }
    if p.is_empty() || q.is_empty() {
        return f64::INFINITY;
    }
    let directed = |p: &[Complex64], q: &[Complex64]| {
        p.iter().map(|z| q.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(p, q).max(directed(q, p))
}

pub fn uniqueness_report(pair: (&Potential, &Potential), radius: f64) -> Result<UniquenessReport, InverseError> {
    let (v1, v2) = pair;
    let hull = shared_hull(v1, v2)?;
    let left_parts_identical = v1.agrees_on(v2, hull.0, 0.0);
    let distinguishability = distinguishability(v1, v2, &standard_k_grid())?;
    let ks = linspace(-radius, radius, 2001);
    let (xhat_sup_diff, yhat_sup_diff) = ks
        .par_iter()
        .map(|&k| {
            let k = Complex64::new(k, 0.0);
            ((xhat(v1, k) - xhat(v2, k)).norm(), (yhat(v1, k) - yhat(v2, k)).norm())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let z1 = resonances(v1, radius)?.locations();
    let z2 = resonances(v2, radius)?.locations();
    let resonance_hausdorff = hausdorff(&z1, &z2);
    let pass = if left_parts_identical {
        distinguishability < 1e-10 && xhat_sup_diff < 1e-10 && yhat_sup_diff < 1e-10 && resonance_hausdorff < 1e-10
    } else {
        distinguishability > 1e-8
    };
    Ok(UniquenessReport {
        hull,
        radius,
        left_parts_identical,
        distinguishability,
        xhat_sup_diff,
        yhat_sup_diff,
        resonance_hausdorff,
        n_resonances: (z1.len(), z2.len()),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{glue, square_well};

    fn pair(d1: f64, d2: f64) -> (Potential, Potential) {
        let right = square_well(-2.0, 0.0, 1.0).unwrap();
        (
            glue(&square_well(d1, -1.0, 0.0).unwrap(), &right).unwrap(),
            glue(&square_well(d2, -1.0, 0.0).unwrap(), &right).unwrap(),
        )
    }

    fn spec_for(truth: &Potential, n_params: usize) -> InverseProblemSpec {
        InverseProblemSpec {
            known_right: square_well(-2.0, 0.0, 1.0).unwrap(),
            a: -1.0,
            n_params,
            data: InverseData::DetS(synthetic_det_s(truth, &linspace(0.1, 10.0, 101)).unwrap()),
            loss_kind: LossKind::DetSGrid,
            tolerance: 1e-18,
        }
    }

    #[test]
    fn identical_pair_is_indistinguishable() {
        let (v, _) = pair(-1.0, -1.0);
        assert_eq!(distinguishability(&v, &v.clone(), &standard_k_grid()).unwrap(), 0.0);
    }

    #[test]
    fn depth_gap_is_visible() {
        let (v1, v2) = pair(-1.0, -1.5);
        let d = distinguishability(&v1, &v2, &standard_k_grid()).unwrap();
        assert!(d > 1e-3, "{d}");
        assert_eq!(d, distinguishability(&v2, &v1, &standard_k_grid()).unwrap());
    }

    #[test]
    fn thin_left_difference_is_visible() {
        let right = square_well(-2.0, 0.0, 1.0).unwrap();
        let l1 = Fragment::new(&[-1.0, -0.99, 0.0], &[-2.0, -1.0]).unwrap();
        let l2 = square_well(-1.0, -1.0, 0.0).unwrap();
        let d =
            distinguishability(&glue(&l1, &right).unwrap(), &glue(&l2, &right).unwrap(), &standard_k_grid()).unwrap();
        assert!(d > 1e-6, "{d}");
    }

    #[test]
    fn right_mismatch_is_rejected() {
        let v1 = square_well(-1.0, -1.0, 1.0).unwrap().into_potential().unwrap();
        let v2 = square_well(-2.0, -1.0, 1.0).unwrap().into_potential().unwrap();
        assert_eq!(distinguishability(&v1, &v2, &[1.0]).unwrap_err(), InverseError::SharedPartMismatch);
    }

    #[test]
    fn truth_has_zero_loss() {
        let (truth, _) = pair(-1.0, -1.0);
        let spec = spec_for(&truth, 1);
        assert!(spec.loss(&[-1.0]).unwrap() < 1e-20);
        assert!(spec.loss(&[-1.1]).unwrap() > 1e-6);
    }

    #[test]
    fn candidate_fills_gap_before_right_part() {
        let mut spec = spec_for(&pair(-1.0, -1.0).0, 2);
        spec.known_right = square_well(-2.0, 0.5, 1.0).unwrap();
        let v = spec.candidate(&[1.0, 2.0]);
        assert_eq!(v.breakpoints(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(v.values(), &[1.0, 2.0, 0.0, -2.0]);
    }

    #[test]
    fn round_trip_two_cells_from_zero() {
        let right = square_well(-2.0, 0.0, 1.0).unwrap();
        let left = Fragment::new(&[-1.0, -0.5, 0.0], &[-1.0, 0.7]).unwrap();
        let truth = glue(&left, &right).unwrap();
        let spec = spec_for(&truth, 2);
        let res = recover_left(&spec, &[0.0, 0.0], 100).unwrap().with_truth(&spec, &truth);
        assert!(res.converged, "{res:?}");
        assert!(res.l2_error_vs_truth.unwrap() < 1e-6, "{res:?}");
        assert!(res.loss_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fixed_point_init_stops_immediately() {
        let right = square_well(-2.0, 0.0, 1.0).unwrap();
        let left = Fragment::new(&[-1.0, -0.5, 0.0], &[-1.0, 0.7]).unwrap();
        let truth = glue(&left, &right).unwrap();
        let res = recover_left(&spec_for(&truth, 2), &[-1.0, 0.7], 50).unwrap();
        assert!(res.iterations <= 1 && res.final_loss < 1e-12, "{res:?}");
    }

    #[test]
    fn l2_error_maps_refined_cells() {
        let truth =
            glue(&Fragment::new(&[-1.0, -0.5, 0.0], &[-1.0, 0.7]).unwrap(), &square_well(-2.0, 0.0, 1.0).unwrap())
                .unwrap();
        assert_eq!(left_l2_error(-1.0, &[-1.0, -1.0, 0.7, 0.7], &truth), 0.0);
        let e = left_l2_error(-1.0, &[-1.0, 0.0, 0.7, 0.7], &truth);
        assert!((e - 0.5).abs() < 1e-14, "{e}");
    }

    #[test]
    fn spec_validation() {
        let (truth, _) = pair(-1.0, -1.0);
        let mut spec = spec_for(&truth, 2);
        spec.loss_kind = LossKind::ResonanceMatch;
        assert!(matches!(spec.validate(), Err(InverseError::InvalidSpec(_))));
        let mut spec = spec_for(&truth, 2);
        spec.a = 0.5;
        assert!(spec.validate().is_err());
        let spec = spec_for(&truth, 2);
        assert!(recover_left(&spec, &[0.0], 5).is_err());
    }

    #[test]
    fn resonance_residual_shapes() {
        let t = [Complex64::new(1.0, -1.0)];
        let c = [Complex64::new(1.0, -1.5), Complex64::new(-3.0, -1.0)];
        let r = resonance_residuals(&t, &c, 5.0);
        assert_eq!(r.len(), 3);
        assert_eq!((r[0], r[1]), (0.0, -0.5));
        assert!((r[2] - (5.0 - 10f64.sqrt())).abs() < 1e-15);
        assert_eq!(resonance_residuals(&t, &[], 5.0)[0], 5.0 - 2f64.sqrt());
    }

    #[test]
    fn hausdorff_basic() {
        let p = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let q = [Complex64::new(0.0, 0.0)];
        assert_eq!(hausdorff(&p, &q), 1.0);
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert!(hausdorff(&p, &[]).is_infinite());
    }

    #[test]
    fn spec_json_round_trip() {
        let (truth, _) = pair(-1.0, -1.0);
        let spec = spec_for(&truth, 2);
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<InverseProblemSpec>(&json).unwrap(), spec);
        assert!(serde_json::from_str::<InverseProblemSpec>(&json.replacen('{', "{\"bogus\":1,", 1)).is_err());
    }
}
