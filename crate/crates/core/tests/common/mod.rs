//! Oracles shared between test targets.

use rayon::prelude::*;
use resoline::Potential;

/// Bound-state energies by shooting: `ψ = e^{κx}` left of the support,
/// RK4 across each cell, mismatch `ψ' + κψ` at `b`, sign changes bracketed
/// on a scan of `κ` and refined by bisection.
pub fn shooting_energies(v: &Potential) -> Vec<f64> {
    let cells: Vec<(f64, f64, f64)> = v.cells().collect();
    let mismatch = |kappa: f64| {
        let (mut p, mut dp) = (1.0_f64, kappa);
        for &(l, r, val) in &cells {
            let n = (((r - l) / 2e-4).ceil() as usize).max(1);
            let h = (r - l) / n as f64;
            let g = |p: f64| (val + kappa * kappa) * p;
            for _ in 0..n {
                let (k1p, k1d) = (dp, g(p));
                let (k2p, k2d) = (dp + 0.5 * h * k1d, g(p + 0.5 * h * k1p));
                let (k3p, k3d) = (dp + 0.5 * h * k2d, g(p + 0.5 * h * k2p));
                let (k4p, k4d) = (dp + h * k3d, g(p + h * k3p));
                p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                dp += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            }
            // keep the magnitudes tame; only the sign and zero matter
            let s = p.abs().max(dp.abs());
            p /= s;
            dp /= s;
        }
        dp + kappa * p
    };
    let kmax = (-v.min_value()).max(0.0).sqrt();
    let n_scan = 800;
    let ks: Vec<f64> = (1..=n_scan).map(|i| kmax * i as f64 / n_scan as f64).collect();
    let vals: Vec<f64> = ks.par_iter().map(|&k| mismatch(k)).collect();
    let mut energies = Vec::new();
    for i in 0..ks.len() - 1 {
        if vals[i].signum() != vals[i + 1].signum() {
            let (mut lo, mut hi, mut flo) = (ks[i], ks[i + 1], vals[i]);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = mismatch(mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let kappa = 0.5 * (lo + hi);
            energies.push(-kappa * kappa);
        }
    }
    energies.sort_by(f64::total_cmp);
    energies
}
