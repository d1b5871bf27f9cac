//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use resoline::{make_piecewise, square_well, Potential};

pub fn square() -> Potential {
    square_well(-4.0, -1.0, 1.0).unwrap().into_potential().unwrap()
}

/// Eight cells of alternating sign on `[-1, 1.2]`.
pub fn staircase() -> Potential {
    let bps: Vec<f64> = (0..=8).map(|i| -1.0 + 0.275 * i as f64).collect();
    let vals: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { -3.0 - i as f64 } else { 2.0 }).collect();
    make_piecewise(&bps, &vals).unwrap()
}

/// A 41 × 11 grid on `[-20, 20] × [-2, 2]`.
pub fn k_grid() -> Vec<Complex64> {
    (0..41).flat_map(|i| (0..11).map(move |j| Complex64::new(-20.0 + i as f64, -2.0 + 0.4 * j as f64))).collect()
}
