//! Resonant scattering of one-dimensional Schrödinger operators with
//! compactly supported, piecewise-constant potentials.
//!
//! * [`potential`]: potentials, fragments and gluing.
//! * [`scattering`]: transfer matrices, `X̂`, `Ŷ`, `det S`.
//! * [`wavekernel`]: the kernels `X`, `Y` by characteristic integration and
//!   their windowed Fourier transforms.
//! * [`czeros`]: argument-principle zero finding, resonances, bound states.
//! * [`asymptotics`]: indicators, zero densities, Cartwright and
//!   Nevanlinna–Levin checks, Blaschke products.
//! * [`inverse`]: distinguishability and recovery of the left part of a
//!   potential from `det S`.

pub mod asymptotics;
pub mod czeros;
pub mod entire;
pub mod inverse;
pub mod potential;
pub mod quad;
pub mod scattering;
pub mod wavekernel;

pub use entire::{EntireFunction, Scaled};
pub use num_complex::Complex64;
pub use potential::{glue, make_piecewise, square_well, Fragment, Potential, PotentialError};
pub use scattering::{det_s, xhat, yhat, ScatteringSample, XhatFn, YhatFn};
