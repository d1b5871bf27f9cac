//! Log-scaled complex values and the [`EntireFunction`] abstraction shared by
//! the zero finder and the growth estimators.
//!
//! Scattering functions grow like `exp(c |Im k|)`, so deep in the lower
//! half-plane their values leave the range of `f64`. Every evaluation is
//! therefore carried as a mantissa together with a natural-log scale.

use num_complex::Complex64;

/// A complex number represented as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        Self { mantissa, log_scale }
    }

    pub fn from_value(value: Complex64) -> Self {
        Self { mantissa: value, log_scale: 0.0 }
    }

    /// Rescale so that the mantissa has modulus one (or is zero).
    pub fn normalized(self) -> Self {
        let m = self.mantissa.norm();
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        Self { mantissa: self.mantissa / m, log_scale: self.log_scale + m.ln() }
    }

    /// The plain value; may overflow to infinity.
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    pub fn mul(self, other: Scaled) -> Scaled {
        Scaled::new(self.mantissa * other.mantissa, self.log_scale + other.log_scale).normalized()
    }

    pub fn div(self, other: Scaled) -> Scaled {
        Scaled::new(self.mantissa / other.mantissa, self.log_scale - other.log_scale).normalized()
    }

    /// `self / other` as a plain complex number.
    pub fn ratio(self, other: Scaled) -> Complex64 {
        (self.mantissa / other.mantissa) * (self.log_scale - other.log_scale).exp()
    }

    pub fn add(self, other: Scaled) -> Scaled {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let s = self.log_scale.max(other.log_scale);
        let m = self.mantissa * (self.log_scale - s).exp() + other.mantissa * (other.log_scale - s).exp();
        Scaled::new(m, s).normalized()
    }

    pub fn neg(self) -> Scaled {
        Scaled::new(-self.mantissa, self.log_scale)
    }

    pub fn sub(self, other: Scaled) -> Scaled {
        self.add(other.neg())
    }
}

/// An entire function that can be evaluated in log-scaled form.
///
/// Implemented for plain closures `Fn(Complex64) -> Complex64`, and by the
/// scattering functions of this crate, which override
/// [`EntireFunction::eval_scaled`] to stay finite far from the real axis.
pub trait EntireFunction: Sync {
    fn eval_scaled(&self, z: Complex64) -> Scaled;

    fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_scaled(z).value()
    }

    fn ln_abs(&self, z: Complex64) -> f64 {
        self.eval_scaled(z).ln_abs()
    }
}

impl<F> EntireFunction for F
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval_scaled(&self, z: Complex64) -> Scaled {
        Scaled::from_value(self(z))
    }
}

/// Numerical derivative ratio `f'(z) / f(z)` by central differences, computed
/// from scaled values so that it stays finite wherever `f(z) != 0`.
pub fn log_derivative<F: EntireFunction + ?Sized>(f: &F, z: Complex64, step: f64) -> Complex64 {
    let h = Complex64::new(step, 0.0);
    let f0 = f.eval_scaled(z);
    let fp = f.eval_scaled(z + h);
    let fm = f.eval_scaled(z - h);
    (fp.ratio(f0) - fm.ratio(f0)) / (2.0 * h)
}
